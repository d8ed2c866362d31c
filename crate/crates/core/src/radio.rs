//! Uplink radio model: channel sampling, BER margin, Shannon-type rate with
//! a BER-dependent SNR gap, and transmit power inversion for a target delay.
//!
//! Infinite delays and energies (zero rate) are represented by
//! `f64::INFINITY`, which saturates under addition and compares above every
//! finite value.

use std::f64::consts::LN_2;

use rand::Rng;
use rand_distr::{Distribution, Exp1, Normal};

use crate::config::{Fading, PathLossModel, RadioConfig};
use crate::error::{domain, Result};

/// Spectral efficiency (bit/s/Hz) below which the low-SE margin applies.
pub const SE_BRANCH_THRESHOLD: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BerBranch {
    /// `φ = -1.5 / ln(5·BER)`
    HighSe,
    /// `φ = -1.5 / ln(0.5·BER)`, used when the spectral efficiency is below 4.
    LowSe,
}

impl BerBranch {
    pub fn for_spectral_efficiency(se: f64) -> Self {
        if se >= SE_BRANCH_THRESHOLD {
            BerBranch::HighSe
        } else {
            BerBranch::LowSe
        }
    }
}

/// SNR penalty mapping a target BER to an achievable-rate reduction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerMargin {
    pub phi: f64,
    pub branch: BerBranch,
}

fn check_ber(ber: f64) -> Result<()> {
    if ber > 0.0 && ber <= 0.1 {
        Ok(())
    } else {
        Err(domain(format!("BER must lie in (0, 0.1], got {ber}")))
    }
}

pub fn ber_margin_for_branch(ber: f64, branch: BerBranch) -> Result<BerMargin> {
    check_ber(ber)?;
    let scale = match branch {
        BerBranch::HighSe => 5.0,
        BerBranch::LowSe => 0.5,
    };
    Ok(BerMargin {
        phi: -1.5 / (scale * ber).ln(),
        branch,
    })
}

/// Picks the margin branch from a spectral-efficiency hint (bit/s/Hz).
pub fn ber_margin(ber: f64, spectral_efficiency_hint: f64) -> Result<BerMargin> {
    ber_margin_for_branch(ber, BerBranch::for_spectral_efficiency(spectral_efficiency_hint))
}

/// Path loss in dB for a distance in metres and a carrier in Hz. No
/// minimum-distance check; see [`radio_pathloss_db`].
pub fn pathloss_db(model: &PathLossModel, distance: f64, carrier_freq: f64) -> f64 {
    model.a + model.b * distance.log10() + model.c * (carrier_freq / 1e9).log10()
}

/// Path loss for a device of this radio configuration; distances closer than
/// `min_distance` are rejected.
pub fn radio_pathloss_db(radio: &RadioConfig, distance: f64) -> Result<f64> {
    if !(distance >= radio.min_distance) {
        return Err(domain(format!(
            "distance {distance} m is below the minimum distance {} m",
            radio.min_distance
        )));
    }
    Ok(pathloss_db(&radio.pathloss, distance, radio.carrier_freq))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelDraw {
    /// m
    pub distance: f64,
    /// dB, including shadowing when enabled
    pub pathloss_db: f64,
    pub fading_power_gain: f64,
    /// linear power gain
    pub h: f64,
}

/// Draws a device position uniformly over the disk and a fading realization.
pub fn sample_channel<R: Rng + ?Sized>(rng: &mut R, radio: &RadioConfig) -> ChannelDraw {
    // u in (0, 1]
    let u = 1.0 - rng.random::<f64>();
    let distance = match radio.fixed_distance {
        Some(d) => d,
        None => (u.sqrt() * radio.cell_radius).max(radio.min_distance),
    };
    let fading_power_gain = match radio.fading {
        Fading::Rayleigh => Exp1.sample(rng),
        Fading::None => 1.0,
    };
    let mut loss = pathloss_db(&radio.pathloss, distance, radio.carrier_freq);
    if radio.shadowing_std_db > 0.0 {
        let shadow = Normal::new(0.0, radio.shadowing_std_db).expect("finite std");
        loss += shadow.sample(rng);
    }
    ChannelDraw {
        distance,
        pathloss_db: loss,
        fading_power_gain,
        h: 10f64.powf(-loss / 10.0) * fading_power_gain,
    }
}

/// Outcome of one uplink transmission.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UplinkResult {
    /// bit/s
    pub rate: f64,
    /// s; infinite when the rate is zero
    pub delay: f64,
    /// J; infinite when the rate is zero
    pub energy: f64,
    pub p_used: f64,
    pub clamped: bool,
    pub branch: BerBranch,
}

fn noise_power(radio: &RadioConfig) -> f64 {
    radio.noise_psd * radio.bandwidth
}

fn check_power(radio: &RadioConfig, h: f64, p: f64) -> Result<()> {
    if !(p >= 0.0 && p <= radio.p_max) {
        return Err(domain(format!("transmit power {p} W outside [0, {}]", radio.p_max)));
    }
    if !(h >= 0.0) {
        return Err(domain(format!("channel gain must be non-negative, got {h}")));
    }
    Ok(())
}

/// Spectral efficiency `log2(1 + φ·h·p / (N0·B))`.
fn spectral_efficiency(radio: &RadioConfig, phi: f64, h: f64, p: f64) -> f64 {
    (phi * h * p / noise_power(radio)).ln_1p() / LN_2
}

fn uplink_from_se(radio: &RadioConfig, se: f64, p: f64, branch: BerBranch) -> UplinkResult {
    let rate = radio.bandwidth * se;
    let (delay, energy) = if rate > 0.0 {
        let delay = radio.n_bits as f64 / rate;
        (delay, p * delay)
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    UplinkResult {
        rate,
        delay,
        energy,
        p_used: p,
        clamped: false,
        branch,
    }
}

/// Uplink delay at power `p` with a fixed margin branch.
pub fn uplink_delay_with_branch(radio: &RadioConfig, h: f64, p: f64, branch: BerBranch) -> Result<UplinkResult> {
    check_power(radio, h, p)?;
    let margin = ber_margin_for_branch(radio.ber_target, branch)?;
    let se = spectral_efficiency(radio, margin.phi, h, p);
    Ok(uplink_from_se(radio, se, p, branch))
}

/// Uplink delay at power `p`. The high-SE margin is tried first; when it
/// yields an SE below 4 the low-SE margin is applied and that result kept.
pub fn uplink_delay(radio: &RadioConfig, h: f64, p: f64) -> Result<UplinkResult> {
    let high = uplink_delay_with_branch(radio, h, p, BerBranch::HighSe)?;
    if high.rate / radio.bandwidth >= SE_BRANCH_THRESHOLD {
        Ok(high)
    } else {
        uplink_delay_with_branch(radio, h, p, BerBranch::LowSe)
    }
}

/// Transmit power that meets a target uplink delay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSolution {
    pub p: f64,
    pub clamped: bool,
    /// Branch chosen from the required spectral efficiency.
    pub branch: BerBranch,
    /// The forward evaluation at `p` would pick the other branch. This
    /// happens when the required SE is just below 4 but the high-SE margin
    /// pushes the realized SE above it.
    pub branch_ambiguous: bool,
}

/// Smallest power whose uplink delay equals `target_delay`, clamped to
/// `p_max`. A zero target or a zero gain cannot be met and returns `p_max`.
pub fn invert_power(radio: &RadioConfig, h: f64, target_delay: f64) -> Result<PowerSolution> {
    if !(target_delay >= 0.0) {
        return Err(domain(format!("target delay must be non-negative, got {target_delay}")));
    }
    if !(h >= 0.0) {
        return Err(domain(format!("channel gain must be non-negative, got {h}")));
    }
    let required_se = radio.n_bits as f64 / (radio.bandwidth * target_delay);
    let branch = BerBranch::for_spectral_efficiency(required_se);
    let clamped = |branch| PowerSolution {
        p: radio.p_max,
        clamped: true,
        branch,
        branch_ambiguous: false,
    };
    if target_delay == 0.0 || h == 0.0 {
        return Ok(clamped(branch));
    }
    let margin = ber_margin_for_branch(radio.ber_target, branch)?;
    let p = (required_se * LN_2).exp_m1() * noise_power(radio) / (margin.phi * h);
    if !(p <= radio.p_max) {
        return Ok(clamped(branch));
    }
    let branch_ambiguous = branch == BerBranch::LowSe && {
        let high = ber_margin_for_branch(radio.ber_target, BerBranch::HighSe)?;
        spectral_efficiency(radio, high.phi, h, p) >= SE_BRANCH_THRESHOLD
    };
    Ok(PowerSolution {
        p,
        clamped: false,
        branch,
        branch_ambiguous,
    })
}
