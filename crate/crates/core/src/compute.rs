//! MEH compute model: availability sampling, standalone and ensemble
//! compute delay, and the `κ·f²·J` dynamic CPU energy.

use rand::Rng;

use crate::config::{CpuDraw, MehConfig};
use crate::error::{domain, Result};

/// Draws the available CPU fraction β for one request.
///
/// Deterministic MEHs always get `beta_max`; otherwise β ~ U[0, beta_max].
pub fn sample_beta<R: Rng + ?Sized>(rng: &mut R, meh: &MehConfig) -> CpuDraw {
    // consume the draw either way so toggling determinism keeps streams aligned
    let u: f64 = rng.random();
    let beta = if meh.beta_deterministic {
        meh.beta_max
    } else {
        u * meh.beta_max
    };
    CpuDraw::new(meh, beta)
}

/// `workload / f`, infinite when no CPU is available.
pub fn compute_delay_standalone(draw: &CpuDraw, workload: f64) -> f64 {
    if draw.f > 0.0 {
        workload / draw.f
    } else {
        f64::INFINITY
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComputePlanInput {
    pub primary_draw: CpuDraw,
    pub helper_draw: Option<CpuDraw>,
    /// s
    pub backhaul_rtt: f64,
    pub primary_workload: f64,
    pub helper_workload: f64,
}

impl ComputePlanInput {
    pub fn primary_delay(&self) -> f64 {
        compute_delay_standalone(&self.primary_draw, self.primary_workload)
    }

    /// Helper branch including the backhaul round trip; `None` without a helper.
    pub fn helper_delay(&self) -> Option<f64> {
        self.helper_draw
            .map(|d| compute_delay_standalone(&d, self.helper_workload) + self.backhaul_rtt)
    }
}

/// Cooperative compute delay: the slower of the primary branch and the
/// helper branch plus backhaul round trip.
pub fn compute_delay_ensemble(input: &ComputePlanInput) -> Result<f64> {
    let helper = input
        .helper_delay()
        .ok_or_else(|| domain("ensemble compute delay needs a helper draw"))?;
    Ok(input.primary_delay().max(helper))
}

/// Dynamic energy `κ·f²·J` of one inference; zero when `f = 0`.
pub fn meh_energy(meh: &MehConfig, draw: &CpuDraw, workload: f64) -> f64 {
    meh.kappa * draw.f * draw.f * workload
}
