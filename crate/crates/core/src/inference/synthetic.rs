//! Parametric stand-in for a pair of trained classifiers.
//!
//! The two classifiers are described by their clean accuracies, the
//! probability that both are right, and the probability `tie_gain` that the
//! score-sum combination picks the right label when exactly one of them is
//! right. Accuracy is flat up to `ber_knee`, falls linearly in `log10(BER)`
//! to chance level at `ber_floor`, and stays there. Setting the knee equal to
//! the floor turns the BER coupling off.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::InferenceDraw;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticOracleParams {
    pub a_p_clean: f64,
    pub a_h_clean: f64,
    /// P(both correct) on clean inputs.
    pub joint_clean: f64,
    pub tie_gain: f64,
    pub ber_knee: f64,
    pub ber_floor: f64,
    pub chance_level: f64,
}

impl Default for SyntheticOracleParams {
    fn default() -> Self {
        Self {
            a_p_clean: 0.88,
            a_h_clean: 0.88,
            joint_clean: 0.82,
            tie_gain: 0.5,
            ber_knee: 1e-3,
            ber_floor: 1e-1,
            chance_level: 0.1,
        }
    }
}

fn unit(x: f64) -> bool {
    (0.0..=1.0).contains(&x)
}

impl SyntheticOracleParams {
    /// Same classifier accuracy `a` on both MEHs, with the given joint.
    pub fn symmetric(a: f64, joint: f64, tie_gain: f64) -> Self {
        Self {
            a_p_clean: a,
            a_h_clean: a,
            joint_clean: joint,
            tie_gain,
            ..Self::default()
        }
    }

    /// BER-independent variant of `self`.
    pub fn without_ber_coupling(mut self) -> Self {
        self.ber_floor = self.ber_knee;
        self
    }

    pub fn coupling_enabled(&self) -> bool {
        self.ber_knee < self.ber_floor
    }

    /// `(field, message)` pairs for every broken invariant.
    pub fn violations(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        let mut check = |ok: bool, field: &str, msg: String| {
            if !ok {
                out.push((field.to_string(), msg));
            }
        };
        for (v, field) in [
            (self.a_p_clean, "a_p_clean"),
            (self.a_h_clean, "a_h_clean"),
            (self.joint_clean, "joint_clean"),
            (self.tie_gain, "tie_gain"),
            (self.chance_level, "chance_level"),
        ] {
            check(unit(v), field, format!("must lie in [0, 1], got {v}"));
        }
        let lo = (self.a_p_clean + self.a_h_clean - 1.0).max(0.0);
        let hi = self.a_p_clean.min(self.a_h_clean);
        check(
            self.joint_clean >= lo - 1e-12 && self.joint_clean <= hi + 1e-12,
            "joint_clean",
            format!("must lie in [{lo}, {hi}] given the marginals, got {}", self.joint_clean),
        );
        check(
            self.ber_knee > 0.0 && self.ber_knee <= self.ber_floor,
            "ber_knee",
            format!("must satisfy 0 < ber_knee <= ber_floor, got {}", self.ber_knee),
        );
        out
    }
}

/// Accuracy of a classifier with clean accuracy `a_clean` at `ber`.
pub fn degrade_accuracy(a_clean: f64, ber: f64, params: &SyntheticOracleParams) -> f64 {
    if !params.coupling_enabled() || ber <= params.ber_knee {
        return a_clean;
    }
    let floor_acc = params.chance_level.min(a_clean);
    if ber >= params.ber_floor {
        return floor_acc;
    }
    let t = (ber.log10() - params.ber_knee.log10()) / (params.ber_floor.log10() - params.ber_knee.log10());
    a_clean - (a_clean - floor_acc) * t
}

/// Marginals and joint of the two classifiers at one BER.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JointAccuracy {
    pub a_p: f64,
    pub a_h: f64,
    pub joint: f64,
    /// The scaled joint fell outside the feasible interval and was clamped.
    pub clamped: bool,
}

impl JointAccuracy {
    /// P(exactly one classifier is right).
    pub fn disagreement(&self) -> f64 {
        self.a_p + self.a_h - 2.0 * self.joint
    }
}

/// Degrades both marginals; the joint is scaled by the degradation factor of
/// the weaker marginal.
pub fn joint_accuracy(params: &SyntheticOracleParams, ber: f64) -> JointAccuracy {
    let a_p = degrade_accuracy(params.a_p_clean, ber, params);
    let a_h = degrade_accuracy(params.a_h_clean, ber, params);
    let (weak_clean, weak_now) = if params.a_p_clean <= params.a_h_clean {
        (params.a_p_clean, a_p)
    } else {
        (params.a_h_clean, a_h)
    };
    let factor = if weak_clean > 0.0 { weak_now / weak_clean } else { 1.0 };
    let raw = params.joint_clean * factor;
    let lo = (a_p + a_h - 1.0).max(0.0);
    let hi = a_p.min(a_h);
    let joint = raw.clamp(lo, hi);
    JointAccuracy {
        a_p,
        a_h,
        joint,
        clamped: (joint - raw).abs() > 1e-12,
    }
}

/// Closed-form P(aggregated value = 1) in cooperative mode.
pub fn cooperative_success_probability(params: &SyntheticOracleParams, ber: f64) -> f64 {
    let j = joint_accuracy(params, ber);
    j.joint + params.tie_gain * j.disagreement()
}

pub fn synthetic_sample(rng: &mut dyn RngCore, params: &SyntheticOracleParams, ber: f64) -> InferenceDraw {
    let j = joint_accuracy(params, ber);
    let u: f64 = rng.random();
    let v: f64 = rng.random();
    let (theta_p, theta_h) = if u < j.joint {
        (true, true)
    } else if u < j.a_p {
        (true, false)
    } else if u < j.a_p + (j.a_h - j.joint) {
        (false, true)
    } else {
        (false, false)
    };
    let theta_coop = match (theta_p, theta_h) {
        (true, true) => true,
        (false, false) => false,
        _ => v < params.tie_gain,
    };
    InferenceDraw {
        theta_p,
        theta_h,
        theta_coop,
        clamped: j.clamped,
    }
}
