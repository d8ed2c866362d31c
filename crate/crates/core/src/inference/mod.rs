//! Inference oracles: where the per-request correctness values come from.
//!
//! An oracle draws the joint outcome of both classifiers for one request
//! ([`InferenceDraw`]). The execution mode then decides which value counts
//! ([`InferenceOutcome::for_mode`]). Drawing the full joint regardless of
//! mode keeps the oracle stream identical between standalone and cooperative
//! evaluation of the same trial.

mod empirical;
mod synthetic;

use std::sync::Arc;

use rand::RngCore;

pub use empirical::{argmax, load_score_set, write_score_set, GridPoint, ScoreSet, ScoreTable};
pub use synthetic::{
    cooperative_success_probability, degrade_accuracy, joint_accuracy, synthetic_sample, JointAccuracy,
    SyntheticOracleParams,
};

use crate::config::OracleConfig;
use crate::error::Result;
use crate::policy::ExecutionMode;

/// Joint correctness of both classifiers on one request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InferenceDraw {
    pub theta_p: bool,
    pub theta_h: bool,
    /// Aggregated value if both classifiers run and are combined.
    pub theta_coop: bool,
    /// The synthetic joint had to be clamped into the feasible interval.
    pub clamped: bool,
}

impl InferenceDraw {
    pub const ALL_CORRECT: Self = Self {
        theta_p: true,
        theta_h: true,
        theta_coop: true,
        clamped: false,
    };
}

/// Inference values of one executed request.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InferenceOutcome {
    /// `None` when the primary did not run the classifier.
    pub theta_p: Option<bool>,
    /// `None` when the helper did not run the classifier.
    pub theta_h: Option<bool>,
    /// The value that decides the goal.
    pub theta_agg: bool,
}

impl InferenceOutcome {
    pub fn for_mode(draw: InferenceDraw, mode: ExecutionMode) -> Self {
        match mode {
            ExecutionMode::StandalonePrimary => Self {
                theta_p: Some(draw.theta_p),
                theta_h: None,
                theta_agg: draw.theta_p,
            },
            ExecutionMode::StandaloneHelper => Self {
                theta_p: None,
                theta_h: Some(draw.theta_h),
                theta_agg: draw.theta_h,
            },
            ExecutionMode::Cooperative => Self {
                theta_p: Some(draw.theta_p),
                theta_h: Some(draw.theta_h),
                theta_agg: draw.theta_coop,
            },
        }
    }
}

/// A source of inference outcomes at a given BER.
pub trait InferenceOracle: Send + Sync {
    fn draw(&self, rng: &mut dyn RngCore, ber: f64) -> InferenceDraw;
}

/// Always correct.
#[derive(Debug, Clone, Copy, Default)]
pub struct PerfectOracle;

impl InferenceOracle for PerfectOracle {
    fn draw(&self, _rng: &mut dyn RngCore, _ber: f64) -> InferenceDraw {
        InferenceDraw::ALL_CORRECT
    }
}

impl InferenceOracle for SyntheticOracleParams {
    fn draw(&self, rng: &mut dyn RngCore, ber: f64) -> InferenceDraw {
        synthetic_sample(rng, self, ber)
    }
}

impl InferenceOracle for ScoreSet {
    fn draw(&self, rng: &mut dyn RngCore, ber: f64) -> InferenceDraw {
        self.sample(rng, ber)
    }
}

/// Instantiates the configured oracle; empirical score files are loaded here.
pub fn build_oracle(config: &OracleConfig) -> Result<Arc<dyn InferenceOracle>> {
    Ok(match config {
        OracleConfig::Perfect => Arc::new(PerfectOracle),
        OracleConfig::Synthetic(params) => Arc::new(params.clone()),
        OracleConfig::Empirical { manifest } => Arc::new(load_score_set(manifest)?),
    })
}
