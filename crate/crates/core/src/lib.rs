//! Monte Carlo simulator of goal-oriented edge inference.
//!
//! A device uploads a pattern over a faded uplink to an access point with a
//! co-located primary MEC host; a helper host sits behind a backhaul link.
//! Each request must come back correctly classified within a deadline. The
//! simulator estimates how often that goal is met and what it costs in device
//! transmit energy and MEC compute energy, for standalone and ensemble
//! (score-sum) inference.
//!
//! Module map:
//! - [`config`]: scenario schema, unit conversion, validation
//! - [`radio`]: channel sampling, BER margin, uplink delay and power inversion
//! - [`compute`]: CPU availability, compute delay, MEH energy
//! - [`inference`]: perfect, synthetic and score-table oracles
//! - [`policy`]: per-request execution plan and trial evaluation
//! - [`montecarlo`]: campaigns and sweeps
//! - [`report`]: CSV output

pub mod compute;
pub mod config;
pub mod error;
pub mod inference;
pub mod montecarlo;
pub mod policy;
pub mod radio;
pub mod report;
pub mod rng;

pub use config::{validate, InferenceMode, OracleConfig, ScenarioConfig, ScenarioFile, Violation};
pub use error::{Result, SimError};
pub use montecarlo::{run_campaign, run_sweep, Campaign, CampaignStats, SweepRow, SweepSpec};
