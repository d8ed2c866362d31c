//! Campaign engine: independent trials, goal-effectiveness estimate, mean
//! energies, and parameter sweeps.
//!
//! Trials are grouped into fixed-size chunks. Each chunk is reduced in
//! trial order and chunk results are combined in chunk order, so floating
//! point sums, and therefore the returned statistics, are bit-identical for
//! any worker count.

use std::sync::Arc;

use rayon::prelude::*;
use serde_json::Value;
use statrs::distribution::{Beta, ContinuousCDF};

use crate::compute::{sample_beta, ComputePlanInput};
use crate::config::{
    validate, CiMethod, CpuDraw, InferenceMode, MehConfig, OracleConfig, RadioConfig, ScenarioConfig, ScenarioFile,
};
use crate::error::{Result, SimError};
use crate::inference::{build_oracle, InferenceOracle};
use crate::policy::{evaluate_trial, ExecutionMode, TrialContext, TrialOutcome};
use crate::radio::{sample_channel, ChannelDraw};
use crate::rng::{derive_seed, trial_stream, Dimension};

const CHUNK: u64 = 2048;
const Z95: f64 = 1.959_963_984_540_054;

/// Random inputs of one trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialDraws {
    pub channel: ChannelDraw,
    pub primary: CpuDraw,
    pub helper: Option<CpuDraw>,
}

/// A validated scenario with its oracle instantiated.
pub struct Campaign {
    config: ScenarioConfig,
    radio: RadioConfig,
    primary: MehConfig,
    helper: Option<MehConfig>,
    oracle: Arc<dyn InferenceOracle>,
}

impl Campaign {
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        let violations = validate(&config);
        if !violations.is_empty() {
            return Err(SimError::InvalidConfig(violations));
        }
        let oracle = build_oracle(&config.oracle)?;
        Ok(Self::assemble(config, oracle))
    }

    /// Uses an already-built oracle instead of the configured one.
    pub fn with_oracle(config: ScenarioConfig, oracle: Arc<dyn InferenceOracle>) -> Result<Self> {
        let violations = validate(&config);
        if !violations.is_empty() {
            return Err(SimError::InvalidConfig(violations));
        }
        Ok(Self::assemble(config, oracle))
    }

    fn assemble(config: ScenarioConfig, oracle: Arc<dyn InferenceOracle>) -> Self {
        Self {
            radio: config.device_radio(),
            primary: config.device_primary(),
            helper: config.device_helper(),
            config,
            oracle,
        }
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn draws(&self, trial: u64) -> TrialDraws {
        let seed = self.config.seed;
        let channel = sample_channel(&mut trial_stream(seed, trial, Dimension::Channel), &self.radio);
        let primary = sample_beta(&mut trial_stream(seed, trial, Dimension::PrimaryCpu), &self.primary);
        let helper = self
            .helper
            .as_ref()
            .map(|meh| sample_beta(&mut trial_stream(seed, trial, Dimension::HelperCpu), meh));
        TrialDraws {
            channel,
            primary,
            helper,
        }
    }

    /// Plans and evaluates trial `trial`.
    pub fn trial(&self, trial: u64) -> Result<TrialOutcome> {
        let draws = self.draws(trial);
        let cfg = &self.config;
        let ensemble = cfg.mode == InferenceMode::Ensemble;
        let ctx = TrialContext {
            radio: &self.radio,
            h: draws.channel.h,
            primary: &self.primary,
            helper: self.helper.as_ref().filter(|_| ensemble),
            compute: ComputePlanInput {
                primary_draw: draws.primary,
                helper_draw: draws.helper.filter(|_| ensemble),
                backhaul_rtt: cfg.backhaul.rtt,
                primary_workload: self.primary.workload_cycles,
                helper_workload: self.helper.as_ref().map_or(0.0, |h| h.workload_cycles),
            },
            goal: cfg.goal,
        };
        let plan = if ensemble {
            ctx.plan_ensemble()?
        } else {
            ctx.plan_standalone()?
        };
        let mut rng = trial_stream(cfg.seed, trial, Dimension::Oracle);
        evaluate_trial(&plan, &ctx, self.oracle.as_ref(), &mut rng)
    }

    fn run_chunks(&self) -> Result<CampaignStats> {
        let n = self.config.trials;
        let chunks = n.div_ceil(CHUNK);
        let partials: Vec<Accumulator> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut acc = Accumulator::default();
                for i in c * CHUNK..((c + 1) * CHUNK).min(n) {
                    acc.add(&self.trial(i)?);
                }
                Ok(acc)
            })
            .collect::<Result<_>>()?;
        let total = partials.into_iter().fold(Accumulator::default(), |mut a, b| {
            a.merge(&b);
            a
        });
        Ok(total.finish(self.config.ci_method))
    }

    /// Runs all trials on the global rayon pool.
    pub fn run(&self) -> Result<CampaignStats> {
        self.run_chunks()
    }

    /// Runs all trials on a dedicated pool of `workers` threads.
    pub fn run_with_workers(&self, workers: usize) -> Result<CampaignStats> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .map_err(|e| SimError::Domain(format!("cannot build worker pool: {e}")))?;
        pool.install(|| self.run_chunks())
    }
}

/// Validates `config`, then runs every trial.
pub fn run_campaign(config: &ScenarioConfig) -> Result<CampaignStats> {
    Campaign::new(config.clone())?.run()
}

/// Order-insensitive per-trial tallies.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Accumulator {
    pub trials: u64,
    pub goal_met: u64,
    pub delay_outage: u64,
    pub inference_outage: u64,
    pub best_effort: u64,
    pub cooperative: u64,
    pub helper_only: u64,
    pub energy_capped: u64,
    pub branch_ambiguous: u64,
    pub sum_e_device: f64,
    pub sum_e_device_goal_met: f64,
    pub sum_e_meh_p: f64,
    pub sum_e_meh_h: f64,
}

impl Accumulator {
    pub fn add(&mut self, t: &TrialOutcome) {
        self.trials += 1;
        self.goal_met += u64::from(t.goal_met);
        self.delay_outage += u64::from(t.delay_outage);
        self.inference_outage += u64::from(t.inference_outage);
        self.best_effort += u64::from(t.best_effort);
        self.cooperative += u64::from(t.mode == ExecutionMode::Cooperative);
        self.helper_only += u64::from(t.mode == ExecutionMode::StandaloneHelper);
        self.energy_capped += u64::from(t.energy_capped);
        self.branch_ambiguous += u64::from(t.branch_ambiguous);
        self.sum_e_device += t.e_device;
        if t.goal_met {
            self.sum_e_device_goal_met += t.e_device;
        }
        self.sum_e_meh_p += t.e_meh_p;
        self.sum_e_meh_h += t.e_meh_h;
    }

    pub fn merge(&mut self, o: &Accumulator) {
        self.trials += o.trials;
        self.goal_met += o.goal_met;
        self.delay_outage += o.delay_outage;
        self.inference_outage += o.inference_outage;
        self.best_effort += o.best_effort;
        self.cooperative += o.cooperative;
        self.helper_only += o.helper_only;
        self.energy_capped += o.energy_capped;
        self.branch_ambiguous += o.branch_ambiguous;
        self.sum_e_device += o.sum_e_device;
        self.sum_e_device_goal_met += o.sum_e_device_goal_met;
        self.sum_e_meh_p += o.sum_e_meh_p;
        self.sum_e_meh_h += o.sum_e_meh_h;
    }

    pub fn finish(&self, ci: CiMethod) -> CampaignStats {
        let n = self.trials as f64;
        let rate = |k: u64| k as f64 / n;
        let p = rate(self.goal_met);
        CampaignStats {
            trials: self.trials,
            effectiveness: p,
            effectiveness_ci95: confidence_interval(self.goal_met, self.trials, ci),
            mean_device_energy: self.sum_e_device / n,
            mean_device_energy_goal_met: (self.goal_met > 0)
                .then(|| self.sum_e_device_goal_met / self.goal_met as f64),
            mean_mec_energy: (self.sum_e_meh_p + self.sum_e_meh_h) / n,
            mean_meh_energy_primary: self.sum_e_meh_p / n,
            mean_meh_energy_helper: self.sum_e_meh_h / n,
            delay_outage_rate: rate(self.delay_outage),
            inference_outage_rate: rate(self.inference_outage),
            best_effort_rate: rate(self.best_effort),
            cooperative_rate: rate(self.cooperative),
            helper_only_rate: rate(self.helper_only),
            energy_capped_rate: rate(self.energy_capped),
            branch_ambiguous_rate: rate(self.branch_ambiguous),
        }
    }
}

/// Two-sided 95% interval for a binomial proportion.
pub fn confidence_interval(successes: u64, trials: u64, method: CiMethod) -> (f64, f64) {
    let n = trials as f64;
    let p = successes as f64 / n;
    match method {
        CiMethod::Normal => {
            let half = Z95 * (p * (1.0 - p) / n).sqrt();
            ((p - half).max(0.0), (p + half).min(1.0))
        }
        CiMethod::ClopperPearson => {
            let x = successes as f64;
            let lo = if successes == 0 {
                0.0
            } else {
                Beta::new(x, n - x + 1.0).expect("positive shape").inverse_cdf(0.025)
            };
            let hi = if successes == trials {
                1.0
            } else {
                Beta::new(x + 1.0, n - x).expect("positive shape").inverse_cdf(0.975)
            };
            (lo, hi)
        }
    }
}

/// Estimates of one campaign. Energies are per request, in joules.
#[derive(Debug, Clone, PartialEq)]
pub struct CampaignStats {
    pub trials: u64,
    pub effectiveness: f64,
    pub effectiveness_ci95: (f64, f64),
    pub mean_device_energy: f64,
    /// Mean device energy over goal-met trials only.
    pub mean_device_energy_goal_met: Option<f64>,
    pub mean_mec_energy: f64,
    pub mean_meh_energy_primary: f64,
    pub mean_meh_energy_helper: f64,
    pub delay_outage_rate: f64,
    pub inference_outage_rate: f64,
    pub best_effort_rate: f64,
    pub cooperative_rate: f64,
    pub helper_only_rate: f64,
    pub energy_capped_rate: f64,
    pub branch_ambiguous_rate: f64,
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

/// Prefix that applies a MEH field to both the primary and the helper.
pub const BOTH_MEHS_PREFIX: &str = "meh.";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Dotted path of a numeric config-file key, e.g. `radio.ber_target`,
    /// `backhaul.rtt_ms`, or `meh.beta_max` for both MEHs at once.
    pub parameter: String,
    pub values: Vec<f64>,
    pub modes: Vec<InferenceMode>,
    /// Every campaign reuses the master seed so trial `i` sees the same
    /// channel and availability draws across values and modes. When off,
    /// each campaign's seed is derived from (seed, value index, mode index).
    pub common_random_numbers: bool,
}

impl SweepSpec {
    pub fn new(parameter: impl Into<String>, values: Vec<f64>, modes: Vec<InferenceMode>) -> Self {
        Self {
            parameter: parameter.into(),
            values,
            modes,
            common_random_numbers: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub parameter: String,
    pub value: f64,
    pub mode: InferenceMode,
    pub stats: CampaignStats,
}

fn set_path(root: &mut Value, path: &str, value: f64) -> Result<()> {
    let mut node = root;
    let keys: Vec<&str> = path.split('.').collect();
    for key in &keys {
        node = node
            .get_mut(*key)
            .ok_or_else(|| SimError::Sweep(format!("unknown parameter path `{path}`")))?;
    }
    let replacement = match node {
        Value::Number(n) if n.is_u64() || n.is_i64() => {
            if value.fract() != 0.0 || value < 0.0 {
                return Err(SimError::Sweep(format!("`{path}` takes non-negative integers, got {value}")));
            }
            Value::from(value as u64)
        }
        Value::Number(_) | Value::Null => {
            Value::from(serde_json::Number::from_f64(value).ok_or_else(|| {
                SimError::Sweep(format!("`{path}`: {value} is not a finite number"))
            })?)
        }
        _ => return Err(SimError::Sweep(format!("`{path}` is not a numeric parameter"))),
    };
    *node = replacement;
    Ok(())
}

/// Returns a copy of `base` with one parameter replaced.
pub fn apply_parameter(base: &ScenarioFile, path: &str, value: f64) -> Result<ScenarioFile> {
    let mut doc = serde_json::to_value(base)?;
    if let Some(field) = path.strip_prefix(BOTH_MEHS_PREFIX) {
        set_path(&mut doc, &format!("primary.{field}"), value)?;
        if base.helper.is_some() {
            set_path(&mut doc, &format!("helper.{field}"), value)?;
        }
    } else {
        set_path(&mut doc, path, value)?;
    }
    Ok(serde_json::from_value(doc)?)
}

/// Runs one campaign per `(value, mode)`, in value-major order. All
/// configurations are built and validated before the first trial runs.
pub fn run_sweep(base: &ScenarioFile, sweep: &SweepSpec) -> Result<Vec<SweepRow>> {
    if sweep.values.is_empty() {
        return Err(SimError::Sweep("no sweep values".into()));
    }
    if sweep.modes.is_empty() {
        return Err(SimError::Sweep("no sweep modes".into()));
    }
    let mut jobs = Vec::with_capacity(sweep.values.len() * sweep.modes.len());
    for (vi, &value) in sweep.values.iter().enumerate() {
        let file = apply_parameter(base, &sweep.parameter, value)?;
        for (mi, &mode) in sweep.modes.iter().enumerate() {
            let mut config = file.to_config();
            config.mode = mode;
            if !sweep.common_random_numbers {
                config.seed = derive_seed(base.seed, &[vi as u64, mi as u64]);
            }
            let violations = validate(&config);
            if !violations.is_empty() {
                return Err(SimError::InvalidConfig(violations));
            }
            jobs.push((value, mode, config));
        }
    }

    let mut oracles: Vec<(OracleConfig, Arc<dyn InferenceOracle>)> = Vec::new();
    let mut rows = Vec::with_capacity(jobs.len());
    for (value, mode, config) in jobs {
        let oracle = match oracles.iter().find(|(c, _)| *c == config.oracle) {
            Some((_, o)) => Arc::clone(o),
            None => {
                let o = build_oracle(&config.oracle)?;
                oracles.push((config.oracle.clone(), Arc::clone(&o)));
                o
            }
        };
        let stats = Campaign::with_oracle(config, oracle)?.run()?;
        rows.push(SweepRow {
            parameter: sweep.parameter.clone(),
            value,
            mode,
            stats,
        });
    }
    Ok(rows)
}
