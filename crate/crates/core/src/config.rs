//! Scenario configuration.
//!
//! Two layers live here. [`ScenarioFile`] is the JSON document as written by
//! users, with human units carried in suffixed keys (`p_max_dbm`,
//! `bandwidth_mhz`, `rtt_ms`, ...). [`ScenarioConfig`] is the strict-SI form
//! every other module consumes; the conversion happens exactly once, in
//! [`ScenarioFile::to_config`]. Every field of the file has a default, so `{}`
//! describes the reference single-device scenario (150 m cell at 3.5 GHz,
//! 10 MHz, -174 dBm/Hz, 20 dBm, two 4.5 GHz MEHs, 100 ms deadline).

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::inference::SyntheticOracleParams;

/// Log-distance path loss `a + b·log10(d_m) + c·log10(f_GHz)` in dB.
///
/// The default coefficients are the urban-microcell line-of-sight form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathLossModel {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl Default for PathLossModel {
    fn default() -> Self {
        Self {
            a: 32.4,
            b: 21.0,
            c: 20.0,
        }
    }
}

/// Small-scale fading applied on top of path loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fading {
    /// Unit-variance complex Rayleigh amplitude, i.e. exponential(1) power gain.
    #[default]
    Rayleigh,
    /// Power gain fixed at 1.
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadioConfig {
    /// Hz
    pub carrier_freq: f64,
    /// Hz, total uplink bandwidth of the AP
    pub bandwidth: f64,
    /// W/Hz
    pub noise_psd: f64,
    /// W
    pub p_max: f64,
    pub n_bits: u64,
    pub ber_target: f64,
    /// m
    pub cell_radius: f64,
    /// m
    pub min_distance: f64,
    pub pathloss: PathLossModel,
    pub fading: Fading,
    /// Pins the device at this distance instead of sampling it over the disk.
    pub fixed_distance: Option<f64>,
    /// Log-normal shadowing standard deviation in dB (0 disables it).
    pub shadowing_std_db: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MehConfig {
    /// cycles/s
    pub f_max: f64,
    /// J·s²/cycle³
    pub kappa: f64,
    pub alpha: f64,
    pub beta_max: f64,
    pub beta_deterministic: bool,
    /// cycles per inference
    pub workload_cycles: f64,
}

/// One availability realization of a MEH for one request.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpuDraw {
    pub beta: f64,
    /// cycles/s actually allocated: `alpha · beta · f_max`
    pub f: f64,
}

impl CpuDraw {
    pub fn new(meh: &MehConfig, beta: f64) -> Self {
        Self {
            beta,
            f: meh.alpha * beta * meh.f_max,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoalSpec {
    /// s
    pub d_max: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackhaulConfig {
    /// s, primary-helper round trip
    pub rtt: f64,
    pub helper_present: bool,
}

/// Where inference values come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum OracleConfig {
    /// Every inference is correct.
    Perfect,
    Synthetic(SyntheticOracleParams),
    /// Score tables produced offline; `manifest` is resolved relative to the
    /// config file's directory when relative.
    Empirical { manifest: PathBuf },
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig::Synthetic(SyntheticOracleParams::default())
    }
}

/// Whether requests may use the helper MEH.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InferenceMode {
    /// Primary MEH only.
    #[default]
    Standalone,
    /// Cooperative when feasible, otherwise the fastest single MEH.
    Ensemble,
}

impl InferenceMode {
    pub fn as_str(self) -> &'static str {
        match self {
            InferenceMode::Standalone => "standalone",
            InferenceMode::Ensemble => "ensemble",
        }
    }
}

impl fmt::Display for InferenceMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for InferenceMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "standalone" => Ok(InferenceMode::Standalone),
            "ensemble" => Ok(InferenceMode::Ensemble),
            other => Err(format!("unknown mode `{other}` (expected standalone or ensemble)")),
        }
    }
}

/// Confidence interval construction for the effectiveness estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CiMethod {
    #[default]
    Normal,
    ClopperPearson,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub radio: RadioConfig,
    pub primary: MehConfig,
    pub helper: Option<MehConfig>,
    pub backhaul: BackhaulConfig,
    pub goal: GoalSpec,
    pub oracle: OracleConfig,
    pub mode: InferenceMode,
    pub num_devices: u32,
    pub trials: u64,
    pub seed: u64,
    pub ci_method: CiMethod,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioFile::default().to_config()
    }
}

impl ScenarioConfig {
    /// Radio parameters seen by one device: the AP bandwidth is split equally
    /// among the `num_devices` devices.
    pub fn device_radio(&self) -> RadioConfig {
        let mut radio = self.radio.clone();
        radio.bandwidth /= f64::from(self.num_devices.max(1));
        radio
    }

    /// MEH parameters seen by one device: the CPU share `alpha` is split
    /// equally among the devices.
    pub fn device_meh(&self, meh: &MehConfig) -> MehConfig {
        let mut meh = meh.clone();
        meh.alpha /= f64::from(self.num_devices.max(1));
        meh
    }

    pub fn device_primary(&self) -> MehConfig {
        self.device_meh(&self.primary)
    }

    pub fn device_helper(&self) -> Option<MehConfig> {
        self.helper.as_ref().map(|h| self.device_meh(h))
    }

    /// Whether the configured mode can use a helper in this scenario.
    pub fn helper_available(&self) -> bool {
        self.helper.is_some() && self.backhaul.helper_present
    }
}

/// A single invariant violation found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Default)]
struct Checker {
    violations: Vec<Violation>,
}

impl Checker {
    fn check(&mut self, ok: bool, path: impl Into<String>, message: impl Into<String>) {
        if !ok {
            self.violations.push(Violation {
                path: path.into(),
                message: message.into(),
            });
        }
    }

    fn positive(&mut self, value: f64, path: &str) {
        self.check(value > 0.0 && value.is_finite(), path, format!("must be a positive finite number, got {value}"));
    }

    fn fraction(&mut self, value: f64, path: &str) {
        self.check(value > 0.0 && value <= 1.0, path, format!("must lie in (0, 1], got {value}"));
    }

    fn meh(&mut self, meh: &MehConfig, prefix: &str) {
        self.positive(meh.f_max, &format!("{prefix}.f_max_ghz"));
        self.positive(meh.kappa, &format!("{prefix}.kappa"));
        self.fraction(meh.alpha, &format!("{prefix}.alpha"));
        self.fraction(meh.beta_max, &format!("{prefix}.beta_max"));
        self.check(
            meh.workload_cycles >= 1.0 && meh.workload_cycles.is_finite(),
            format!("{prefix}.workload_cycles"),
            format!("must be at least 1 cycle, got {}", meh.workload_cycles),
        );
    }
}

/// Returns every invariant violation of `config`; an empty list means valid.
pub fn validate(config: &ScenarioConfig) -> Vec<Violation> {
    let mut c = Checker::default();
    let r = &config.radio;
    c.positive(r.carrier_freq, "radio.carrier_freq_ghz");
    c.positive(r.bandwidth, "radio.bandwidth_mhz");
    c.positive(r.noise_psd, "radio.noise_psd_dbm_per_hz");
    c.positive(r.p_max, "radio.p_max_dbm");
    c.check(r.n_bits >= 1, "radio.n_bits", "must be at least 1 bit");
    c.check(
        r.ber_target > 0.0 && r.ber_target <= 0.1,
        "radio.ber_target",
        format!("must lie in (0, 0.1], got {}", r.ber_target),
    );
    c.positive(r.cell_radius, "radio.cell_radius_m");
    c.check(
        r.min_distance > 0.0 && r.min_distance < r.cell_radius,
        "radio.min_distance_m",
        format!(
            "must satisfy 0 < min_distance < cell_radius ({}), got {}",
            r.cell_radius, r.min_distance
        ),
    );
    if let Some(d) = r.fixed_distance {
        c.check(
            d >= r.min_distance && d <= r.cell_radius,
            "radio.fixed_distance_m",
            format!("must lie in [min_distance, cell_radius], got {d}"),
        );
    }
    c.check(
        r.shadowing_std_db >= 0.0 && r.shadowing_std_db.is_finite(),
        "radio.shadowing_std_db",
        "must be a non-negative finite number",
    );
    for (v, key) in [(r.pathloss.a, "a"), (r.pathloss.b, "b"), (r.pathloss.c, "c")] {
        c.check(v.is_finite(), format!("radio.pathloss.{key}"), "must be finite");
    }

    c.meh(&config.primary, "primary");
    if let Some(helper) = &config.helper {
        c.meh(helper, "helper");
    }
    c.check(
        config.backhaul.rtt >= 0.0 && config.backhaul.rtt.is_finite(),
        "backhaul.rtt_ms",
        format!("must be non-negative, got {}", config.backhaul.rtt),
    );
    c.positive(config.goal.d_max, "goal.d_max_ms");

    if config.mode == InferenceMode::Ensemble {
        c.check(config.helper.is_some(), "helper", "ensemble mode requires a helper MEH");
        c.check(
            config.backhaul.helper_present,
            "backhaul.helper_present",
            "ensemble mode requires a reachable helper",
        );
    }
    c.check(config.num_devices >= 1, "num_devices", "must be at least 1");
    c.check(config.trials >= 1, "trials", "must be at least 1");

    match &config.oracle {
        OracleConfig::Perfect => {}
        OracleConfig::Synthetic(params) => {
            for (path, message) in params.violations() {
                c.check(false, format!("oracle.{path}"), message);
            }
        }
        OracleConfig::Empirical { manifest } => {
            c.check(!manifest.as_os_str().is_empty(), "oracle.manifest", "must name a manifest file");
        }
    }
    c.violations
}

// ---------------------------------------------------------------------------
// File layer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RadioFile {
    pub carrier_freq_ghz: f64,
    pub bandwidth_mhz: f64,
    pub noise_psd_dbm_per_hz: f64,
    pub p_max_dbm: f64,
    pub n_bits: u64,
    pub ber_target: f64,
    pub cell_radius_m: f64,
    pub min_distance_m: f64,
    pub pathloss: PathLossModel,
    pub fading: Fading,
    pub fixed_distance_m: Option<f64>,
    pub shadowing_std_db: f64,
}

impl Default for RadioFile {
    fn default() -> Self {
        Self {
            carrier_freq_ghz: 3.5,
            bandwidth_mhz: 10.0,
            noise_psd_dbm_per_hz: -174.0,
            p_max_dbm: 20.0,
            n_bits: 24_576,
            ber_target: 1e-3,
            cell_radius_m: 150.0,
            min_distance_m: 10.0,
            pathloss: PathLossModel::default(),
            fading: Fading::Rayleigh,
            fixed_distance_m: None,
            shadowing_std_db: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MehFile {
    pub f_max_ghz: f64,
    pub kappa: f64,
    pub alpha: f64,
    pub beta_max: f64,
    pub beta_deterministic: bool,
    pub workload_cycles: f64,
}

impl Default for MehFile {
    fn default() -> Self {
        Self {
            f_max_ghz: 4.5,
            kappa: 1e-27,
            alpha: 1.0,
            beta_max: 1.0,
            beta_deterministic: false,
            workload_cycles: 2e8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BackhaulFile {
    pub rtt_ms: f64,
    pub helper_present: bool,
}

impl Default for BackhaulFile {
    fn default() -> Self {
        Self {
            rtt_ms: 0.0,
            helper_present: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GoalFile {
    pub d_max_ms: f64,
}

impl Default for GoalFile {
    fn default() -> Self {
        Self { d_max_ms: 100.0 }
    }
}

/// The JSON configuration document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioFile {
    pub radio: RadioFile,
    pub primary: MehFile,
    pub helper: Option<MehFile>,
    pub backhaul: BackhaulFile,
    pub goal: GoalFile,
    pub oracle: OracleConfig,
    pub mode: InferenceMode,
    pub num_devices: u32,
    pub trials: u64,
    pub seed: u64,
    pub ci_method: CiMethod,
}

pub const DEFAULT_SEED: u64 = 0x6f61_6c5f_7365_6564;
pub const DEFAULT_TRIALS: u64 = 100_000;

impl Default for ScenarioFile {
    fn default() -> Self {
        Self {
            radio: RadioFile::default(),
            primary: MehFile::default(),
            helper: Some(MehFile::default()),
            backhaul: BackhaulFile::default(),
            goal: GoalFile::default(),
            oracle: OracleConfig::default(),
            mode: InferenceMode::Standalone,
            num_devices: 1,
            trials: DEFAULT_TRIALS,
            seed: DEFAULT_SEED,
            ci_method: CiMethod::Normal,
        }
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

impl RadioFile {
    fn to_config(&self) -> RadioConfig {
        RadioConfig {
            carrier_freq: self.carrier_freq_ghz * 1e9,
            bandwidth: self.bandwidth_mhz * 1e6,
            noise_psd: dbm_to_watts(self.noise_psd_dbm_per_hz),
            p_max: dbm_to_watts(self.p_max_dbm),
            n_bits: self.n_bits,
            ber_target: self.ber_target,
            cell_radius: self.cell_radius_m,
            min_distance: self.min_distance_m,
            pathloss: self.pathloss,
            fading: self.fading,
            fixed_distance: self.fixed_distance_m,
            shadowing_std_db: self.shadowing_std_db,
        }
    }
}

impl MehFile {
    fn to_config(&self) -> MehConfig {
        MehConfig {
            f_max: self.f_max_ghz * 1e9,
            kappa: self.kappa,
            alpha: self.alpha,
            beta_max: self.beta_max,
            beta_deterministic: self.beta_deterministic,
            workload_cycles: self.workload_cycles,
        }
    }
}

impl ScenarioFile {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario file serializes")
    }

    /// Reads a config file. A relative empirical manifest path is resolved
    /// against the config file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| SimError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let mut file = Self::from_json(&text)?;
        if let OracleConfig::Empirical { manifest } = &mut file.oracle {
            if manifest.is_relative() {
                if let Some(dir) = path.parent() {
                    *manifest = dir.join(&*manifest);
                }
            }
        }
        Ok(file)
    }

    /// Converts human units to SI. No validation happens here.
    pub fn to_config(&self) -> ScenarioConfig {
        ScenarioConfig {
            radio: self.radio.to_config(),
            primary: self.primary.to_config(),
            helper: self.helper.as_ref().map(MehFile::to_config),
            backhaul: BackhaulConfig {
                rtt: self.backhaul.rtt_ms * 1e-3,
                helper_present: self.backhaul.helper_present,
            },
            goal: GoalSpec {
                d_max: self.goal.d_max_ms * 1e-3,
            },
            oracle: self.oracle.clone(),
            mode: self.mode,
            num_devices: self.num_devices,
            trials: self.trials,
            seed: self.seed,
            ci_method: self.ci_method,
        }
    }

    /// Converts and validates in one step.
    pub fn to_valid_config(&self) -> Result<ScenarioConfig> {
        let config = self.to_config();
        let violations = validate(&config);
        if violations.is_empty() {
            Ok(config)
        } else {
            Err(SimError::InvalidConfig(violations))
        }
    }
}
