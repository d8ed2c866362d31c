//! CSV result rows.
//!
//! Header (fixed):
//!
//! `param,value,mode,trials,effectiveness,ci95_low,ci95_high,mean_device_energy,
//! mean_device_energy_goal_met,mean_mec_energy,mean_meh_energy_primary,
//! mean_meh_energy_helper,delay_outage_rate,inference_outage_rate,
//! best_effort_rate,cooperative_rate,helper_only_rate,energy_capped_rate,
//! branch_ambiguous_rate`
//!
//! Energies are in joules per request. Floats carry 9 significant digits in
//! `%g` style. A single `run` writes `param=none` and an empty `value`; an
//! undefined conditional mean is written as an empty field.

use std::io::Write;

use crate::config::InferenceMode;
use crate::montecarlo::{CampaignStats, SweepRow};

pub const HEADER: [&str; 19] = [
    "param",
    "value",
    "mode",
    "trials",
    "effectiveness",
    "ci95_low",
    "ci95_high",
    "mean_device_energy",
    "mean_device_energy_goal_met",
    "mean_mec_energy",
    "mean_meh_energy_primary",
    "mean_meh_energy_helper",
    "delay_outage_rate",
    "inference_outage_rate",
    "best_effort_rate",
    "cooperative_rate",
    "helper_only_rate",
    "energy_capped_rate",
    "branch_ambiguous_rate",
];

/// `%.9g`-style formatting.
pub fn fmt_sig9(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-4..9).contains(&exp) {
        let decimals = (8 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

pub struct ResultRow<'a> {
    pub param: &'a str,
    pub value: Option<f64>,
    pub mode: InferenceMode,
    pub stats: &'a CampaignStats,
}

impl ResultRow<'_> {
    pub fn fields(&self) -> Vec<String> {
        let s = self.stats;
        vec![
            self.param.to_string(),
            self.value.map(fmt_sig9).unwrap_or_default(),
            self.mode.to_string(),
            s.trials.to_string(),
            fmt_sig9(s.effectiveness),
            fmt_sig9(s.effectiveness_ci95.0),
            fmt_sig9(s.effectiveness_ci95.1),
            fmt_sig9(s.mean_device_energy),
            s.mean_device_energy_goal_met.map(fmt_sig9).unwrap_or_default(),
            fmt_sig9(s.mean_mec_energy),
            fmt_sig9(s.mean_meh_energy_primary),
            fmt_sig9(s.mean_meh_energy_helper),
            fmt_sig9(s.delay_outage_rate),
            fmt_sig9(s.inference_outage_rate),
            fmt_sig9(s.best_effort_rate),
            fmt_sig9(s.cooperative_rate),
            fmt_sig9(s.helper_only_rate),
            fmt_sig9(s.energy_capped_rate),
            fmt_sig9(s.branch_ambiguous_rate),
        ]
    }
}

impl<'a> From<&'a SweepRow> for ResultRow<'a> {
    fn from(r: &'a SweepRow) -> Self {
        ResultRow {
            param: &r.parameter,
            value: Some(r.value),
            mode: r.mode,
            stats: &r.stats,
        }
    }
}

/// Writes the header and rows as comma-separated, LF-terminated CSV.
pub fn write_csv<'a, W: Write>(out: W, rows: impl IntoIterator<Item = ResultRow<'a>>) -> csv::Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(HEADER)?;
    for row in rows {
        w.write_record(row.fields())?;
    }
    w.flush()?;
    Ok(())
}

/// Sorts sweep rows by value, then mode (standalone first).
pub fn sort_rows(rows: &mut [SweepRow]) {
    rows.sort_by(|a, b| {
        a.value
            .total_cmp(&b.value)
            .then_with(|| mode_rank(a.mode).cmp(&mode_rank(b.mode)))
    });
}

fn mode_rank(mode: InferenceMode) -> u8 {
    match mode {
        InferenceMode::Standalone => 0,
        InferenceMode::Ensemble => 1,
    }
}
