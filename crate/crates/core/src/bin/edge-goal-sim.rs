use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Deserialize;

use edge_goal_sim::config::ScenarioFile;
use edge_goal_sim::report::{self, ResultRow};
use edge_goal_sim::{validate, Campaign, CampaignStats, InferenceMode, SimError, SweepSpec};

#[derive(Parser)]
#[command(name = "edge-goal-sim", version, about = "Goal-oriented edge inference Monte Carlo simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one campaign and emit a one-row CSV.
    Run(RunArgs),
    /// Run a parameter sweep and emit one CSV row per (value, mode).
    Sweep(SweepArgs),
    /// Check a config file and list every violation.
    Validate(ConfigArg),
}

#[derive(Args)]
struct ConfigArg {
    /// Scenario JSON; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct Common {
    #[command(flatten)]
    config: ConfigArg,
    /// CSV destination; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    mode: Option<InferenceMode>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Dotted config key, e.g. radio.ber_target, meh.beta_max, backhaul.rtt_ms
    #[arg(long, required_unless_present = "sweep_file")]
    sweep_param: Option<String>,
    /// Comma-separated values.
    #[arg(long, value_delimiter = ',', required_unless_present = "sweep_file")]
    sweep_values: Vec<f64>,
    /// JSON sweep description instead of the inline flags.
    #[arg(long, conflicts_with_all = ["sweep_param", "sweep_values"])]
    sweep_file: Option<PathBuf>,
    /// Comma-separated modes; defaults to the config's mode.
    #[arg(long, value_delimiter = ',')]
    mode: Vec<InferenceMode>,
    /// Give every campaign its own derived seed instead of common random numbers.
    #[arg(long)]
    independent_seeds: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepFile {
    parameter: String,
    values: Vec<f64>,
    #[serde(default)]
    modes: Vec<InferenceMode>,
    #[serde(default = "default_true")]
    common_random_numbers: bool,
}

fn default_true() -> bool {
    true
}

enum Failure {
    /// bad usage, unreadable or invalid configuration
    Config(String),
    Runtime(String),
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Domain(_) => Failure::Runtime(e.to_string()),
            SimError::InvalidConfig(violations) => Failure::Config(
                std::iter::once("invalid configuration:".to_string())
                    .chain(violations.iter().map(|v| format!("  {v}")))
                    .collect::<Vec<_>>()
                    .join("\n"),
            ),
            other => Failure::Config(other.to_string()),
        }
    }
}

fn load_config(arg: &ConfigArg) -> Result<ScenarioFile, Failure> {
    match &arg.config {
        Some(path) => Ok(ScenarioFile::load(path)?),
        None => Ok(ScenarioFile::default()),
    }
}

fn apply_overrides(file: &mut ScenarioFile, common: &Common) {
    if let Some(seed) = common.seed {
        file.seed = seed;
    }
    if let Some(trials) = common.trials {
        file.trials = trials;
    }
}

fn open_out(out: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    match out {
        Some(path) => File::create(path)
            .map(|f| Box::new(BufWriter::new(f)) as Box<dyn Write>)
            .map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", path.display()))),
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn with_pool<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, Failure> {
    match workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| Failure::Runtime(format!("cannot start worker pool: {e}"))),
        None => Ok(f()),
    }
}

fn summary(label: &str, s: &CampaignStats) -> String {
    let mut text = format!(
        "{label}: {} trials\n  goal effectiveness   {:.4}  (95% CI {:.4}..{:.4})\n  mean device energy   {:.4e} J\n  mean MEC energy      {:.4e} J\n  delay outage         {:.4}\n  inference outage     {:.4}\n  best effort          {:.4}\n  cooperative          {:.4}",
        s.trials,
        s.effectiveness,
        s.effectiveness_ci95.0,
        s.effectiveness_ci95.1,
        s.mean_device_energy,
        s.mean_mec_energy,
        s.delay_outage_rate,
        s.inference_outage_rate,
        s.best_effort_rate,
        s.cooperative_rate,
    );
    if s.energy_capped_rate > 0.0 {
        text.push_str(&format!("\n  energy-capped trials {:.2e}", s.energy_capped_rate));
    }
    text
}

fn print_summary(to_stdout: bool, text: &str) {
    if to_stdout {
        println!("{text}");
    } else {
        eprintln!("{text}");
    }
}

fn cmd_run(args: RunArgs) -> Result<(), Failure> {
    let mut file = load_config(&args.common.config)?;
    apply_overrides(&mut file, &args.common);
    if let Some(mode) = args.mode {
        file.mode = mode;
    }
    let config = file.to_valid_config()?;
    let mode = config.mode;
    let campaign = Campaign::new(config)?;
    let stats = with_pool(args.common.workers, || campaign.run())??;

    let mut out = open_out(&args.common.out)?;
    report::write_csv(
        &mut out,
        [ResultRow {
            param: "none",
            value: None,
            mode,
            stats: &stats,
        }],
    )
    .map_err(|e| Failure::Runtime(format!("cannot write CSV: {e}")))?;
    out.flush().map_err(|e| Failure::Runtime(e.to_string()))?;
    drop(out);
    print_summary(args.common.out.is_some(), &summary(mode.as_str(), &stats));
    Ok(())
}

fn read_sweep_file(path: &Path) -> Result<SweepFile, Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Failure> {
    let mut file = load_config(&args.common.config)?;
    apply_overrides(&mut file, &args.common);
    let mut spec = match &args.sweep_file {
        Some(path) => {
            let sf = read_sweep_file(path)?;
            SweepSpec {
                parameter: sf.parameter,
                values: sf.values,
                modes: sf.modes,
                common_random_numbers: sf.common_random_numbers,
            }
        }
        None => SweepSpec::new(
            args.sweep_param.clone().unwrap_or_default(),
            args.sweep_values.clone(),
            Vec::new(),
        ),
    };
    if !args.mode.is_empty() {
        spec.modes = args.mode.clone();
    }
    if spec.modes.is_empty() {
        spec.modes = vec![file.mode];
    }
    if args.independent_seeds {
        spec.common_random_numbers = false;
    }
    let mut rows = with_pool(args.common.workers, || edge_goal_sim::run_sweep(&file, &spec))??;
    report::sort_rows(&mut rows);

    let mut out = open_out(&args.common.out)?;
    report::write_csv(&mut out, rows.iter().map(ResultRow::from))
        .map_err(|e| Failure::Runtime(format!("cannot write CSV: {e}")))?;
    out.flush().map_err(|e| Failure::Runtime(e.to_string()))?;
    drop(out);
    let text = rows
        .iter()
        .map(|r| summary(&format!("{} = {} [{}]", r.parameter, report::fmt_sig9(r.value), r.mode), &r.stats))
        .collect::<Vec<_>>()
        .join("\n");
    print_summary(args.common.out.is_some(), &text);
    Ok(())
}

fn cmd_validate(args: ConfigArg) -> Result<(), Failure> {
    let file = load_config(&args)?;
    let violations = validate(&file.to_config());
    if violations.is_empty() {
        println!("configuration is valid");
        Ok(())
    } else {
        Err(SimError::InvalidConfig(violations).into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => cmd_run(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Validate(args) => cmd_validate(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}
