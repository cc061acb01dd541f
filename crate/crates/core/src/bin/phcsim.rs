use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use phcsim::config::ScenarioConfig;
use phcsim::metrics::{run_scenario, ScenarioReport};
use phcsim::report::{report_csv, summary_text};
use phcsim::validate::{run_all, ValidateOptions};
use phcsim::Policy;

const EXIT_CONFIG: u8 = 2;
const EXIT_CHECK: u8 = 3;
const EXIT_IO: u8 = 4;
const EXIT_SIM: u8 = 1;

#[derive(Parser)]
#[command(name = "phcsim", version, about = "Outpatient network simulation with LOS-based diversion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the analytic self-checks and print the residual gap table.
    Validate(ValidateArgs),
    /// Run a scenario file and write report.csv and summary.txt.
    Run(RunArgs),
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Customers in the M/G/1 run.
    #[arg(long, default_value_t = 1_000_000)]
    pk_customers: u64,
    /// Relative tolerance of the M/G/1 mean wait.
    #[arg(long, default_value_t = 0.03)]
    pk_tolerance: f64,
    /// Relative tolerance of Little's law per station.
    #[arg(long, default_value_t = 0.02)]
    little_tolerance: f64,
    #[arg(long, default_value_t = 200)]
    little_days: u32,
    #[arg(long, default_value_t = 1e-9)]
    quantile_tolerance: f64,
    /// Bound on mean |residual gap| as a multiple of the mean service time.
    #[arg(long, default_value_t = 1.0)]
    gap_ratio: f64,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file.
    config: PathBuf,
    /// Policies to run, overriding the scenario (comma separated).
    #[arg(long, value_delimiter = ',')]
    policy: Vec<Policy>,
    #[arg(long)]
    reps: Option<u32>,
    #[arg(long)]
    horizon: Option<u32>,
    #[arg(long)]
    warmup: Option<u32>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for replications (default: available processors).
    #[arg(long)]
    jobs: Option<usize>,
    /// Write the event trace of the first replication of each policy.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Output directory (default: the scenario's out_dir, else `phcsim-out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Any scenario key, e.g. `--set PHC1.p_ncd=0.7` or `--set travel.PHC2="20 10"`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Validate(args) => validate(args),
        Command::Run(args) => run(args),
    }
}

fn validate(args: ValidateArgs) -> ExitCode {
    let opts = ValidateOptions {
        seed: args.seed,
        pk_customers: args.pk_customers,
        pk_tolerance: args.pk_tolerance,
        little_tolerance: args.little_tolerance,
        little_days: args.little_days,
        quantile_tolerance: args.quantile_tolerance,
        gap_ratio: args.gap_ratio,
        ..ValidateOptions::default()
    };
    match run_all(&opts) {
        Ok(report) => {
            print!("{report}");
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_CHECK)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_SIM)
        }
    }
}

fn overrides(args: &RunArgs) -> Result<Vec<(String, String)>, String> {
    let mut out = Vec::new();
    if !args.policy.is_empty() {
        let keys: Vec<&str> = args.policy.iter().map(|p| p.key()).collect();
        out.push(("policies".to_string(), keys.join(" ")));
    }
    let flags = [
        ("replications", args.reps.map(|v| v.to_string())),
        ("horizon_days", args.horizon.map(|v| v.to_string())),
        ("warmup_days", args.warmup.map(|v| v.to_string())),
        ("seed", args.seed.map(|v| v.to_string())),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            out.push((key.to_string(), v));
        }
    }
    for s in &args.set {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| format!("--set expects KEY=VALUE, got `{s}`"))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

fn write_file(path: &Path, contents: &str) -> Result<(), ExitCode> {
    fs::write(path, contents).map_err(|e| {
        eprintln!("error: cannot write {}: {e}", path.display());
        ExitCode::from(EXIT_IO)
    })
}

fn run(args: RunArgs) -> ExitCode {
    match try_run(args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(code) => code,
    }
}

fn try_run(args: RunArgs) -> Result<(), ExitCode> {
    let text = fs::read_to_string(&args.config).map_err(|e| {
        eprintln!("error: cannot read {}: {e}", args.config.display());
        ExitCode::from(EXIT_IO)
    })?;
    let config_error = |e: &dyn std::fmt::Display| {
        eprintln!("error in {}: {e}", args.config.display());
        ExitCode::from(EXIT_CONFIG)
    };
    let base = ScenarioConfig::parse(&text).map_err(|e| config_error(&e))?;
    let sets = overrides(&args).map_err(|e| config_error(&e))?;
    let config = base.with_overrides(&sets).map_err(|e| config_error(&e))?;

    if let Some(jobs) = args.jobs {
        if jobs == 0 {
            return Err(config_error(&"--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| config_error(&e))?;
    }

    let out_dir = args
        .out
        .clone()
        .or_else(|| config.out_dir.clone())
        .unwrap_or_else(|| PathBuf::from("phcsim-out"));
    fs::create_dir_all(&out_dir).map_err(|e| {
        eprintln!("error: cannot create {}: {e}", out_dir.display());
        ExitCode::from(EXIT_IO)
    })?;

    let params = Arc::new(config.network_params());
    let protocol = config.protocol();
    let mut reports: Vec<ScenarioReport> = Vec::new();
    let mut trace = String::new();
    for &policy in &config.policies {
        let run = run_scenario(&params, policy, protocol, args.trace.is_some()).map_err(|e| {
            eprintln!("error: simulation failed under policy {policy}: {e}");
            ExitCode::from(EXIT_SIM)
        })?;
        if args.trace.is_some() {
            trace.push_str(&format!("# policy {policy}\n"));
            for event in &run.trace {
                trace.push_str(&event.to_string());
                trace.push('\n');
            }
        }
        reports.push(run.report);
    }

    let summary = summary_text(&config, &reports);
    write_file(&out_dir.join("report.csv"), &report_csv(&reports))?;
    write_file(&out_dir.join("summary.txt"), &summary)?;
    if let Some(path) = &args.trace {
        write_file(path, &trace)?;
    }
    print!("{summary}");
    Ok(())
}

