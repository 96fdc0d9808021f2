//! Batch front end for the cluster-flow toolkit: state verification,
//! schedule simulation, decoder threshold scans, and resource estimates.
//! Every command is a deterministic function of its flags; stochastic
//! commands take a seed and echo it in their output, so rerunning a
//! command reproduces its output byte for byte.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use clusterflow::decoder::{scan_csv, threshold_scan};
use clusterflow::lattice::CellParity;
use clusterflow::prepnet::{
    self, schedule_to_projections, Mutation, NetworkConfig, SwitchSymbol,
};
use clusterflow::resources::{full_report, ReportInputs, ResourceError, VolumeEdition};

/// Protocol or verification failure.
const EXIT_VIOLATION: u8 = 2;
/// Valid flags describing a physically impossible or failing regime.
const EXIT_DOMAIN: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(
    name = "clusterflow",
    version,
    about = "Simulator and verification toolkit for a flowing photonic cluster-state architecture"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the preparation network and verify the prepared state against
    /// the full target stabilizer group.
    VerifyPrep(VerifyArgs),
    /// Replay the switching schedule; report chip counts, occupancy, and
    /// protocol violations, optionally dumping the full event trace.
    Simulate(SimulateArgs),
    /// Monte Carlo threshold scan of the lattice decoder.
    Threshold(ThresholdArgs),
    /// Resource arithmetic for one operating point.
    Estimate(EstimateArgs),
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_parser = clap::value_parser!(i64).range(1..))]
    nx: i64,
    #[arg(long, value_parser = clap::value_parser!(i64).range(1..))]
    ny: i64,
    #[arg(long, value_parser = clap::value_parser!(i64).range(1..))]
    layers: i64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    gamma: u32,
    /// Seed for the simulated measurement outcomes.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path for the verification report (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Corrupt one chip's switching program (negative-control testing).
    #[arg(long, hide = true)]
    corrupt_program: bool,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long, value_parser = clap::value_parser!(i64).range(1..))]
    nx: i64,
    #[arg(long, value_parser = clap::value_parser!(i64).range(1..))]
    ny: i64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(i64).range(1..))]
    layers: i64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    gamma: u32,
    /// Write the full event trace (JSON lines) to this path.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Output path for the summary (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ThresholdArgs {
    /// Code distances to scan (repeat or list: --d 3 5 7).
    #[arg(long = "d", required = true, num_args = 1..)]
    distances: Vec<usize>,
    /// Physical flip rates to scan.
    #[arg(long = "p", required = true, num_args = 1..)]
    ps: Vec<f64>,
    /// Loss rate applied uniformly across the scan.
    #[arg(long, default_value_t = 0.0)]
    ploss: f64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Flavor::Primal)]
    flavor: Flavor,
    /// Output path for the CSV (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    /// Physical error rate per cell.
    #[arg(long, default_value_t = 6.7e-5)]
    p: f64,
    /// Threshold anchoring the suppression model.
    #[arg(long, default_value_t = 6.7e-3)]
    pth: f64,
    /// Target encoded error rate per step.
    #[arg(long, default_value_t = 1e-16)]
    target: f64,
    /// Distillation levels per cascade.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u32).range(1..))]
    levels: u32,
    /// Cross-section override in cells (defaults to one logical footprint).
    #[arg(long)]
    nx: Option<i64>,
    #[arg(long)]
    ny: Option<i64>,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(i64).range(1..))]
    gamma: i64,
    /// Which published gate-volume bookkeeping to use.
    #[arg(long, value_enum, default_value_t = Table::Original)]
    table: Table,
    /// Output path for the report (stdout if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Flavor {
    Primal,
    Dual,
}

#[derive(Clone, Copy, ValueEnum)]
enum Table {
    Original,
    Revised,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match cli.command {
        Command::VerifyPrep(args) => cmd_verify_prep(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Threshold(args) => cmd_threshold(args),
        Command::Estimate(args) => cmd_estimate(args),
    }
}

fn cmd_verify_prep(args: VerifyArgs) -> ExitCode {
    let config = match NetworkConfig::new(args.nx, args.ny, args.layers, args.gamma, args.seed) {
        Ok(c) => c,
        Err(e) => return usage_error(&e),
    };

    if args.corrupt_program {
        // Swap measure and center steps on a chip every network has.
        let mutation = Mutation::SwapSymbols {
            stage: 1,
            row: 1,
            col: 0,
            a: SwitchSymbol::M,
            b: SwitchSymbol::C,
        };
        let trace = match prepnet::run_with_mutation(&config, Some(&mutation)) {
            Ok(t) => t,
            Err(e) => return domain_error(&e),
        };
        let body = json!({
            "config": config,
            "violations": trace.violations,
        });
        if let Err(e) = write_output(&args.out, &pretty(&body)) {
            return domain_error(&e);
        }
        eprintln!(
            "verification failed: {} protocol violations",
            trace.violations.len()
        );
        return ExitCode::from(EXIT_VIOLATION);
    }

    let report = match prepnet::verify_prepared_state(&config) {
        Ok(r) => r,
        Err(e) => return domain_error(&e),
    };
    let mut body = serde_json::to_value(&report).expect("report serializes");
    body.as_object_mut()
        .expect("report is an object")
        .insert("config".into(), serde_json::to_value(config).expect("config serializes"));
    if let Err(e) = write_output(&args.out, &pretty(&body)) {
        return domain_error(&e);
    }
    if report.violated == 0 {
        ExitCode::SUCCESS
    } else {
        eprintln!("verification failed: {} violated generators", report.violated);
        ExitCode::from(EXIT_VIOLATION)
    }
}

fn cmd_simulate(args: SimulateArgs) -> ExitCode {
    let config = match NetworkConfig::new(args.nx, args.ny, args.layers, args.gamma, 0) {
        Ok(c) => c,
        Err(e) => return usage_error(&e),
    };
    let trace = match prepnet::run(&config) {
        Ok(t) => t,
        Err(e) => return domain_error(&e),
    };
    let summary = trace.summary();
    let projections = schedule_to_projections(&trace);
    let body = json!({
        "config": config,
        "nominal_chips": summary.nominal_chips,
        "instantiated_chips": summary.instantiated_chips,
        "photons": summary.photons,
        "events": summary.events,
        "violations": trace.violations,
        "min_utilization": summary.min_utilization,
        "max_utilization": summary.max_utilization,
        "projections": projections.events.len(),
        "dropped_windows": projections.dropped,
    });
    if let Err(e) = write_output(&args.out, &pretty(&body)) {
        return domain_error(&e);
    }
    if let Some(path) = &args.trace {
        if let Err(e) = write_file(path, &trace.to_jsonl()) {
            return domain_error(&e);
        }
    }
    if trace.violations.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("schedule raised {} protocol violations", trace.violations.len());
        ExitCode::from(EXIT_VIOLATION)
    }
}

fn cmd_threshold(args: ThresholdArgs) -> ExitCode {
    for &d in &args.distances {
        if d < 1 {
            return usage_error(&"distances must be at least 1");
        }
    }
    for &p in &args.ps {
        if !(0.0..1.0).contains(&p) {
            return usage_error(&format!("flip rate {p} outside [0, 1)"));
        }
    }
    if !(0.0..1.0).contains(&args.ploss) {
        return usage_error(&format!("loss rate {} outside [0, 1)", args.ploss));
    }
    let flavor = match args.flavor {
        Flavor::Primal => CellParity::Primal,
        Flavor::Dual => CellParity::Dual,
    };
    let result = match threshold_scan(
        flavor,
        &args.distances,
        &args.ps,
        args.ploss,
        args.trials,
        args.seed,
    ) {
        Ok(r) => r,
        Err(e) => return usage_error(&e),
    };
    let mut out = scan_csv(&result);
    for c in &result.crossings {
        let p = c
            .p_cross
            .map(|v| v.to_string())
            .unwrap_or_else(|| "none".into());
        out.push_str(&format!("# crossing d={}/{} p={}\n", c.d_low, c.d_high, p));
    }
    if let Err(e) = write_output(&args.out, &out) {
        return domain_error(&e);
    }
    ExitCode::SUCCESS
}

fn cmd_estimate(args: EstimateArgs) -> ExitCode {
    let inputs = ReportInputs {
        p: args.p,
        p_th: args.pth,
        target: args.target,
        levels: args.levels,
        nx: args.nx,
        ny: args.ny,
        gamma: args.gamma,
        edition: match args.table {
            Table::Original => VolumeEdition::Original,
            Table::Revised => VolumeEdition::Revised,
        },
    };
    let report = match full_report(inputs) {
        Ok(r) => r,
        Err(e @ ResourceError::NoProtection { .. }) => return domain_error(&e),
        Err(e) => return usage_error(&e),
    };
    let body = serde_json::to_value(&report).expect("report serializes");
    if let Err(e) = write_output(&args.out, &pretty(&body)) {
        return domain_error(&e);
    }
    ExitCode::SUCCESS
}

fn usage_error(e: &dyn std::fmt::Display) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(EXIT_USAGE)
}

fn domain_error(e: &dyn std::fmt::Display) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(EXIT_DOMAIN)
}

fn pretty(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json renders");
    s.push('\n');
    s
}

/// Resolve a relative output path against CLUSTERFLOW_OUT_DIR when set.
fn resolve_out(path: &Path) -> PathBuf {
    if path.is_relative() {
        if let Ok(dir) = std::env::var("CLUSTERFLOW_OUT_DIR") {
            if !dir.is_empty() {
                return Path::new(&dir).join(path);
            }
        }
    }
    path.to_path_buf()
}

fn write_file(path: &Path, content: &str) -> std::io::Result<()> {
    std::fs::write(resolve_out(path), content)
}

fn write_output(out: &Option<PathBuf>, content: &str) -> std::io::Result<()> {
    match out {
        Some(path) => write_file(path, content),
        None => std::io::stdout().write_all(content.as_bytes()),
    }
}
