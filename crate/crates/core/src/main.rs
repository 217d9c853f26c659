use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use projdrift::ingest::CsvOptions;
use projdrift::linalg::{DEFAULT_PC1_MAX_ITERS, DEFAULT_PC1_TOL};
use projdrift::pipeline::{cmd_analyze, cmd_synth, AnalyzeConfig};
use projdrift::selftest::run_selftest;
use projdrift::synth::SynthSpec;
use projdrift::trajectory::{WindowSpec, DEFAULT_EPSILON, DEFAULT_STEP, DEFAULT_WINDOW};
use projdrift::{DriftError, MetricRegistry};

/// Euclidean, cosine and Fubini–Study drift along sliding-window PC1 trajectories.
#[derive(Debug, Parser)]
#[command(name = "projdrift", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a PC1 trajectory from a CSV and write steps.csv, summary.json, panels.svg.
    Analyze(AnalyzeArgs),
    /// Write a seeded synthetic trajectory (T x D unit directions) as CSV.
    Synth(SynthArgs),
    /// Run the embedded invariant checks.
    Selftest,
    /// Distance between two vectors under a registered metric.
    Distance(DistanceArgs),
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    /// Input CSV, one sample per row.
    input: PathBuf,
    /// Window length W.
    #[arg(long, default_value_t = DEFAULT_WINDOW)]
    window: usize,
    /// Step between window starts s.
    #[arg(long, default_value_t = DEFAULT_STEP)]
    step: usize,
    /// Offset added to both drifts in the log ratio.
    #[arg(long, default_value_t = DEFAULT_EPSILON, allow_hyphen_values = true)]
    epsilon: f64,
    /// 0-based column to drop (e.g. class labels).
    #[arg(long)]
    label_column: Option<usize>,
    /// First row is a header.
    #[arg(long)]
    header: bool,
    #[arg(long, default_value_t = ',')]
    delimiter: char,
    /// Output directory.
    #[arg(long, default_value = "drift-out")]
    out: PathBuf,
    /// Rows are already-extracted directions; skip PCA.
    #[arg(long)]
    trajectory_mode: bool,
    #[arg(long, default_value_t = DEFAULT_PC1_TOL)]
    pc1_tol: f64,
    #[arg(long, default_value_t = DEFAULT_PC1_MAX_ITERS)]
    pc1_max_iters: usize,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 64)]
    dimension: usize,
    #[arg(long, default_value_t = 32)]
    length: usize,
    /// Rotation per step in radians, in [0, pi/2).
    #[arg(long, default_value_t = 0.1)]
    angle: f64,
    /// 1-based positions to negate, comma separated.
    #[arg(long, value_delimiter = ',')]
    flips: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "trajectory.csv")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct DistanceArgs {
    /// Metric name; see --list.
    #[arg(long, default_value = "fubini-study")]
    metric: String,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    u: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    v: Vec<f64>,
    /// List registered metrics and exit.
    #[arg(long)]
    list: bool,
}

fn fail(e: DriftError) -> ExitCode {
    let detail = e.to_string().replace('\n', " ");
    eprintln!("error: {}: {}", e.category(), detail);
    ExitCode::from(if e.is_usage_error() { 2 } else { 1 })
}

fn analyze(args: AnalyzeArgs) -> Result<(), DriftError> {
    let delimiter = u8::try_from(args.delimiter).map_err(|_| {
        DriftError::InvalidSpec(format!(
            "delimiter {:?} is not a single byte",
            args.delimiter
        ))
    })?;
    let config = AnalyzeConfig {
        input: args.input,
        csv: CsvOptions {
            has_header: args.header,
            label_column: args.label_column,
            delimiter,
        },
        window: WindowSpec::new(args.window, args.step),
        epsilon: args.epsilon,
        out_dir: args.out,
        trajectory_mode: args.trajectory_mode,
        pc1_tol: args.pc1_tol,
        pc1_max_iters: args.pc1_max_iters,
    };
    let outcome = cmd_analyze(&config)?;
    let p = &outcome.summary.parameters;
    let t = &outcome.summary.totals;
    println!(
        "samples={} dimension={} windows={} steps={}",
        p.n_samples, p.dimension, p.windows, t.steps
    );
    println!("delta_e={}", t.cum_e);
    println!("delta_c={}", t.cum_c);
    println!("delta_fs={}", t.cum_fs);
    println!("gauge_diff={}", t.gauge_diff);
    println!("flips={}", t.flip_count);
    match &outcome.sign_test {
        Some(s) => println!(
            "sign_test_p={} n_nonzero={} n_positive={}",
            s.p_value, s.n_nonzero, s.n_positive
        ),
        None => println!("sign_test_p=not_applicable"),
    }
    for f in outcome.files(&config.out_dir) {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn synth(args: SynthArgs) -> Result<(), DriftError> {
    let spec = SynthSpec {
        dimension: args.dimension,
        length: args.length,
        step_angle: args.angle,
        flip_indices: args.flips.into_iter().collect(),
        seed: args.seed,
    };
    let traj = cmd_synth(&spec, &args.out)?;
    println!(
        "wrote {} ({} x {}, rng {})",
        args.out.display(),
        traj.len(),
        traj.dimension(),
        projdrift::synth::RNG_NAME
    );
    Ok(())
}

fn selftest() -> ExitCode {
    let started = std::time::Instant::now();
    let report = run_selftest(&MetricRegistry::builtin());
    for c in &report.checks {
        println!(
            "{} {:<30} {}",
            if c.passed { "PASS" } else { "FAIL" },
            c.name,
            c.detail
        );
    }
    println!(
        "{} passed, {} failed in {:.2}s",
        report.passed(),
        report.failed(),
        started.elapsed().as_secs_f64()
    );
    if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn distance(args: DistanceArgs) -> Result<(), DriftError> {
    let registry = MetricRegistry::builtin();
    if args.list {
        for m in registry.iter() {
            println!("{}\t{}\t{:?}", m.name(), m.unit(), m.invariance());
        }
        return Ok(());
    }
    let metric = registry.get(&args.metric)?;
    println!("{}", metric.distance(&args.u, &args.v)?);
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    let result = match cli.command {
        Command::Analyze(args) => analyze(args),
        Command::Synth(args) => synth(args),
        Command::Selftest => return selftest(),
        Command::Distance(args) => distance(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e),
    }
}
