use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use distfix::metrics::{cdf_plot_rows, two_sample_plot_rows};
use distfix::transforms::{equilibrium_rep, power_bias, power_of, scale, zero_bias_rep};
use distfix::{parallel_sample, CheckReport};
use distfix_cli::emit::{plot_csv, write_output};
use distfix_cli::{emit, exit, parse_dist, run_suite, CliError, Format, Params, RunConfig, SUITES};

/// Statistical checks of distributional fixed points.
#[derive(Debug, Parser)]
#[command(name = "distfix", version, args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    run: RunArgs,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a verification suite (the default when --suite is given).
    Run(RunArgs),
    /// List the available suites.
    List,
    /// Emit CDF plot data as CSV: x, empirical CDF, reference CDF.
    Plot(PlotArgs),
    /// Print the canonical form of a transformed distribution.
    Transform(TransformArgs),
}

#[derive(Debug, Args)]
struct RunArgs {
    /// Suite name; see `distfix list`.
    #[arg(long)]
    suite: Option<String>,
    /// Suite parameter as key=value; repeatable.
    #[arg(long = "param", value_name = "KEY=VALUE")]
    params: Vec<String>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Draws per sample.
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    /// Random-stream chunks per sample; part of the experiment and recorded
    /// in the report. Defaults to the number of logical cores.
    #[arg(long)]
    chunks: Option<usize>,
    /// Worker threads. Does not change any output.
    #[arg(long)]
    workers: Option<usize>,
    /// Per-subtest significance level.
    #[arg(long, default_value_t = 1e-3)]
    alpha: f64,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Args)]
struct PlotArgs {
    /// Distribution to sample: a name or JSON.
    #[arg(long)]
    dist: String,
    /// Reference distribution for the CDF column; defaults to --dist.
    #[arg(long)]
    reference: Option<String>,
    /// Compare with a second sample of --reference instead of its CDF.
    #[arg(long)]
    two_sample: bool,
    #[arg(long, default_value_t = 200)]
    points: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long)]
    chunks: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TransformKind {
    PowerBias,
    ZeroBias,
    Equilibrium,
    Power,
    Scale,
}

#[derive(Debug, Args)]
struct TransformArgs {
    #[arg(value_enum)]
    kind: TransformKind,
    /// Distribution: a name or JSON.
    #[arg(long)]
    dist: String,
    /// Exponent for power-bias and power, factor for scale.
    #[arg(long)]
    value: Option<f64>,
    /// Print JSON instead of the readable form.
    #[arg(long)]
    json: bool,
    /// Seed for distributions built from draws (lognormal).
    #[arg(long, default_value_t = 42)]
    seed: u64,
}

fn default_chunks() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn with_workers<T>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError>
where
    T: Send,
{
    match workers {
        None => Ok(f()),
        Some(0) => Err(CliError::bad("workers", "must be at least 1")),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .map_err(|e| CliError::bad("workers", e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}

fn summarize(r: &CheckReport, depth: usize) {
    let verdict = if r.pass { "PASS" } else { "FAIL" };
    eprintln!(
        "{:indent$}{}: {verdict} (statistic {:.6}, threshold {:.6}, bonferroni {})",
        "",
        r.suite,
        r.statistic,
        r.threshold,
        if r.bonferroni_pass { "pass" } else { "fail" },
        indent = 2 * depth
    );
    for s in r.suites.iter() {
        summarize(s, depth + 1);
    }
}

fn run(args: RunArgs) -> Result<i32, CliError> {
    let suite = args
        .suite
        .ok_or_else(|| CliError::bad("suite", "missing --suite; `distfix list` shows the choices"))?;
    let params = Params::parse(&args.params)?;
    let cfg = RunConfig {
        seed: args.seed,
        samples: args.samples,
        chunks: args.chunks.unwrap_or_else(default_chunks),
        alpha: args.alpha,
    };
    let report = with_workers(args.workers, || run_suite(&suite, &params, &cfg))??;
    emit(&report, args.out.as_deref(), args.format)?;
    summarize(&report, 0);
    Ok(if report.pass { exit::PASS } else { exit::FAIL })
}

fn plot(args: PlotArgs) -> Result<i32, CliError> {
    let d = parse_dist(&args.dist, args.seed)?;
    let reference = match &args.reference {
        Some(t) => parse_dist(t, args.seed)?,
        None => d.clone(),
    };
    let chunks = args.chunks.unwrap_or_else(default_chunks);
    if chunks == 0 || args.samples == 0 {
        return Err(CliError::bad("samples", "samples and chunks must be at least 1"));
    }
    let x = parallel_sample(&d, args.seed, args.samples, chunks)?.values;
    let text = if args.two_sample {
        let y = parallel_sample(
            &reference,
            distfix::derive_seed(args.seed, "reference"),
            args.samples,
            chunks,
        )?
        .values;
        plot_csv(
            ["x", "ecdf", "reference_ecdf"],
            &two_sample_plot_rows(&x, &y, args.points)?,
        )
    } else {
        plot_csv(["x", "ecdf", "cdf"], &cdf_plot_rows(&x, &reference, args.points)?)
    };
    write_output(&text, args.out.as_deref())?;
    Ok(exit::PASS)
}

fn transform(args: TransformArgs) -> Result<i32, CliError> {
    let d = parse_dist(&args.dist, args.seed)?;
    let value = || {
        args.value
            .ok_or_else(|| CliError::bad("value", "required by this transform"))
    };
    let t = match args.kind {
        TransformKind::PowerBias => power_bias(&d, value()?)?,
        TransformKind::ZeroBias => zero_bias_rep(&d)?,
        TransformKind::Equilibrium => equilibrium_rep(&d)?,
        TransformKind::Power => power_of(&d, value()?)?,
        TransformKind::Scale => scale(&d, value()?)?,
    };
    let text = if args.json { t.to_json() } else { t.to_string() };
    println!("{text}");
    Ok(exit::PASS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Some(Command::Run(a)) => run(a),
        Some(Command::List) => {
            for (name, what) in SUITES {
                println!("{name:<24} {what}");
            }
            Ok(exit::PASS)
        }
        Some(Command::Plot(a)) => plot(a),
        Some(Command::Transform(a)) => transform(a),
        None => run(cli.run),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit::USAGE as u8)
        }
    }
}
