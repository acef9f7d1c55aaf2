use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use gl_lab::experiments::{
    replay, run_suite, write_outputs, ExperimentError, ExperimentSpec, Figure, InnerKind, RegionSpec, SuiteKind,
};
use gl_lab::RootFindConfig;

/// Critical point experiments: certificate suites, sharpness and pairing
/// scans, the annulus example, plots.
#[derive(Parser)]
#[command(name = "gl-lab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Random disk configurations, certified against the disk statement.
    Thm1(Args),
    /// Random convex configurations, certified against the convex statement.
    Thm2(Args),
    /// Extremal family against its closed form, plus threshold crossings.
    Sharpness(Args),
    /// Pairing distances and their log-log slope in n.
    Pairing(Args),
    /// Critical points of z (z^n - 1).
    Annulus(Args),
    /// SVG of one configuration and its critical points.
    Plot(Args),
}

#[derive(Clone, Copy, ValueEnum)]
enum InnerArg {
    Uniform,
    Center,
}

#[derive(Clone, Copy, ValueEnum)]
enum FigureArg {
    Random,
    Sharp,
}

#[derive(clap::Args)]
struct Args {
    /// Master seed; GL_LAB_SEED takes precedence when set.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    trials: Option<usize>,
    /// `k` or inclusive range `a..b`; a comma list `a,b,c` for pairing and annulus.
    #[arg(long)]
    n: Option<String>,
    /// `k` or inclusive range `a..b`.
    #[arg(long)]
    m: Option<String>,
    /// Separation as a multiple of the threshold: `x` or range `a..b`.
    #[arg(long = "d-mult")]
    d_mult: Option<String>,
    /// `disk`, `random-polygon`, or a polygon file (one `re im` per line, counterclockwise).
    #[arg(long)]
    region: Option<String>,
    /// Output path prefix.
    #[arg(long, default_value = "gl-lab-out")]
    out: String,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Rerun a single trial from its recorded seed.
    #[arg(long)]
    replay: Option<u64>,
    /// Pairing: distance of the exterior roots from the region.
    #[arg(long = "xi-distance")]
    xi_distance: Option<f64>,
    /// Pairing: how inner roots are placed.
    #[arg(long, value_enum)]
    inner: Option<InnerArg>,
    /// Plot: which configuration to draw.
    #[arg(long, value_enum)]
    figure: Option<FigureArg>,
}

fn bad(msg: String) -> ExperimentError {
    ExperimentError::InvalidSpec(msg)
}

fn parse_range<T: std::str::FromStr + Copy>(arg: &str) -> Result<[T; 2], ExperimentError> {
    let one = |s: &str| s.trim().parse::<T>().map_err(|_| bad(format!("cannot parse `{s}`")));
    match arg.split_once("..") {
        Some((a, b)) => Ok([one(a)?, one(b)?]),
        None => {
            let v = one(arg)?;
            Ok([v, v])
        }
    }
}

fn parse_list(arg: &str) -> Result<Vec<usize>, ExperimentError> {
    arg.split(',')
        .map(|s| s.trim().parse().map_err(|_| bad(format!("cannot parse `{s}`"))))
        .collect()
}

fn build_spec(kind: SuiteKind, args: &Args) -> Result<ExperimentSpec, ExperimentError> {
    let mut spec = ExperimentSpec::new(kind);
    spec.seed = match std::env::var("GL_LAB_SEED") {
        Ok(s) => s.trim().parse().map_err(|_| bad(format!("GL_LAB_SEED `{s}` is not a u64")))?,
        Err(_) => args.seed,
    };
    if let Some(t) = args.trials {
        spec.trials = t;
    }
    if let Some(n) = &args.n {
        match kind {
            SuiteKind::PairingScan | SuiteKind::Annulus => {
                spec.n_schedule = parse_list(n)?;
                let lo = spec.n_schedule.iter().copied().min().unwrap_or(0);
                let hi = spec.n_schedule.iter().copied().max().unwrap_or(0);
                spec.n_range = [lo, hi];
            }
            _ => spec.n_range = parse_range(n)?,
        }
    }
    if let Some(m) = &args.m {
        spec.m_range = parse_range(m)?;
    }
    if let Some(d) = &args.d_mult {
        spec.d_multiplier = parse_range(d)?;
    }
    if let Some(r) = &args.region {
        spec.region = RegionSpec::parse(r)?;
    }
    if let Some(x) = args.xi_distance {
        spec.xi_distance = x;
    }
    if let Some(i) = args.inner {
        spec.inner = match i {
            InnerArg::Uniform => InnerKind::Uniform,
            InnerArg::Center => InnerKind::Center,
        };
    }
    if let Some(f) = args.figure {
        spec.figure = match f {
            FigureArg::Random => Figure::Random,
            FigureArg::Sharp => Figure::Sharp,
        };
    }
    spec.output_path = args.out.clone();
    Ok(spec)
}

fn run(kind: SuiteKind, args: &Args) -> Result<bool, ExperimentError> {
    let spec = build_spec(kind, args)?;
    let cfg = RootFindConfig::default();
    let report = match args.replay {
        Some(seed) => replay(&spec, seed, &cfg)?,
        None => run_suite(&spec, args.jobs, &cfg)?,
    };
    let written = write_outputs(&report, &args.out)?;
    let agg = &report.aggregate;
    let label = if agg.exploratory { " (exploratory)" } else { "" };
    println!(
        "{}{label}: {}/{} passed, pass_rate {:.6}, {:.2}s",
        serde_json::to_value(kind)?.as_str().unwrap_or("suite"),
        agg.passes,
        agg.trials,
        agg.pass_rate,
        report.wall_time
    );
    for f in agg.failures.iter().take(10) {
        let seed = f.seed.map(|s| format!(" seed {s}")).unwrap_or_default();
        println!("  failed trial {}{seed}: {}", f.index, f.reason);
    }
    for p in &written {
        println!("wrote {}", p.display());
    }
    Ok(!agg.pass_expected || report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (kind, args) = match &cli.command {
        Command::Thm1(a) => (SuiteKind::Thm1Suite, a),
        Command::Thm2(a) => (SuiteKind::Thm2Suite, a),
        Command::Sharpness(a) => (SuiteKind::SharpnessScan, a),
        Command::Pairing(a) => (SuiteKind::PairingScan, a),
        Command::Annulus(a) => (SuiteKind::Annulus, a),
        Command::Plot(a) => (SuiteKind::Plot, a),
    };
    match run(kind, args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("gl-lab: {e}");
            ExitCode::from(2)
        }
    }
}
