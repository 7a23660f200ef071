use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use sigfeed::io::{self, ConfigFile, Method};
use sigfeed::pipeline::{self, RunConfig};
use sigfeed::testcurves::{random_curve, CurveSpec};
use sigfeed::{Error, Limits, ProfileFamily};

#[derive(Parser)]
#[command(name = "sigfeed", version, about = "Chord-error and jerk-limited feed rate scheduling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scan, segment, schedule and simulate a curve.
    Run(RunArgs),
    /// Re-simulate a stored block table.
    Replay(ReplayArgs),
    /// Write a reproducible random test curve.
    GenCurve(GenArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Standard,
    HighDynamics,
}

impl Preset {
    fn name(self) -> &'static str {
        match self {
            Preset::Standard => "standard",
            Preset::HighDynamics => "high-dynamics",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Sigmoid,
    Sine,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Sigmoid,
    Sine,
}

#[derive(Args)]
struct LimitArgs {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Limit preset; replaces the one named in the configuration.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Breakpoint screening threshold (mm/s per unit parameter).
    #[arg(long)]
    mu_s: Option<f64>,
}

#[derive(Args)]
struct RunArgs {
    /// TOML curve file; overrides the configuration's `curve`.
    #[arg(long)]
    curve: Option<PathBuf>,
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[command(flatten)]
    limits: LimitArgs,
}

#[derive(Args)]
struct ReplayArgs {
    #[arg(long)]
    curve: PathBuf,
    /// Block table written by `run`.
    #[arg(long)]
    blocks: PathBuf,
    #[arg(long, value_enum, default_value = "sigmoid")]
    method: FamilyArg,
    #[arg(long, default_value = "replay")]
    out_dir: PathBuf,
    #[command(flatten)]
    limits: LimitArgs,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    seed: u64,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load_config(args: &LimitArgs) -> Result<(ConfigFile, Limits), Error> {
    let mut config = match &args.config {
        Some(path) => io::read_config(path)?,
        None => ConfigFile::default(),
    };
    if let Some(p) = args.preset {
        config.preset = Some(p.name().to_string());
    }
    if let Some(mu) = args.mu_s {
        config.limits.mu_s = Some(mu);
    }
    let limits = config.limits()?;
    Ok((config, limits))
}

fn run(args: RunArgs) -> Result<(), Error> {
    let (config, limits) = load_config(&args.limits)?;
    let curve_path = args
        .curve
        .or(config.curve.clone())
        .ok_or_else(|| Error::MalformedInput("no curve given (use --curve or `curve` in the configuration)".into()))?;
    let method = match args.method {
        Some(MethodArg::Sigmoid) => Method::Sigmoid,
        Some(MethodArg::Sine) => Method::Sine,
        Some(MethodArg::Both) => Method::Both,
        None => config.method.unwrap_or(Method::Both),
    };
    let out_dir = args.out_dir.or(config.out_dir.clone()).unwrap_or_else(|| PathBuf::from("out"));
    let run_config = RunConfig {
        curve_path,
        limits,
        method,
        out_dir,
        emit: config.emit,
    };
    info!("running {:?} on {}", method, run_config.curve_path.display());
    let report = pipeline::run(&run_config)?;
    for o in &report.outcomes {
        let s = &o.summary;
        println!(
            "{:<8} time {:.6} s  points {}  feed {:.3} mm/s  accel {:.1} mm/s^2  jerk {:.1} mm/s^3  chord {:.3e} mm",
            o.family.as_str(),
            s.total_time,
            s.n_points,
            s.max_feed,
            s.max_accel,
            s.max_jerk,
            s.max_chord_err
        );
    }
    if let Some(c) = &report.comparison {
        println!("sigmoid saves {:.3}% of the sine time", c.improvement_percent);
    }
    println!("wrote {}", run_config.out_dir.display());
    Ok(())
}

fn replay(args: ReplayArgs) -> Result<(), Error> {
    let (config, limits) = load_config(&args.limits)?;
    let curve = io::read_curve(&args.curve)?;
    let blocks = io::read_blocks(&args.blocks)?;
    let family = match args.method {
        FamilyArg::Sigmoid => ProfileFamily::Sigmoid,
        FamilyArg::Sine => ProfileFamily::Sine,
    };
    let outcome = pipeline::replay(&curve, &blocks, family, &limits)?;
    pipeline::write_outcome(&args.out_dir, &outcome, &config.emit)?;
    println!(
        "{} time {:.6} s  points {}  -> {}",
        family.as_str(),
        outcome.summary.total_time,
        outcome.summary.n_points,
        args.out_dir.display()
    );
    Ok(())
}

fn gen_curve(args: GenArgs) -> Result<(), Error> {
    let curve = random_curve(args.seed, &CurveSpec::default())?;
    let text = io::format_curve(&curve)?;
    match &args.out {
        Some(path) => write_file(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// 2 for unreadable or invalid input, 3 when no feasible schedule exists.
fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Parse { .. }
        | Error::InvalidCurve(_)
        | Error::InvalidLimits(_)
        | Error::MalformedInput(_)
        | Error::MalformedScatter(_)
        | Error::DwellUnsupported
        | Error::Domain { .. } => 2,
        Error::InfeasibleJunction(_) | Error::NonConvergence { .. } => 3,
        _ => 1,
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
        Command::Replay(args) => replay(args),
        Command::GenCurve(args) => gen_curve(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
