use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mrplan::config::{MomentMode, RunConfig, SeedPlan};
use mrplan::Probability;

mod commands;
mod output;

#[derive(Parser)]
#[command(name = "mrplan", version, about = "Moment-robust chance-constrained trajectory planning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample, estimate, reformulate and solve the planning problem.
    Plan(PlanArgs),
    /// Monte Carlo violation check of a saved plan.
    Validate(ValidateArgs),
    /// Scalar chance constraint with estimated moments, naive vs robust.
    Example1(Example1Args),
    /// Adversary trajectory samples and per-face moment estimates.
    Sample(SampleArgs),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; defaults apply to missing keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed, overriding the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, overriding the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Known,
    Robust,
}

#[derive(Args)]
struct PlanArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Adversary samples per face.
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Args)]
struct ValidateArgs {
    #[command(flatten)]
    common: Common,
    /// Plan file written by `plan`.
    #[arg(long)]
    plan: PathBuf,
    #[arg(long)]
    realizations: Option<usize>,
}

#[derive(Args)]
struct Example1Args {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 10_000)]
    trials: usize,
    #[arg(long, default_value_t = 1e-3)]
    beta: f64,
}

#[derive(Args)]
struct SampleArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    samples: Option<usize>,
}

/// Failure classes mapped onto exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Infeasible plan or violated risk bound.
    Outcome(String),
    Usage(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Outcome(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Internal(_) => 3,
        }
    }
}

impl From<mrplan::Error> for Failure {
    fn from(e: mrplan::Error) -> Self {
        Failure::Internal(e.to_string())
    }
}

/// Loads the configuration and applies command-line overrides; any failure
/// here is a usage error.
fn resolve(common: &Common, edit: impl FnOnce(&mut RunConfig)) -> Result<RunConfig, Failure> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path).map_err(|e| Failure::Usage(e.to_string()))?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.output.dir = out.display().to_string();
    }
    edit(&mut cfg);
    cfg.check().map_err(|e| Failure::Usage(e.to_string()))?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Plan(args) => {
            let cfg = resolve(&args.common, |c| {
                if let Some(mode) = args.mode {
                    c.planner.mode = match mode {
                        ModeArg::Known => MomentMode::Known,
                        ModeArg::Robust => MomentMode::Robust,
                    };
                }
                if let Some(n) = args.samples {
                    c.planner.samples = n;
                }
            })?;
            commands::plan(&cfg)
        }
        Command::Validate(args) => {
            let plan = output::read_plan(&args.plan)?;
            let cfg = if args.common.config.is_some() {
                resolve(&args.common, |_| {})?
            } else {
                let mut cfg = plan.config.clone();
                if let Some(seed) = args.common.seed {
                    cfg.seed = seed;
                }
                if let Some(out) = &args.common.out {
                    cfg.output.dir = out.display().to_string();
                }
                cfg
            };
            let realizations = args.realizations.unwrap_or(cfg.validation.realizations);
            commands::validate(&cfg, &plan, realizations)
        }
        Command::Example1(args) => {
            let beta = Probability::new(args.beta).map_err(|e| Failure::Usage(format!("--beta: {e}")))?;
            if args.samples < 2 || args.trials == 0 {
                return Err(Failure::Usage("--samples must be at least 2 and --trials at least 1".into()));
            }
            commands::example1(&args.out, SeedPlan::new(args.seed), args.samples, args.trials, beta)
        }
        Command::Sample(args) => {
            let cfg = resolve(&args.common, |c| {
                if let Some(n) = args.samples {
                    c.planner.samples = n;
                }
            })?;
            commands::sample(&cfg)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Outcome(m) => eprintln!("{m}"),
                Failure::Usage(m) => eprintln!("error: {m}"),
                Failure::Internal(m) => eprintln!("internal error: {m}"),
            }
            ExitCode::from(f.code())
        }
    }
}

pub fn out_dir(cfg: &RunConfig) -> &Path {
    Path::new(&cfg.output.dir)
}
