use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use orbitlab_core::classify::DEFAULT_ETA;
use orbitlab_core::solver::{SeedPlan, SolveConfig, Tolerances};

mod commands;
mod record;

use commands::{Outcome, Status};
use record::RunRecord;

const AFTER_HELP: &str = "\
CSV outputs:
  census --csv FILE   columns n,P_n,Q_n,log_P_n_over_n (P_n counts isolated points
                      fixed by the n-th iterate; Q_n those of least period n;
                      empty cells mark unavailable rows)
  sample --csv FILE   columns eps,frequency (fraction of trials with an orbit of
                      hyperbolicity margin below eps)

Exit codes: 0 success, 2 usage, 3 assertion failure, 4 infeasible scale, 1 other error.";

#[derive(Debug, Parser)]
#[command(name = "orbitlab", version, about = "Periodic orbits of polynomial maps", after_help = AFTER_HELP)]
pub struct Cli {
    /// Directory for the append-only JSON-lines run log.
    #[arg(long, global = true, env = "ORBITLAB_LOG_DIR")]
    pub log_dir: Option<PathBuf>,

    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[command(flatten)]
    pub tol: TolArgs,

    #[command(subcommand)]
    pub command: Command,
}

/// Numerical tolerances, defaulting to the library values.
#[derive(Debug, Clone, Args)]
pub struct TolArgs {
    /// Residual acceptance for |P^(k)(x) - x|.
    #[arg(long, global = true, default_value_t = Tolerances::default().residual)]
    pub residual_tol: f64,
    /// Distance below which two roots are merged.
    #[arg(long, global = true, default_value_t = Tolerances::default().dedup)]
    pub dedup_tol: f64,
    /// Smallest singular value certifying an isolated root.
    #[arg(long, global = true, default_value_t = Tolerances::default().singular)]
    pub singular_tol: f64,
    /// Newton polishing target.
    #[arg(long, global = true, default_value_t = Tolerances::default().polish)]
    pub polish_tol: f64,
    /// Relative imaginary part below which a root counts as real.
    #[arg(long, global = true, default_value_t = Tolerances::default().real)]
    pub real_tol: f64,
    /// Radius for merging a multiple root's cluster.
    #[arg(long, global = true, default_value_t = Tolerances::default().cluster)]
    pub cluster_tol: f64,
    /// Matching tolerance when partitioning points into orbits.
    #[arg(long, global = true, default_value_t = Tolerances::default().orbit_match)]
    pub orbit_tol: f64,
    /// Marginality tolerance on ||multiplier| - 1|.
    #[arg(long, global = true, default_value_t = DEFAULT_ETA)]
    pub eta: f64,
    /// Cap on D^k for the expanded univariate path.
    #[arg(long, global = true, default_value_t = SolveConfig::default().degree_cap)]
    pub degree_cap: u128,
    /// Cap on D^k for the simultaneous univariate path.
    #[arg(long, global = true, default_value_t = SolveConfig::default().simultaneous_cap)]
    pub simultaneous_cap: u128,
}

impl TolArgs {
    pub fn solve_config(&self) -> SolveConfig {
        SolveConfig {
            tolerances: Tolerances {
                residual: self.residual_tol,
                dedup: self.dedup_tol,
                singular: self.singular_tol,
                polish: self.polish_tol,
                real: self.real_tol,
                cluster: self.cluster_tol,
                orbit_match: self.orbit_tol,
            },
            degree_cap: self.degree_cap,
            simultaneous_cap: self.simultaneous_cap,
            ..SolveConfig::default()
        }
    }
}

/// Newton seeding for maps with N >= 2.
#[derive(Debug, Clone, Args)]
pub struct SeedArgs {
    /// Lower edge of the seed box on every real axis.
    #[arg(long, default_value_t = -1.5, allow_hyphen_values = true)]
    pub seed_lower: f64,
    /// Upper edge of the seed box on every real axis.
    #[arg(long, default_value_t = 1.5, allow_hyphen_values = true)]
    pub seed_upper: f64,
    /// Grid points per real axis.
    #[arg(long, default_value_t = 7)]
    pub seed_resolution: usize,
    /// Additional uniform random seeds.
    #[arg(long, default_value_t = 200)]
    pub seed_random: usize,
    /// Seed only real starting points.
    #[arg(long)]
    pub seed_real_only: bool,
}

impl SeedArgs {
    pub fn plan(&self) -> SeedPlan {
        SeedPlan {
            lower: self.seed_lower,
            upper: self.seed_upper,
            resolution: self.seed_resolution,
            random: self.seed_random,
            complex: !self.seed_real_only,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count periodic points for n = 1..n_max and truncate the zeta function.
    Census(CensusArgs),
    /// Monte-Carlo hyperbolicity margins and unit-multiplier hits.
    Sample(SampleArgs),
    /// Split a degenerate fixed point into hyperbolic ones.
    Split(SplitArgs),
    /// Drive the splitting from a target sequence a_n at n1.
    Schedule(ScheduleArgs),
    /// Check the exact D^(kN) hyperbolic count of z_i -> z_i^D.
    Lemma2(Lemma2Args),
    /// Eliminate x from the period/multiplier system exactly.
    Eliminate(EliminateArgs),
    /// Re-run a logged command and compare its output bytes.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CensusArgs {
    /// Map file (JSON map format).
    #[arg(long)]
    pub map: PathBuf,
    /// Largest period n to count.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n_max: u64,
    /// Zeta truncation order (defaults to n-max).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub zeta_order: Option<u64>,
    /// Fail (exit 3) when any row is flagged or unavailable.
    #[arg(long)]
    pub strict: bool,
    /// Also write the count table as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub seeds: SeedArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SampleArgs {
    /// Dimension N.
    #[arg(long, default_value_t = 1)]
    pub n: usize,
    #[arg(long, default_value_t = 2)]
    pub degree: u32,
    #[arg(long, default_value_t = 4)]
    pub k_max: usize,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub trials: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Strictly decreasing margins, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [1e-2, 1e-3, 1e-4])]
    pub eps: Vec<f64>,
    /// Unit-circle values separated by ';', each RE,IM, RE, i or -i.
    #[arg(long, value_delimiter = ';', allow_hyphen_values = true)]
    pub lambda0: Vec<String>,
    /// Distance at which a multiplier counts as hitting lambda0.
    #[arg(long, default_value_t = 1e-6)]
    pub lambda0_tol: f64,
    /// Inspect only real orbits.
    #[arg(long)]
    pub real_orbits: bool,
    /// Omit the planted parabolic control x -> x + x^2.
    #[arg(long)]
    pub no_control: bool,
    /// Also write the eps ladder frequencies as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub seeds: SeedArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SplitParams {
    /// Leading coefficient of the seed normal form.
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    pub leading: f64,
    /// Half-width of the window around the degenerate point.
    #[arg(long, default_value_t = 1.0)]
    pub window: f64,
    /// Preferred root spacing.
    #[arg(long, default_value_t = 0.2)]
    pub spacing: f64,
    /// Largest accepted target count.
    #[arg(long, default_value_t = 64)]
    pub cap: usize,
}

#[derive(Debug, Clone, Args)]
pub struct SplitArgs {
    /// Degeneracy order k of the seed x + l x^(k+1).
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    pub order: u32,
    /// Target number of hyperbolic fixed points.
    #[arg(long)]
    pub count: usize,
    /// Perturbation size, as a fraction of the certification margin, for the
    /// persistence check.
    #[arg(long, default_value_t = 1e-3)]
    pub persistence: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub params: SplitParams,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SequenceArg {
    /// a_n = 1
    One,
    /// a_n = n
    Linear,
    /// a_n = n^n
    SelfPower,
}

#[derive(Debug, Clone, Args)]
pub struct ScheduleArgs {
    #[arg(long, value_enum)]
    pub sequence: SequenceArg,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n1: u64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    pub order: u32,
    #[command(flatten)]
    pub params: SplitParams,
}

#[derive(Debug, Clone, Args)]
pub struct Lemma2Args {
    /// Dimension N.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub n: u64,
    #[arg(long, value_parser = clap::value_parser!(u32).range(2..))]
    pub degree: u32,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub period: u64,
    /// Smallest acceptable hyperbolicity margin.
    #[arg(long, default_value_t = 0.5)]
    pub min_margin: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub seeds: SeedArgs,
}

#[derive(Debug, Clone, Args)]
pub struct EliminateArgs {
    #[arg(long)]
    pub degree: u32,
    #[arg(long)]
    pub period: usize,
    /// Exact unit-modulus value RE,IM (integers, p/q or decimals).
    #[arg(long, default_value = "1,0", allow_hyphen_values = true)]
    pub lambda0: String,
}

#[derive(Debug, Clone, Args)]
pub struct ReplayArgs {
    /// Run log (JSON lines) or a single record.
    #[arg(long)]
    pub record: PathBuf,
    /// Zero-based line in the log (defaults to the last).
    #[arg(long)]
    pub index: Option<usize>,
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    use orbitlab_core::Error as E;
    match err.downcast_ref::<E>() {
        Some(E::DegreeCap { .. } | E::SplitCap { .. } | E::EliminationScope(_)) => 4,
        Some(
            E::InvalidConfig(_)
            | E::InvalidMap(_)
            | E::OffUnitCircle { .. }
            | E::DimensionMismatch { .. }
            | E::Json(_),
        ) => 2,
        Some(_) => 1,
        None if err.downcast_ref::<std::io::Error>().is_some() => 2,
        None => 1,
    }
}

pub fn render(outcome: &Outcome) -> Result<String> {
    Ok(serde_json::to_string_pretty(&outcome.json)? + "\n")
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn run(cli: &Cli, raw_args: Vec<String>) -> Result<u8> {
    let started = Instant::now();
    let outcome = commands::execute(cli)?;
    let text = render(&outcome)?;
    match &cli.out {
        Some(path) => write_file(path, &text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    for (path, body) in &outcome.files {
        write_file(path, body)?;
    }
    let code = match &outcome.status {
        Status::Ok => 0,
        Status::AssertionFailed(msg) => {
            eprintln!("assertion failed: {msg}");
            3
        }
    };
    if let (Some(dir), false) = (&cli.log_dir, matches!(cli.command, Command::Replay(_))) {
        let rec = RunRecord::new(
            &outcome,
            raw_args,
            &text,
            cli.out.as_deref(),
            code,
            started.elapsed(),
        );
        rec.append(dir)?;
    }
    Ok(code)
}

fn main() -> ExitCode {
    let raw_args: Vec<String> = std::env::args().skip(1).collect();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match run(&cli, raw_args) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
