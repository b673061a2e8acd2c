use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use aperiodic_lab::aut::Family;
use aperiodic_lab::harness::{self, Experiment, ExperimentConfig};
use aperiodic_lab::homology::{abelian_standing_assumptions_check, congruence_torsion_scan};
use aperiodic_lab::rtt;
use aperiodic_lab::splittings::GraphMapRep;
use aperiodic_lab::{Error, Result};

#[derive(Parser)]
#[command(name = "aperiodic-lab", version, about = "Periodic-implies-fixed experiments for IA(F_N,3) and IA(Z^n,3)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Orbits of conjugacy classes and of elements.
    Conjugacy(ExperimentArgs),
    /// Orbits of free factor systems.
    Factors(ExperimentArgs),
    /// Finite-order search among non-inner samples.
    Torsion(ExperimentArgs),
    /// Orbits of free splittings over a pool of marked graphs.
    Splittings(ExperimentArgs),
    /// Finite-order matrices in the congruence subgroup of GL_n(Z).
    Minkowski(ScanArgs),
    /// Per(M) = Fix(M) over the congruence subgroup of GL_n(Z).
    Abelian(ScanArgs),
    /// Filtration, strata, train-track checks and bounded cancellation for a graph map.
    RttAnalyze(RttArgs),
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, default_value_t = 2)]
    rank: usize,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 12)]
    max_iter: usize,
    /// Generator family: ia3 or nielsen.
    #[arg(long, default_value = "ia3")]
    family: Family,
    #[arg(long, default_value_t = 8)]
    budget: usize,
    #[arg(long, default_value_t = 6)]
    word_len: usize,
    #[arg(long, default_value_t = 8)]
    pool_draws: usize,
    #[arg(long, default_value_t = 10_000)]
    length_cap: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-orbit CSV table.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ScanArgs {
    #[arg(long, default_value_t = 2)]
    rank: usize,
    #[arg(long, default_value_t = 6)]
    bound: i64,
    /// Congruence level (3 for the theorem; 1 as a control).
    #[arg(long, default_value_t = 3)]
    level: i64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RttArgs {
    /// Graph-map file.
    input: PathBuf,
    #[arg(long, default_value_t = rtt::DEFAULT_PATH_CAP)]
    path_cap: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit<T: Serialize>(value: &T, out: Option<&PathBuf>) -> Result<()> {
    let json = serde_json::to_string_pretty(value).map_err(|e| Error::Io(e.to_string()))?;
    match out {
        Some(path) => std::fs::write(path, json + "\n")?,
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{json}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
                _ => {}
            }
        }
    }
    Ok(())
}

fn experiment(kind: Experiment, a: ExperimentArgs) -> Result<bool> {
    let cfg = ExperimentConfig {
        rank: a.rank,
        family: a.family,
        samples: a.samples,
        budget: a.budget,
        word_len: a.word_len,
        pool_draws: a.pool_draws,
        max_iter: a.max_iter,
        length_cap: a.length_cap,
        seed: a.seed,
    };
    let report = harness::with_threads(|| harness::run(kind, &cfg))??;
    emit(&report, a.out.as_ref())?;
    if let Some(path) = &a.csv {
        report.write_csv(path)?;
    }
    let h = report.histogram;
    eprintln!(
        "{}: {} orbits, period 1: {}, period > 1: {}, no period: {}, blowup: {}, violations: {}",
        kind.name(),
        h.total(),
        h.period_1,
        h.period_gt1,
        h.no_period,
        h.blowup,
        report.violations.len()
    );
    Ok(report.is_clean())
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Conjugacy(a) => experiment(Experiment::Conjugacy, a),
        Command::Factors(a) => experiment(Experiment::Factors, a),
        Command::Torsion(a) => experiment(Experiment::Torsion, a),
        Command::Splittings(a) => experiment(Experiment::Splittings, a),
        Command::Minkowski(a) => {
            let r = harness::with_threads(|| congruence_torsion_scan(a.rank, a.bound, a.level))??;
            emit(&r, a.out.as_ref())?;
            Ok(r.violations == 0)
        }
        Command::Abelian(a) => {
            if a.level != 3 {
                return Err(Error::Config("the Per = Fix check runs at level 3".into()));
            }
            let r = harness::with_threads(|| abelian_standing_assumptions_check(a.rank, a.bound))??;
            emit(&r, a.out.as_ref())?;
            Ok(r.violations == 0)
        }
        Command::RttAnalyze(a) => {
            let text = std::fs::read_to_string(&a.input)?;
            let f = GraphMapRep::parse(&text)?;
            let analysis = rtt::analyze(&f, a.path_cap)?;
            emit(&analysis, a.out.as_ref())?;
            Ok(analysis.rtt.passes())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
