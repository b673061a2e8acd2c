//! Small runs of the four orbit experiments.
use aperiodic_lab::harness::{run, with_threads, Experiment, ExperimentConfig};

fn main() -> aperiodic_lab::Result<()> {
    let cfg = ExperimentConfig { samples: 40, ..ExperimentConfig::default() };
    for kind in [Experiment::Conjugacy, Experiment::Factors, Experiment::Torsion, Experiment::Splittings] {
        let report = with_threads(|| run(kind, &cfg))??;
        let h = &report.histogram;
        println!(
            "{:<11} period 1: {:>4}  period > 1: {:>3}  no period: {:>3}  blowup: {:>3}  violations: {}",
            kind.name(),
            h.period_1,
            h.period_gt1,
            h.no_period,
            h.blowup,
            report.violations.len()
        );
        for c in &report.controls {
            println!("  control {}: {:?} (expected {:?})", c.name, c.outcome, c.expected);
        }
    }
    Ok(())
}
