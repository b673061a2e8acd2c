//! Filtrations, Perron-Frobenius growth, train-track checks and bounded cancellation.
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use aperiodic_lab::rtt::{analyze, bcc_trials, filtration_of, DEFAULT_PATH_CAP};
use aperiodic_lab::splittings::{GraphMapRep, MarkedGraph};
use aperiodic_lab::words::Alphabet;

fn main() -> aperiodic_lab::Result<()> {
    let rose = MarkedGraph::standard_rose(Alphabet::new(2)?);
    let f = GraphMapRep::rose_map(rose, &["ab", "a"])?;
    for s in filtration_of(&f)?.strata {
        println!("stratum {:?}: {:?}, periodicity {:?}", s.edges, s.class, s.periodicity);
    }

    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/data/maps/two_strata.map"))?;
    let g = GraphMapRep::parse(&text)?;
    let analysis = analyze(&g, DEFAULT_PATH_CAP)?;
    println!("two_strata: train track {}, bcc {}", analysis.rtt.passes(), analysis.bcc);

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let trials = bcc_trials(&g, 500, 12, &mut rng)?;
    println!("max cancellation {} against bound {}", trials.max_cancellation, trials.bound);
    Ok(())
}
