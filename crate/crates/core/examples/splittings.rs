//! Marked graphs, invariance of free splittings and induced free factor systems.
use aperiodic_lab::aut::FreeAutomorphism;
use aperiodic_lab::splittings::{
    induced_ffs, invariance_test, splitting_orbit_period, suspension_presentation, twist_descriptor, MarkedGraph,
    Subforest, VertexGroup,
};
use aperiodic_lab::words::{Alphabet, Word};

fn main() -> aperiodic_lab::Result<()> {
    let f2 = Alphabet::new(2)?;
    let rose = MarkedGraph::rose(
        &[Word::parse(f2, "a")?, Word::parse(f2, "ab")?],
        Some(vec![Word::parse(f2, "a")?, Word::parse(f2, "Ab")?]),
    )?;
    let petal_swap = FreeAutomorphism::from_strs(f2, &["ab", "B"], &["ab", "B"])?;
    let letter_swap = FreeAutomorphism::from_strs(f2, &["b", "a"], &["b", "a"])?;
    for phi in [&petal_swap, &letter_swap] {
        println!(
            "{phi}: invariant {}, orbit {:?}",
            invariance_test(&rose, phi)?.is_some(),
            splitting_orbit_period(&rose, phi, 12, 10_000)?
        );
    }

    let a = Word::parse(f2, "a")?;
    let b = Word::parse(f2, "b")?;
    let edge = MarkedGraph::edge_splitting(VertexGroup::new(vec![a.clone()])?, VertexGroup::new(vec![b.clone()])?, None)?;
    let ffs = induced_ffs(&edge, &Subforest { vertices: vec![0, 1], edges: vec![] })?;
    println!("<a>*<b>: {} factors, twist group {}", ffs.factors().len(), twist_descriptor(&edge));

    let theta = MarkedGraph::theta(&a, &b, None)?;
    println!("theta marking:\n{}", theta.to_file_format());
    println!("{}", suspension_presentation(&petal_swap));
    Ok(())
}
