//! Stallings folding, membership and orbits of subgroup conjugacy classes.
use aperiodic_lab::aut::FreeAutomorphism;
use aperiodic_lab::subgroups::{membership, orbit_period_class, StallingsCore, SubgroupConjClass};
use aperiodic_lab::words::{Alphabet, Word};

fn main() -> aperiodic_lab::Result<()> {
    let f2 = Alphabet::new(2)?;
    let gens = vec![Word::parse(f2, "aab")?, Word::parse(f2, "ab")?];
    let core = StallingsCore::fold(f2, &gens)?;
    println!("core of <aab, ab>: {} vertices, rank {}", core.vertex_count(), core.rank());
    for w in ["bb", "ba", "aBa"] {
        println!("  {w} in H: {}", membership(&Word::parse(f2, w)?, &core));
    }

    let swap = FreeAutomorphism::from_strs(f2, &["b", "a"], &["b", "a"])?;
    let h = SubgroupConjClass::from_generators(f2, &[Word::parse(f2, "a")?])?;
    let report = orbit_period_class(&swap, &h, 12, 10_000)?;
    println!("orbit of [<a>] under the swap: {:?}", report.outcome);

    let fib = FreeAutomorphism::from_strs(f2, &["ab", "a"], &["b", "Ba"])?;
    let report = orbit_period_class(&fib, &h, 12, 10_000)?;
    println!("orbit of [<a>] under a->ab, b->a: {:?}", report.outcome);
    Ok(())
}
