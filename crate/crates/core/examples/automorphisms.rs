//! Automorphisms of F_N: composition, inverses, inner and outer equality.
use aperiodic_lab::aut::{sample, standard_generators, Family, FreeAutomorphism};
use aperiodic_lab::homology::{abelianization, in_ia3};
use aperiodic_lab::words::{Alphabet, Word};

fn main() -> aperiodic_lab::Result<()> {
    let f2 = Alphabet::new(2)?;
    let fib = FreeAutomorphism::from_strs(f2, &["ab", "a"], &["b", "Ba"])?;
    println!("phi = {fib}");
    println!("phi^-1 = {}", fib.inverse());
    println!("phi^3 = {}", fib.pow(3));

    let ad = FreeAutomorphism::inner(&Word::parse(f2, "ab")?);
    let twisted = ad.compose(&fib)?;
    println!("ad_ab . phi = {twisted}, outer equal to phi: {}", twisted.outer_eq(&fib)?);
    println!("ad_ab is inner by {:?}", ad.is_inner().map(|w| w.to_string()));

    let gens = standard_generators(3, Family::Ia3)?;
    let phi = sample(&gens, 6, 7)?;
    println!("sampled IA(F_3,3) element: {phi}");
    println!("in IA3: {}, abelianization:\n{}", in_ia3(&phi), abelianization(&phi));
    Ok(())
}
