//! Reduced words, cyclic normal forms and conjugacy in F_2.
use aperiodic_lab::words::{cyclic_reduce, Alphabet, CyclicWord, Word};

fn main() -> aperiodic_lab::Result<()> {
    let f2 = Alphabet::new(2)?;
    let w = Word::parse(f2, "abAAaBab")?;
    println!("reduced: {w} (length {})", w.len());

    let c = Word::parse(f2, "ba")?;
    let conj = w.conjugate_by(&c);
    let (core, conjugator) = cyclic_reduce(&conj);
    println!("{conj} = ({conjugator}) {core} ({conjugator})^-1");

    let same = CyclicWord::of(&w) == CyclicWord::of(&conj);
    println!("[{w}] == [{conj}]: {same}");
    println!("exponent vector of {w}: {:?}", w.exponent_vector());
    Ok(())
}
