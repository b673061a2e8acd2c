//! Automorphisms of `F_N` carried together with an exact inverse, outer
//! classes, inner-automorphism detection and seeded sampling.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{parse_err, Error, Result};
use crate::words::{check_images, Alphabet, Letter, Word};

/// An automorphism of `F_N` given by the images of the basis, together with
/// the images of its inverse. Both composites are checked at construction.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FreeAutomorphism {
    alphabet: Alphabet,
    forward: Vec<Word>,
    backward: Vec<Word>,
}

/// Generator family for [`standard_generators`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// Transvections, inversions and transpositions; generates `Aut(F_N)`.
    Nielsen,
    /// Maps acting trivially on `H_1(F_N, Z/3Z)`.
    Ia3,
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nielsen" => Ok(Family::Nielsen),
            "ia3" => Ok(Family::Ia3),
            other => Err(Error::Config(format!("unknown family {other}"))),
        }
    }
}

fn composite_is_identity(outer: &[Word], inner: &[Word]) -> Result<Option<usize>> {
    for (i, img) in inner.iter().enumerate() {
        let back = img.substitute(outer)?;
        if back.letters() != [Letter::generator(i)] {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

impl FreeAutomorphism {
    /// Accept `forward` with claimed inverse `backward` if both composites
    /// reduce to the identity on every basis letter.
    pub fn certify(forward: Vec<Word>, backward: Vec<Word>) -> Result<Self> {
        let alphabet = forward
            .first()
            .map(|w| w.alphabet())
            .ok_or(Error::ImageCount { expected: 1, found: 0 })?;
        check_images(alphabet, &forward)?;
        check_images(alphabet, &backward)?;
        if let Some(i) = composite_is_identity(&forward, &backward)? {
            return Err(Error::CompositeNotIdentity {
                side: "forward∘backward",
                letter: Letter::generator(i).to_char(),
            });
        }
        if let Some(i) = composite_is_identity(&backward, &forward)? {
            return Err(Error::CompositeNotIdentity {
                side: "backward∘forward",
                letter: Letter::generator(i).to_char(),
            });
        }
        Ok(FreeAutomorphism {
            alphabet,
            forward,
            backward,
        })
    }

    /// Parse images given in the text format, e.g. `["ab", "b"]`.
    pub fn from_strs(alphabet: Alphabet, forward: &[&str], backward: &[&str]) -> Result<Self> {
        let parse = |v: &[&str]| -> Result<Vec<Word>> { v.iter().map(|s| Word::parse(alphabet, s)).collect() };
        FreeAutomorphism::certify(parse(forward)?, parse(backward)?)
    }

    pub fn identity(alphabet: Alphabet) -> Self {
        let images: Vec<Word> = (0..alphabet.rank()).map(|i| Word::generator(alphabet, i)).collect();
        FreeAutomorphism {
            alphabet,
            forward: images.clone(),
            backward: images,
        }
    }

    /// Conjugation `g ↦ w g w⁻¹`.
    pub fn inner(w: &Word) -> Self {
        let alphabet = w.alphabet();
        let gens = (0..alphabet.rank()).map(|i| Word::generator(alphabet, i));
        let winv = w.inverse();
        FreeAutomorphism {
            alphabet,
            forward: gens.clone().map(|g| g.conjugate_by(w)).collect(),
            backward: gens.map(|g| g.conjugate_by(&winv)).collect(),
        }
    }

    /// `x_i ↦ x_i x_j`.
    pub fn transvection(alphabet: Alphabet, i: usize, j: usize) -> Self {
        Self::single(alphabet, i, |x| x.mul(&gen(alphabet, j)), |x| x.mul(&gen(alphabet, j).inverse()))
    }

    /// `x_i ↦ x_j x_i`.
    pub fn left_transvection(alphabet: Alphabet, i: usize, j: usize) -> Self {
        Self::single(alphabet, i, |x| gen(alphabet, j).mul(x), |x| gen(alphabet, j).inverse().mul(x))
    }

    /// `x_i ↦ x_i⁻¹`.
    pub fn inversion(alphabet: Alphabet, i: usize) -> Self {
        Self::single(alphabet, i, |x| x.inverse(), |x| x.inverse())
    }

    /// Permute the basis: `x_i ↦ x_{perm[i]}`.
    pub fn permutation(alphabet: Alphabet, perm: &[usize]) -> Self {
        let mut backward = vec![Word::identity(alphabet); alphabet.rank()];
        let forward: Vec<Word> = perm.iter().map(|&p| gen(alphabet, p)).collect();
        for (i, &p) in perm.iter().enumerate() {
            backward[p] = gen(alphabet, i);
        }
        FreeAutomorphism {
            alphabet,
            forward,
            backward,
        }
    }

    pub fn transposition(alphabet: Alphabet, i: usize, j: usize) -> Self {
        let mut perm: Vec<usize> = (0..alphabet.rank()).collect();
        perm.swap(i, j);
        Self::permutation(alphabet, &perm)
    }

    /// `x_i ↦ x_j x_i x_j⁻¹`.
    pub fn partial_conjugation(alphabet: Alphabet, i: usize, j: usize) -> Self {
        let c = gen(alphabet, j);
        Self::single(alphabet, i, |x| x.conjugate_by(&c), |x| x.conjugate_by(&c.inverse()))
    }

    /// `x_i ↦ x_i [x_j, x_k]`.
    pub fn commutator_insertion(alphabet: Alphabet, i: usize, j: usize, k: usize) -> Self {
        let c = Word::commutator(&gen(alphabet, j), &gen(alphabet, k));
        Self::single(alphabet, i, |x| x.mul(&c), |x| x.mul(&c.inverse()))
    }

    /// `x_i ↦ x_i x_j³`.
    pub fn cube(alphabet: Alphabet, i: usize, j: usize) -> Self {
        let c = gen(alphabet, j).pow(3);
        Self::single(alphabet, i, |x| x.mul(&c), |x| x.mul(&c.inverse()))
    }

    fn single(alphabet: Alphabet, i: usize, fwd: impl Fn(&Word) -> Word, bwd: impl Fn(&Word) -> Word) -> Self {
        let mut forward: Vec<Word> = (0..alphabet.rank()).map(|k| gen(alphabet, k)).collect();
        let mut backward = forward.clone();
        forward[i] = fwd(&forward[i]);
        backward[i] = bwd(&backward[i]);
        debug_assert!(composite_is_identity(&forward, &backward).unwrap().is_none());
        FreeAutomorphism {
            alphabet,
            forward,
            backward,
        }
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn rank(&self) -> usize {
        self.alphabet.rank()
    }

    pub fn images(&self) -> &[Word] {
        &self.forward
    }

    pub fn inverse_images(&self) -> &[Word] {
        &self.backward
    }

    /// Total length of forward and backward images.
    pub fn size(&self) -> usize {
        self.forward.iter().chain(&self.backward).map(Word::len).sum()
    }

    pub fn apply(&self, w: &Word) -> Result<Word> {
        self.alphabet.check(w.alphabet())?;
        w.substitute(&self.forward)
    }

    pub fn apply_bounded(&self, w: &Word, limit: usize) -> Result<Option<Word>> {
        self.alphabet.check(w.alphabet())?;
        w.substitute_bounded(&self.forward, limit)
    }

    pub fn inverse(&self) -> Self {
        FreeAutomorphism {
            alphabet: self.alphabet,
            forward: self.backward.clone(),
            backward: self.forward.clone(),
        }
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &FreeAutomorphism) -> Result<Self> {
        Ok(self
            .compose_bounded(other, usize::MAX)?
            .expect("unbounded composition always completes"))
    }

    /// As [`FreeAutomorphism::compose`], returning `None` when any image
    /// would exceed `limit` letters.
    pub fn compose_bounded(&self, other: &FreeAutomorphism, limit: usize) -> Result<Option<Self>> {
        self.alphabet.check(other.alphabet)?;
        let mut forward = Vec::with_capacity(self.rank());
        for img in &other.forward {
            match img.substitute_bounded(&self.forward, limit)? {
                Some(w) => forward.push(w),
                None => return Ok(None),
            }
        }
        let mut backward = Vec::with_capacity(self.rank());
        for img in &self.backward {
            match img.substitute_bounded(&other.backward, limit)? {
                Some(w) => backward.push(w),
                None => return Ok(None),
            }
        }
        Ok(Some(FreeAutomorphism {
            alphabet: self.alphabet,
            forward,
            backward,
        }))
    }

    /// `self^k` for any integer `k`.
    pub fn pow(&self, k: i64) -> Self {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = FreeAutomorphism::identity(self.alphabet);
        for _ in 0..k.unsigned_abs() {
            out = base.compose(&out).expect("same alphabet");
        }
        out
    }

    /// The conjugator `w` with `self = ad_w`, if `self` is inner.
    pub fn is_inner(&self) -> Option<Word> {
        inner_conjugator(&self.forward)
    }

    /// Equality in `Out(F_N)`.
    pub fn outer_eq(&self, other: &FreeAutomorphism) -> Result<bool> {
        self.alphabet.check(other.alphabet)?;
        // other⁻¹ ∘ self is inner iff self ∘ other⁻¹ is (they are conjugate).
        Ok(other.inverse().compose(self)?.is_inner().is_some())
    }

    pub fn is_identity(&self) -> bool {
        self.forward
            .iter()
            .enumerate()
            .all(|(i, w)| w.letters() == [Letter::generator(i)])
    }

    /// Parse the automorphism file format: one `a -> ab` line per basis
    /// letter, a blank line, then the inverse lines.
    pub fn parse(text: &str) -> Result<Self> {
        let mut sections: Vec<Vec<(usize, &str)>> = vec![Vec::new()];
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.starts_with('#') {
                continue;
            }
            if line.is_empty() {
                if !sections.last().unwrap().is_empty() {
                    sections.push(Vec::new());
                }
                continue;
            }
            sections.last_mut().unwrap().push((n + 1, line));
        }
        sections.retain(|s| !s.is_empty());
        if sections.len() != 2 {
            return Err(parse_err(0, "expected forward and inverse sections separated by a blank line"));
        }
        let rank = sections[0].len();
        let alphabet = Alphabet::new(rank)?;
        let read = |sec: &[(usize, &str)]| -> Result<Vec<Word>> {
            let mut images = vec![None; rank];
            for &(n, line) in sec {
                let (lhs, rhs) = line
                    .split_once("->")
                    .ok_or_else(|| parse_err(n, "expected `x -> word`"))?;
                let lhs = lhs.trim();
                let letter = lhs
                    .chars()
                    .next()
                    .and_then(Letter::from_char)
                    .filter(|l| !l.is_inverse() && lhs.len() == 1 && l.index() < rank)
                    .ok_or_else(|| parse_err(n, format!("bad basis letter {lhs:?}")))?;
                let img = Word::parse(alphabet, rhs).map_err(|e| parse_err(n, e.to_string()))?;
                images[letter.index()] = Some(img);
            }
            images
                .into_iter()
                .enumerate()
                .map(|(i, w)| w.ok_or_else(|| parse_err(0, format!("missing image of {}", Letter::generator(i).to_char()))))
                .collect()
        };
        FreeAutomorphism::certify(read(&sections[0])?, read(&sections[1])?)
    }

    /// Render in the file format accepted by [`FreeAutomorphism::parse`].
    pub fn to_file_format(&self) -> String {
        let mut out = String::new();
        for (i, w) in self.forward.iter().enumerate() {
            out.push_str(&format!("{} -> {}\n", Letter::generator(i).to_char(), w));
        }
        out.push('\n');
        for (i, w) in self.backward.iter().enumerate() {
            out.push_str(&format!("{} -> {}\n", Letter::generator(i).to_char(), w));
        }
        out
    }
}

fn gen(alphabet: Alphabet, i: usize) -> Word {
    Word::generator(alphabet, i)
}

impl fmt::Display for FreeAutomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .forward
            .iter()
            .enumerate()
            .map(|(i, w)| format!("{}↦{}", Letter::generator(i).to_char(), w))
            .collect();
        write!(f, "{}", parts.join(", "))
    }
}

impl fmt::Debug for FreeAutomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FreeAutomorphism({self})")
    }
}

/// Find `w` with `images[i] = w x_i w⁻¹` for every `i`.
///
/// `images[0] = v_0 x_1 v_0⁻¹` and `images[1] = v_1 x_2 v_1⁻¹` (as reduced
/// words) pin `w` to `v_0⟨x_1⟩ ∩ v_1⟨x_2⟩`, which is nonempty only when
/// `v_0⁻¹ v_1 = x_1^k x_2^m`; then `w = v_0 x_1^k` is checked on all letters.
pub fn inner_conjugator(images: &[Word]) -> Option<Word> {
    let alphabet = images.first()?.alphabet();
    let x = |i: usize| Word::generator(alphabet, i);
    let outer = |i: usize| -> Option<Word> {
        let letters = images[i].letters();
        let n = letters.len();
        let lo = n.checked_sub(1)? / 2;
        (n % 2 == 1 && letters[lo] == Letter::generator(i)).then_some(())?;
        let w = Word::reduce(alphabet, letters[..lo].iter().copied()).ok()?;
        (x(i).conjugate_by(&w) == images[i]).then_some(w)
    };
    let v0 = outer(0)?;
    if alphabet.rank() == 1 {
        return Some(Word::identity(alphabet));
    }
    let v1 = outer(1)?;
    let z = v0.inverse().mul(&v1);
    let letters = z.letters();
    let split = letters.iter().position(|l| l.index() != 0).unwrap_or(letters.len());
    let (head, tail) = letters.split_at(split);
    if tail.iter().any(|l| l.index() != 1) {
        return None;
    }
    let w = v0.mul(&Word::reduce(alphabet, head.iter().copied()).ok()?);
    images
        .iter()
        .enumerate()
        .all(|(i, img)| &x(i).conjugate_by(&w) == img)
        .then_some(w)
}

/// An element of `Out(F_N)`: equality is up to inner automorphisms.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OuterClass {
    representative: FreeAutomorphism,
}

impl OuterClass {
    pub fn new(representative: FreeAutomorphism) -> Self {
        OuterClass { representative }
    }

    pub fn representative(&self) -> &FreeAutomorphism {
        &self.representative
    }
}

impl PartialEq for OuterClass {
    fn eq(&self, other: &Self) -> bool {
        self.representative
            .outer_eq(&other.representative)
            .unwrap_or(false)
    }
}

impl Eq for OuterClass {}

/// Standard generating families. Every `ia3` generator acts trivially on
/// `H_1(F_N, Z/3Z)`.
pub fn standard_generators(rank: usize, family: Family) -> Result<Vec<FreeAutomorphism>> {
    if rank < 2 {
        return Err(Error::RankTooSmall { rank, min: 2 });
    }
    let alphabet = Alphabet::new(rank)?;
    let mut out = Vec::new();
    match family {
        Family::Nielsen => {
            for i in 0..rank {
                for j in 0..rank {
                    if i != j {
                        out.push(FreeAutomorphism::transvection(alphabet, i, j));
                    }
                }
            }
            for i in 0..rank {
                out.push(FreeAutomorphism::inversion(alphabet, i));
            }
            for i in 0..rank {
                for j in i + 1..rank {
                    out.push(FreeAutomorphism::transposition(alphabet, i, j));
                }
            }
        }
        Family::Ia3 => {
            for i in 0..rank {
                for j in 0..rank {
                    if i != j {
                        out.push(FreeAutomorphism::partial_conjugation(alphabet, i, j));
                    }
                }
            }
            for i in 0..rank {
                for j in 0..rank {
                    for k in 0..rank {
                        if i != j && j != k && i != k {
                            out.push(FreeAutomorphism::commutator_insertion(alphabet, i, j, k));
                        }
                    }
                }
            }
            for i in 0..rank {
                for j in 0..rank {
                    if i != j {
                        out.push(FreeAutomorphism::cube(alphabet, i, j));
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Product of `budget` generators or inverses chosen uniformly with a
/// ChaCha stream seeded by `seed`.
pub fn sample(generators: &[FreeAutomorphism], budget: usize, seed: u64) -> Result<FreeAutomorphism> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_with(generators, budget, &mut rng)
}

pub fn sample_with<R: Rng + ?Sized>(generators: &[FreeAutomorphism], budget: usize, rng: &mut R) -> Result<FreeAutomorphism> {
    if generators.is_empty() {
        return Err(Error::EmptyGenerators);
    }
    if budget == 0 {
        return Err(Error::InvalidBudget(budget));
    }
    let mut out = FreeAutomorphism::identity(generators[0].alphabet());
    for _ in 0..budget {
        let pick = rng.random_range(0..2 * generators.len());
        let g = &generators[pick / 2];
        out = if pick % 2 == 0 {
            g.compose(&out)?
        } else {
            g.inverse().compose(&out)?
        };
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::words_up_to;

    fn f2() -> Alphabet {
        Alphabet::new(2).unwrap()
    }

    fn w(s: &str) -> Word {
        Word::parse(f2(), s).unwrap()
    }

    fn aut(fwd: &[&str], bwd: &[&str]) -> FreeAutomorphism {
        FreeAutomorphism::from_strs(f2(), fwd, bwd).unwrap()
    }

    #[test]
    fn certify_examples() {
        assert!(FreeAutomorphism::from_strs(f2(), &["ab", "b"], &["aB", "b"]).is_ok());
        let err = FreeAutomorphism::from_strs(f2(), &["ab", "b"], &["a", "b"]).unwrap_err();
        assert!(matches!(err, Error::CompositeNotIdentity { letter: 'a', .. }));
        assert!(FreeAutomorphism::from_strs(f2(), &["a", "b"], &["a", "b"]).is_ok());
    }

    #[test]
    fn compose_examples() {
        let t = aut(&["ab", "b"], &["aB", "b"]);
        assert!(t.compose(&t.inverse()).unwrap().is_identity());
        assert_eq!(t.compose(&t).unwrap().images()[0], w("abb"));
        let id = FreeAutomorphism::identity(f2());
        assert_eq!(id.compose(&t).unwrap(), t);
    }

    #[test]
    fn compose_rejects_mismatch() {
        let id3 = FreeAutomorphism::identity(Alphabet::new(3).unwrap());
        let id2 = FreeAutomorphism::identity(f2());
        assert!(matches!(id2.compose(&id3), Err(Error::AlphabetMismatch { .. })));
    }

    #[test]
    fn inner_examples() {
        let c = aut(&["baB", "b"], &["Bab", "b"]);
        assert_eq!(c.is_inner(), Some(w("b")));
        assert_eq!(FreeAutomorphism::identity(f2()).is_inner(), Some(w("1")));
        assert_eq!(aut(&["ab", "b"], &["aB", "b"]).is_inner(), None);
    }

    #[test]
    fn rank_one_inner() {
        let z = Alphabet::new(1).unwrap();
        assert!(FreeAutomorphism::identity(z).is_inner().is_some());
        assert!(FreeAutomorphism::inversion(z, 0).is_inner().is_none());
    }

    #[test]
    fn outer_eq_examples() {
        let phi = aut(&["ab", "a"], &["b", "Ba"]);
        let adw = FreeAutomorphism::inner(&w("abA"));
        assert!(adw.compose(&phi).unwrap().outer_eq(&phi).unwrap());
        let t = aut(&["ab", "b"], &["aB", "b"]);
        assert!(!FreeAutomorphism::identity(f2()).outer_eq(&t).unwrap());
        assert!(phi.outer_eq(&phi).unwrap());
    }

    #[test]
    fn generator_families() {
        let ia = standard_generators(2, Family::Ia3).unwrap();
        assert!(ia.contains(&aut(&["baB", "b"], &["Bab", "b"])));
        assert!(ia.contains(&aut(&["abbb", "b"], &["aBBB", "b"])));
        let c3 = Alphabet::new(3).unwrap();
        let ci = FreeAutomorphism::from_strs(c3, &["abcBC", "b", "c"], &["acbCB", "b", "c"]).unwrap();
        assert!(standard_generators(3, Family::Ia3).unwrap().contains(&ci));
        assert!(matches!(standard_generators(1, Family::Nielsen), Err(Error::RankTooSmall { .. })));
    }

    #[test]
    fn sampling() {
        let g = vec![aut(&["ab", "b"], &["aB", "b"])];
        let s = sample(&g, 1, 7).unwrap();
        assert!(s == g[0] || s == g[0].inverse());
        let ia = standard_generators(3, Family::Ia3).unwrap();
        assert_eq!(sample(&ia, 5, 99).unwrap(), sample(&ia, 5, 99).unwrap());
        assert_eq!(sample(&[], 1, 0).unwrap_err(), Error::EmptyGenerators);
        assert_eq!(sample(&ia, 0, 0).unwrap_err(), Error::InvalidBudget(0));
    }

    #[test]
    fn file_format_round_trip() {
        let phi = aut(&["ab", "a"], &["b", "Ba"]);
        let text = phi.to_file_format();
        assert_eq!(FreeAutomorphism::parse(&text).unwrap(), phi);
        assert!(FreeAutomorphism::parse("a -> ab\nb -> b\n\na -> a\nb -> b\n").is_err());
    }

    /// Brute-force oracle: search all conjugators of length ≤ 6.
    fn brute_inner(phi: &FreeAutomorphism) -> Option<Word> {
        words_up_to(f2(), 6)
            .into_iter()
            .find(|c| FreeAutomorphism::inner(c).images() == phi.images())
    }

    #[test]
    fn is_inner_matches_brute_force_on_inner_maps() {
        for c in words_up_to(f2(), 3) {
            let phi = FreeAutomorphism::inner(&c);
            assert_eq!(phi.is_inner(), Some(c.clone()));
            assert_eq!(brute_inner(&phi), Some(c));
        }
    }
}
