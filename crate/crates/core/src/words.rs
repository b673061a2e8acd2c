//! Freely reduced words and cyclic words over the standard basis of `F_N`.
//!
//! Letters are written `a..z` for the basis elements `x_1..x_26` and `A..Z`
//! for their inverses. The empty word is spelled `1`.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{parse_err, Error, Result};

/// The basis `x_1..x_N` of a free group of rank `N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Alphabet {
    rank: usize,
}

impl Alphabet {
    pub fn new(rank: usize) -> Result<Self> {
        if rank == 0 {
            return Err(Error::RankTooSmall { rank, min: 1 });
        }
        Ok(Alphabet { rank })
    }

    pub fn rank(self) -> usize {
        self.rank
    }

    /// All `2N` letters in the fixed order `x_1 < x_1⁻¹ < x_2 < ...`.
    pub fn letters(self) -> impl Iterator<Item = Letter> {
        (0..2 * self.rank).map(Letter::from_key)
    }

    pub fn check(self, other: Alphabet) -> Result<()> {
        if self.rank != other.rank {
            return Err(Error::AlphabetMismatch {
                expected: self.rank,
                found: other.rank,
            });
        }
        Ok(())
    }
}

/// A basis letter or its formal inverse. Stored as `±(index + 1)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Letter(i32);

impl Letter {
    pub fn new(index: usize, inverse: bool) -> Self {
        let v = index as i32 + 1;
        Letter(if inverse { -v } else { v })
    }

    pub fn generator(index: usize) -> Self {
        Letter::new(index, false)
    }

    /// Zero-based basis index.
    pub fn index(self) -> usize {
        (self.0.unsigned_abs() - 1) as usize
    }

    pub fn is_inverse(self) -> bool {
        self.0 < 0
    }

    pub fn inverse(self) -> Self {
        Letter(-self.0)
    }

    /// Position in the order `x_1 < x_1⁻¹ < x_2 < x_2⁻¹ < ...`.
    pub fn key(self) -> usize {
        2 * self.index() + usize::from(self.is_inverse())
    }

    pub fn from_key(key: usize) -> Self {
        Letter::new(key / 2, key % 2 == 1)
    }

    /// Exponent sign: `+1` for a basis letter, `-1` for an inverse.
    pub fn sign(self) -> i64 {
        if self.is_inverse() {
            -1
        } else {
            1
        }
    }

    pub fn to_char(self) -> char {
        let base = if self.is_inverse() { b'A' } else { b'a' };
        (base + self.index() as u8) as char
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'a'..='z' => Some(Letter::new(c as usize - 'a' as usize, false)),
            'A'..='Z' => Some(Letter::new(c as usize - 'A' as usize, true)),
            _ => None,
        }
    }
}

impl Ord for Letter {
    fn cmp(&self, other: &Self) -> Ordering {
        self.key().cmp(&other.key())
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

/// Push `letter` onto a reduced stack, cancelling against the top.
fn push_reduced(stack: &mut Vec<Letter>, letter: Letter) {
    if stack.last() == Some(&letter.inverse()) {
        stack.pop();
    } else {
        stack.push(letter);
    }
}

/// A freely reduced word in `F_N`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Word {
    alphabet: Alphabet,
    letters: Vec<Letter>,
}

impl Word {
    pub fn identity(alphabet: Alphabet) -> Self {
        Word {
            alphabet,
            letters: Vec::new(),
        }
    }

    pub fn generator(alphabet: Alphabet, index: usize) -> Self {
        assert!(index < alphabet.rank(), "generator index out of range");
        Word {
            alphabet,
            letters: vec![Letter::generator(index)],
        }
    }

    /// Freely reduce a raw letter sequence.
    pub fn reduce<I>(alphabet: Alphabet, raw: I) -> Result<Self>
    where
        I: IntoIterator<Item = Letter>,
    {
        let mut stack = Vec::new();
        for letter in raw {
            if letter.index() >= alphabet.rank() {
                return Err(Error::IndexOutOfRange {
                    index: letter.index() + 1,
                    rank: alphabet.rank(),
                });
            }
            push_reduced(&mut stack, letter);
        }
        Ok(Word {
            alphabet,
            letters: stack,
        })
    }

    /// Build from signed one-based indices (`2` is `x_2`, `-2` is `x_2⁻¹`).
    pub fn from_signed(alphabet: Alphabet, raw: &[i32]) -> Result<Self> {
        let mut letters = Vec::with_capacity(raw.len());
        for &s in raw {
            if s == 0 {
                return Err(Error::IndexOutOfRange {
                    index: 0,
                    rank: alphabet.rank(),
                });
            }
            letters.push(Letter::new(s.unsigned_abs() as usize - 1, s < 0));
        }
        Word::reduce(alphabet, letters)
    }

    /// Parse the text format (`aB`, `1` for the empty word).
    pub fn parse(alphabet: Alphabet, text: &str) -> Result<Self> {
        let text = text.trim();
        if text == "1" || text.is_empty() {
            return Ok(Word::identity(alphabet));
        }
        let mut letters = Vec::with_capacity(text.len());
        for c in text.chars() {
            let letter = Letter::from_char(c).ok_or_else(|| parse_err(0, format!("bad letter {c:?}")))?;
            letters.push(letter);
        }
        Word::reduce(alphabet, letters)
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Self {
        Word {
            alphabet: self.alphabet,
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    /// Reduced product `self · other`.
    pub fn mul(&self, other: &Word) -> Word {
        assert_eq!(self.alphabet, other.alphabet, "alphabet mismatch in product");
        let mut stack = self.letters.clone();
        for &l in &other.letters {
            push_reduced(&mut stack, l);
        }
        Word {
            alphabet: self.alphabet,
            letters: stack,
        }
    }

    /// `c · self · c⁻¹`.
    pub fn conjugate_by(&self, c: &Word) -> Word {
        c.mul(self).mul(&c.inverse())
    }

    pub fn pow(&self, k: i64) -> Word {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::identity(self.alphabet);
        for _ in 0..k.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }

    /// `[x, y] = x y x⁻¹ y⁻¹`.
    pub fn commutator(x: &Word, y: &Word) -> Word {
        x.mul(y).mul(&x.inverse()).mul(&y.inverse())
    }

    pub fn is_cyclically_reduced(&self) -> bool {
        match (self.letters.first(), self.letters.last()) {
            (Some(&f), Some(&l)) => self.letters.len() == 1 || f != l.inverse(),
            _ => true,
        }
    }

    /// Exponent-sum vector (abelianization).
    pub fn exponent_vector(&self) -> Vec<i64> {
        let mut v = vec![0; self.alphabet.rank()];
        for l in &self.letters {
            v[l.index()] += l.sign();
        }
        v
    }

    /// Substitute each letter by its image (inverse letters by inverted
    /// images) and freely reduce.
    pub fn substitute(&self, images: &[Word]) -> Result<Word> {
        Ok(self
            .substitute_bounded(images, usize::MAX)?
            .expect("unbounded substitution always completes"))
    }

    /// As [`Word::substitute`], but gives up (returns `None`) as soon as the
    /// reduced result is certain to exceed `limit` letters.
    pub fn substitute_bounded(&self, images: &[Word], limit: usize) -> Result<Option<Word>> {
        let target = check_images(self.alphabet, images)?;
        let mut remaining: usize = self.letters.iter().map(|l| images[l.index()].len()).sum();
        let mut stack: Vec<Letter> = Vec::new();
        for &l in &self.letters {
            let img = &images[l.index()];
            remaining -= img.len();
            if l.is_inverse() {
                for &m in img.letters.iter().rev() {
                    push_reduced(&mut stack, m.inverse());
                }
            } else {
                for &m in &img.letters {
                    push_reduced(&mut stack, m);
                }
            }
            if stack.len() > limit.saturating_add(remaining) {
                return Ok(None);
            }
        }
        if stack.len() > limit {
            return Ok(None);
        }
        Ok(Some(Word {
            alphabet: target,
            letters: stack,
        }))
    }
}

/// Validate an image list and return its target alphabet.
pub(crate) fn check_images(domain: Alphabet, images: &[Word]) -> Result<Alphabet> {
    if images.len() != domain.rank() {
        return Err(Error::ImageCount {
            expected: domain.rank(),
            found: images.len(),
        });
    }
    let target = images[0].alphabet;
    for img in images {
        target.check(img.alphabet)?;
    }
    Ok(target)
}

/// Substitute `images` into `w` (the `apply_endo` operation).
pub fn apply_endo(images: &[Word], w: &Word) -> Result<Word> {
    w.substitute(images)
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "1");
        }
        for l in &self.letters {
            write!(f, "{}", l.to_char())?;
        }
        Ok(())
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Word({self})")
    }
}

/// A cyclically reduced word stored in its lexicographically least rotation.
/// Two words are conjugate iff their cyclic words are equal.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CyclicWord {
    alphabet: Alphabet,
    letters: Vec<Letter>,
}

impl CyclicWord {
    pub fn of(w: &Word) -> CyclicWord {
        cyclic_reduce(w).0
    }

    pub fn alphabet(&self) -> Alphabet {
        self.alphabet
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn as_word(&self) -> Word {
        Word {
            alphabet: self.alphabet,
            letters: self.letters.clone(),
        }
    }
}

impl fmt::Display for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.as_word())
    }
}

impl fmt::Debug for CyclicWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CyclicWord{self}")
    }
}

/// Index of the lexicographically least rotation (two-pointer scan, linear).
fn least_rotation(letters: &[Letter]) -> usize {
    let n = letters.len();
    let (mut i, mut j, mut k) = (0, 1, 0);
    while i < n && j < n && k < n {
        match letters[(i + k) % n].cmp(&letters[(j + k) % n]) {
            Ordering::Equal => k += 1,
            ord => {
                if ord == Ordering::Greater {
                    i += k + 1;
                } else {
                    j += k + 1;
                }
                if i == j {
                    j += 1;
                }
                k = 0;
            }
        }
    }
    i.min(j)
}

/// Split `w = conjugator · core · conjugator⁻¹` with `core` cyclically
/// reduced and in canonical rotation.
pub fn cyclic_reduce(w: &Word) -> (CyclicWord, Word) {
    let letters = &w.letters;
    let (mut lo, mut hi) = (0, letters.len());
    while hi - lo >= 2 && letters[lo] == letters[hi - 1].inverse() {
        lo += 1;
        hi -= 1;
    }
    let core = &letters[lo..hi];
    let r = least_rotation(core);
    let mut rotated = Vec::with_capacity(core.len());
    rotated.extend_from_slice(&core[r..]);
    rotated.extend_from_slice(&core[..r]);
    // core = p·q and rotated = q·p, so core = p · rotated · p⁻¹.
    let mut conj: Vec<Letter> = letters[..lo].to_vec();
    for &l in &core[..r] {
        push_reduced(&mut conj, l);
    }
    (
        CyclicWord {
            alphabet: w.alphabet,
            letters: rotated,
        },
        Word {
            alphabet: w.alphabet,
            letters: conj,
        },
    )
}

/// Iterate all reduced words of length exactly `len`, in shortlex order.
pub fn words_of_length(alphabet: Alphabet, len: usize) -> Vec<Word> {
    let mut out = vec![Vec::<Letter>::new()];
    for _ in 0..len {
        let mut next = Vec::with_capacity(out.len() * (2 * alphabet.rank()));
        for w in &out {
            for l in alphabet.letters() {
                if w.last() == Some(&l.inverse()) {
                    continue;
                }
                let mut v = w.clone();
                v.push(l);
                next.push(v);
            }
        }
        out = next;
    }
    out.into_iter()
        .map(|letters| Word { alphabet, letters })
        .collect()
}

/// All reduced words of length at most `max_len`, shortest first.
pub fn words_up_to(alphabet: Alphabet, max_len: usize) -> Vec<Word> {
    (0..=max_len)
        .flat_map(|n| words_of_length(alphabet, n))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ab() -> Alphabet {
        Alphabet::new(2).unwrap()
    }

    fn w(s: &str) -> Word {
        Word::parse(ab(), s).unwrap()
    }

    #[test]
    fn reduce_examples() {
        assert_eq!(w("aAb"), w("b"));
        assert_eq!(w("1"), Word::identity(ab()));
        assert_eq!(w("abBa"), w("aa"));
        assert_eq!(w("aAb").to_string(), "b");
        assert_eq!(Word::identity(ab()).to_string(), "1");
    }

    #[test]
    fn reduce_rejects_out_of_range() {
        let err = Word::from_signed(ab(), &[1, 3]).unwrap_err();
        assert_eq!(err, Error::IndexOutOfRange { index: 3, rank: 2 });
        assert!(Word::parse(ab(), "ac").is_err());
    }

    #[test]
    fn letter_order() {
        let order: Vec<char> = Alphabet::new(2).unwrap().letters().map(|l| l.to_char()).collect();
        assert_eq!(order, vec!['a', 'A', 'b', 'B']);
    }

    #[test]
    fn cyclic_reduce_examples() {
        let (core, conj) = cyclic_reduce(&w("baB"));
        assert_eq!(core.as_word(), w("a"));
        assert_eq!(conj, w("b"));

        let (core, conj) = cyclic_reduce(&w("ab"));
        assert_eq!(core.as_word(), w("ab"));
        assert!(conj.is_empty());

        let (core, conj) = cyclic_reduce(&w("abA"));
        assert_eq!(core.as_word(), w("b"));
        assert_eq!(conj, w("a"));
    }

    #[test]
    fn cyclic_reduce_empty() {
        let (core, conj) = cyclic_reduce(&Word::identity(ab()));
        assert!(core.is_empty());
        assert!(conj.is_empty());
    }

    #[test]
    fn canonical_rotation_picks_least() {
        let (core, conj) = cyclic_reduce(&w("ba"));
        assert_eq!(core.as_word(), w("ab"));
        assert_eq!(core.as_word().conjugate_by(&conj), w("ba"));
    }

    #[test]
    fn apply_endo_examples() {
        let phi = [w("ab"), w("b")];
        assert_eq!(apply_endo(&phi, &w("aB")).unwrap(), w("a"));
        let id = [w("a"), w("b")];
        assert_eq!(apply_endo(&id, &w("abAAB")).unwrap(), w("abAAB"));
        let psi = [w("ab"), w("a")];
        assert_eq!(apply_endo(&psi, &w("ba")).unwrap(), w("aab"));
    }

    #[test]
    fn apply_endo_mismatch() {
        let c3 = Alphabet::new(3).unwrap();
        let images = [w("a"), Word::generator(c3, 2)];
        assert!(matches!(
            apply_endo(&images, &w("a")),
            Err(Error::AlphabetMismatch { .. })
        ));
        assert!(matches!(
            apply_endo(&[w("a")], &w("a")),
            Err(Error::ImageCount { .. })
        ));
    }

    #[test]
    fn bounded_substitution_aborts() {
        let images = [w("aaaa"), w("b")];
        assert!(w("aaa").substitute_bounded(&images, 11).unwrap().is_none());
        assert_eq!(w("aaa").substitute_bounded(&images, 12).unwrap().unwrap().len(), 12);
    }

    #[test]
    fn word_counts() {
        // 1 + 4 + 12 + 36
        assert_eq!(words_up_to(ab(), 3).len(), 53);
    }
}
