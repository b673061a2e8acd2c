//! Abelianized actions over `Z` and `Z/3Z`, membership in the level-3
//! congruence subgroups, periodic and fixed sublattices, and the exhaustive
//! desk-scale scans over `GL_n(Z)`.

use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aut::FreeAutomorphism;
use crate::error::{parse_err, Error, Result};
use crate::poly;

/// A square integer matrix, row-major.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntegerMatrix {
    n: usize,
    entries: Vec<i64>,
}

impl IntegerMatrix {
    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch);
        }
        Ok(IntegerMatrix {
            n,
            entries: rows.iter().flatten().copied().collect(),
        })
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1;
        }
        IntegerMatrix { n, entries }
    }

    /// Block-diagonal sum.
    pub fn block_diag(blocks: &[IntegerMatrix]) -> Self {
        let n = blocks.iter().map(|b| b.n).sum();
        let mut out = IntegerMatrix {
            n,
            entries: vec![0; n * n],
        };
        let mut off = 0;
        for b in blocks {
            for i in 0..b.n {
                for j in 0..b.n {
                    out.entries[(off + i) * n + off + j] = b.get(i, j);
                }
            }
            off += b.n;
        }
        out
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[i * self.n + j]
    }

    pub fn rows(&self) -> Vec<Vec<i64>> {
        self.entries.chunks(self.n.max(1)).map(|r| r.to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<i64> {
        (0..self.n).map(|i| self.get(i, j)).collect()
    }

    pub fn is_identity(&self) -> bool {
        *self == IntegerMatrix::identity(self.n)
    }

    pub fn mul(&self, other: &IntegerMatrix) -> Result<IntegerMatrix> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch);
        }
        let n = self.n;
        let mut entries = vec![0i64; n * n];
        for i in 0..n {
            for j in 0..n {
                let mut acc: i128 = 0;
                for k in 0..n {
                    acc += self.get(i, k) as i128 * other.get(k, j) as i128;
                }
                entries[i * n + j] = i64::try_from(acc).map_err(|_| Error::Overflow)?;
            }
        }
        Ok(IntegerMatrix { n, entries })
    }

    pub fn pow(&self, k: u32) -> Result<IntegerMatrix> {
        let mut out = IntegerMatrix::identity(self.n);
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                out = out.mul(&base)?;
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(out)
    }

    pub fn minus_identity(&self) -> IntegerMatrix {
        let mut m = self.clone();
        for i in 0..self.n {
            m.entries[i * self.n + i] -= 1;
        }
        m
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> i128 {
        let n = self.n;
        if n == 0 {
            return 1;
        }
        let mut a: Vec<Vec<i128>> = self.rows().into_iter().map(|r| r.into_iter().map(i128::from).collect()).collect();
        let mut sign = 1i128;
        let mut prev = 1i128;
        for k in 0..n - 1 {
            if a[k][k] == 0 {
                match (k + 1..n).find(|&i| a[i][k] != 0) {
                    Some(i) => {
                        a.swap(i, k);
                        sign = -sign;
                    }
                    None => return 0,
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
                }
            }
            prev = a[k][k];
        }
        sign * a[n - 1][n - 1]
    }

    pub fn check_invertible(&self) -> Result<()> {
        let det = self.det();
        if det.abs() != 1 {
            return Err(Error::NotInvertible { det });
        }
        Ok(())
    }

    /// Inverse of a unimodular matrix (adjugate times determinant).
    pub fn inverse(&self) -> Result<IntegerMatrix> {
        self.check_invertible()?;
        let det = self.det() as i64;
        let n = self.n;
        let mut entries = vec![0; n * n];
        for i in 0..n {
            for j in 0..n {
                let minor = self.minor(j, i);
                let sign = if (i + j) % 2 == 0 { 1 } else { -1 };
                entries[i * n + j] = sign * minor.det() as i64 * det;
            }
        }
        Ok(IntegerMatrix { n, entries })
    }

    fn minor(&self, row: usize, col: usize) -> IntegerMatrix {
        let rows: Vec<Vec<i64>> = (0..self.n)
            .filter(|&i| i != row)
            .map(|i| (0..self.n).filter(|&j| j != col).map(|j| self.get(i, j)).collect())
            .collect();
        IntegerMatrix {
            n: self.n - 1,
            entries: rows.into_iter().flatten().collect(),
        }
    }

    pub fn mod3(&self) -> Mod3Matrix {
        Mod3Matrix {
            n: self.n,
            entries: self.entries.iter().map(|&x| x.rem_euclid(3) as u8).collect(),
        }
    }

    pub fn apply(&self, v: &[i64]) -> Vec<i64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * v[j]).sum())
            .collect()
    }

    /// Parse rows of whitespace-separated integers, one row per line.
    pub fn parse(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row: std::result::Result<Vec<i64>, _> = line.split_whitespace().map(str::parse).collect();
            rows.push(row.map_err(|e| parse_err(n + 1, e.to_string()))?);
        }
        IntegerMatrix::from_rows(&rows)
    }
}

impl fmt::Display for IntegerMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.rows() {
            let cells: Vec<String> = row.iter().map(i64::to_string).collect();
            writeln!(f, "{}", cells.join(" "))?;
        }
        Ok(())
    }
}

impl fmt::Debug for IntegerMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.rows())
    }
}

/// A square matrix over `Z/3Z`.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mod3Matrix {
    n: usize,
    entries: Vec<u8>,
}

impl Mod3Matrix {
    pub fn identity(n: usize) -> Self {
        IntegerMatrix::identity(n).mod3()
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        Ok(IntegerMatrix::from_rows(rows)?.mod3())
    }

    pub fn zero(n: usize) -> Self {
        Mod3Matrix {
            n,
            entries: vec![0; n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.entries[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        self.entries[i * self.n + j] = v.rem_euclid(3) as u8;
    }

    pub fn is_identity(&self) -> bool {
        *self == Mod3Matrix::identity(self.n)
    }

    pub fn mul(&self, other: &Mod3Matrix) -> Result<Mod3Matrix> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch);
        }
        let n = self.n;
        let mut out = Mod3Matrix::zero(n);
        for i in 0..n {
            for j in 0..n {
                let s: u32 = (0..n).map(|k| self.get(i, k) as u32 * other.get(k, j) as u32).sum();
                out.entries[i * n + j] = (s % 3) as u8;
            }
        }
        Ok(out)
    }
}

impl fmt::Debug for Mod3Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<&[u8]> = self.entries.chunks(self.n.max(1)).collect();
        write!(f, "{rows:?}")
    }
}

/// A subspace of `(Z/3Z)^n`, stored as a reduced row-echelon basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mod3Subspace {
    ambient: usize,
    basis: Vec<Vec<u8>>,
}

impl Mod3Subspace {
    pub fn span(ambient: usize, vectors: &[Vec<i64>]) -> Self {
        let mut rows: Vec<Vec<u8>> = vectors
            .iter()
            .map(|v| v.iter().map(|x| x.rem_euclid(3) as u8).collect())
            .collect();
        let mut basis = Vec::new();
        let mut r = 0;
        for col in 0..ambient {
            let Some(p) = (r..rows.len()).find(|&i| rows[i][col] != 0) else {
                continue;
            };
            rows.swap(r, p);
            // 1⁻¹ = 1 and 2⁻¹ = 2 mod 3.
            let inv = rows[r][col];
            for x in rows[r].iter_mut() {
                *x = (*x * inv) % 3;
            }
            for i in 0..rows.len() {
                if i != r && rows[i][col] != 0 {
                    let f = rows[i][col];
                    for j in 0..ambient {
                        rows[i][j] = (rows[i][j] + 3 * 3 - f * rows[r][j]) % 3;
                    }
                }
            }
            r += 1;
        }
        basis.extend(rows.into_iter().take(r));
        Mod3Subspace { ambient, basis }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn basis(&self) -> &[Vec<u8>] {
        &self.basis
    }

    /// Dimension of the sum with `other`.
    pub fn sum(&self, other: &Mod3Subspace) -> Mod3Subspace {
        let vs: Vec<Vec<i64>> = self
            .basis
            .iter()
            .chain(&other.basis)
            .map(|v| v.iter().map(|&x| x as i64).collect())
            .collect();
        Mod3Subspace::span(self.ambient, &vs)
    }

    /// Extend the basis by standard vectors to a basis of the whole space;
    /// returns the complementary vectors.
    pub fn complement(&self) -> Vec<Vec<u8>> {
        let mut current = self.clone();
        let mut extra = Vec::new();
        for i in 0..self.ambient {
            let mut e = vec![0i64; self.ambient];
            e[i] = 1;
            let next = current.sum(&Mod3Subspace::span(self.ambient, &[e.clone()]));
            if next.dim() > current.dim() {
                extra.push(e.iter().map(|&x| x as u8).collect());
                current = next;
            }
        }
        extra
    }
}

// ---------------------------------------------------------------------------
// Integer lattices

/// Row-reduce `rows` by unimodular row operations into echelon form,
/// applying the same operations to `aux`. Returns the pivot columns.
fn echelonize(rows: &mut [Vec<i128>], aux: &mut [Vec<i128>]) -> Result<Vec<usize>> {
    let m = rows.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..m {
        if r == rows.len() {
            break;
        }
        loop {
            let Some(p) = (r..rows.len())
                .filter(|&i| rows[i][col] != 0)
                .min_by_key(|&i| rows[i][col].abs())
            else {
                break;
            };
            rows.swap(r, p);
            aux.swap(r, p);
            let mut done = true;
            for i in r + 1..rows.len() {
                if rows[i][col] != 0 {
                    let q = rows[i][col].div_euclid(rows[r][col]);
                    for j in 0..m {
                        rows[i][j] = rows[i][j].checked_sub(q.checked_mul(rows[r][j]).ok_or(Error::Overflow)?).ok_or(Error::Overflow)?;
                    }
                    for j in 0..aux[i].len() {
                        aux[i][j] = aux[i][j].checked_sub(q.checked_mul(aux[r][j]).ok_or(Error::Overflow)?).ok_or(Error::Overflow)?;
                    }
                    if rows[i][col] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if rows[r][col] != 0 {
            pivots.push(col);
            r += 1;
        }
    }
    Ok(pivots)
}

/// Basis of `{v ∈ Z^n : A v = 0}` for `A` given by its rows (each of
/// length `n`). The returned lattice is saturated.
pub fn integer_kernel(n: usize, a_rows: &[Vec<i128>]) -> Result<Vec<Vec<i128>>> {
    // Transpose: one row per coordinate of v.
    let mut t: Vec<Vec<i128>> = (0..n).map(|j| a_rows.iter().map(|r| r[j]).collect()).collect();
    let mut u: Vec<Vec<i128>> = (0..n)
        .map(|i| (0..n).map(|j| i128::from(i == j)).collect())
        .collect();
    if a_rows.is_empty() {
        return Ok(u);
    }
    let pivots = echelonize(&mut t, &mut u)?;
    Ok(u.into_iter().skip(pivots.len()).collect())
}

/// Canonical row Hermite normal form of the lattice spanned by `rows`.
pub fn hermite_normal_form(n: usize, rows: &[Vec<i128>]) -> Result<Vec<Vec<i128>>> {
    let mut h: Vec<Vec<i128>> = rows.to_vec();
    let mut none: Vec<Vec<i128>> = vec![Vec::new(); h.len()];
    let pivots = echelonize(&mut h, &mut none)?;
    h.truncate(pivots.len());
    for (r, &c) in pivots.iter().enumerate() {
        if h[r][c] < 0 {
            for x in h[r].iter_mut() {
                *x = -*x;
            }
        }
        for i in 0..r {
            let q = h[i][c].div_euclid(h[r][c]);
            if q != 0 {
                for j in 0..n {
                    h[i][j] -= q * h[r][j];
                }
            }
        }
    }
    Ok(h)
}

/// A sublattice of `Z^n`, stored in Hermite normal form so that equality of
/// values is equality of lattices.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sublattice {
    ambient: usize,
    basis: Vec<Vec<i64>>,
}

impl Sublattice {
    pub fn from_generators(ambient: usize, gens: &[Vec<i64>]) -> Result<Self> {
        let rows: Vec<Vec<i128>> = gens.iter().map(|v| v.iter().map(|&x| x as i128).collect()).collect();
        Self::from_wide(ambient, &rows)
    }

    fn from_wide(ambient: usize, rows: &[Vec<i128>]) -> Result<Self> {
        if rows.iter().any(|r| r.len() != ambient) {
            return Err(Error::DimensionMismatch);
        }
        let h = hermite_normal_form(ambient, rows)?;
        let basis = h
            .into_iter()
            .map(|r| r.into_iter().map(|x| i64::try_from(x).map_err(|_| Error::Overflow)).collect())
            .collect::<Result<_>>()?;
        Ok(Sublattice { ambient, basis })
    }

    pub fn full(ambient: usize) -> Self {
        Sublattice {
            ambient,
            basis: IntegerMatrix::identity(ambient).rows(),
        }
    }

    pub fn zero(ambient: usize) -> Self {
        Sublattice {
            ambient,
            basis: Vec::new(),
        }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Vec<i64>] {
        &self.basis
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        let mut v: Vec<i128> = v.iter().map(|&x| x as i128).collect();
        for row in &self.basis {
            let c = row.iter().position(|&x| x != 0).expect("HNF rows are nonzero");
            let p = row[c] as i128;
            if v[c] % p != 0 {
                return false;
            }
            let q = v[c] / p;
            for j in 0..self.ambient {
                v[j] -= q * row[j] as i128;
            }
        }
        v.iter().all(|&x| x == 0)
    }

    pub fn is_subset_of(&self, other: &Sublattice) -> bool {
        self.basis.iter().all(|v| other.contains(v))
    }

    /// `(L ⊗ Q) ∩ Z^n`.
    pub fn saturation(&self) -> Result<Sublattice> {
        let rows: Vec<Vec<i128>> = self.basis.iter().map(|v| v.iter().map(|&x| x as i128).collect()).collect();
        let perp = integer_kernel(self.ambient, &rows)?;
        let sat = integer_kernel(self.ambient, &perp)?;
        Sublattice::from_wide(self.ambient, &sat)
    }

    /// A direct summand of `Z^n` iff it equals its saturation.
    pub fn is_saturated(&self) -> Result<bool> {
        Ok(self.saturation()? == *self)
    }

    pub fn is_invariant_under(&self, m: &IntegerMatrix) -> bool {
        self.basis.iter().all(|v| self.contains(&m.apply(v)))
    }
}

impl fmt::Debug for Sublattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Sublattice{:?}", self.basis)
    }
}

fn kernel_lattice(m: &IntegerMatrix) -> Result<Sublattice> {
    let rows: Vec<Vec<i128>> = m.rows().into_iter().map(|r| r.into_iter().map(i128::from).collect()).collect();
    Sublattice::from_wide(m.dim(), &integer_kernel(m.dim(), &rows)?)
}

// ---------------------------------------------------------------------------
// Operations

/// Column `i` is the exponent vector of the image of `x_i`.
pub fn abelianization(phi: &FreeAutomorphism) -> IntegerMatrix {
    let n = phi.rank();
    let mut entries = vec![0; n * n];
    for (j, img) in phi.images().iter().enumerate() {
        for (i, e) in img.exponent_vector().into_iter().enumerate() {
            entries[i * n + j] = e;
        }
    }
    IntegerMatrix { n, entries }
}

/// Membership in `IA(F_N, 3)`: trivial action on `H_1(F_N, Z/3Z)`.
pub fn in_ia3(phi: &FreeAutomorphism) -> bool {
    abelianization(phi).mod3().is_identity()
}

/// Saturated kernel of `M − I`.
pub fn fix_subgroup(m: &IntegerMatrix) -> Result<Sublattice> {
    m.check_invertible()?;
    kernel_lattice(&m.minus_identity())
}

fn totient(k: u64) -> u64 {
    let (mut n, mut out, mut p) = (k, k, 2);
    while p * p <= n {
        if n % p == 0 {
            while n % p == 0 {
                n /= p;
            }
            out -= out / p;
        }
        p += 1;
    }
    if n > 1 {
        out -= out / n;
    }
    out
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `lcm{k ≥ 1 : φ(k) ≤ n}`. The order of every finite-order element of
/// `GL_n(Z)` divides this number. Uses `φ(k) ≥ √(k/2)`, so `k ≤ 2n²`.
pub fn torsion_exponent(n: usize) -> u64 {
    let n = n as u64;
    (1..=2 * n * n + 2)
        .filter(|&k| totient(k) <= n)
        .fold(1, |acc, k| acc / gcd(acc, k) * k)
}

fn wide_rows(m: &IntegerMatrix) -> Vec<Vec<i128>> {
    m.rows().into_iter().map(|r| r.into_iter().map(i128::from).collect()).collect()
}

fn divisors(l: u64) -> impl Iterator<Item = u64> {
    (1..=l).filter(move |d| l % d == 0)
}

/// `⋃_k ker(M^k − I) = ker(M^L − I)`. Computed as `ker g(M)` with
/// `g = gcd(x^L − 1, χ_M)`, the product of the cyclotomic factors
/// `Φ_d (d | L)` of the characteristic polynomial; this avoids forming
/// `M^L`, whose entries explode for hyperbolic blocks.
pub fn per_subgroup(m: &IntegerMatrix) -> Result<Sublattice> {
    m.check_invertible()?;
    let a = wide_rows(m);
    let chi = poly::char_poly(&a)?;
    let mut g: Vec<i128> = vec![1];
    for d in divisors(torsion_exponent(m.dim())) {
        let phi = poly::cyclotomic(d);
        if poly::div_exact(&chi, &phi).is_some() {
            g = poly::mul(&g, &phi);
        }
    }
    let gm = poly::eval_matrix(&g, &a)?;
    Sublattice::from_wide(m.dim(), &integer_kernel(m.dim(), &gm)?)
}

/// Least `k ≤ L` with `M^k = I`, or `None` (then `M` has infinite order).
pub fn finite_order(m: &IntegerMatrix) -> Result<Option<u64>> {
    m.check_invertible()?;
    let l = torsion_exponent(m.dim());
    let mut p = m.clone();
    for k in 1..=l {
        if p.is_identity() {
            return Ok(Some(k));
        }
        p = match p.mul(m) {
            Ok(next) => next,
            Err(Error::Overflow) => {
                // A finite-order matrix has a characteristic polynomial made
                // of cyclotomic factors; anything else has infinite order.
                let mut chi = poly::char_poly(&wide_rows(m))?;
                for d in divisors(l) {
                    let phi = poly::cyclotomic(d);
                    while let Some(q) = poly::div_exact(&chi, &phi) {
                        chi = q;
                    }
                }
                if chi.len() == 1 {
                    return Err(Error::Overflow);
                }
                return Ok(None);
            }
            Err(e) => return Err(e),
        };
    }
    Ok(None)
}

/// Invertible `n × n` integer matrices with entries in `[−bound, bound]`
/// that are congruent to `I` modulo `level`.
pub fn congruence_matrices(n: usize, bound: i64, level: i64) -> Vec<IntegerMatrix> {
    let level = level.max(1);
    let allowed = |diag: bool| -> Vec<i64> {
        let target = if diag { 1 } else { 0 };
        (-bound..=bound).filter(|x| (x - target).rem_euclid(level) == 0).collect()
    };
    let choices: Vec<Vec<i64>> = (0..n * n).map(|k| allowed(k / n == k % n)).collect();
    if choices.iter().any(Vec::is_empty) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut idx = vec![0usize; n * n];
    loop {
        let m = IntegerMatrix {
            n,
            entries: idx.iter().zip(&choices).map(|(&i, c)| c[i]).collect(),
        };
        if m.det().abs() == 1 {
            out.push(m);
        }
        let mut k = 0;
        while k < n * n {
            idx[k] += 1;
            if idx[k] < choices[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
        if k == n * n {
            break;
        }
    }
    out
}

/// Result of an exhaustive scan; serialized as
/// `{enumerated, violations, elapsed, ...}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScanReport {
    pub n: usize,
    pub bound: i64,
    pub level: i64,
    pub enumerated: usize,
    pub violations: usize,
    /// Up to ten offending matrices.
    pub witnesses: Vec<Vec<Vec<i64>>>,
    /// Wall-clock seconds.
    pub elapsed: f64,
}

fn desk_scale(n: usize, bound: i64, max_n: usize, max_bound: i64) -> Result<()> {
    if n == 0 || n > max_n || bound < 0 || bound > max_bound {
        return Err(Error::DeskScale(format!(
            "n = {n}, bound = {bound} (limits n ≤ {max_n}, bound ≤ {max_bound})"
        )));
    }
    Ok(())
}

fn scan(
    n: usize,
    bound: i64,
    level: i64,
    violates: impl Fn(&IntegerMatrix) -> Result<bool> + Sync,
) -> Result<ScanReport> {
    let start = Instant::now();
    let mats = congruence_matrices(n, bound, level);
    let flags: Vec<bool> = mats.par_iter().map(&violates).collect::<Result<_>>()?;
    let bad: Vec<&IntegerMatrix> = mats.iter().zip(&flags).filter(|(_, &f)| f).map(|(m, _)| m).collect();
    Ok(ScanReport {
        n,
        bound,
        level,
        enumerated: mats.len(),
        violations: bad.len(),
        witnesses: bad.iter().take(10).map(|m| m.rows()).collect(),
        elapsed: start.elapsed().as_secs_f64(),
    })
}

/// Finite-order non-identity matrices in the level-`level` congruence set.
pub fn congruence_torsion_scan(n: usize, bound: i64, level: i64) -> Result<ScanReport> {
    desk_scale(n, bound, 3, 8)?;
    scan(n, bound, level, |m| Ok(!m.is_identity() && finite_order(m)?.is_some()))
}

/// Torsion scan at level 3; zero violations is Minkowski's theorem.
pub fn minkowski_scan(n: usize, bound: i64) -> Result<ScanReport> {
    congruence_torsion_scan(n, bound, 3)
}

/// `Per(M) ≠ Fix(M)` over the level-`level` congruence set.
pub fn per_fix_scan(n: usize, bound: i64, level: i64) -> Result<ScanReport> {
    desk_scale(n, bound, 3, 6)?;
    scan(n, bound, level, |m| Ok(per_subgroup(m)? != fix_subgroup(m)?))
}

/// `Per = Fix` for every level-3 congruence matrix (abelian instance).
pub fn abelian_standing_assumptions_check(n: usize, bound: i64) -> Result<ScanReport> {
    per_fix_scan(n, bound, 3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::{Alphabet, Word};

    fn mat(rows: &[&[i64]]) -> IntegerMatrix {
        IntegerMatrix::from_rows(&rows.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn span(n: usize, v: &[&[i64]]) -> Sublattice {
        Sublattice::from_generators(n, &v.iter().map(|r| r.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn abelianization_examples() {
        let f2 = Alphabet::new(2).unwrap();
        assert!(abelianization(&FreeAutomorphism::identity(f2)).is_identity());
        let t = FreeAutomorphism::transvection(f2, 0, 1);
        assert_eq!(abelianization(&t), mat(&[&[1, 0], &[1, 1]]));
        let c = FreeAutomorphism::partial_conjugation(f2, 0, 1);
        assert!(abelianization(&c).is_identity());
    }

    #[test]
    fn ia3_examples() {
        let f2 = Alphabet::new(2).unwrap();
        assert!(in_ia3(&FreeAutomorphism::cube(f2, 0, 1)));
        assert!(!in_ia3(&FreeAutomorphism::transvection(f2, 0, 1)));
    }

    #[test]
    fn inner_maps_abelianize_trivially() {
        let f2 = Alphabet::new(2).unwrap();
        let w = Word::parse(f2, "abAAB").unwrap();
        assert!(abelianization(&FreeAutomorphism::inner(&w)).is_identity());
    }

    #[test]
    fn fix_examples() {
        assert_eq!(fix_subgroup(&IntegerMatrix::identity(2)).unwrap(), Sublattice::full(2));
        assert_eq!(fix_subgroup(&mat(&[&[1, 3], &[0, 1]])).unwrap(), span(2, &[&[1, 0]]));
        assert_eq!(fix_subgroup(&mat(&[&[0, -1], &[1, 0]])).unwrap(), Sublattice::zero(2));
        assert!(matches!(
            fix_subgroup(&mat(&[&[2, 0], &[0, 1]])),
            Err(Error::NotInvertible { det: 2 })
        ));
    }

    #[test]
    fn per_examples() {
        let rot = mat(&[&[0, -1], &[1, 0]]);
        assert_eq!(per_subgroup(&rot).unwrap(), Sublattice::full(2));
        assert_eq!(per_subgroup(&mat(&[&[1, 3], &[0, 1]])).unwrap(), span(2, &[&[1, 0]]));
        let m = IntegerMatrix::block_diag(&[rot, mat(&[&[2, 1], &[1, 1]])]);
        assert_eq!(per_subgroup(&m).unwrap(), span(4, &[&[1, 0, 0, 0], &[0, 1, 0, 0]]));
    }

    #[test]
    fn torsion_exponents() {
        assert_eq!(torsion_exponent(1), 2);
        assert_eq!(torsion_exponent(2), 12);
        assert_eq!(torsion_exponent(3), 12);
        // {1,2,3,4,5,6,8,10,12}: GL_4(Z) contains the companion matrix of
        // x⁴ + 1, of order 8.
        assert_eq!(torsion_exponent(4), 120);
    }

    #[test]
    fn order_eight_in_gl4() {
        let c = mat(&[&[0, 0, 0, -1], &[1, 0, 0, 0], &[0, 1, 0, 0], &[0, 0, 1, 0]]);
        assert_eq!(finite_order(&c).unwrap(), Some(8));
    }

    #[test]
    fn finite_order_examples() {
        assert_eq!(finite_order(&IntegerMatrix::identity(2)).unwrap(), Some(1));
        assert_eq!(finite_order(&mat(&[&[0, -1], &[1, 0]])).unwrap(), Some(4));
        assert_eq!(finite_order(&mat(&[&[1, 1], &[0, 1]])).unwrap(), None);
    }

    #[test]
    fn minkowski_small() {
        let r = minkowski_scan(1, 5).unwrap();
        assert_eq!((r.enumerated, r.violations), (1, 0));
        let ctrl = congruence_torsion_scan(2, 2, 1).unwrap();
        assert!(ctrl.violations > 0);
        assert!(ctrl.witnesses.contains(&vec![vec![-1, 0], vec![0, -1]]));
        assert!(minkowski_scan(4, 1).is_err());
    }

    #[test]
    fn abelian_control() {
        let rot = mat(&[&[0, -1], &[1, 0]]);
        assert_ne!(per_subgroup(&rot).unwrap(), fix_subgroup(&rot).unwrap());
        let id = IntegerMatrix::identity(3);
        assert_eq!(per_subgroup(&id).unwrap(), Sublattice::full(3));
        assert_eq!(fix_subgroup(&id).unwrap(), Sublattice::full(3));
    }

    #[test]
    fn saturation() {
        let l = span(2, &[&[2, 0]]);
        assert!(!l.is_saturated().unwrap());
        assert_eq!(l.saturation().unwrap(), span(2, &[&[1, 0]]));
        assert!(span(3, &[&[1, 1, 0], &[0, 2, 2]]).saturation().unwrap().contains(&[0, 1, 1]));
    }

    #[test]
    fn inverse_and_det() {
        let m = mat(&[&[2, 1], &[1, 1]]);
        assert_eq!(m.det(), 1);
        assert!(m.mul(&m.inverse().unwrap()).unwrap().is_identity());
    }

    #[test]
    fn mod3_subspace() {
        let s = Mod3Subspace::span(3, &[vec![1, 1, 0], vec![2, 2, 0], vec![0, 0, 3]]);
        assert_eq!(s.dim(), 1);
        assert_eq!(s.complement().len(), 2);
    }
}
