//! Integer polynomials, coefficients in ascending degree order.

use crate::error::{Error, Result};

pub(crate) type Poly = Vec<i128>;

fn trim(mut p: Poly) -> Poly {
    while p.len() > 1 && *p.last().unwrap() == 0 {
        p.pop();
    }
    p
}

/// Characteristic polynomial `det(xI − M)` by Faddeev–LeVerrier; every
/// division is exact over `Z`.
pub(crate) fn char_poly(m: &[Vec<i128>]) -> Result<Poly> {
    let n = m.len();
    let mut coeffs = vec![0i128; n + 1];
    coeffs[n] = 1;
    let mut mk = vec![vec![0i128; n]; n];
    for k in 1..=n {
        // mk ← M·(mk + c_{n−k+1} I)
        let mut prev = mk.clone();
        for i in 0..n {
            prev[i][i] = prev[i][i].checked_add(coeffs[n - k + 1]).ok_or(Error::Overflow)?;
        }
        for i in 0..n {
            for j in 0..n {
                let mut acc: i128 = 0;
                for l in 0..n {
                    acc = acc
                        .checked_add(m[i][l].checked_mul(prev[l][j]).ok_or(Error::Overflow)?)
                        .ok_or(Error::Overflow)?;
                }
                mk[i][j] = acc;
            }
        }
        let tr: i128 = (0..n).map(|i| mk[i][i]).sum();
        coeffs[n - k] = -tr / k as i128;
    }
    Ok(coeffs)
}

/// Exact division; `None` when `d` does not divide `p` over `Z`.
pub(crate) fn div_exact(p: &[i128], d: &[i128]) -> Option<Poly> {
    let d = trim(d.to_vec());
    let lead = *d.last()?;
    let mut r = trim(p.to_vec());
    if r.len() < d.len() {
        return if r.iter().all(|&c| c == 0) { Some(vec![0]) } else { None };
    }
    let mut q = vec![0i128; r.len() - d.len() + 1];
    for i in (0..q.len()).rev() {
        let c = r[i + d.len() - 1];
        if c % lead != 0 {
            return None;
        }
        let f = c / lead;
        q[i] = f;
        for (j, &dj) in d.iter().enumerate() {
            r[i + j] -= f * dj;
        }
    }
    r.iter().all(|&c| c == 0).then_some(trim(q))
}

pub(crate) fn mul(a: &[i128], b: &[i128]) -> Poly {
    let mut out = vec![0i128; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    trim(out)
}

/// The `d`-th cyclotomic polynomial.
pub(crate) fn cyclotomic(d: u64) -> Poly {
    let mut p: Poly = vec![0; d as usize + 1];
    p[0] = -1;
    p[d as usize] = 1;
    for e in 1..d {
        if d % e == 0 {
            p = div_exact(&p, &cyclotomic(e)).expect("cyclotomic factor");
        }
    }
    p
}

/// `p(M)` by Horner's rule.
pub(crate) fn eval_matrix(p: &[i128], m: &[Vec<i128>]) -> Result<Vec<Vec<i128>>> {
    let n = m.len();
    let mut acc = vec![vec![0i128; n]; n];
    for &c in p.iter().rev() {
        let mut next = vec![vec![0i128; n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut s: i128 = 0;
                for l in 0..n {
                    s = s
                        .checked_add(acc[i][l].checked_mul(m[l][j]).ok_or(Error::Overflow)?)
                        .ok_or(Error::Overflow)?;
                }
                next[i][j] = s;
            }
            next[i][i] = next[i][i].checked_add(c).ok_or(Error::Overflow)?;
        }
        acc = next;
    }
    Ok(acc)
}

/// Value at a float point, for sign-change root checks.
pub(crate) fn eval_f64(p: &[i128], x: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, &c| acc * x + c as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cyclotomics() {
        assert_eq!(cyclotomic(1), vec![-1, 1]);
        assert_eq!(cyclotomic(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic(8), vec![1, 0, 0, 0, 1]);
    }

    #[test]
    fn char_poly_fibonacci() {
        assert_eq!(char_poly(&[vec![1, 1], vec![1, 0]]).unwrap(), vec![-1, -1, 1]);
        assert_eq!(char_poly(&[vec![0, -1], vec![1, 0]]).unwrap(), vec![1, 0, 1]);
    }

    #[test]
    fn division() {
        let p = mul(&cyclotomic(3), &[2, 1]);
        assert_eq!(div_exact(&p, &cyclotomic(3)).unwrap(), vec![2, 1]);
        assert!(div_exact(&p, &cyclotomic(4)).is_none());
    }
}
