//! Small dense exact linear algebra over the rationals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rational = BigRational;
pub type Matrix = Vec<Vec<Rational>>;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { rat(1) } else { rat(0) }).collect())
        .collect()
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let (n, m, k) = (a.len(), b.len(), b.first().map_or(0, |r| r.len()));
    (0..n)
        .map(|i| {
            (0..k)
                .map(|j| {
                    let mut s = rat(0);
                    for l in 0..m {
                        if !a[i][l].is_zero() && !b[l][j].is_zero() {
                            s += &a[i][l] * &b[l][j];
                        }
                    }
                    s
                })
                .collect()
        })
        .collect()
}

pub fn mat_vec(a: &Matrix, x: &[Rational]) -> Vec<Rational> {
    a.iter()
        .map(|row| row.iter().zip(x).map(|(r, v)| r * v).sum())
        .collect()
}

/// Row vector times matrix.
pub fn vec_mat(x: &[Rational], a: &Matrix) -> Vec<Rational> {
    let k = a.first().map_or(0, |r| r.len());
    (0..k)
        .map(|j| x.iter().zip(a).map(|(v, row)| v * &row[j]).sum())
        .collect()
}

/// Reduced row echelon form in place; returns pivot columns.
pub fn rref(m: &mut Matrix) -> Vec<usize> {
    let rows = m.len();
    let cols = m.first().map_or(0, |r| r.len());
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..cols {
                    if !m[r][j].is_zero() {
                        let sub = &f * &m[r][j];
                        m[i][j] -= sub;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &Matrix) -> usize {
    let mut m = m.clone();
    rref(&mut m).len()
}

/// Basis of `{x : m x = 0}`.
pub fn nullspace(m: &Matrix, cols: usize) -> Vec<Vec<Rational>> {
    let mut r = m.clone();
    let pivots = rref(&mut r);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut x = vec![rat(0); cols];
            x[f] = rat(1);
            for (row, &pc) in pivots.iter().enumerate() {
                x[pc] = -r[row][f].clone();
            }
            x
        })
        .collect()
}

/// Solves `m x = rhs`; returns a particular solution and a nullspace basis,
/// or `None` if inconsistent.
pub fn solve_affine(m: &Matrix, rhs: &[Rational], cols: usize) -> Option<(Vec<Rational>, Vec<Vec<Rational>>)> {
    let mut aug: Matrix = m
        .iter()
        .zip(rhs)
        .map(|(row, b)| {
            let mut r = row.clone();
            r.push(b.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.contains(&cols) {
        return None;
    }
    let mut x = vec![rat(0); cols];
    for (row, &pc) in pivots.iter().enumerate() {
        x[pc] = aug[row][cols].clone();
    }
    Some((x, nullspace(m, cols)))
}

/// Characteristic polynomial `det(xI - a)` by Faddeev-LeVerrier; returns
/// coefficients lowest degree first (monic, length n+1).
pub fn char_poly(a: &Matrix) -> Vec<Rational> {
    let n = a.len();
    let mut coeffs = vec![rat(0); n + 1];
    coeffs[n] = rat(1);
    let mut m = vec![vec![rat(0); n]; n];
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{n-k+1} I
        let mut next = mat_mul(a, &m);
        for (i, row) in next.iter_mut().enumerate() {
            row[i] += &coeffs[n - k + 1];
        }
        m = next;
        let am = mat_mul(a, &m);
        let trace: Rational = (0..n).map(|i| am[i][i].clone()).sum();
        coeffs[n - k] = -trace / rat(k as i64);
    }
    coeffs
}

pub fn poly_eval(p: &[Rational], x: &Rational) -> Rational {
    p.iter().rev().fold(rat(0), |acc, c| acc * x + c)
}

/// Synthetic division by `(x - r)`; the remainder is discarded.
pub fn poly_deflate(p: &[Rational], r: &Rational) -> Vec<Rational> {
    let n = p.len() - 1;
    let mut out = vec![rat(0); n];
    let mut carry = rat(0);
    for i in (1..=n).rev() {
        carry = &carry * r + &p[i];
        out[i - 1] = carry.clone();
    }
    out
}

/// Integer roots of a monic integral polynomial within `[-bound, bound]`,
/// with multiplicity. Also returns the unfactored remainder.
pub fn integer_roots(p: &[Rational], bound: i64) -> (Vec<(i64, usize)>, Vec<Rational>) {
    let mut rest = p.to_vec();
    let mut roots = Vec::new();
    for x in -bound..=bound {
        let xr = rat(x);
        let mut mult = 0;
        while rest.len() > 1 && poly_eval(&rest, &xr).is_zero() {
            rest = poly_deflate(&rest, &xr);
            mult += 1;
        }
        if mult > 0 {
            roots.push((x, mult));
        }
        if rest.len() == 1 {
            break;
        }
    }
    (roots, rest)
}

pub fn is_integer(x: &Rational) -> bool {
    x.is_integer()
}

pub fn to_i64(x: &Rational) -> Option<i64> {
    use num_traits::ToPrimitive;
    x.is_integer().then(|| x.to_integer().to_i64()).flatten()
}

pub fn is_nonnegative(x: &Rational) -> bool {
    !x.is_negative()
}

pub fn one() -> Rational {
    Rational::one()
}

/// `"n"` for integers, `"n/d"` otherwise.
pub fn format_rational(x: &Rational) -> String {
    if x.is_integer() {
        x.to_integer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            (!d.is_zero()).then(|| Rational::new(n, d))
        }
        None => s.parse::<BigInt>().ok().map(Rational::from_integer),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> Matrix {
        rows.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect()
    }

    #[test]
    fn char_poly_of_small_matrices() {
        // [[2,1],[1,2]] -> x^2 - 4x + 3
        let p = char_poly(&m(&[&[2, 1], &[1, 2]]));
        assert_eq!(p, vec![rat(3), rat(-4), rat(1)]);
        let (roots, rest) = integer_roots(&p, 10);
        assert_eq!(roots, vec![(1, 1), (3, 1)]);
        assert_eq!(rest.len(), 1);
        // x^2 - 2 has no rational roots
        let p = char_poly(&m(&[&[0, 2], &[1, 0]]));
        let (roots, rest) = integer_roots(&p, 10);
        assert!(roots.is_empty());
        assert_eq!(rest.len(), 3);
    }

    #[test]
    fn nullspace_and_solve() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6]]);
        let ns = nullspace(&a, 3);
        assert_eq!(ns.len(), 2);
        for v in &ns {
            assert!(mat_vec(&a, v).iter().all(|x| x.is_zero()));
        }
        let (x, _) = solve_affine(&a, &[rat(6), rat(12)], 3).unwrap();
        assert_eq!(mat_vec(&a, &x), vec![rat(6), rat(12)]);
        assert!(solve_affine(&a, &[rat(1), rat(1)], 3).is_none());
    }

    #[test]
    fn rational_formatting() {
        let x = Rational::new(BigInt::from(91), BigInt::from(5));
        assert_eq!(format_rational(&x), "91/5");
        assert_eq!(parse_rational("91/5"), Some(x));
        assert_eq!(parse_rational("-14"), Some(rat(-14)));
    }
}
