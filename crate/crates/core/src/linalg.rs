//! Exact dense linear solves over the rationals.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Solves `A X = B` for square `A` by Gauss–Jordan elimination.
///
/// `a` is `n × n` and `b` is `n × k`, both row-major. Returns `X` (`n × k`)
/// or `SingularSystem` when `A` has no inverse.
pub fn solve(mut a: Vec<Vec<Rational>>, mut b: Vec<Vec<Rational>>) -> Result<Vec<Vec<Rational>>> {
    let n = a.len();
    if b.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: b.len(),
        });
    }
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r][col].is_zero())
            .ok_or_else(|| Error::SingularSystem(format!("no pivot in column {col}")))?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = Rational::one() / &a[col][col];
        if !inv.is_one() {
            for v in a[col].iter_mut().skip(col) {
                *v *= &inv;
            }
            for v in b[col].iter_mut() {
                *v *= &inv;
            }
        }
        let pivot_row = a[col].clone();
        let pivot_rhs = b[col].clone();
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone();
            for (c, pv) in pivot_row.iter().enumerate().skip(col) {
                if !pv.is_zero() {
                    a[r][c] -= &factor * pv;
                }
            }
            for (c, pv) in pivot_rhs.iter().enumerate() {
                if !pv.is_zero() {
                    b[r][c] -= &factor * pv;
                }
            }
        }
    }
    Ok(b)
}

/// Solves a single right-hand side.
pub fn solve_vec(a: Vec<Vec<Rational>>, rhs: Vec<Rational>) -> Result<Vec<Rational>> {
    let b = rhs.into_iter().map(|v| vec![v]).collect();
    Ok(solve(a, b)?
        .into_iter()
        .map(|mut row| row.remove(0))
        .collect())
}
