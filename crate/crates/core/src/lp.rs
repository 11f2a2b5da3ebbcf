//! The canonical operator `F_k(x) = max { y_k : y ∈ U, y ≤ x }` of a union
//! of rational polyhedra, evaluated by exact linear programming.

use num_traits::{Signed, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::{self, Rational};
use crate::sample::{point_in, rational_in, stream_rng};

/// `{x : A x ≤ b}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Polyhedron {
    #[serde(rename = "A", with = "rational::matrix")]
    pub a: Vec<Vec<Rational>>,
    #[serde(with = "rational::vec")]
    pub b: Vec<Rational>,
}

impl Polyhedron {
    pub fn new(a: Vec<Vec<Rational>>, b: Vec<Rational>) -> Self {
        Polyhedron { a, b }
    }

    /// The same set given as `{x : A x ≥ b}`.
    pub fn from_geq(a: Vec<Vec<Rational>>, b: Vec<Rational>) -> Self {
        Polyhedron {
            a: a.into_iter()
                .map(|row| row.into_iter().map(|v| -v).collect())
                .collect(),
            b: b.into_iter().map(|v| -v).collect(),
        }
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.a
            .iter()
            .zip(&self.b)
            .all(|(row, bi)| dot(row, x) <= *bi)
    }
}

fn dot(row: &[Rational], x: &[Rational]) -> Rational {
    row.iter().zip(x).map(|(a, b)| a * b).sum()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyhedralUnion {
    pub n: usize,
    pub pieces: Vec<Polyhedron>,
}

impl PolyhedralUnion {
    pub fn new(n: usize, pieces: Vec<Polyhedron>) -> Result<Self> {
        let u = PolyhedralUnion { n, pieces };
        u.check()?;
        Ok(u)
    }

    pub fn check(&self) -> Result<()> {
        if self.pieces.is_empty() {
            return Err(Error::Parse(
                "a polyhedral union needs at least one piece".into(),
            ));
        }
        for (s, p) in self.pieces.iter().enumerate() {
            if p.a.len() != p.b.len() {
                return Err(Error::DimensionMismatch {
                    expected: p.a.len(),
                    got: p.b.len(),
                });
            }
            if let Some(row) = p.a.iter().find(|row| row.len() != self.n) {
                return Err(Error::Parse(format!(
                    "piece {s} has a row of length {} in dimension {}",
                    row.len(),
                    self.n
                )));
            }
        }
        Ok(())
    }

    pub fn contains(&self, x: &[Rational]) -> bool {
        self.pieces.iter().any(|p| p.contains(x))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LpOutcome {
    Optimal(Rational),
    Infeasible,
}

/// Dense simplex tableau over `[A | I | artificials | rhs]` with an explicit
/// basis; pivoting follows Bland's rule.
struct Tableau {
    rows: Vec<Vec<Rational>>,
    basis: Vec<usize>,
    cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip();
        for v in self.rows[r].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &factor * p;
                }
            }
        }
        self.basis[r] = c;
    }

    fn value(&self, obj: &[Rational]) -> Rational {
        self.rows
            .iter()
            .zip(&self.basis)
            .map(|(row, &b)| &obj[b] * &row[self.cols])
            .sum()
    }

    /// Maximizes `obj · z` over columns admitted by `usable`. Returns
    /// `false` when the objective is unbounded.
    fn maximize(&mut self, obj: &[Rational], usable: impl Fn(usize) -> bool) -> bool {
        loop {
            let entering = (0..self.cols).filter(|&j| usable(j)).find(|&j| {
                let reduced: Rational = obj[j].clone()
                    - self
                        .rows
                        .iter()
                        .zip(&self.basis)
                        .map(|(row, &b)| &obj[b] * &row[j])
                        .sum::<Rational>();
                reduced.is_positive()
            });
            let Some(c) = entering else { return true };
            let mut leave: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[c].is_positive() {
                    continue;
                }
                let ratio = &row[self.cols] / &row[c];
                let better = match &leave {
                    None => true,
                    Some((l, best)) => {
                        ratio < *best || (ratio == *best && self.basis[i] < self.basis[*l])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, _)) = leave else { return false };
            self.pivot(r, c);
        }
    }
}

/// `max c·s` subject to `M s ≤ h`, `s ≥ 0`; `None` when infeasible.
/// Panics if the problem is unbounded, which callers rule out.
fn simplex_max(c: &[Rational], m: &[Vec<Rational>], h: &[Rational]) -> Option<Rational> {
    let n = c.len();
    let rows = m.len();
    let negative: Vec<usize> = (0..rows).filter(|&i| h[i].is_negative()).collect();
    let cols = n + rows + negative.len();
    let mut t = Tableau {
        rows: Vec::with_capacity(rows),
        basis: Vec::with_capacity(rows),
        cols,
    };
    for i in 0..rows {
        let flip = h[i].is_negative();
        let sgn = |v: &Rational| if flip { -v } else { v.clone() };
        let mut row: Vec<Rational> = m[i].iter().map(sgn).collect();
        row.resize(cols + 1, Rational::zero());
        row[n + i] = sgn(&Rational::from_integer(1.into()));
        row[cols] = sgn(&h[i]);
        if flip {
            let a = n + rows + negative.iter().position(|&k| k == i).unwrap();
            row[a] = Rational::from_integer(1.into());
            t.basis.push(a);
        } else {
            t.basis.push(n + i);
        }
        t.rows.push(row);
    }

    let artificial = |j: usize| j >= n + rows;
    if !negative.is_empty() {
        let phase1: Vec<Rational> = (0..cols)
            .map(|j| {
                if artificial(j) {
                    Rational::from_integer((-1).into())
                } else {
                    Rational::zero()
                }
            })
            .collect();
        assert!(t.maximize(&phase1, |_| true), "phase one is bounded");
        if t.value(&phase1).is_negative() {
            return None;
        }
        // Drive zero-level artificials out of the basis; rows where that is
        // impossible are redundant and dropped.
        let mut i = 0;
        while i < t.rows.len() {
            if artificial(t.basis[i]) {
                match (0..n + rows).find(|&j| !t.rows[i][j].is_zero()) {
                    Some(j) => t.pivot(i, j),
                    None => {
                        t.rows.remove(i);
                        t.basis.remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
    }
    let mut obj = c.to_vec();
    obj.resize(cols, Rational::zero());
    assert!(
        t.maximize(&obj, |j| !artificial(j)),
        "objective is bounded by construction"
    );
    Some(t.value(&obj))
}

/// `max { y_k : A y ≤ b, y ≤ x }`, solved as `x_k − min s_k` over
/// `s = x − y ≥ 0`, `−A s ≤ b − A x`.
pub fn lp_max(a: &[Vec<Rational>], b: &[Rational], x: &[Rational], k: usize) -> Result<LpOutcome> {
    let n = x.len();
    if k >= n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: k,
        });
    }
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    if let Some(row) = a.iter().find(|row| row.len() != n) {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: row.len(),
        });
    }
    let m: Vec<Vec<Rational>> = a
        .iter()
        .map(|row| row.iter().map(|v| -v).collect())
        .collect();
    let h: Vec<Rational> = a.iter().zip(b).map(|(row, bi)| bi - dot(row, x)).collect();
    let mut c = vec![Rational::zero(); n];
    c[k] = Rational::from_integer((-1).into());
    Ok(match simplex_max(&c, &m, &h) {
        Some(v) => LpOutcome::Optimal(&x[k] + v),
        None => LpOutcome::Infeasible,
    })
}

/// `F(x)` for the union: per coordinate, the best optimum over the pieces
/// that meet `{y ≤ x}`.
pub fn eval_f_from_polyhedra(u: &PolyhedralUnion, x: &[Rational]) -> Result<Vec<Rational>> {
    if x.len() != u.n {
        return Err(Error::DimensionMismatch {
            expected: u.n,
            got: x.len(),
        });
    }
    let mut out: Vec<Option<Rational>> = vec![None; u.n];
    for piece in &u.pieces {
        for (k, slot) in out.iter_mut().enumerate() {
            match lp_max(&piece.a, &piece.b, x, k)? {
                LpOutcome::Infeasible => break,
                LpOutcome::Optimal(v) => {
                    if slot.as_ref().is_none_or(|cur| v > *cur) {
                        *slot = Some(v);
                    }
                }
            }
        }
    }
    out.into_iter()
        .map(|v| v.ok_or(Error::EmptyBelow))
        .collect()
}

/// A pair of members whose combination `max(λ + x, μ + y)` with
/// `max(λ, μ) = 0` leaves the union.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConvexityCounterexample {
    #[serde(with = "rational::vec")]
    pub x: Vec<Rational>,
    #[serde(with = "rational::vec")]
    pub y: Vec<Rational>,
    #[serde(with = "rational")]
    pub lambda: Rational,
    #[serde(with = "rational")]
    pub mu: Rational,
    #[serde(with = "rational::vec")]
    pub combination: Vec<Rational>,
}

/// Samples member pairs in the box `[-bound, bound]ⁿ` and tests their
/// tropical combinations. `trials` bounds the number of combinations tried.
pub fn tropical_convexity_falsifier(
    u: &PolyhedralUnion,
    trials: usize,
    seed: u64,
    bound: &Rational,
    denom: u32,
) -> Option<ConvexityCounterexample> {
    let mut rng = stream_rng(seed, 0);
    for _ in 0..trials {
        let (Some(x), Some(y)) = (
            sample_member(&mut rng, u, bound, denom),
            sample_member(&mut rng, u, bound, denom),
        ) else {
            continue;
        };
        let shift = -rational::abs(&rational_in(&mut rng, bound, denom));
        let (lambda, mu) = if rng.gen_bool(0.5) {
            (Rational::zero(), shift)
        } else {
            (shift, Rational::zero())
        };
        let combination: Vec<Rational> = x
            .iter()
            .zip(&y)
            .map(|(a, b)| (&lambda + a).max(&mu + b))
            .collect();
        if !u.contains(&combination) {
            return Some(ConvexityCounterexample {
                x,
                y,
                lambda,
                mu,
                combination,
            });
        }
    }
    None
}

fn sample_member(
    rng: &mut impl Rng,
    u: &PolyhedralUnion,
    bound: &Rational,
    denom: u32,
) -> Option<Vec<Rational>> {
    (0..64)
        .map(|_| point_in(rng, u.n, bound, denom))
        .find(|x| u.contains(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&p| int(p)).collect()
    }

    #[test]
    fn no_rows_gives_x() {
        assert_eq!(
            lp_max(&[], &[], &ints(&[3, -1]), 0).unwrap(),
            LpOutcome::Optimal(int(3))
        );
    }

    #[test]
    fn single_bound() {
        let a = vec![ints(&[1, 0])];
        assert_eq!(
            lp_max(&a, &ints(&[0]), &ints(&[5, 5]), 0).unwrap(),
            LpOutcome::Optimal(int(0))
        );
    }

    #[test]
    fn infeasible_below_x() {
        // y₁ ≥ 2 (as −y₁ ≤ −2) with y ≤ (1, 1).
        let a = vec![ints(&[-1, 0])];
        assert_eq!(
            lp_max(&a, &ints(&[-2]), &ints(&[1, 1]), 1).unwrap(),
            LpOutcome::Infeasible
        );
    }

    #[test]
    fn ordered_cone() {
        let u = PolyhedralUnion::new(2, vec![Polyhedron::new(vec![ints(&[1, -1])], ints(&[0]))])
            .unwrap();
        assert_eq!(
            eval_f_from_polyhedra(&u, &ints(&[5, 0])).unwrap(),
            ints(&[0, 0])
        );
        assert_eq!(
            eval_f_from_polyhedra(&u, &ints(&[-1, 4])).unwrap(),
            ints(&[-1, 4])
        );
        assert!(tropical_convexity_falsifier(&u, 1000, 3, &int(10), 8).is_none());
    }

    #[test]
    fn empty_below() {
        let u = PolyhedralUnion::new(1, vec![Polyhedron::from_geq(vec![ints(&[1])], ints(&[0]))])
            .unwrap();
        assert_eq!(
            eval_f_from_polyhedra(&u, &ints(&[-1])),
            Err(Error::EmptyBelow)
        );
    }

    #[test]
    fn union_of_half_planes_is_not_convex() {
        let u = PolyhedralUnion::new(
            2,
            vec![
                Polyhedron::new(vec![ints(&[1, 0])], ints(&[0])),
                Polyhedron::new(vec![ints(&[0, 1])], ints(&[0])),
            ],
        )
        .unwrap();
        let cex = tropical_convexity_falsifier(&u, 1000, 5, &int(10), 8).unwrap();
        assert!(u.contains(&cex.x) && u.contains(&cex.y));
        assert!(!u.contains(&cex.combination));
        assert!(tropical_convexity_falsifier(&u, 0, 5, &int(10), 8).is_none());
    }

    #[test]
    fn degenerate_equalities() {
        // y₁ = y₂ written as two inequalities, plus a redundant copy.
        let a = vec![ints(&[1, -1]), ints(&[-1, 1]), ints(&[2, -2])];
        let b = ints(&[0, 0, 0]);
        assert_eq!(
            lp_max(&a, &b, &ints(&[3, -2]), 0).unwrap(),
            LpOutcome::Optimal(int(-2))
        );
    }
}
