//! Membership in finitely generated tropical cones and tropical convex hulls.
//!
//! Both tests use residuation: for each generator the largest scalar `λ_k`
//! with `λ_k ⊙ g_k ≤ y` is computed, and `y` is a member exactly when the
//! tropical sum of these maximal multiples reproduces `y`.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::trop::{tmul, Trop};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TropPointSet {
    dim: usize,
    points: Vec<Vec<Trop>>,
}

impl TropPointSet {
    pub fn new(dim: usize, points: Vec<Vec<Trop>>) -> Result<Self> {
        if let Some(bad) = points.iter().find(|p| p.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: bad.len(),
            });
        }
        Ok(TropPointSet { dim, points })
    }

    pub fn empty(dim: usize) -> Self {
        TropPointSet {
            dim,
            points: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Vec<Trop>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn union(&self, other: &TropPointSet) -> Result<TropPointSet> {
        check_dim(self.dim, other.dim)?;
        let mut points = self.points.clone();
        points.extend(other.points.iter().cloned());
        Ok(TropPointSet {
            dim: self.dim,
            points,
        })
    }

    /// The generators `(0, g)` of the homogenized cone.
    pub fn homogenized(&self) -> TropPointSet {
        TropPointSet {
            dim: self.dim + 1,
            points: self
                .points
                .iter()
                .map(|g| {
                    std::iter::once(Trop::one())
                        .chain(g.iter().cloned())
                        .collect()
                })
                .collect(),
        }
    }
}

impl Serialize for TropPointSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.points.serialize(s)
    }
}

impl<'de> Deserialize<'de> for TropPointSet {
    /// The dimension is taken from the first point; an empty array yields the
    /// empty set in dimension 0.
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let points = Vec::<Vec<Trop>>::deserialize(d)?;
        let dim = points.first().map_or(0, Vec::len);
        TropPointSet::new(dim, points).map_err(serde::de::Error::custom)
    }
}

fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}

/// Largest `λ` with `λ ⊙ g ≤ y`, or `None` for the inert all-(−∞) generator.
fn residual(y: &[Trop], g: &[Trop]) -> Option<Trop> {
    let mut lambda: Option<Trop> = None;
    for (yi, gi) in y.iter().zip(g) {
        let Trop::Fin(gi) = gi else { continue };
        let candidate = yi.minus(gi);
        lambda = Some(match lambda {
            Some(l) if l <= candidate => l,
            _ => candidate,
        });
    }
    lambda
}

/// The greatest element of the cone generated by `gens` lying below `y`.
pub fn cone_floor(y: &[Trop], gens: &TropPointSet) -> Result<Vec<Trop>> {
    check_dim(gens.dim, y.len())?;
    let mut acc = vec![Trop::NegInf; y.len()];
    for g in &gens.points {
        let Some(lambda) = residual(y, g) else {
            continue;
        };
        for (a, gi) in acc.iter_mut().zip(g) {
            let v = tmul(&lambda, gi);
            if v > *a {
                *a = v;
            }
        }
    }
    Ok(acc)
}

/// Whether `y` is a tropical linear combination `⊕ λ_k ⊙ g_k` of the generators.
pub fn cone_member(y: &[Trop], gens: &TropPointSet) -> Result<bool> {
    Ok(cone_floor(y, gens)? == y)
}

/// Whether `y` lies in the tropical convex hull of `gens`, i.e. whether
/// `(0, y)` lies in the cone generated by the points `(0, g)`.
pub fn hull_member(y: &[Trop], gens: &TropPointSet) -> Result<bool> {
    check_dim(gens.dim, y.len())?;
    let lifted: Vec<Trop> = std::iter::once(Trop::one())
        .chain(y.iter().cloned())
        .collect();
    cone_member(&lifted, &gens.homogenized())
}

/// Membership in `tconv(G₁ ∪ G₂)`.
pub fn union_hull_member(y: &[Trop], g1: &TropPointSet, g2: &TropPointSet) -> Result<bool> {
    hull_member(y, &g1.union(g2)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;
    use crate::trop::tadd;
    use proptest::prelude::*;

    fn f(p: i64) -> Trop {
        Trop::Fin(rat(p, 1))
    }

    fn set(points: Vec<Vec<Trop>>) -> TropPointSet {
        let dim = points[0].len();
        TropPointSet::new(dim, points).unwrap()
    }

    #[test]
    fn cone_examples() {
        let g = set(vec![vec![f(0), f(0)]]);
        assert!(cone_member(&[f(0), f(0)], &g).unwrap());
        assert!(!cone_member(&[f(0), f(1)], &g).unwrap());
        let axes = set(vec![vec![f(0), Trop::NegInf], vec![Trop::NegInf, f(0)]]);
        assert!(cone_member(&[f(5), f(7)], &axes).unwrap());
        assert!(cone_member(&[Trop::NegInf, Trop::NegInf], &axes).unwrap());
    }

    #[test]
    fn hull_examples() {
        let g = set(vec![vec![f(0), f(0)], vec![f(2), f(2)]]);
        assert!(hull_member(&[f(0), f(0)], &g).unwrap());
        assert!(hull_member(&[f(1), f(1)], &g).unwrap());
        assert!(!hull_member(&[f(0), f(2)], &g).unwrap());
        assert!(!hull_member(&[f(3), f(3)], &g).unwrap());
    }

    #[test]
    fn union_examples() {
        let g1 = set(vec![vec![f(0), f(0)]]);
        let g2 = set(vec![vec![f(2), f(2)]]);
        assert!(union_hull_member(&[f(0), f(0)], &g1, &g2).unwrap());
        assert!(union_hull_member(&[f(1), f(1)], &g1, &g2).unwrap());
        let a = set(vec![vec![f(0), Trop::NegInf]]);
        let b = set(vec![vec![Trop::NegInf, f(0)]]);
        assert!(union_hull_member(&[f(0), f(0)], &a, &b).unwrap());
        assert!(!union_hull_member(&[f(1), f(0)], &a, &b).unwrap());
    }

    #[test]
    fn inert_generator_and_dimension_errors() {
        let g = set(vec![vec![Trop::NegInf, Trop::NegInf], vec![f(1), f(2)]]);
        assert!(hull_member(&[f(1), f(2)], &g).unwrap());
        assert!(matches!(
            hull_member(&[f(1)], &g),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(TropPointSet::new(2, vec![vec![f(1)]]).is_err());
        assert!(!hull_member(&[f(0), f(0)], &TropPointSet::empty(2)).unwrap());
    }

    #[test]
    fn json_point_sets() {
        let g: TropPointSet = serde_json::from_str(r#"[["0/1","-inf"],["1/2","3/1"]]"#).unwrap();
        assert_eq!(g.dim(), 2);
        assert_eq!(g.points()[0][1], Trop::NegInf);
        assert_eq!(
            serde_json::to_string(&g).unwrap(),
            r#"[["0/1","-inf"],["1/2","3/1"]]"#
        );
    }

    fn arb_coord() -> impl Strategy<Value = Trop> {
        prop_oneof![1 => Just(Trop::NegInf), 5 => (-6i64..6).prop_map(f)]
    }

    fn arb_gens() -> impl Strategy<Value = TropPointSet> {
        (1usize..4).prop_flat_map(|n| {
            proptest::collection::vec(proptest::collection::vec(arb_coord(), n), 1..5)
                .prop_map(move |pts| TropPointSet::new(n, pts).unwrap())
        })
    }

    proptest! {
        #[test]
        fn hull_is_tropically_convex(g in arb_gens(), i in 0usize..5, j in 0usize..5, lam in -4i64..=0, which in any::<bool>()) {
            let x = &g.points()[i % g.len()];
            let y = &g.points()[j % g.len()];
            let (l, m) = if which { (f(0), f(lam)) } else { (f(lam), f(0)) };
            let z: Vec<Trop> = x.iter().zip(y).map(|(a, b)| tadd(&tmul(&l, a), &tmul(&m, b))).collect();
            prop_assert!(hull_member(&z, &g).unwrap());
        }

        #[test]
        fn cone_membership_is_scale_free(g in arb_gens(), shift in -5i64..5, y in proptest::collection::vec(arb_coord(), 3)) {
            let y = &y[..g.dim()];
            let shifted = TropPointSet::new(
                g.dim(),
                g.points().iter().map(|p| p.iter().map(|c| tmul(c, &f(shift))).collect()).collect(),
            ).unwrap();
            prop_assert_eq!(cone_member(y, &g).unwrap(), cone_member(y, &shifted).unwrap());
        }
    }
}
