//! Deterministic random instances: rational points, valid and compliant
//! game graphs, and stochastic min-max operators.

use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::game::{Edge, GameGraph, MinMaxOperator, VertexId};
use crate::rational::{int, rat, Rational};
use crate::trop::Trop;

/// Generator for sample `index` of a run seeded with `seed`. Each index gets
/// its own stream, so samples can be produced in any order or in parallel.
pub fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A rational `p/q` in `[-bound, bound]` with `1 ≤ q ≤ denom`.
pub fn rational_in(rng: &mut impl Rng, bound: &Rational, denom: u32) -> Rational {
    let q = rng.gen_range(1..=denom.max(1)) as i64;
    let scaled = bound * Rational::from_integer(BigInt::from(q));
    let hi = scaled.floor().to_integer();
    let hi: i64 = hi.try_into().unwrap_or(i64::MAX / 2);
    let p = rng.gen_range(-hi..=hi);
    rat(p, q)
}

pub fn point_in(rng: &mut impl Rng, n: usize, bound: &Rational, denom: u32) -> Vec<Rational> {
    (0..n).map(|_| rational_in(rng, bound, denom)).collect()
}

/// A point of `𝕋ⁿ` in which each coordinate is `−∞` with probability 1/4;
/// at least one coordinate is `−∞`.
pub fn trop_point_with_neg_inf(
    rng: &mut impl Rng,
    n: usize,
    bound: &Rational,
    denom: u32,
) -> Vec<Trop> {
    let mut x: Vec<Trop> = (0..n)
        .map(|_| {
            if rng.gen_ratio(1, 4) {
                Trop::NegInf
            } else {
                Trop::Fin(rational_in(rng, bound, denom))
            }
        })
        .collect();
    if n > 0 && x.iter().all(|t| !t.is_neg_inf()) {
        let k = rng.gen_range(0..n);
        x[k] = Trop::NegInf;
    }
    x
}

/// Size limits for [`valid_graph`].
#[derive(Clone, Copy, Debug)]
pub struct GraphLimits {
    pub max_min: usize,
    pub max_max: usize,
    pub max_random: usize,
    pub max_denom: i64,
}

impl Default for GraphLimits {
    fn default() -> Self {
        GraphLimits {
            max_min: 6,
            max_max: 6,
            max_random: 8,
            max_denom: 12,
        }
    }
}

fn payoff(rng: &mut impl Rng, max_denom: i64) -> Rational {
    let q = rng.gen_range(1..=max_denom);
    rat(rng.gen_range(-2 * q..=2 * q), q)
}

/// Splits 1 into `k` positive rationals with a common denominator at most
/// `max_denom` (and at least `k`).
fn distribution(rng: &mut impl Rng, k: usize, max_denom: i64) -> Vec<Rational> {
    let k = k as i64;
    let d = rng.gen_range(k..=max_denom.max(k));
    let mut cuts: Vec<i64> = (1..d).collect();
    cuts.shuffle(rng);
    let mut cuts: Vec<i64> = cuts.into_iter().take((k - 1) as usize).collect();
    cuts.push(0);
    cuts.push(d);
    cuts.sort_unstable();
    cuts.windows(2).map(|w| rat(w[1] - w[0], d)).collect()
}

/// A random graph satisfying every validity requirement. Random vertices
/// are split into a group fed by Min vertices, which only leads to Max
/// vertices, and a group fed by Max vertices, which only leads to Min
/// vertices; each Random vertex has an edge to an absorbing vertex or to an
/// earlier member of its group, so absorption is certain.
pub fn valid_graph(rng: &mut impl Rng, limits: GraphLimits) -> GameGraph {
    let n_min = rng.gen_range(1..=limits.max_min);
    let n_max = rng.gen_range(1..=limits.max_max);
    let n_rand = rng.gen_range(0..=limits.max_random);
    let min: Vec<VertexId> = (1..=n_min as VertexId).collect();
    let max: Vec<VertexId> = (0..n_max as VertexId)
        .map(|i| n_min as VertexId + 1 + i)
        .collect();
    let random: Vec<VertexId> = (0..n_rand as VertexId)
        .map(|i| (n_min + n_max) as VertexId + 1 + i)
        .collect();
    let split = rng.gen_range(0..=n_rand);
    let (toward_max, toward_min) = random.split_at(split);

    let mut edges = Vec::new();
    let mut next_edge = 1;
    let mut push = |edges: &mut Vec<Edge>, e: fn(u32, u32, u32, Rational) -> Edge, t, h, l| {
        edges.push(e(next_edge, t, h, l));
        next_edge += 1;
    };

    for (owners, targets, group) in [(&min, &max, toward_max), (&max, &min, toward_min)] {
        let choices: Vec<VertexId> = targets.iter().chain(group).copied().collect();
        for &v in owners.iter() {
            for _ in 0..rng.gen_range(1..=3) {
                let h = *choices.choose(rng).unwrap();
                push(
                    &mut edges,
                    Edge::payoff,
                    v,
                    h,
                    payoff(rng, limits.max_denom),
                );
            }
        }
        for (i, &r) in group.iter().enumerate() {
            let k = rng.gen_range(1..=4);
            let probs = distribution(rng, k, limits.max_denom);
            let escape: Vec<VertexId> = targets.iter().chain(&group[..i]).copied().collect();
            for (j, q) in probs.into_iter().enumerate() {
                let h = if j == 0 {
                    *escape.choose(rng).unwrap()
                } else {
                    let any: Vec<VertexId> = targets.iter().chain(group).copied().collect();
                    *any.choose(rng).unwrap()
                };
                push(&mut edges, Edge::prob, r, h, q);
            }
        }
    }
    GameGraph::from_parts(min, max, random, edges).expect("generated ids are consistent")
}

/// A random compliant graph: Min edges go to a Max vertex or to a fair coin
/// over two Max vertices, Max edges go to Min vertices.
pub fn compliant_graph(rng: &mut impl Rng, max_players: usize, max_denom: i64) -> GameGraph {
    let n_min = rng.gen_range(1..=max_players);
    let n_max = rng.gen_range(1..=max_players);
    let min: Vec<VertexId> = (1..=n_min as VertexId).collect();
    let max: Vec<VertexId> = (0..n_max as VertexId)
        .map(|i| n_min as VertexId + 1 + i)
        .collect();
    let mut random = Vec::new();
    let mut edges = Vec::new();
    let mut next_vertex = (n_min + n_max) as VertexId + 1;
    let mut next_edge = 1;
    let mut id = || {
        next_edge += 1;
        next_edge - 1
    };
    for &v in &min {
        for _ in 0..rng.gen_range(1..=3) {
            if rng.gen_bool(0.5) {
                let r = next_vertex;
                next_vertex += 1;
                random.push(r);
                edges.push(Edge::payoff(id(), v, r, payoff(rng, max_denom)));
                for _ in 0..2 {
                    let w = *max.choose(rng).unwrap();
                    edges.push(Edge::prob(id(), r, w, rat(1, 2)));
                }
            } else {
                let w = *max.choose(rng).unwrap();
                edges.push(Edge::payoff(id(), v, w, payoff(rng, max_denom)));
            }
        }
    }
    for &w in &max {
        for _ in 0..rng.gen_range(1..=3) {
            let u = *min.choose(rng).unwrap();
            edges.push(Edge::payoff(id(), w, u, payoff(rng, max_denom)));
        }
    }
    GameGraph::from_parts(min, max, random, edges).expect("generated ids are consistent")
}

/// A random stochastic min-max operator in dimension at most `max_n`.
pub fn minmax_operator(rng: &mut impl Rng, max_n: usize, max_denom: i64) -> MinMaxOperator {
    let n = rng.gen_range(1..=max_n);
    let p = rng.gen_range(1..=3usize);
    let matrices = (0..p)
        .map(|_| {
            (0..n)
                .map(|_| {
                    let k = rng.gen_range(1..=n);
                    let mut cols: Vec<usize> = (0..n).collect();
                    cols.shuffle(rng);
                    let mut row = vec![int(0); n];
                    for (c, q) in cols.into_iter().zip(distribution(rng, k, max_denom)) {
                        row[c] = q;
                    }
                    row
                })
                .collect()
        })
        .collect();
    let payoffs = (0..p)
        .map(|_| (0..n).map(|_| payoff(rng, max_denom)).collect())
        .collect();
    let selections = (0..n)
        .map(|_| {
            (0..rng.gen_range(1..=2))
                .map(|_| {
                    let mut set: Vec<usize> = (0..p).filter(|_| rng.gen_bool(0.5)).collect();
                    if set.is_empty() {
                        set.push(rng.gen_range(0..p));
                    }
                    set
                })
                .collect()
        })
        .collect();
    MinMaxOperator {
        n,
        matrices,
        payoffs,
        selections,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::validate_graph;
    use crate::transform::check_compliant;
    use num_traits::Signed;

    #[test]
    fn streams_are_reproducible() {
        let bound = int(10);
        let a = point_in(&mut stream_rng(7, 3), 4, &bound, 64);
        let b = point_in(&mut stream_rng(7, 3), 4, &bound, 64);
        let c = point_in(&mut stream_rng(7, 4), 4, &bound, 64);
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert!(a
            .iter()
            .all(|v| v.abs() <= bound && *v.denom() <= BigInt::from(64)));
    }

    #[test]
    fn distributions_sum_to_one() {
        let mut rng = stream_rng(1, 0);
        for k in 1..=4 {
            let d = distribution(&mut rng, k, 12);
            assert_eq!(d.len(), k);
            assert_eq!(d.iter().sum::<Rational>(), int(1));
        }
    }

    #[test]
    fn generated_graphs_are_valid() {
        for i in 0..50 {
            let g = valid_graph(&mut stream_rng(11, i), GraphLimits::default());
            let report = validate_graph(&g);
            assert!(report.passed(), "{:?}", report.failures);
            let c = compliant_graph(&mut stream_rng(12, i), 4, 12);
            assert!(validate_graph(&c).passed());
            check_compliant(&c).unwrap();
            let op = minmax_operator(&mut stream_rng(13, i), 4, 6);
            op.check_shape().unwrap();
            assert!(op.check_stochastic().passed());
        }
    }
}
