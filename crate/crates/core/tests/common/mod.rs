//! Reference implementations written independently of the library, used as
//! oracles by the integration tests. They favour obviousness over speed.
#![allow(dead_code)]

use std::collections::HashMap;

use num_traits::{One, Zero};
use tropmetzler::game::{EdgeLabel, GameGraph, VertexId, VertexKind};
use tropmetzler::{Rational, Trop};

/// `−∞` as `None`.
pub type Ext = Option<Rational>;

pub fn to_ext(t: &Trop) -> Ext {
    t.finite().cloned()
}

pub fn to_trop(e: &Ext) -> Trop {
    e.clone().map_or(Trop::NegInf, Trop::Fin)
}

pub fn ext_add(a: &Ext, b: &Ext) -> Ext {
    Some(a.as_ref()? + b.as_ref()?)
}

pub fn ext_max(a: Ext, b: Ext) -> Ext {
    match (a, b) {
        (None, b) => b,
        (a, None) => a,
        (Some(a), Some(b)) => Some(a.max(b)),
    }
}

pub fn ext_leq(a: &Ext, b: &Ext) -> bool {
    match (a, b) {
        (None, _) => true,
        (Some(_), None) => false,
        (Some(a), Some(b)) => a <= b,
    }
}

/// Solves `A X = B` by Gauss–Jordan elimination on the full system.
pub fn gauss(mut a: Vec<Vec<Rational>>, mut b: Vec<Vec<Rational>>) -> Option<Vec<Vec<Rational>>> {
    let n = a.len();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, pivot);
        b.swap(col, pivot);
        let inv = Rational::one() / &a[col][col];
        for v in a[col].iter_mut() {
            *v *= &inv;
        }
        for v in b[col].iter_mut() {
            *v *= &inv;
        }
        for r in 0..n {
            if r != col && !a[r][col].is_zero() {
                let f = a[r][col].clone();
                for c in 0..n {
                    let d = &f * &a[col][c];
                    a[r][c] -= d;
                }
                for c in 0..b[r].len() {
                    let d = &f * &b[col][c];
                    b[r][c] -= d;
                }
            }
        }
    }
    Some(b)
}

/// Probability of first reaching each Min or Max vertex from each Random
/// vertex, from one linear system over all Random vertices.
pub fn absorption_oracle(g: &GameGraph) -> HashMap<VertexId, HashMap<VertexId, Rational>> {
    let random = g.random_ids().to_vec();
    let players: Vec<VertexId> = g.min_ids().iter().chain(g.max_ids()).copied().collect();
    let ri: HashMap<VertexId, usize> = random.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let pi: HashMap<VertexId, usize> = players.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let n = random.len();
    let mut a = vec![vec![Rational::zero(); n]; n];
    let mut b = vec![vec![Rational::zero(); players.len()]; n];
    for (i, &v) in random.iter().enumerate() {
        a[i][i] += Rational::one();
        for e in g.edges().iter().filter(|e| e.tail == v) {
            let EdgeLabel::Prob(q) = &e.label else {
                panic!("random edge without probability")
            };
            match ri.get(&e.head) {
                Some(&j) => a[i][j] -= q,
                None => b[i][pi[&e.head]] += q,
            }
        }
    }
    let x = gauss(a, b).expect("every random vertex escapes");
    random
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            let row = players
                .iter()
                .enumerate()
                .filter(|(j, _)| !x[i][*j].is_zero())
                .map(|(j, &w)| (w, x[i][j].clone()))
                .collect();
            (v, row)
        })
        .collect()
}

/// Distribution of the first Min or Max vertex reached through an edge
/// with head `h`.
fn head_distribution(
    g: &GameGraph,
    abs: &HashMap<VertexId, HashMap<VertexId, Rational>>,
    h: VertexId,
) -> Vec<(VertexId, Rational)> {
    match g.kind(h) {
        Some(VertexKind::Random) => abs[&h].iter().map(|(w, p)| (*w, p.clone())).collect(),
        _ => vec![(h, Rational::one())],
    }
}

fn expectation(dist: &[(VertexId, Rational)], value: impl Fn(VertexId) -> Ext) -> Ext {
    let mut acc = Rational::zero();
    for (w, p) in dist {
        acc += p * value(*w)?;
    }
    Some(acc)
}

/// The game operator over `𝕋ⁿ` straight from the definitions: Max vertices
/// maximise over their edges, Min vertices minimise, Random vertices are
/// resolved through [`absorption_oracle`]. A `−∞` reached with positive
/// probability makes the expectation `−∞`.
pub struct Reference<'a> {
    g: &'a GameGraph,
    abs: HashMap<VertexId, HashMap<VertexId, Rational>>,
    min_pos: HashMap<VertexId, usize>,
}

impl<'a> Reference<'a> {
    pub fn new(g: &'a GameGraph) -> Self {
        Reference {
            g,
            abs: absorption_oracle(g),
            min_pos: g
                .min_ids()
                .iter()
                .enumerate()
                .map(|(i, &v)| (v, i))
                .collect(),
        }
    }

    pub fn eval(&self, x: &[Ext]) -> Vec<Ext> {
        let g = self.g;
        let payoff = |label: &EdgeLabel| match label {
            EdgeLabel::Payoff(r) => r.clone(),
            EdgeLabel::Prob(_) => panic!("player edge without payoff"),
        };
        let max_value: HashMap<VertexId, Ext> = g
            .max_ids()
            .iter()
            .map(|&w| {
                let mut best: Ext = None;
                for e in g.edges().iter().filter(|e| e.tail == w) {
                    let dist = head_distribution(g, &self.abs, e.head);
                    let v = expectation(&dist, |u| x[self.min_pos[&u]].clone());
                    best = ext_max(best, v.map(|v| v + payoff(&e.label)));
                }
                (w, best)
            })
            .collect();
        g.min_ids()
            .iter()
            .map(|&u| {
                let mut worst: Option<Ext> = None;
                for e in g.edges().iter().filter(|e| e.tail == u) {
                    let dist = head_distribution(g, &self.abs, e.head);
                    let v =
                        expectation(&dist, |w| max_value[&w].clone()).map(|v| v + payoff(&e.label));
                    worst = Some(match worst {
                        None => v,
                        Some(cur) => {
                            if ext_leq(&v, &cur) {
                                v
                            } else {
                                cur
                            }
                        }
                    });
                }
                worst.expect("every vertex has an out-edge")
            })
            .collect()
    }

    pub fn subfixed(&self, x: &[Ext]) -> bool {
        let fx = self.eval(x);
        x.iter().zip(&fx).all(|(a, b)| ext_leq(a, b))
    }
}

pub fn operator_oracle(g: &GameGraph, x: &[Ext]) -> Vec<Ext> {
    Reference::new(g).eval(x)
}

pub fn subfixed_oracle(g: &GameGraph, x: &[Ext]) -> bool {
    Reference::new(g).subfixed(x)
}

/// Membership in the tropical convex hull by search over Carathéodory
/// subsets: `y` is a member when some set of at most `n + 1` generators and
/// some assignment of each finite coordinate of `y` to a generator that
/// attains it yield coefficients `λ` with `max λ = 0` and
/// `max_i (λ_i + g_i) = y`.
pub fn hull_member_brute(y: &[Ext], gens: &[Vec<Ext>]) -> bool {
    let n = y.len();
    let m = gens.len();
    let size = (n + 1).min(m);
    let support: Vec<usize> = (0..n).filter(|&k| y[k].is_some()).collect();
    for subset in subsets(m, size) {
        let mut choice = vec![0usize; support.len()];
        loop {
            if assignment_works(y, gens, &subset, &support, &choice) {
                return true;
            }
            if !advance(&mut choice, subset.len()) {
                break;
            }
        }
    }
    false
}

fn subsets(m: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << m) {
        if mask.count_ones() as usize == size {
            out.push((0..m).filter(|&i| mask & (1 << i) != 0).collect());
        }
    }
    out
}

fn advance(choice: &mut [usize], base: usize) -> bool {
    for c in choice.iter_mut() {
        *c += 1;
        if *c < base {
            return true;
        }
        *c = 0;
    }
    false
}

fn assignment_works(
    y: &[Ext],
    gens: &[Vec<Ext>],
    subset: &[usize],
    support: &[usize],
    choice: &[usize],
) -> bool {
    let mut lambda: Vec<Ext> = vec![None; subset.len()];
    let mut fixed = vec![false; subset.len()];
    for (&k, &c) in support.iter().zip(choice) {
        let Some(gk) = &gens[subset[c]][k] else {
            return false;
        };
        let l = y[k].as_ref().unwrap() - gk;
        if fixed[c] && lambda[c].as_ref() != Some(&l) {
            return false;
        }
        lambda[c] = Some(l);
        fixed[c] = true;
    }
    // Unassigned generators may join with the largest coefficient that keeps
    // them below y, but only if it is finite and nonpositive; they matter
    // only for reaching max λ = 0.
    for (c, &i) in subset.iter().enumerate() {
        if fixed[c] {
            continue;
        }
        let mut cap: Option<Rational> = None;
        let mut possible = true;
        for (k, gk) in gens[i].iter().enumerate() {
            if let Some(gk) = gk {
                match &y[k] {
                    None => possible = false,
                    Some(yk) => {
                        let d = yk - gk;
                        cap = Some(cap.map_or(d.clone(), |c: Rational| c.min(d)));
                    }
                }
            }
        }
        if possible {
            lambda[c] = Some(cap.map_or(Rational::zero(), |c| c.min(Rational::zero())));
        }
    }
    for (c, &i) in subset.iter().enumerate() {
        let Some(l) = &lambda[c] else { continue };
        for (k, gk) in gens[i].iter().enumerate() {
            if let Some(gk) = gk {
                if !ext_leq(&Some(l + gk), &y[k]) {
                    return false;
                }
            }
        }
    }
    let top = lambda.iter().flatten().max();
    top == Some(&Rational::zero())
}

/// `max { y_k : A y ≤ b, y ≤ x }` by enumerating the vertices of the
/// polyhedron; `None` when it is empty.
pub fn lp_max_by_vertices(
    a: &[Vec<Rational>],
    b: &[Rational],
    x: &[Rational],
    k: usize,
) -> Option<Rational> {
    let n = x.len();
    let mut rows: Vec<Vec<Rational>> = a.to_vec();
    let mut rhs: Vec<Rational> = b.to_vec();
    for i in 0..n {
        let mut e = vec![Rational::zero(); n];
        e[i] = Rational::one();
        rows.push(e);
        rhs.push(x[i].clone());
    }
    let mut best: Option<Rational> = None;
    for subset in subsets(rows.len(), n) {
        let sa: Vec<Vec<Rational>> = subset.iter().map(|&i| rows[i].clone()).collect();
        let sb: Vec<Vec<Rational>> = subset.iter().map(|&i| vec![rhs[i].clone()]).collect();
        let Some(sol) = gauss(sa, sb) else { continue };
        let y: Vec<Rational> = sol.into_iter().map(|r| r[0].clone()).collect();
        let feasible = rows
            .iter()
            .zip(&rhs)
            .all(|(row, bi)| row.iter().zip(&y).map(|(p, q)| p * q).sum::<Rational>() <= *bi);
        if feasible && best.as_ref().is_none_or(|v| y[k] > *v) {
            best = Some(y[k].clone());
        }
    }
    best
}
