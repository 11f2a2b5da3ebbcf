//! Graph rewrites that bring a game graph into compliant form while keeping
//! the projection of its sub-fixed-point set, together with the coordinate
//! lifts ("witness maps") that send sub-fixed points of the source operator
//! to sub-fixed points of the rewritten one.
//!
//! A graph is compliant when every Random vertex has exactly two outgoing
//! edges, each of probability 1/2 and each heading to a Max vertex.

use std::collections::HashMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{
    absorption, random_absorption, validate_graph, Edge, EdgeId, EdgeLabel, Game, GameGraph,
    VertexId, VertexKind,
};
use crate::rational::{half, Rational};
use crate::trop::Trop;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WitnessKind {
    Zp,
    T1,
    T2,
    Pipeline,
}

/// Sends a point of the source coordinate space (source Min vertices in
/// order) to the coordinate space of the rewritten graph. The source
/// coordinates are kept as a prefix and new coordinates are appended.
#[derive(Clone, Debug)]
pub struct WitnessMap {
    kind: WitnessKind,
    source_dim: usize,
    new_coords: Vec<VertexId>,
    steps: Vec<LiftStep>,
}

#[derive(Clone, Debug)]
enum LiftStep {
    /// Appends `Σ p·x_i` per row.
    Linear(Vec<Vec<(usize, Rational)>>),
    /// Appends `Σ p_w·M_w(x) + Σ p_u·x_u` per row, with `M_w` the Max values
    /// of `game` at `x`.
    Expectation {
        game: Arc<Game>,
        rows: Vec<ExpectationRow>,
    },
}

#[derive(Clone, Debug)]
struct ExpectationRow {
    max: Vec<(usize, Rational)>,
    min: Vec<(usize, Rational)>,
}

/// The JSON summary of a witness map.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessSummary {
    pub kind: WitnessKind,
    pub new_coords: Vec<VertexId>,
}

fn linear_trop(row: &[(usize, Rational)], x: &[Trop], base: Rational) -> Trop {
    let mut acc = base;
    for (i, p) in row {
        match &x[*i] {
            Trop::Fin(v) => acc += p * v,
            Trop::NegInf => return Trop::NegInf,
        }
    }
    Trop::Fin(acc)
}

impl WitnessMap {
    fn identity(kind: WitnessKind, dim: usize) -> Self {
        WitnessMap {
            kind,
            source_dim: dim,
            new_coords: Vec::new(),
            steps: Vec::new(),
        }
    }

    pub fn kind(&self) -> WitnessKind {
        self.kind
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    pub fn target_dim(&self) -> usize {
        self.source_dim + self.new_coords.len()
    }

    /// Ids of the Min vertices whose coordinates the lift appends.
    pub fn new_coords(&self) -> &[VertexId] {
        &self.new_coords
    }

    pub fn summary(&self) -> WitnessSummary {
        WitnessSummary {
            kind: self.kind,
            new_coords: self.new_coords.clone(),
        }
    }

    /// Lift over `𝕋ⁿ`; coordinates fed by a `−∞` entry become `−∞`.
    pub fn lift_trop(&self, x: &[Trop]) -> Result<Vec<Trop>> {
        if x.len() != self.source_dim {
            return Err(Error::DimensionMismatch {
                expected: self.source_dim,
                got: x.len(),
            });
        }
        let mut out = x.to_vec();
        for step in &self.steps {
            match step {
                LiftStep::Linear(rows) => {
                    let new: Vec<Trop> = rows
                        .iter()
                        .map(|row| linear_trop(row, &out, Rational::zero()))
                        .collect();
                    out.extend(new);
                }
                LiftStep::Expectation { game, rows } => {
                    let values = game.max_values_trop(&out)?;
                    let new: Vec<Trop> = rows
                        .iter()
                        .map(
                            |row| match linear_trop(&row.max, &values, Rational::zero()) {
                                Trop::Fin(base) => linear_trop(&row.min, &out, base),
                                Trop::NegInf => Trop::NegInf,
                            },
                        )
                        .collect();
                    out.extend(new);
                }
            }
        }
        Ok(out)
    }

    pub fn lift(&self, x: &[Rational]) -> Result<Vec<Rational>> {
        let xt: Vec<Trop> = x.iter().cloned().map(Trop::Fin).collect();
        Ok(self
            .lift_trop(&xt)?
            .into_iter()
            .map(|t| match t {
                Trop::Fin(v) => v,
                Trop::NegInf => unreachable!("finite input lifts to finite output"),
            })
            .collect())
    }

    /// Drops the appended coordinates.
    pub fn project<T: Clone>(&self, x: &[T]) -> Vec<T> {
        x[..self.source_dim.min(x.len())].to_vec()
    }

    fn then(mut self, next: WitnessMap, kind: WitnessKind) -> WitnessMap {
        debug_assert_eq!(self.target_dim(), next.source_dim);
        self.kind = kind;
        self.new_coords.extend(next.new_coords);
        self.steps.extend(next.steps);
        self
    }
}

/// Mutable working copy used while rewriting.
struct Draft {
    min: Vec<VertexId>,
    max: Vec<VertexId>,
    random: Vec<VertexId>,
    edges: Vec<Edge>,
    next_vertex: VertexId,
    next_edge: EdgeId,
}

impl Draft {
    fn new(g: &GameGraph) -> Self {
        Draft {
            min: g.min_ids().to_vec(),
            max: g.max_ids().to_vec(),
            random: g.random_ids().to_vec(),
            edges: g.edges().to_vec(),
            next_vertex: g.max_vertex_id() + 1,
            next_edge: g.max_edge_id() + 1,
        }
    }

    fn vertex(&mut self) -> VertexId {
        let v = self.next_vertex;
        self.next_vertex += 1;
        v
    }

    fn edge_id(&mut self) -> EdgeId {
        let e = self.next_edge;
        self.next_edge += 1;
        e
    }

    fn out_indices(&self, v: VertexId) -> Vec<usize> {
        (0..self.edges.len())
            .filter(|&i| self.edges[i].tail == v)
            .collect()
    }

    fn finish(self) -> Result<GameGraph> {
        GameGraph::from_parts(self.min, self.max, self.random, self.edges)
    }
}

fn prob_of(e: &Edge) -> Rational {
    match &e.label {
        EdgeLabel::Prob(q) => q.clone(),
        EdgeLabel::Payoff(_) => unreachable!("random out-edges carry probabilities"),
    }
}

fn require_valid(g: &GameGraph) -> Result<()> {
    validate_graph(g).into_result()
}

/// Rewrites every Random vertex into a gadget whose outgoing edges all have
/// probability 1/2, without changing the distribution of the first Min or
/// Max vertex reached. Min vertices and their order are unchanged, so the
/// witness is the identity.
pub fn coin_flip_transform(g: &GameGraph) -> Result<(GameGraph, WitnessMap)> {
    require_valid(g)?;
    let mut d = Draft::new(g);
    remove_unit_randoms(&mut d);
    split_high_degree(&mut d);
    for v in d.random.clone() {
        let out = d.out_indices(v);
        debug_assert_eq!(out.len(), 2);
        if prob_of(&d.edges[out[0]]) != half() {
            binary_gadget(&mut d, v, out[0], out[1]);
        }
    }
    let dim = g.dim();
    Ok((d.finish()?, WitnessMap::identity(WitnessKind::Zp, dim)))
}

/// Removes Random vertices with a single outgoing edge, pointing their
/// incoming edges (labels unchanged) at its head.
fn remove_unit_randoms(d: &mut Draft) {
    loop {
        let Some((v, idx)) = d.random.iter().find_map(|&v| match d.out_indices(v)[..] {
            [i] => Some((v, i)),
            _ => None,
        }) else {
            return;
        };
        let head = d.edges[idx].head;
        d.edges.remove(idx);
        for e in &mut d.edges {
            if e.head == v {
                e.head = head;
            }
        }
        d.random.retain(|&r| r != v);
    }
}

/// Splits Random vertices of out-degree `k ≥ 3`: the first edge stays, the
/// rest move to a new Random vertex reached with the remaining probability.
fn split_high_degree(d: &mut Draft) {
    let mut pending = d.random.clone();
    while let Some(v) = pending.pop() {
        let out = d.out_indices(v);
        if out.len() < 3 {
            continue;
        }
        let rest = Rational::one() - prob_of(&d.edges[out[0]]);
        let u = d.vertex();
        d.random.push(u);
        for &i in &out[1..] {
            let q = prob_of(&d.edges[i]) / &rest;
            d.edges[i].tail = u;
            d.edges[i].label = EdgeLabel::Prob(q);
        }
        let id = d.edge_id();
        d.edges.push(Edge::prob(id, v, u, rest));
        pending.push(u);
    }
}

/// Replaces the two edges of `v` (to `w` with probability `a/b`, to `u`
/// with `(b−a)/b`) by a chain of fair coin flips. With `2^r ≤ b < 2^{r+1}`
/// the top row `T_0 = v, …, T_r` descends with probability 1/2 and falls to
/// the bottom row `B_t` otherwise; `B_t` sends each half to `w` (resp. `u`)
/// when bit `r−t` of `a` (resp. `b−a`) is set and back to `v` otherwise.
/// One round exits to `w` with probability `a/2^{r+2}` and to `u` with
/// `(b−a)/2^{r+2}`, so the exit distribution is unchanged.
fn binary_gadget(d: &mut Draft, v: VertexId, to_w: usize, to_u: usize) {
    let q = prob_of(&d.edges[to_w]);
    let (w, u) = (d.edges[to_w].head, d.edges[to_u].head);
    let a = q.numer().clone();
    let b = q.denom().clone();
    let c = &b - &a;
    let r = b.bits() as usize - 1;
    d.edges.retain(|e| e.tail != v);

    let mut top = vec![v];
    for _ in 0..r {
        let t = d.vertex();
        d.random.push(t);
        top.push(t);
    }
    let bottom: Vec<VertexId> = (0..=r)
        .map(|_| {
            let t = d.vertex();
            d.random.push(t);
            t
        })
        .collect();
    let half = half();
    let add = |d: &mut Draft, tail: VertexId, head: VertexId| {
        let id = d.edge_id();
        d.edges.push(Edge::prob(id, tail, head, half.clone()));
    };
    for t in 0..=r {
        let next = if t < r { top[t + 1] } else { v };
        add(d, top[t], next);
        add(d, top[t], bottom[t]);
        let bit = (r - t) as u64;
        add(d, bottom[t], if a.bit(bit) { w } else { v });
        add(d, bottom[t], if c.bit(bit) { u } else { v });
    }
}

/// Inserts a fresh Min vertex in the middle of every Max out-edge and a
/// fresh Max vertex in the middle of every edge entering an original Min
/// vertex. New coordinates are the inserted Min vertices, in Max-edge order;
/// the lift sets each to the expected Min coordinate reached by its edge.
pub fn first_transform(g: &GameGraph) -> Result<(GameGraph, WitnessMap)> {
    require_valid(g)?;
    let table = absorption(g)?;
    let mut d = Draft::new(g);
    let original_min = g.min_ids().to_vec();
    let mut new_coords = Vec::new();
    let mut rows = Vec::new();

    let max_edges: Vec<EdgeId> = g
        .max_ids()
        .iter()
        .flat_map(|&v| g.out_edges(v).map(|e| e.id))
        .collect();
    let slot: HashMap<EdgeId, usize> = d.edges.iter().enumerate().map(|(i, e)| (e.id, i)).collect();
    for id in max_edges {
        let m = d.vertex();
        d.min.push(m);
        new_coords.push(m);
        rows.push(
            table
                .row(id)
                .iter()
                .map(|(v, p)| (g.position(*v).expect("absorbed at a Min vertex"), p.clone()))
                .collect(),
        );
        let i = slot[&id];
        let head = d.edges[i].head;
        d.edges[i].head = m;
        let fresh = d.edge_id();
        d.edges.push(Edge::payoff(fresh, m, head, Rational::zero()));
    }

    for &u in &original_min {
        let incoming: Vec<usize> = (0..d.edges.len())
            .filter(|&i| d.edges[i].head == u)
            .collect();
        for i in incoming {
            let big = d.vertex();
            d.max.push(big);
            d.edges[i].head = big;
            let fresh = d.edge_id();
            d.edges.push(Edge::payoff(fresh, big, u, Rational::zero()));
        }
    }

    let witness = WitnessMap {
        kind: WitnessKind::T1,
        source_dim: g.dim(),
        new_coords,
        steps: vec![LiftStep::Linear(rows)],
    };
    Ok((d.finish()?, witness))
}

fn check_max_edges_hit_min(g: &GameGraph) -> Result<()> {
    for &w in g.max_ids() {
        if let Some(e) = g
            .out_edges(w)
            .find(|e| g.kind(e.head) != Some(VertexKind::Min))
        {
            return Err(Error::PreconditionViolated(format!(
                "Max out-edge {} does not lead to a Min vertex",
                e.id
            )));
        }
    }
    Ok(())
}

/// Replaces the Random→Random edge `a → b` by `a → M → N → b` with a new Max
/// vertex `M` (the edge keeps its id and probability) and a new Min vertex
/// `N`, both further edges with payoff 0. Requires every Max out-edge to
/// lead to a Min vertex. The lift sets `x_N` to the expected Max value at
/// the first Min or Max vertex reached from `b`.
pub fn second_transform(g: &GameGraph, edge: EdgeId) -> Result<(GameGraph, WitnessMap)> {
    require_valid(g)?;
    check_max_edges_hit_min(g)?;
    let game = Arc::new(Game::new(g.clone())?);
    let from_random = random_absorption(g)?;
    let mut d = Draft::new(g);
    let (n, row) = split_random_edge(&mut d, g, &from_random, edge)?;
    let witness = WitnessMap {
        kind: WitnessKind::T2,
        source_dim: g.dim(),
        new_coords: vec![n],
        steps: vec![LiftStep::Expectation {
            game,
            rows: vec![row],
        }],
    };
    Ok((d.finish()?, witness))
}

fn split_random_edge(
    d: &mut Draft,
    g: &GameGraph,
    from_random: &HashMap<VertexId, Vec<(VertexId, Rational)>>,
    edge: EdgeId,
) -> Result<(VertexId, ExpectationRow)> {
    let i = d
        .edges
        .iter()
        .position(|e| e.id == edge)
        .ok_or_else(|| Error::PreconditionViolated(format!("no edge {edge}")))?;
    let (a, b) = (d.edges[i].tail, d.edges[i].head);
    if g.kind(a) != Some(VertexKind::Random) || g.kind(b) != Some(VertexKind::Random) {
        return Err(Error::PreconditionViolated(format!(
            "edge {edge} does not join two Random vertices"
        )));
    }
    let big = d.vertex();
    let n = d.vertex();
    d.max.push(big);
    d.min.push(n);
    d.edges[i].head = big;
    let e1 = d.edge_id();
    d.edges.push(Edge::payoff(e1, big, n, Rational::zero()));
    let e2 = d.edge_id();
    d.edges.push(Edge::payoff(e2, n, b, Rational::zero()));

    let mut row = ExpectationRow {
        max: Vec::new(),
        min: Vec::new(),
    };
    for (v, p) in &from_random[&b] {
        let pos = g.position(*v).expect("absorbing vertex");
        match g.kind(*v) {
            Some(VertexKind::Max) => row.max.push((pos, p.clone())),
            _ => row.min.push((pos, p.clone())),
        }
    }
    Ok((n, row))
}

/// Ids of the edges joining two Random vertices, in edge order.
pub fn random_random_edges(g: &GameGraph) -> Vec<EdgeId> {
    g.edges()
        .iter()
        .filter(|e| {
            g.kind(e.tail) == Some(VertexKind::Random) && g.kind(e.head) == Some(VertexKind::Random)
        })
        .map(|e| e.id)
        .collect()
}

/// Coin-flip normalization, then Min/Max interleaving, then the split of
/// every Random→Random edge. The output is compliant.
pub fn pipeline(g: &GameGraph) -> Result<(GameGraph, WitnessMap)> {
    let (g0, w0) = coin_flip_transform(g)?;
    let (g1, w1) = first_transform(&g0)?;
    let game = Arc::new(Game::new(g1.clone())?);
    let from_random = random_absorption(&g1)?;
    let mut d = Draft::new(&g1);
    let mut new_coords = Vec::new();
    let mut rows = Vec::new();
    for edge in random_random_edges(&g1) {
        let (n, row) = split_random_edge(&mut d, &g1, &from_random, edge)?;
        new_coords.push(n);
        rows.push(row);
    }
    let w2 = WitnessMap {
        kind: WitnessKind::T2,
        source_dim: g1.dim(),
        new_coords,
        steps: vec![LiftStep::Expectation { game, rows }],
    };
    let out = d.finish()?;
    let witness = w0
        .then(w1, WitnessKind::Pipeline)
        .then(w2, WitnessKind::Pipeline);
    Ok((out, witness))
}

/// Checks that every Random vertex has two probability-1/2 edges into Max.
pub fn check_compliant(g: &GameGraph) -> Result<()> {
    for &v in g.random_ids() {
        let out: Vec<&Edge> = g.out_edges(v).collect();
        if out.len() != 2 {
            return Err(Error::NotCompliant(format!(
                "random vertex {v} has {} outgoing edges",
                out.len()
            )));
        }
        for e in out {
            if e.label != EdgeLabel::Prob(half()) {
                return Err(Error::NotCompliant(format!(
                    "edge {} is not a fair coin",
                    e.id
                )));
            }
            if g.kind(e.head) != Some(VertexKind::Max) {
                return Err(Error::NotCompliant(format!(
                    "edge {} leaves random vertex {v} towards a non-Max vertex",
                    e.id
                )));
            }
        }
    }
    Ok(())
}
