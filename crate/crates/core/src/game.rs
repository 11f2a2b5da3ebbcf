//! Min/Random/Max game graphs, their absorbing Markov chain, and the
//! monotone homogeneous operator they encode.
//!
//! The operator of a graph with Min vertices `[n]` and Max vertices `[m]` is
//!
//! ```text
//! F(x)_v = min_{e ∈ Out(v)} ( r_e + Σ_w p^e_w · max_{e' ∈ Out(w)} ( r_e' + Σ_u p^e'_u · x_u ) )
//! ```
//!
//! where `p^e_v` is the probability that the chain started at the head of `e`
//! is absorbed in the Min or Max vertex `v`.

use std::collections::{hash_map::Entry, HashMap, HashSet, VecDeque};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;
use crate::rational::{self, Rational};
use crate::trop::Trop;

pub type VertexId = u32;
pub type EdgeId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexKind {
    Min,
    Max,
    Random,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EdgeLabel {
    /// Payoff `r_e` on an edge leaving a Min or Max vertex.
    Payoff(Rational),
    /// Probability `q_e` on an edge leaving a Random vertex.
    Prob(Rational),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub id: EdgeId,
    pub tail: VertexId,
    pub head: VertexId,
    pub label: EdgeLabel,
}

impl Edge {
    pub fn payoff(id: EdgeId, tail: VertexId, head: VertexId, r: Rational) -> Self {
        Edge {
            id,
            tail,
            head,
            label: EdgeLabel::Payoff(r),
        }
    }

    pub fn prob(id: EdgeId, tail: VertexId, head: VertexId, q: Rational) -> Self {
        Edge {
            id,
            tail,
            head,
            label: EdgeLabel::Prob(q),
        }
    }
}

/// A directed game graph. Min vertices are the coordinates of the encoded
/// operator, in the order of [`GameGraph::min_ids`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameGraph {
    min: Vec<VertexId>,
    max: Vec<VertexId>,
    random: Vec<VertexId>,
    edges: Vec<Edge>,
    comment: Option<String>,
    index: Index,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
struct Index {
    slot: HashMap<VertexId, (VertexKind, usize)>,
    edge_slot: HashMap<EdgeId, usize>,
    out: HashMap<VertexId, Vec<usize>>,
    inc: HashMap<VertexId, Vec<usize>>,
}

impl GameGraph {
    /// Assembles a graph, checking only structural integrity (distinct ids,
    /// known endpoints). Semantic checks live in [`validate_graph`].
    pub fn from_parts(
        min: Vec<VertexId>,
        max: Vec<VertexId>,
        random: Vec<VertexId>,
        edges: Vec<Edge>,
    ) -> Result<Self> {
        let mut index = Index::default();
        for (kind, ids) in [
            (VertexKind::Min, &min),
            (VertexKind::Max, &max),
            (VertexKind::Random, &random),
        ] {
            for (pos, &id) in ids.iter().enumerate() {
                if index.slot.insert(id, (kind, pos)).is_some() {
                    return Err(Error::Parse(format!("duplicate vertex id {id}")));
                }
                index.out.insert(id, Vec::new());
                index.inc.insert(id, Vec::new());
            }
        }
        for (i, e) in edges.iter().enumerate() {
            if index.edge_slot.insert(e.id, i).is_some() {
                return Err(Error::Parse(format!("duplicate edge id {}", e.id)));
            }
            let Some(out) = index.out.get_mut(&e.tail) else {
                return Err(Error::Parse(format!(
                    "edge {} has unknown tail {}",
                    e.id, e.tail
                )));
            };
            out.push(i);
            let Some(inc) = index.inc.get_mut(&e.head) else {
                return Err(Error::Parse(format!(
                    "edge {} has unknown head {}",
                    e.id, e.head
                )));
            };
            inc.push(i);
        }
        Ok(GameGraph {
            min,
            max,
            random,
            edges,
            comment: None,
            index,
        })
    }

    pub fn with_comment(mut self, comment: impl Into<String>) -> Self {
        self.comment = Some(comment.into());
        self
    }

    pub fn comment(&self) -> Option<&str> {
        self.comment.as_deref()
    }

    pub fn min_ids(&self) -> &[VertexId] {
        &self.min
    }

    pub fn max_ids(&self) -> &[VertexId] {
        &self.max
    }

    pub fn random_ids(&self) -> &[VertexId] {
        &self.random
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Number of Min vertices, i.e. the dimension of the operator.
    pub fn dim(&self) -> usize {
        self.min.len()
    }

    pub fn kind(&self, v: VertexId) -> Option<VertexKind> {
        self.index.slot.get(&v).map(|s| s.0)
    }

    /// Position of `v` within its class list.
    pub fn position(&self, v: VertexId) -> Option<usize> {
        self.index.slot.get(&v).map(|s| s.1)
    }

    pub fn edge(&self, id: EdgeId) -> Option<&Edge> {
        self.index.edge_slot.get(&id).map(|&i| &self.edges[i])
    }

    pub fn out_edges(&self, v: VertexId) -> impl Iterator<Item = &Edge> + '_ {
        self.index
            .out
            .get(&v)
            .into_iter()
            .flatten()
            .map(|&i| &self.edges[i])
    }

    pub fn in_edges(&self, v: VertexId) -> impl Iterator<Item = &Edge> + '_ {
        self.index
            .inc
            .get(&v)
            .into_iter()
            .flatten()
            .map(|&i| &self.edges[i])
    }

    pub fn out_degree(&self, v: VertexId) -> usize {
        self.index.out.get(&v).map_or(0, Vec::len)
    }

    /// Largest vertex id in use (0 for an empty graph).
    pub fn max_vertex_id(&self) -> VertexId {
        self.min
            .iter()
            .chain(&self.max)
            .chain(&self.random)
            .copied()
            .max()
            .unwrap_or(0)
    }

    pub fn max_edge_id(&self) -> EdgeId {
        self.edges.iter().map(|e| e.id).max().unwrap_or(0)
    }

    fn is_absorbing(&self, v: VertexId) -> bool {
        matches!(self.kind(v), Some(VertexKind::Min | VertexKind::Max))
    }
}

#[derive(Serialize, Deserialize)]
struct EdgeRepr {
    id: EdgeId,
    tail: VertexId,
    head: VertexId,
    #[serde(with = "rational::opt", default)]
    payoff: Option<Rational>,
    #[serde(with = "rational::opt", default)]
    prob: Option<Rational>,
}

#[derive(Serialize, Deserialize)]
struct GraphRepr {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    comment: Option<String>,
    min: Vec<VertexId>,
    max: Vec<VertexId>,
    random: Vec<VertexId>,
    edges: Vec<EdgeRepr>,
}

impl Serialize for GameGraph {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        GraphRepr {
            comment: self.comment.clone(),
            min: self.min.clone(),
            max: self.max.clone(),
            random: self.random.clone(),
            edges: self
                .edges
                .iter()
                .map(|e| {
                    let (payoff, prob) = match &e.label {
                        EdgeLabel::Payoff(r) => (Some(r.clone()), None),
                        EdgeLabel::Prob(q) => (None, Some(q.clone())),
                    };
                    EdgeRepr {
                        id: e.id,
                        tail: e.tail,
                        head: e.head,
                        payoff,
                        prob,
                    }
                })
                .collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for GameGraph {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = GraphRepr::deserialize(d)?;
        let edges = repr
            .edges
            .into_iter()
            .map(|e| {
                let label = match (e.payoff, e.prob) {
                    (Some(r), None) => EdgeLabel::Payoff(r),
                    (None, Some(q)) => EdgeLabel::Prob(q),
                    _ => {
                        return Err(serde::de::Error::custom(format!(
                            "edge {}: exactly one of payoff/prob must be set",
                            e.id
                        )))
                    }
                };
                Ok(Edge {
                    id: e.id,
                    tail: e.tail,
                    head: e.head,
                    label,
                })
            })
            .collect::<std::result::Result<Vec<_>, D::Error>>()?;
        let g = GameGraph::from_parts(repr.min, repr.max, repr.random, edges)
            .map_err(serde::de::Error::custom)?;
        Ok(match repr.comment {
            Some(c) => g.with_comment(c),
            None => g,
        })
    }
}

/// Outcome of [`validate_graph`]; one flag per requirement.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub players_nonempty: bool,
    pub out_degree: bool,
    pub labels: bool,
    pub probability_sums: bool,
    /// Every path between two Min vertices meets a Max vertex.
    pub min_paths_meet_max: bool,
    /// Every path between two Max vertices meets a Min vertex.
    pub max_paths_meet_min: bool,
    /// Every Random vertex reaches a Min or Max vertex.
    pub random_escapes: bool,
    pub failures: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.players_nonempty
            && self.out_degree
            && self.labels
            && self.probability_sums
            && self.min_paths_meet_max
            && self.max_paths_meet_min
            && self.random_escapes
    }

    pub fn into_result(self) -> Result<()> {
        if self.passed() {
            Ok(())
        } else {
            Err(Error::ValidationFailed(self.failures.join("; ")))
        }
    }
}

pub fn validate_graph(g: &GameGraph) -> ValidationReport {
    let mut failures = Vec::new();

    let players_nonempty = !g.min.is_empty() && !g.max.is_empty();
    if !players_nonempty {
        failures.push("graph needs at least one Min and one Max vertex".to_string());
    }

    let all: Vec<VertexId> = g
        .min
        .iter()
        .chain(&g.max)
        .chain(&g.random)
        .copied()
        .collect();
    let mut out_degree = true;
    for &v in &all {
        if g.out_degree(v) == 0 {
            out_degree = false;
            failures.push(format!("vertex {v} has no outgoing edge"));
        }
    }

    let mut labels = true;
    for e in &g.edges {
        let ok = match (g.kind(e.tail), &e.label) {
            (Some(VertexKind::Random), EdgeLabel::Prob(q)) => q.is_positive(),
            (Some(VertexKind::Min | VertexKind::Max), EdgeLabel::Payoff(_)) => true,
            _ => false,
        };
        if !ok {
            labels = false;
            failures.push(format!("edge {} carries the wrong kind of label", e.id));
        }
    }

    let mut probability_sums = true;
    for &v in &g.random {
        let total: Rational = g
            .out_edges(v)
            .filter_map(|e| match &e.label {
                EdgeLabel::Prob(q) => Some(q.clone()),
                EdgeLabel::Payoff(_) => None,
            })
            .sum();
        if !total.is_one() {
            probability_sums = false;
            failures.push(format!(
                "random vertex {v} has outgoing probabilities summing to {}",
                rational::format_rational(&total)
            ));
        }
    }

    let min_paths_meet_max =
        paths_blocked(g, &g.min, VertexKind::Min, VertexKind::Max, &mut failures);
    let max_paths_meet_min =
        paths_blocked(g, &g.max, VertexKind::Max, VertexKind::Min, &mut failures);

    let mut random_escapes = true;
    for &r in &g.random {
        if !reaches_absorbing(g, r) {
            random_escapes = false;
            failures.push(format!(
                "random vertex {r} cannot reach a Min or Max vertex"
            ));
        }
    }

    ValidationReport {
        players_nonempty,
        out_degree,
        labels,
        probability_sums,
        min_paths_meet_max,
        max_paths_meet_min,
        random_escapes,
        failures,
    }
}

/// Searches, from each vertex of class `own`, the graph with `blocker`
/// vertices deleted for another vertex of class `own`.
fn paths_blocked(
    g: &GameGraph,
    sources: &[VertexId],
    own: VertexKind,
    blocker: VertexKind,
    failures: &mut Vec<String>,
) -> bool {
    let mut ok = true;
    for &s in sources {
        let mut seen = HashSet::new();
        let mut queue: VecDeque<VertexId> = g.out_edges(s).map(|e| e.head).collect();
        while let Some(v) = queue.pop_front() {
            if !seen.insert(v) {
                continue;
            }
            match g.kind(v) {
                Some(k) if k == blocker => continue,
                Some(k) if k == own => {
                    ok = false;
                    failures.push(format!(
                        "path from {own:?} vertex {s} to {own:?} vertex {v} avoids every {blocker:?} vertex"
                    ));
                    break;
                }
                _ => queue.extend(g.out_edges(v).map(|e| e.head)),
            }
        }
    }
    ok
}

fn reaches_absorbing(g: &GameGraph, start: VertexId) -> bool {
    let mut seen = HashSet::new();
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        if !seen.insert(v) {
            continue;
        }
        if g.is_absorbing(v) {
            return true;
        }
        queue.extend(g.out_edges(v).map(|e| e.head));
    }
    false
}

/// Exact absorption probabilities `p^e_v` for every edge `e` and every Min or
/// Max vertex `v`, stored sparsely.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbsorptionTable {
    rows: HashMap<EdgeId, Vec<(VertexId, Rational)>>,
}

impl AbsorptionTable {
    /// `p^e_v`; zero when `v` is not reachable.
    pub fn prob(&self, e: EdgeId, v: VertexId) -> Rational {
        self.row(e)
            .iter()
            .find(|(w, _)| *w == v)
            .map_or_else(Rational::zero, |(_, p)| p.clone())
    }

    /// The nonzero entries of `p^e_·`, sorted by vertex id.
    pub fn row(&self, e: EdgeId) -> &[(VertexId, Rational)] {
        self.rows.get(&e).map_or(&[], Vec::as_slice)
    }
}

/// Absorption distribution from every Random vertex, solved exactly one
/// weakly connected block of the Random subgraph at a time.
pub fn random_absorption(g: &GameGraph) -> Result<HashMap<VertexId, Vec<(VertexId, Rational)>>> {
    absorbing_chain(g, |v| g.is_absorbing(v), &g.random)
}

/// Solves the absorbing chain whose transient states are `transient` and
/// whose absorbing states are those satisfying `is_target`. Edges into a
/// vertex that is neither is an error.
pub fn absorbing_chain(
    g: &GameGraph,
    is_target: impl Fn(VertexId) -> bool,
    transient: &[VertexId],
) -> Result<HashMap<VertexId, Vec<(VertexId, Rational)>>> {
    let position: HashMap<VertexId, usize> =
        transient.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut parent: Vec<usize> = (0..transient.len()).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for (i, &v) in transient.iter().enumerate() {
        for e in g.out_edges(v) {
            if let Some(&j) = position.get(&e.head) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a] = b;
            }
        }
    }
    let mut blocks: HashMap<usize, Vec<usize>> = HashMap::new();
    for i in 0..transient.len() {
        let root = find(&mut parent, i);
        blocks.entry(root).or_default().push(i);
    }
    let mut blocks: Vec<Vec<usize>> = blocks.into_values().collect();
    blocks.sort();

    let mut result = HashMap::new();
    for block in blocks {
        let local: HashMap<VertexId, usize> = block
            .iter()
            .enumerate()
            .map(|(k, &i)| (transient[i], k))
            .collect();
        let mut targets: Vec<VertexId> = Vec::new();
        let mut target_col: HashMap<VertexId, usize> = HashMap::new();
        let size = block.len();
        let mut a = vec![vec![Rational::zero(); size]; size];
        let mut rhs_entries: Vec<(usize, VertexId, Rational)> = Vec::new();
        for (k, &i) in block.iter().enumerate() {
            a[k][k] += Rational::one();
            for e in g.out_edges(transient[i]) {
                let q = match &e.label {
                    EdgeLabel::Prob(q) => q.clone(),
                    EdgeLabel::Payoff(_) => {
                        return Err(Error::ValidationFailed(format!(
                            "edge {} leaves a Random vertex without a probability",
                            e.id
                        )))
                    }
                };
                if let Some(&j) = local.get(&e.head) {
                    a[k][j] -= q;
                } else if is_target(e.head) {
                    if let Entry::Vacant(slot) = target_col.entry(e.head) {
                        slot.insert(targets.len());
                        targets.push(e.head);
                    }
                    rhs_entries.push((k, e.head, q));
                } else {
                    return Err(Error::ValidationFailed(format!(
                        "edge {} leads outside the chain",
                        e.id
                    )));
                }
            }
        }
        let mut b = vec![vec![Rational::zero(); targets.len()]; size];
        for (k, t, q) in rhs_entries {
            b[k][target_col[&t]] += q;
        }
        let x = linalg::solve(a, b).map_err(|_| {
            Error::SingularSystem(format!(
                "random vertices {:?} never reach an absorbing vertex",
                block.iter().map(|&i| transient[i]).collect::<Vec<_>>()
            ))
        })?;
        for (k, &i) in block.iter().enumerate() {
            let mut row: Vec<(VertexId, Rational)> = targets
                .iter()
                .enumerate()
                .filter(|(c, _)| !x[k][*c].is_zero())
                .map(|(c, &t)| (t, x[k][c].clone()))
                .collect();
            row.sort_by_key(|(t, _)| *t);
            result.insert(transient[i], row);
        }
    }
    Ok(result)
}

pub fn absorption(g: &GameGraph) -> Result<AbsorptionTable> {
    let from_random = random_absorption(g)?;
    let rows = g
        .edges
        .iter()
        .map(|e| {
            let row = if g.is_absorbing(e.head) {
                vec![(e.head, Rational::one())]
            } else {
                from_random.get(&e.head).cloned().unwrap_or_default()
            };
            (e.id, row)
        })
        .collect();
    Ok(AbsorptionTable { rows })
}

#[derive(Clone, Debug)]
struct Move {
    payoff: Rational,
    /// (position of the absorbing vertex in its class, probability)
    dist: Vec<(usize, Rational)>,
}

/// A validated graph together with its absorption table and the operator
/// structure derived from it. Immutable once built.
#[derive(Clone, Debug)]
pub struct Game {
    graph: GameGraph,
    table: AbsorptionTable,
    min_moves: Vec<Vec<Move>>,
    max_moves: Vec<Vec<Move>>,
}

impl Game {
    pub fn new(graph: GameGraph) -> Result<Self> {
        validate_graph(&graph).into_result()?;
        let table = absorption(&graph)?;
        let moves = |owner: &[VertexId], target: VertexKind| -> Vec<Vec<Move>> {
            owner
                .iter()
                .map(|&v| {
                    graph
                        .out_edges(v)
                        .map(|e| Move {
                            payoff: match &e.label {
                                EdgeLabel::Payoff(r) => r.clone(),
                                EdgeLabel::Prob(_) => unreachable!("validated labels"),
                            },
                            dist: table
                                .row(e.id)
                                .iter()
                                .filter(|(w, _)| graph.kind(*w) == Some(target))
                                .map(|(w, p)| (graph.position(*w).unwrap(), p.clone()))
                                .collect(),
                        })
                        .collect()
                })
                .collect()
        };
        let min_moves = moves(&graph.min, VertexKind::Max);
        let max_moves = moves(&graph.max, VertexKind::Min);
        Ok(Game {
            graph,
            table,
            min_moves,
            max_moves,
        })
    }

    pub fn graph(&self) -> &GameGraph {
        &self.graph
    }

    pub fn absorption(&self) -> &AbsorptionTable {
        &self.table
    }

    pub fn dim(&self) -> usize {
        self.graph.dim()
    }

    /// Values `max_{e' ∈ Out(w)} (r_e' + Σ_u p^e'_u x_u)` of the Max vertices.
    pub fn max_values(&self, x: &[Rational]) -> Result<Vec<Rational>> {
        self.check_dim(x.len())?;
        Ok(self
            .max_moves
            .iter()
            .map(|moves| {
                moves
                    .iter()
                    .map(|mv| expectation(mv, x))
                    .max()
                    .expect("validated out-degree")
            })
            .collect())
    }

    /// The encoded operator `F(x)`.
    pub fn eval(&self, x: &[Rational]) -> Result<Vec<Rational>> {
        let values = self.max_values(x)?;
        Ok(self
            .min_moves
            .iter()
            .map(|moves| {
                moves
                    .iter()
                    .map(|mv| expectation(mv, &values))
                    .min()
                    .expect("validated out-degree")
            })
            .collect())
    }

    /// `x ≤ F(x)` coordinatewise.
    pub fn subfixed(&self, x: &[Rational]) -> Result<bool> {
        let fx = self.eval(x)?;
        Ok(x.iter().zip(&fx).all(|(a, b)| a <= b))
    }

    /// [`Game::max_values`] extended to `𝕋ⁿ`: any `−∞` reached with positive
    /// probability makes the expectation `−∞`.
    pub fn max_values_trop(&self, x: &[Trop]) -> Result<Vec<Trop>> {
        self.check_dim(x.len())?;
        Ok(self
            .max_moves
            .iter()
            .map(|moves| {
                moves
                    .iter()
                    .map(|mv| expectation_trop(mv, x))
                    .max()
                    .expect("validated out-degree")
            })
            .collect())
    }

    pub fn eval_trop(&self, x: &[Trop]) -> Result<Vec<Trop>> {
        let values = self.max_values_trop(x)?;
        Ok(self
            .min_moves
            .iter()
            .map(|moves| {
                moves
                    .iter()
                    .map(|mv| expectation_trop(mv, &values))
                    .min()
                    .expect("validated out-degree")
            })
            .collect())
    }

    pub fn subfixed_trop(&self, x: &[Trop]) -> Result<bool> {
        let fx = self.eval_trop(x)?;
        Ok(x.iter().zip(&fx).all(|(a, b)| a <= b))
    }

    fn check_dim(&self, got: usize) -> Result<()> {
        if got == self.dim() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.dim(),
                got,
            })
        }
    }
}

fn expectation(mv: &Move, values: &[Rational]) -> Rational {
    mv.dist
        .iter()
        .fold(mv.payoff.clone(), |acc, (i, p)| acc + p * &values[*i])
}

fn expectation_trop(mv: &Move, values: &[Trop]) -> Trop {
    let mut acc = mv.payoff.clone();
    for (i, p) in &mv.dist {
        match &values[*i] {
            Trop::Fin(v) => acc += p * v,
            Trop::NegInf => return Trop::NegInf,
        }
    }
    Trop::Fin(acc)
}

pub fn eval_operator(game: &Game, x: &[Rational]) -> Result<Vec<Rational>> {
    game.eval(x)
}

pub fn subfixed(game: &Game, x: &[Rational]) -> Result<bool> {
    game.subfixed(x)
}

/// The stochastic min-max form
/// `F_k(x) = min_{i ∈ [M_k]} max_{s ∈ S_ki} (A^(s)_k x + b^(s)_k)`.
///
/// Indices in `selections` are 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MinMaxOperator {
    pub n: usize,
    #[serde(rename = "A", with = "rational::matrices")]
    pub matrices: Vec<Vec<Vec<Rational>>>,
    #[serde(rename = "b", with = "rational::matrix")]
    pub payoffs: Vec<Vec<Rational>>,
    /// `selections[k][i]` is `S_ki`.
    #[serde(rename = "S")]
    pub selections: Vec<Vec<Vec<usize>>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StochasticReport {
    pub nonnegative: bool,
    pub unit_row_sums: bool,
    pub failures: Vec<String>,
}

impl StochasticReport {
    pub fn passed(&self) -> bool {
        self.nonnegative && self.unit_row_sums
    }
}

impl MinMaxOperator {
    /// Checks shapes and index ranges; stochasticity is reported separately.
    pub fn check_shape(&self) -> Result<()> {
        let p = self.matrices.len();
        let bad = |msg: String| Err(Error::Parse(msg));
        if self.payoffs.len() != p {
            return bad(format!(
                "{p} matrices but {} payoff vectors",
                self.payoffs.len()
            ));
        }
        for (s, (a, b)) in self.matrices.iter().zip(&self.payoffs).enumerate() {
            if a.len() != self.n || a.iter().any(|row| row.len() != self.n) || b.len() != self.n {
                return bad(format!("matrix or payoff {s} is not of size {}", self.n));
            }
        }
        if self.selections.len() != self.n {
            return bad(format!("expected {} selection lists", self.n));
        }
        for (k, sets) in self.selections.iter().enumerate() {
            if sets.is_empty() {
                return bad(format!("coordinate {k} has no selection sets"));
            }
            for set in sets {
                if set.is_empty() || set.iter().any(|&s| s >= p) {
                    return bad(format!("coordinate {k} has an empty or out-of-range set"));
                }
            }
        }
        Ok(())
    }

    pub fn check_stochastic(&self) -> StochasticReport {
        let mut failures = Vec::new();
        let mut nonnegative = true;
        let mut unit_row_sums = true;
        for (s, a) in self.matrices.iter().enumerate() {
            for (k, row) in a.iter().enumerate() {
                if row.iter().any(|v| v.is_negative()) {
                    nonnegative = false;
                    failures.push(format!("A^({s}) row {k} has a negative entry"));
                }
                let total: Rational = row.iter().sum();
                if !total.is_one() {
                    unit_row_sums = false;
                    failures.push(format!(
                        "A^({s}) row {k} sums to {}",
                        rational::format_rational(&total)
                    ));
                }
            }
        }
        StochasticReport {
            nonnegative,
            unit_row_sums,
            failures,
        }
    }

    pub fn eval(&self, x: &[Rational]) -> Result<Vec<Rational>> {
        if x.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok((0..self.n)
            .map(|k| {
                self.selections[k]
                    .iter()
                    .map(|set| {
                        set.iter()
                            .map(|&s| {
                                self.matrices[s][k]
                                    .iter()
                                    .zip(x)
                                    .fold(self.payoffs[s][k].clone(), |acc, (a, xi)| acc + a * xi)
                            })
                            .max()
                            .expect("nonempty selection")
                    })
                    .min()
                    .expect("nonempty selection list")
            })
            .collect())
    }
}

pub fn check_stochastic(op: &MinMaxOperator) -> StochasticReport {
    op.check_stochastic()
}

pub fn minmax_eval(op: &MinMaxOperator, x: &[Rational]) -> Result<Vec<Rational>> {
    op.check_shape()?;
    op.eval(x)
}

/// Builds the graph encoding `op`: Min vertex `k` (id `k+1`) moves to one Max
/// vertex per selection set `S_ki` at payoff 0; that Max vertex moves, at
/// payoff `b^(s)_k`, to a Random vertex distributing along row `A^(s)_k`.
/// Rows with a single nonzero entry skip the Random vertex and point
/// directly at the Min vertex.
pub fn graph_from_minmax(op: &MinMaxOperator) -> Result<GameGraph> {
    op.check_shape()?;
    let report = op.check_stochastic();
    if !report.passed() {
        return Err(Error::NonStochastic(report.failures.join("; ")));
    }
    let n = op.n as VertexId;
    let min: Vec<VertexId> = (1..=n).collect();
    let mut next_vertex = n + 1;
    let mut next_edge: EdgeId = 1;
    let mut fresh_edge = || {
        let id = next_edge;
        next_edge += 1;
        id
    };
    let mut max = Vec::new();
    let mut random = Vec::new();
    let mut random_edges = Vec::new();
    let mut edges = Vec::new();
    for k in 0..op.n {
        for set in &op.selections[k] {
            let w = next_vertex;
            next_vertex += 1;
            max.push(w);
            edges.push(Edge::payoff(
                fresh_edge(),
                k as VertexId + 1,
                w,
                Rational::zero(),
            ));
            for &s in set {
                let row = &op.matrices[s][k];
                let support: Vec<usize> = (0..op.n).filter(|&l| !row[l].is_zero()).collect();
                let payoff = op.payoffs[s][k].clone();
                if let [l] = support[..] {
                    edges.push(Edge::payoff(fresh_edge(), w, l as VertexId + 1, payoff));
                    continue;
                }
                let r = next_vertex;
                next_vertex += 1;
                random.push(r);
                edges.push(Edge::payoff(fresh_edge(), w, r, payoff));
                for l in support {
                    random_edges.push((r, l, row[l].clone()));
                }
            }
        }
    }
    for (r, l, q) in random_edges {
        edges.push(Edge::prob(fresh_edge(), r, l as VertexId + 1, q));
    }
    GameGraph::from_parts(min, max, random, edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rational::{int, rat};

    #[test]
    fn example_graph_validates() {
        let g = fixtures::example_graph();
        let report = validate_graph(&g);
        assert!(report.passed(), "{:?}", report.failures);
    }

    #[test]
    fn min_to_min_edge_fails_item_a() {
        let g = GameGraph::from_parts(
            vec![1, 2],
            vec![3],
            vec![],
            vec![
                Edge::payoff(1, 1, 2, int(0)),
                Edge::payoff(2, 2, 3, int(0)),
                Edge::payoff(3, 3, 1, int(0)),
            ],
        )
        .unwrap();
        let report = validate_graph(&g);
        assert!(!report.min_paths_meet_max);
        assert!(report.max_paths_meet_min);
        assert!(!report.passed());
    }

    #[test]
    fn half_probability_mass_fails() {
        let g = GameGraph::from_parts(
            vec![1],
            vec![2],
            vec![3],
            vec![
                Edge::payoff(1, 1, 3, int(0)),
                Edge::prob(2, 3, 2, rat(1, 2)),
                Edge::payoff(3, 2, 1, int(0)),
            ],
        )
        .unwrap();
        let report = validate_graph(&g);
        assert!(!report.probability_sums);
        assert!(report.min_paths_meet_max);
    }

    #[test]
    fn trapped_random_vertex_is_singular() {
        let g = GameGraph::from_parts(
            vec![1],
            vec![2],
            vec![3, 4],
            vec![
                Edge::payoff(1, 1, 2, int(0)),
                Edge::payoff(2, 2, 1, int(0)),
                Edge::prob(3, 3, 4, int(1)),
                Edge::prob(4, 4, 3, int(1)),
            ],
        )
        .unwrap();
        assert!(!validate_graph(&g).random_escapes);
        assert!(matches!(absorption(&g), Err(Error::SingularSystem(_))));
    }

    #[test]
    fn example_absorption_labels() {
        let g = fixtures::example_graph();
        let t = absorption(&g).unwrap();
        // Max 2 (id 6) moves into the random vertex with payoff 3/4.
        let into_diamond = g
            .out_edges(6)
            .find(|e| g.kind(e.head) == Some(VertexKind::Random))
            .unwrap();
        assert_eq!(t.prob(into_diamond.id, 1), rat(1, 4));
        assert_eq!(t.prob(into_diamond.id, 3), rat(3, 4));
        assert_eq!(t.prob(into_diamond.id, 2), int(0));
        let into_max = g.out_edges(1).next().unwrap();
        assert_eq!(t.prob(into_max.id, into_max.head), int(1));
    }

    #[test]
    fn example_operator_at_zero() {
        let game = Game::new(fixtures::example_graph()).unwrap();
        let zero = vec![int(0); 3];
        assert_eq!(
            game.eval(&zero).unwrap(),
            vec![rat(4, 3), fixtures::two_pi(), int(0)]
        );
        assert!(game.subfixed(&zero).unwrap());
        assert!(!game.subfixed(&[int(2), int(0), int(0)]).unwrap());
        assert!(game.subfixed(&[int(-3), int(0), int(0)]).unwrap());
        assert!(matches!(
            game.eval(&[int(0)]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn tropical_evaluation_extends_the_real_one() {
        let game = Game::new(fixtures::example_graph()).unwrap();
        let x = vec![rat(1, 2), int(-3), rat(7, 5)];
        let xt: Vec<Trop> = x.iter().cloned().map(Trop::Fin).collect();
        let fx: Vec<Trop> = game.eval(&x).unwrap().into_iter().map(Trop::Fin).collect();
        assert_eq!(game.eval_trop(&xt).unwrap(), fx);
        let bottom = vec![Trop::NegInf; 3];
        assert_eq!(game.eval_trop(&bottom).unwrap(), bottom);
        assert!(game.subfixed_trop(&bottom).unwrap());
        // Min 3 can only reach Max 3, which may move to Min 2.
        let only_two = vec![Trop::NegInf, Trop::Fin(int(0)), Trop::NegInf];
        assert_eq!(game.eval_trop(&only_two).unwrap()[2], Trop::Fin(int(0)));
    }

    #[test]
    fn example_graph_is_built_from_the_operator() {
        let op = fixtures::example_operator();
        assert!(op.check_stochastic().passed());
        let g = graph_from_minmax(&op).unwrap();
        assert_eq!(g.edges(), fixtures::example_graph().edges());
        assert_eq!(g.random_ids().len(), 2);
        let x = vec![rat(1, 2), int(-3), rat(7, 5)];
        let game = Game::new(g).unwrap();
        assert_eq!(game.eval(&x).unwrap(), minmax_eval(&op, &x).unwrap());
    }

    #[test]
    fn identity_operator_graph() {
        let op = MinMaxOperator {
            n: 2,
            matrices: vec![vec![vec![int(1), int(0)], vec![int(0), int(1)]]],
            payoffs: vec![vec![int(0), int(0)]],
            selections: vec![vec![vec![0]], vec![vec![0]]],
        };
        let g = graph_from_minmax(&op).unwrap();
        assert!(g.random_ids().is_empty());
        let game = Game::new(g).unwrap();
        let x = vec![rat(3, 7), int(-2)];
        assert_eq!(game.eval(&x).unwrap(), x);
    }

    #[test]
    fn stochastic_report() {
        let mut op = fixtures::example_operator();
        assert!(op.check_stochastic().passed());
        op.matrices[0][0][0] = int(1);
        let report = op.check_stochastic();
        assert!(!report.unit_row_sums);
        assert!(matches!(
            graph_from_minmax(&op),
            Err(Error::NonStochastic(_))
        ));
    }

    #[test]
    fn constants_are_preserved_by_stochastic_rows() {
        let mut op = fixtures::example_operator();
        op.payoffs = vec![vec![int(0); 3]; 2];
        let c = rat(-5, 3);
        assert_eq!(minmax_eval(&op, &vec![c.clone(); 3]).unwrap(), vec![c; 3]);
    }

    #[test]
    fn graph_json_round_trip() {
        let g = fixtures::example_graph();
        let text = serde_json::to_string(&g).unwrap();
        let back: GameGraph = serde_json::from_str(&text).unwrap();
        assert_eq!(back, g);
        assert!(serde_json::from_str::<GameGraph>(
            r#"{"min":[1],"max":[2],"random":[],"edges":[{"id":1,"tail":1,"head":2,"payoff":"0","prob":"1"}]}"#
        )
        .is_err());
        assert!(serde_json::from_str::<GameGraph>(
            r#"{"min":[1],"max":[1],"random":[],"edges":[]}"#
        )
        .is_err());
    }
}
