//! Tropical Metzler pencils `Q(x) = Q^(0) ⊕ x_1 ⊙ Q^(1) ⊕ … ⊕ x_n ⊙ Q^(n)`
//! and the spectrahedra they describe.
//!
//! A point `x ∈ 𝕋ⁿ` is a member when, writing `Q_ij(x)` for the signed
//! tropical polynomial in entry `(i, j)` with positive and negative parts
//! `Q_ij⁺`, `Q_ij⁻`,
//!
//! ```text
//! Q_ii⁺(x) ≥ Q_ii⁻(x)                      for every i
//! Q_ii⁺(x) + Q_jj⁺(x) ≥ 2·|Q_ij(x)|        for every i < j
//! ```
//!
//! An empty positive part evaluates to `−∞`, so a diagonal entry holding a
//! single negative monomial expresses `−∞ ≥ x_k`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{validate_graph, EdgeLabel, GameGraph, VertexKind};
use crate::rational::Rational;
use crate::transform::{check_compliant, pipeline, WitnessMap};
use crate::trop::{sadd, Sign, SignedTrop, Trop};

/// Index of the constant slot; variable `k` (1-based) is slot `k`.
pub const CONST: usize = 0;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pencil {
    vars: usize,
    size: usize,
    /// `(i, j)` with `i ≤ j` → slot → coefficient.
    entries: BTreeMap<(usize, usize), BTreeMap<usize, SignedTrop>>,
}

/// Rejects a slot index beyond the variable count.
fn check_slot(vars: usize, slot: usize) -> Result<()> {
    if slot > vars {
        Err(Error::InvalidPencil(format!(
            "slot {slot} exceeds variable count {vars}"
        )))
    } else {
        Ok(())
    }
}

impl Pencil {
    pub fn new(vars: usize) -> Self {
        Pencil {
            vars,
            size: 0,
            entries: BTreeMap::new(),
        }
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// No constant terms: the described set is invariant under `x ↦ λ ⊙ x`.
    pub fn is_cone(&self) -> bool {
        self.entries.values().all(|e| !e.contains_key(&CONST))
    }

    /// Appends `k` rows and returns the index of the first.
    pub fn add_rows(&mut self, k: usize) -> usize {
        self.size += k;
        self.size - k
    }

    pub fn add_vars(&mut self, k: usize) -> usize {
        self.vars += k;
        self.vars - k + 1
    }

    /// Adds `coeff ⊙ x_slot` to entry `(i, j)` (and `(j, i)`). Coefficients
    /// for the same slot combine by tropical addition, which must not mix
    /// signs; off-diagonal coefficients must be negative.
    pub fn add_term(&mut self, i: usize, j: usize, slot: usize, coeff: SignedTrop) -> Result<()> {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        if j >= self.size {
            return Err(Error::InvalidPencil(format!(
                "entry ({i}, {j}) outside a {0}×{0} pencil",
                self.size
            )));
        }
        check_slot(self.vars, slot)?;
        if coeff.is_zero() {
            return Ok(());
        }
        if i != j && coeff.sign() != Sign::Neg {
            return Err(Error::InvalidPencil(format!(
                "off-diagonal entry ({i}, {j}) must be tropically negative"
            )));
        }
        let entry = self.entries.entry((i, j)).or_default();
        let merged = match entry.get(&slot) {
            Some(old) if old.sign() != coeff.sign() => {
                return Err(Error::InvalidPencil(format!(
                    "slot {slot} of entry ({i}, {j}) would carry both signs"
                )))
            }
            Some(old) => sadd(old, &coeff)?,
            None => coeff,
        };
        entry.insert(slot, merged);
        Ok(())
    }

    /// Shorthand for a positive monomial `c ⊙ x_slot`.
    pub fn pos(&mut self, i: usize, j: usize, slot: usize, c: Trop) -> Result<()> {
        self.add_term(i, j, slot, SignedTrop::pos(c))
    }

    /// Shorthand for a negative monomial `⊖c ⊙ x_slot`.
    pub fn neg(&mut self, i: usize, j: usize, slot: usize, c: Trop) -> Result<()> {
        self.add_term(i, j, slot, SignedTrop::neg(c))
    }

    pub fn entry(&self, i: usize, j: usize) -> impl Iterator<Item = (usize, &SignedTrop)> {
        let key = if i <= j { (i, j) } else { (j, i) };
        self.entries
            .get(&key)
            .into_iter()
            .flatten()
            .map(|(s, c)| (*s, c))
    }

    /// Positive and negative parts of entry `(i, j)` at `x`.
    pub fn eval_entry(&self, i: usize, j: usize, x: &[Trop]) -> (Trop, Trop) {
        let mut plus = Trop::NegInf;
        let mut minus = Trop::NegInf;
        for (slot, c) in self.entry(i, j) {
            let v = if slot == CONST {
                c.modulus().clone()
            } else {
                crate::trop::tmul(c.modulus(), &x[slot - 1])
            };
            let part = match c.sign() {
                Sign::Pos => &mut plus,
                Sign::Neg => &mut minus,
                Sign::Zero => continue,
            };
            if v > *part {
                *part = v;
            }
        }
        (plus, minus)
    }

    /// The first entry whose condition fails at `x`, if any.
    pub fn first_violation(&self, x: &[Trop]) -> Result<Option<(usize, usize)>> {
        if x.len() != self.vars {
            return Err(Error::DimensionMismatch {
                expected: self.vars,
                got: x.len(),
            });
        }
        let diag: Vec<(Trop, Trop)> = (0..self.size).map(|i| self.eval_entry(i, i, x)).collect();
        for (i, (plus, minus)) in diag.iter().enumerate() {
            if plus < minus {
                return Ok(Some((i, i)));
            }
        }
        for &(i, j) in self.entries.keys() {
            if i == j {
                continue;
            }
            let (p, m) = self.eval_entry(i, j, x);
            let modulus = p.max(m);
            let lhs = crate::trop::tmul(&diag[i].0, &diag[j].0);
            if lhs < modulus.pow(2) {
                return Ok(Some((i, j)));
            }
        }
        Ok(None)
    }

    pub fn member(&self, x: &[Trop]) -> Result<bool> {
        Ok(self.first_violation(x)?.is_none())
    }

    /// Copies the rows of `other` below the current ones, sending its slot
    /// `k` to slot `slot_map[k]`. Returns the offset of the copied rows.
    pub fn embed(&mut self, other: &Pencil, slot_map: &[usize]) -> Result<usize> {
        if slot_map.len() != other.vars + 1 {
            return Err(Error::DimensionMismatch {
                expected: other.vars + 1,
                got: slot_map.len(),
            });
        }
        let offset = self.add_rows(other.size);
        for (&(i, j), terms) in &other.entries {
            for (&slot, c) in terms {
                self.add_term(offset + i, offset + j, slot_map[slot], c.clone())?;
            }
        }
        Ok(offset)
    }

    /// Dense `(n+1) × m × m` form; index 0 holds the constant matrix.
    pub fn to_dense(&self) -> Vec<Vec<Vec<SignedTrop>>> {
        let mut out = vec![vec![vec![SignedTrop::zero(); self.size]; self.size]; self.vars + 1];
        for (&(i, j), terms) in &self.entries {
            for (&slot, c) in terms {
                out[slot][i][j] = c.clone();
                out[slot][j][i] = c.clone();
            }
        }
        out
    }

    pub fn from_dense(m: usize, n: usize, matrices: &[Vec<Vec<SignedTrop>>]) -> Result<Self> {
        if matrices.len() != n + 1 {
            return Err(Error::DimensionMismatch {
                expected: n + 1,
                got: matrices.len(),
            });
        }
        let mut p = Pencil::new(n);
        p.add_rows(m);
        for (slot, q) in matrices.iter().enumerate() {
            if q.len() != m || q.iter().any(|row| row.len() != m) {
                return Err(Error::InvalidPencil(format!(
                    "matrix {slot} is not {m}×{m}"
                )));
            }
            for i in 0..m {
                for j in i..m {
                    if q[i][j] != q[j][i] {
                        return Err(Error::InvalidPencil(format!(
                            "matrix {slot} is not symmetric at ({i}, {j})"
                        )));
                    }
                    p.add_term(i, j, slot, q[i][j].clone())?;
                }
            }
        }
        Ok(p)
    }

    /// Number of stored monomials.
    pub fn term_count(&self) -> usize {
        self.entries.values().map(BTreeMap::len).sum()
    }
}

pub fn pencil_member(p: &Pencil, x: &[Trop]) -> Result<bool> {
    p.member(x)
}

fn fin(r: Rational) -> Trop {
    Trop::Fin(r)
}

fn zero() -> Trop {
    Trop::one()
}

/// Lift from visible coordinates to all pencil variables.
pub type LiftFn = Arc<dyn Fn(&[Trop]) -> Result<Vec<Trop>> + Send + Sync>;
/// Greatest element of the homogenized set below a point of `𝕋^{n+1}`.
pub type FloorFn = Arc<dyn Fn(&[Trop]) -> Vec<Trop> + Send + Sync>;

/// A pencil whose first `visible` variables are the coordinates of the set
/// it describes by projection. The optional lift sends points of the set to
/// members; the optional floor is what [`union_pencil`] needs to lift.
#[derive(Clone)]
pub struct ProjectedPencil {
    pencil: Pencil,
    visible: usize,
    lift: Option<LiftFn>,
    floor: Option<FloorFn>,
    descriptor: Option<String>,
}

impl fmt::Debug for ProjectedPencil {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ProjectedPencil")
            .field("size", &self.pencil.size)
            .field("vars", &self.pencil.vars)
            .field("visible", &self.visible)
            .field("lift", &self.lift.is_some())
            .field("floor", &self.floor.is_some())
            .field("descriptor", &self.descriptor)
            .finish()
    }
}

impl ProjectedPencil {
    pub fn new(pencil: Pencil, visible: usize) -> Result<Self> {
        if visible > pencil.vars {
            return Err(Error::DimensionMismatch {
                expected: pencil.vars,
                got: visible,
            });
        }
        Ok(ProjectedPencil {
            pencil,
            visible,
            lift: None,
            floor: None,
            descriptor: None,
        })
    }

    /// A pencil without hidden variables; its lift is the identity.
    pub fn plain(pencil: Pencil) -> Self {
        let visible = pencil.vars;
        ProjectedPencil {
            pencil,
            visible,
            lift: Some(Arc::new(|x: &[Trop]| Ok(x.to_vec()))),
            floor: None,
            descriptor: None,
        }
    }

    pub fn with_lift(mut self, lift: LiftFn) -> Self {
        self.lift = Some(lift);
        self
    }

    pub fn with_floor(mut self, floor: FloorFn) -> Self {
        self.floor = Some(floor);
        self
    }

    pub fn with_descriptor(mut self, descriptor: impl Into<String>) -> Self {
        self.descriptor = Some(descriptor.into());
        self
    }

    pub fn pencil(&self) -> &Pencil {
        &self.pencil
    }

    pub fn visible(&self) -> usize {
        self.visible
    }

    pub fn descriptor(&self) -> Option<&str> {
        self.descriptor.as_deref()
    }

    pub fn has_lift(&self) -> bool {
        self.lift.is_some()
    }

    pub fn has_floor(&self) -> bool {
        self.floor.is_some()
    }

    pub fn lift(&self, x: &[Trop]) -> Result<Vec<Trop>> {
        self.check_visible(x.len())?;
        let lift = self
            .lift
            .as_ref()
            .ok_or_else(|| Error::PreconditionViolated("pencil carries no witness".into()))?;
        lift(x)
    }

    pub fn lift_rational(&self, x: &[Rational]) -> Result<Vec<Trop>> {
        let xt: Vec<Trop> = x.iter().cloned().map(fin).collect();
        self.lift(&xt)
    }

    /// Lifts `x` and tests the lifted point. A `true` answer certifies that
    /// `x` lies in the projection; `false` is conclusive whenever the lift is
    /// a witness for every point of the projection.
    pub fn member_via_lift(&self, x: &[Trop]) -> Result<bool> {
        let full = self.lift(x)?;
        self.pencil.member(&full)
    }

    pub fn floor(&self, z: &[Trop]) -> Result<Vec<Trop>> {
        self.check_visible(z.len().saturating_sub(1))?;
        let floor = self
            .floor
            .as_ref()
            .ok_or_else(|| Error::PreconditionViolated("pencil carries no floor map".into()))?;
        Ok(floor(z))
    }

    fn check_visible(&self, got: usize) -> Result<()> {
        if got == self.visible {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                expected: self.visible,
                got,
            })
        }
    }

    pub fn to_document(&self) -> PencilDocument {
        PencilDocument {
            m: self.pencil.size,
            n: self.pencil.vars,
            matrices: self.pencil.to_dense(),
            visible: self.visible,
            witness: self.descriptor.clone(),
        }
    }

    /// Rebuilds the pencil; lift and floor maps are not serialized.
    pub fn from_document(doc: &PencilDocument) -> Result<Self> {
        let pencil = Pencil::from_dense(doc.m, doc.n, &doc.matrices)?;
        let mut pp = ProjectedPencil::new(pencil, doc.visible)?;
        pp.descriptor = doc.witness.clone();
        Ok(pp)
    }
}

/// JSON form of a (projected) pencil.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PencilDocument {
    pub m: usize,
    pub n: usize,
    pub matrices: Vec<Vec<Vec<SignedTrop>>>,
    pub visible: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

/// Cone pencil over the Min coordinates of a compliant graph whose members
/// are exactly the points with `x ≤ F(x)`.
///
/// Every Min edge `e` from `v` reaches (possibly through one fair coin) the
/// Max vertices `w, w'`, so `x_v ≤ r_e + ½(M_w + M_w')` with `M_w` the best
/// Max move. That is the 2×2 condition on a fresh pair of rows with
/// diagonals `M_w`, `M_w'` and off-diagonal `⊖(−r_e) ⊙ x_v`.
pub fn synthesize_cone(g: &GameGraph) -> Result<Pencil> {
    check_compliant(g)?;
    validate_graph(g).into_result()?;
    let slot = |v| g.position(v).expect("Min vertex") + 1;
    let payoff = |label: &EdgeLabel| match label {
        EdgeLabel::Payoff(r) => r.clone(),
        EdgeLabel::Prob(_) => unreachable!("validated labels"),
    };
    let mut p = Pencil::new(g.dim());
    for &v in g.min_ids() {
        for e in g.out_edges(v) {
            let (w, w2) = match g.kind(e.head) {
                Some(VertexKind::Max) => (e.head, e.head),
                Some(VertexKind::Random) => {
                    let heads: Vec<_> = g.out_edges(e.head).map(|f| f.head).collect();
                    (heads[0], heads[1])
                }
                _ => {
                    return Err(Error::NotCompliant(format!(
                        "Min edge {} does not reach Max vertices",
                        e.id
                    )))
                }
            };
            let i = p.add_rows(2);
            for (row, w) in [(i, w), (i + 1, w2)] {
                for f in g.out_edges(w) {
                    if g.kind(f.head) != Some(VertexKind::Min) {
                        return Err(Error::NotCompliant(format!(
                            "Max edge {} does not lead to a Min vertex",
                            f.id
                        )));
                    }
                    p.pos(row, row, slot(f.head), fin(payoff(&f.label)))?;
                }
            }
            p.neg(i, i + 1, slot(v), fin(-payoff(&e.label)))?;
        }
    }
    Ok(p)
}

/// [`synthesize_cone`] with the visible coordinates and lift of `witness`.
pub fn synthesize_projected(g: &GameGraph, witness: WitnessMap) -> Result<ProjectedPencil> {
    let pencil = synthesize_cone(g)?;
    if witness.target_dim() != pencil.vars() {
        return Err(Error::DimensionMismatch {
            expected: pencil.vars(),
            got: witness.target_dim(),
        });
    }
    let visible = witness.source_dim();
    let kind = serde_json::to_value(witness.kind())
        .ok()
        .and_then(|v| v.as_str().map(str::to_owned))
        .unwrap_or_default();
    Ok(ProjectedPencil::new(pencil, visible)?
        .with_lift(Arc::new(move |x: &[Trop]| witness.lift_trop(x)))
        .with_descriptor(kind))
}

/// Restricts a cone pencil over variables `x` to real points by adding
/// variables `y` and the blocks `[[X_k, ⊖0], [⊖0, Y_k]]` (`x_k + y_k ≥ 0`).
/// The lift sets `y := −x`.
pub fn affine_envelope(pp: &ProjectedPencil) -> Result<ProjectedPencil> {
    let inner = &pp.pencil;
    if !inner.is_cone() {
        return Err(Error::InvalidPencil("envelope needs a cone pencil".into()));
    }
    let n = inner.vars;
    let mut p = inner.clone();
    p.add_vars(n);
    for k in 1..=n {
        let i = p.add_rows(2);
        p.pos(i, i, k, zero())?;
        p.pos(i + 1, i + 1, n + k, zero())?;
        p.neg(i, i + 1, CONST, zero())?;
    }
    let mut out = ProjectedPencil::new(p, pp.visible)?;
    out.descriptor = pp.descriptor.clone();
    if let Some(lift) = pp.lift.clone() {
        out.lift = Some(Arc::new(move |x: &[Trop]| {
            let mut full = lift(x)?;
            let ys: Vec<Trop> = full
                .iter()
                .map(|t| match t {
                    Trop::Fin(v) => fin(-v),
                    Trop::NegInf => Trop::NegInf,
                })
                .collect();
            full.extend(ys);
            Ok(full)
        }));
    }
    Ok(out)
}

/// The projected pencil of a valid game graph: pipeline to a compliant
/// graph, cone synthesis, then the real envelope. Its projection onto the
/// original Min coordinates is `{x ∈ ℝⁿ : x ≤ F(x)}`.
pub fn synthesize_from_game(g: &GameGraph) -> Result<ProjectedPencil> {
    let (compliant, witness) = pipeline(g)?;
    let cone = synthesize_projected(&compliant, witness)?;
    affine_envelope(&cone)
}

/// Moves the constant matrix to a new first variable.
pub fn formal_homogenize(p: &Pencil) -> Pencil {
    let mut out = Pencil::new(p.vars + 1);
    let map: Vec<usize> = (1..=p.vars + 1).collect();
    out.embed(p, &map).expect("slot map covers every slot");
    out
}

/// Adds the diagonal rows `x_slot ≥ 0` and `0 ≥ x_slot`.
pub fn pin_to_zero(p: &mut Pencil, slot: usize) -> Result<()> {
    check_slot(p.vars, slot)?;
    let i = p.add_rows(2);
    p.pos(i, i, slot, zero())?;
    p.neg(i, i, CONST, zero())?;
    p.pos(i + 1, i + 1, CONST, zero())?;
    p.neg(i + 1, i + 1, slot, zero())?;
    Ok(())
}

/// Restricts the first variable to 0.
pub fn dehomogenize(p: &Pencil) -> Pencil {
    let mut out = p.clone();
    pin_to_zero(&mut out, 1).expect("pencil has a first variable");
    out
}

/// Describes `{(t, t + x) : x ∈ S, t ∈ ℝ} ∪ {−∞}` for the projection `S` of
/// `pp`. Variables: `x₀`, the visible `x`, the hidden ones shifted by `x₀`,
/// then one `z_k` per visible coordinate with `x₀ + z_k ≥ 2x_k`.
pub fn homogenize_projected(pp: &ProjectedPencil) -> Result<ProjectedPencil> {
    let n = pp.visible;
    let total = pp.pencil.vars;
    let mut p = formal_homogenize(&pp.pencil);
    let z0 = p.add_vars(n);
    for k in 1..=n {
        let i = p.add_rows(2);
        p.pos(i, i, 1, zero())?;
        p.pos(i + 1, i + 1, z0 + k - 1, zero())?;
        p.neg(i, i + 1, k + 1, zero())?;
    }
    let mut out = ProjectedPencil::new(p, n + 1)?;
    out.descriptor = pp.descriptor.clone();
    if let Some(lift) = pp.lift.clone() {
        out.lift = Some(Arc::new(move |point: &[Trop]| {
            let x0 = match &point[0] {
                Trop::NegInf => return Ok(vec![Trop::NegInf; total + 1 + n]),
                Trop::Fin(v) => v.clone(),
            };
            let shifted: Vec<Trop> = point[1..].iter().map(|t| t.minus(&x0)).collect();
            let inner = lift(&shifted)?;
            let mut full = Vec::with_capacity(total + 1 + n);
            full.push(fin(x0.clone()));
            full.extend(inner.iter().map(|t| crate::trop::tmul(t, &fin(x0.clone()))));
            full.extend(point[1..].iter().map(|t| match t {
                Trop::Fin(v) => fin(v * Rational::from_integer(2.into()) - &x0),
                Trop::NegInf => Trop::NegInf,
            }));
            Ok(full)
        }));
    }
    Ok(out)
}

/// Projected pencil for `tconv(S₁ ∪ S₂)` via `S^h = S₁^h ⊕ S₂^h`: variables
/// `z` (visible `z_1..z_n`, then `z_0`), `u ∈ S₁^h`, `w ∈ S₂^h`, diagonal rows
/// `z_i ≥ u_i`, `z_i ≥ w_i`, `u_i ⊕ w_i ≥ z_i`, and `z_0 = 0`.
///
/// The lift takes `u`, `w` as the floors of `(0, x)` in each homogenized
/// set, so it exists only when both inputs carry lifts and floors.
pub fn union_pencil(a: &ProjectedPencil, b: &ProjectedPencil) -> Result<ProjectedPencil> {
    if a.visible != b.visible {
        return Err(Error::DimensionMismatch {
            expected: a.visible,
            got: b.visible,
        });
    }
    let n = a.visible;
    let ha = homogenize_projected(a)?;
    let hb = homogenize_projected(b)?;
    let (va, vb) = (ha.pencil.vars, hb.pencil.vars);
    let z0 = n + 1;
    let mut p = Pencil::new(n + 1 + va + vb);
    let map_a: Vec<usize> = std::iter::once(CONST)
        .chain((1..=va).map(|k| z0 + k))
        .collect();
    let map_b: Vec<usize> = std::iter::once(CONST)
        .chain((1..=vb).map(|k| z0 + va + k))
        .collect();
    p.embed(&ha.pencil, &map_a)?;
    p.embed(&hb.pencil, &map_b)?;
    for i in 0..=n {
        let z = if i == 0 { z0 } else { i };
        let u = z0 + 1 + i;
        let w = z0 + va + 1 + i;
        let r = p.add_rows(3);
        p.pos(r, r, z, zero())?;
        p.neg(r, r, u, zero())?;
        p.pos(r + 1, r + 1, z, zero())?;
        p.neg(r + 1, r + 1, w, zero())?;
        p.pos(r + 2, r + 2, u, zero())?;
        p.pos(r + 2, r + 2, w, zero())?;
        p.neg(r + 2, r + 2, z, zero())?;
    }
    pin_to_zero(&mut p, z0)?;

    let mut out = ProjectedPencil::new(p, n)?.with_descriptor("union");
    if let (Some(fa), Some(fb)) = (a.floor.clone(), b.floor.clone()) {
        out.floor = Some(Arc::new({
            let (fa, fb) = (fa.clone(), fb.clone());
            move |z: &[Trop]| {
                fa(z)
                    .into_iter()
                    .zip(fb(z))
                    .map(|(s, t)| s.max(t))
                    .collect()
            }
        }));
        if let (Some(la), Some(lb)) = (ha.lift.clone(), hb.lift.clone()) {
            out.lift = Some(Arc::new(move |x: &[Trop]| {
                let z: Vec<Trop> = std::iter::once(zero()).chain(x.iter().cloned()).collect();
                let mut full = x.to_vec();
                full.push(zero());
                full.extend(la(&fa(&z))?);
                full.extend(lb(&fb(&z))?);
                Ok(full)
            }));
        }
    }
    Ok(out)
}

/// The set `{g}`: rows `x_k ≥ g_k` and `g_k ≥ x_k` for finite `g_k`, and
/// `−∞ ≥ x_k` otherwise.
pub fn singleton_pencil(g: &[Trop]) -> ProjectedPencil {
    let n = g.len();
    let mut p = Pencil::new(n);
    for (k, gk) in g.iter().enumerate() {
        let slot = k + 1;
        match gk {
            Trop::Fin(v) => {
                let i = p.add_rows(2);
                p.pos(i, i, slot, zero()).expect("valid slot");
                p.neg(i, i, CONST, fin(v.clone())).expect("valid slot");
                p.pos(i + 1, i + 1, CONST, fin(v.clone()))
                    .expect("valid slot");
                p.neg(i + 1, i + 1, slot, zero()).expect("valid slot");
            }
            Trop::NegInf => {
                let i = p.add_rows(1);
                p.neg(i, i, slot, zero()).expect("valid slot");
            }
        }
    }
    let point = g.to_vec();
    ProjectedPencil::plain(p)
        .with_descriptor("point")
        .with_floor(Arc::new(move |z: &[Trop]| {
            let mut t = z[0].clone();
            for (zk, gk) in z[1..].iter().zip(&point) {
                if let Trop::Fin(gv) = gk {
                    t = t.min(zk.minus(gv));
                }
            }
            std::iter::once(t.clone())
                .chain(point.iter().map(|gk| crate::trop::tmul(&t, gk)))
                .collect()
        }))
}

/// The empty set in `𝕋ⁿ`, described by the single condition `−∞ ≥ 0`.
pub fn empty_pencil(n: usize) -> ProjectedPencil {
    let mut p = Pencil::new(n);
    let i = p.add_rows(1);
    p.neg(i, i, CONST, zero()).expect("constant slot");
    ProjectedPencil::plain(p)
        .with_descriptor("empty")
        .with_floor(Arc::new(move |_: &[Trop]| vec![Trop::NegInf; n + 1]))
}

/// Projected pencil for the tropical convex hull of finitely many points.
pub fn hull_pencil(points: &crate::convex::TropPointSet) -> Result<ProjectedPencil> {
    let mut pieces = points.points().iter().map(|g| singleton_pencil(g));
    let Some(first) = pieces.next() else {
        return Ok(empty_pencil(points.dim()));
    };
    pieces.try_fold(first, |acc, piece| union_pencil(&acc, &piece))
}

/// One stratum: a projected pencil over the coordinates `support` (sorted,
/// 0-based) of `𝕋ⁿ`.
#[derive(Clone, Debug)]
pub struct Stratum {
    pub support: Vec<usize>,
    pub pencil: ProjectedPencil,
}

/// Places a stratum in `𝕋ⁿ`: coordinates outside its support are forced
/// to `−∞`.
pub fn embed_stratum(n: usize, stratum: &Stratum) -> Result<ProjectedPencil> {
    let support = &stratum.support;
    let inner = &stratum.pencil;
    if support.windows(2).any(|w| w[0] >= w[1]) || support.iter().any(|&k| k >= n) {
        return Err(Error::SupportMismatch(format!(
            "support {support:?} is not a sorted subset of 0..{n}"
        )));
    }
    if support.len() != inner.visible {
        return Err(Error::SupportMismatch(format!(
            "support has {} coordinates but the pencil shows {}",
            support.len(),
            inner.visible
        )));
    }
    let hidden = inner.pencil.vars - inner.visible;
    let mut p = Pencil::new(n + hidden);
    let map: Vec<usize> = std::iter::once(CONST)
        .chain(support.iter().map(|&k| k + 1))
        .chain((1..=hidden).map(|h| n + h))
        .collect();
    p.embed(&inner.pencil, &map)?;
    for k in (0..n).filter(|k| !support.contains(k)) {
        let i = p.add_rows(1);
        p.neg(i, i, k + 1, zero())?;
    }
    let mut out = ProjectedPencil::new(p, n)?;
    out.descriptor = inner.descriptor.clone();
    if let Some(lift) = inner.lift.clone() {
        let support = support.clone();
        let k = support.len();
        out.lift = Some(Arc::new(move |x: &[Trop]| {
            let restricted: Vec<Trop> = support.iter().map(|&i| x[i].clone()).collect();
            let full = lift(&restricted)?;
            let mut out = x.to_vec();
            out.extend(full[k..].iter().cloned());
            Ok(out)
        }));
    }
    if let Some(floor) = inner.floor.clone() {
        let support = support.clone();
        out.floor = Some(Arc::new(move |z: &[Trop]| {
            let restricted: Vec<Trop> = std::iter::once(z[0].clone())
                .chain(support.iter().map(|&i| z[i + 1].clone()))
                .collect();
            let low = floor(&restricted);
            let mut out = vec![Trop::NegInf; n + 1];
            out[0] = low[0].clone();
            for (j, &i) in support.iter().enumerate() {
                out[i + 1] = low[j + 1].clone();
            }
            out
        }));
    }
    Ok(out)
}

/// Projected pencil for the tropical convex hull of the embedded strata,
/// folded in lexicographic order of supports; `with_bottom` adds the
/// all-`−∞` point. An empty family gives the empty set.
pub fn assemble_strata(n: usize, strata: &[Stratum], with_bottom: bool) -> Result<ProjectedPencil> {
    let mut ordered: Vec<&Stratum> = strata.iter().collect();
    ordered.sort_by(|a, b| a.support.cmp(&b.support));
    let mut pieces = ordered
        .into_iter()
        .map(|s| embed_stratum(n, s))
        .collect::<Result<Vec<_>>>()?;
    if with_bottom {
        pieces.push(singleton_pencil(&vec![Trop::NegInf; n]));
    }
    let mut iter = pieces.into_iter();
    let Some(first) = iter.next() else {
        return Ok(empty_pencil(n));
    };
    iter.try_fold(first, |acc, piece| union_pencil(&acc, &piece))
}
