//! Sampling-based verification, section grids, and the command layer used by
//! the `tropmetzler` binary.
//!
//! Every command takes already-read input text and returns the text to
//! print, so the binary only handles argument parsing, files and exit codes.

use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::error::{Error, Result};
use crate::game::{validate_graph, Game, GameGraph, MinMaxOperator};
use crate::pencil::{synthesize_cone, synthesize_from_game, PencilDocument, ProjectedPencil};
use crate::rational::{format_rational, int, parse_rational, Rational};
use crate::sample::{point_in, stream_rng};
use crate::transform::{coin_flip_transform, first_transform, pipeline, second_transform};
use crate::trop::Trop;

/// Sampling parameters shared by the sampling commands.
#[derive(Clone, Debug)]
pub struct SampleOptions {
    pub samples: usize,
    pub seed: u64,
    /// Points are drawn from `[-bound, bound]ⁿ`.
    pub bound: Rational,
    /// Largest denominator of a sampled coordinate.
    pub denom: u32,
    /// Record wall time in reports (makes output run-dependent).
    pub timing: bool,
}

impl Default for SampleOptions {
    fn default() -> Self {
        SampleOptions {
            samples: 200,
            seed: 0,
            bound: int(10),
            denom: 64,
            timing: false,
        }
    }
}

/// A sampled point on which the two sides disagree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub index: usize,
    pub point: Vec<String>,
    pub subfixed: bool,
    pub member: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub instance: String,
    pub samples: usize,
    /// Sampled points with `x ≤ F(x)`.
    pub subfixed_points: usize,
    /// Of those, points whose lift is a member.
    pub forward_agree: usize,
    pub non_subfixed_points: usize,
    /// Of those, points whose lift is not a member.
    pub backward_agree: usize,
    pub counterexample: Option<Counterexample>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u64>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.forward_agree == self.subfixed_points
            && self.backward_agree == self.non_subfixed_points
    }
}

/// Checks `x ≤ F(x) ⟺ lift(x) ∈ pencil` on sampled rational points. Sample
/// `i` is drawn from its own stream of `seed`, so the report does not depend
/// on how the work is split across threads.
pub fn verify_instance(
    instance: &str,
    game: &Game,
    pencil: &ProjectedPencil,
    opts: &SampleOptions,
) -> Result<VerificationReport> {
    let start = Instant::now();
    let n = game.dim();
    if pencil.visible() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: pencil.visible(),
        });
    }
    let outcomes: Vec<(Vec<Rational>, bool, bool)> = (0..opts.samples)
        .into_par_iter()
        .map(|i| {
            let x = point_in(
                &mut stream_rng(opts.seed, i as u64),
                n,
                &opts.bound,
                opts.denom,
            );
            let subfixed = game.subfixed(&x)?;
            let member = pencil.pencil().member(&pencil.lift_rational(&x)?)?;
            Ok((x, subfixed, member))
        })
        .collect::<Result<_>>()?;

    let mut report = VerificationReport {
        instance: instance.to_string(),
        samples: opts.samples,
        subfixed_points: 0,
        forward_agree: 0,
        non_subfixed_points: 0,
        backward_agree: 0,
        counterexample: None,
        wall_time_ms: None,
    };
    for (index, (x, subfixed, member)) in outcomes.into_iter().enumerate() {
        if subfixed {
            report.subfixed_points += 1;
            report.forward_agree += usize::from(member);
        } else {
            report.non_subfixed_points += 1;
            report.backward_agree += usize::from(!member);
        }
        if subfixed != member && report.counterexample.is_none() {
            report.counterexample = Some(Counterexample {
                index,
                point: x.iter().map(format_rational).collect(),
                subfixed,
                member,
            });
        }
    }
    if opts.timing {
        report.wall_time_ms = Some(start.elapsed().as_millis() as u64);
    }
    Ok(report)
}

/// Builds the projected pencil of `g` and verifies it against `g`.
pub fn verify_graph(
    instance: &str,
    g: &GameGraph,
    opts: &SampleOptions,
) -> Result<VerificationReport> {
    let game = Game::new(g.clone())?;
    let pencil = synthesize_from_game(g)?;
    verify_instance(instance, &game, &pencil, opts)
}

/// Writes a rational as a terminating decimal when it has one, else `p/q`.
pub fn display_number(r: &Rational) -> String {
    let mut d = r.denom().clone();
    let (two, five) = (BigInt::from(2), BigInt::from(5));
    let (mut twos, mut fives) = (0usize, 0usize);
    while d.is_even() {
        d /= &two;
        twos += 1;
    }
    while (&d % &five).is_zero() {
        d /= &five;
        fives += 1;
    }
    if !d.is_one() {
        return format_rational(r);
    }
    let digits = twos.max(fives);
    if digits == 0 {
        return r.numer().to_string();
    }
    let scaled = (r.abs() * Rational::from_integer(num_traits::pow(BigInt::from(10), digits)))
        .to_integer()
        .to_string();
    let padded = format!("{scaled:0>width$}", width = digits + 1);
    let (whole, frac) = padded.split_at(padded.len() - digits);
    let sign = if r.is_negative() { "-" } else { "" };
    format!("{sign}{whole}.{frac}")
}

/// Membership grid of the sub-fixed-point set on a planar section.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Section {
    /// Free coordinates shown on the x and y axes (0-based), if any.
    pub axes: (Option<usize>, Option<usize>),
    pub xs: Vec<Rational>,
    /// Row values in descending order.
    pub ys: Vec<Rational>,
    pub rows: Vec<Vec<bool>>,
}

impl Section {
    pub fn at(&self, x: &Rational, y: &Rational) -> Option<bool> {
        let i = self.ys.iter().position(|v| v == y)?;
        let j = self.xs.iter().position(|v| v == x)?;
        Some(self.rows[i][j])
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("y\\x");
        for x in &self.xs {
            out.push(',');
            out.push_str(&display_number(x));
        }
        out.push('\n');
        for (y, row) in self.ys.iter().zip(&self.rows) {
            out.push_str(&display_number(y));
            for &b in row {
                out.push_str(if b { ",1" } else { ",0" });
            }
            out.push('\n');
        }
        out
    }
}

fn grid(lo: &Rational, hi: &Rational, step: &Rational) -> Vec<Rational> {
    let mut values = vec![lo.clone()];
    let mut v = lo + step;
    while v <= *hi {
        values.push(v.clone());
        v += step;
    }
    values
}

/// Evaluates `x ≤ F(x)` on the grid `lo + k·step ≤ hi` over the free
/// coordinates, with `fixed` (0-based index, value) pinned. At most two
/// coordinates may be free.
pub fn section_grid(
    game: &Game,
    fixed: &[(usize, Rational)],
    lo: &Rational,
    hi: &Rational,
    step: &Rational,
) -> Result<Section> {
    let n = game.dim();
    if !step.is_positive() {
        return Err(Error::Parse("section step must be positive".into()));
    }
    if lo > hi {
        return Err(Error::Parse("section box is empty".into()));
    }
    let mut base: Vec<Option<Rational>> = vec![None; n];
    for (k, v) in fixed {
        if *k >= n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: k + 1,
            });
        }
        base[*k] = Some(v.clone());
    }
    let free: Vec<usize> = (0..n).filter(|&k| base[k].is_none()).collect();
    if free.len() > 2 {
        return Err(Error::Parse(format!(
            "a section leaves at most two coordinates free, got {}",
            free.len()
        )));
    }
    let axes = (free.first().copied(), free.get(1).copied());
    let values = grid(lo, hi, step);
    let xs = if axes.0.is_some() {
        values.clone()
    } else {
        vec![Rational::zero()]
    };
    let mut ys = if axes.1.is_some() {
        values
    } else {
        vec![Rational::zero()]
    };
    ys.reverse();
    let rows = ys
        .par_iter()
        .map(|y| {
            xs.iter()
                .map(|x| {
                    let mut point: Vec<Rational> =
                        base.iter().map(|v| v.clone().unwrap_or_default()).collect();
                    if let Some(k) = axes.0 {
                        point[k] = x.clone();
                    }
                    if let Some(k) = axes.1 {
                        point[k] = y.clone();
                    }
                    game.subfixed(&point)
                })
                .collect::<Result<Vec<bool>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Section { axes, xs, ys, rows })
}

/// Text produced by a command, and whether the command's check succeeded.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub text: String,
    pub ok: bool,
}

impl Outcome {
    fn ok(text: String) -> Self {
        Outcome { text, ok: true }
    }
}

/// Exit status for an error: 2 for malformed input, 1 otherwise.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::DimensionMismatch { .. } | Error::ArityMismatch { .. } => 2,
        _ => 1,
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

pub fn parse_graph(text: &str) -> Result<GameGraph> {
    serde_json::from_str(text).map_err(|e| Error::Parse(format!("graph JSON: {e}")))
}

pub fn parse_operator(text: &str) -> Result<MinMaxOperator> {
    let op: MinMaxOperator =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("operator JSON: {e}")))?;
    op.check_shape()?;
    Ok(op)
}

pub fn parse_pencil(text: &str) -> Result<ProjectedPencil> {
    let doc: PencilDocument =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("pencil JSON: {e}")))?;
    ProjectedPencil::from_document(&doc).map_err(|e| Error::Parse(e.to_string()))
}

/// A graph document, or an operator document converted to its graph.
pub fn parse_graph_or_operator(text: &str) -> Result<GameGraph> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("JSON: {e}")))?;
    if value.get("edges").is_some() {
        parse_graph(text)
    } else {
        crate::game::graph_from_minmax(&parse_operator(text)?)
    }
}

/// Comma-separated rationals.
pub fn parse_point(text: &str) -> Result<Vec<Rational>> {
    crate::rational::parse_rational_list(text)
}

/// Comma-separated entries of `𝕋`, with `-inf` for `−∞`.
pub fn parse_trop_point(text: &str) -> Result<Vec<Trop>> {
    text.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(|t| t.trim().parse::<Trop>())
        .collect()
}

fn strings(v: &[Rational]) -> Vec<String> {
    v.iter().map(format_rational).collect()
}

pub fn cmd_validate(text: &str) -> Result<Outcome> {
    let g = parse_graph(text)?;
    let report = validate_graph(&g);
    Ok(Outcome {
        ok: report.passed(),
        text: to_json(&report),
    })
}

pub fn cmd_eval(text: &str, point: &[Rational]) -> Result<Outcome> {
    let g = parse_graph_or_operator(text)?;
    let game = Game::new(g)?;
    Ok(Outcome::ok(to_json(&strings(&game.eval(point)?))))
}

pub fn cmd_subfixed(text: &str, point: &[Rational]) -> Result<Outcome> {
    let game = Game::new(parse_graph_or_operator(text)?)?;
    let fx = game.eval(point)?;
    let subfixed = point.iter().zip(&fx).all(|(a, b)| a <= b);
    Ok(Outcome::ok(to_json(&json!({
        "point": strings(point),
        "image": strings(&fx),
        "subfixed": subfixed,
    }))))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TransformKind {
    CoinFlip,
    First,
    Second,
    Pipeline,
}

pub fn cmd_transform(text: &str, kind: TransformKind, edge: Option<u32>) -> Result<Outcome> {
    let g = parse_graph_or_operator(text)?;
    let (out, witness) = match kind {
        TransformKind::CoinFlip => coin_flip_transform(&g)?,
        TransformKind::First => first_transform(&g)?,
        TransformKind::Second => {
            let edge = edge.ok_or_else(|| Error::Parse("t2 needs --edge".into()))?;
            second_transform(&g, edge)?
        }
        TransformKind::Pipeline => pipeline(&g)?,
    };
    Ok(Outcome::ok(to_json(&json!({
        "graph": out,
        "witness": witness.summary(),
    }))))
}

pub fn cmd_synthesize(text: &str, cone_only: bool) -> Result<Outcome> {
    let g = parse_graph_or_operator(text)?;
    let pp = if cone_only {
        ProjectedPencil::plain(synthesize_cone(&g)?).with_descriptor("cone")
    } else {
        synthesize_from_game(&g)?
    };
    Ok(Outcome::ok(to_json(&pp.to_document())))
}

pub fn cmd_member(pencil_text: &str, point: &[Trop]) -> Result<Outcome> {
    let pp = parse_pencil(pencil_text)?;
    let violation = pp.pencil().first_violation(point)?;
    Ok(Outcome::ok(to_json(&json!({
        "member": violation.is_none(),
        "violation": violation.map(|(i, j)| [i, j]),
    }))))
}

/// Lifts a point of the original coordinates to all pencil variables.
pub fn cmd_lift(text: &str, point: &[Rational]) -> Result<Outcome> {
    let g = parse_graph_or_operator(text)?;
    let pp = synthesize_from_game(&g)?;
    let lifted = pp.lift_rational(point)?;
    let member = pp.pencil().member(&lifted)?;
    Ok(Outcome::ok(to_json(&json!({
        "point": strings(point),
        "lifted": lifted.iter().map(Trop::to_string).collect::<Vec<_>>(),
        "member": member,
    }))))
}

pub fn cmd_verify(instance: &str, text: &str, opts: &SampleOptions) -> Result<Outcome> {
    let g = parse_graph_or_operator(text)?;
    let report = verify_graph(instance, &g, opts)?;
    Ok(Outcome {
        ok: report.passed(),
        text: to_json(&report),
    })
}

/// `fixed` uses 1-based coordinates, as typed on the command line.
pub fn cmd_section(
    text: &str,
    fixed: &[(usize, Rational)],
    lo: &Rational,
    hi: &Rational,
    step: &Rational,
) -> Result<Outcome> {
    let game = Game::new(parse_graph_or_operator(text)?)?;
    let zero_based = fixed
        .iter()
        .map(|(k, v)| match k.checked_sub(1) {
            Some(k) => Ok((k, v.clone())),
            None => Err(Error::Parse("coordinates are numbered from 1".into())),
        })
        .collect::<Result<Vec<_>>>()?;
    let section = section_grid(&game, &zero_based, lo, hi, step)?;
    Ok(Outcome::ok(section.to_csv()))
}

/// Parses `k=v` with a 1-based coordinate `k`.
pub fn parse_fix(text: &str) -> Result<(usize, Rational)> {
    let (k, v) = text
        .split_once('=')
        .ok_or_else(|| Error::Parse(format!("expected k=value, got {text:?}")))?;
    let k: usize = k
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad coordinate in {text:?}")))?;
    Ok((k, parse_rational(v)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::rational::rat;

    #[test]
    fn decimal_display() {
        assert_eq!(display_number(&rat(-9, 2)), "-4.5");
        assert_eq!(display_number(&rat(1, 4)), "0.25");
        assert_eq!(display_number(&rat(-1, 4)), "-0.25");
        assert_eq!(display_number(&int(3)), "3");
        assert_eq!(display_number(&int(0)), "0");
        assert_eq!(display_number(&rat(1, 3)), "1/3");
        assert_eq!(display_number(&rat(-13, 20)), "-0.65");
    }

    #[test]
    fn example_section() {
        let game = Game::new(fixtures::example_graph()).unwrap();
        let s = section_grid(&game, &[(2, int(0))], &rat(-9, 2), &rat(5, 2), &rat(1, 4)).unwrap();
        assert_eq!(s.xs.len(), 29);
        assert_eq!(s.at(&int(0), &int(0)), Some(true));
        assert_eq!(s.at(&int(-3), &int(0)), Some(true));
        assert_eq!(s.at(&int(2), &int(0)), Some(false));
        assert!(s.ys.windows(2).all(|w| w[0] > w[1]));
    }

    #[test]
    fn degenerate_sections() {
        let game = Game::new(fixtures::example_graph()).unwrap();
        let s = section_grid(&game, &[(2, int(0))], &int(0), &int(1), &int(5)).unwrap();
        assert_eq!((s.xs.len(), s.ys.len()), (1, 1));
        let pinned = [(0, int(2)), (1, int(0)), (2, int(0))];
        let s = section_grid(&game, &pinned, &int(0), &int(1), &int(1)).unwrap();
        assert_eq!(s.rows, vec![vec![false]]);
        assert!(section_grid(&game, &[], &int(0), &int(1), &int(1)).is_err());
    }

    #[test]
    fn empty_verification_is_vacuous() {
        let opts = SampleOptions {
            samples: 0,
            ..SampleOptions::default()
        };
        let r = verify_graph("example", &fixtures::example_graph(), &opts).unwrap();
        assert!(r.passed());
        assert_eq!((r.subfixed_points, r.non_subfixed_points), (0, 0));
        assert!(r.counterexample.is_none());
    }

    #[test]
    fn fix_arguments() {
        assert_eq!(parse_fix("3=0").unwrap(), (3, int(0)));
        assert_eq!(parse_fix("1=-1/2").unwrap(), (1, rat(-1, 2)));
        assert!(parse_fix("3").is_err());
    }
}
