//! Path weights and the left/right cocycle calculus.
//!
//! A path weight is a strictly positive rational function `alpha` on paths
//! with `alpha(x) = 1` at vertices. It induces
//!
//! ```text
//! lambda(v, w) = alpha(wv) / alpha(v)   (left weight,  0 unless wv composes)
//! rho(v, u)    = alpha(vu) / alpha(v)   (right weight, 0 unless vu composes)
//! ```
//!
//! both of which satisfy their cocycle identities by construction:
//!
//! ```text
//! lambda(v, w2 w1) = lambda(w1 v, w2) lambda(v, w1)
//! rho(v, u1 u2)    = rho(v u1, u2) rho(v, u1)
//! ```
//!
//! and together the commuting square identity
//! `rho(wv, u) lambda(v, w) = lambda(vu, w) rho(v, u)`, which is exactly the
//! statement that the associated left and right shift matrices commute.
//! Everything here is exact: checks enumerate all composable tuples inside a
//! horizon and compare rationals with zero tolerance.
//!
//! Boundedness of `sup_v lambda(v, w)` or `sup_v rho(v, u)` is generally a
//! statement about infinitely many paths, so verdicts are horizon-bounded:
//! a sound certificate (`bounded_certified`) is issued only when the rule
//! factors force contraction, divergence is reported when the per-length
//! maxima exhibit sustained geometric growth, and everything else stays
//! `bounded_empirical`.

pub mod program;

use crate::graph::{EdgeIx, Path, PathTable};
use crate::scalar::{is_unit_modulus, GRat, Rat};
use num::{One, Zero};
pub use program::{EvalError, GuardAtom, WeightProgram};
use serde::Serialize;
use std::collections::HashMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum WeightError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("path weight table does not satisfy the {side} cocycle identity ({count} violations)")]
    CocycleFailure { side: &'static str, count: usize },
    #[error("phase `{0}` is not unit-modulus")]
    NonUnitPhase(String),
    #[error("path not covered by the working horizon")]
    OutOfTable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

/// A materialized path weight: `alpha` on every path of a table.
#[derive(Debug, Clone)]
pub struct PathWeight {
    table: Arc<PathTable>,
    values: Vec<Rat>,
    /// Factor values reachable inside the horizon, when built from a program.
    factor_values: Option<Vec<Rat>>,
}

impl PathWeight {
    /// Evaluates a rule program on every path of the table. Evaluation is
    /// eager; the result is immutable and cheap to share.
    pub fn from_program(table: Arc<PathTable>, prog: &WeightProgram) -> Result<PathWeight, WeightError> {
        let graph = table.graph().clone();
        let mut values: Vec<Rat> = Vec::with_capacity(table.len());
        for ix in 0..table.len() {
            let p = table.path(ix);
            let v = match graph.split_head(p) {
                None => Rat::one(),
                Some((e, rest)) => {
                    let rest_ix = table
                        .index_of(&rest)
                        .expect("tails of table paths are in the table");
                    prog.factor_for(&graph, e, &rest)? * &values[rest_ix]
                }
            };
            values.push(v);
        }
        let factor_values = prog.factor_values_upto(table.horizon())?;
        Ok(PathWeight {
            table,
            values,
            factor_values: Some(factor_values),
        })
    }

    /// Wraps explicit per-path values (used for transported weights).
    /// Vertices must carry value 1 and all values must be positive.
    pub fn from_values(table: Arc<PathTable>, values: Vec<Rat>) -> PathWeight {
        assert_eq!(values.len(), table.len());
        PathWeight {
            table,
            values,
            factor_values: None,
        }
    }

    pub fn table(&self) -> &Arc<PathTable> {
        &self.table
    }

    pub fn alpha_ix(&self, ix: usize) -> &Rat {
        &self.values[ix]
    }

    pub fn alpha(&self, p: &Path) -> Result<&Rat, WeightError> {
        self.table
            .index_of(p)
            .map(|ix| &self.values[ix])
            .ok_or(WeightError::OutOfTable)
    }

    pub fn factor_values(&self) -> Option<&[Rat]> {
        self.factor_values.as_deref()
    }

    /// Transports `alpha` to the opposite graph: `alpha^t(v^t) = alpha(v)`.
    pub fn transported(&self, opposite_table: Arc<PathTable>) -> PathWeight {
        let g = self.table.graph();
        let values = opposite_table
            .paths()
            .iter()
            .map(|pt| {
                let p = g.reverse_path(pt); // reversal maps (G^t)+ back onto G+
                let pix = self.table.index_of(&p).expect("tables share horizons");
                self.values[pix].clone()
            })
            .collect();
        PathWeight {
            table: opposite_table,
            values,
            factor_values: self.factor_values.clone(),
        }
    }
}

/// Explicit pair table, the raw representation used for experiments with
/// hand-edited weights.
#[derive(Debug, Clone)]
pub struct PairTable {
    table: Arc<PathTable>,
    entries: HashMap<(usize, usize), Rat>,
}

impl PairTable {
    pub fn table(&self) -> &Arc<PathTable> {
        &self.table
    }

    pub fn get(&self, v: usize, w: usize) -> Rat {
        self.entries.get(&(v, w)).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn set(&mut self, v: usize, w: usize, value: Rat) {
        self.entries.insert((v, w), value);
    }
}

/// Left weight: `lambda(v, w)`, positive exactly on composable `wv`.
#[derive(Debug, Clone)]
pub enum LeftWeight {
    Alpha(PathWeight),
    Table(PairTable),
}

impl LeftWeight {
    pub fn table(&self) -> &Arc<PathTable> {
        match self {
            LeftWeight::Alpha(a) => a.table(),
            LeftWeight::Table(t) => t.table(),
        }
    }

    /// `lambda(v, w)`; 0 when `wv` does not compose.
    pub fn value(&self, v: &Path, w: &Path) -> Rat {
        let table = self.table();
        let g = table.graph();
        let Some(wv) = g.compose(w, v) else {
            return Rat::zero();
        };
        match self {
            LeftWeight::Alpha(a) => {
                let top = a.alpha(&wv).expect("wv within horizon");
                let bot = a.alpha(v).expect("v within horizon");
                top / bot
            }
            LeftWeight::Table(t) => {
                let vix = table.index_of(v).expect("v within horizon");
                let wix = table.index_of(w).expect("w within horizon");
                t.get(vix, wix)
            }
        }
    }

    /// Materializes `lambda` as a pair table on all composable pairs with
    /// `|wv|` inside the horizon.
    pub fn to_pair_table(&self) -> PairTable {
        let table = self.table().clone();
        let g = table.graph().clone();
        let mut entries = HashMap::new();
        for (vix, v) in table.paths().iter().enumerate() {
            for (wix, w) in table.paths().iter().enumerate() {
                if v.len() + w.len() > table.horizon() {
                    continue;
                }
                if g.compose(w, v).is_some() {
                    entries.insert((vix, wix), self.value(v, w));
                }
            }
        }
        PairTable { table, entries }
    }

    /// The path weight recovered by `alpha(v) = lambda(s(v), v)`.
    pub fn induced_alpha(&self) -> PathWeight {
        let table = self.table().clone();
        let g = table.graph().clone();
        let values = table
            .paths()
            .iter()
            .map(|p| self.value(&Path::vertex(g.path_source(p)), p))
            .collect();
        PathWeight::from_values(table, values)
    }
}

/// Right weight: `rho(v, u)`, positive exactly on composable `vu`.
#[derive(Debug, Clone)]
pub enum RightWeight {
    Alpha(PathWeight),
    /// `q(u) * rho_alpha(v, u)` with a multiplicative per-edge rescaling.
    Rescaled {
        alpha: PathWeight,
        edge_factor: HashMap<EdgeIx, Rat>,
    },
    Table(PairTable),
}

impl RightWeight {
    pub fn table(&self) -> &Arc<PathTable> {
        match self {
            RightWeight::Alpha(a) => a.table(),
            RightWeight::Rescaled { alpha, .. } => alpha.table(),
            RightWeight::Table(t) => t.table(),
        }
    }

    /// The multiplicative rescaling `q(u)`; 1 for the canonical companion.
    pub fn q_of(&self, u: &Path) -> Rat {
        match self {
            RightWeight::Rescaled { edge_factor, .. } => match u {
                Path::Vertex(_) => Rat::one(),
                Path::Edges(es) => es
                    .iter()
                    .map(|e| edge_factor.get(e).cloned().unwrap_or_else(Rat::one))
                    .product(),
            },
            _ => Rat::one(),
        }
    }

    /// `rho(v, u)`; 0 when `vu` does not compose.
    pub fn value(&self, v: &Path, u: &Path) -> Rat {
        let table = self.table();
        let g = table.graph();
        let Some(vu) = g.compose(v, u) else {
            return Rat::zero();
        };
        match self {
            RightWeight::Alpha(a) => {
                a.alpha(&vu).expect("vu within horizon") / a.alpha(v).expect("v within horizon")
            }
            RightWeight::Rescaled { alpha, .. } => {
                let base = alpha.alpha(&vu).expect("vu within horizon")
                    / alpha.alpha(v).expect("v within horizon");
                self.q_of(u) * base
            }
            RightWeight::Table(t) => {
                let vix = table.index_of(v).expect("v within horizon");
                let uix = table.index_of(u).expect("u within horizon");
                t.get(vix, uix)
            }
        }
    }
}

/// One failed instance of a cocycle or commuting-square identity.
#[derive(Debug, Clone)]
pub struct IdentityViolation {
    /// The three tuple components in the order of the identity's statement.
    pub parts: [Path; 3],
    pub lhs: Rat,
    pub rhs: Rat,
}

/// Exhaustive left-cocycle check over all splits `p = w2 w1 v`, `|p| <= horizon`.
pub fn check_left_cocycle(weight: &LeftWeight, horizon: usize) -> Vec<IdentityViolation> {
    let table = weight.table();
    let g = table.graph().clone();
    let horizon = horizon.min(table.horizon());
    let mut out = Vec::new();
    for p in table.paths() {
        if p.len() > horizon {
            break;
        }
        let k = p.len();
        for i in 0..=k {
            for j in i..=k {
                let w2 = g.segment(p, 0, i);
                let w1 = g.segment(p, i, j);
                let v = g.segment(p, j, k);
                let w2w1 = g.segment(p, 0, j);
                let w1v = g.segment(p, i, k);
                let lhs = weight.value(&v, &w2w1);
                let rhs = weight.value(&w1v, &w2) * weight.value(&v, &w1);
                if lhs != rhs {
                    out.push(IdentityViolation {
                        parts: [v, w1, w2],
                        lhs,
                        rhs,
                    });
                }
            }
        }
    }
    out
}

/// Exhaustive right-cocycle check over all splits `p = v u1 u2`.
pub fn check_right_cocycle(weight: &RightWeight, horizon: usize) -> Vec<IdentityViolation> {
    let table = weight.table();
    let g = table.graph().clone();
    let horizon = horizon.min(table.horizon());
    let mut out = Vec::new();
    for p in table.paths() {
        if p.len() > horizon {
            break;
        }
        let k = p.len();
        for i in 0..=k {
            for j in i..=k {
                let v = g.segment(p, 0, i);
                let u1 = g.segment(p, i, j);
                let u2 = g.segment(p, j, k);
                let u1u2 = g.segment(p, i, k);
                let vu1 = g.segment(p, 0, j);
                let lhs = weight.value(&v, &u1u2);
                let rhs = weight.value(&vu1, &u2) * weight.value(&v, &u1);
                if lhs != rhs {
                    out.push(IdentityViolation {
                        parts: [v, u1, u2],
                        lhs,
                        rhs,
                    });
                }
            }
        }
    }
    out
}

/// Commuting-square check over all splits `p = w v u`:
/// `rho(wv, u) lambda(v, w) = lambda(vu, w) rho(v, u)`.
pub fn check_commuting_square(
    lambda: &LeftWeight,
    rho: &RightWeight,
    horizon: usize,
) -> Vec<IdentityViolation> {
    let table = lambda.table();
    let g = table.graph().clone();
    let horizon = horizon.min(table.horizon());
    let mut out = Vec::new();
    for p in table.paths() {
        if p.len() > horizon {
            break;
        }
        let k = p.len();
        for i in 0..=k {
            for j in i..=k {
                let w = g.segment(p, 0, i);
                let v = g.segment(p, i, j);
                let u = g.segment(p, j, k);
                let wv = g.segment(p, 0, j);
                let vu = g.segment(p, i, k);
                let lhs = rho.value(&wv, &u) * lambda.value(&v, &w);
                let rhs = lambda.value(&vu, &w) * rho.value(&v, &u);
                if lhs != rhs {
                    out.push(IdentityViolation {
                        parts: [w, v, u],
                        lhs,
                        rhs,
                    });
                }
            }
        }
    }
    out
}

/// The canonical right companion of a left weight: the unique right weight
/// satisfying the commuting square everywhere with `rho(r(e), e) =
/// lambda(s(e), e)` on edges. It is `rho_alpha` for the `alpha` generating
/// `lambda`; table-backed inputs are first checked against the cocycle.
pub fn canonical_companion(lambda: &LeftWeight) -> Result<RightWeight, WeightError> {
    match lambda {
        LeftWeight::Alpha(a) => Ok(RightWeight::Alpha(a.clone())),
        LeftWeight::Table(t) => {
            let violations = check_left_cocycle(lambda, t.table().horizon());
            if !violations.is_empty() {
                return Err(WeightError::CocycleFailure {
                    side: "left",
                    count: violations.len(),
                });
            }
            Ok(RightWeight::Alpha(lambda.induced_alpha()))
        }
    }
}

/// The ratio `q(u) = rho2(r(u), u) / rho1(r(u), u)` between two right
/// companions of the same left weight; multiplicative in `u`.
pub fn companion_ratio(rho1: &RightWeight, rho2: &RightWeight, u: &Path) -> Rat {
    let g = rho1.table().graph();
    let r = Path::vertex(g.path_range(u));
    rho2.value(&r, u) / rho1.value(&r, u)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundVerdict {
    BoundedCertified,
    BoundedEmpirical,
    DivergentEmpirical,
}

impl BoundVerdict {
    pub fn is_bounded(self) -> bool {
        !matches!(self, BoundVerdict::DivergentEmpirical)
    }
}

/// Divergence heuristic: flag when some run of `run` consecutive per-length
/// ratios is at least `theta`.
#[derive(Debug, Clone)]
pub struct DivergencePolicy {
    pub theta: Rat,
    pub run: usize,
}

impl Default for DivergencePolicy {
    fn default() -> Self {
        DivergencePolicy {
            theta: crate::scalar::rat(3, 2),
            run: 4,
        }
    }
}

/// Horizon-bounded boundedness report for `sup_v lambda(v, w)` or
/// `sup_v rho(v, u)`.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub side: Side,
    pub target: Path,
    pub horizon: usize,
    /// `(length, max over that length)`, skipping lengths with no composable path.
    pub per_length_max: Vec<(usize, Rat)>,
    pub empirical_sup: Rat,
    pub verdict: BoundVerdict,
    pub note: String,
}

fn verdict_from_levels(
    levels: &[(usize, Rat)],
    certified: bool,
    cert_note: &str,
    policy: &DivergencePolicy,
) -> (BoundVerdict, String) {
    if certified {
        return (BoundVerdict::BoundedCertified, cert_note.to_string());
    }
    let mut run = 0usize;
    for win in levels.windows(2) {
        let (l0, m0) = &win[0];
        let (l1, m1) = &win[1];
        let consecutive = l1 == &(l0 + 1);
        if consecutive && !m0.is_zero() && (m1.clone() / m0.clone()) >= policy.theta {
            run += 1;
            if run >= policy.run {
                return (
                    BoundVerdict::DivergentEmpirical,
                    format!(
                        "per-length maxima grew by >= {} over {} consecutive levels (ending at length {})",
                        crate::scalar::format_rat(&policy.theta),
                        policy.run,
                        l1
                    ),
                );
            }
        } else {
            run = 0;
        }
    }
    (
        BoundVerdict::BoundedEmpirical,
        "no certificate; no sustained growth within the horizon".to_string(),
    )
}

/// Left-boundedness at `w`: per-length maxima of `lambda(., w)`.
/// The certificate is sound: if every reachable rule factor is at most 1
/// then `lambda(v, w)` is a product of factors each at most 1.
pub fn empirical_bound_left(
    lambda: &LeftWeight,
    w: &Path,
    horizon: usize,
    policy: &DivergencePolicy,
) -> BoundReport {
    let table = lambda.table();
    let horizon = horizon.min(table.horizon());
    let mut levels: Vec<(usize, Rat)> = Vec::new();
    for l in 0..=horizon.saturating_sub(w.len()) {
        let mut best: Option<Rat> = None;
        for ix in table.grade_range(l) {
            let v = table.path(ix);
            let val = lambda.value(v, w);
            if !val.is_zero() {
                best = Some(match best {
                    None => val,
                    Some(b) if val > b => val,
                    Some(b) => b,
                });
            }
        }
        if let Some(b) = best {
            levels.push((l, b));
        }
    }
    let certified = match lambda {
        LeftWeight::Alpha(a) => a
            .factor_values()
            .map(program::all_factors_at_most_one)
            .unwrap_or(false),
        LeftWeight::Table(_) => false,
    };
    let sup = levels
        .iter()
        .map(|(_, m)| m.clone())
        .max()
        .unwrap_or_else(Rat::zero);
    let (verdict, note) = verdict_from_levels(
        &levels,
        certified,
        "all rule factors are <= 1, so every lambda(v, w) is a product of factors <= 1",
        policy,
    );
    BoundReport {
        side: Side::Left,
        target: w.clone(),
        horizon,
        per_length_max: levels,
        empirical_sup: sup,
        verdict,
        note,
    }
}

/// Right-boundedness at `u`: per-length maxima of `rho(., u)`.
/// Factor contraction does *not* certify the right side (the denominator
/// `alpha(v)` may vanish along branches the target avoids), so the only
/// certificate here is the trivial one where every factor equals 1.
pub fn empirical_bound_right(
    rho: &RightWeight,
    u: &Path,
    horizon: usize,
    policy: &DivergencePolicy,
) -> BoundReport {
    let table = rho.table();
    let horizon = horizon.min(table.horizon());
    let mut levels: Vec<(usize, Rat)> = Vec::new();
    for l in 0..=horizon.saturating_sub(u.len()) {
        let mut best: Option<Rat> = None;
        for ix in table.grade_range(l) {
            let v = table.path(ix);
            let val = rho.value(v, u);
            if !val.is_zero() {
                best = Some(match best {
                    None => val,
                    Some(b) if val > b => val,
                    Some(b) => b,
                });
            }
        }
        if let Some(b) = best {
            levels.push((l, b));
        }
    }
    let certified = match rho {
        RightWeight::Alpha(a) => a
            .factor_values()
            .map(program::all_factors_one)
            .unwrap_or(false),
        RightWeight::Rescaled { alpha, edge_factor } => {
            alpha
                .factor_values()
                .map(program::all_factors_one)
                .unwrap_or(false)
                && edge_factor.values().all(|q| q.is_one())
        }
        RightWeight::Table(_) => false,
    };
    let sup = levels
        .iter()
        .map(|(_, m)| m.clone())
        .max()
        .unwrap_or_else(Rat::zero);
    let (verdict, note) = verdict_from_levels(
        &levels,
        certified,
        "every rule factor equals 1, so rho is identically 1 on composable pairs",
        policy,
    );
    BoundReport {
        side: Side::Right,
        target: u.clone(),
        horizon,
        per_length_max: levels,
        empirical_sup: sup,
        verdict,
        note,
    }
}

/// Horizon-bounded classification of the bounded subsemigroupoid
/// `{u : sup_v rho(v, u) < infinity}`.
#[derive(Debug, Clone)]
pub struct GRhoClassification {
    pub cap: usize,
    pub horizon: usize,
    /// Verdict per table index, for every `|u| <= cap`.
    pub verdicts: Vec<(usize, BoundVerdict)>,
    pub bounded: Vec<usize>,
    pub divergent: Vec<usize>,
    /// Pairs of bounded paths whose composite (inside the cap) was flagged
    /// divergent; empirically this list stays empty.
    pub closure_violations: Vec<(usize, usize)>,
}

impl GRhoClassification {
    pub fn verdict_of(&self, ix: usize) -> Option<BoundVerdict> {
        self.verdicts
            .iter()
            .find(|(i, _)| *i == ix)
            .map(|(_, v)| *v)
    }
}

pub fn classify_g_rho(
    rho: &RightWeight,
    cap: usize,
    horizon: usize,
    policy: &DivergencePolicy,
) -> GRhoClassification {
    let table = rho.table();
    let cap = cap.min(table.horizon());
    let mut verdicts = Vec::new();
    let mut bounded = Vec::new();
    let mut divergent = Vec::new();
    for ix in 0..table.count_upto(cap) {
        let u = table.path(ix);
        let report = empirical_bound_right(rho, u, horizon, policy);
        verdicts.push((ix, report.verdict));
        if report.verdict.is_bounded() {
            bounded.push(ix);
        } else {
            divergent.push(ix);
        }
    }
    let g = table.graph().clone();
    let mut closure_violations = Vec::new();
    for &a in &bounded {
        for &b in &bounded {
            let pa = table.path(a);
            let pb = table.path(b);
            if pa.len() + pb.len() > cap {
                continue;
            }
            if let Some(ab) = g.compose(pa, pb) {
                let ab_ix = table.index_of(&ab).unwrap();
                if divergent.contains(&ab_ix) {
                    closure_violations.push((a, b));
                }
            }
        }
    }
    GRhoClassification {
        cap,
        horizon,
        verdicts,
        bounded,
        divergent,
        closure_violations,
    }
}

/// A phase rule: same guards as weight rules, unit Gaussian-rational value.
#[derive(Debug, Clone)]
pub struct PhaseRule {
    pub guards: Vec<GuardAtom>,
    pub phase: GRat,
}

/// First-match-wins phase assignment per extension step; default phase 1.
#[derive(Debug, Clone)]
pub struct PhaseProgram {
    pub rules: Vec<PhaseRule>, // last entry is the default
}

impl PhaseProgram {
    pub fn trivial() -> PhaseProgram {
        PhaseProgram {
            rules: vec![PhaseRule {
                guards: vec![],
                phase: GRat::new(Rat::one(), Rat::zero()),
            }],
        }
    }

    pub fn validate(&self) -> Result<(), WeightError> {
        for r in &self.rules {
            if !is_unit_modulus(&r.phase) {
                return Err(WeightError::NonUnitPhase(crate::scalar::format_grat(&r.phase)));
            }
        }
        Ok(())
    }
}

/// A complex left weight `mu = phase * lambda` given by per-step unit phases,
/// together with the gauge data that conjugates it back to `lambda`.
#[derive(Debug, Clone)]
pub struct ComplexWeightSpec {
    alpha: PathWeight,
    /// `pi(v)`: the accumulated phase of the path, so `mu(s(v), v) = pi(v) alpha(v)`.
    path_phase: Vec<GRat>,
}

impl ComplexWeightSpec {
    pub fn new(alpha: PathWeight, phases: &PhaseProgram) -> Result<ComplexWeightSpec, WeightError> {
        phases.validate()?;
        let table = alpha.table().clone();
        let graph = table.graph().clone();
        let mut path_phase: Vec<GRat> = Vec::with_capacity(table.len());
        for ix in 0..table.len() {
            let p = table.path(ix);
            let val = match graph.split_head(p) {
                None => GRat::new(Rat::one(), Rat::zero()),
                Some((e, rest)) => {
                    let rest_ix = table.index_of(&rest).unwrap();
                    let mut phase = None;
                    for rule in &phases.rules {
                        let matches = rule
                            .guards
                            .iter()
                            .all(|gd| guard_matches_step(&graph, gd, e, &rest));
                        if matches {
                            phase = Some(rule.phase.clone());
                            break;
                        }
                    }
                    let phase = phase.unwrap_or_else(|| GRat::new(Rat::one(), Rat::zero()));
                    phase * &path_phase[rest_ix]
                }
            };
            path_phase.push(val);
        }
        Ok(ComplexWeightSpec { alpha, path_phase })
    }

    pub fn table(&self) -> &Arc<PathTable> {
        self.alpha.table()
    }

    pub fn alpha(&self) -> &PathWeight {
        &self.alpha
    }

    /// `mu(v, w) = (pi(wv) / pi(v)) lambda(v, w)`; 0 off composable pairs.
    pub fn mu(&self, v: &Path, w: &Path) -> GRat {
        let table = self.alpha.table();
        let g = table.graph();
        let Some(wv) = g.compose(w, v) else {
            return GRat::new(Rat::zero(), Rat::zero());
        };
        let vix = table.index_of(v).expect("v within horizon");
        let wvix = table.index_of(&wv).expect("wv within horizon");
        let lambda = self.alpha.alpha_ix(wvix) / self.alpha.alpha_ix(vix);
        // pi is unit-modulus, so 1/pi(v) = conj(pi(v))
        let phase = &self.path_phase[wvix] * self.path_phase[vix].conj();
        phase * GRat::new(lambda, Rat::zero())
    }

    /// Diagonal gauge values `beta(s(v), v) = 1 / pi(v)`.
    pub fn beta_diagonal(&self) -> Vec<GRat> {
        self.path_phase.iter().map(|z| z.conj()).collect()
    }
}

/// Guard semantics for a step `v -> ev`, shared with the weight rules.
fn guard_matches_step(graph: &crate::graph::Graph, atom: &GuardAtom, e: EdgeIx, v: &Path) -> bool {
    match atom {
        GuardAtom::NewEdge(id) => e == *id,
        GuardAtom::TrailingIs(id) => match v.trailing_edge() {
            Some(t) => t == *id,
            None => e == *id,
        },
        GuardAtom::TrailingNone => v.is_vertex(),
        GuardAtom::NewEqTrailing => v.trailing_edge() == Some(e),
        GuardAtom::Source(x) => graph.path_source(v) == *x,
        GuardAtom::LenLt(k) => v.len() < *k,
        GuardAtom::LenMod { modulus, residue } => v.len() % *modulus == *residue,
    }
}

/// Returns the non-negative weight and diagonal gauge of a complex weight:
/// `|mu| = lambda` and `U_beta xi_v = beta(s(v), v) xi_v`.
pub fn gauge_transform(spec: &ComplexWeightSpec) -> (PathWeight, Vec<GRat>) {
    (spec.alpha.clone(), spec.beta_diagonal())
}
