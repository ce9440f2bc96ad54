//! Windowed truncated commutants.
//!
//! Creation operators strictly raise the grade, so the compression
//! `P_N S P_N` of any operator `S` commuting with a shift `g` of grade
//! shift `d` still satisfies
//!
//! ```text
//! [P_N S P_N, P_N g P_N] xi_v = 0      for every |v| <= N - d.
//! ```
//!
//! That windowed constraint — commutation tested only on columns where
//! truncation cannot leak — is the soundness contract of everything here.
//! Demanding full matrix commutation instead would wrongly reject
//! compressions of genuine commutant elements at the boundary grades.
//!
//! `solve_windowed_commutant` stacks the constraints of all generators into
//! one sparse linear system over the matrix entries (`D^2` unknowns) and
//! computes an exact rational nullspace basis. Solutions of the left-shift
//! problem are parametrized by their vacuum columns: reading the
//! coefficients `a_u = <X xi_{r(u)}, xi_u>` and rebuilding via
//! `f(u) = a_u / rho(r(u), u)` reproduces the solution on every row of
//! grade below the horizon.

use crate::fock::{
    left_shift, right_shift, series_operator, CoefficientFunction, FockBasis, Provenance,
    SparseOperator,
};
use crate::graph::{Path, PathTable};
use crate::linalg::{Echelon, SparseVec};
use crate::scalar::Rat;
use crate::weight::{GRhoClassification, LeftWeight, PathWeight, RightWeight};
use num::{One, Zero};
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("basis dimension {dim} exceeds the configured cap {cap}")]
    DimensionCap { dim: usize, cap: usize },
    #[error("graph shape not supported: {0}")]
    WrongGraph(String),
    #[error("classification cap {have} is too small: tail search at cap {need} needs verdicts up to 2x the cap")]
    ClassificationTooShallow { have: usize, need: usize },
    #[error(transparent)]
    Fock(#[from] crate::fock::FockError),
}

/// A truncated generator with its grade shift: 0 for vertex projections,
/// `|u|` for shifts by `u`.
#[derive(Debug, Clone)]
pub struct WindowedGenerator {
    pub op: SparseOperator<Rat>,
    pub shift: usize,
    pub label: String,
}

/// Commutation constraints `[X, g] xi_v = 0` for `|v| <= N - shift(g)`.
#[derive(Debug)]
pub struct WindowedProblem {
    basis: Arc<FockBasis>,
    generators: Vec<WindowedGenerator>,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub max_dim: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { max_dim: 600 }
    }
}

impl WindowedProblem {
    pub fn new(basis: Arc<FockBasis>) -> WindowedProblem {
        WindowedProblem {
            basis,
            generators: Vec::new(),
        }
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn generators(&self) -> &[WindowedGenerator] {
        &self.generators
    }

    pub fn push(&mut self, op: SparseOperator<Rat>, shift: usize, label: impl Into<String>) {
        assert_eq!(op.basis().fingerprint(), self.basis.fingerprint());
        self.generators.push(WindowedGenerator {
            op,
            shift,
            label: label.into(),
        });
    }

    /// Left-shift generator family: every vertex projection and every edge
    /// shift of the weight.
    pub fn left_family(
        lambda: &LeftWeight,
        basis: &Arc<FockBasis>,
    ) -> Result<WindowedProblem, SolveError> {
        let g = basis.table().graph().clone();
        let mut problem = WindowedProblem::new(basis.clone());
        for v in g.vertices() {
            let p = Path::vertex(v);
            let op = left_shift(lambda, &p, basis)?;
            problem.push(op, 0, format!("L_{}", g.vertex_id(v)));
        }
        for &e in g.edges_lex() {
            let p = g
                .path_from_edges(vec![e])
                .expect("single edges are always paths");
            let op = left_shift(lambda, &p, basis)?;
            problem.push(op, 1, format!("L_{}", g.edge_id(e)));
        }
        Ok(problem)
    }

    /// Right-shift generator family: every vertex projection plus the shifts
    /// by the given (non-vertex) paths.
    pub fn right_family(
        rho: &RightWeight,
        basis: &Arc<FockBasis>,
        shifts: &[Path],
    ) -> Result<WindowedProblem, SolveError> {
        let g = basis.table().graph().clone();
        let mut problem = WindowedProblem::new(basis.clone());
        for v in g.vertices() {
            let p = Path::vertex(v);
            let op = right_shift(rho, &p, basis)?;
            problem.push(op, 0, format!("R_{}", g.vertex_id(v)));
        }
        for u in shifts {
            if u.is_vertex() {
                continue; // vertex projections are already generators
            }
            let op = right_shift(rho, u, basis)?;
            problem.push(op, u.len(), format!("R_{}", g.path_display(u)));
        }
        Ok(problem)
    }
}

/// Exact rational basis of a windowed commutant.
#[derive(Debug)]
pub struct SolutionBasis {
    pub basis: Arc<FockBasis>,
    pub elements: Vec<SparseOperator<Rat>>,
}

impl SolutionBasis {
    pub fn dim(&self) -> usize {
        self.elements.len()
    }
}

/// Row-major vectorization of matrix entries: `(r, c) -> r * D + c`.
pub fn vectorize(op: &SparseOperator<Rat>) -> SparseVec {
    let d = op.dim();
    op.entries().map(|(r, c, v)| (r * d + c, v.clone())).collect()
}

fn devectorize(basis: &Arc<FockBasis>, v: &SparseVec) -> SparseOperator<Rat> {
    let d = basis.dim();
    let mut op = SparseOperator::zero(basis.clone());
    for (k, val) in v {
        op.insert(k / d, k % d, val.clone());
    }
    op
}

/// Solves the stacked constraint system exactly; the returned basis is
/// canonical (reduced echelon with pivots in row-major entry order).
pub fn solve_windowed_commutant(
    problem: &WindowedProblem,
    opts: &SolveOptions,
) -> Result<SolutionBasis, SolveError> {
    let basis = problem.basis.clone();
    let d = basis.dim();
    if d > opts.max_dim {
        return Err(SolveError::DimensionCap {
            dim: d,
            cap: opts.max_dim,
        });
    }
    let n = basis.horizon();
    let mut ech = Echelon::new();
    for gen in &problem.generators {
        let cols = gen.op.columns();
        let window = n.saturating_sub(gen.shift);
        for v in 0..d {
            if basis.grade(v) > window {
                continue;
            }
            let gcol = cols.get(&v);
            for w in 0..d {
                // row of [X g - g X] at (w, v), as linear form in entries of X
                let mut form: BTreeMap<usize, Rat> = BTreeMap::new();
                if let Some(gcol) = gcol {
                    for (k, val) in gcol {
                        let slot = form.entry(w * d + k).or_insert_with(Rat::zero);
                        *slot += val;
                    }
                }
                for (k, val) in gen.op.row_entries(w) {
                    let slot = form.entry(k * d + v).or_insert_with(Rat::zero);
                    *slot -= val;
                }
                let row: SparseVec = form.into_iter().filter(|(_, v)| !v.is_zero()).collect();
                if !row.is_empty() {
                    ech.insert(row);
                }
            }
        }
    }
    let elements = ech
        .nullspace(d * d)
        .iter()
        .map(|v| devectorize(&basis, v))
        .collect();
    Ok(SolutionBasis { basis, elements })
}

/// True iff `[x, g] xi_v = 0` for every `|v| <= N - shift`.
pub fn windowed_commutes(
    x: &SparseOperator<Rat>,
    gen: &SparseOperator<Rat>,
    shift: usize,
) -> bool {
    let basis = x.basis();
    let window = basis.horizon().saturating_sub(shift);
    let comm = x.commutator(gen);
    let ok = comm.entries().all(|(_, c, _)| basis.grade(c) > window);
    ok
}

/// Reads the vacuum-column coefficients of `x`:
/// `a_u = <x xi_{r(u)}, xi_u>` and `f(u) = a_u / rho(r(u), u)`.
pub fn extract_coefficients(x: &SparseOperator<Rat>, rho: &RightWeight) -> CoefficientFunction {
    let basis = x.basis().clone();
    let table = basis.table().clone();
    let g = table.graph().clone();
    let mut values = BTreeMap::new();
    for (uix, u) in table.paths().iter().enumerate() {
        let r = Path::vertex(g.path_range(u));
        let rix = table.index_of(&r).unwrap();
        let a = x.entry(uix, rix);
        if a.is_zero() {
            continue;
        }
        let norm = rho.value(&r, u); // positive on every path
        values.insert(uix, a / norm);
    }
    CoefficientFunction::new(basis, values, Provenance::Extracted)
}

/// Rebuilds the structured operator of a coefficient function; identical to
/// the series operator `sum f(u) R_u` at this truncation.
pub fn reconstruct(
    f: &CoefficientFunction,
    rho: &RightWeight,
    basis: &Arc<FockBasis>,
) -> SparseOperator<Rat> {
    series_operator(f, rho, basis)
}

/// Exact norms, horizon by horizon, of the normalized one-term series
/// operator of `u` (entries `rho(v, u) / rho(r(u), u)`). A divergent
/// sequence is the finite witness that `u` falls outside the bounded class.
pub fn elementary_growth(u: &Path, rho: &RightWeight, horizon: usize) -> Vec<(usize, Rat)> {
    let table = rho.table().clone();
    let g = table.graph().clone();
    let r = Path::vertex(g.path_range(u));
    let norm = rho.value(&r, u);
    let mut out = Vec::new();
    for n in 1..=horizon.min(table.horizon()) {
        let mut best = Rat::zero();
        for v in table.paths() {
            if v.len() + u.len() > n {
                continue;
            }
            let val = rho.value(v, u) / &norm;
            if val > best {
                best = val;
            }
        }
        out.push((n, best));
    }
    out
}

/// Interior comparison of the windowed right-shift commutant against the
/// truncated left-shift span.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ProbeReport {
    pub horizon: usize,
    pub interior: usize,
    /// Dimension of the windowed commutant at the full horizon.
    pub probe_dim: usize,
    /// Rank of its compression to the interior window.
    pub probe_compressed_dim: usize,
    /// Rank of the compressed left-shift monomial span.
    pub left_span_dim: usize,
    /// Whether the compressed left span sits inside the compressed probe span.
    pub left_span_contained: bool,
    pub gap: usize,
}

pub struct ProbeOutcome {
    pub report: ProbeReport,
    pub solutions: SolutionBasis,
    /// The compressed probe span, for membership tests.
    pub compressed_span: Echelon,
    pub interior_basis: Arc<FockBasis>,
}

/// Solves the windowed commutant of `{R_x} ∪ {R_u : u in shifts}`,
/// compresses to the interior window `M = N - max |u|`, and compares with
/// the compressed span of the truncated left shifts.
pub fn double_commutant_probe(
    alpha: &PathWeight,
    basis: &Arc<FockBasis>,
    shifts: &[Path],
    opts: &SolveOptions,
) -> Result<ProbeOutcome, SolveError> {
    let rho = RightWeight::Alpha(alpha.clone());
    let lambda = LeftWeight::Alpha(alpha.clone());
    let problem = WindowedProblem::right_family(&rho, basis, shifts)?;
    let solutions = solve_windowed_commutant(&problem, opts)?;

    let max_shift = shifts.iter().map(|u| u.len()).max().unwrap_or(0);
    let interior = basis.horizon() - max_shift;
    let interior_basis = basis.truncated(interior);

    let mut compressed_span = Echelon::new();
    for x in &solutions.elements {
        compressed_span.insert(vectorize(&x.compress(interior)));
    }

    let mut left_span = Echelon::new();
    let mut contained = true;
    let table_m = interior_basis.table().clone();
    for w in table_m.paths() {
        let lw = left_shift(&lambda, w, &interior_basis)?;
        if lw.is_zero_op() {
            continue;
        }
        let vec = vectorize(&lw);
        if !compressed_span.contains(vec.clone()) {
            contained = false;
        }
        left_span.insert(vec);
    }

    let report = ProbeReport {
        horizon: basis.horizon(),
        interior,
        probe_dim: solutions.dim(),
        probe_compressed_dim: compressed_span.rank(),
        left_span_dim: left_span.rank(),
        left_span_contained: contained,
        gap: compressed_span.rank() - left_span.rank(),
    };
    Ok(ProbeOutcome {
        report,
        solutions,
        compressed_span,
        interior_basis,
    })
}

/// The diagonal projection and separation checks of the two-cycle
/// counterexample scenario.
#[derive(Debug)]
pub struct CycleProjectionOutcome {
    pub projection: SparseOperator<Rat>,
    /// `[P, R_u]` vanishes on the window for `u` in `{x, y, ef, fe}`.
    pub commutes_with_even_shifts: bool,
    /// The vacuum functional `T -> <T xi_x, xi_x> - <T xi_f, xi_f>`
    /// vanishes on every truncated left monomial.
    pub functional_kills_left_monomials: bool,
    /// The same functional evaluates to 1 on the projection.
    pub functional_on_projection_is_one: bool,
    /// Negative control: the odd shift `e` does not commute with `P`.
    pub odd_shift_breaks_commutation: bool,
}

/// Builds the orthogonal projection onto `span{xi_x, xi_{(fe)^k}}` on a
/// directed 2-cycle and runs its exact checks. The base vertex `x` is the
/// lexicographically smallest vertex identifier; `e` is the edge leaving it.
pub fn cycle_projection_checks(
    alpha: &PathWeight,
    basis: &Arc<FockBasis>,
) -> Result<CycleProjectionOutcome, SolveError> {
    let table = basis.table().clone();
    let g = table.graph().clone();
    if g.vertex_count() != 2 || g.edge_count() != 2 {
        return Err(SolveError::WrongGraph(
            "expected a directed 2-cycle (two vertices, two edges)".into(),
        ));
    }
    let mut verts: Vec<_> = g.vertices().collect();
    verts.sort_by(|a, b| g.vertex_id(*a).cmp(g.vertex_id(*b)));
    let (x, y) = (verts[0], verts[1]);
    let mut e_edge = None;
    let mut f_edge = None;
    for &ed in g.edges_lex() {
        if g.source(ed) == x && g.range(ed) == y {
            e_edge = Some(ed);
        } else if g.source(ed) == y && g.range(ed) == x {
            f_edge = Some(ed);
        }
    }
    let (Some(e_edge), Some(f_edge)) = (e_edge, f_edge) else {
        return Err(SolveError::WrongGraph(
            "edges do not form a 2-cycle between the two vertices".into(),
        ));
    };
    let e = g.path_from_edges(vec![e_edge]).unwrap();
    let f = g.path_from_edges(vec![f_edge]).unwrap();
    let fe = g.compose(&f, &e).expect("fe is a loop at x");
    let ef = g.compose(&e, &f).expect("ef is a loop at y");

    // P: diagonal on xi_x and the even loops (fe)^k
    let mut diag = vec![Rat::zero(); basis.dim()];
    let x_path = Path::vertex(x);
    diag[table.index_of(&x_path).unwrap()] = Rat::one();
    let mut p = fe.clone();
    while let Some(ix) = table.index_of(&p) {
        diag[ix] = Rat::one();
        match g.compose(&p, &fe) {
            Some(next) if next.len() <= table.horizon() => p = next,
            _ => break,
        }
    }
    let projection = SparseOperator::diagonal(basis.clone(), diag);

    let rho = RightWeight::Alpha(alpha.clone());
    let mut commutes = true;
    for u in [Path::vertex(x), Path::vertex(y), ef.clone(), fe.clone()] {
        let ru = right_shift(&rho, &u, basis)?;
        if !windowed_commutes(&projection, &ru, u.len()) {
            commutes = false;
        }
    }

    let lambda = LeftWeight::Alpha(alpha.clone());
    let x_ix = table.index_of(&x_path).unwrap();
    let f_ix = table.index_of(&f).unwrap();
    let functional =
        |t: &SparseOperator<Rat>| -> Rat { t.entry(x_ix, x_ix) - t.entry(f_ix, f_ix) };
    let mut kills_monomials = true;
    for w in table.paths() {
        let lw = left_shift(&lambda, w, basis)?;
        if !functional(&lw).is_zero() {
            kills_monomials = false;
        }
    }
    let on_projection = functional(&projection);

    let re = right_shift(&rho, &e, basis)?;
    let odd_breaks = !windowed_commutes(&projection, &re, 1);

    Ok(CycleProjectionOutcome {
        projection,
        commutes_with_even_shifts: commutes,
        functional_kills_left_monomials: kills_monomials,
        functional_on_projection_is_one: on_projection.is_one(),
        odd_shift_breaks_commutation: odd_breaks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailsVerdict {
    HoldsOnHorizon,
    FailsOnHorizon,
}

/// Per-path witness search for the tail condition: every `v` must extend by
/// a bounded-class `u_v` to a bounded-class `v u_v`.
#[derive(Debug)]
pub struct TailsReport {
    pub cap: usize,
    /// `(path index, witness index)` with `None` marking a failed search.
    pub witnesses: Vec<(usize, Option<usize>)>,
    pub verdict: TailsVerdict,
}

/// Searches witnesses among bounded-class paths, non-vertex candidates in
/// canonical order first (vertex witnesses mean `v` itself is already in the
/// bounded class, so they come last).
pub fn tails_check(
    class: &GRhoClassification,
    table: &Arc<PathTable>,
    cap: usize,
) -> Result<TailsReport, SolveError> {
    if class.cap < 2 * cap {
        return Err(SolveError::ClassificationTooShallow {
            have: class.cap,
            need: cap,
        });
    }
    let g = table.graph().clone();
    let mut candidates: Vec<usize> = class
        .bounded
        .iter()
        .copied()
        .filter(|&ix| !table.path(ix).is_vertex() && table.path(ix).len() <= cap)
        .collect();
    candidates.extend(
        class
            .bounded
            .iter()
            .copied()
            .filter(|&ix| table.path(ix).is_vertex()),
    );

    let mut witnesses = Vec::new();
    let mut all = true;
    for vix in 0..table.count_upto(cap) {
        let v = table.path(vix);
        let mut found = None;
        for &uix in &candidates {
            let u = table.path(uix);
            let Some(vu) = g.compose(v, u) else { continue };
            if vu.len() > class.cap {
                continue;
            }
            let vu_ix = table.index_of(&vu).unwrap();
            match class.verdict_of(vu_ix) {
                Some(verdict) if verdict.is_bounded() => {
                    found = Some(uix);
                    break;
                }
                _ => {}
            }
        }
        if found.is_none() {
            all = false;
        }
        witnesses.push((vix, found));
    }
    Ok(TailsReport {
        cap,
        witnesses,
        verdict: if all {
            TailsVerdict::HoldsOnHorizon
        } else {
            TailsVerdict::FailsOnHorizon
        },
    })
}

/// The Fejér-weighted left polynomial of an operator's vacuum coefficients:
/// `sum_{|w| < k} (1 - |w|/k) a_w lambda(s(w), w)^{-1} L_w` with
/// `a_w = <T xi_{s(w)}, xi_w>`.
pub fn fejer_left_polynomial(
    t: &SparseOperator<Rat>,
    lambda: &LeftWeight,
    k: usize,
    basis: &Arc<FockBasis>,
) -> Result<SparseOperator<Rat>, SolveError> {
    assert!(k >= 1);
    let table = basis.table().clone();
    let g = table.graph().clone();
    let mut acc = SparseOperator::zero(basis.clone());
    for (wix, w) in table.paths().iter().enumerate() {
        if w.len() >= k {
            break;
        }
        let s = Path::vertex(g.path_source(w));
        let s_ix = table.index_of(&s).unwrap();
        let a_w = t.entry(wix, s_ix);
        if a_w.is_zero() {
            continue;
        }
        let alpha_w = lambda.value(&s, w);
        let weight = Rat::new(
            ((k - w.len()) as i64).into(),
            (k as i64).into(),
        );
        let coeff = weight * a_w / alpha_w;
        let lw = left_shift(lambda, w, basis)?;
        acc = acc.add(&lw.scale(&coeff));
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaCommutationCheck {
    /// The hypothesis held and the Fejér sum still commutes on the window.
    Preserved,
    /// The hypothesis held but the Fejér sum does not commute (never
    /// observed; would indicate a defect).
    Violated,
    /// The operator did not commute with the generator to begin with.
    NotApplicable,
}

/// Windowed form of the block-commutation lemma: if `[X, R_u]` vanishes on
/// the window then so does `[cesaro_sum(X, k), R_u]`, exactly.
pub fn sigma_preserves_commutation(
    x: &SparseOperator<Rat>,
    gen: &SparseOperator<Rat>,
    shift: usize,
    k: usize,
) -> SigmaCommutationCheck {
    if !windowed_commutes(x, gen, shift) {
        return SigmaCommutationCheck::NotApplicable;
    }
    if windowed_commutes(&x.cesaro_sum(k), gen, shift) {
        SigmaCommutationCheck::Preserved
    } else {
        SigmaCommutationCheck::Violated
    }
}

/// Exact inverse by Gauss-Jordan elimination; `None` for singular input.
pub fn exact_inverse(a: &SparseOperator<Rat>) -> Option<SparseOperator<Rat>> {
    let d = a.dim();
    let mut m: Vec<Vec<Rat>> = vec![vec![Rat::zero(); 2 * d]; d];
    for (r, c, v) in a.entries() {
        m[r][c] = v.clone();
    }
    for (i, row) in m.iter_mut().enumerate() {
        row[d + i] = Rat::one();
    }
    for col in 0..d {
        let pivot = (col..d).find(|&r| !m[r][col].is_zero())?;
        m.swap(col, pivot);
        let p = m[col][col].clone();
        for v in m[col].iter_mut() {
            *v /= p.clone();
        }
        for r in 0..d {
            if r != col && !m[r][col].is_zero() {
                let f = m[r][col].clone();
                let pivot_row = m[col].clone();
                for (c, src) in pivot_row.iter().enumerate().skip(col) {
                    let sub = f.clone() * src.clone();
                    m[r][c] -= sub;
                }
            }
        }
    }
    let mut inv = SparseOperator::zero(a.basis().clone());
    for (r, row) in m.iter().enumerate() {
        for c in 0..d {
            if !row[d + c].is_zero() {
                inv.insert(r, c, row[d + c].clone());
            }
        }
    }
    Some(inv)
}
