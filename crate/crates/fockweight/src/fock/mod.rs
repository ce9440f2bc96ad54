//! Truncated Fock-space matrices.
//!
//! The Fock space of a graph has one basis vector per path; the truncation
//! `H_N` keeps the paths of length at most `N`. Weighted creation operators
//! act by
//!
//! ```text
//! L_w xi_v = lambda(v, w) xi_{wv}        R_u xi_v = rho(v, u) xi_{vu}
//! ```
//!
//! and strictly raise the grade (path length). That is the load-bearing
//! structural fact here: compressing `P_N L P_N` kills nothing that could
//! flow back under grade `N`, so identities on the interior of the window
//! hold exactly, not approximately.
//!
//! Everything is stored sparsely with exact scalars. Grade-block extraction
//! (`grade_block`, the maps `X -> sum_m Q_m X Q_{m+j}`) and their Fejér
//! averages (`cesaro_sum`) are exact rational operations on entries.

pub mod analysis;

use crate::graph::{Path, PathTable};
use crate::scalar::{GRat, Rat, Scalar, ScalarMode};
use crate::weight::{ComplexWeightSpec, LeftWeight, RightWeight};
use num::{One, Zero};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FockError {
    #[error("path `{0}` is outside the working horizon")]
    PathOutsideHorizon(String),
    #[error("not a subgraph: {0}")]
    NotASubgraph(String),
    #[error("operator bases differ")]
    BasisMismatch,
}

/// The truncated Fock basis: paths of length at most `N` in table order.
#[derive(Debug)]
pub struct FockBasis {
    table: Arc<PathTable>,
}

impl FockBasis {
    pub fn new(table: Arc<PathTable>) -> Arc<FockBasis> {
        Arc::new(FockBasis { table })
    }

    pub fn table(&self) -> &Arc<PathTable> {
        &self.table
    }

    pub fn dim(&self) -> usize {
        self.table.len()
    }

    pub fn horizon(&self) -> usize {
        self.table.horizon()
    }

    pub fn grade(&self, ix: usize) -> usize {
        self.table.grade(ix)
    }

    pub fn fingerprint(&self) -> u64 {
        self.table.fingerprint()
    }

    /// The truncation to a smaller horizon; its index space is a prefix of
    /// this one because tables are ordered by length first.
    pub fn truncated(&self, m: usize) -> Arc<FockBasis> {
        assert!(m <= self.horizon());
        let table = PathTable::enumerate(self.table.graph().clone(), m);
        FockBasis::new(Arc::new(table))
    }
}

/// Sparse matrix on a truncated Fock basis with a fixed scalar mode.
#[derive(Debug, Clone)]
pub struct SparseOperator<S: Scalar> {
    basis: Arc<FockBasis>,
    entries: BTreeMap<(usize, usize), S>,
}

impl<S: Scalar> PartialEq for SparseOperator<S> {
    fn eq(&self, other: &Self) -> bool {
        self.basis.fingerprint() == other.basis.fingerprint() && self.entries == other.entries
    }
}

impl<S: Scalar> SparseOperator<S> {
    pub fn zero(basis: Arc<FockBasis>) -> Self {
        SparseOperator {
            basis,
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(basis: Arc<FockBasis>) -> Self {
        let entries = (0..basis.dim()).map(|i| ((i, i), S::one())).collect();
        SparseOperator { basis, entries }
    }

    pub fn diagonal(basis: Arc<FockBasis>, values: Vec<S>) -> Self {
        assert_eq!(values.len(), basis.dim());
        let entries = values
            .into_iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .map(|(i, v)| ((i, i), v))
            .collect();
        SparseOperator { basis, entries }
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn mode(&self) -> ScalarMode {
        S::MODE
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn insert(&mut self, row: usize, col: usize, value: S) {
        if value.is_zero() {
            self.entries.remove(&(row, col));
        } else {
            self.entries.insert((row, col), value);
        }
    }

    pub fn entry(&self, row: usize, col: usize) -> S {
        self.entries.get(&(row, col)).cloned().unwrap_or_else(S::zero)
    }

    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &S)> {
        self.entries.iter().map(|(&(r, c), v)| (r, c, v))
    }

    pub fn is_zero_op(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn row_entries(&self, row: usize) -> impl Iterator<Item = (usize, &S)> {
        self.entries
            .range((row, 0)..=(row, usize::MAX))
            .map(|(&(_, c), v)| (c, v))
    }

    /// Column-indexed view; built on demand.
    pub fn columns(&self) -> BTreeMap<usize, Vec<(usize, S)>> {
        let mut cols: BTreeMap<usize, Vec<(usize, S)>> = BTreeMap::new();
        for (&(r, c), v) in &self.entries {
            cols.entry(c).or_default().push((r, v.clone()));
        }
        cols
    }

    pub fn column(&self, col: usize) -> Vec<(usize, S)> {
        self.entries
            .iter()
            .filter(|(&(_, c), _)| c == col)
            .map(|(&(r, _), v)| (r, v.clone()))
            .collect()
    }

    fn assert_same_basis(&self, other: &Self) {
        assert_eq!(
            self.basis.fingerprint(),
            other.basis.fingerprint(),
            "operator bases differ"
        );
    }

    pub fn add(&self, other: &Self) -> Self {
        self.assert_same_basis(other);
        let mut out = self.clone();
        for (&(r, c), v) in &other.entries {
            let cur = out.entry(r, c);
            out.insert(r, c, cur + v.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.assert_same_basis(other);
        let mut out = self.clone();
        for (&(r, c), v) in &other.entries {
            let cur = out.entry(r, c);
            out.insert(r, c, cur - v.clone());
        }
        out
    }

    pub fn scale(&self, c: &S) -> Self {
        let mut out = SparseOperator::zero(self.basis.clone());
        if c.is_zero() {
            return out;
        }
        for (&(r, cc), v) in &self.entries {
            out.insert(r, cc, c.clone() * v.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.assert_same_basis(other);
        let mut acc: BTreeMap<(usize, usize), S> = BTreeMap::new();
        for (&(r, k), va) in &self.entries {
            for (c, vb) in other.row_entries(k) {
                let term = va.clone() * vb.clone();
                if term.is_zero() {
                    continue;
                }
                match acc.get_mut(&(r, c)) {
                    Some(slot) => *slot = slot.clone() + term,
                    None => {
                        acc.insert((r, c), term);
                    }
                }
            }
        }
        acc.retain(|_, v| !v.is_zero());
        SparseOperator {
            basis: self.basis.clone(),
            entries: acc,
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let entries = self
            .entries
            .iter()
            .map(|(&(r, c), v)| ((c, r), v.conjugate()))
            .collect();
        SparseOperator {
            basis: self.basis.clone(),
            entries,
        }
    }

    /// Commutator `[self, other]`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.mul(other).sub(&other.mul(self))
    }

    /// Applies the operator to the unit vector at `col`.
    pub fn apply_basis_vector(&self, col: usize) -> Vec<(usize, S)> {
        self.column(col)
    }

    /// `P_m (.) P_m` re-expressed on the truncated basis (a prefix of the
    /// index space, because tables order by length first).
    pub fn compress(&self, m: usize) -> Self {
        let small = self.basis.truncated(m);
        let d = small.dim();
        let entries = self
            .entries
            .iter()
            .filter(|(&(r, c), _)| r < d && c < d)
            .map(|(&k, v)| (k, v.clone()))
            .collect();
        SparseOperator {
            basis: small,
            entries,
        }
    }

    /// Grade-block extraction: keeps entries with row grade = col grade - j.
    pub fn grade_block(&self, j: i64) -> Self {
        let entries = self
            .entries
            .iter()
            .filter(|(&(r, c), _)| {
                self.basis.grade(r) as i64 == self.basis.grade(c) as i64 - j
            })
            .map(|(&k, v)| (k, v.clone()))
            .collect();
        SparseOperator {
            basis: self.basis.clone(),
            entries,
        }
    }

    /// Fejér-weighted Cesàro sum of grade blocks:
    /// entries in block `j` are scaled by `1 - |j|/k` for `|j| < k`, dropped
    /// otherwise. Exact.
    pub fn cesaro_sum(&self, k: usize) -> Self {
        assert!(k >= 1);
        let mut out = SparseOperator::zero(self.basis.clone());
        for (&(r, c), v) in &self.entries {
            let j = self.basis.grade(c) as i64 - self.basis.grade(r) as i64;
            let aj = j.unsigned_abs() as usize;
            if aj < k {
                let w = Rat::new(((k - aj) as i64).into(), (k as i64).into());
                out.insert(r, c, v.clone() * S::from_rat(&w));
            }
        }
        out
    }

    /// Squared Frobenius norm, exact for exact scalars.
    pub fn frobenius_sq(&self) -> Rat
    where
        S: crate::scalar::ExactScalar,
    {
        let mut s = Rat::zero();
        for v in self.entries.values() {
            s += v.abs_sq();
        }
        s
    }

    pub fn to_dense_c64(&self) -> Vec<Vec<num::complex::Complex<f64>>> {
        let d = self.dim();
        let mut m = vec![vec![num::complex::Complex::new(0.0, 0.0); d]; d];
        for (&(r, c), v) in &self.entries {
            m[r][c] = v.to_c64();
        }
        m
    }

    /// Documented sparse-triplet export: header lines name the basis
    /// fingerprint, horizon, dimension and scalar mode; entries follow in
    /// row-major order.
    pub fn export_triplets(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# fockweight sparse-operator v1");
        let _ = writeln!(
            out,
            "# basis {:016x} horizon {} dim {} scalar {}",
            self.basis.fingerprint(),
            self.basis.horizon(),
            self.dim(),
            S::MODE.name()
        );
        for (&(r, c), v) in &self.entries {
            let _ = writeln!(out, "{} {} {}", r, c, v.fmt_entry());
        }
        out
    }
}

/// Weighted left creation operator `P_N L_w P_N`: entries
/// `lambda(v, w)` at `(wv, v)` whenever `|wv| <= N`.
pub fn left_shift(
    lambda: &LeftWeight,
    w: &Path,
    basis: &Arc<FockBasis>,
) -> Result<SparseOperator<Rat>, FockError> {
    let table = basis.table();
    let g = table.graph().clone();
    if table.index_of(w).is_none() {
        return Err(FockError::PathOutsideHorizon(g.path_display(w)));
    }
    let mut op = SparseOperator::zero(basis.clone());
    for (vix, v) in table.paths().iter().enumerate() {
        if v.len() + w.len() > table.horizon() {
            continue;
        }
        if let Some(wv) = g.compose(w, v) {
            let row = table.index_of(&wv).expect("wv within horizon");
            op.insert(row, vix, lambda.value(v, w));
        }
    }
    Ok(op)
}

/// Weighted right creation operator `P_N R_u P_N`: entries
/// `rho(v, u)` at `(vu, v)` whenever `|vu| <= N`.
pub fn right_shift(
    rho: &RightWeight,
    u: &Path,
    basis: &Arc<FockBasis>,
) -> Result<SparseOperator<Rat>, FockError> {
    let table = basis.table();
    let g = table.graph().clone();
    if table.index_of(u).is_none() {
        return Err(FockError::PathOutsideHorizon(g.path_display(u)));
    }
    let mut op = SparseOperator::zero(basis.clone());
    for (vix, v) in table.paths().iter().enumerate() {
        if v.len() + u.len() > table.horizon() {
            continue;
        }
        if let Some(vu) = g.compose(v, u) {
            let row = table.index_of(&vu).expect("vu within horizon");
            op.insert(row, vix, rho.value(v, u));
        }
    }
    Ok(op)
}

/// Complex weighted left shift for a phase-twisted weight.
pub fn complex_left_shift(
    spec: &ComplexWeightSpec,
    w: &Path,
    basis: &Arc<FockBasis>,
) -> Result<SparseOperator<GRat>, FockError> {
    let table = basis.table();
    let g = table.graph().clone();
    if table.index_of(w).is_none() {
        return Err(FockError::PathOutsideHorizon(g.path_display(w)));
    }
    let mut op = SparseOperator::zero(basis.clone());
    for (vix, v) in table.paths().iter().enumerate() {
        if v.len() + w.len() > table.horizon() {
            continue;
        }
        if let Some(wv) = g.compose(w, v) {
            let row = table.index_of(&wv).expect("wv within horizon");
            op.insert(row, vix, spec.mu(v, w));
        }
    }
    Ok(op)
}

/// Orthogonal projection onto the paths of length `k`.
pub fn grade_projection(basis: &Arc<FockBasis>, k: usize) -> SparseOperator<Rat> {
    let mut op = SparseOperator::zero(basis.clone());
    for ix in basis.table().grade_range(k) {
        op.insert(ix, ix, Rat::one());
    }
    op
}

/// Lossless widening of a rational operator to Gaussian-rational entries.
pub fn to_complex(op: &SparseOperator<Rat>) -> SparseOperator<GRat> {
    let mut out = SparseOperator::zero(op.basis().clone());
    for (r, c, v) in op.entries() {
        out.insert(r, c, GRat::new(v.clone(), Rat::zero()));
    }
    out
}

/// Explicit lossy conversion to float entries.
pub fn to_float(op: &SparseOperator<Rat>) -> SparseOperator<f64> {
    let mut out = SparseOperator::zero(op.basis().clone());
    for (r, c, v) in op.entries() {
        out.insert(r, c, crate::scalar::rat_to_f64(v));
    }
    out
}

/// Vacuum-column coefficient function `f`, the normal form data of a
/// commutant element: the associated operator has entries `f(u) rho(v, u)`.
#[derive(Debug, Clone)]
pub struct CoefficientFunction {
    basis: Arc<FockBasis>,
    values: BTreeMap<usize, Rat>,
    provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    UserGiven,
    Extracted,
}

impl CoefficientFunction {
    pub fn new(basis: Arc<FockBasis>, values: BTreeMap<usize, Rat>, provenance: Provenance) -> Self {
        let values = values.into_iter().filter(|(_, v)| !v.is_zero()).collect();
        CoefficientFunction {
            basis,
            values,
            provenance,
        }
    }

    pub fn indicator(basis: Arc<FockBasis>, path_ix: usize, value: Rat) -> Self {
        let mut values = BTreeMap::new();
        values.insert(path_ix, value);
        CoefficientFunction::new(basis, values, Provenance::UserGiven)
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn support(&self) -> impl Iterator<Item = (usize, &Rat)> {
        self.values.iter().map(|(&ix, v)| (ix, v))
    }

    pub fn value(&self, path_ix: usize) -> Rat {
        self.values.get(&path_ix).cloned().unwrap_or_else(Rat::zero)
    }
}

/// The series operator of a coefficient function: entries
/// `f(u) rho(v, u)` at `(vu, v)`. At a finite truncation this equals the
/// finite sum of `f(u) R_u` over the support of `f`, exactly.
pub fn series_operator(
    f: &CoefficientFunction,
    rho: &RightWeight,
    basis: &Arc<FockBasis>,
) -> SparseOperator<Rat> {
    let table = basis.table();
    let g = table.graph().clone();
    let mut op = SparseOperator::zero(basis.clone());
    for (uix, fu) in f.support() {
        let u = table.path(uix).clone();
        for (vix, v) in table.paths().iter().enumerate() {
            if v.len() + u.len() > table.horizon() {
                continue;
            }
            if let Some(vu) = g.compose(v, &u) {
                let row = table.index_of(&vu).unwrap();
                let cur = op.entry(row, vix);
                op.insert(row, vix, cur + fu * &rho.value(v, &u));
            }
        }
    }
    op
}

/// Paths whose coefficient is nonzero but whose right-boundedness verdict is
/// divergent; a finite truncation is still well-defined, so this is a
/// warning, not an error.
pub fn series_divergence_warnings(
    f: &CoefficientFunction,
    class: &crate::weight::GRhoClassification,
) -> Vec<usize> {
    f.support()
        .filter_map(|(ix, _)| match class.verdict_of(ix) {
            Some(v) if !v.is_bounded() => Some(ix),
            _ => None,
        })
        .collect()
}

/// A subgraph given by identifier sets.
#[derive(Debug, Clone)]
pub struct SubgraphSpec {
    pub vertices: std::collections::BTreeSet<String>,
    pub edges: std::collections::BTreeSet<String>,
}

impl SubgraphSpec {
    pub fn full(g: &crate::graph::Graph) -> SubgraphSpec {
        SubgraphSpec {
            vertices: g.vertices().map(|v| g.vertex_id(v).to_string()).collect(),
            edges: g.edges_lex().iter().map(|&e| g.edge_id(e).to_string()).collect(),
        }
    }

    pub fn validate(&self, g: &crate::graph::Graph) -> Result<(), FockError> {
        for v in &self.vertices {
            g.vertex_by_id(v)
                .map_err(|e| FockError::NotASubgraph(e.to_string()))?;
        }
        for e in &self.edges {
            let eix = g
                .edge_by_id(e)
                .map_err(|er| FockError::NotASubgraph(er.to_string()))?;
            for end in [g.source(eix), g.range(eix)] {
                if !self.vertices.contains(g.vertex_id(end)) {
                    return Err(FockError::NotASubgraph(format!(
                        "edge `{e}` has endpoint `{}` outside the subgraph",
                        g.vertex_id(end)
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn contains_path(&self, g: &crate::graph::Graph, p: &Path) -> bool {
        match p {
            Path::Vertex(v) => self.vertices.contains(g.vertex_id(*v)),
            Path::Edges(es) => es.iter().all(|&e| {
                self.edges.contains(g.edge_id(e))
                    && self.vertices.contains(g.vertex_id(g.source(e)))
                    && self.vertices.contains(g.vertex_id(g.range(e)))
            }),
        }
    }
}

/// Diagonal 0/1 projection onto paths of the subgraph.
pub fn subgraph_projection(
    sub: &SubgraphSpec,
    basis: &Arc<FockBasis>,
) -> Result<SparseOperator<Rat>, FockError> {
    let table = basis.table();
    let g = table.graph();
    sub.validate(g)?;
    let mut op = SparseOperator::zero(basis.clone());
    for (ix, p) in table.paths().iter().enumerate() {
        if sub.contains_path(g, p) {
            op.insert(ix, ix, Rat::one());
        }
    }
    Ok(op)
}

/// The finite partial series `F_j = sum f(u) R_u` over subgraph paths `u`
/// with `|u| = -j` in the support of `f`.
pub fn partial_series(
    j: i64,
    sub: &SubgraphSpec,
    f: &CoefficientFunction,
    rho: &RightWeight,
    basis: &Arc<FockBasis>,
) -> Result<SparseOperator<Rat>, FockError> {
    let table = basis.table();
    let g = table.graph();
    sub.validate(g)?;
    let mut op = SparseOperator::zero(basis.clone());
    if j > 0 {
        return Ok(op);
    }
    let target_len = (-j) as usize;
    for (uix, fu) in f.support() {
        let u = table.path(uix);
        if u.len() != target_len || !sub.contains_path(g, u) {
            continue;
        }
        let term = right_shift(rho, u, basis)?;
        op = op.add(&term.scale(fu));
    }
    Ok(op)
}
