//! Norms, float cross-checks, and the transport/gauge verifications.
//!
//! Shift truncations and the grade blocks of series operators have pairwise
//! orthogonal columns, so `X*X` is diagonal and the operator norm is the
//! largest column norm — an exact rational (squared). Anything without that
//! structure falls back to seeded power iteration on `X*X` in floating
//! point and is flagged approximate.

use super::{
    complex_left_shift, left_shift, right_shift, to_complex, FockBasis, SparseOperator,
};
use crate::graph::{Path, PathTable};
use crate::scalar::{rat_sqrt, rat_to_f64, ExactScalar, Rat, Scalar};
use crate::weight::{ComplexWeightSpec, LeftWeight, PathWeight, RightWeight};
use num::complex::Complex;
use num::Zero;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use std::sync::Arc;

pub const POWER_TOL: f64 = 1e-10;
pub const POWER_MAX_ITER: usize = 10_000;

/// Operator norm of a truncated matrix.
#[derive(Debug, Clone)]
pub enum OperatorNorm {
    /// Columns are pairwise orthogonal: the norm is the largest column norm,
    /// known exactly as a squared rational (`value` when the square root is
    /// itself rational).
    Exact { norm_sq: Rat, value: Option<Rat> },
    /// Power-iteration estimate on `X*X`.
    Approximate { value: f64, iterations: usize },
}

impl OperatorNorm {
    pub fn is_exact(&self) -> bool {
        matches!(self, OperatorNorm::Exact { .. })
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            OperatorNorm::Exact { norm_sq, .. } => rat_to_f64(norm_sq).sqrt(),
            OperatorNorm::Approximate { value, .. } => *value,
        }
    }

    /// The exact rational norm, when available.
    pub fn exact_value(&self) -> Option<&Rat> {
        match self {
            OperatorNorm::Exact { value, .. } => value.as_ref(),
            OperatorNorm::Approximate { .. } => None,
        }
    }
}

/// Norm of a truncated operator: exact via orthogonal columns when the Gram
/// matrix is diagonal, otherwise a seeded power iteration.
pub fn truncated_norm<S: ExactScalar>(op: &SparseOperator<S>, seed: u64) -> OperatorNorm {
    if op.is_zero_op() {
        return OperatorNorm::Exact {
            norm_sq: Rat::zero(),
            value: Some(Rat::zero()),
        };
    }
    let gram = op.adjoint().mul(op);
    let diagonal = gram.entries().all(|(r, c, _)| r == c);
    if diagonal {
        let mut best = Rat::zero();
        for (_, _, v) in gram.entries() {
            // diagonal entries of X*X are |column| squares: real non-negative
            let d = v.abs_sq();
            let d = rat_sqrt(&d).expect("diagonal Gram entries are squares of column norms");
            if d > best {
                best = d;
            }
        }
        let value = rat_sqrt(&best);
        OperatorNorm::Exact {
            norm_sq: best,
            value,
        }
    } else {
        let dense = op.to_dense_c64();
        let (lam, iterations) = power_iteration_gram(&dense, seed);
        OperatorNorm::Approximate {
            value: lam.max(0.0).sqrt(),
            iterations,
        }
    }
}

/// Largest eigenvalue of `A*A` for a dense complex matrix, via power
/// iteration with a seeded start vector.
pub fn power_iteration_gram(a: &[Vec<Complex<f64>>], seed: u64) -> (f64, usize) {
    let n = a.len();
    if n == 0 {
        return (0.0, 0);
    }
    let mut rng = StdRng::seed_from_u64(seed);
    let mut x: Vec<Complex<f64>> = (0..n)
        .map(|_| Complex::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect();
    normalize(&mut x);
    let apply = |v: &[Complex<f64>]| -> Vec<Complex<f64>> {
        // y = A* (A v)
        let mut av = vec![Complex::new(0.0, 0.0); n];
        for (r, row) in a.iter().enumerate() {
            let mut s = Complex::new(0.0, 0.0);
            for (c, val) in row.iter().enumerate() {
                s += val * v[c];
            }
            av[r] = s;
        }
        let mut out = vec![Complex::new(0.0, 0.0); n];
        for (r, row) in a.iter().enumerate() {
            for (c, val) in row.iter().enumerate() {
                out[c] += val.conj() * av[r];
            }
        }
        out
    };
    let mut lam_prev = 0.0f64;
    for it in 1..=POWER_MAX_ITER {
        let y = apply(&x);
        // Rayleigh quotient with the normalized iterate
        let lam: f64 = x
            .iter()
            .zip(y.iter())
            .map(|(xi, yi)| (xi.conj() * yi).re)
            .sum();
        let norm = vec_norm(&y);
        if norm == 0.0 {
            return (0.0, it);
        }
        x = y;
        normalize(&mut x);
        if (lam - lam_prev).abs() <= POWER_TOL * lam.abs().max(1.0) {
            return (lam, it);
        }
        lam_prev = lam;
    }
    (lam_prev, POWER_MAX_ITER)
}

fn vec_norm(v: &[Complex<f64>]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn normalize(v: &mut [Complex<f64>]) {
    let n = vec_norm(v);
    if n > 0.0 {
        for z in v.iter_mut() {
            *z /= n;
        }
    }
}

/// Float operator norm estimate for arbitrary scalar modes.
pub fn float_norm<S: Scalar>(op: &SparseOperator<S>, seed: u64) -> f64 {
    let dense = op.to_dense_c64();
    let (lam, _) = power_iteration_gram(&dense, seed);
    lam.max(0.0).sqrt()
}

/// Discrete-Fourier cross-check of a grade block: averages
/// `z^j U_z X U_z^*` over the `m = 2N+1` roots of unity in floating point
/// and returns the largest entrywise deviation from the exact block.
pub fn fourier_block_deviation(op: &SparseOperator<Rat>, j: i64) -> f64 {
    let basis = op.basis();
    let m = 2 * basis.horizon() + 1;
    let dense = op.to_dense_c64();
    let exact = op.grade_block(j).to_dense_c64();
    let d = basis.dim();
    let mut worst = 0.0f64;
    for r in 0..d {
        for c in 0..d {
            let mut avg = Complex::new(0.0, 0.0);
            for t in 0..m {
                // z = omega^t scales entry (r, c) by z^{g_r - g_c}
                let s = (j + basis.grade(r) as i64 - basis.grade(c) as i64) * t as i64;
                let ang = 2.0 * std::f64::consts::PI * (s as f64) / (m as f64);
                avg += Complex::from_polar(1.0, ang) * dense[r][c];
            }
            avg /= m as f64;
            let dev = (avg - exact[r][c]).norm();
            if dev > worst {
                worst = dev;
            }
        }
    }
    worst
}

/// One entrywise mismatch found by a transport or gauge comparison.
#[derive(Debug, Clone)]
pub struct MatrixViolation {
    pub identity: String,
    pub generator: String,
    pub row: usize,
    pub col: usize,
    pub lhs: String,
    pub rhs: String,
}

/// Re-indexes an operator along a basis bijection: entry `(r, c)` moves to
/// `(perm[r], perm[c])`.
pub fn conjugate_by_permutation<S: Scalar>(
    op: &SparseOperator<S>,
    perm: &[usize],
    target: Arc<FockBasis>,
) -> SparseOperator<S> {
    let mut out = SparseOperator::zero(target);
    for (r, c, v) in op.entries() {
        out.insert(perm[r], perm[c], v.clone());
    }
    out
}

/// The unitary identification of the opposite-graph Fock space with this
/// one: position `j` holds the index (in `table`) of the reversal of the
/// `j`-th opposite-graph path.
pub fn transport_permutation(table: &PathTable, opposite_table: &PathTable) -> Vec<usize> {
    let g = table.graph();
    (0..opposite_table.len())
        .map(|j| {
            let rev = g.reverse_path(opposite_table.path(j));
            table
                .index_of(&rev)
                .expect("reversal maps opposite paths onto table paths")
        })
        .collect()
}

/// Checks the transport identities through the opposite graph: conjugating
/// the opposite-graph left shifts by the path-reversal unitary yields the
/// right shifts here, and vice versa. Exact entrywise comparison for all
/// generators of length at most `max_len`.
pub fn transport_check(
    alpha: &PathWeight,
    basis: &Arc<FockBasis>,
    max_len: usize,
) -> Vec<MatrixViolation> {
    let table = basis.table().clone();
    let g = table.graph().clone();
    let n = table.horizon();
    let g_op = Arc::new(g.opposite());
    let table_op = Arc::new(PathTable::enumerate(g_op, n));
    let basis_op = FockBasis::new(table_op.clone());
    let alpha_op = alpha.transported(table_op.clone());
    let perm = transport_permutation(&table, &table_op);

    let lambda = LeftWeight::Alpha(alpha.clone());
    let rho = RightWeight::Alpha(alpha.clone());
    // On the opposite graph the roles swap: the transported alpha's left
    // weight is the original rho, its right weight the original lambda.
    let lambda_op = LeftWeight::Alpha(alpha_op.clone());
    let rho_op = RightWeight::Alpha(alpha_op);

    let mut out = Vec::new();
    for u in table.paths() {
        if u.len() > max_len {
            break;
        }
        let ut = g.reverse_path(u);

        // U L_{rho^t, u^t} U* = R_{rho, u}
        let lhs = conjugate_by_permutation(
            &left_shift(&lambda_op, &ut, &basis_op).unwrap(),
            &perm,
            basis.clone(),
        );
        let rhs = right_shift(&rho, u, basis).unwrap();
        collect_mismatches(&lhs, &rhs, "U L^t U* = R", &g.path_display(u), &mut out);

        // U R_{lambda^t, u^t} U* = L_{lambda, u}
        let lhs = conjugate_by_permutation(
            &right_shift(&rho_op, &ut, &basis_op).unwrap(),
            &perm,
            basis.clone(),
        );
        let rhs = left_shift(&lambda, u, basis).unwrap();
        collect_mismatches(&lhs, &rhs, "U R^t U* = L", &g.path_display(u), &mut out);
    }
    out
}

fn collect_mismatches<S: Scalar>(
    lhs: &SparseOperator<S>,
    rhs: &SparseOperator<S>,
    identity: &str,
    generator: &str,
    out: &mut Vec<MatrixViolation>,
) {
    let diff = lhs.sub(rhs);
    for (r, c, _) in diff.entries() {
        out.push(MatrixViolation {
            identity: identity.to_string(),
            generator: generator.to_string(),
            row: r,
            col: c,
            lhs: lhs.entry(r, c).fmt_entry(),
            rhs: rhs.entry(r, c).fmt_entry(),
        });
    }
}

/// Verifies the gauge identity `U_beta L_mu,w = L_lambda,w U_beta` for all
/// `|w| <= max_len`, exactly over Gaussian rationals.
pub fn gauge_check(
    spec: &ComplexWeightSpec,
    basis: &Arc<FockBasis>,
    max_len: usize,
) -> Vec<MatrixViolation> {
    let table = basis.table().clone();
    let g = table.graph().clone();
    let beta = spec.beta_diagonal();
    let u_beta = SparseOperator::diagonal(basis.clone(), beta);
    let lambda = LeftWeight::Alpha(spec.alpha().clone());
    let mut out = Vec::new();
    for w in table.paths() {
        if w.len() > max_len {
            break;
        }
        let l_mu = complex_left_shift(spec, w, basis).unwrap();
        let l_lambda = to_complex(&left_shift(&lambda, w, basis).unwrap());
        let lhs = u_beta.mul(&l_mu);
        let rhs = l_lambda.mul(&u_beta);
        collect_mismatches(&lhs, &rhs, "U_b L_mu = L U_b", &g.path_display(w), &mut out);
    }
    out
}

/// The exact window supremum `max { lambda(v, w) : |wv| <= N }`, an
/// independent route to the shift norm.
pub fn window_max_left(lambda: &LeftWeight, w: &Path, basis: &Arc<FockBasis>) -> Rat {
    let table = basis.table();
    let mut best = Rat::zero();
    for v in table.paths() {
        if v.len() + w.len() > table.horizon() {
            continue;
        }
        let val = lambda.value(v, w);
        if val > best {
            best = val;
        }
    }
    best
}

pub fn window_max_right(rho: &RightWeight, u: &Path, basis: &Arc<FockBasis>) -> Rat {
    let table = basis.table();
    let mut best = Rat::zero();
    for v in table.paths() {
        if v.len() + u.len() > table.horizon() {
            continue;
        }
        let val = rho.value(v, u);
        if val > best {
            best = val;
        }
    }
    best
}
