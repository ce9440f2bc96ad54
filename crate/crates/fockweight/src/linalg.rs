//! Exact rational row reduction.
//!
//! Constraint systems arriving from windowed commutant problems are very
//! sparse (a handful of entries per row), so rows are kept as sorted
//! coordinate lists and reduced incrementally against an echelon set keyed
//! by pivot column. Nullspace bases are computed by back substitution with
//! one free column set to 1 at a time; the resulting basis is canonical
//! (it does not depend on the order rows were inserted).

use crate::scalar::Rat;
use num::{One, Zero};
use std::collections::BTreeMap;

/// Sparse vector: strictly increasing column indices, nonzero values.
pub type SparseVec = Vec<(usize, Rat)>;

/// `dst -= c * src`, merging sorted coordinate lists.
pub fn axpy_sub(dst: &SparseVec, c: &Rat, src: &SparseVec) -> SparseVec {
    let mut out = Vec::with_capacity(dst.len() + src.len());
    let mut i = 0;
    let mut j = 0;
    while i < dst.len() || j < src.len() {
        match (dst.get(i), src.get(j)) {
            (Some((ci, vi)), Some((cj, vj))) => {
                if ci < cj {
                    out.push((*ci, vi.clone()));
                    i += 1;
                } else if cj < ci {
                    let v = -(c.clone() * vj);
                    if !v.is_zero() {
                        out.push((*cj, v));
                    }
                    j += 1;
                } else {
                    let v = vi - c.clone() * vj;
                    if !v.is_zero() {
                        out.push((*ci, v));
                    }
                    i += 1;
                    j += 1;
                }
            }
            (Some((ci, vi)), None) => {
                out.push((*ci, vi.clone()));
                i += 1;
            }
            (None, Some((cj, vj))) => {
                let v = -(c.clone() * vj);
                if !v.is_zero() {
                    out.push((*cj, v));
                }
                j += 1;
            }
            (None, None) => unreachable!(),
        }
    }
    out
}

/// Row echelon structure over the rationals with unit pivots.
#[derive(Debug, Default)]
pub struct Echelon {
    /// pivot column -> reduced row (leading entry 1 at the pivot column).
    rows: BTreeMap<usize, SparseVec>,
}

impl Echelon {
    pub fn new() -> Echelon {
        Echelon::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivot_cols(&self) -> impl Iterator<Item = usize> + '_ {
        self.rows.keys().copied()
    }

    /// Reduces `row` against the current pivots.
    pub fn reduce(&self, mut row: SparseVec) -> SparseVec {
        loop {
            let Some((lead, coeff)) = row.first().cloned() else {
                return row;
            };
            match self.rows.get(&lead) {
                Some(pivot_row) => {
                    row = axpy_sub(&row, &coeff, pivot_row);
                }
                None => return row,
            }
        }
    }

    /// Inserts a row, returning true when it increased the rank.
    pub fn insert(&mut self, row: SparseVec) -> bool {
        let mut row = self.reduce(row);
        let Some((lead, coeff)) = row.first().cloned() else {
            return false;
        };
        // normalize to a unit pivot
        if !coeff.is_one() {
            for (_, v) in row.iter_mut() {
                *v /= coeff.clone();
            }
        }
        self.rows.insert(lead, row);
        true
    }

    /// True iff `v` lies in the row space.
    pub fn contains(&self, v: SparseVec) -> bool {
        self.reduce(v).is_empty()
    }

    /// Basis of the solution space of `Ax = 0`, one vector per free column,
    /// ordered by free column index.
    pub fn nullspace(&self, ncols: usize) -> Vec<SparseVec> {
        let mut basis = Vec::new();
        for free in 0..ncols {
            if self.rows.contains_key(&free) {
                continue;
            }
            let mut x: BTreeMap<usize, Rat> = BTreeMap::new();
            x.insert(free, Rat::one());
            // pivots in descending order; each row reads only larger columns
            for (&p, row) in self.rows.iter().rev() {
                let mut s = Rat::zero();
                for (c, v) in row.iter().skip(1) {
                    if let Some(xc) = x.get(c) {
                        s += v * xc;
                    }
                }
                if !s.is_zero() {
                    x.insert(p, -s);
                }
            }
            basis.push(x.into_iter().collect());
        }
        basis
    }
}

/// Rank of a set of sparse vectors.
pub fn rank_of(vectors: impl IntoIterator<Item = SparseVec>) -> usize {
    let mut ech = Echelon::new();
    for v in vectors {
        ech.insert(v);
    }
    ech.rank()
}

/// Builds the echelon of a span once, for repeated membership tests.
pub fn span_of(vectors: impl IntoIterator<Item = SparseVec>) -> Echelon {
    let mut ech = Echelon::new();
    for v in vectors {
        ech.insert(v);
    }
    ech
}
