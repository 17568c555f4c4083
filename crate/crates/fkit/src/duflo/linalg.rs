//! Exact rational row reduction: incremental row spans with membership tests
//! and kernel bases. Small dense matrices only — the graded pieces handled
//! here stay well under a hundred columns.

use crate::algebra::{Rat, Scalar};

/// A subspace of ℚ^n kept in reduced row echelon form.
///
/// Rows are inserted one at a time; each insertion reduces against the
/// existing rows and, when independent, back-substitutes so the invariant
/// "pivot columns are unit columns" holds at all times.
#[derive(Clone, Debug)]
pub struct RowSpan {
    ncols: usize,
    rows: Vec<Vec<Rat>>,
    pivots: Vec<usize>,
}

impl RowSpan {
    pub fn new(ncols: usize) -> Self {
        RowSpan { ncols, rows: Vec::new(), pivots: Vec::new() }
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Pivot column of each stored row, in insertion-sorted order.
    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    /// Eliminates every pivot coordinate of `v`; the result is the canonical
    /// representative of `v` modulo the span.
    pub fn reduce(&self, v: &[Rat]) -> Vec<Rat> {
        assert_eq!(v.len(), self.ncols, "column count mismatch");
        let mut out = v.to_vec();
        for (row, &piv) in self.rows.iter().zip(&self.pivots) {
            if out[piv].is_zero() {
                continue;
            }
            let f = out[piv].clone();
            for c in 0..self.ncols {
                let d = row[c].clone() * f.clone();
                out[c] = out[c].clone() - d;
            }
        }
        out
    }

    pub fn contains(&self, v: &[Rat]) -> bool {
        self.reduce(v).iter().all(Rat::is_zero)
    }

    /// Adds a vector to the span. Returns true when the rank grew.
    pub fn insert(&mut self, v: &[Rat]) -> bool {
        let mut red = self.reduce(v);
        let Some(piv) = red.iter().position(|c| !c.is_zero()) else {
            return false;
        };
        let inv = <Rat as Scalar>::one() / red[piv].clone();
        for c in red.iter_mut() {
            *c = c.clone() * inv.clone();
        }
        // back-substitute so existing rows stay reduced at the new pivot
        for row in self.rows.iter_mut() {
            if row[piv].is_zero() {
                continue;
            }
            let f = row[piv].clone();
            for c in 0..self.ncols {
                let d = red[c].clone() * f.clone();
                row[c] = row[c].clone() - d;
            }
        }
        let at = self.pivots.iter().position(|&p| p > piv).unwrap_or(self.pivots.len());
        self.pivots.insert(at, piv);
        self.rows.insert(at, red);
        true
    }
}

/// Basis of the kernel of the matrix with the given rows (acting on column
/// vectors of length `ncols`).
pub fn kernel_basis(rows: &[Vec<Rat>], ncols: usize) -> Vec<Vec<Rat>> {
    let mut span = RowSpan::new(ncols);
    for row in rows {
        span.insert(row);
    }
    let mut out = Vec::new();
    for free in 0..ncols {
        if span.pivots().contains(&free) {
            continue;
        }
        let mut v = vec![<Rat as Scalar>::zero(); ncols];
        v[free] = <Rat as Scalar>::one();
        for (row, &piv) in span.rows.iter().zip(span.pivots()) {
            v[piv] = -row[free].clone();
        }
        out.push(v);
    }
    out
}
