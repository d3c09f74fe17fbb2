//! Exact dense linear algebra over a field, used for nullspaces of
//! Chevalley-Eilenberg differentials, the prequantization solver and
//! polarization projections.

use num_traits::{One, Zero};
use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait FieldElem:
    Clone
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
}

impl<T> FieldElem for T where
    T: Clone
        + PartialEq
        + Zero
        + One
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Div<Output = T>
        + Neg<Output = T>
{
}

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat<T> {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<T>,
}

impl<T: FieldElem> Mat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = T::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        assert!(rows.iter().all(|x| x.len() == c), "ragged rows");
        Mat {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn at(&self, r: usize, c: usize) -> &T {
        &self.data[r * self.cols + c]
    }

    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut T {
        &mut self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[T] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// In-place reduced row echelon form; returns the pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            let Some(piv) = (row..self.rows).find(|&r| !self.at(r, col).is_zero()) else {
                continue;
            };
            self.swap_rows(row, piv);
            let inv = T::one() / self.at(row, col).clone();
            for c in col..self.cols {
                let v = self.at(row, c).clone() * inv.clone();
                *self.at_mut(row, c) = v;
            }
            for r in 0..self.rows {
                if r != row && !self.at(r, col).is_zero() {
                    let factor = self.at(r, col).clone();
                    for c in col..self.cols {
                        let v = self.at(r, c).clone() - factor.clone() * self.at(row, c).clone();
                        *self.at_mut(r, c) = v;
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.rref().len()
    }

    /// Basis of the right nullspace, one vector per free column.
    pub fn nullspace(&self) -> Vec<Vec<T>> {
        let mut m = self.clone();
        let pivots = m.rref();
        let pivot_set: Vec<Option<usize>> = {
            let mut v = vec![None; self.cols];
            for (r, &c) in pivots.iter().enumerate() {
                v[c] = Some(r);
            }
            v
        };
        let mut basis = Vec::new();
        for free in 0..self.cols {
            if pivot_set[free].is_some() {
                continue;
            }
            let mut vec = vec![T::zero(); self.cols];
            vec[free] = T::one();
            for (col, prow) in pivot_set.iter().enumerate() {
                if let Some(r) = prow {
                    vec[col] = T::zero() - m.at(*r, free).clone();
                }
            }
            basis.push(vec);
        }
        basis
    }
}

/// Outcome of an exact linear solve `A x = b`.
pub enum SolveOutcome<T> {
    /// A particular solution (free variables set to zero).
    Solution(Vec<T>),
    /// Certificate of infeasibility: `y` with `y^T A = 0` and `y^T b != 0`.
    Infeasible(Vec<T>),
}

/// Solves `A x = b` exactly, producing either a particular solution or a
/// separating functional proving there is none.
pub fn solve<T: FieldElem>(a: &Mat<T>, b: &[T]) -> SolveOutcome<T> {
    assert_eq!(a.rows, b.len());
    // Augment with b and the identity to keep track of row operations.
    let n = a.rows;
    let m = a.cols;
    let mut aug = Mat::zeros(n, m + 1 + n);
    for r in 0..n {
        for c in 0..m {
            *aug.at_mut(r, c) = a.at(r, c).clone();
        }
        *aug.at_mut(r, m) = b[r].clone();
        *aug.at_mut(r, m + 1 + r) = T::one();
    }
    // Eliminate on the A-columns only.
    let mut row = 0;
    let mut pivots: Vec<(usize, usize)> = Vec::new();
    for col in 0..m {
        if row == n {
            break;
        }
        let Some(piv) = (row..n).find(|&r| !aug.at(r, col).is_zero()) else {
            continue;
        };
        aug.swap_rows(row, piv);
        let inv = T::one() / aug.at(row, col).clone();
        for c in 0..aug.cols {
            let v = aug.at(row, c).clone() * inv.clone();
            *aug.at_mut(row, c) = v;
        }
        for r in 0..n {
            if r != row && !aug.at(r, col).is_zero() {
                let factor = aug.at(r, col).clone();
                for c in 0..aug.cols {
                    let v = aug.at(r, c).clone() - factor.clone() * aug.at(row, c).clone();
                    *aug.at_mut(r, c) = v;
                }
            }
        }
        pivots.push((row, col));
        row += 1;
    }
    // Any zero A-row with nonzero b entry certifies infeasibility.
    for r in row..n {
        if !aug.at(r, m).is_zero() {
            let y: Vec<T> = (0..n).map(|c| aug.at(r, m + 1 + c).clone()).collect();
            return SolveOutcome::Infeasible(y);
        }
    }
    let mut x = vec![T::zero(); m];
    for (r, c) in pivots {
        x[c] = aug.at(r, m).clone();
    }
    SolveOutcome::Solution(x)
}

/// Checks whether `v` lies in the row span of `basis`.
pub fn in_span<T: FieldElem>(basis: &[Vec<T>], v: &[T]) -> bool {
    if basis.is_empty() {
        return v.iter().all(|x| x.is_zero());
    }
    let cols = v.len();
    let mut with = Vec::with_capacity(basis.len() + 1);
    for b in basis {
        assert_eq!(b.len(), cols);
        with.push(b.clone());
    }
    let rank_without = Mat::from_rows(with.clone()).rank();
    with.push(v.to_vec());
    Mat::from_rows(with).rank() == rank_without
}
