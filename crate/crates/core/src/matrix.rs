use std::ops::{Index, IndexMut};

use crate::error::ModelError;
use crate::scalar::Scalar;

/// Dense row-major `rows × cols` matrix. Rows are agents, columns are
/// alternatives everywhere in this crate.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Matrix<S> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Clone> Matrix<S> {
    pub fn filled(rows: usize, cols: usize, value: S) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![value; rows * cols],
        }
    }

    /// Builds a matrix from nested rows, rejecting ragged input.
    pub fn from_rows(rows: Vec<Vec<S>>) -> Result<Self, ModelError> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(n * m);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != m {
                return Err(ModelError::RaggedRow {
                    row: i,
                    expected: m,
                    found: row.len(),
                });
            }
            data.extend(row);
        }
        Ok(Matrix { rows: n, cols: m, data })
    }

    pub fn to_rows(&self) -> Vec<Vec<S>> {
        self.data
            .chunks(self.cols.max(1))
            .map(<[S]>::to_vec)
            .take(self.rows)
            .collect()
    }
}

impl<S> Matrix<S> {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn row(&self, i: usize) -> &[S] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [S] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, a: usize) -> impl Iterator<Item = &S> + '_ {
        (0..self.rows).map(move |i| &self.data[i * self.cols + a])
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[S]> + '_ {
        (0..self.rows).map(move |i| self.row(i))
    }
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix::filled(rows, cols, S::zero())
    }

    pub fn column_sum(&self, a: usize) -> S {
        self.column(a).fold(S::zero(), |acc, v| acc + v.clone())
    }

    /// Entry-wise sum; shapes must agree.
    pub fn add(&self, other: &Matrix<S>) -> Result<Matrix<S>, ModelError> {
        if self.shape() != other.shape() {
            return Err(ModelError::ShapeMismatch {
                expected: self.shape(),
                found: other.shape(),
            });
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(x, y)| x.clone() + y.clone())
                .collect(),
        })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }
}

impl<S> Index<(usize, usize)> for Matrix<S> {
    type Output = S;

    fn index(&self, (i, a): (usize, usize)) -> &S {
        debug_assert!(i < self.rows && a < self.cols);
        &self.data[i * self.cols + a]
    }
}

impl<S> IndexMut<(usize, usize)> for Matrix<S> {
    fn index_mut(&mut self, (i, a): (usize, usize)) -> &mut S {
        debug_assert!(i < self.rows && a < self.cols);
        &mut self.data[i * self.cols + a]
    }
}
