//! Bistochastic assignment matrices.

use std::fmt;

use crate::error::{Error, Result};
use crate::instance::DeterministicAssignment;
use crate::scalar::Scalar;
use crate::Rational;

/// Why a square array of numbers is not an assignment matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MatrixDefect {
    Empty,
    NotSquare { row: usize, len: usize },
    Negative { row: usize, col: usize },
    RowSum { row: usize },
    ColumnSum { col: usize },
}

impl MatrixDefect {
    pub fn code(&self) -> &'static str {
        match self {
            MatrixDefect::Empty => "empty",
            MatrixDefect::NotSquare { .. } => "not-square",
            MatrixDefect::Negative { .. } => "negative-entry",
            MatrixDefect::RowSum { .. } => "row-sum",
            MatrixDefect::ColumnSum { .. } => "column-sum",
        }
    }
}

impl fmt::Display for MatrixDefect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MatrixDefect::Empty => write!(f, "matrix is empty"),
            MatrixDefect::NotSquare { row, len } => write!(f, "row {row} has {len} entries"),
            MatrixDefect::Negative { row, col } => write!(f, "entry ({row}, {col}) is negative"),
            MatrixDefect::RowSum { row } => write!(f, "row {row} does not sum to 1"),
            MatrixDefect::ColumnSum { col } => write!(f, "column {col} does not sum to 1"),
        }
    }
}

/// Checks that `rows` is square, nonnegative and has unit row and column sums.
pub fn validate_matrix<T: Scalar>(rows: &[Vec<T>]) -> Result<(), MatrixDefect> {
    check_square(rows)?;
    let n = rows.len();
    for (i, row) in rows.iter().enumerate() {
        if let Some(j) = row.iter().position(|x| x.is_negative()) {
            return Err(MatrixDefect::Negative { row: i, col: j });
        }
    }
    for (i, row) in rows.iter().enumerate() {
        if !row.iter().cloned().sum::<T>().is_one() {
            return Err(MatrixDefect::RowSum { row: i });
        }
    }
    for j in 0..n {
        if !rows.iter().map(|r| r[j].clone()).sum::<T>().is_one() {
            return Err(MatrixDefect::ColumnSum { col: j });
        }
    }
    Ok(())
}

pub(crate) fn check_square<T>(rows: &[Vec<T>]) -> Result<(), MatrixDefect> {
    if rows.is_empty() {
        return Err(MatrixDefect::Empty);
    }
    let n = rows.len();
    match rows.iter().position(|r| r.len() != n) {
        Some(row) => Err(MatrixDefect::NotSquare { row, len: rows[row].len() }),
        None => Ok(()),
    }
}

/// `p[i][j]` is the probability that agent `i` receives object `j`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AssignmentMatrix<T: Scalar = Rational> {
    rows: Vec<Vec<T>>,
}

impl<T: Scalar> AssignmentMatrix<T> {
    pub fn new(rows: Vec<Vec<T>>) -> Result<Self> {
        validate_matrix(&rows).map_err(|d| Error::arg(format!("not bistochastic: {d}")))?;
        Ok(AssignmentMatrix { rows })
    }

    /// Caller guarantees bistochasticity.
    pub(crate) fn from_rows_unchecked(rows: Vec<Vec<T>>) -> Self {
        debug_assert!(validate_matrix(&rows).is_ok());
        AssignmentMatrix { rows }
    }

    #[cfg(test)]
    pub(crate) fn raw(rows: Vec<Vec<T>>) -> Self {
        AssignmentMatrix { rows }
    }

    pub fn uniform(n: usize) -> Self {
        let v = T::from_frac(1, n as i64);
        AssignmentMatrix { rows: vec![vec![v; n]; n] }
    }

    pub fn permutation(a: &DeterministicAssignment) -> Self {
        let n = a.n();
        let mut rows = vec![vec![T::zero(); n]; n];
        for (i, row) in rows.iter_mut().enumerate() {
            row[a.object_of(i)] = T::one();
        }
        AssignmentMatrix { rows }
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, agent: usize, object: usize) -> &T {
        &self.rows[agent][object]
    }

    pub fn row(&self, agent: usize) -> &[T] {
        &self.rows[agent]
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }

    pub fn into_rows(self) -> Vec<Vec<T>> {
        self.rows
    }

    pub fn min_entry(&self) -> T {
        self.rows.iter().flatten().min().cloned().expect("nonempty matrix")
    }
}

impl<T: Scalar> fmt::Display for AssignmentMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            writeln!(f, "{}", cells.join(" "))?;
        }
        Ok(())
    }
}
