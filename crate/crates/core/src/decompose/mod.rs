//! Decompositions of bistochastic matrices into lotteries over deterministic
//! assignments.

mod three_agent;
mod two_type;

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Precondition, Result};
use crate::instance::{factorial, permutations, DeterministicAssignment};
use crate::lottery::Lottery;
use crate::matching::{perfect_matching_on_support, perfect_matching_with_order};
use crate::matrix::{validate_matrix, AssignmentMatrix};
use crate::scalar::Scalar;

pub use three_agent::decompose_three_agent;
pub use two_type::{
    claim1_diagnostic, claim1_partial_sums, decompose_two_type, decompose_two_type_traced,
    decompose_two_type_with, detect_two_type, TwoTypeRound, TwoTypeStructure, TwoTypeTrace, TypeSplit,
};

/// Largest `n` for which the uniform decomposition is materialized.
pub const DEFAULT_UNIFORM_CAP: usize = 8;

/// Accumulates weighted assignments, merging repeats.
#[derive(Debug, Clone)]
pub(crate) struct WeightBag<T> {
    weights: BTreeMap<DeterministicAssignment, T>,
}

impl<T: Scalar> WeightBag<T> {
    pub(crate) fn new() -> Self {
        WeightBag { weights: BTreeMap::new() }
    }

    pub(crate) fn add(&mut self, a: DeterministicAssignment, w: T) {
        if w.is_zero() {
            return;
        }
        *self.weights.entry(a).or_insert_with(T::zero) += w;
    }

    pub(crate) fn into_lottery(self) -> Result<Lottery<T>> {
        Lottery::new(self.weights)
    }
}

/// Subtracts `w` times the permutation matrix of `a` from `rows`.
pub(crate) fn subtract_permutation<T: Scalar>(rows: &mut [Vec<T>], a: &DeterministicAssignment, w: &T) {
    for (i, row) in rows.iter_mut().enumerate() {
        row[a.object_of(i)] -= w.clone();
    }
}

pub(crate) fn is_zero_matrix<T: Scalar>(rows: &[Vec<T>]) -> bool {
    rows.iter().flatten().all(|x| x.is_zero())
}

/// Peels support matchings off `rows` (nonnegative, equal row and column sums)
/// until nothing is left. `select` picks the matching for each residual.
pub(crate) fn peel<T, F>(mut rows: Vec<Vec<T>>, bag: &mut WeightBag<T>, mut select: F) -> Result<usize>
where
    T: Scalar,
    F: FnMut(&[Vec<T>]) -> Result<Option<DeterministicAssignment>>,
{
    let mut steps = 0;
    while !is_zero_matrix(&rows) {
        let a = select(&rows)?
            .ok_or_else(|| Error::arg("residual has no perfect matching on its support"))?;
        let alpha = (0..rows.len())
            .map(|i| rows[i][a.object_of(i)].clone())
            .min()
            .expect("nonempty");
        if !alpha.is_positive() {
            return Err(Error::arg("selected matching leaves the residual support"));
        }
        subtract_permutation(&mut rows, &a, &alpha);
        bag.add(a, alpha);
        steps += 1;
    }
    Ok(steps)
}

fn checked_rows<T: Scalar>(m: &AssignmentMatrix<T>) -> Result<Vec<Vec<T>>> {
    validate_matrix(m.rows()).map_err(|_| Error::Precondition(Precondition::Bistochastic))?;
    Ok(m.rows().to_vec())
}

/// Birkhoff–von Neumann peeling with the lexicographically smallest support
/// matching at every step.
pub fn birkhoff<T: Scalar>(m: &AssignmentMatrix<T>) -> Result<Lottery<T>> {
    birkhoff_with(m, |rows| perfect_matching_on_support(rows))
}

/// Birkhoff peeling with a caller-chosen matching per step.
pub fn birkhoff_with<T, F>(m: &AssignmentMatrix<T>, select: F) -> Result<Lottery<T>>
where
    T: Scalar,
    F: FnMut(&[Vec<T>]) -> Result<Option<DeterministicAssignment>>,
{
    let rows = checked_rows(m)?;
    let mut bag = WeightBag::new();
    let steps = peel(rows, &mut bag, select)?;
    let n = m.n();
    debug_assert!(steps <= n * n - 2 * n + 2);
    bag.into_lottery()
}

/// Birkhoff peeling where each step shuffles the agent and object scan orders
/// before matching.
pub fn birkhoff_randomized<T: Scalar, R: Rng>(m: &AssignmentMatrix<T>, rng: &mut R) -> Result<Lottery<T>> {
    let n = m.n();
    birkhoff_with(m, |rows| {
        let mut agents: Vec<usize> = (0..n).collect();
        let mut objects: Vec<usize> = (0..n).collect();
        agents.shuffle(rng);
        objects.shuffle(rng);
        perfect_matching_with_order(rows, &agents, &objects)
    })
}

/// Weight `1/n!` on every assignment.
pub fn uniform_decomposition<T: Scalar>(n: usize) -> Result<Lottery<T>> {
    uniform_decomposition_with_cap(n, DEFAULT_UNIFORM_CAP)
}

pub fn uniform_decomposition_with_cap<T: Scalar>(n: usize, cap: usize) -> Result<Lottery<T>> {
    if n > cap {
        return Err(Error::Resource { what: "uniform decomposition size", requested: n, limit: cap });
    }
    if n == 0 {
        return Err(Error::arg("size must be positive"));
    }
    let w = T::from_frac(1, factorial(n) as i64);
    Lottery::new(
        permutations(n)
            .into_iter()
            .map(|p| (DeterministicAssignment::new(p).expect("permutation"), w.clone())),
    )
}

/// Decomposes the uniform matrix into the `n` cyclic shifts, agent `i`
/// receiving object `(i + k) mod n` in shift `k`.
pub fn cyclic_decomposition<T: Scalar>(n: usize) -> Result<Lottery<T>> {
    if n == 0 {
        return Err(Error::arg("size must be positive"));
    }
    let w = T::from_frac(1, n as i64);
    Lottery::new((0..n).map(|k| {
        let a = DeterministicAssignment::new((0..n).map(|i| (i + k) % n).collect()).expect("shift");
        (a, w.clone())
    }))
}
