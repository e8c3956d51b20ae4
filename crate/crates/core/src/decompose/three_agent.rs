use crate::error::{Error, Precondition, Result};
use crate::instance::{permutations, DeterministicAssignment, Instance};
use crate::lottery::Lottery;
use crate::matching::perfect_matching_on_support;
use crate::matrix::{validate_matrix, AssignmentMatrix};
use crate::properties::is_sd_ef;
use crate::scalar::Scalar;

use super::{peel, WeightBag};

/// Envy-bounded decomposition of an SD-EF matrix for three agents.
///
/// With `p*` the smallest entry, every one of the six assignments receives
/// `p*/2`, which removes `p*` from each entry. The residual has a zero entry,
/// so its Birkhoff decomposition is unique; it is peeled off as usual.
pub fn decompose_three_agent<T: Scalar>(instance: &Instance, m: &AssignmentMatrix<T>) -> Result<Lottery<T>> {
    if instance.n() != 3 || m.n() != 3 {
        return Err(Error::Precondition(Precondition::ThreeAgents));
    }
    validate_matrix(m.rows()).map_err(|_| Error::Precondition(Precondition::Bistochastic))?;
    if !is_sd_ef(instance, m)? {
        return Err(Error::Precondition(Precondition::SdEnvyFree));
    }
    let p_star = m.min_entry();
    let half = p_star.clone() * T::half();
    let mut bag = WeightBag::new();
    for p in permutations(3) {
        bag.add(DeterministicAssignment::new(p).expect("permutation"), half.clone());
    }
    let residual: Vec<Vec<T>> = m
        .rows()
        .iter()
        .map(|r| r.iter().map(|x| x.clone() - p_star.clone()).collect())
        .collect();
    peel(residual, &mut bag, |rows| perfect_matching_on_support(rows))?;
    bag.into_lottery()
}
