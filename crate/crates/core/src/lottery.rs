//! Lotteries over deterministic assignments and the envy they induce.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::instance::{DeterministicAssignment, Instance};
use crate::matrix::AssignmentMatrix;
use crate::scalar::Scalar;
use crate::Rational;

/// A probability distribution over deterministic assignments, kept in
/// canonical form: support sorted by assignment, no duplicates, no zero weights.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Lottery<T: Scalar = Rational> {
    support: Vec<(DeterministicAssignment, T)>,
}

impl<T: Scalar> Lottery<T> {
    /// Merges duplicate assignments and drops zero weights. Weights must be
    /// nonnegative and sum to 1.
    pub fn new<I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (DeterministicAssignment, T)>,
    {
        let lottery = Self::merged(entries)?;
        let total: T = lottery.support.iter().map(|(_, w)| w.clone()).sum();
        if !total.is_one() {
            return Err(Error::arg(format!("lottery weights sum to {total}, not 1")));
        }
        Ok(lottery)
    }

    fn merged<I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (DeterministicAssignment, T)>,
    {
        let mut acc: BTreeMap<DeterministicAssignment, T> = BTreeMap::new();
        let mut size = None;
        for (a, w) in entries {
            if w.is_negative() {
                return Err(Error::arg(format!("negative lottery weight {w}")));
            }
            match size {
                None => size = Some(a.n()),
                Some(n) if n != a.n() => {
                    return Err(Error::arg("lottery mixes assignments of different sizes"))
                }
                _ => {}
            }
            if w.is_zero() {
                continue;
            }
            *acc.entry(a).or_insert_with(T::zero) += w;
        }
        if acc.is_empty() {
            return Err(Error::arg("lottery has empty support"));
        }
        Ok(Lottery { support: acc.into_iter().collect() })
    }

    pub fn point_mass(a: DeterministicAssignment) -> Self {
        Lottery { support: vec![(a, T::one())] }
    }

    pub fn n(&self) -> usize {
        self.support[0].0.n()
    }

    pub fn support(&self) -> &[(DeterministicAssignment, T)] {
        &self.support
    }

    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn weight_of(&self, a: &DeterministicAssignment) -> T {
        self.support
            .binary_search_by(|(b, _)| b.cmp(a))
            .map(|k| self.support[k].1.clone())
            .unwrap_or_else(|_| T::zero())
    }

    /// The assignment matrix this lottery implements.
    pub fn matrix(&self) -> AssignmentMatrix<T> {
        let n = self.n();
        let mut rows = vec![vec![T::zero(); n]; n];
        for (a, w) in &self.support {
            for (i, row) in rows.iter_mut().enumerate() {
                row[a.object_of(i)] += w.clone();
            }
        }
        AssignmentMatrix::from_rows_unchecked(rows)
    }
}

impl<T: Scalar> fmt::Display for Lottery<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (a, w) in &self.support {
            writeln!(f, "{w} : {:?}", a.as_slice())?;
        }
        Ok(())
    }
}

/// `matrix_of`: the assignment matrix of a lottery.
pub fn matrix_of<T: Scalar>(lottery: &Lottery<T>) -> AssignmentMatrix<T> {
    lottery.matrix()
}

/// Whether agent `i` strictly prefers the object of agent `other` to its own.
pub fn envies(
    instance: &Instance,
    a: &DeterministicAssignment,
    i: usize,
    other: usize,
) -> Result<bool> {
    instance.check_agent(i)?;
    instance.check_agent(other)?;
    if a.n() != instance.n() {
        return Err(Error::arg("assignment size does not match instance"));
    }
    if i == other {
        return Err(Error::arg("an agent cannot envy itself"));
    }
    Ok(instance.prefers(i, a.object_of(other), a.object_of(i)))
}

/// `e[i][k]` is the probability that agent `i` envies agent `k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvyMatrix<T: Scalar = Rational> {
    entries: Vec<Vec<T>>,
}

impl<T: Scalar> EnvyMatrix<T> {
    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, i: usize, k: usize) -> &T {
        &self.entries[i][k]
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.entries
    }

    pub fn max_entry(&self) -> T {
        self.entries.iter().flatten().max().cloned().unwrap_or_else(T::zero)
    }

    /// First ordered pair whose envy exceeds `bound`, if any.
    pub fn first_above(&self, bound: &T) -> Option<(usize, usize)> {
        for (i, row) in self.entries.iter().enumerate() {
            for (k, e) in row.iter().enumerate() {
                if e > bound {
                    return Some((i, k));
                }
            }
        }
        None
    }
}

impl<T: Scalar> fmt::Display for EnvyMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.entries {
            let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            writeln!(f, "{}", cells.join(" "))?;
        }
        Ok(())
    }
}

pub fn envy_matrix<T: Scalar>(instance: &Instance, lottery: &Lottery<T>) -> Result<EnvyMatrix<T>> {
    let n = instance.n();
    if lottery.n() != n {
        return Err(Error::arg(format!(
            "lottery is over {} agents but the instance has {n}",
            lottery.n()
        )));
    }
    let mut entries = vec![vec![T::zero(); n]; n];
    for (a, w) in lottery.support() {
        for (i, row) in entries.iter_mut().enumerate() {
            let own = instance.rank(i, a.object_of(i));
            for (k, e) in row.iter_mut().enumerate() {
                if instance.rank(i, a.object_of(k)) < own {
                    *e += w.clone();
                }
            }
        }
    }
    Ok(EnvyMatrix { entries })
}

/// Every ordered pair envies with probability at most 1/2.
pub fn is_dec_ef<T: Scalar>(instance: &Instance, lottery: &Lottery<T>) -> Result<bool> {
    let e = envy_matrix(instance, lottery)?;
    Ok(e.first_above(&T::half()).is_none())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn da(v: &[usize]) -> DeterministicAssignment {
        DeterministicAssignment::new(v.to_vec()).unwrap()
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_frac(n, d)
    }

    #[test]
    fn construction_merges_and_drops_zeros() {
        let l = Lottery::new(vec![
            (da(&[1, 0]), q(1, 4)),
            (da(&[0, 1]), q(0, 1)),
            (da(&[1, 0]), q(1, 4)),
            (da(&[0, 1]), q(1, 2)),
        ])
        .unwrap();
        assert_eq!(l.len(), 2);
        assert_eq!(l.weight_of(&da(&[1, 0])), q(1, 2));
        assert_eq!(l.support()[0].0, da(&[0, 1]));
    }

    #[test]
    fn construction_rejects_bad_weights() {
        assert!(Lottery::new(vec![(da(&[0, 1]), q(1, 2))]).is_err());
        assert!(Lottery::new(vec![(da(&[0, 1]), q(3, 2)), (da(&[1, 0]), q(-1, 2))]).is_err());
        assert!(Lottery::new(vec![(da(&[0, 1]), q(1, 2)), (da(&[0, 1, 2]), q(1, 2))]).is_err());
        assert!(Lottery::<Rational>::new(vec![]).is_err());
    }

    #[test]
    fn envies_checks_indices() {
        let inst = Instance::identical(3).unwrap();
        let a = da(&[1, 0, 2]);
        assert!(envies(&inst, &a, 0, 1).unwrap());
        assert!(!envies(&inst, &a, 1, 0).unwrap());
        assert!(envies(&inst, &a, 0, 3).is_err());
        assert!(envies(&inst, &a, 1, 1).is_err());
    }

    #[test]
    fn top_object_precludes_envy() {
        let inst = Instance::new(vec![vec![2, 0, 1], vec![0, 1, 2], vec![1, 0, 2]]).unwrap();
        let a = da(&[2, 0, 1]);
        for i in 0..3 {
            for k in 0..3 {
                if i != k {
                    assert!(!envies(&inst, &a, i, k).unwrap());
                }
            }
        }
    }

    #[test]
    fn size_mismatch_is_an_error() {
        let inst = Instance::identical(3).unwrap();
        let l = Lottery::<Rational>::point_mass(DeterministicAssignment::identity(2));
        assert!(envy_matrix(&inst, &l).is_err());
    }

    #[test]
    fn point_mass_matrix_is_permutation() {
        let a = da(&[2, 0, 1]);
        let l = Lottery::<Rational>::point_mass(a.clone());
        assert_eq!(l.matrix(), AssignmentMatrix::permutation(&a));
    }
}
