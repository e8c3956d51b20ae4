//! Assignment rules: serial dictatorship, random priority and probabilistic
//! serial.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::instance::{factorial, is_permutation, permutations, DeterministicAssignment, Instance};
use crate::lottery::Lottery;
use crate::matrix::AssignmentMatrix;
use crate::scalar::Scalar;

/// Largest `n` for which random priority enumerates all `n!` orders by default.
pub const DEFAULT_RP_CAP: usize = 8;

/// Agents pick, in `order`, their favourite object among those still left.
pub fn serial_dictatorship(instance: &Instance, order: &[usize]) -> Result<DeterministicAssignment> {
    let n = instance.n();
    if !is_permutation(order, n) {
        return Err(Error::arg(format!("{order:?} is not an order of the {n} agents")));
    }
    Ok(serial_dictatorship_unchecked(instance, order))
}

fn serial_dictatorship_unchecked(instance: &Instance, order: &[usize]) -> DeterministicAssignment {
    let n = instance.n();
    let mut taken = vec![false; n];
    let mut out = vec![0; n];
    for &agent in order {
        let pick = *instance
            .preference(agent)
            .iter()
            .find(|&&o| !taken[o])
            .expect("an object remains for every agent");
        taken[pick] = true;
        out[agent] = pick;
    }
    DeterministicAssignment::new(out).expect("serial dictatorship yields a permutation")
}

/// Uniform mixture of serial dictatorships over all agent orders.
pub fn random_priority<T: Scalar>(instance: &Instance) -> Result<Lottery<T>> {
    random_priority_with_cap(instance, DEFAULT_RP_CAP)
}

pub fn random_priority_with_cap<T: Scalar>(instance: &Instance, cap: usize) -> Result<Lottery<T>> {
    let n = instance.n();
    if n > cap {
        return Err(Error::Resource { what: "random priority agents", requested: n, limit: cap });
    }
    let orders = permutations(n);
    let outcomes: Vec<DeterministicAssignment> = if n >= 7 {
        orders.par_iter().map(|o| serial_dictatorship_unchecked(instance, o)).collect()
    } else {
        orders.iter().map(|o| serial_dictatorship_unchecked(instance, o)).collect()
    };
    let mut counts: BTreeMap<DeterministicAssignment, i64> = BTreeMap::new();
    for a in outcomes {
        *counts.entry(a).or_default() += 1;
    }
    let total = factorial(n) as i64;
    Lottery::new(counts.into_iter().map(|(a, c)| (a, T::from_frac(c, total))))
}

/// One step of the eating process: at `time`, the listed objects run out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EatingEvent<T> {
    pub time: T,
    pub depleted: Vec<usize>,
    /// Total amount eaten by all agents up to `time`.
    pub eaten: T,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EatingTrace<T: Scalar> {
    pub matrix: AssignmentMatrix<T>,
    pub events: Vec<EatingEvent<T>>,
}

/// Probabilistic serial: all agents eat their best remaining object at unit
/// speed until everything is gone.
pub fn probabilistic_serial<T: Scalar>(instance: &Instance) -> AssignmentMatrix<T> {
    probabilistic_serial_trace(instance).matrix
}

pub fn probabilistic_serial_trace<T: Scalar>(instance: &Instance) -> EatingTrace<T> {
    let n = instance.n();
    let mut remaining = vec![T::one(); n];
    let mut eaten = vec![vec![T::zero(); n]; n];
    let mut cursor = vec![0usize; n];
    let mut now = T::zero();
    let mut events = Vec::new();
    let mut left = n;
    while left > 0 {
        // advance each agent to its best remaining object
        let mut target = vec![0usize; n];
        let mut eaters = vec![0i64; n];
        for i in 0..n {
            let prefs = instance.preference(i);
            while remaining[prefs[cursor[i]]].is_zero() {
                cursor[i] += 1;
            }
            target[i] = prefs[cursor[i]];
            eaters[target[i]] += 1;
        }
        let dt = (0..n)
            .filter(|&o| eaters[o] > 0)
            .map(|o| remaining[o].clone() / T::from_int(eaters[o]))
            .min()
            .expect("some object is being eaten");
        for i in 0..n {
            eaten[i][target[i]] += dt.clone();
        }
        let mut depleted = Vec::new();
        for o in 0..n {
            if eaters[o] > 0 {
                remaining[o] -= dt.clone() * T::from_int(eaters[o]);
                if remaining[o].is_zero() {
                    depleted.push(o);
                }
            }
        }
        now += dt;
        left -= depleted.len();
        let total = eaten.iter().flatten().cloned().sum();
        events.push(EatingEvent { time: now.clone(), depleted, eaten: total });
    }
    EatingTrace { matrix: AssignmentMatrix::from_rows_unchecked(eaten), events }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_frac(n, d)
    }

    #[test]
    fn identical_preferences_follow_the_order() {
        let inst = Instance::identical(4).unwrap();
        let a = serial_dictatorship(&inst, &[2, 0, 3, 1]).unwrap();
        assert_eq!(a.as_slice(), &[1, 3, 0, 2]);
    }

    #[test]
    fn invalid_order_is_rejected() {
        let inst = Instance::identical(3).unwrap();
        assert!(serial_dictatorship(&inst, &[0, 0, 1]).is_err());
        assert!(serial_dictatorship(&inst, &[0, 1]).is_err());
    }

    #[test]
    fn rp_cap_is_enforced() {
        let inst = Instance::identical(4).unwrap();
        let err = random_priority_with_cap::<Rational>(&inst, 3).unwrap_err();
        assert!(matches!(err, Error::Resource { requested: 4, limit: 3, .. }));
    }

    #[test]
    fn ps_simultaneous_depletion_is_one_event() {
        // two agents, distinct favourites: both objects run out at t = 1
        let inst = Instance::new(vec![vec![0, 1], vec![1, 0]]).unwrap();
        let trace = probabilistic_serial_trace::<Rational>(&inst);
        assert_eq!(trace.events.len(), 1);
        assert_eq!(trace.events[0].depleted, vec![0, 1]);
        assert_eq!(trace.matrix.get(0, 0), &q(1, 1));
    }

    #[test]
    fn ps_identical_is_uniform() {
        let inst = Instance::identical(5).unwrap();
        assert_eq!(probabilistic_serial::<Rational>(&inst), AssignmentMatrix::uniform(5));
    }
}
