//! Exact LP decision procedures over the full set of deterministic
//! assignments: EF-decomposability, minimax envy and implementability by a
//! reversal-symmetric distribution over serial dictatorships.
//!
//! Only assignments supported on the matrix can carry weight in a
//! decomposition, so the programs have one column per support permutation
//! rather than one per element of the symmetric group.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::exactlp::{self, Feasibility, LinearProgram, LpStatus, Relation, Sense};
use crate::instance::{permutations, DeterministicAssignment, Instance};
use crate::lottery::Lottery;
use crate::matrix::{validate_matrix, AssignmentMatrix};
use crate::rules::serial_dictatorship;
use crate::scalar::Scalar;

/// Largest `n` for which oracles enumerate assignments or agent orders.
pub const DEFAULT_ORACLE_CAP: usize = 6;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EfDecomposability<T: Scalar> {
    /// A decomposition with every pairwise envy at most 1/2.
    Decomposable(Lottery<T>),
    /// Farkas multipliers for the reconstruction + envy system.
    NotDecomposable(Vec<T>),
}

impl<T: Scalar> EfDecomposability<T> {
    pub fn is_decomposable(&self) -> bool {
        matches!(self, EfDecomposability::Decomposable(_))
    }

    pub fn witness(&self) -> Option<&Lottery<T>> {
        match self {
            EfDecomposability::Decomposable(l) => Some(l),
            EfDecomposability::NotDecomposable(_) => None,
        }
    }
}

struct DecompositionSystem<T> {
    lp: LinearProgram<T>,
    columns: Vec<DeterministicAssignment>,
    // per ordered pair (i, k): indices of columns where i envies k
    envy_columns: Vec<((usize, usize), Vec<usize>)>,
}

fn check_inputs<T: Scalar>(instance: &Instance, m: &AssignmentMatrix<T>, cap: usize) -> Result<()> {
    let n = instance.n();
    if n > cap {
        return Err(Error::Resource { what: "oracle size", requested: n, limit: cap });
    }
    if m.n() != n {
        return Err(Error::arg("matrix size does not match instance"));
    }
    validate_matrix(m.rows()).map_err(|d| Error::arg(format!("not bistochastic: {d}")))
}

/// Columns for supported permutations and equality rows `Σ x_σ [σ(i) = j] = m_ij`
/// over positive entries. `extra` trailing variables are appended.
fn decomposition_system<T: Scalar>(instance: &Instance, m: &AssignmentMatrix<T>, extra: usize) -> DecompositionSystem<T> {
    let n = instance.n();
    let columns: Vec<DeterministicAssignment> = permutations(n)
        .into_iter()
        .filter(|p| p.iter().enumerate().all(|(i, &j)| m.get(i, j).is_positive()))
        .map(|p| DeterministicAssignment::new(p).expect("permutation"))
        .collect();
    let mut lp = LinearProgram::new(columns.len() + extra);
    for i in 0..n {
        for j in 0..n {
            if m.get(i, j).is_positive() {
                let terms = columns
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| a.object_of(i) == j)
                    .map(|(c, _)| (c, T::one()));
                lp.add_sparse(terms, Relation::Eq, m.get(i, j).clone());
            }
        }
    }
    let mut envy_columns = Vec::new();
    for i in 0..n {
        for k in (0..n).filter(|&k| k != i) {
            let cols = columns
                .iter()
                .enumerate()
                .filter(|(_, a)| instance.prefers(i, a.object_of(k), a.object_of(i)))
                .map(|(c, _)| c)
                .collect();
            envy_columns.push(((i, k), cols));
        }
    }
    DecompositionSystem { lp, columns, envy_columns }
}

fn lottery_from<T: Scalar>(columns: &[DeterministicAssignment], x: &[T]) -> Result<Lottery<T>> {
    Lottery::new(columns.iter().cloned().zip(x.iter().cloned()))
}

/// Whether `m` admits a decomposition in which every agent envies every other
/// agent with probability at most 1/2.
pub fn ef_decomposable<T: Scalar>(instance: &Instance, m: &AssignmentMatrix<T>) -> Result<EfDecomposability<T>> {
    ef_decomposable_with_cap(instance, m, DEFAULT_ORACLE_CAP)
}

pub fn ef_decomposable_with_cap<T: Scalar>(
    instance: &Instance,
    m: &AssignmentMatrix<T>,
    cap: usize,
) -> Result<EfDecomposability<T>> {
    check_inputs(instance, m, cap)?;
    let DecompositionSystem { mut lp, columns, envy_columns } = decomposition_system(instance, m, 0);
    for (_, cols) in &envy_columns {
        lp.add_sparse(cols.iter().map(|&c| (c, T::one())), Relation::Le, T::half());
    }
    Ok(match exactlp::feasible(&lp)? {
        Feasibility::Feasible(x) => EfDecomposability::Decomposable(lottery_from(&columns, &x)?),
        Feasibility::Infeasible(y) => EfDecomposability::NotDecomposable(y),
    })
}

/// Smallest achievable maximum pairwise envy over all decompositions of `m`,
/// with a decomposition attaining it.
pub fn minimax_envy<T: Scalar>(instance: &Instance, m: &AssignmentMatrix<T>) -> Result<(T, Lottery<T>)> {
    minimax_envy_with_cap(instance, m, DEFAULT_ORACLE_CAP)
}

pub fn minimax_envy_with_cap<T: Scalar>(
    instance: &Instance,
    m: &AssignmentMatrix<T>,
    cap: usize,
) -> Result<(T, Lottery<T>)> {
    check_inputs(instance, m, cap)?;
    let DecompositionSystem { mut lp, columns, envy_columns } = decomposition_system(instance, m, 1);
    let t = columns.len();
    for (_, cols) in &envy_columns {
        let terms = cols.iter().map(|&c| (c, T::one())).chain(std::iter::once((t, -T::one())));
        lp.add_sparse(terms, Relation::Le, T::zero());
    }
    let mut objective = vec![T::zero(); t + 1];
    objective[t] = T::one();
    lp.set_objective(Sense::Minimize, objective);
    let res = exactlp::solve(&lp)?;
    if res.status != LpStatus::Optimal {
        return Err(Error::arg("bistochastic matrix without a decomposition"));
    }
    let x = res.solution.expect("optimal point");
    let lottery = lottery_from(&columns, &x[..t])?;
    Ok((x[t].clone(), lottery))
}

/// Range of the probability that agent `i` envies agent `k` over all
/// decompositions of `m`.
pub fn pair_envy_range<T: Scalar>(instance: &Instance, m: &AssignmentMatrix<T>, i: usize, k: usize) -> Result<(T, T)> {
    check_inputs(instance, m, DEFAULT_ORACLE_CAP)?;
    instance.check_agent(i)?;
    instance.check_agent(k)?;
    if i == k {
        return Err(Error::arg("an agent cannot envy itself"));
    }
    let DecompositionSystem { mut lp, columns, envy_columns } = decomposition_system(instance, m, 0);
    let (_, cols) = envy_columns.iter().find(|(p, _)| *p == (i, k)).expect("pair listed");
    let mut objective = vec![T::zero(); columns.len()];
    for &c in cols {
        objective[c] = T::one();
    }
    let mut bound = |sense| -> Result<T> {
        lp.set_objective(sense, objective.clone());
        let res = exactlp::solve(&lp)?;
        res.objective.ok_or_else(|| Error::arg("bistochastic matrix without a decomposition"))
    };
    let lo = bound(Sense::Minimize)?;
    let hi = bound(Sense::Maximize)?;
    Ok((lo, hi))
}

/// A distribution over agent orders giving each order and its reverse the
/// same weight, together with the lottery it induces via serial dictatorship.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReversalSymmetricWitness<T: Scalar> {
    pub orders: Vec<(Vec<usize>, T)>,
    pub lottery: Lottery<T>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReversalSymmetric<T: Scalar> {
    Implementable(ReversalSymmetricWitness<T>),
    NotImplementable(Vec<T>),
}

impl<T: Scalar> ReversalSymmetric<T> {
    pub fn is_implementable(&self) -> bool {
        matches!(self, ReversalSymmetric::Implementable(_))
    }
}

/// Pairs `{ρ, reverse(ρ)}` of agent orders, each listed once with the smaller
/// order first.
pub fn reversal_pairs(n: usize) -> Vec<(Vec<usize>, Vec<usize>)> {
    permutations(n)
        .into_iter()
        .filter_map(|p| {
            let mut r = p.clone();
            r.reverse();
            (p < r).then_some((p, r))
        })
        .collect()
}

/// Whether `m` is the assignment matrix of some reversal-symmetric
/// distribution over serial dictatorships.
pub fn reversal_symmetric_implementable<T: Scalar>(
    instance: &Instance,
    m: &AssignmentMatrix<T>,
) -> Result<ReversalSymmetric<T>> {
    check_inputs(instance, m, DEFAULT_ORACLE_CAP)?;
    let n = instance.n();
    let pairs = reversal_pairs(n);
    let outcomes: Vec<(DeterministicAssignment, DeterministicAssignment)> = pairs
        .iter()
        .map(|(p, r)| Ok((serial_dictatorship(instance, p)?, serial_dictatorship(instance, r)?)))
        .collect::<Result<_>>()?;
    let mut lp = LinearProgram::<T>::new(pairs.len());
    lp.add_sparse((0..pairs.len()).map(|k| (k, T::from_int(2))), Relation::Eq, T::one());
    for i in 0..n {
        for j in 0..n {
            let terms = outcomes.iter().enumerate().filter_map(|(k, (a, b))| {
                let c = (a.object_of(i) == j) as i64 + (b.object_of(i) == j) as i64;
                (c > 0).then(|| (k, T::from_int(c)))
            });
            lp.add_sparse(terms, Relation::Eq, m.get(i, j).clone());
        }
    }
    Ok(match exactlp::feasible(&lp)? {
        Feasibility::Infeasible(y) => ReversalSymmetric::NotImplementable(y),
        Feasibility::Feasible(x) => {
            let mut orders = Vec::new();
            let mut weights: BTreeMap<DeterministicAssignment, T> = BTreeMap::new();
            for (k, w) in x.iter().enumerate() {
                if w.is_zero() {
                    continue;
                }
                orders.push((pairs[k].0.clone(), w.clone()));
                orders.push((pairs[k].1.clone(), w.clone()));
                for a in [&outcomes[k].0, &outcomes[k].1] {
                    *weights.entry(a.clone()).or_insert_with(T::zero) += w.clone();
                }
            }
            orders.sort();
            ReversalSymmetric::Implementable(ReversalSymmetricWitness { orders, lottery: Lottery::new(weights)? })
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lottery::is_dec_ef;
    use crate::Rational;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from_frac(n, d)
    }

    #[test]
    fn top_choice_permutation_has_zero_envy() {
        let inst = Instance::new(vec![vec![1, 0, 2], vec![0, 1, 2], vec![2, 1, 0]]).unwrap();
        let a = DeterministicAssignment::new(vec![1, 0, 2]).unwrap();
        let m = AssignmentMatrix::<Rational>::permutation(&a);
        let (v, l) = minimax_envy(&inst, &m).unwrap();
        assert_eq!(v, q(0, 1));
        assert_eq!(l, Lottery::point_mass(a));
    }

    #[test]
    fn identical_uniform_minimax_is_half() {
        for n in 2..=4 {
            let inst = Instance::identical(n).unwrap();
            let m = AssignmentMatrix::<Rational>::uniform(n);
            let (v, l) = minimax_envy(&inst, &m).unwrap();
            assert_eq!(v, q(1, 2));
            assert_eq!(l.matrix(), m);
            assert!(is_dec_ef(&inst, &l).unwrap());
        }
    }

    #[test]
    fn cap_is_enforced() {
        let inst = Instance::identical(4).unwrap();
        let m = AssignmentMatrix::<Rational>::uniform(4);
        assert!(matches!(ef_decomposable_with_cap(&inst, &m, 3), Err(Error::Resource { .. })));
    }

    #[test]
    fn reversal_pairs_cover_all_orders() {
        let pairs = reversal_pairs(4);
        assert_eq!(pairs.len(), 12);
        let mut all: Vec<Vec<usize>> = pairs.into_iter().flat_map(|(a, b)| [a, b]).collect();
        all.sort();
        all.dedup();
        assert_eq!(all.len(), 24);
    }

    #[test]
    fn uniform_is_reversal_symmetric() {
        let inst = Instance::identical(3).unwrap();
        let m = AssignmentMatrix::<Rational>::uniform(3);
        match reversal_symmetric_implementable(&inst, &m).unwrap() {
            ReversalSymmetric::Implementable(w) => {
                assert_eq!(w.lottery.matrix(), m);
                let total: Rational = w.orders.iter().map(|(_, x)| x.clone()).sum();
                assert_eq!(total, q(1, 1));
            }
            other => panic!("expected implementable, got {other:?}"),
        }
    }
}
