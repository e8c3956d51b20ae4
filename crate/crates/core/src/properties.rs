//! Fairness and efficiency predicates on matrices, assignments and lotteries.

use crate::error::{Error, Result};
use crate::exactlp::{self, LinearProgram, LpStatus, Relation, Sense};
use crate::instance::{permutations, DeterministicAssignment, Instance};
use crate::lottery::Lottery;
use crate::matrix::{validate_matrix, AssignmentMatrix};
use crate::scalar::Scalar;

/// Whether allocation `x` stochastically dominates `y` under `pref` (objects
/// listed best first): every prefix of `pref` gets at least as much mass in
/// `x` as in `y`.
pub fn sd_dominates<T: Scalar>(x: &[T], y: &[T], pref: &[usize]) -> Result<bool> {
    if x.len() != y.len() || x.len() != pref.len() {
        return Err(Error::arg("allocation and preference lengths differ"));
    }
    if pref.iter().any(|&o| o >= x.len()) {
        return Err(Error::arg("preference names an unknown object"));
    }
    Ok(dominates_unchecked(x, y, pref))
}

fn dominates_unchecked<T: Scalar>(x: &[T], y: &[T], pref: &[usize]) -> bool {
    // compare differences so each prefix costs one add
    let mut diff = T::zero();
    for &o in pref {
        diff += x[o].clone() - y[o].clone();
        if diff.is_negative() {
            return false;
        }
    }
    true
}

fn check_sizes<T: Scalar>(instance: &Instance, m: &AssignmentMatrix<T>) -> Result<()> {
    if instance.n() != m.n() {
        return Err(Error::arg(format!(
            "matrix is {}x{} but the instance has {} agents",
            m.n(),
            m.n(),
            instance.n()
        )));
    }
    Ok(())
}

/// First ordered pair `(i, k)` such that `P_i` fails to dominate `P_k` under
/// agent `i`'s preference.
pub fn sd_ef_violation<T: Scalar>(instance: &Instance, m: &AssignmentMatrix<T>) -> Result<Option<(usize, usize)>> {
    check_sizes(instance, m)?;
    let n = m.n();
    for i in 0..n {
        for k in (0..n).filter(|&k| k != i) {
            if !dominates_unchecked(m.row(i), m.row(k), instance.preference(i)) {
                return Ok(Some((i, k)));
            }
        }
    }
    Ok(None)
}

pub fn is_sd_ef<T: Scalar>(instance: &Instance, m: &AssignmentMatrix<T>) -> Result<bool> {
    Ok(sd_ef_violation(instance, m)?.is_none())
}

/// First ordered pair `(i, k)` with `P_k ≠ P_i` and `P_k` dominating `P_i`
/// under agent `i`'s preference.
pub fn weak_sd_ef_violation<T: Scalar>(
    instance: &Instance,
    m: &AssignmentMatrix<T>,
) -> Result<Option<(usize, usize)>> {
    check_sizes(instance, m)?;
    let n = m.n();
    for i in 0..n {
        for k in (0..n).filter(|&k| k != i) {
            if m.row(i) != m.row(k) && dominates_unchecked(m.row(k), m.row(i), instance.preference(i)) {
                return Ok(Some((i, k)));
            }
        }
    }
    Ok(None)
}

pub fn is_weak_sd_ef<T: Scalar>(instance: &Instance, m: &AssignmentMatrix<T>) -> Result<bool> {
    Ok(weak_sd_ef_violation(instance, m)?.is_none())
}

/// First pair of agents with identical preferences but different rows.
pub fn equal_treatment_violation<T: Scalar>(
    instance: &Instance,
    m: &AssignmentMatrix<T>,
) -> Result<Option<(usize, usize)>> {
    check_sizes(instance, m)?;
    let n = m.n();
    for i in 0..n {
        for k in i + 1..n {
            if instance.preference(i) == instance.preference(k) && m.row(i) != m.row(k) {
                return Ok(Some((i, k)));
            }
        }
    }
    Ok(None)
}

pub fn equal_treatment_of_equals<T: Scalar>(instance: &Instance, m: &AssignmentMatrix<T>) -> Result<bool> {
    Ok(equal_treatment_violation(instance, m)?.is_none())
}

/// A trading cycle: agents who would each rather hold the next agent's object.
pub fn trading_cycle(instance: &Instance, a: &DeterministicAssignment) -> Result<Option<Vec<usize>>> {
    let n = instance.n();
    if a.n() != n {
        return Err(Error::arg("assignment size does not match instance"));
    }
    let wants = |i: usize, k: usize| i != k && instance.prefers(i, a.object_of(k), a.object_of(i));
    // 0 = unvisited, 1 = on stack, 2 = done
    let mut state = vec![0u8; n];
    let mut stack: Vec<usize> = Vec::new();
    fn dfs(
        v: usize,
        n: usize,
        wants: &dyn Fn(usize, usize) -> bool,
        state: &mut [u8],
        stack: &mut Vec<usize>,
    ) -> Option<Vec<usize>> {
        state[v] = 1;
        stack.push(v);
        for w in 0..n {
            if !wants(v, w) {
                continue;
            }
            if state[w] == 1 {
                let start = stack.iter().position(|&x| x == w).expect("w is on the stack");
                return Some(stack[start..].to_vec());
            }
            if state[w] == 0 {
                if let Some(c) = dfs(w, n, wants, state, stack) {
                    return Some(c);
                }
            }
        }
        stack.pop();
        state[v] = 2;
        None
    }
    for v in 0..n {
        if state[v] == 0 {
            if let Some(c) = dfs(v, n, &wants, &mut state, &mut stack) {
                return Ok(Some(c));
            }
        }
    }
    Ok(None)
}

/// Pareto optimality via absence of trading cycles in the strict-envy digraph.
pub fn is_pareto_optimal(instance: &Instance, a: &DeterministicAssignment) -> Result<bool> {
    Ok(trading_cycle(instance, a)?.is_none())
}

/// Brute-force Pareto check over all `n!` assignments.
pub fn pareto_dominator_brute_force(
    instance: &Instance,
    a: &DeterministicAssignment,
) -> Result<Option<DeterministicAssignment>> {
    let n = instance.n();
    if a.n() != n {
        return Err(Error::arg("assignment size does not match instance"));
    }
    for p in permutations(n) {
        let mut strictly = false;
        let mut weakly = true;
        for (i, &obj) in p.iter().enumerate() {
            let new = instance.rank(i, obj);
            let old = instance.rank(i, a.object_of(i));
            if new > old {
                weakly = false;
                break;
            }
            strictly |= new < old;
        }
        if weakly && strictly {
            return Ok(Some(DeterministicAssignment::new(p).expect("permutation")));
        }
    }
    Ok(None)
}

/// Every assignment in the support is Pareto optimal.
pub fn is_ex_post_efficient<T: Scalar>(instance: &Instance, lottery: &Lottery<T>) -> Result<bool> {
    if lottery.n() != instance.n() {
        return Err(Error::arg("lottery size does not match instance"));
    }
    for (a, _) in lottery.support() {
        if !is_pareto_optimal(instance, a)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// An assignment matrix that SD-dominates `m` row by row and differs from it,
/// or `None` when `m` is SD-efficient.
///
/// Maximizes the total prefix slack over all bistochastic `P'` whose prefix
/// sums dominate those of `m`; the optimum is zero exactly when no such `P'`
/// other than `m` exists.
pub fn sd_dominating_matrix<T: Scalar>(
    instance: &Instance,
    m: &AssignmentMatrix<T>,
) -> Result<Option<AssignmentMatrix<T>>> {
    check_sizes(instance, m)?;
    validate_matrix(m.rows()).map_err(|d| Error::arg(format!("not bistochastic: {d}")))?;
    let n = m.n();
    let var = |i: usize, j: usize| i * n + j;
    let mut lp = LinearProgram::<T>::new(n * n);
    for i in 0..n {
        lp.add_sparse((0..n).map(|j| (var(i, j), T::one())), Relation::Eq, T::one());
    }
    for j in 0..n {
        lp.add_sparse((0..n).map(|i| (var(i, j), T::one())), Relation::Eq, T::one());
    }
    let mut objective = vec![T::zero(); n * n];
    for i in 0..n {
        let pref = instance.preference(i);
        let mut cum = T::zero();
        for t in 0..n - 1 {
            cum += m.get(i, pref[t]).clone();
            lp.add_sparse(pref[..=t].iter().map(|&o| (var(i, o), T::one())), Relation::Ge, cum.clone());
            // object at position t contributes to prefixes t..n-1
            objective[var(i, pref[t])] += T::from_int((n - 1 - t) as i64);
        }
    }
    let baseline: T = m
        .rows()
        .iter()
        .flatten()
        .zip(&objective)
        .map(|(x, c)| x.clone() * c.clone())
        .sum();
    lp.set_objective(Sense::Maximize, objective);
    let res = exactlp::solve(&lp)?;
    debug_assert_eq!(res.status, LpStatus::Optimal);
    let best = res.objective.expect("bounded program");
    if best == baseline {
        return Ok(None);
    }
    let x = res.solution.expect("optimal point");
    let rows = (0..n).map(|i| x[i * n..(i + 1) * n].to_vec()).collect();
    Ok(Some(AssignmentMatrix::from_rows_unchecked(rows)))
}

pub fn is_sd_efficient<T: Scalar>(instance: &Instance, m: &AssignmentMatrix<T>) -> Result<bool> {
    Ok(sd_dominating_matrix(instance, m)?.is_none())
}
