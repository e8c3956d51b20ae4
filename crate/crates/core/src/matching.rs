//! Perfect matchings on the positive support of a square matrix.

use crate::error::{Error, Result};
use crate::instance::DeterministicAssignment;
use crate::scalar::Scalar;

/// Lexicographically smallest permutation `σ` with `m[i][σ(i)] > 0` for all
/// `i`, or `None` when the support has no perfect matching.
pub fn perfect_matching_on_support<T: Scalar>(m: &[Vec<T>]) -> Result<Option<DeterministicAssignment>> {
    let n = m.len();
    let order: Vec<usize> = (0..n).collect();
    perfect_matching_with_order(m, &order, &order)
}

/// Like [`perfect_matching_on_support`], but agents are fixed in `agent_order`
/// and each takes the earliest feasible object in `object_order`. Different
/// orders reach different support matchings.
pub fn perfect_matching_with_order<T: Scalar>(
    m: &[Vec<T>],
    agent_order: &[usize],
    object_order: &[usize],
) -> Result<Option<DeterministicAssignment>> {
    let n = m.len();
    if m.iter().any(|r| r.len() != n) {
        return Err(Error::arg("matching needs a square matrix"));
    }
    if agent_order.len() != n || object_order.len() != n {
        return Err(Error::arg("order length differs from matrix size"));
    }
    let support: Vec<Vec<bool>> = m.iter().map(|r| r.iter().map(|x| x.is_positive()).collect()).collect();
    Ok(lex_first_matching(&support, agent_order, object_order).map(|v| {
        DeterministicAssignment::new(v).expect("matching is a permutation")
    }))
}

fn lex_first_matching(support: &[Vec<bool>], agent_order: &[usize], object_order: &[usize]) -> Option<Vec<usize>> {
    let n = support.len();
    let mut fixed: Vec<Option<usize>> = vec![None; n];
    let mut taken = vec![false; n];
    if !completable(support, &fixed, &taken) {
        return None;
    }
    for &agent in agent_order {
        let mut placed = false;
        for &obj in object_order {
            if taken[obj] || !support[agent][obj] {
                continue;
            }
            fixed[agent] = Some(obj);
            taken[obj] = true;
            if completable(support, &fixed, &taken) {
                placed = true;
                break;
            }
            fixed[agent] = None;
            taken[obj] = false;
        }
        debug_assert!(placed, "a completable partial matching always extends");
        if !placed {
            return None;
        }
    }
    Some(fixed.into_iter().map(|o| o.expect("every agent placed")).collect())
}

/// Whether the free agents can be perfectly matched to the free objects
/// (Kuhn's augmenting paths).
fn completable(support: &[Vec<bool>], fixed: &[Option<usize>], taken: &[bool]) -> bool {
    let n = support.len();
    let mut holder: Vec<Option<usize>> = vec![None; n];
    for agent in (0..n).filter(|&a| fixed[a].is_none()) {
        let mut visited = vec![false; n];
        if !augment(agent, support, taken, &mut holder, &mut visited) {
            return false;
        }
    }
    true
}

fn augment(
    agent: usize,
    support: &[Vec<bool>],
    taken: &[bool],
    holder: &mut [Option<usize>],
    visited: &mut [bool],
) -> bool {
    for obj in 0..support.len() {
        if taken[obj] || !support[agent][obj] || visited[obj] {
            continue;
        }
        visited[obj] = true;
        let free = match holder[obj] {
            None => true,
            Some(other) => augment(other, support, taken, holder, visited),
        };
        if free {
            holder[obj] = Some(agent);
            return true;
        }
    }
    false
}
