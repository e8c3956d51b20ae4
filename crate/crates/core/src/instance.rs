//! Preference profiles and deterministic assignments.

use crate::error::{Error, Result};

/// `n` agents with strict preferences over `n` objects. Agents and objects are
/// 0-indexed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Instance {
    prefs: Vec<Vec<usize>>,
    // rank[i][o] = position of object o in agent i's list (0 = best)
    rank: Vec<Vec<usize>>,
}

impl Instance {
    /// `prefs[i]` lists object indices from most to least preferred.
    pub fn new(prefs: Vec<Vec<usize>>) -> Result<Self> {
        let n = prefs.len();
        if n < 2 {
            return Err(Error::arg(format!("need at least 2 agents, got {n}")));
        }
        let mut rank = Vec::with_capacity(n);
        for (i, list) in prefs.iter().enumerate() {
            if !is_permutation(list, n) {
                return Err(Error::arg(format!(
                    "preference of agent {i} is not a permutation of 0..{n}"
                )));
            }
            let mut r = vec![0; n];
            for (pos, &o) in list.iter().enumerate() {
                r[o] = pos;
            }
            rank.push(r);
        }
        Ok(Instance { prefs, rank })
    }

    /// Every agent ranks objects `0 ≻ 1 ≻ … ≻ n-1`.
    pub fn identical(n: usize) -> Result<Self> {
        Self::new(vec![(0..n).collect(); n])
    }

    pub fn n(&self) -> usize {
        self.prefs.len()
    }

    pub fn preference(&self, agent: usize) -> &[usize] {
        &self.prefs[agent]
    }

    pub fn preferences(&self) -> &[Vec<usize>] {
        &self.prefs
    }

    /// Position of `object` in `agent`'s list, 0 being the favourite.
    pub fn rank(&self, agent: usize, object: usize) -> usize {
        self.rank[agent][object]
    }

    pub fn prefers(&self, agent: usize, x: usize, y: usize) -> bool {
        self.rank[agent][x] < self.rank[agent][y]
    }

    pub(crate) fn check_agent(&self, i: usize) -> Result<()> {
        if i >= self.n() {
            return Err(Error::arg(format!("agent index {i} out of range for n = {}", self.n())));
        }
        Ok(())
    }
}

/// A perfect matching: entry `i` is the object given to agent `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DeterministicAssignment(Vec<usize>);

impl DeterministicAssignment {
    pub fn new(objects: Vec<usize>) -> Result<Self> {
        let n = objects.len();
        if !is_permutation(&objects, n) {
            return Err(Error::arg(format!("{objects:?} is not a permutation of 0..{n}")));
        }
        Ok(DeterministicAssignment(objects))
    }

    pub fn identity(n: usize) -> Self {
        DeterministicAssignment((0..n).collect())
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn object_of(&self, agent: usize) -> usize {
        self.0[agent]
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }

    /// Inverse map: entry `o` is the agent holding object `o`.
    pub fn holders(&self) -> Vec<usize> {
        let mut inv = vec![0; self.n()];
        for (agent, &o) in self.0.iter().enumerate() {
            inv[o] = agent;
        }
        inv
    }
}

pub(crate) fn is_permutation(v: &[usize], n: usize) -> bool {
    if v.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for &x in v {
        if x >= n || seen[x] {
            return false;
        }
        seen[x] = true;
    }
    true
}

/// Rearranges `v` into the next permutation in lexicographic order. Returns
/// `false` (leaving `v` sorted ascending) once the last permutation is passed.
pub fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        v.reverse();
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(factorial(n));
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        out.push(p.clone());
        if !next_permutation(&mut p) {
            break;
        }
    }
    out
}

pub fn factorial(n: usize) -> usize {
    (1..=n).product()
}
