//! Envy-bounded decomposition for instances with at most two preference types.
//!
//! Each round picks a support matching `Q`, splits it into the rows of each
//! type, and expands every block into its cyclic row shifts and the shifts of
//! its reversal. All `2r · 2s` combinations are added with a common weight `α`,
//! the largest that keeps the residual nonnegative. Shifting makes same-type
//! rows equal; reversal makes the joint distribution of any two same-type
//! agents exchangeable, which caps their mutual envy at 1/2.

use crate::error::{Error, Precondition, Result};
use crate::instance::{DeterministicAssignment, Instance};
use crate::lottery::Lottery;
use crate::matching::perfect_matching_on_support;
use crate::matrix::{validate_matrix, AssignmentMatrix};
use crate::properties::is_sd_ef;
use crate::scalar::Scalar;

use super::{is_zero_matrix, WeightBag};

/// Agents grouped by preference: `first` and `second` are ascending agent
/// lists, both nonempty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeSplit {
    pub first: Vec<usize>,
    pub second: Vec<usize>,
}

impl TypeSplit {
    pub fn r(&self) -> usize {
        self.first.len()
    }

    pub fn s(&self) -> usize {
        self.second.len()
    }
}

/// Groups agents by preference list. Returns `None` for three or more types.
/// With a single type, the highest-indexed agent is placed alone in the
/// second type.
pub fn detect_two_type(instance: &Instance) -> Option<TypeSplit> {
    let n = instance.n();
    let lead = instance.preference(0);
    let (first, rest): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| instance.preference(i) == lead);
    if rest.is_empty() {
        return Some(TypeSplit { first: (0..n - 1).collect(), second: vec![n - 1] });
    }
    let other = instance.preference(rest[0]);
    if rest.iter().any(|&i| instance.preference(i) != other) {
        return None;
    }
    Some(TypeSplit { first, second: rest })
}

/// Type split together with the per-object mass `a_j` held by the first type
/// and `b_j = 1 − a_j` held by the second.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoTypeStructure<T> {
    pub split: TypeSplit,
    pub first_pref: Vec<usize>,
    pub second_pref: Vec<usize>,
    pub a: Vec<T>,
    pub b: Vec<T>,
}

impl<T: Scalar> TwoTypeStructure<T> {
    pub fn new(instance: &Instance, split: TypeSplit, m: &AssignmentMatrix<T>) -> Result<Self> {
        if m.n() != instance.n() {
            return Err(Error::arg("matrix size does not match instance"));
        }
        for group in [&split.first, &split.second] {
            if group.iter().any(|&i| m.row(i) != m.row(group[0])) {
                return Err(Error::Precondition(Precondition::RowsIdenticalWithinType));
            }
        }
        let n = m.n();
        let a: Vec<T> = (0..n).map(|j| split.first.iter().map(|&i| m.get(i, j).clone()).sum()).collect();
        let first_pref = instance.preference(split.first[0]).to_vec();
        let second_pref = instance.preference(split.second[0]).to_vec();
        Self::from_parts(split, first_pref, second_pref, a)
    }

    /// Builds the structure from explicit masses; `a` is indexed by object.
    pub fn from_parts(split: TypeSplit, first_pref: Vec<usize>, second_pref: Vec<usize>, a: Vec<T>) -> Result<Self> {
        let n = a.len();
        if split.r() + split.s() != n || split.r() == 0 || split.s() == 0 {
            return Err(Error::arg("type split must cover all agents with two nonempty types"));
        }
        if first_pref.len() != n || second_pref.len() != n {
            return Err(Error::arg("preference length differs from object count"));
        }
        let total: T = a.iter().cloned().sum();
        if total != T::from_int(split.r() as i64) {
            return Err(Error::arg("first-type masses must sum to the first-type size"));
        }
        let b = a.iter().map(|x| T::one() - x.clone()).collect();
        Ok(TwoTypeStructure { split, first_pref, second_pref, a, b })
    }

    /// The same structure seen from the second type.
    pub fn swapped(&self) -> Self {
        TwoTypeStructure {
            split: TypeSplit { first: self.split.second.clone(), second: self.split.first.clone() },
            first_pref: self.second_pref.clone(),
            second_pref: self.first_pref.clone(),
            a: self.b.clone(),
            b: self.a.clone(),
        }
    }
}

/// Partial sums `Σ_{j ≤ t} (a_j − a_{n−j+1})` for `t = 1..n`, with objects
/// relabeled so that `j` is the first type's `j`-th favourite.
pub fn claim1_partial_sums<T: Scalar>(structure: &TwoTypeStructure<T>) -> Vec<T> {
    let n = structure.a.len();
    let sorted: Vec<T> = structure.first_pref.iter().map(|&o| structure.a[o].clone()).collect();
    let mut acc = T::zero();
    (0..n)
        .map(|j| {
            acc += sorted[j].clone() - sorted[n - 1 - j].clone();
            acc.clone()
        })
        .collect()
}

/// All partial sums of [`claim1_partial_sums`] are nonnegative.
pub fn claim1_diagnostic<T: Scalar>(structure: &TwoTypeStructure<T>) -> bool {
    claim1_partial_sums(structure).iter().all(|x| !x.is_negative())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoTypeRound<T> {
    pub q: DeterministicAssignment,
    pub alpha: T,
    /// Distinct members of the shifted/reflected family.
    pub distinct: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TwoTypeTrace<T: Scalar> {
    pub lottery: Lottery<T>,
    pub structure: TwoTypeStructure<T>,
    pub rounds: Vec<TwoTypeRound<T>>,
}

/// Decomposes with lexicographic support matchings, or with `q_sequence[k]`
/// in round `k` while the sequence lasts.
pub fn decompose_two_type<T: Scalar>(
    instance: &Instance,
    m: &AssignmentMatrix<T>,
    q_sequence: Option<&[DeterministicAssignment]>,
) -> Result<Lottery<T>> {
    Ok(decompose_two_type_traced(instance, m, q_sequence)?.lottery)
}

pub fn decompose_two_type_traced<T: Scalar>(
    instance: &Instance,
    m: &AssignmentMatrix<T>,
    q_sequence: Option<&[DeterministicAssignment]>,
) -> Result<TwoTypeTrace<T>> {
    let seq = q_sequence.unwrap_or(&[]);
    decompose_two_type_with(instance, m, |residual, round| match seq.get(round) {
        Some(q) => Ok(q.clone()),
        None => perfect_matching_on_support(residual)?
            .ok_or_else(|| Error::arg("residual has no support matching")),
    })
}

/// Decomposes with a caller-chosen support matching per round. The chooser
/// sees the current residual and the round index.
pub fn decompose_two_type_with<T, F>(instance: &Instance, m: &AssignmentMatrix<T>, mut choose: F) -> Result<TwoTypeTrace<T>>
where
    T: Scalar,
    F: FnMut(&[Vec<T>], usize) -> Result<DeterministicAssignment>,
{
    let n = instance.n();
    if m.n() != n {
        return Err(Error::arg("matrix size does not match instance"));
    }
    let split = detect_two_type(instance).ok_or(Error::Precondition(Precondition::TwoTypes))?;
    validate_matrix(m.rows()).map_err(|_| Error::Precondition(Precondition::Bistochastic))?;
    if !is_sd_ef(instance, m)? {
        return Err(Error::Precondition(Precondition::SdEnvyFree));
    }
    let structure = TwoTypeStructure::new(instance, split, m)?;
    assert!(
        claim1_diagnostic(&structure) && claim1_diagnostic(&structure.swapped()),
        "SD-EF input must satisfy the prefix inequalities for both types"
    );
    let split = &structure.split;

    let mut residual = m.rows().to_vec();
    let mut bag = WeightBag::new();
    let mut rounds = Vec::new();
    while !is_zero_matrix(&residual) {
        let q = choose(&residual, rounds.len())?;
        if q.n() != n || (0..n).any(|i| !residual[i][q.object_of(i)].is_positive()) {
            return Err(Error::arg(format!(
                "round {} matching {:?} is not supported on the residual",
                rounds.len(),
                q.as_slice()
            )));
        }
        let family = symmetric_family(&q, split);
        let mut counts = vec![vec![0i64; n]; n];
        for member in &family {
            for (i, row) in counts.iter_mut().enumerate() {
                row[member.object_of(i)] += 1;
            }
        }
        let alpha = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| counts[i][j] > 0)
            .map(|(i, j)| residual[i][j].clone() / T::from_int(counts[i][j]))
            .min()
            .expect("family covers every agent");
        for (i, row) in residual.iter_mut().enumerate() {
            for (j, x) in row.iter_mut().enumerate() {
                if counts[i][j] > 0 {
                    *x -= alpha.clone() * T::from_int(counts[i][j]);
                }
            }
        }
        debug_assert!(residual.iter().flatten().all(|x| !x.is_negative()));
        let mut distinct = family.clone();
        distinct.sort();
        distinct.dedup();
        for member in family {
            bag.add(member, alpha.clone());
        }
        rounds.push(TwoTypeRound { q, alpha, distinct: distinct.len() });
    }
    Ok(TwoTypeTrace { lottery: bag.into_lottery()?, structure, rounds })
}

/// The `2r · 2s` assignments from shifting and reflecting each type's block of
/// `q`, kept with multiplicity.
fn symmetric_family(q: &DeterministicAssignment, split: &TypeSplit) -> Vec<DeterministicAssignment> {
    let blocks = |agents: &[usize]| -> Vec<Vec<usize>> {
        let objs: Vec<usize> = agents.iter().map(|&i| q.object_of(i)).collect();
        let mut rev = objs.clone();
        rev.reverse();
        let k = objs.len();
        let mut out = Vec::with_capacity(2 * k);
        for base in [&objs, &rev] {
            for shift in 0..k {
                out.push((0..k).map(|t| base[(t + shift) % k]).collect());
            }
        }
        out
    };
    let top = blocks(&split.first);
    let bottom = blocks(&split.second);
    let n = q.n();
    let mut family = Vec::with_capacity(top.len() * bottom.len());
    for t in &top {
        for b in &bottom {
            let mut a = vec![0; n];
            for (&agent, &o) in split.first.iter().zip(t) {
                a[agent] = o;
            }
            for (&agent, &o) in split.second.iter().zip(b) {
                a[agent] = o;
            }
            family.push(DeterministicAssignment::new(a).expect("block rearrangement is a permutation"));
        }
    }
    family
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
    fn detection() {
        let one = Instance::identical(3).unwrap();
        let s = detect_two_type(&one).unwrap();
        assert_eq!((s.r(), s.s()), (2, 1));
        assert_eq!(s.second, vec![2]);
        let three = Instance::new(vec![vec![0, 1, 2], vec![1, 0, 2], vec![2, 1, 0]]).unwrap();
        assert!(detect_two_type(&three).is_none());
        let two = Instance::new(vec![vec![1, 0, 2], vec![0, 1, 2], vec![1, 0, 2]]).unwrap();
        assert_eq!(detect_two_type(&two).unwrap(), TypeSplit { first: vec![0, 2], second: vec![1] });
    }

    #[test]
    fn claim1_cases() {
        let uniform = TwoTypeStructure::from_parts(
            TypeSplit { first: vec![0, 1], second: vec![2] },
            vec![0, 1, 2],
            vec![2, 1, 0],
            vec![q(2, 3); 3],
        )
        .unwrap();
        assert_eq!(claim1_partial_sums(&uniform), vec![q(0, 1); 3]);
        assert!(claim1_diagnostic(&uniform));

        let bad = TwoTypeStructure::from_parts(
            TypeSplit { first: vec![0], second: vec![1] },
            vec![0, 1],
            vec![1, 0],
            vec![q(0, 1), q(1, 1)],
        )
        .unwrap();
        assert_eq!(claim1_partial_sums(&bad)[0], q(-1, 1));
        assert!(!claim1_diagnostic(&bad));
    }

    #[test]
    fn family_size_and_multiplicity() {
        let split = TypeSplit { first: vec![0, 1, 2], second: vec![3] };
        let qa = DeterministicAssignment::new(vec![0, 2, 3, 1]).unwrap();
        let fam = symmetric_family(&qa, &split);
        assert_eq!(fam.len(), 12);
        let mut d = fam.clone();
        d.sort();
        d.dedup();
        assert_eq!(d.len(), 6);
    }

    #[test]
    fn two_agents_half_half() {
        let inst = Instance::identical(2).unwrap();
        let m = AssignmentMatrix::<Rational>::uniform(2);
        let l = decompose_two_type(&inst, &m, None).unwrap();
        assert_eq!(l.len(), 2);
        assert!(l.support().iter().all(|(_, w)| *w == q(1, 2)));
        assert!(is_dec_ef(&inst, &l).unwrap());
    }

    #[test]
    fn unsupported_override_is_rejected() {
        let inst = Instance::new(vec![vec![0, 1], vec![1, 0]]).unwrap();
        let m = AssignmentMatrix::<Rational>::permutation(&DeterministicAssignment::identity(2));
        let swap = DeterministicAssignment::new(vec![1, 0]).unwrap();
        assert!(matches!(decompose_two_type(&inst, &m, Some(&[swap])), Err(Error::Argument(_))));
    }

    #[test]
    fn three_types_rejected() {
        let inst = Instance::new(vec![vec![0, 1, 2], vec![1, 0, 2], vec![2, 1, 0]]).unwrap();
        let m = crate::rules::probabilistic_serial::<Rational>(&inst);
        assert_eq!(
            decompose_two_type(&inst, &m, None).unwrap_err(),
            Error::Precondition(Precondition::TwoTypes)
        );
    }
}
