mod common;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use randassign::decompose::{
    birkhoff, birkhoff_randomized, cyclic_decomposition, decompose_three_agent, decompose_two_type_traced,
    detect_two_type,
};
use randassign::exactlp::{self, LinearProgram, LpStatus, Relation, Sense};
use randassign::io::{
    default_names, parse_instance, parse_lottery, parse_matrix, render_instance, render_lottery, render_matrix,
    NamedInstance,
};
use randassign::matching::perfect_matching_on_support;
use randassign::oracles::{ef_decomposable, minimax_envy, reversal_symmetric_implementable, ReversalSymmetric};
use randassign::properties::{equal_treatment_of_equals, is_sd_ef, is_weak_sd_ef, sd_dominates};
use randassign::rules::{probabilistic_serial, probabilistic_serial_trace, random_priority};
use randassign::{
    envy_matrix, is_dec_ef, matrix_of, validate_matrix, DeterministicAssignment, Instance, Lottery, Matrix, Rational,
    Scalar,
};

fn perm(n: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..n).collect::<Vec<usize>>()).prop_shuffle()
}

fn instance_of(n: usize) -> impl Strategy<Value = Instance> {
    prop::collection::vec(perm(n), n).prop_map(|p| Instance::new(p).unwrap())
}

fn instance() -> impl Strategy<Value = Instance> {
    (2usize..=5).prop_flat_map(instance_of)
}

fn lottery_of(n: usize) -> impl Strategy<Value = Lottery<Rational>> {
    prop::collection::vec((perm(n), 1i64..10), 1..7).prop_map(|entries| {
        let total: i64 = entries.iter().map(|(_, w)| w).sum();
        Lottery::new(
            entries
                .into_iter()
                .map(|(p, w)| (DeterministicAssignment::new(p).unwrap(), Rational::from_frac(w, total))),
        )
        .unwrap()
    })
}

fn instance_and_lottery() -> impl Strategy<Value = (Instance, Lottery<Rational>)> {
    (2usize..=5).prop_flat_map(|n| (instance_of(n), lottery_of(n)))
}

/// `λ·PS + (1 − λ)·uniform`, which stays SD-EF.
fn sd_ef_blend(inst: &Instance, lambda: &Rational) -> Matrix {
    let ps = probabilistic_serial::<Rational>(inst);
    let u = Matrix::uniform(inst.n());
    let one_minus = Rational::from_int(1) - lambda.clone();
    Matrix::new(
        ps.rows()
            .iter()
            .zip(u.rows())
            .map(|(a, b)| {
                a.iter().zip(b).map(|(x, y)| lambda.clone() * x.clone() + one_minus.clone() * y.clone()).collect()
            })
            .collect(),
    )
    .unwrap()
}

fn lambda() -> impl Strategy<Value = Rational> {
    (0i64..=12).prop_map(|k| Rational::from_frac(k, 12))
}

/// Two-type profile: the first `r` agents share one list, the rest another.
fn two_type_instance() -> impl Strategy<Value = Instance> {
    (2usize..=5)
        .prop_flat_map(|n| (Just(n), 1..n, perm(n), perm(n)))
        .prop_map(|(n, r, a, b)| Instance::new((0..n).map(|i| if i < r { a.clone() } else { b.clone() }).collect()).unwrap())
}

fn half() -> Rational {
    Rational::from_frac(1, 2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn lottery_matrix_is_bistochastic((inst, l) in instance_and_lottery()) {
        prop_assert!(validate_matrix(matrix_of(&l).rows()).is_ok());
        let e = envy_matrix(&inst, &l).unwrap();
        for i in 0..inst.n() {
            prop_assert_eq!(e.get(i, i), &Rational::from_int(0));
            for k in 0..inst.n() {
                prop_assert!(*e.get(i, k) >= Rational::from_int(0) && *e.get(i, k) <= Rational::from_int(1));
            }
        }
    }

    #[test]
    fn splitting_support_entries_changes_nothing((inst, l) in instance_and_lottery()) {
        let split: Vec<(DeterministicAssignment, Rational)> = l
            .support()
            .iter()
            .flat_map(|(a, w)| {
                let third = w.clone() / Rational::from_int(3);
                vec![(a.clone(), third.clone()), (a.clone(), w.clone() - third), (a.clone(), Rational::from_int(0))]
            })
            .collect();
        let merged = Lottery::new(split).unwrap();
        prop_assert_eq!(&merged, &l);
        prop_assert_eq!(matrix_of(&merged), matrix_of(&l));
        prop_assert_eq!(envy_matrix(&inst, &merged).unwrap(), envy_matrix(&inst, &l).unwrap());
    }

    #[test]
    fn identical_preferences_split_envy(l in (2usize..=5).prop_flat_map(lottery_of)) {
        let inst = Instance::identical(l.n()).unwrap();
        let e = envy_matrix(&inst, &l).unwrap();
        for i in 0..l.n() {
            for k in (0..l.n()).filter(|&k| k != i) {
                prop_assert_eq!(e.get(i, k).clone() + e.get(k, i).clone(), Rational::from_int(1));
            }
        }
    }

    #[test]
    fn ps_is_sd_ef_and_conserves_mass(inst in instance()) {
        let trace = probabilistic_serial_trace::<Rational>(&inst);
        prop_assert!(is_sd_ef(&inst, &trace.matrix).unwrap());
        prop_assert!(trace.events.len() <= inst.n());
        for ev in &trace.events {
            prop_assert_eq!(ev.eaten.clone(), ev.time.clone() * Rational::from_int(inst.n() as i64));
        }
        prop_assert_eq!(trace.events.last().unwrap().time.clone(), Rational::from_int(1));
    }

    #[test]
    fn rp_is_dec_ef(inst in instance()) {
        let l = random_priority::<Rational>(&inst).unwrap();
        prop_assert!(is_dec_ef(&inst, &l).unwrap());
    }

    #[test]
    fn sd_ef_implies_weak_and_equal_treatment((inst, lam) in (instance(), lambda())) {
        let m = sd_ef_blend(&inst, &lam);
        prop_assert!(is_sd_ef(&inst, &m).unwrap());
        prop_assert!(is_weak_sd_ef(&inst, &m).unwrap());
        prop_assert!(equal_treatment_of_equals(&inst, &m).unwrap());
    }

    #[test]
    fn implication_on_arbitrary_matrices((inst, l) in instance_and_lottery()) {
        let m = matrix_of(&l);
        if is_sd_ef(&inst, &m).unwrap() {
            prop_assert!(is_weak_sd_ef(&inst, &m).unwrap());
            prop_assert!(equal_treatment_of_equals(&inst, &m).unwrap());
        }
    }

    #[test]
    fn dominance_is_a_partial_order(
        (p, x, y, z) in (2usize..=5).prop_flat_map(|n| (
            perm(n),
            lottery_of(n),
            lottery_of(n),
            lottery_of(n),
        ))
    ) {
        let (x, y, z) = (matrix_of(&x), matrix_of(&y), matrix_of(&z));
        let (x, y, z) = (x.row(0), y.row(0), z.row(0));
        prop_assert!(sd_dominates(x, x, &p).unwrap());
        if sd_dominates(x, y, &p).unwrap() && sd_dominates(y, z, &p).unwrap() {
            prop_assert!(sd_dominates(x, z, &p).unwrap());
        }
        let mutual = sd_dominates(x, y, &p).unwrap() && sd_dominates(y, x, &p).unwrap();
        prop_assert_eq!(mutual, x == y);
    }

    #[test]
    fn support_matching_always_exists(l in (2usize..=6).prop_flat_map(lottery_of)) {
        let m = matrix_of(&l);
        let a = perfect_matching_on_support(m.rows()).unwrap();
        prop_assert!(a.is_some());
        let a = a.unwrap();
        for i in 0..m.n() {
            prop_assert!(m.get(i, a.object_of(i)) > &Rational::from_int(0));
        }
        prop_assert_eq!(perfect_matching_on_support(m.rows()).unwrap(), Some(a));
    }

    #[test]
    fn birkhoff_reconstructs((l, seed) in ((2usize..=6).prop_flat_map(lottery_of), any::<u64>())) {
        let m = matrix_of(&l);
        let n = m.n();
        let d = birkhoff(&m).unwrap();
        prop_assert_eq!(matrix_of(&d), m.clone());
        prop_assert!(d.len() <= n * n - 2 * n + 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = birkhoff_randomized(&m, &mut rng).unwrap();
        prop_assert_eq!(matrix_of(&r), m);
        prop_assert!(r.len() <= n * n - 2 * n + 2);
    }

    #[test]
    fn three_agent_decomposition((inst, lam) in (instance_of(3), lambda())) {
        let m = sd_ef_blend(&inst, &lam);
        let l = decompose_three_agent(&inst, &m).unwrap();
        prop_assert_eq!(matrix_of(&l), m);
        prop_assert!(is_dec_ef(&inst, &l).unwrap());
    }

    #[test]
    fn two_type_decomposition((inst, lam) in (two_type_instance(), lambda())) {
        let m = sd_ef_blend(&inst, &lam);
        let n = inst.n();
        let trace = decompose_two_type_traced(&inst, &m, None).unwrap();
        let split = detect_two_type(&inst).unwrap();
        let (r, s) = (split.r(), split.s());
        prop_assert_eq!(matrix_of(&trace.lottery), m);
        prop_assert!(is_dec_ef(&inst, &trace.lottery).unwrap());
        prop_assert!(trace.rounds.len() <= n + 1);
        prop_assert!(trace.lottery.len() <= 4 * r * s * (n + 1));
        let e = envy_matrix(&inst, &trace.lottery).unwrap();
        for group in [&split.first, &split.second] {
            for &i in group.iter() {
                for &k in group.iter().filter(|&&k| k != i) {
                    prop_assert_eq!(e.get(i, k), e.get(k, i));
                    prop_assert!(*e.get(i, k) <= half());
                }
            }
        }
    }

    #[test]
    fn random_two_type_q_choices((inst, lam, seed) in (two_type_instance(), lambda(), any::<u64>())) {
        use rand::seq::SliceRandom;
        use randassign::decompose::decompose_two_type_with;
        use randassign::matching::perfect_matching_with_order;
        let m = sd_ef_blend(&inst, &lam);
        let n = inst.n();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let trace = decompose_two_type_with(&inst, &m, |residual, _| {
            let mut agents: Vec<usize> = (0..n).collect();
            let mut objects: Vec<usize> = (0..n).collect();
            agents.shuffle(&mut rng);
            objects.shuffle(&mut rng);
            Ok(perfect_matching_with_order(residual, &agents, &objects)?.expect("support matching"))
        })
        .unwrap();
        prop_assert_eq!(matrix_of(&trace.lottery), m);
        prop_assert!(is_dec_ef(&inst, &trace.lottery).unwrap());
        prop_assert!(trace.rounds.len() <= n + 1);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn oracle_verdicts_agree((inst, l) in (3usize..=4).prop_flat_map(|n| (instance_of(n), lottery_of(n)))) {
        let m = matrix_of(&l);
        let verdict = ef_decomposable(&inst, &m).unwrap();
        let (value, witness) = minimax_envy(&inst, &m).unwrap();
        prop_assert_eq!(verdict.is_decomposable(), value <= half());
        prop_assert_eq!(matrix_of(&witness), m.clone());
        prop_assert_eq!(envy_matrix(&inst, &witness).unwrap().max_entry(), value);
        if let Some(w) = verdict.witness() {
            prop_assert_eq!(matrix_of(w), m.clone());
            prop_assert!(is_dec_ef(&inst, w).unwrap());
        }
    }

    #[test]
    fn reversal_symmetric_witness_reconstructs(inst in (3usize..=4).prop_flat_map(instance_of)) {
        // Any reversal-symmetric mix is implementable; build one from the orders.
        let n = inst.n();
        let pairs = randassign::oracles::reversal_pairs(n);
        let w = Rational::from_frac(1, 2 * pairs.len() as i64);
        let mut entries = Vec::new();
        for (p, r) in &pairs {
            entries.push((randassign::rules::serial_dictatorship(&inst, p).unwrap(), w.clone()));
            entries.push((randassign::rules::serial_dictatorship(&inst, r).unwrap(), w.clone()));
        }
        let m = matrix_of(&Lottery::new(entries).unwrap());
        match reversal_symmetric_implementable(&inst, &m).unwrap() {
            ReversalSymmetric::Implementable(witness) => {
                prop_assert_eq!(matrix_of(&witness.lottery), m);
                let total: Rational = witness.orders.iter().map(|(_, w)| w.clone()).sum();
                prop_assert_eq!(total, Rational::from_int(1));
            }
            ReversalSymmetric::NotImplementable(_) => prop_assert!(false, "uniform RP is reversal-symmetric"),
        }
    }

    #[test]
    fn birkhoff_envy_bound((inst, lam, seed) in ((2usize..=4).prop_flat_map(instance_of), lambda(), any::<u64>())) {
        let m = sd_ef_blend(&inst, &lam);
        let n = inst.n() as i64;
        let bound = Rational::from_frac(n - 1, n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..4 {
            let l = birkhoff_randomized(&m, &mut rng).unwrap();
            prop_assert!(envy_matrix(&inst, &l).unwrap().max_entry() <= bound);
        }
    }

    #[test]
    fn lp_results_carry_valid_certificates(
        (vars, rows, obj, maximize) in (1usize..=4).prop_flat_map(|v| (
            Just(v),
            prop::collection::vec((prop::collection::vec(-3i64..=3, v), 0usize..3, -4i64..=6), 0..5),
            prop::collection::vec(-3i64..=3, v),
            any::<bool>(),
        ))
    ) {
        let mut lp = LinearProgram::<Rational>::new(vars);
        for (coeffs, rel, rhs) in &rows {
            let rel = [Relation::Le, Relation::Eq, Relation::Ge][*rel];
            lp.add_constraint(coeffs.iter().map(|&c| Rational::from_int(c)).collect(), rel, Rational::from_int(*rhs));
        }
        let sense = if maximize { Sense::Maximize } else { Sense::Minimize };
        lp.set_objective(sense, obj.iter().map(|&c| Rational::from_int(c)).collect());
        let res = exactlp::solve(&lp).unwrap();
        prop_assert_eq!(lp.verify(&res), Ok(()));
        if res.status == LpStatus::Optimal {
            prop_assert!(lp.is_feasible_point(res.solution.as_ref().unwrap()));
        }
        prop_assert_eq!(exactlp::solve(&lp).unwrap(), res);
    }

    #[test]
    fn files_round_trip((inst, l) in instance_and_lottery()) {
        let named = NamedInstance::with_default_names(inst);
        prop_assert_eq!(parse_instance(&render_instance(&named)).unwrap(), named.clone());
        let m = matrix_of(&l);
        prop_assert_eq!(parse_matrix::<Rational>(&render_matrix(&m)).unwrap(), m);
        let names = default_names(l.n());
        prop_assert_eq!(parse_lottery::<Rational>(&render_lottery(&l, &names), &names).unwrap(), l);
    }
}

#[test]
fn cyclic_decomposition_is_tight() {
    for n in 2..=6usize {
        let inst = Instance::identical(n).unwrap();
        let l = cyclic_decomposition::<Rational>(n).unwrap();
        let e = envy_matrix(&inst, &l).unwrap();
        assert_eq!(e.max_entry(), Rational::from_frac(n as i64 - 1, n as i64));
    }
}

#[test]
fn ps_minimax_bound_on_sampled_five_agent_profiles() {
    use rand::Rng;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let bound = Rational::from_frac(3, 4);
    for _ in 0..3 {
        let prefs = (0..5)
            .map(|_| {
                let mut p: Vec<usize> = (0..5).collect();
                for k in (1..5).rev() {
                    p.swap(k, rng.gen_range(0..=k));
                }
                p
            })
            .collect();
        let inst = Instance::new(prefs).unwrap();
        let m = probabilistic_serial::<Rational>(&inst);
        let (v, _) = minimax_envy(&inst, &m).unwrap();
        assert!(v <= bound, "{v}");
    }
}
