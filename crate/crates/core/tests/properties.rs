use finitum_core::calc::Bindings;
use finitum_core::divergence::mass_bound;
use finitum_core::indexing::{linear_position, symmetric_position};
use finitum_core::{
    compute_budget, conditional_entropy, entropy, entropy_lower_bound, enumerate_closure,
    enumerate_outcomes, evaluate, information, partition, surprisal_term, symmetric_index,
    BudgetSpec, ClosureOptions, Distribution, ElementaryOp, Expr, JointDistribution, PartitionSpec,
    Rational, ResultSet, Tolerance,
};
use num_bigint::BigUint;
use proptest::prelude::*;

fn weights_to_distribution(w: &[u32]) -> Distribution {
    let total: i64 = w.iter().map(|&x| x as i64).sum();
    Distribution::from_probabilities(w.iter().map(|&x| Rational::new(x as i64, total).unwrap()))
        .unwrap()
}

fn distribution() -> impl Strategy<Value = Distribution> {
    prop::collection::vec(1u32..1000, 1..10).prop_map(|w| weights_to_distribution(&w))
}

fn tolerance() -> impl Strategy<Value = Tolerance> {
    prop_oneof![Just(Tolerance::pow2(20)), Just(Tolerance::pow2(40))]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn entropy_between_zero_and_log_support(d in distribution(), tol in tolerance()) {
        let h = entropy(&d, &tol);
        prop_assert!(tol.admits(&h));
        prop_assert!(!h.hi().is_negative());
        let cap = finitum_core::certified::log2(&Rational::from_integer(d.support_size() as i64), &tol);
        prop_assert!(h.lo() <= cap.hi());
    }

    #[test]
    fn uniform_is_maximal(d in distribution()) {
        let tol = Tolerance::pow2(40);
        let h = entropy(&d, &tol);
        let u = entropy(&Distribution::uniform(d.len()).unwrap(), &tol);
        prop_assert!(h.lo() <= u.hi());
    }

    #[test]
    fn entropy_is_permutation_invariant(w in prop::collection::vec(1u32..1000, 1..10), seed in any::<u64>()) {
        let mut shuffled = w.clone();
        let n = shuffled.len();
        for i in (1..n).rev() {
            shuffled.swap(i, (seed as usize ^ i.wrapping_mul(2654435761)) % (i + 1));
        }
        let tol = Tolerance::pow2(40);
        prop_assert_eq!(
            entropy(&weights_to_distribution(&w), &tol),
            entropy(&weights_to_distribution(&shuffled), &tol)
        );
    }

    #[test]
    fn information_nonnegative_and_bounded(
        w in prop::collection::vec(1u32..50, 4..=4),
        v in prop::collection::vec(1u32..50, 4..=4),
        tol in tolerance(),
    ) {
        let total: i64 = w.iter().chain(&v).map(|&x| x as i64).sum();
        let q = |x: u32| Rational::new(x as i64, total).unwrap();
        let j = JointDistribution::from_table(vec![
            w.iter().map(|&x| q(x)).collect(),
            v.iter().map(|&x| q(x)).collect(),
        ]).unwrap();
        let i = information(&j, &tol);
        prop_assert!(!i.lo().is_negative());
        prop_assert!(tol.admits(&i));
        let hc = conditional_entropy(&j, &tol);
        prop_assert!(!hc.hi().is_negative());
        let h = entropy(&j.col_marginal(), &tol);
        prop_assert!(i.lo() <= h.hi());
    }

    #[test]
    fn diagonal_information_is_entropy(d in distribution()) {
        let tol = Tolerance::pow2(40);
        let i = information(&JointDistribution::diagonal(&d), &tol);
        let h = entropy(&d, &tol);
        prop_assert!(i.lo() <= h.hi() && h.lo() <= i.hi());
    }

    #[test]
    fn doubling_adds_epsilon(k in 1u32..200, mass_exp in 2i64..12) {
        // Dyadic mass keeps the bound exact.
        let mass = Rational::pow2(-mass_exp);
        let eps = Rational::pow2(-mass_exp - 1);
        let tol = Tolerance::pow2(30);
        let a = entropy_lower_bound(&mass, &(BigUint::from(1u32) << k), &tol).unwrap();
        let b = entropy_lower_bound(&mass, &(BigUint::from(1u32) << (k + 1)), &tol).unwrap();
        prop_assert!(a.is_exact() && b.is_exact());
        prop_assert_eq!(b.lo().to_rational() - a.lo().to_rational(), eps);
    }

    #[test]
    fn surprisal_increases_below_inverse_e(a in 1i64..1000, b in 1i64..1000) {
        prop_assume!(a != b);
        let (a, b) = (a.min(b), a.max(b));
        // Both in (0, 5/14], inside the increasing branch.
        let scale = mass_bound().checked_div(&Rational::from_integer(1000)).unwrap();
        let p = &scale * &Rational::from_integer(a);
        let q = &scale * &Rational::from_integer(b);
        let tol = Tolerance::pow2(60);
        let fp = surprisal_term(&p, &tol).unwrap();
        let fq = surprisal_term(&q, &tol).unwrap();
        prop_assert!(fp.strictly_below(&fq));
    }

    #[test]
    fn partition_tiles_interval(a in -50i64..50, len in 1i64..50, den in 1i64..7, n in 1u64..300) {
        let lo = Rational::new(a, den).unwrap();
        let hi = &lo + &Rational::new(len, den).unwrap();
        let spec = PartitionSpec::new(lo.clone(), hi.clone(), n, Rational::new(1, 4).unwrap()).unwrap();
        let parts = partition(&spec);
        prop_assert_eq!(parts.len() as u64, n);
        prop_assert_eq!(&parts[0].lo, &lo);
        prop_assert_eq!(&parts[parts.len() - 1].hi, &hi);
        for w in parts.windows(2) {
            prop_assert_eq!(&w[0].hi, &w[1].lo);
            prop_assert_eq!(&w[0].hi - &w[0].lo, &w[1].hi - &w[1].lo);
        }
    }

    #[test]
    fn budget_monotone_in_energy(e in 1i64..40, t in 1i64..5, s in 1u64..4, d in 1u64..3) {
        let tol = Tolerance::pow2(40);
        let small = compute_budget(&BudgetSpec::dimensionless(Rational::from_integer(e), Rational::from_integer(t), s, d).unwrap(), &tol);
        let large = compute_budget(&BudgetSpec::dimensionless(Rational::from_integer(e + 1), Rational::from_integer(t), s, d).unwrap(), &tol);
        prop_assert!(small.outcome_count < large.outcome_count);
        prop_assert!(small.capacity_bits.strictly_below(&large.capacity_bits));
    }

    #[test]
    fn enumeration_length_matches_count(e in 0i64..8, s in 1u64..5) {
        let spec = BudgetSpec::dimensionless(Rational::new(2 * e + 1, 2).unwrap(), Rational::one(), s, 1).unwrap();
        let outcomes = enumerate_outcomes(&spec, 1 << 20).unwrap();
        let report = compute_budget(&spec, &Tolerance::pow2(20));
        prop_assert_eq!(BigUint::from(outcomes.len()), report.outcome_count);
        let n = e as u64;
        prop_assert!(outcomes.iter().all(|o| o.len() == s as usize && o.iter().sum::<u64>() <= n));
    }

    #[test]
    fn symmetric_positions_are_centered(m in 1usize..1000) {
        let items: Vec<usize> = (0..m).collect();
        let rs = ResultSet::new(items).unwrap();
        let idx = symmetric_index(&rs);
        let indices = idx.indices();
        prop_assert_eq!(indices.iter().sum::<i64>(), 0);
        for (k, &i) in indices.iter().enumerate() {
            prop_assert_eq!(i, symmetric_position(k + 1, m));
            prop_assert_eq!(linear_position(i, m), Some(k + 1));
            prop_assert_eq!(idx.get(i), Some(&k));
        }
        prop_assert!(indices.windows(2).all(|w| w[1] - w[0] == 2));
    }
}

fn random_expr(ops: u32, seed: &mut u64) -> Expr {
    let mut next = || {
        *seed = seed
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (*seed >> 33) as usize
    };
    if ops == 0 {
        return Expr::Variable("a".into());
    }
    let left_ops = next() as u32 % ops;
    let op = ElementaryOp::ALL[next() % 4];
    let mut s = *seed;
    let left = random_expr(left_ops, &mut s);
    let right = random_expr(ops - 1 - left_ops, &mut s);
    *seed = s;
    Expr::combine(op, left, right)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn expressions_land_in_closure(num in -6i64..7, den in 1i64..5, ops in 0u32..=3, seed in any::<u64>()) {
        let a = Rational::new(num, den).unwrap();
        let mut s = seed;
        let e = random_expr(ops, &mut s);
        let bindings: Bindings = [("a".to_string(), a.clone())].into_iter().collect();
        let cs = enumerate_closure(&[a], ops as usize, &ClosureOptions::default()).unwrap();
        if let Ok(ev) = evaluate(&e, &bindings, 3) {
            prop_assert_eq!(ev.ops_used, ops as u64);
            prop_assert!(cs.contains(&ev.value).is_some_and(|lvl| lvl <= ops as usize));
        }
    }
}
