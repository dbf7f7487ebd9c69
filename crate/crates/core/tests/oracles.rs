//! Results checked against independently computed references.

use std::collections::BTreeSet;

use finitum_core::budget::binomial;
use finitum_core::certified::log2;
use finitum_core::{
    compute_budget, conditional_entropy, entropy, entropy_lower_bound, enumerate_closure,
    information, BudgetSpec, CertifiedReal, ChainMode, ClosureOptions, Distribution,
    JointDistribution, Rational, Tolerance,
};
use num_bigint::BigUint;

fn r(s: &str) -> Rational {
    s.parse().unwrap()
}

/// Certifies that the true value, known to lie in `[lo_ref, hi_ref]`, is
/// compatible with the enclosure and that the enclosure is tight.
fn brackets(c: &CertifiedReal, lo_ref: &str, hi_ref: &str, tol: &Tolerance) {
    assert!(
        c.lo().to_rational() <= r(hi_ref),
        "lo {} above {hi_ref}",
        c.to_human()
    );
    assert!(
        c.hi().to_rational() >= r(lo_ref),
        "hi {} below {lo_ref}",
        c.to_human()
    );
    assert!(tol.admits(c), "width {} over tolerance", c.width());
}

// Naive fractions on i128; no shared code with the library.
fn gcd(mut a: i128, mut b: i128) -> i128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.abs()
}

fn frac(n: i128, d: i128) -> (i128, i128) {
    let g = gcd(n, d);
    let s = if d < 0 { -1 } else { 1 };
    (s * n / g, s * d / g)
}

fn naive_step(
    level: &BTreeSet<(i128, i128)>,
    partners: &BTreeSet<(i128, i128)>,
) -> BTreeSet<(i128, i128)> {
    let mut next = level.clone();
    for &(a, b) in level {
        for &(c, d) in partners {
            for (x, y) in [(a, b, c, d), (c, d, a, b)]
                .map(|(a, b, c, d)| {
                    [
                        Some(frac(a * d + c * b, b * d)),
                        Some(frac(a * d - c * b, b * d)),
                        Some(frac(a * c, b * d)),
                        (c != 0).then(|| frac(a * d, b * c)),
                    ]
                })
                .into_iter()
                .flatten()
                .flatten()
            {
                next.insert((x, y));
            }
        }
    }
    next
}

fn naive_levels(seeds: &[(i128, i128)], n: usize, chain: bool) -> Vec<BTreeSet<(i128, i128)>> {
    let seeds: BTreeSet<_> = seeds.iter().map(|&(a, b)| frac(a, b)).collect();
    let mut levels = vec![seeds.clone()];
    for _ in 0..n {
        let last = levels.last().unwrap();
        let partners = if chain { &seeds } else { last };
        levels.push(naive_step(last, partners));
    }
    levels
}

fn as_pairs(values: Vec<Rational>) -> BTreeSet<(i128, i128)> {
    values
        .iter()
        .map(|q| (q.numer().try_into().unwrap(), q.denom().try_into().unwrap()))
        .collect()
}

#[test]
fn closure_matches_naive_enumeration() {
    let cases: &[(&[(i128, i128)], usize)] = &[
        (&[(1, 1)], 3),
        (&[(2, 3)], 2),
        (&[(1, 2), (3, 1)], 2),
        (&[(0, 1)], 3),
    ];
    for &(seeds, n) in cases {
        let qs: Vec<Rational> = seeds
            .iter()
            .map(|&(a, b)| Rational::new(a as i64, b as i64).unwrap())
            .collect();
        let cs = enumerate_closure(&qs, n, &ClosureOptions::default()).unwrap();
        let oracle = naive_levels(seeds, n, false);
        for (k, expected) in oracle.iter().enumerate() {
            assert_eq!(
                as_pairs(cs.level(k)),
                *expected,
                "seeds {seeds:?} level {k}"
            );
        }
    }
}

#[test]
fn chain_strict_matches_naive_enumeration() {
    let opts = ClosureOptions {
        mode: ChainMode::ChainStrict,
        ..ClosureOptions::default()
    };
    let cs = enumerate_closure(&[Rational::one()], 5, &opts).unwrap();
    let oracle = naive_levels(&[(1, 1)], 5, true);
    for (k, expected) in oracle.iter().enumerate() {
        assert_eq!(as_pairs(cs.level(k)), *expected, "level {k}");
    }
}

#[test]
fn closure_small_profile() {
    let cs = enumerate_closure(&[Rational::one()], 3, &ClosureOptions::default()).unwrap();
    let sizes: Vec<usize> = cs
        .cardinality_profile()
        .into_iter()
        .map(|(_, c)| c)
        .collect();
    assert_eq!(
        sizes,
        vec![1, 3, 8, naive_levels(&[(1, 1)], 3, false)[3].len()]
    );
    assert_eq!(cs.level(1), vec![r("0"), r("1"), r("2")]);
    assert_eq!(
        cs.level(2),
        vec![
            r("-2"),
            r("-1"),
            r("0"),
            r("1/2"),
            r("1"),
            r("2"),
            r("3"),
            r("4")
        ]
    );
}

// References below were computed with 50-digit arbitrary precision arithmetic.

#[test]
fn entropy_reference_values() {
    let tol = Tolerance::pow2(60);
    let third = entropy(
        &Distribution::from_probabilities([r("1/3"), r("1/6"), r("1/2")]).unwrap(),
        &tol,
    );
    brackets(
        &third,
        "1.45914791702724475739353613864",
        "1.45914791702724475739353613865",
        &tol,
    );

    let weights =
        Distribution::from_probabilities((1..=10).map(|k| Rational::new(k, 55).unwrap())).unwrap();
    brackets(
        &entropy(&weights, &tol),
        "3.10364346993947995189878196440",
        "3.10364346993947995189878196441",
        &tol,
    );

    let mut ps = vec![r("1/35"); 7];
    ps.push(r("4/5"));
    let lumped = entropy(&Distribution::from_probabilities(ps).unwrap(), &tol);
    brackets(
        &lumped,
        "1.28339907929888316935871329293",
        "1.28339907929888316935871329294",
        &tol,
    );

    let term = finitum_core::surprisal_term(&r("1/3"), &tol).unwrap();
    brackets(
        &term,
        "0.52832083357371872715124631464",
        "0.52832083357371872715124631465",
        &tol,
    );
}

#[test]
fn joint_reference_values() {
    let tol = Tolerance::pow2(60);
    let j = JointDistribution::from_table(vec![vec![r("1/4"), r("1/8")], vec![r("1/8"), r("1/2")]])
        .unwrap();
    brackets(
        &conditional_entropy(&j, &tol),
        "0.79556599707503503546410174741",
        "0.79556599707503503546410174742",
        &tol,
    );
    brackets(
        &information(&j, &tol),
        "0.15886800584992992907179650517",
        "0.15886800584992992907179650518",
        &tol,
    );
}

#[test]
fn divergence_bound_reference() {
    let tol = Tolerance::pow2(60);
    let b = entropy_lower_bound(&r("1/5"), &BigUint::from(1000u32), &tol).unwrap();
    brackets(
        &b,
        "1.32877123795494493914812777179",
        "1.32877123795494493914812777180",
        &tol,
    );
}

#[test]
fn budget_reference() {
    let tol = Tolerance::pow2(60);
    let rep = compute_budget(
        &BudgetSpec::dimensionless(r("1"), r("2"), 2, 1).unwrap(),
        &tol,
    );
    assert_eq!(rep.outcome_count, BigUint::from(6u32));
    brackets(
        &rep.capacity_bits,
        "2.58496250072115618145373894394",
        "2.58496250072115618145373894395",
        &tol,
    );
    brackets(
        &log2(&r("6"), &tol),
        "2.58496250072115618145373894394",
        "2.58496250072115618145373894395",
        &tol,
    );
}

#[test]
fn binomial_matches_pascal_triangle() {
    let mut row = vec![BigUint::from(1u32)];
    for n in 0u32..60 {
        for (k, expected) in row.iter().enumerate() {
            assert_eq!(binomial(&BigUint::from(n), k as u64), *expected);
        }
        let mut next = vec![BigUint::from(1u32)];
        next.extend(row.windows(2).map(|w| &w[0] + &w[1]));
        next.push(BigUint::from(1u32));
        row = next;
    }
}
