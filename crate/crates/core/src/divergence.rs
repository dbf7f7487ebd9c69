//! Entropy of a finely discretized continuous result model.
//!
//! A mass `m` spread evenly over `n` subintervals of `[a, b)` gives each
//! subinterval probability `m/n > ε/n` with `ε = m/2`. Since `-x log2 x` is
//! increasing on `(0, 1/e)`, the entropy is at least
//! `n · f(ε/n) = ε (log2 n - log2 ε)`, which grows without bound in `n`.

use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint};
use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certified::{log2_fixed, surprisal_fixed, CertifiedReal, FixedInterval, Tolerance};
use crate::entropy::{grouped_entropy_fixed, Distribution, Outcome};
use crate::rational::{Rational, RoundMode};

/// Largest admissible mass; `5/14 < 1/e`.
pub fn mass_bound() -> Rational {
    Rational::new(5, 14).expect("nonzero")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DivergenceError {
    #[error("invalid partition: {0}")]
    InvalidSpec(String),
    #[error("mass {0} outside (0, 5/14]")]
    DomainError(Rational),
    #[error("threshold must be positive, got {0}")]
    NonPositiveThreshold(Rational),
}

impl DivergenceError {
    pub fn name(&self) -> &'static str {
        match self {
            DivergenceError::InvalidSpec(_) => "InvalidSpec",
            DivergenceError::DomainError(_) => "DomainError",
            DivergenceError::NonPositiveThreshold(_) => "DomainError",
        }
    }
}

fn check_mass(mass: &Rational) -> Result<(), DivergenceError> {
    if !mass.is_positive() || mass > &mass_bound() {
        return Err(DivergenceError::DomainError(mass.clone()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionSpec {
    a: Rational,
    b: Rational,
    n: u64,
    mass: Rational,
}

impl PartitionSpec {
    pub fn new(a: Rational, b: Rational, n: u64, mass: Rational) -> Result<Self, DivergenceError> {
        if a >= b {
            return Err(DivergenceError::InvalidSpec(format!(
                "need a < b, got [{a}, {b})"
            )));
        }
        if n == 0 {
            return Err(DivergenceError::InvalidSpec("n must be positive".into()));
        }
        check_mass(&mass)
            .map_err(|_| DivergenceError::InvalidSpec(format!("mass {mass} outside (0, 5/14]")))?;
        Ok(PartitionSpec { a, b, n, mass })
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn mass(&self) -> &Rational {
        &self.mass
    }

    /// `mass / 2`.
    pub fn epsilon(&self) -> Rational {
        &self.mass * &Rational::pow2(-1)
    }

    pub fn with_n(&self, n: u64) -> Result<Self, DivergenceError> {
        Self::new(self.a.clone(), self.b.clone(), n, self.mass.clone())
    }
}

/// Half-open interval `[lo, hi)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subinterval {
    pub lo: Rational,
    pub hi: Rational,
}

/// The `n` equal-width subintervals `J_1 .. J_n` of `[a, b)`.
pub fn partition(spec: &PartitionSpec) -> Vec<Subinterval> {
    let width = spec.b.clone() - &spec.a;
    let n = Rational::from_integer(spec.n as i64);
    let at = |k: u64| {
        let frac = Rational::from_integer(k as i64)
            .checked_div(&n)
            .expect("n > 0");
        &spec.a + &(&width * &frac)
    };
    (1..=spec.n)
        .map(|k| Subinterval {
            lo: at(k - 1),
            hi: at(k),
        })
        .collect()
}

/// `J_1 .. J_n` each with probability `mass / n`, plus `"elsewhere"` with
/// `1 - mass`.
pub fn equal_mass_distribution(spec: &PartitionSpec) -> Distribution {
    let p = spec
        .mass
        .checked_div(&Rational::from_integer(spec.n as i64))
        .expect("n > 0");
    let mut outcomes: Vec<Outcome> = (1..=spec.n)
        .map(|k| Outcome {
            label: format!("J_{k}"),
            p: p.clone(),
        })
        .collect();
    outcomes.push(Outcome {
        label: "elsewhere".into(),
        p: Rational::one() - &spec.mass,
    });
    Distribution::new(outcomes).expect("probabilities sum to one by construction")
}

fn bound_fixed(eps: &Rational, n: &BigUint, bits: u32) -> FixedInterval {
    let log_n = log2_fixed(&Rational::from_biguint(n.clone()), bits);
    let mut t = log2_fixed(eps, bits).neg();
    t.add_assign(&log_n);
    t.scale(eps)
}

/// Certified `ε (log2 n - log2 ε)` with `ε = mass / 2`.
pub fn entropy_lower_bound(
    mass: &Rational,
    n: &BigUint,
    tol: &Tolerance,
) -> Result<CertifiedReal, DivergenceError> {
    check_mass(mass)?;
    if n == &BigUint::ZERO {
        return Err(DivergenceError::InvalidSpec("n must be positive".into()));
    }
    let eps = mass * &Rational::pow2(-1);
    Ok(tol.refine(|bits| CertifiedReal::from_fixed(&bound_fixed(&eps, n, bits))))
}

/// Certified `sum_k f(p(J_k)) = n f(mass/n)`.
fn partial_sum(mass: &Rational, n: &BigUint, tol: &Tolerance) -> CertifiedReal {
    let p = mass
        .checked_div(&Rational::from_biguint(n.clone()))
        .expect("n > 0");
    let count = BigInt::from(n.clone());
    tol.refine(|bits| CertifiedReal::from_fixed(&surprisal_fixed(&p, bits).scale_int(&count)))
}

/// Certified entropy of the equal-mass distribution over `n` subintervals,
/// computed without materializing the outcomes.
fn discretized_entropy(mass: &Rational, n: &BigUint, tol: &Tolerance) -> CertifiedReal {
    let p = mass
        .checked_div(&Rational::from_biguint(n.clone()))
        .expect("n > 0");
    let groups = vec![
        (p, BigInt::from(n.clone())),
        (Rational::one() - mass, BigInt::one()),
    ];
    tol.refine(|bits| CertifiedReal::from_fixed(&grouped_entropy_fixed(&groups, bits)))
}

/// A power-of-two subdivision whose entropy bound exceeds a threshold, with
/// the certified chain `entropy > partial_sum > bound > threshold`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivergenceWitness {
    pub k: u32,
    #[serde(with = "crate::big_serde")]
    pub n: BigUint,
    pub threshold: Rational,
    pub bound: CertifiedReal,
    pub partial_sum: CertifiedReal,
    pub entropy: CertifiedReal,
}

/// Finds the smallest `n = 2^k`, `k >= 1`, with `ε (log2 n - log2 ε) > threshold`.
pub fn verify_divergence(
    spec: &PartitionSpec,
    threshold: &Rational,
) -> Result<DivergenceWitness, DivergenceError> {
    if !threshold.is_positive() {
        return Err(DivergenceError::NonPositiveThreshold(threshold.clone()));
    }
    let mass = &spec.mass;
    let mut k: u32 = 1;
    loop {
        let n = BigUint::one() << k;
        if let Some(bound) = decide_above(mass, &n, threshold) {
            let (partial_sum, entropy) = certify_chain(mass, &n, &bound);
            return Ok(DivergenceWitness {
                k,
                n,
                threshold: threshold.clone(),
                bound,
                partial_sum,
                entropy,
            });
        }
        k += 1;
    }
}

/// `Some(bound)` if the bound at `n` is certifiably above `threshold`, `None`
/// if certifiably at or below it.
fn decide_above(mass: &Rational, n: &BigUint, threshold: &Rational) -> Option<CertifiedReal> {
    let mut bits = 40;
    loop {
        let tol = Tolerance::pow2(bits);
        let bound = entropy_lower_bound(mass, n, &tol).expect("mass validated by spec");
        if bound.strictly_above_value(threshold) {
            return Some(bound);
        }
        if bound.hi().to_rational() <= *threshold {
            return None;
        }
        // The bound is irrational unless ε is a power of two, in which case
        // the enclosure is already a point and one of the branches fired.
        bits *= 2;
    }
}

fn certify_chain(
    mass: &Rational,
    n: &BigUint,
    bound: &CertifiedReal,
) -> (CertifiedReal, CertifiedReal) {
    let mut bits = 40;
    loop {
        let tol = Tolerance::pow2(bits);
        let partial = partial_sum(mass, n, &tol);
        let ent = discretized_entropy(mass, n, &tol);
        if bound.strictly_below(&partial) && partial.strictly_below(&ent) {
            return (partial, ent);
        }
        bits *= 2;
    }
}

/// One row of the divergence table at `n = 2^k`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivergenceRow {
    pub k: u32,
    #[serde(with = "crate::big_serde")]
    pub n: BigUint,
    pub bound: CertifiedReal,
    pub entropy: CertifiedReal,
}

pub fn divergence_table(
    mass: &Rational,
    ks: std::ops::RangeInclusive<u32>,
    tol: &Tolerance,
) -> Result<Vec<DivergenceRow>, DivergenceError> {
    check_mass(mass)?;
    ks.map(|k| {
        let n = BigUint::one() << k;
        Ok(DivergenceRow {
            k,
            bound: entropy_lower_bound(mass, &n, tol)?,
            entropy: discretized_entropy(mass, &n, tol),
            n,
        })
    })
    .collect()
}

/// CSV with header `n,bound_lo,bound_hi,entropy_lo,entropy_hi`. Lower
/// endpoints are rounded down and upper endpoints up to `digits` places.
pub fn table_csv(rows: &[DivergenceRow], digits: usize) -> String {
    let mut out = String::from("n,bound_lo,bound_hi,entropy_lo,entropy_hi\n");
    for row in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            row.n,
            row.bound
                .lo()
                .to_rational()
                .to_decimal(digits, RoundMode::Floor),
            row.bound
                .hi()
                .to_rational()
                .to_decimal(digits, RoundMode::Ceil),
            row.entropy
                .lo()
                .to_rational()
                .to_decimal(digits, RoundMode::Floor),
            row.entropy
                .hi()
                .to_rational()
                .to_decimal(digits, RoundMode::Ceil),
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::entropy;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn spec(a: &str, b: &str, n: u64, mass: &str) -> PartitionSpec {
        PartitionSpec::new(r(a), r(b), n, r(mass)).unwrap()
    }

    #[test]
    fn partition_examples() {
        let halves = partition(&spec("0", "1", 2, "1/4"));
        assert_eq!(
            halves,
            vec![
                Subinterval {
                    lo: r("0"),
                    hi: r("1/2")
                },
                Subinterval {
                    lo: r("1/2"),
                    hi: r("1")
                }
            ]
        );
        let thirds = partition(&spec("0", "1", 3, "1/4"));
        assert_eq!(
            thirds[1],
            Subinterval {
                lo: r("1/3"),
                hi: r("2/3")
            }
        );
        let fifths = partition(&spec("1/3", "1/2", 5, "1/4"));
        assert!(fifths.iter().all(|j| &j.hi - &j.lo == r("1/30")));
        assert_eq!(fifths[0].lo, r("1/3"));
        assert_eq!(fifths[4].hi, r("1/2"));
        assert!(fifths.windows(2).all(|w| w[0].hi == w[1].lo));
    }

    #[test]
    fn invalid_specs() {
        assert!(PartitionSpec::new(r("1"), r("1"), 2, r("1/4")).is_err());
        assert!(PartitionSpec::new(r("0"), r("1"), 0, r("1/4")).is_err());
        assert!(PartitionSpec::new(r("0"), r("1"), 2, r("0")).is_err());
        assert!(PartitionSpec::new(r("0"), r("1"), 2, r("1/2")).is_err());
        assert!(PartitionSpec::new(r("0"), r("1"), 2, r("5/14")).is_ok());
        assert!(
            entropy_lower_bound(&r("2/5"), &BigUint::from(2u32), &Tolerance::default()).is_err()
        );
    }

    #[test]
    fn equal_mass_examples() {
        let d = equal_mass_distribution(&spec("0", "1", 2, "1/4"));
        let ps: Vec<_> = d.probabilities().cloned().collect();
        assert_eq!(ps, vec![r("1/8"), r("1/8"), r("3/4")]);
        let d = equal_mass_distribution(&spec("0", "1", 4, "1/4"));
        assert_eq!(d.len(), 5);
        assert!(d.probabilities().take(4).all(|p| p == &r("1/16")));
        let d = equal_mass_distribution(&spec("0", "1", 7, "5/14"));
        assert!(d.probabilities().take(7).all(|p| p == &r("5/98")));
        assert_eq!(d.outcomes()[7].p, r("9/14"));
    }

    #[test]
    fn dyadic_bounds_are_exact() {
        let tol = Tolerance::pow2(30);
        let b = entropy_lower_bound(&r("1/4"), &(BigUint::one() << 10u32), &tol).unwrap();
        assert_eq!(b, CertifiedReal::exact(&r("13/8")).unwrap());
        let b = entropy_lower_bound(&r("1/4"), &(BigUint::one() << 40u32), &tol).unwrap();
        assert_eq!(b, CertifiedReal::exact(&r("43/8")).unwrap());
    }

    #[test]
    fn non_dyadic_bound() {
        // (1/10)(log2 1000 + log2 10) = 0.4 log2 10 = 1.328771237954945...
        let b =
            entropy_lower_bound(&r("1/5"), &BigUint::from(1000u32), &Tolerance::pow2(50)).unwrap();
        assert!(b.lo().to_rational() <= r("1.3287712379549450"));
        assert!(b.hi().to_rational() >= r("1.3287712379549449"));
        assert!(b.width() <= Rational::pow2(-50));
    }

    #[test]
    fn witnesses() {
        let s = spec("0", "1", 2, "1/4");
        assert_eq!(verify_divergence(&s, &r("1")).unwrap().k, 6);
        let w = verify_divergence(&s, &r("5")).unwrap();
        assert_eq!(w.k, 38);
        assert_eq!(w.bound, CertifiedReal::exact(&r("41/8")).unwrap());
        assert!(w.bound.strictly_below(&w.partial_sum) && w.partial_sum.strictly_below(&w.entropy));
        let tiny = verify_divergence(&spec("0", "1", 2, "1/5"), &r("1/1000")).unwrap();
        assert_eq!(tiny.k, 1);
        assert!(verify_divergence(&s, &r("0")).is_err());
    }

    #[test]
    fn materialized_entropy_matches_grouped() {
        let tol = Tolerance::pow2(40);
        let s = spec("0", "1", 12, "1/5");
        let direct = entropy(&equal_mass_distribution(&s), &tol);
        let grouped = discretized_entropy(&r("1/5"), &BigUint::from(12u32), &tol);
        assert_eq!(direct, grouped);
    }

    #[test]
    fn csv_rows() {
        let rows = divergence_table(&r("1/4"), 1..=2, &Tolerance::pow2(30)).unwrap();
        let csv = table_csv(&rows, 6);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next(),
            Some("n,bound_lo,bound_hi,entropy_lo,entropy_hi")
        );
        assert!(lines.next().unwrap().starts_with("2,0.500000,0.500000,"));
        assert!(lines.next().unwrap().starts_with("4,0.625000,0.625000,"));
    }
}
