//! Information budget of a finite-time measurement.
//!
//! With measurement time `t` every photon carries at least `ħ/t`, so a free
//! energy `E` can deliver at most `N = floor(E t / ħ)` quanta. Treating the
//! quanta as indistinguishable and the `S` sensors as distinguishable, the
//! possible absorption patterns with any total `0..=N` number `C(N + S, S)`.
//! Each of `D` distinguishable duration classes multiplies that count.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::certified::{log2, CertifiedReal, Tolerance};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BudgetError {
    #[error("{field} must be positive, got {value}")]
    NonPositive { field: &'static str, value: String },
    #[error("{count} outcomes exceed the enumeration cap of {cap}")]
    CapExceeded { count: BigUint, cap: usize },
}

impl BudgetError {
    pub fn name(&self) -> &'static str {
        match self {
            BudgetError::NonPositive { .. } => "InvalidSpec",
            BudgetError::CapExceeded { .. } => "CapExceeded",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnitMode {
    /// `ħ = 1`; energy is given in units of `ħ` per second.
    #[default]
    Dimensionless,
    /// `ħ` is supplied as an exact rational in the caller's units.
    Physical,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetSpec {
    free_energy: Rational,
    measurement_time: Rational,
    sensors: u64,
    duration_classes: u64,
    hbar: Rational,
    mode: UnitMode,
}

fn positive(field: &'static str, q: &Rational) -> Result<(), BudgetError> {
    if q.is_positive() {
        Ok(())
    } else {
        Err(BudgetError::NonPositive {
            field,
            value: q.to_string(),
        })
    }
}

impl BudgetSpec {
    /// A spec with `ħ = 1`.
    pub fn dimensionless(
        free_energy: Rational,
        measurement_time: Rational,
        sensors: u64,
        duration_classes: u64,
    ) -> Result<Self, BudgetError> {
        Self::build(
            free_energy,
            measurement_time,
            sensors,
            duration_classes,
            Rational::one(),
            UnitMode::Dimensionless,
        )
    }

    pub fn physical(
        free_energy: Rational,
        measurement_time: Rational,
        sensors: u64,
        duration_classes: u64,
        hbar: Rational,
    ) -> Result<Self, BudgetError> {
        Self::build(
            free_energy,
            measurement_time,
            sensors,
            duration_classes,
            hbar,
            UnitMode::Physical,
        )
    }

    fn build(
        free_energy: Rational,
        measurement_time: Rational,
        sensors: u64,
        duration_classes: u64,
        hbar: Rational,
        mode: UnitMode,
    ) -> Result<Self, BudgetError> {
        positive("free energy", &free_energy)?;
        positive("measurement time", &measurement_time)?;
        positive("hbar", &hbar)?;
        if sensors == 0 {
            return Err(BudgetError::NonPositive {
                field: "sensors",
                value: "0".into(),
            });
        }
        if duration_classes == 0 {
            return Err(BudgetError::NonPositive {
                field: "duration classes",
                value: "0".into(),
            });
        }
        Ok(BudgetSpec {
            free_energy,
            measurement_time,
            sensors,
            duration_classes,
            hbar,
            mode,
        })
    }

    pub fn free_energy(&self) -> &Rational {
        &self.free_energy
    }

    pub fn measurement_time(&self) -> &Rational {
        &self.measurement_time
    }

    pub fn sensors(&self) -> u64 {
        self.sensors
    }

    pub fn duration_classes(&self) -> u64 {
        self.duration_classes
    }

    pub fn hbar(&self) -> &Rational {
        &self.hbar
    }

    pub fn mode(&self) -> UnitMode {
        self.mode
    }

    /// `ħ / t`.
    pub fn min_photon_energy(&self) -> Rational {
        self.hbar
            .checked_div(&self.measurement_time)
            .expect("t > 0")
    }

    /// `floor(E t / ħ)`.
    pub fn max_photons(&self) -> BigUint {
        let quanta = (&self.free_energy * &self.measurement_time)
            .checked_div(&self.hbar)
            .expect("hbar > 0");
        quanta.floor().to_biguint().expect("nonnegative")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetReport {
    pub format_version: u32,
    pub min_photon_energy: Rational,
    #[serde(with = "crate::big_serde")]
    pub max_photons: BigUint,
    /// Distinguishable quanta counts per sensor, `0..=N`.
    #[serde(with = "crate::big_serde")]
    pub distinguishable_levels: BigUint,
    /// `C(N + S, S) * D`.
    #[serde(with = "crate::big_serde")]
    pub outcome_count: BigUint,
    pub capacity_bits: CertifiedReal,
}

/// `C(n, k)` by the multiplicative formula; every partial product is exact.
pub fn binomial(n: &BigUint, k: u64) -> BigUint {
    if BigUint::from(k) > *n {
        return BigUint::zero();
    }
    let mut acc = BigUint::one();
    for i in 1..=k {
        acc = acc * (n - k + i) / i;
    }
    acc
}

pub fn compute_budget(spec: &BudgetSpec, tol: &Tolerance) -> BudgetReport {
    let n = spec.max_photons();
    let per_duration = binomial(&(&n + spec.sensors), spec.sensors);
    let outcome_count = per_duration * spec.duration_classes;
    let capacity_bits = log2(
        &Rational::from_bigint(BigInt::from(outcome_count.clone())),
        tol,
    );
    BudgetReport {
        format_version: 1,
        min_photon_energy: spec.min_photon_energy(),
        distinguishable_levels: &n + 1u32,
        max_photons: n,
        outcome_count,
        capacity_bits,
    }
}

/// All assignments of quanta to sensors with total at most `N`, ordered by
/// total and then lexicographically.
pub fn enumerate_outcomes(spec: &BudgetSpec, cap: usize) -> Result<Vec<Vec<u64>>, BudgetError> {
    let n = spec.max_photons();
    let s = spec.sensors;
    let count = binomial(&(&n + s), s);
    if count > BigUint::from(cap) {
        return Err(BudgetError::CapExceeded { count, cap });
    }
    // count <= cap fits usize, so N and S do too.
    let n = n.to_u64().expect("bounded by cap");
    let s = s as usize;
    let mut out = Vec::with_capacity(count.to_usize().expect("bounded by cap"));
    let mut current = vec![0u64; s];
    for total in 0..=n {
        fill(&mut current, 0, total, &mut out);
    }
    Ok(out)
}

fn fill(current: &mut [u64], pos: usize, remaining: u64, out: &mut Vec<Vec<u64>>) {
    if pos + 1 == current.len() {
        current[pos] = remaining;
        out.push(current.to_vec());
        return;
    }
    for q in (0..=remaining).rev() {
        current[pos] = q;
        fill(current, pos + 1, remaining - q, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    fn spec(e: &str, t: &str, s: u64, d: u64) -> BudgetSpec {
        BudgetSpec::dimensionless(r(e), r(t), s, d).unwrap()
    }

    #[test]
    fn budget_examples() {
        let tol = Tolerance::pow2(40);
        let none = compute_budget(&spec("1/2", "1", 1, 1), &tol);
        assert_eq!(none.max_photons, BigUint::zero());
        assert_eq!(none.outcome_count, BigUint::one());
        assert_eq!(none.capacity_bits, CertifiedReal::exact_zero());

        let three = compute_budget(&spec("2", "1", 1, 1), &tol);
        assert_eq!(three.outcome_count, BigUint::from(3u32));
        assert_eq!(three.min_photon_energy, Rational::one());
        // log2 3 = 1.58496250072115618...
        assert!(three.capacity_bits.lo().to_rational() <= r("1.5849625007212"));
        assert!(three.capacity_bits.hi().to_rational() >= r("1.5849625007211"));

        let six = compute_budget(&spec("1", "2", 2, 1), &tol);
        assert_eq!(six.max_photons, BigUint::from(2u32));
        assert_eq!(six.outcome_count, BigUint::from(6u32));
        assert_eq!(six.distinguishable_levels, BigUint::from(3u32));
    }

    #[test]
    fn physical_mode_uses_given_hbar() {
        let s = BudgetSpec::physical(r("3"), r("1/2"), 1, 2, r("1/4")).unwrap();
        assert_eq!(s.min_photon_energy(), r("1/2"));
        assert_eq!(s.max_photons(), BigUint::from(6u32));
        let rep = compute_budget(&s, &Tolerance::default());
        assert_eq!(rep.outcome_count, BigUint::from(14u32));
    }

    #[test]
    fn invalid_specs() {
        assert!(BudgetSpec::dimensionless(r("0"), r("1"), 1, 1).is_err());
        assert!(BudgetSpec::dimensionless(r("1"), r("-1"), 1, 1).is_err());
        assert!(BudgetSpec::dimensionless(r("1"), r("1"), 0, 1).is_err());
        assert!(BudgetSpec::dimensionless(r("1"), r("1"), 1, 0).is_err());
        assert!(BudgetSpec::physical(r("1"), r("1"), 1, 1, r("0")).is_err());
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(
            enumerate_outcomes(&spec("1", "1", 2, 1), 100).unwrap(),
            vec![vec![0, 0], vec![1, 0], vec![0, 1]]
        );
        assert_eq!(
            enumerate_outcomes(&spec("2", "1", 2, 1), 100)
                .unwrap()
                .len(),
            6
        );
        assert_eq!(
            enumerate_outcomes(&spec("1/3", "1", 5, 1), 100).unwrap(),
            vec![vec![0; 5]]
        );
        assert!(matches!(
            enumerate_outcomes(&spec("10", "1", 4, 1), 100),
            Err(BudgetError::CapExceeded { .. })
        ));
    }

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(&BigUint::from(4u32), 2), BigUint::from(6u32));
        assert_eq!(
            binomial(&BigUint::from(52u32), 5),
            BigUint::from(2_598_960u32)
        );
        assert_eq!(binomial(&BigUint::from(3u32), 5), BigUint::zero());
        assert_eq!(binomial(&BigUint::from(7u32), 0), BigUint::one());
    }

    #[test]
    fn n_depends_only_on_energy_time_product() {
        let a = spec("7/3", "5", 3, 1);
        let b = spec("14/3", "5/2", 3, 1);
        assert_eq!(a.max_photons(), b.max_photons());
    }
}
