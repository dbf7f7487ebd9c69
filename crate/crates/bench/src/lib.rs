//! Workload builders shared by the benchmarks.

use finitum_core::{Distribution, Rational};

/// `m` outcomes with weights proportional to `1, 2, ..., m`.
pub fn triangular(m: usize) -> Distribution {
    let total = (m * (m + 1) / 2) as i64;
    Distribution::from_probabilities((1..=m as i64).map(|k| Rational::new(k, total).unwrap()))
        .expect("weights sum to one")
}

/// A left-nested sum `x + x + ... + x` with `ops` additions.
pub fn long_sum(ops: usize) -> String {
    let mut s = String::from("x");
    for _ in 0..ops {
        s.push_str(" + x");
    }
    s
}
