//! Exact-arithmetic tools for finite information content.
//!
//! - [`rational`]: canonical arbitrary-precision fractions and the four
//!   elementary combinations.
//! - [`closure`]: the leveled sets of values reachable from seeds by chained
//!   combinations.
//! - [`certified`]: interval enclosures with dyadic endpoints and certified
//!   base-2 logarithms.
//! - [`entropy`]: entropy, conditional entropy and information quantity of
//!   finite distributions with rational probabilities.
//! - [`divergence`]: the unbounded growth of entropy under ever finer
//!   discretization of a continuous model.
//! - [`budget`]: outcome counts and capacity of a finite-energy, finite-time
//!   measurement.
//! - [`indexing`]: linear and symmetric integer labels for finite result sets.
//! - [`calc`]: a budgeted calculator over the elementary combinations.

pub mod budget;
pub mod calc;
pub mod certified;
pub mod closure;
pub mod divergence;
pub mod entropy;
pub mod indexing;
pub mod rational;

mod big_serde;

pub use budget::{compute_budget, enumerate_outcomes, BudgetReport, BudgetSpec, UnitMode};
pub use calc::{evaluate, parse, CalcError, Evaluation, Expr, OutcomeModel, ValidatedOutcome};
pub use certified::{CertifiedReal, Dyadic, Tolerance};
pub use closure::{enumerate_closure, ChainMode, ClosureError, ClosureOptions, ClosureSet};
pub use divergence::{
    entropy_lower_bound, equal_mass_distribution, partition, verify_divergence, PartitionSpec,
};
pub use entropy::{
    conditional_entropy, entropy, information, surprisal_term, Distribution, JointDistribution,
};
pub use indexing::{linear_index, symmetric_index, ResultSet, SymmetricIndex};
pub use rational::{combine, normalize, ElementaryOp, Rational, RationalError};
