//! Outcome models: finitely many result vectors with probabilities, each a
//! budgeted program in the initial data `x`.
//!
//! The components of `x` are bound as `x1 .. xl`; a model with arity 1 may
//! also refer to its single input as `x`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::Rational;

use super::{evaluate, parse, Bindings, CalcError, Expr};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProbabilityError {
    #[error("outcome {outcome} has negative probability {p}")]
    Negative { outcome: usize, p: Rational },
    #[error("probabilities sum to {sum}; residual {residual}")]
    NotNormalized { sum: Rational, residual: Rational },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("model has no outcomes")]
    NoOutcomes,
    #[error("budget must be positive")]
    ZeroBudget,
    #[error("expected {expected} inputs, got {got}")]
    Arity { expected: usize, got: usize },
    #[error("outcome {outcome} has a {got}-dimensional result, expected {expected}")]
    Dimension {
        outcome: usize,
        expected: usize,
        got: usize,
    },
    #[error("outcome {outcome}, {field}: {source}")]
    Program {
        outcome: usize,
        field: String,
        #[source]
        source: CalcError,
    },
    #[error(transparent)]
    Probability(#[from] ProbabilityError),
    #[error("invalid model file: {0}")]
    Format(String),
}

impl ModelError {
    pub fn name(&self) -> &'static str {
        match self {
            ModelError::NoOutcomes => "NoOutcomes",
            ModelError::ZeroBudget => "ZeroBudget",
            ModelError::Arity { .. } => "ArityMismatch",
            ModelError::Dimension { .. } => "DimensionMismatch",
            ModelError::Program { source, .. } => source.name(),
            ModelError::Probability(_) => "ProbabilityError",
            ModelError::Format(_) => "FormatError",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeProgram {
    pub y: Vec<Expr>,
    pub p: Expr,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutcomeModel {
    arity: usize,
    budget: u64,
    outcomes: Vec<OutcomeProgram>,
}

#[derive(Serialize, Deserialize)]
struct RawModel {
    arity: usize,
    budget: u64,
    outcomes: Vec<RawOutcome>,
}

#[derive(Serialize, Deserialize)]
struct RawOutcome {
    y: Vec<String>,
    p: String,
}

/// A concrete result vector and its probability.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidatedOutcome {
    pub y: Vec<Rational>,
    pub p: Rational,
}

fn tagged(outcome: usize, field: impl Into<String>) -> impl FnOnce(CalcError) -> ModelError {
    let field = field.into();
    move |source| ModelError::Program {
        outcome,
        field,
        source,
    }
}

impl OutcomeModel {
    /// Checks the shape and that every program fits the budget.
    pub fn new(
        arity: usize,
        budget: u64,
        outcomes: Vec<OutcomeProgram>,
    ) -> Result<Self, ModelError> {
        if outcomes.is_empty() {
            return Err(ModelError::NoOutcomes);
        }
        if budget == 0 {
            return Err(ModelError::ZeroBudget);
        }
        let m = outcomes[0].y.len();
        for (j, o) in outcomes.iter().enumerate() {
            if o.y.len() != m {
                return Err(ModelError::Dimension {
                    outcome: j,
                    expected: m,
                    got: o.y.len(),
                });
            }
            let programs = o.y.iter().enumerate().map(|(i, e)| (format!("y[{i}]"), e));
            for (field, e) in programs.chain(std::iter::once(("p".to_string(), &o.p))) {
                let op_count = e.op_count();
                if op_count > budget {
                    return Err(tagged(j, field)(CalcError::BudgetExceeded {
                        op_count,
                        budget,
                    }));
                }
            }
        }
        Ok(OutcomeModel {
            arity,
            budget,
            outcomes,
        })
    }

    pub fn from_json(s: &str) -> Result<Self, ModelError> {
        let raw: RawModel =
            serde_json::from_str(s).map_err(|e| ModelError::Format(e.to_string()))?;
        let mut outcomes = Vec::with_capacity(raw.outcomes.len());
        for (j, o) in raw.outcomes.iter().enumerate() {
            let y =
                o.y.iter()
                    .enumerate()
                    .map(|(i, src)| parse(src).map_err(tagged(j, format!("y[{i}]"))))
                    .collect::<Result<Vec<_>, _>>()?;
            let p = parse(&o.p).map_err(tagged(j, "p"))?;
            outcomes.push(OutcomeProgram { y, p });
        }
        Self::new(raw.arity, raw.budget, outcomes)
    }

    pub fn to_json(&self) -> String {
        let raw = RawModel {
            arity: self.arity,
            budget: self.budget,
            outcomes: self
                .outcomes
                .iter()
                .map(|o| RawOutcome {
                    y: o.y.iter().map(|e| e.to_string()).collect(),
                    p: o.p.to_string(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&raw).expect("plain data serializes")
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn outcomes(&self) -> &[OutcomeProgram] {
        &self.outcomes
    }

    fn bindings(&self, x: &[Rational]) -> Bindings {
        let mut b: Bindings = x
            .iter()
            .enumerate()
            .map(|(i, v)| (format!("x{}", i + 1), v.clone()))
            .collect();
        if self.arity == 1 {
            b.insert("x".into(), x[0].clone());
        }
        b
    }

    /// Evaluates every program at `x` and checks that the probabilities are
    /// nonnegative and sum to exactly one.
    pub fn validate(&self, x: &[Rational]) -> Result<Vec<ValidatedOutcome>, ModelError> {
        if x.len() != self.arity {
            return Err(ModelError::Arity {
                expected: self.arity,
                got: x.len(),
            });
        }
        let bindings = self.bindings(x);
        let mut table = Vec::with_capacity(self.outcomes.len());
        for (j, o) in self.outcomes.iter().enumerate() {
            let y =
                o.y.iter()
                    .enumerate()
                    .map(|(i, e)| {
                        evaluate(e, &bindings, self.budget)
                            .map(|ev| ev.value)
                            .map_err(tagged(j, format!("y[{i}]")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
            let p = evaluate(&o.p, &bindings, self.budget)
                .map_err(tagged(j, "p"))?
                .value;
            if p.is_negative() {
                return Err(ProbabilityError::Negative { outcome: j, p }.into());
            }
            table.push(ValidatedOutcome { y, p });
        }
        let sum: Rational = table.iter().map(|o| &o.p).sum();
        if !sum.is_one() {
            let residual = &sum - &Rational::one();
            return Err(ProbabilityError::NotNormalized { sum, residual }.into());
        }
        Ok(table)
    }
}
