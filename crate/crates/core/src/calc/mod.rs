//! A calculator restricted to rational literals, variables and the four
//! elementary combinations, evaluated exactly under an operation budget.

mod lexer;
mod model;
mod parser;

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::rational::{combine, ElementaryOp, Rational, RationalError};

pub use model::{ModelError, OutcomeModel, OutcomeProgram, ProbabilityError, ValidatedOutcome};
pub use parser::parse;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CalcError {
    #[error("syntax error at {position}: expected {}, found {found}", expected.join(" or "))]
    Syntax {
        position: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("{construct} at {position} is not allowed; only +, -, * and / of rationals are")]
    ForbiddenConstruct { position: usize, construct: String },
    #[error("unbound variable {0:?}")]
    UnboundVariable(String),
    #[error("division by zero in {at}")]
    DivisionByZero { at: String },
    #[error("expression needs {op_count} operations, budget is {budget}")]
    BudgetExceeded { op_count: u64, budget: u64 },
}

impl CalcError {
    pub fn name(&self) -> &'static str {
        match self {
            CalcError::Syntax { .. } => "SyntaxError",
            CalcError::ForbiddenConstruct { .. } => "ForbiddenConstruct",
            CalcError::UnboundVariable(_) => "UnboundVariable",
            CalcError::DivisionByZero { .. } => "DivisionByZero",
            CalcError::BudgetExceeded { .. } => "BudgetExceeded",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Literal(Rational),
    Variable(String),
    Combine {
        op: ElementaryOp,
        left: Box<Expr>,
        right: Box<Expr>,
    },
}

impl Expr {
    pub fn combine(op: ElementaryOp, left: Expr, right: Expr) -> Expr {
        Expr::Combine {
            op,
            left: Box::new(left),
            right: Box::new(right),
        }
    }

    /// Number of combination nodes.
    pub fn op_count(&self) -> u64 {
        match self {
            Expr::Literal(_) | Expr::Variable(_) => 0,
            Expr::Combine { left, right, .. } => 1 + left.op_count() + right.op_count(),
        }
    }

    pub fn variables(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_variables(&mut out);
        out
    }

    fn collect_variables<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Expr::Literal(_) => {}
            Expr::Variable(name) => {
                out.insert(name);
            }
            Expr::Combine { left, right, .. } => {
                left.collect_variables(out);
                right.collect_variables(out);
            }
        }
    }
}

/// Literals print as decimals when that is exact, combinations fully
/// parenthesized, so parsing the output of a parsed expression gives the same
/// tree back.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Literal(q) => write_literal(f, q),
            Expr::Variable(name) => write!(f, "{name}"),
            Expr::Combine { op, left, right } => write!(f, "({left} {op} {right})"),
        }
    }
}

fn write_literal(f: &mut fmt::Formatter<'_>, q: &Rational) -> fmt::Result {
    if q.is_negative() {
        return write!(f, "(0 - {})", DisplayLiteral(&q.abs()));
    }
    write!(f, "{}", DisplayLiteral(q))
}

struct DisplayLiteral<'a>(&'a Rational);

impl fmt::Display for DisplayLiteral<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let q = self.0;
        if q.is_integer() {
            return write!(f, "{q}");
        }
        match terminating_digits(q) {
            Some(digits) => {
                write!(
                    f,
                    "{}",
                    q.to_decimal(digits, crate::rational::RoundMode::Floor)
                )
            }
            None => write!(f, "({} / {})", q.numer(), q.denom()),
        }
    }
}

/// Fractional digits of the exact decimal expansion, if it terminates.
fn terminating_digits(q: &Rational) -> Option<usize> {
    use num_bigint::BigInt;
    use num_integer::Integer;
    let mut d = q.denom();
    let (two, five) = (BigInt::from(2), BigInt::from(5));
    let (mut twos, mut fives) = (0usize, 0usize);
    while d.is_multiple_of(&two) {
        d /= &two;
        twos += 1;
    }
    while d.is_multiple_of(&five) {
        d /= &five;
        fives += 1;
    }
    (d == BigInt::from(1)).then_some(twos.max(fives))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evaluation {
    pub value: Rational,
    pub ops_used: u64,
}

pub type Bindings = HashMap<String, Rational>;

/// Evaluates `e` exactly. The budget and the bindings are checked before any
/// arithmetic happens.
pub fn evaluate(e: &Expr, bindings: &Bindings, budget: u64) -> Result<Evaluation, CalcError> {
    let op_count = e.op_count();
    if op_count > budget {
        return Err(CalcError::BudgetExceeded { op_count, budget });
    }
    if let Some(name) = e
        .variables()
        .into_iter()
        .find(|v| !bindings.contains_key(*v))
    {
        return Err(CalcError::UnboundVariable(name.to_string()));
    }
    let mut ops_used = 0;
    let value = eval_node(e, bindings, &mut ops_used)?;
    debug_assert_eq!(ops_used, op_count);
    Ok(Evaluation { value, ops_used })
}

fn eval_node(e: &Expr, bindings: &Bindings, ops: &mut u64) -> Result<Rational, CalcError> {
    match e {
        Expr::Literal(q) => Ok(q.clone()),
        Expr::Variable(name) => Ok(bindings[name].clone()),
        Expr::Combine { op, left, right } => {
            let a = eval_node(left, bindings, ops)?;
            let b = eval_node(right, bindings, ops)?;
            *ops += 1;
            combine(&a, &b, *op).map_err(|err| match err {
                RationalError::DivisionByZero => CalcError::DivisionByZero { at: e.to_string() },
                other => unreachable!("combine only fails on division by zero: {other}"),
            })
        }
    }
}
