//! Recursive-descent parser.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := INTEGER | DECIMAL | IDENT | '(' expr ')' | '-' factor
//! ```
//!
//! `-x` becomes `0 - x`. Powers, function calls and named constants are
//! rejected with [`CalcError::ForbiddenConstruct`].

use crate::rational::{ElementaryOp, Rational};

use super::lexer::{tokenize, Token, TokenKind};
use super::{CalcError, Expr};

const MAX_NESTING: usize = 256;

/// Names that would denote functions or irrational constants elsewhere.
const RESERVED: &[&str] = &[
    "pi", "e", "tau", "phi", "inf", "infinity", "nan", "sqrt", "cbrt", "exp", "ln", "log", "log2",
    "log10", "sin", "cos", "tan", "abs", "pow",
];

pub fn parse(src: &str) -> Result<Expr, CalcError> {
    let tokens = tokenize(src)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        depth: 0,
    };
    let e = p.expr()?;
    match p.peek() {
        TokenKind::Eof => Ok(e),
        TokenKind::Caret => Err(p.forbidden_power()),
        _ => Err(p.unexpected(&["operator", "end of input"])),
    }
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> &TokenKind {
        &self.tokens[self.pos].kind
    }

    fn peek_at(&self, offset: usize) -> &TokenKind {
        let i = (self.pos + offset).min(self.tokens.len() - 1);
        &self.tokens[i].kind
    }

    fn position(&self) -> usize {
        self.tokens[self.pos].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&str]) -> CalcError {
        CalcError::Syntax {
            position: self.position(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.peek().describe(),
        }
    }

    fn forbidden_power(&self) -> CalcError {
        CalcError::ForbiddenConstruct {
            position: self.position(),
            construct: "power".into(),
        }
    }

    fn expr(&mut self) -> Result<Expr, CalcError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                TokenKind::Plus => ElementaryOp::Add,
                TokenKind::Minus => ElementaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::combine(op, lhs, rhs);
        }
    }

    fn term(&mut self) -> Result<Expr, CalcError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                TokenKind::Star if matches!(self.peek_at(1), TokenKind::Star) => {
                    return Err(self.forbidden_power())
                }
                TokenKind::Star => ElementaryOp::Mul,
                TokenKind::Slash => ElementaryOp::Div,
                TokenKind::Caret => return Err(self.forbidden_power()),
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.factor()?;
            lhs = Expr::combine(op, lhs, rhs);
        }
    }

    fn factor(&mut self) -> Result<Expr, CalcError> {
        self.depth += 1;
        if self.depth > MAX_NESTING {
            return Err(CalcError::Syntax {
                position: self.position(),
                expected: vec![format!("at most {MAX_NESTING} nested factors")],
                found: self.peek().describe(),
            });
        }
        let result = self.factor_inner();
        self.depth -= 1;
        result
    }

    fn factor_inner(&mut self) -> Result<Expr, CalcError> {
        let pos = self.position();
        match self.peek().clone() {
            TokenKind::Number(q) => {
                self.bump();
                Ok(Expr::Literal(q))
            }
            TokenKind::Ident(name) => {
                if matches!(self.peek_at(1), TokenKind::LParen) {
                    return Err(CalcError::ForbiddenConstruct {
                        position: pos,
                        construct: format!("function call {name}(...)"),
                    });
                }
                if RESERVED.contains(&name.to_ascii_lowercase().as_str()) {
                    return Err(CalcError::ForbiddenConstruct {
                        position: pos,
                        construct: format!("named constant {name}"),
                    });
                }
                self.bump();
                Ok(Expr::Variable(name))
            }
            TokenKind::LParen => {
                self.bump();
                let inner = self.expr()?;
                match self.peek() {
                    TokenKind::RParen => {
                        self.bump();
                        Ok(inner)
                    }
                    TokenKind::Caret => Err(self.forbidden_power()),
                    _ => Err(self.unexpected(&["operator", "')'"])),
                }
            }
            TokenKind::Minus => {
                self.bump();
                let operand = self.factor()?;
                Ok(Expr::combine(
                    ElementaryOp::Sub,
                    Expr::Literal(Rational::zero()),
                    operand,
                ))
            }
            TokenKind::Caret => Err(self.forbidden_power()),
            _ => Err(self.unexpected(&["number", "identifier", "'('", "'-'"])),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lit(s: &str) -> Expr {
        Expr::Literal(s.parse().unwrap())
    }

    #[test]
    fn simple_trees() {
        assert_eq!(
            parse("2+3").unwrap(),
            Expr::combine(ElementaryOp::Add, lit("2"), lit("3"))
        );
        let e = parse("(1/3)+(1/6)").unwrap();
        assert_eq!(
            e,
            Expr::combine(
                ElementaryOp::Add,
                Expr::combine(ElementaryOp::Div, lit("1"), lit("3")),
                Expr::combine(ElementaryOp::Div, lit("1"), lit("6")),
            )
        );
        assert_eq!(e.op_count(), 3);
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(parse("1-2-3").unwrap().to_string(), "((1 - 2) - 3)");
        assert_eq!(parse("1+2*3").unwrap().to_string(), "(1 + (2 * 3))");
        assert_eq!(parse("8/4/2").unwrap().to_string(), "((8 / 4) / 2)");
        assert_eq!(parse("-x*2").unwrap().to_string(), "((0 - x) * 2)");
        assert_eq!(parse("--1").unwrap().op_count(), 2);
    }

    #[test]
    fn forbidden_constructs() {
        for src in [
            "sqrt(2)", "2^3", "2**3", "pi", "e*2", "x+PI", "f(1)", "(1+2)^2", "log(8)",
        ] {
            assert!(
                matches!(parse(src), Err(CalcError::ForbiddenConstruct { .. })),
                "{src} should be forbidden"
            );
        }
    }

    #[test]
    fn syntax_errors() {
        assert!(matches!(
            parse(""),
            Err(CalcError::Syntax { position: 0, .. })
        ));
        assert!(matches!(
            parse("1+"),
            Err(CalcError::Syntax { position: 2, .. })
        ));
        assert!(matches!(
            parse("(1+2"),
            Err(CalcError::Syntax { position: 4, .. })
        ));
        assert!(matches!(
            parse("1 2"),
            Err(CalcError::Syntax { position: 2, .. })
        ));
        assert!(matches!(parse(")"), Err(CalcError::Syntax { .. })));
        let deep = format!("{}1{}", "(".repeat(300), ")".repeat(300));
        assert!(matches!(parse(&deep), Err(CalcError::Syntax { .. })));
    }
}
