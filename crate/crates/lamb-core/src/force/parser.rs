//! Recursive-descent parser for force expressions.
//!
//! Grammar (whitespace is insignificant):
//!
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := unary (("*" | "/") unary)*
//! unary  := "-" unary | power
//! power  := atom ("^" integer)?
//! atom   := number | "y" | name "(" expr ")" | "(" expr ")"
//! name   := "sin" | "cos" | "exp" | "tanh" | "atan"
//! ```
//!
//! Precedence from tightest to loosest: `^`, unary `-`, `* /`, `+ -`;
//! the binary operators associate to the left. Exponents are (optionally
//! signed) integer literals. Syntax errors carry the byte offset of the
//! offending character in the source string.

use crate::error::{Error, Result};
use crate::force::expr::{Expr, Func};

pub fn parse(src: &str) -> Result<Expr> {
    let mut p = Parser { src, pos: 0 };
    let expr = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(expr)
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, message: impl Into<String>) -> Error {
        Error::Syntax { offset: self.pos, message: message.into() }
    }

    fn rest(&self) -> &'a str {
        &self.src[self.pos..]
    }

    fn peek(&self) -> Option<char> {
        self.rest().chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(format!("expected '{c}'")))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            if self.eat('+') {
                acc = Expr::add(acc, self.term()?);
            } else if self.eat('-') {
                acc = Expr::sub(acc, self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = Expr::mul(acc, self.unary()?);
            } else if self.eat('/') {
                acc = Expr::div(acc, self.unary()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat('-') {
            Ok(Expr::neg(self.unary()?))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat('^') {
            let n = self.integer()?;
            Ok(Expr::pow(base, n))
        } else {
            Ok(base)
        }
    }

    fn integer(&mut self) -> Result<i32> {
        self.skip_ws();
        let start = self.pos;
        if self.peek() == Some('-') {
            self.pos += 1;
        }
        let digits_start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == digits_start {
            self.pos = start;
            return Err(self.error("expected an integer exponent"));
        }
        self.src[start..self.pos]
            .parse::<i32>()
            .map_err(|_| Error::Syntax { offset: start, message: "exponent out of range".into() })
    }

    fn atom(&mut self) -> Result<Expr> {
        self.skip_ws();
        match self.peek() {
            Some('(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(')')?;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == '.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.peek().is_some_and(|c| c.is_ascii_alphanumeric() || c == '_') {
                    self.pos += c.len_utf8();
                }
                let name = &self.src[start..self.pos];
                if name == "y" {
                    return Ok(Expr::var());
                }
                if let Some(func) = Func::from_name(name) {
                    self.expect('(')?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(Expr::call(func, arg));
                }
                self.pos = start;
                Err(self.error(format!("unknown identifier '{name}'")))
            }
            Some(_) => Err(self.error("expected a number, 'y', a function call, or '('")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.peek() == Some('.') {
            self.pos += 1;
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        if matches!(self.peek(), Some('e') | Some('E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some('+') | Some('-')) {
                self.pos += 1;
            }
            let digits_start = self.pos;
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
            }
            if self.pos == digits_start {
                // not an exponent after all (e.g. the 'e' of a following name)
                self.pos = mark;
            }
        }
        let text = &self.src[start..self.pos];
        text.parse::<f64>().map(Expr::num).map_err(|_| Error::Syntax {
            offset: start,
            message: format!("invalid number literal '{text}'"),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(src: &str, y: f64) -> f64 {
        parse(src).unwrap().eval(y).unwrap()
    }

    #[test]
    fn parses_cubic_spring() {
        // -y^3 - y at y = 2: -8 - 2 = -10
        assert!((eval("-y^3 - y", 2.0) + 10.0).abs() < 1e-15);
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        // -y^2 must read as -(y^2)
        assert!((eval("-y^2", 3.0) + 9.0).abs() < 1e-15);
    }

    #[test]
    fn power_binds_tighter_than_product() {
        assert!((eval("2*y^3", 2.0) - 16.0).abs() < 1e-15);
    }

    #[test]
    fn left_associativity_of_subtraction_and_division() {
        assert!((eval("1 - 2 - 3", 0.0) + 4.0).abs() < 1e-15);
        assert!((eval("8/4/2", 0.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn parenthesised_base_and_scientific_literals() {
        assert!((eval("(y + 1)^2", 2.0) - 9.0).abs() < 1e-15);
        assert!((eval("1e-2*y", 3.0) - 0.03).abs() < 1e-15);
        assert!((eval("2.5E3", 0.0) - 2500.0).abs() < 1e-12);
    }

    #[test]
    fn functions_and_nesting() {
        let y = 0.7;
        assert!((eval("sin(cos(y))", y) - y.cos().sin()).abs() < 1e-15);
        assert!((eval("-2*atan(y)", y) + 2.0 * y.atan()).abs() < 1e-15);
        assert!((eval("tanh(y) - exp(-y)", y) - (y.tanh() - (-y).exp())).abs() < 1e-15);
    }

    #[test]
    fn negative_exponent() {
        assert!((eval("y^-2", 4.0) - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn unknown_identifier_reports_byte_offset() {
        let err = parse("-y^3 - sinh(y)").unwrap_err();
        match err {
            Error::Syntax { offset, message } => {
                assert_eq!(offset, 7, "offset should point at 'sinh'");
                assert!(message.contains("sinh"));
            }
            other => panic!("expected a syntax error, got {other:?}"),
        }
    }

    #[test]
    fn trailing_garbage_rejected() {
        let err = parse("y + 1)").unwrap_err();
        assert!(matches!(err, Error::Syntax { offset: 5, .. }));
    }

    #[test]
    fn missing_operand_rejected() {
        assert!(parse("y +").is_err());
        assert!(parse("* y").is_err());
        assert!(parse("sin()").is_err());
        assert!(parse("").is_err());
    }

    #[test]
    fn fractional_exponent_rejected() {
        let err = parse("y^1.5").unwrap_err();
        // the integer parses, then ".5" is trailing garbage
        assert!(matches!(err, Error::Syntax { .. }));
    }

    #[test]
    fn double_negation_parses() {
        assert!((eval("--y", 3.0) - 3.0).abs() < 1e-15);
    }

    #[test]
    fn roundtrip_examples() {
        for src in [
            "-y",
            "-y^3 - y",
            "y - y^3",
            "sin(y)*cos(y)",
            "y/(1 + y^2)",
            "-2*atan(y)",
            "exp(-y^2) - tanh(3*y)",
            "(y + 1)*(y - 1)",
        ] {
            let ast = parse(src).unwrap();
            let printed = ast.to_string();
            let reparsed = parse(&printed).unwrap();
            assert_eq!(ast, reparsed, "source '{src}' printed as '{printed}'");
        }
    }
}
