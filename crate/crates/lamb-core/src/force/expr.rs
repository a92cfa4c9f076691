//! Expression tree for restoring-force laws in the single variable `y`.
//!
//! Supported operations: `+ - * /`, integer powers `^`, unary minus, and
//! the functions `sin cos exp tanh atan`. Trees are built through the smart
//! constructors below, which fold constants and strip identity operations;
//! both the parser and symbolic differentiation go through them, so
//! pretty-printing followed by re-parsing reproduces the tree exactly.

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Tanh,
    Atan,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Tanh => "tanh",
            Func::Atan => "atan",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "tanh" => Some(Func::Tanh),
            "atan" => Some(Func::Atan),
            _ => None,
        }
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Exp => x.exp(),
            Func::Tanh => x.tanh(),
            Func::Atan => x.atan(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// The variable `y`.
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    /// Integer power of a subexpression.
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

// The constructor names mirror the grammar productions rather than the
// `std::ops` traits (they fold constants and can change variants), and the
// `z == 0.0` guards are explicit float comparisons, not redundant patterns.
#[allow(clippy::should_implement_trait, clippy::redundant_guards)]
impl Expr {
    pub fn num(v: f64) -> Expr {
        Expr::Num(v)
    }

    pub fn var() -> Expr {
        Expr::Var
    }

    /// Negation, folding `−c` into the literal and collapsing double
    /// negation. A leading numeric factor absorbs the sign so that the
    /// printed form (`-3*y^2`) re-parses to the identical tree.
    pub fn neg(e: Expr) -> Expr {
        match e {
            Expr::Num(v) => Expr::Num(-v),
            Expr::Neg(inner) => *inner,
            Expr::Mul(l, r) => match *l {
                Expr::Num(v) => Expr::mul(Expr::Num(-v), *r),
                other => Expr::Neg(Box::new(Expr::Mul(Box::new(other), r))),
            },
            other => Expr::Neg(Box::new(other)),
        }
    }

    pub fn add(l: Expr, r: Expr) -> Expr {
        match (l, r) {
            (Expr::Num(a), Expr::Num(b)) if (a + b).is_finite() => Expr::Num(a + b),
            (Expr::Num(z), r) if z == 0.0 => r,
            (l, Expr::Num(z)) if z == 0.0 => l,
            (l, r) => Expr::Add(Box::new(l), Box::new(r)),
        }
    }

    pub fn sub(l: Expr, r: Expr) -> Expr {
        match (l, r) {
            (Expr::Num(a), Expr::Num(b)) if (a - b).is_finite() => Expr::Num(a - b),
            (l, Expr::Num(z)) if z == 0.0 => l,
            (Expr::Num(z), r) if z == 0.0 => Expr::neg(r),
            (l, r) => Expr::Sub(Box::new(l), Box::new(r)),
        }
    }

    pub fn mul(l: Expr, r: Expr) -> Expr {
        match (l, r) {
            (Expr::Num(a), Expr::Num(b)) if (a * b).is_finite() => Expr::Num(a * b),
            (Expr::Num(z), _) | (_, Expr::Num(z)) if z == 0.0 => Expr::Num(0.0),
            (Expr::Num(o), r) if o == 1.0 => r,
            (l, Expr::Num(o)) if o == 1.0 => l,
            (Expr::Num(m), r) if m == -1.0 => Expr::neg(r),
            (l, Expr::Num(m)) if m == -1.0 => Expr::neg(l),
            (l, r) => Expr::Mul(Box::new(l), Box::new(r)),
        }
    }

    pub fn div(l: Expr, r: Expr) -> Expr {
        match (l, r) {
            (Expr::Num(a), Expr::Num(b)) if b != 0.0 && (a / b).is_finite() => Expr::Num(a / b),
            (l, Expr::Num(o)) if o == 1.0 => l,
            (l, r) => Expr::Div(Box::new(l), Box::new(r)),
        }
    }

    pub fn pow(base: Expr, n: i32) -> Expr {
        match (base, n) {
            (_, 0) => Expr::Num(1.0),
            (b, 1) => b,
            (Expr::Num(v), n) if v.powi(n).is_finite() && !(v == 0.0 && n < 0) => {
                Expr::Num(v.powi(n))
            }
            (b, n) => Expr::Pow(Box::new(b), n),
        }
    }

    pub fn call(f: Func, arg: Expr) -> Expr {
        match arg {
            Expr::Num(v) if f.apply(v).is_finite() => Expr::Num(f.apply(v)),
            arg => Expr::Call(f, Box::new(arg)),
        }
    }

    /// Evaluate at `y`. Total on finite inputs except for division by zero
    /// and `0` raised to a negative power, which are reported as errors.
    pub fn eval(&self, y: f64) -> Result<f64> {
        match self {
            Expr::Num(v) => Ok(*v),
            Expr::Var => Ok(y),
            Expr::Neg(e) => Ok(-e.eval(y)?),
            Expr::Add(l, r) => Ok(l.eval(y)? + r.eval(y)?),
            Expr::Sub(l, r) => Ok(l.eval(y)? - r.eval(y)?),
            Expr::Mul(l, r) => Ok(l.eval(y)? * r.eval(y)?),
            Expr::Div(l, r) => {
                let denom = r.eval(y)?;
                if denom == 0.0 {
                    return Err(Error::Eval { y, message: "division by zero".into() });
                }
                Ok(l.eval(y)? / denom)
            }
            Expr::Pow(b, n) => {
                let base = b.eval(y)?;
                if base == 0.0 && *n < 0 {
                    return Err(Error::Eval {
                        y,
                        message: format!("zero raised to negative power {n}"),
                    });
                }
                Ok(base.powi(*n))
            }
            Expr::Call(f, arg) => Ok(f.apply(arg.eval(y)?)),
        }
    }

    /// Exact symbolic derivative with respect to `y`.
    pub fn differentiate(&self) -> Expr {
        match self {
            Expr::Num(_) => Expr::Num(0.0),
            Expr::Var => Expr::Num(1.0),
            Expr::Neg(e) => Expr::neg(e.differentiate()),
            Expr::Add(l, r) => Expr::add(l.differentiate(), r.differentiate()),
            Expr::Sub(l, r) => Expr::sub(l.differentiate(), r.differentiate()),
            Expr::Mul(l, r) => Expr::add(
                Expr::mul(l.differentiate(), (**r).clone()),
                Expr::mul((**l).clone(), r.differentiate()),
            ),
            Expr::Div(l, r) => {
                // (l/r)' = (l'·r − l·r') / r²
                let num = Expr::sub(
                    Expr::mul(l.differentiate(), (**r).clone()),
                    Expr::mul((**l).clone(), r.differentiate()),
                );
                Expr::div(num, Expr::pow((**r).clone(), 2))
            }
            Expr::Pow(b, n) => {
                // (b^n)' = n·b^(n−1)·b'
                let scaled = Expr::mul(Expr::Num(f64::from(*n)), Expr::pow((**b).clone(), n - 1));
                Expr::mul(scaled, b.differentiate())
            }
            Expr::Call(f, arg) => {
                let outer = match f {
                    Func::Sin => Expr::call(Func::Cos, (**arg).clone()),
                    Func::Cos => Expr::neg(Expr::call(Func::Sin, (**arg).clone())),
                    Func::Exp => Expr::call(Func::Exp, (**arg).clone()),
                    Func::Tanh => Expr::sub(
                        Expr::Num(1.0),
                        Expr::pow(Expr::call(Func::Tanh, (**arg).clone()), 2),
                    ),
                    Func::Atan => {
                        return Expr::div(
                            arg.differentiate(),
                            Expr::add(Expr::Num(1.0), Expr::pow((**arg).clone(), 2)),
                        )
                    }
                };
                Expr::mul(outer, arg.differentiate())
            }
        }
    }
}

/// Binding strength used by the printer; higher binds tighter.
fn precedence(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Neg(_) => 3,
        Expr::Num(v) if *v < 0.0 => 3, // prints with a leading minus
        Expr::Pow(..) => 4,
        Expr::Num(_) | Expr::Var | Expr::Call(..) => 5,
    }
}

fn write_prec(e: &Expr, min: u8, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    let prec = precedence(e);
    if prec < min {
        write!(f, "(")?;
        write_prec(e, 0, f)?;
        return write!(f, ")");
    }
    match e {
        Expr::Num(v) => write!(f, "{v}"),
        Expr::Var => write!(f, "y"),
        Expr::Neg(inner) => {
            write!(f, "-")?;
            write_prec(inner, 3, f)
        }
        Expr::Add(l, r) => {
            write_prec(l, 1, f)?;
            write!(f, " + ")?;
            // right operand needs to bind tighter so left associativity
            // survives the round trip
            write_prec(r, 2, f)
        }
        Expr::Sub(l, r) => {
            write_prec(l, 1, f)?;
            write!(f, " - ")?;
            write_prec(r, 2, f)
        }
        Expr::Mul(l, r) => {
            write_prec(l, 2, f)?;
            write!(f, "*")?;
            write_prec(r, 3, f)
        }
        Expr::Div(l, r) => {
            write_prec(l, 2, f)?;
            write!(f, "/")?;
            write_prec(r, 3, f)
        }
        Expr::Pow(b, n) => {
            write_prec(b, 5, f)?;
            write!(f, "^{n}")
        }
        Expr::Call(func, arg) => {
            write!(f, "{}(", func.name())?;
            write_prec(arg, 0, f)?;
            write!(f, ")")
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_prec(self, 0, f)
    }
}
