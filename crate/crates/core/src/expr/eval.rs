use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use serde::Serialize;

use super::{BinOp, Builtin, Expr};

/// Numeric type the evaluator runs over.
///
/// The evaluator decides every branch (min/max selection, sign of `abs`)
/// from [`Scalar::value`], so any two implementations agree on the primal
/// value bit for bit.
pub trait Scalar:
    Copy
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn constant(v: f64) -> Self;
    fn value(self) -> f64;
    /// Tangent part; zero for plain reals.
    fn tangent(self) -> f64;
    fn exp(self) -> Self;
    fn ln(self) -> Self;
    fn sqrt(self) -> Self;
    fn powf(self, exponent: Self) -> Self;
    /// Piecewise-constant function: keeps `value`, tangent becomes zero.
    fn flat(value: f64) -> Self {
        Self::constant(value)
    }
}

impl Scalar for f64 {
    fn constant(v: f64) -> f64 {
        v
    }
    fn value(self) -> f64 {
        self
    }
    fn tangent(self) -> f64 {
        0.0
    }
    fn exp(self) -> f64 {
        f64::exp(self)
    }
    fn ln(self) -> f64 {
        f64::ln(self)
    }
    fn sqrt(self) -> f64 {
        f64::sqrt(self)
    }
    fn powf(self, exponent: f64) -> f64 {
        f64::powf(self, exponent)
    }
}

/// Ordered variable bindings.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct VarEnv {
    bindings: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VarEnvError {
    #[error("variable `{0}` bound twice")]
    Duplicate(String),
    #[error("variable `{0}` bound to non-finite value")]
    NonFinite(String),
}

impl VarEnv {
    pub fn new() -> VarEnv {
        VarEnv::default()
    }

    pub fn bind(mut self, name: impl Into<String>, value: f64) -> Result<VarEnv, VarEnvError> {
        let name = name.into();
        if self.bindings.iter().any(|(n, _)| *n == name) {
            return Err(VarEnvError::Duplicate(name));
        }
        if !value.is_finite() {
            return Err(VarEnvError::NonFinite(name));
        }
        self.bindings.push((name, value));
        Ok(self)
    }

    pub fn from_pairs<S: Into<String>>(
        pairs: impl IntoIterator<Item = (S, f64)>,
    ) -> Result<VarEnv, VarEnvError> {
        pairs
            .into_iter()
            .try_fold(VarEnv::new(), |env, (n, v)| env.bind(n, v))
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.bindings
            .iter()
            .find(|(n, _)| n == name)
            .map(|&(_, v)| v)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.bindings.iter().map(|(n, _)| n.as_str())
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.bindings.iter().map(|&(_, v)| v)
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvalError {
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("expected {expected} input value(s), got {found}")]
    PointArity { expected: usize, found: usize },
    #[error("domain error in `{subexpr}`: {reason} (operand {operand})")]
    Domain {
        subexpr: String,
        reason: &'static str,
        operand: f64,
    },
}

/// A builtin evaluated within the kink margin of its non-smooth locus.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Kink {
    pub builtin: &'static str,
    pub subexpr: String,
    pub arguments: Vec<f64>,
}

impl fmt::Display for Kink {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "`{}` near its non-smooth locus at {:?}",
            self.subexpr, self.arguments
        )
    }
}

struct Ctx<'a, T> {
    names: &'a [String],
    values: &'a [T],
    kink_margin: Option<f64>,
    kink: Option<Kink>,
}

pub(crate) fn evaluate_positional<T: Scalar>(
    expr: &Expr,
    names: &[String],
    values: &[T],
    kink_margin: Option<f64>,
) -> Result<(T, Option<Kink>), EvalError> {
    if names.len() != values.len() {
        return Err(EvalError::PointArity {
            expected: names.len(),
            found: values.len(),
        });
    }
    let mut ctx = Ctx {
        names,
        values,
        kink_margin,
        kink: None,
    };
    let v = ctx.eval(expr)?;
    Ok((v, ctx.kink))
}

fn domain(e: &Expr, reason: &'static str, operand: f64) -> EvalError {
    EvalError::Domain {
        subexpr: e.to_string(),
        reason,
        operand,
    }
}

fn distance_to_integer(v: f64) -> f64 {
    (v - v.round()).abs()
}

impl<T: Scalar> Ctx<'_, T> {
    fn note_kink(&mut self, e: &Expr, func: Builtin, args: &[T], near: bool) {
        if near && self.kink.is_none() {
            self.kink = Some(Kink {
                builtin: func.name(),
                subexpr: e.to_string(),
                arguments: args.iter().map(|a| a.value()).collect(),
            });
        }
    }

    fn eval(&mut self, e: &Expr) -> Result<T, EvalError> {
        let out = match e {
            Expr::Num(v) => T::constant(*v),
            Expr::Var(name) => {
                let i = self
                    .names
                    .iter()
                    .position(|n| n == name)
                    .ok_or_else(|| EvalError::Unbound(name.clone()))?;
                self.values[i]
            }
            Expr::Neg(inner) => -self.eval(inner)?,
            Expr::Binary { op, lhs, rhs } => {
                let a = self.eval(lhs)?;
                let b = self.eval(rhs)?;
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b.value() == 0.0 {
                            return Err(domain(e, "division by zero", a.value()));
                        }
                        a / b
                    }
                    BinOp::Pow => a.powf(b),
                }
            }
            Expr::Call { func, args } => {
                let vals = args
                    .iter()
                    .map(|a| self.eval(a))
                    .collect::<Result<Vec<T>, _>>()?;
                self.call(e, *func, &vals)?
            }
        };
        if !out.value().is_finite() {
            return Err(domain(e, "non-finite result", out.value()));
        }
        if !out.tangent().is_finite() {
            return Err(domain(e, "derivative undefined", out.value()));
        }
        Ok(out)
    }

    fn call(&mut self, e: &Expr, func: Builtin, a: &[T]) -> Result<T, EvalError> {
        let margin = self.kink_margin;
        let near = |d: f64| margin.is_some_and(|m| d <= m);
        let v = a[0].value();
        let out = match func {
            Builtin::Abs => {
                self.note_kink(e, func, a, near(v.abs()));
                if v < 0.0 {
                    -a[0]
                } else {
                    a[0]
                }
            }
            Builtin::Floor => {
                self.note_kink(e, func, a, near(distance_to_integer(v)));
                T::flat(v.floor())
            }
            Builtin::Ceil => {
                self.note_kink(e, func, a, near(distance_to_integer(v)));
                T::flat(v.ceil())
            }
            Builtin::Sign => {
                self.note_kink(e, func, a, near(v.abs()));
                T::flat(if v > 0.0 {
                    1.0
                } else if v < 0.0 {
                    -1.0
                } else {
                    0.0
                })
            }
            Builtin::Relu => {
                self.note_kink(e, func, a, near(v.abs()));
                if v > 0.0 {
                    a[0]
                } else {
                    T::constant(0.0)
                }
            }
            Builtin::Max => {
                self.note_kink(e, func, a, near((v - a[1].value()).abs()));
                if v >= a[1].value() {
                    a[0]
                } else {
                    a[1]
                }
            }
            Builtin::Min => {
                self.note_kink(e, func, a, near((v - a[1].value()).abs()));
                if v <= a[1].value() {
                    a[0]
                } else {
                    a[1]
                }
            }
            Builtin::Clamp => {
                let (lo, hi) = (a[1].value(), a[2].value());
                self.note_kink(e, func, a, near((v - lo).abs()) || near((v - hi).abs()));
                // min(max(v, lo), hi)
                let lower = if v >= lo { a[0] } else { a[1] };
                if lower.value() <= hi {
                    lower
                } else {
                    a[2]
                }
            }
            Builtin::Exp => a[0].exp(),
            Builtin::Ln => {
                if v <= 0.0 {
                    return Err(domain(e, "logarithm of non-positive value", v));
                }
                a[0].ln()
            }
            Builtin::Sqrt => {
                if v < 0.0 {
                    return Err(domain(e, "square root of negative value", v));
                }
                a[0].sqrt()
            }
        };
        Ok(out)
    }
}
