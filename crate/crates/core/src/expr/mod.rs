//! Expression DSL for candidate functions.
//!
//! Expressions are real-valued functions of named variables, built from
//! decimal literals, `+ - * / ^`, unary minus and a fixed set of builtins.
//! [`parse`] and the `Display` impl are inverse to each other: formatting
//! emits the minimal parentheses needed for the parser to rebuild the same
//! tree.

mod eval;
mod lexer;
mod parser;

use std::fmt;

pub use eval::{EvalError, Kink, Scalar, VarEnv, VarEnvError};
pub use parser::{parse, ParseError};

/// Binary operators. `Pow` is right-associative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => PREC_SUM,
            BinOp::Mul | BinOp::Div => PREC_PRODUCT,
            BinOp::Pow => PREC_POWER,
        }
    }
}

/// The fixed builtin set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Builtin {
    Abs,
    Floor,
    Ceil,
    Min,
    Max,
    Exp,
    Ln,
    Sqrt,
    Sign,
    Relu,
    Clamp,
}

impl Builtin {
    pub const ALL: [Builtin; 11] = [
        Builtin::Abs,
        Builtin::Floor,
        Builtin::Ceil,
        Builtin::Min,
        Builtin::Max,
        Builtin::Exp,
        Builtin::Ln,
        Builtin::Sqrt,
        Builtin::Sign,
        Builtin::Relu,
        Builtin::Clamp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Builtin::Abs => "abs",
            Builtin::Floor => "floor",
            Builtin::Ceil => "ceil",
            Builtin::Min => "min",
            Builtin::Max => "max",
            Builtin::Exp => "exp",
            Builtin::Ln => "ln",
            Builtin::Sqrt => "sqrt",
            Builtin::Sign => "sign",
            Builtin::Relu => "relu",
            Builtin::Clamp => "clamp",
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Builtin::Min | Builtin::Max => 2,
            Builtin::Clamp => 3,
            _ => 1,
        }
    }

    pub fn from_name(name: &str) -> Option<Builtin> {
        Builtin::ALL.iter().copied().find(|b| b.name() == name)
    }

    /// True for builtins that are not differentiable everywhere.
    pub fn has_kinks(self) -> bool {
        !matches!(self, Builtin::Exp | Builtin::Ln | Builtin::Sqrt)
    }
}

/// Abstract syntax tree of a real-valued function.
///
/// `Num` holds a finite, non-negative literal; negative constants are
/// represented as `Neg(Num(..))`, which is what the parser produces for
/// `-2`. Use [`Expr::num`] to build constants from arbitrary values.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(String),
    Neg(Box<Expr>),
    Binary {
        op: BinOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
    Call {
        func: Builtin,
        args: Vec<Expr>,
    },
}

const PREC_SUM: u8 = 1;
const PREC_PRODUCT: u8 = 2;
const PREC_UNARY: u8 = 3;
const PREC_POWER: u8 = 4;
const PREC_ATOM: u8 = 5;

impl Expr {
    /// Constant node; negative values become `Neg(Num(|v|))`.
    ///
    /// Panics on non-finite input.
    pub fn num(value: f64) -> Expr {
        assert!(value.is_finite(), "expression constants must be finite");
        if value.is_sign_negative() {
            Expr::Neg(Box::new(Expr::Num(-value)))
        } else {
            Expr::Num(value)
        }
    }

    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        Expr::Binary {
            op,
            lhs: Box::new(lhs),
            rhs: Box::new(rhs),
        }
    }

    pub fn call(func: Builtin, args: Vec<Expr>) -> Expr {
        debug_assert_eq!(func.arity(), args.len());
        Expr::Call { func, args }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(inner: Expr) -> Expr {
        Expr::Neg(Box::new(inner))
    }

    /// Left fold of `op` over `items`; `None` for an empty iterator.
    pub fn fold(op: BinOp, items: impl IntoIterator<Item = Expr>) -> Option<Expr> {
        items.into_iter().reduce(|acc, e| Expr::binary(op, acc, e))
    }

    /// Variable names in first-appearance order, deduplicated.
    pub fn free_variables(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        self.visit(&mut |e| {
            if let Expr::Var(name) = e {
                if !out.iter().any(|n| n == name) {
                    out.push(name.clone());
                }
            }
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        match self {
            Expr::Num(_) | Expr::Var(_) => {}
            Expr::Neg(inner) => inner.visit(f),
            Expr::Binary { lhs, rhs, .. } => {
                lhs.visit(f);
                rhs.visit(f);
            }
            Expr::Call { args, .. } => args.iter().for_each(|a| a.visit(f)),
        }
    }

    /// Number of nodes.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    /// True if any builtin with a non-smooth locus appears.
    pub fn has_kinks(&self) -> bool {
        let mut found = false;
        self.visit(&mut |e| {
            if let Expr::Call { func, .. } = e {
                found |= func.has_kinks();
            }
        });
        found
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Num(v) if v.is_sign_negative() => PREC_UNARY,
            Expr::Num(_) | Expr::Var(_) | Expr::Call { .. } => PREC_ATOM,
            Expr::Neg(_) => PREC_UNARY,
            Expr::Binary { op, .. } => op.precedence(),
        }
    }

    fn fmt_child(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        if self.precedence() < min_prec {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

/// Canonical text for a literal. Display is used in the plain range and
/// exponent notation outside it; both re-parse to the identical double.
fn format_number(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => f.write_str(&format_number(*v)),
            Expr::Var(name) => f.write_str(name),
            Expr::Neg(inner) => {
                f.write_str("-")?;
                inner.fmt_child(f, PREC_UNARY)
            }
            Expr::Binary { op, lhs, rhs } => match op {
                BinOp::Pow => {
                    lhs.fmt_child(f, PREC_ATOM)?;
                    f.write_str("^")?;
                    rhs.fmt_child(f, PREC_UNARY)
                }
                _ => {
                    let prec = op.precedence();
                    lhs.fmt_child(f, prec)?;
                    write!(f, " {} ", op.symbol())?;
                    // Left-associative: a right operand at the same level
                    // needs parentheses.
                    let rhs_min = if prec == PREC_SUM {
                        PREC_PRODUCT
                    } else {
                        PREC_UNARY
                    };
                    rhs.fmt_child(f, rhs_min)
                }
            },
            Expr::Call { func, args } => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Canonical pretty-printing.
pub fn format(e: &Expr) -> String {
    e.to_string()
}

/// An expression together with the ordered variable list that maps its
/// inputs to positions `x₁..xₙ`.
///
/// The variable list may be longer than the expression's free variables
/// (a constant is still a function of one variable).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarFunction {
    expr: Expr,
    vars: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FunctionError {
    #[error("variable `{0}` is used but not declared")]
    Undeclared(String),
    #[error("variable `{0}` is declared twice")]
    Duplicate(String),
    #[error("a function needs at least one variable")]
    NoVariables,
}

impl ScalarFunction {
    /// Variables by first appearance; a closed expression gets the single
    /// variable `x`.
    pub fn new(expr: Expr) -> ScalarFunction {
        let mut vars = expr.free_variables();
        if vars.is_empty() {
            vars.push("x".to_string());
        }
        ScalarFunction { expr, vars }
    }

    pub fn with_vars(expr: Expr, vars: Vec<String>) -> Result<ScalarFunction, FunctionError> {
        if vars.is_empty() {
            return Err(FunctionError::NoVariables);
        }
        for (i, v) in vars.iter().enumerate() {
            if vars[..i].contains(v) {
                return Err(FunctionError::Duplicate(v.clone()));
            }
        }
        if let Some(missing) = expr
            .free_variables()
            .into_iter()
            .find(|v| !vars.contains(v))
        {
            return Err(FunctionError::Undeclared(missing));
        }
        Ok(ScalarFunction { expr, vars })
    }

    pub fn parse(source: &str) -> Result<ScalarFunction, ParseError> {
        parse(source).map(ScalarFunction::new)
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn arity(&self) -> usize {
        self.vars.len()
    }

    /// Evaluates at a positional point (`point[i]` binds `vars[i]`).
    pub fn eval(&self, point: &[f64]) -> Result<f64, EvalError> {
        eval::evaluate_positional(&self.expr, &self.vars, point, None).map(|(v, _)| v)
    }

    /// Evaluates and also reports the first builtin found within `margin`
    /// of its non-smooth locus.
    pub fn eval_tracking_kinks(
        &self,
        point: &[f64],
        margin: f64,
    ) -> Result<(f64, Option<Kink>), EvalError> {
        eval::evaluate_positional(&self.expr, &self.vars, point, Some(margin))
    }

    /// Generic evaluation over any [`Scalar`] (e.g. dual numbers).
    pub fn eval_scalar<T: Scalar>(
        &self,
        point: &[T],
        kink_margin: Option<f64>,
    ) -> Result<(T, Option<Kink>), EvalError> {
        eval::evaluate_positional(&self.expr, &self.vars, point, kink_margin)
    }

    /// Evaluates at the diagonal point `(t, ..., t)`.
    pub fn eval_diagonal(&self, t: f64) -> Result<f64, EvalError> {
        self.eval(&vec![t; self.arity()])
    }
}

impl fmt::Display for ScalarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.expr)
    }
}

impl Expr {
    /// Evaluates with variables bound by name.
    pub fn evaluate(&self, env: &VarEnv) -> Result<f64, EvalError> {
        let names: Vec<String> = env.names().map(str::to_string).collect();
        let values: Vec<f64> = env.values().collect();
        eval::evaluate_positional(self, &names, &values, None).map(|(v, _)| v)
    }
}
