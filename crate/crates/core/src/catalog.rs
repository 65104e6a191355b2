//! Parameterized families of known Ouroboros functions.
//!
//! Scalar entries are built as DSL expressions so that every engine
//! (verifier, derivative engine, CLI) handles them exactly like user input.
//! Vector entries are convex projections.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::expr::{BinOp, Builtin, Expr, ScalarFunction};
use crate::projection::{OperatorError, VectorOperator};
use crate::verifier::DomainBox;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    ScalarUnivariate,
    ScalarMultivariate,
    VectorOperator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Flags {
    /// C¹ on the interior of the natural box.
    pub smooth: bool,
    /// Invariant under permutation of the arguments.
    pub symmetric: bool,
    /// Self-application reproduces `f(x)` bit for bit, so iteration drift
    /// is exactly zero.
    pub exact_fixed_points: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ParamInfo {
    pub name: &'static str,
    pub description: &'static str,
    pub default: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub kind: Kind,
    pub arity: &'static str,
    pub params: &'static [ParamInfo],
    pub natural_box: &'static str,
    pub flags: Flags,
    pub summary: &'static str,
}

const fn flags(smooth: bool, symmetric: bool, exact_fixed_points: bool) -> Flags {
    Flags {
        smooth,
        symmetric,
        exact_fixed_points,
    }
}

const N: ParamInfo = ParamInfo {
    name: "n",
    description: "number of arguments",
    default: "2",
};
const D: ParamInfo = ParamInfo {
    name: "n",
    description: "dimension d",
    default: "2",
};

const UNIT_BOX: &str = "[-10, 10] (widened to contain parameters)";
const CUBE: &str = "[-10, 10]^n";
const POSITIVE_CUBE: &str = "[0.1, 10]^n";

static ENTRIES: [CatalogEntry; 21] = [
    CatalogEntry {
        name: "identity",
        kind: Kind::ScalarUnivariate,
        arity: "1",
        params: &[],
        natural_box: UNIT_BOX,
        flags: flags(true, true, true),
        summary: "x",
    },
    CatalogEntry {
        name: "constant",
        kind: Kind::ScalarUnivariate,
        arity: "1",
        params: &[ParamInfo {
            name: "c",
            description: "output value",
            default: "5",
        }],
        natural_box: UNIT_BOX,
        flags: flags(true, true, true),
        summary: "c",
    },
    CatalogEntry {
        name: "abs",
        kind: Kind::ScalarUnivariate,
        arity: "1",
        params: &[],
        natural_box: UNIT_BOX,
        flags: flags(false, true, true),
        summary: "abs(x)",
    },
    CatalogEntry {
        name: "floor",
        kind: Kind::ScalarUnivariate,
        arity: "1",
        params: &[],
        natural_box: UNIT_BOX,
        flags: flags(false, true, true),
        summary: "floor(x)",
    },
    CatalogEntry {
        name: "ceil",
        kind: Kind::ScalarUnivariate,
        arity: "1",
        params: &[],
        natural_box: UNIT_BOX,
        flags: flags(false, true, true),
        summary: "ceil(x)",
    },
    CatalogEntry {
        name: "relu",
        kind: Kind::ScalarUnivariate,
        arity: "1",
        params: &[],
        natural_box: UNIT_BOX,
        flags: flags(false, true, true),
        summary: "relu(x) = max(x, 0)",
    },
    CatalogEntry {
        name: "clamp",
        kind: Kind::ScalarUnivariate,
        arity: "1",
        params: &[
            ParamInfo {
                name: "lo",
                description: "lower bound",
                default: "0",
            },
            ParamInfo {
                name: "hi",
                description: "upper bound (> lo)",
                default: "1",
            },
        ],
        natural_box: UNIT_BOX,
        flags: flags(false, true, true),
        summary: "clamp(x, lo, hi)",
    },
    CatalogEntry {
        name: "max_const",
        kind: Kind::ScalarUnivariate,
        arity: "1",
        params: &[ParamInfo {
            name: "c",
            description: "floor value",
            default: "0",
        }],
        natural_box: UNIT_BOX,
        flags: flags(false, true, true),
        summary: "max(x, c)",
    },
    CatalogEntry {
        name: "min_const",
        kind: Kind::ScalarUnivariate,
        arity: "1",
        params: &[ParamInfo {
            name: "c",
            description: "ceiling value",
            default: "0",
        }],
        natural_box: UNIT_BOX,
        flags: flags(false, true, true),
        summary: "min(x, c)",
    },
    CatalogEntry {
        name: "arith_mean",
        kind: Kind::ScalarMultivariate,
        arity: "n >= 2",
        params: &[N],
        natural_box: CUBE,
        flags: flags(true, true, false),
        summary: "(x1 + ... + xn) / n",
    },
    CatalogEntry {
        name: "geo_mean",
        kind: Kind::ScalarMultivariate,
        arity: "n >= 2",
        params: &[N],
        natural_box: POSITIVE_CUBE,
        flags: flags(true, true, false),
        summary: "(x1 * ... * xn)^(1/n)",
    },
    CatalogEntry {
        name: "harmonic_mean",
        kind: Kind::ScalarMultivariate,
        arity: "n >= 2",
        params: &[N],
        natural_box: POSITIVE_CUBE,
        flags: flags(true, true, false),
        summary: "n / (1/x1 + ... + 1/xn)",
    },
    CatalogEntry {
        name: "power_mean",
        kind: Kind::ScalarMultivariate,
        arity: "n >= 2",
        params: &[
            N,
            ParamInfo {
                name: "p",
                description: "exponent (non-zero)",
                default: "2",
            },
        ],
        natural_box: POSITIVE_CUBE,
        flags: flags(true, true, false),
        summary: "((x1^p + ... + xn^p) / n)^(1/p)",
    },
    CatalogEntry {
        name: "median",
        kind: Kind::ScalarMultivariate,
        arity: "n >= 2",
        params: &[N],
        natural_box: CUBE,
        flags: flags(false, true, true),
        summary: "middle order statistic (mean of the two middle ones for even n)",
    },
    CatalogEntry {
        name: "min_all",
        kind: Kind::ScalarMultivariate,
        arity: "n >= 2",
        params: &[N],
        natural_box: CUBE,
        flags: flags(false, true, true),
        summary: "min(x1, ..., xn)",
    },
    CatalogEntry {
        name: "max_all",
        kind: Kind::ScalarMultivariate,
        arity: "n >= 2",
        params: &[N],
        natural_box: CUBE,
        flags: flags(false, true, true),
        summary: "max(x1, ..., xn)",
    },
    CatalogEntry {
        name: "weighted_mean",
        kind: Kind::ScalarMultivariate,
        arity: "len(w) >= 2",
        params: &[ParamInfo {
            name: "w",
            description: "weights summing to 1",
            default: "0.3,0.7",
        }],
        natural_box: CUBE,
        flags: flags(true, false, false),
        summary: "w1*x1 + ... + wn*xn",
    },
    CatalogEntry {
        name: "box_clamp",
        kind: Kind::VectorOperator,
        arity: "d >= 1",
        params: &[
            D,
            ParamInfo {
                name: "lo",
                description: "lower bound per coordinate",
                default: "0",
            },
            ParamInfo {
                name: "hi",
                description: "upper bound per coordinate",
                default: "1",
            },
        ],
        natural_box: "[-10, 10]^d (widened to contain [lo, hi])",
        flags: flags(false, false, true),
        summary: "coordinate-wise clamp onto [lo, hi]^d",
    },
    CatalogEntry {
        name: "l2_ball_projection",
        kind: Kind::VectorOperator,
        arity: "d >= 1",
        params: &[
            D,
            ParamInfo {
                name: "r",
                description: "radius (> 0)",
                default: "1",
            },
        ],
        natural_box: "[-10, 10]^d",
        flags: flags(false, false, false),
        summary: "nearest point of the ball ||x||_2 <= r",
    },
    CatalogEntry {
        name: "hyperplane_projection",
        kind: Kind::VectorOperator,
        arity: "len(a) >= 1",
        params: &[
            D,
            ParamInfo {
                name: "a",
                description: "normal vector (non-zero)",
                default: "1,...,1",
            },
            ParamInfo {
                name: "b",
                description: "offset",
                default: "1",
            },
        ],
        natural_box: "[-10, 10]^d",
        flags: flags(false, false, false),
        summary: "nearest point of {x : a.x = b}",
    },
    CatalogEntry {
        name: "simplex_projection",
        kind: Kind::VectorOperator,
        arity: "d >= 1",
        params: &[D],
        natural_box: "[-10, 10]^d",
        flags: flags(false, false, false),
        summary: "nearest point of the standard simplex",
    },
];

/// Every catalog entry, in a fixed order.
pub fn list_entries() -> &'static [CatalogEntry] {
    &ENTRIES
}

pub fn entry(name: &str) -> Option<&'static CatalogEntry> {
    ENTRIES.iter().find(|e| e.name == name)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CatalogError {
    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),
    #[error("entry `{entry}` has no parameter `{param}`")]
    UnknownParam { entry: &'static str, param: String },
    #[error("invalid parameter `{param}`: {reason}")]
    InvalidParam { param: &'static str, reason: String },
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

fn invalid(param: &'static str, reason: impl Into<String>) -> CatalogError {
    CatalogError::InvalidParam {
        param,
        reason: reason.into(),
    }
}

/// Named parameter values; every value is a list of reals (scalars are
/// one-element lists).
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Params {
    values: BTreeMap<String, Vec<f64>>,
}

impl Params {
    pub fn new() -> Params {
        Params::default()
    }

    pub fn with(mut self, name: &str, values: impl Into<Vec<f64>>) -> Params {
        self.set(name, values);
        self
    }

    pub fn set(&mut self, name: &str, values: impl Into<Vec<f64>>) {
        self.values.insert(name.to_string(), values.into());
    }

    /// Parses `name=v1,v2,...`.
    pub fn parse_assignment(&mut self, text: &str) -> Result<(), String> {
        let (name, rhs) = text
            .split_once('=')
            .ok_or_else(|| format!("expected name=value, got `{text}`"))?;
        let values = rhs
            .split(',')
            .map(|v| {
                v.trim()
                    .parse::<f64>()
                    .map_err(|_| format!("bad number `{v}` in `{text}`"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.set(name.trim(), values);
        Ok(())
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.values.keys().map(String::as_str)
    }

    fn scalar(&self, name: &'static str, default: f64) -> Result<f64, CatalogError> {
        match self.values.get(name) {
            None => Ok(default),
            Some(v) if v.len() == 1 && v[0].is_finite() => Ok(v[0]),
            Some(_) => Err(invalid(name, "expected one finite number")),
        }
    }

    fn vector(&self, name: &'static str) -> Result<Option<Vec<f64>>, CatalogError> {
        match self.values.get(name) {
            None => Ok(None),
            Some(v) if v.iter().all(|x| x.is_finite()) => Ok(Some(v.clone())),
            Some(_) => Err(invalid(name, "values must be finite")),
        }
    }

    fn count(&self, name: &'static str, default: usize, min: usize) -> Result<usize, CatalogError> {
        let v = self.scalar(name, default as f64)?;
        if v.fract() != 0.0 || v < min as f64 || v > 64.0 {
            return Err(invalid(
                name,
                format!("expected an integer in {min}..=64, got {v}"),
            ));
        }
        Ok(v as usize)
    }
}

/// Executable function produced by [`instantiate`].
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Scalar(ScalarFunction),
    Operator(VectorOperator),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub entry: &'static CatalogEntry,
    pub target: Target,
    /// The entry's natural domain box.
    pub domain: DomainBox,
}

impl Instance {
    pub fn scalar(&self) -> Option<&ScalarFunction> {
        match &self.target {
            Target::Scalar(f) => Some(f),
            Target::Operator(_) => None,
        }
    }

    pub fn operator(&self) -> Option<&VectorOperator> {
        match &self.target {
            Target::Operator(op) => Some(op),
            Target::Scalar(_) => None,
        }
    }

    pub fn flags(&self) -> Flags {
        self.entry.flags
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }
}

fn vars(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("x{i}")).collect()
}

fn var_exprs(n: usize) -> Vec<Expr> {
    vars(n).into_iter().map(Expr::Var).collect()
}

fn call(func: Builtin, args: Vec<Expr>) -> Expr {
    Expr::call(func, args)
}

fn fold_call(func: Builtin, items: Vec<Expr>) -> Expr {
    items
        .into_iter()
        .reduce(|acc, e| call(func, vec![acc, e]))
        .expect("non-empty")
}

fn sum(items: Vec<Expr>) -> Expr {
    Expr::fold(BinOp::Add, items).expect("non-empty")
}

fn div(a: Expr, b: Expr) -> Expr {
    Expr::binary(BinOp::Div, a, b)
}

fn pow(a: Expr, b: Expr) -> Expr {
    Expr::binary(BinOp::Pow, a, b)
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return out;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// k-th smallest of `x1..xn` (1-based) as `min` over k-subsets of their `max`.
fn order_statistic(n: usize, k: usize) -> Expr {
    let xs = var_exprs(n);
    let maxima = combinations(n, k)
        .into_iter()
        .map(|subset| {
            fold_call(
                Builtin::Max,
                subset.into_iter().map(|i| xs[i].clone()).collect(),
            )
        })
        .collect();
    fold_call(Builtin::Min, maxima)
}

fn median(n: usize) -> Expr {
    if n == 2 {
        // (min + max) / 2 without the tie at x1 = x2
        div(sum(var_exprs(2)), Expr::num(2.0))
    } else if n % 2 == 1 {
        order_statistic(n, n.div_ceil(2))
    } else {
        let lower = order_statistic(n, n / 2);
        let upper = order_statistic(n, n / 2 + 1);
        div(Expr::binary(BinOp::Add, lower, upper), Expr::num(2.0))
    }
}

fn hull(values: &[f64]) -> (f64, f64) {
    values
        .iter()
        .fold((-10.0f64, 10.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

fn box_of(n: usize, lo: f64, hi: f64) -> DomainBox {
    DomainBox::uniform(n, lo, hi).expect("catalog boxes are valid")
}

fn scalar(f: Expr, names: Vec<String>) -> Target {
    Target::Scalar(ScalarFunction::with_vars(f, names).expect("catalog expressions are closed"))
}

/// Builds the named entry. `params` may carry `n` (arity or dimension) and
/// the entry's own parameters; unknown names are rejected.
pub fn instantiate(name: &str, params: &Params) -> Result<Instance, CatalogError> {
    let entry = entry(name).ok_or_else(|| CatalogError::UnknownEntry(name.to_string()))?;
    if let Some(unknown) = params
        .names()
        .find(|p| !entry.params.iter().any(|s| s.name == *p))
    {
        return Err(CatalogError::UnknownParam {
            entry: entry.name,
            param: unknown.to_string(),
        });
    }
    let x = || Expr::var("x");
    let uni = || vec!["x".to_string()];
    let (target, domain) = match entry.name {
        "identity" => (scalar(x(), uni()), box_of(1, -10.0, 10.0)),
        "constant" => {
            let c = params.scalar("c", 5.0)?;
            let (lo, hi) = hull(&[c]);
            (scalar(Expr::num(c), uni()), box_of(1, lo, hi))
        }
        "abs" | "floor" | "ceil" | "relu" => {
            let func = Builtin::from_name(entry.name).expect("builtin entry");
            (scalar(call(func, vec![x()]), uni()), box_of(1, -10.0, 10.0))
        }
        "clamp" => {
            let lo = params.scalar("lo", 0.0)?;
            let hi = params.scalar("hi", 1.0)?;
            if lo >= hi {
                return Err(invalid("hi", format!("need lo < hi, got [{lo}, {hi}]")));
            }
            let (blo, bhi) = hull(&[lo, hi]);
            let f = call(Builtin::Clamp, vec![x(), Expr::num(lo), Expr::num(hi)]);
            (scalar(f, uni()), box_of(1, blo, bhi))
        }
        "max_const" | "min_const" => {
            let c = params.scalar("c", 0.0)?;
            let func = if entry.name == "max_const" {
                Builtin::Max
            } else {
                Builtin::Min
            };
            let (lo, hi) = hull(&[c]);
            (
                scalar(call(func, vec![x(), Expr::num(c)]), uni()),
                box_of(1, lo, hi),
            )
        }
        "arith_mean" | "geo_mean" | "harmonic_mean" | "power_mean" | "median" | "min_all"
        | "max_all" => {
            let n = params.count("n", 2, 2)?;
            let xs = var_exprs(n);
            let nn = Expr::num(n as f64);
            let positive = box_of(n, 0.1, 10.0);
            let cube = box_of(n, -10.0, 10.0);
            let (f, domain) = match entry.name {
                "arith_mean" => (div(sum(xs), nn), cube),
                "geo_mean" => {
                    let product = Expr::fold(BinOp::Mul, xs).expect("non-empty");
                    let f = if n == 2 {
                        call(Builtin::Sqrt, vec![product])
                    } else {
                        pow(product, div(Expr::num(1.0), nn))
                    };
                    (f, positive)
                }
                "harmonic_mean" => {
                    let reciprocals = xs.into_iter().map(|v| div(Expr::num(1.0), v)).collect();
                    (div(nn, sum(reciprocals)), positive)
                }
                "power_mean" => {
                    let p = params.scalar("p", 2.0)?;
                    if p == 0.0 {
                        return Err(invalid("p", "exponent must be non-zero"));
                    }
                    let powers = xs.into_iter().map(|v| pow(v, Expr::num(p))).collect();
                    let f = pow(div(sum(powers), nn), div(Expr::num(1.0), Expr::num(p)));
                    (f, positive)
                }
                "median" => (median(n), cube),
                "min_all" => (fold_call(Builtin::Min, xs), cube),
                "max_all" => (fold_call(Builtin::Max, xs), cube),
                _ => unreachable!(),
            };
            (scalar(f, vars(n)), domain)
        }
        "weighted_mean" => {
            let w = params.vector("w")?.unwrap_or_else(|| vec![0.3, 0.7]);
            if w.len() < 2 {
                return Err(invalid("w", "need at least two weights"));
            }
            let total: f64 = w.iter().sum();
            if (total - 1.0).abs() > 1e-12 {
                return Err(invalid(
                    "w",
                    format!("weights must sum to 1 within 1e-12, got {total}"),
                ));
            }
            let terms = w
                .iter()
                .zip(var_exprs(w.len()))
                .map(|(&wi, v)| Expr::binary(BinOp::Mul, Expr::num(wi), v))
                .collect();
            (
                scalar(sum(terms), vars(w.len())),
                box_of(w.len(), -10.0, 10.0),
            )
        }
        "box_clamp" => {
            let d = params.count("n", 2, 1)?;
            let lo = params.scalar("lo", 0.0)?;
            let hi = params.scalar("hi", 1.0)?;
            let op = VectorOperator::box_clamp(d, lo, hi)?;
            let (blo, bhi) = hull(&[lo, hi]);
            (Target::Operator(op), box_of(d, blo, bhi))
        }
        "l2_ball_projection" => {
            let d = params.count("n", 2, 1)?;
            let r = params.scalar("r", 1.0)?;
            (
                Target::Operator(VectorOperator::l2_ball(d, r)?),
                box_of(d, -10.0, 10.0),
            )
        }
        "hyperplane_projection" => {
            let a = match params.vector("a")? {
                Some(a) => {
                    if let Ok(d) = params.count("n", a.len(), 1) {
                        if d != a.len() {
                            return Err(invalid(
                                "a",
                                format!("length {} does not match n = {d}", a.len()),
                            ));
                        }
                    }
                    a
                }
                None => vec![1.0; params.count("n", 2, 1)?],
            };
            let b = params.scalar("b", 1.0)?;
            let d = a.len();
            (
                Target::Operator(VectorOperator::hyperplane(a, b)?),
                box_of(d, -10.0, 10.0),
            )
        }
        "simplex_projection" => {
            let d = params.count("n", 2, 1)?;
            (
                Target::Operator(VectorOperator::simplex(d)?),
                box_of(d, -10.0, 10.0),
            )
        }
        _ => unreachable!("every listed entry is handled"),
    };
    Ok(Instance {
        entry,
        target,
        domain,
    })
}

/// Markdown reference table of the catalog.
pub fn reference_table() -> String {
    let mut out = String::from(
        "| name | kind | arity | params | natural box | smooth | symmetric | exact fixed points |\n\
         |---|---|---|---|---|---|---|---|\n",
    );
    let yn = |b: bool| if b { "yes" } else { "no" };
    for e in list_entries() {
        let params = if e.params.is_empty() {
            "-".to_string()
        } else {
            e.params
                .iter()
                .map(|p| format!("{}={}", p.name, p.default))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let kind = match e.kind {
            Kind::ScalarUnivariate => "scalar-univariate",
            Kind::ScalarMultivariate => "scalar-multivariate",
            Kind::VectorOperator => "vector-operator",
        };
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} | {} | {} |",
            e.name,
            kind,
            e.arity,
            params,
            e.natural_box,
            yn(e.flags.smooth),
            yn(e.flags.symmetric),
            yn(e.flags.exact_fixed_points)
        );
    }
    out
}
