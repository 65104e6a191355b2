//! Verification workbench for idempotent ("Ouroboros") functions.
//!
//! A function `f` is an Ouroboros function on `A` when `f(f(x)) = f(x)` and
//! its range stays inside `A`; the n-ary form is `f(f(x), …, f(x)) = f(x)`.
//! This crate provides:
//!
//! - [`expr`]: a small expression DSL (parse, evaluate, canonical format);
//! - [`verifier`]: sampling-based membership and iterated-equation checks;
//! - [`deriv`]: Ouroboros derivatives via dual numbers and finite
//!   differences, and the unity checks built on them;
//! - [`finite`]: exact enumeration of idempotent maps on `{0, …, m−1}`;
//! - [`catalog`]: parameterized families of known members;
//! - [`projection`]: convex projections used as vector-valued members.

pub mod catalog;
pub mod deriv;
pub mod dual;
pub mod expr;
pub mod finite;
pub mod projection;
pub mod verifier;

pub use catalog::{instantiate, list_entries, CatalogEntry, Instance, Params, Target};
pub use deriv::{check_unity, check_univariate_unity, Method, UnityReport};
pub use dual::Dual;
pub use expr::{parse, Expr, ScalarFunction, VarEnv};
pub use finite::FiniteEndofunction;
pub use projection::VectorOperator;
pub use verifier::{DomainBox, Interval, SamplePlan, Status, Verdict};
