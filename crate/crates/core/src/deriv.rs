//! Ouroboros derivatives and the unity checks.
//!
//! For a member `f` of `O(ℝⁿ)` with `t = f(x)`, differentiating
//! `f(t, …, t) = t` along `xᵢ` gives
//!
//! ```text
//! ∂f/∂xᵢ(x) · Σₖ f_{xₖ}(t, …, t) = ∂f/∂xᵢ(x)
//! ```
//!
//! so the shares `f_{xₖ}(t, …, t)` sum to one wherever some `∂f/∂xᵢ(x)` is
//! non-zero. Equal shares (each `1/n`) additionally need symmetry; the two
//! claims are therefore always reported separately.
//!
//! Partials come from dual numbers ([`Method::Dual`]) or central differences
//! ([`Method::FiniteDifference`]); the second is an independent oracle for
//! the first.

use rayon::prelude::*;
use serde::Serialize;

use crate::dual::Dual;
use crate::expr::{EvalError, Kink, ScalarFunction};
use crate::verifier::{DomainBox, SamplePlan, Status, VerifyError};

/// Unity tolerance for dual-number partials.
pub const TOL_UNITY_DUAL: f64 = 1e-6;
/// Unity tolerance for finite-difference partials.
pub const TOL_UNITY_FD: f64 = 1e-4;
/// Below this sup-norm the outer gradient counts as zero.
pub const GRADIENT_FLOOR: f64 = 1e-8;
/// Resampling budget per sample index when a point lands on a kink.
pub const MAX_KINK_RETRIES: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Dual,
    FiniteDifference,
}

impl Method {
    pub fn unity_tolerance(self) -> f64 {
        match self {
            Method::Dual => TOL_UNITY_DUAL,
            Method::FiniteDifference => TOL_UNITY_FD,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Dual => "dual",
            Method::FiniteDifference => "finite-difference",
        }
    }
}

/// Where a kink was hit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KinkSite {
    /// At the sampled point `x`.
    Point,
    /// At the diagonal point `(f(x), …, f(x))`.
    Diagonal,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DerivError {
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("non-differentiable at the {site:?} point {point:?}: {kink}")]
    Kink {
        site: KinkSite,
        point: Vec<f64>,
        kink: Kink,
    },
    #[error("coordinate index {index} out of range for arity {arity}")]
    BadIndex { index: usize, arity: usize },
    #[error("expected a function of one variable, got arity {0}")]
    NotUnivariate(usize),
    #[error(transparent)]
    Config(#[from] VerifyError),
}

/// Value and one partial derivative from a dual-number pass.
#[derive(Debug, Clone, PartialEq)]
pub struct DualPartial {
    pub value: f64,
    pub partial: f64,
    /// Set when a non-smooth builtin was evaluated within the kink margin.
    pub kink: Option<Kink>,
}

fn check_index(f: &ScalarFunction, i: usize) -> Result<(), DerivError> {
    if i >= f.arity() {
        return Err(DerivError::BadIndex {
            index: i,
            arity: f.arity(),
        });
    }
    Ok(())
}

/// Forward-mode `∂f/∂x_direction` at `point`.
pub fn dual_eval(
    f: &ScalarFunction,
    point: &[f64],
    direction: usize,
    kink_margin: f64,
) -> Result<DualPartial, DerivError> {
    check_index(f, direction)?;
    let (d, kink) = f.eval_scalar(&Dual::seed(point, direction), Some(kink_margin))?;
    Ok(DualPartial {
        value: d.value,
        partial: d.deriv,
        kink,
    })
}

/// Default central-difference step for coordinate value `x`.
pub fn default_step(x: f64) -> f64 {
    1e-6 * x.abs().max(1.0)
}

/// Central difference `(f(p + h·eᵢ) − f(p − h·eᵢ)) / 2h`.
pub fn fd_partial(
    f: &ScalarFunction,
    point: &[f64],
    i: usize,
    h: Option<f64>,
) -> Result<f64, DerivError> {
    check_index(f, i)?;
    let h = h.unwrap_or_else(|| default_step(point[i]));
    let mut p = point.to_vec();
    p[i] = point[i] + h;
    let plus = f.eval(&p)?;
    p[i] = point[i] - h;
    let minus = f.eval(&p)?;
    Ok((plus - minus) / (2.0 * h))
}

/// Full gradient at `point` plus the first kink encountered, if any.
pub fn gradient(
    f: &ScalarFunction,
    point: &[f64],
    method: Method,
    kink_margin: f64,
) -> Result<(Vec<f64>, Option<Kink>), DerivError> {
    match method {
        Method::Dual => {
            let mut kink = None;
            let mut grad = Vec::with_capacity(f.arity());
            for i in 0..f.arity() {
                let d = dual_eval(f, point, i, kink_margin)?;
                kink = kink.or(d.kink);
                grad.push(d.partial);
            }
            Ok((grad, kink))
        }
        Method::FiniteDifference => {
            let (_, kink) = f.eval_tracking_kinks(point, kink_margin)?;
            let grad = (0..f.arity())
                .map(|i| fd_partial(f, point, i, None))
                .collect::<Result<Vec<_>, _>>()?;
            Ok((grad, kink))
        }
    }
}

/// The Ouroboros derivatives at one sample point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OuroborosGradient {
    /// `t = f(x)`.
    pub value: f64,
    /// `f_{xᵢ}(t, …, t)` for each i.
    pub shares: Vec<f64>,
}

/// Evaluates `t = f(x)` and the gradient of `f` at the diagonal `(t, …, t)`.
pub fn ouroboros_gradient(
    f: &ScalarFunction,
    x: &[f64],
    method: Method,
    kink_margin: f64,
) -> Result<OuroborosGradient, DerivError> {
    let t = f.eval(x)?;
    let diagonal = vec![t; f.arity()];
    let (shares, kink) = gradient(f, &diagonal, method, kink_margin)?;
    if let Some(kink) = kink {
        return Err(DerivError::Kink {
            site: KinkSite::Diagonal,
            point: diagonal,
            kink,
        });
    }
    Ok(OuroborosGradient { value: t, shares })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnityReport {
    pub n: usize,
    pub point: Vec<f64>,
    /// `f(x)`, the common coordinate of the diagonal point.
    pub diagonal_value: f64,
    /// `∇f(x)`.
    pub outer_gradient: Vec<f64>,
    /// Absent only when the report is degenerate and the diagonal could not
    /// be differentiated.
    pub shares: Option<Vec<f64>>,
    pub share_sum: Option<f64>,
    /// `max |shareᵢ − 1/n|`.
    pub max_share_deviation: Option<f64>,
    pub sum_to_one: Status,
    pub equal_shares: Status,
    pub method: Method,
    pub tolerance: f64,
}

impl UnityReport {
    pub fn is_degenerate(&self) -> bool {
        self.sum_to_one == Status::Degenerate
    }
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Checks both unity claims at `x`: the shares sum to one, and every share
/// equals `1/n`.
///
/// Both claims are DEGENERATE when `‖∇f(x)‖∞ ≤ GRADIENT_FLOOR`, since the
/// chain-rule identity then says nothing. A kink at `x` or at the diagonal
/// is an error: the point is outside the C¹ hypothesis.
pub fn check_unity(
    f: &ScalarFunction,
    x: &[f64],
    plan: &SamplePlan,
    method: Method,
) -> Result<UnityReport, DerivError> {
    if x.len() != f.arity() {
        return Err(EvalError::PointArity {
            expected: f.arity(),
            found: x.len(),
        }
        .into());
    }
    let n = f.arity();
    let (outer, kink) = gradient(f, x, method, plan.kink_margin)?;
    if let Some(kink) = kink {
        return Err(DerivError::Kink {
            site: KinkSite::Point,
            point: x.to_vec(),
            kink,
        });
    }
    let tolerance = method.unity_tolerance();
    let diagonal_value = f.eval(x)?;
    let mut report = UnityReport {
        n,
        point: x.to_vec(),
        diagonal_value,
        outer_gradient: outer,
        shares: None,
        share_sum: None,
        max_share_deviation: None,
        sum_to_one: Status::Degenerate,
        equal_shares: Status::Degenerate,
        method,
        tolerance,
    };
    let degenerate = sup_norm(&report.outer_gradient) <= GRADIENT_FLOOR;
    let shares = match ouroboros_gradient(f, x, method, plan.kink_margin) {
        Ok(g) => g.shares,
        Err(_) if degenerate => return Ok(report),
        Err(e) => return Err(e),
    };
    let sum: f64 = shares.iter().sum();
    let target = 1.0 / n as f64;
    let deviation = shares.iter().fold(0.0f64, |m, s| m.max((s - target).abs()));
    report.share_sum = Some(sum);
    report.max_share_deviation = Some(deviation);
    report.shares = Some(shares);
    if !degenerate {
        report.sum_to_one = pass_if((sum - 1.0).abs() <= tolerance);
        report.equal_shares = pass_if(deviation <= tolerance);
    }
    Ok(report)
}

fn pass_if(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

/// One-variable case: `f′(f(x)) = 1` whenever `f′(x) ≠ 0`.
pub fn check_univariate_unity(
    f: &ScalarFunction,
    x: f64,
    plan: &SamplePlan,
    method: Method,
) -> Result<UnityReport, DerivError> {
    if f.arity() != 1 {
        return Err(DerivError::NotUnivariate(f.arity()));
    }
    check_unity(f, &[x], plan, method)
}

/// A unity report at a sampled point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledUnity {
    pub sample_index: u64,
    /// Retries spent moving off kinks.
    pub attempt: u32,
    pub report: UnityReport,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ClaimTally {
    pub pass: usize,
    pub fail: usize,
    pub degenerate: usize,
}

impl ClaimTally {
    fn add(&mut self, s: Status) {
        match s {
            Status::Pass => self.pass += 1,
            Status::Fail => self.fail += 1,
            _ => self.degenerate += 1,
        }
    }
}

/// Unity checks over sampled points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitySweep {
    pub method: Method,
    pub reports: Vec<SampledUnity>,
    /// Sample indices abandoned after `MAX_KINK_RETRIES` retries.
    pub skipped: Vec<u64>,
    pub sum_to_one: ClaimTally,
    pub equal_shares: ClaimTally,
}

impl UnitySweep {
    pub fn non_degenerate(&self) -> impl Iterator<Item = &SampledUnity> {
        self.reports.iter().filter(|r| !r.report.is_degenerate())
    }

    /// Overall status of one claim: FAIL if any point fails, PASS if at
    /// least one point passes, DEGENERATE otherwise.
    pub fn claim_status(tally: &ClaimTally) -> Status {
        if tally.fail > 0 {
            Status::Fail
        } else if tally.pass > 0 {
            Status::Pass
        } else {
            Status::Degenerate
        }
    }
}

enum SampleResult {
    Report(SampledUnity),
    Skipped(u64),
    Error(DerivError),
}

/// Runs [`check_unity`] at `plan.sample_count` points of `domain`.
///
/// A point on a kink is resampled up to [`MAX_KINK_RETRIES`] times and then
/// skipped. Evaluation errors abort with the error of the lowest sample
/// index.
pub fn sample_unity(
    f: &ScalarFunction,
    domain: &DomainBox,
    plan: &SamplePlan,
    method: Method,
) -> Result<UnitySweep, DerivError> {
    plan.validate()?;
    if domain.dim() != f.arity() {
        return Err(VerifyError::DimensionMismatch {
            expected: f.arity(),
            found: domain.dim(),
        }
        .into());
    }
    let results: Vec<SampleResult> = (0..plan.sample_count as u64)
        .into_par_iter()
        .map(|index| {
            for attempt in 0..=MAX_KINK_RETRIES {
                let x = plan.sample_point(domain, index, attempt);
                match check_unity(f, &x, plan, method) {
                    Ok(report) => {
                        return SampleResult::Report(SampledUnity {
                            sample_index: index,
                            attempt,
                            report,
                        })
                    }
                    Err(DerivError::Kink { .. }) => continue,
                    Err(e) => return SampleResult::Error(e),
                }
            }
            SampleResult::Skipped(index)
        })
        .collect();
    let mut sweep = UnitySweep {
        method,
        reports: Vec::new(),
        skipped: Vec::new(),
        sum_to_one: ClaimTally::default(),
        equal_shares: ClaimTally::default(),
    };
    for r in results {
        match r {
            SampleResult::Report(s) => {
                sweep.sum_to_one.add(s.report.sum_to_one);
                sweep.equal_shares.add(s.report.equal_shares);
                sweep.reports.push(s);
            }
            SampleResult::Skipped(i) => sweep.skipped.push(i),
            SampleResult::Error(e) => return Err(e),
        }
    }
    Ok(sweep)
}
