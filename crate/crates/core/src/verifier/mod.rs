//! Sampling-based membership checks for the spaces `O(A)` and `O(Aⁿ)`.
//!
//! A scalar function `f` of arity `n` belongs to `O(Aⁿ)` when every output
//! is again in `A` and `f(f(x), …, f(x)) = f(x)`. The checks here sample
//! the domain box and look for a counterexample; they never prove
//! membership.
//!
//! Samples are evaluated in parallel. Each sample's point is derived from
//! `(seed, index)` alone and the reported witness is always the violation
//! with the smallest index, so verdicts match a sequential run exactly.

mod domain;
mod plan;
mod verdict;

use rayon::prelude::*;

use crate::expr::{EvalError, ScalarFunction};
use crate::projection::VectorOperator;

pub use domain::{DomainBox, Interval};
pub use plan::{
    SamplePlan, DEFAULT_ATOL, DEFAULT_KINK_MARGIN, DEFAULT_K_MAX, DEFAULT_RTOL, DEFAULT_SAMPLES,
    DEFAULT_SEED,
};
pub use verdict::{CheckKind, FailReason, Status, Verdict, Witness};

/// Label attached to every verdict about a vector-valued operator.
pub const VECTOR_EXTENSION: &str = "extension of the Ouroboros space to a vector-valued domain";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VerifyError {
    #[error("invalid interval [{lo}, {hi}]: bounds must be finite with lo < hi")]
    InvalidInterval { lo: f64, hi: f64 },
    #[error("domain box has no dimensions")]
    EmptyDomain,
    #[error("invalid sample plan: {0}")]
    InvalidPlan(String),
    #[error("domain has {found} dimension(s) but the function takes {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("univariate check needs a function of one variable, got arity {0}")]
    NotUnivariate(usize),
    #[error("multivariate check needs arity n >= 2, got {0}")]
    NotMultivariate(usize),
    #[error("multivariate membership needs one common interval A for every coordinate")]
    MixedIntervals,
}

enum Outcome {
    Ok {
        residual: f64,
    },
    Violation {
        reason: FailReason,
        witness: Witness,
    },
    DomainError(Witness),
}

fn domain_witness(index: u64, point: &[f64], err: &EvalError) -> Witness {
    Witness {
        sample_index: index,
        point: point.to_vec(),
        value: Vec::new(),
        self_applied: Vec::new(),
        residual: 0.0,
        tolerance: 0.0,
        iteration: None,
        detail: Some(err.to_string()),
    }
}

fn aggregate(check: CheckKind, outcomes: Vec<Outcome>, extension: Option<&'static str>) -> Verdict {
    let mut verdict = Verdict {
        check,
        status: Status::Pass,
        reason: None,
        witness: None,
        samples_evaluated: outcomes.len(),
        samples_skipped: 0,
        violations: 0,
        max_residual: 0.0,
        extension,
    };
    let mut first_violation = None;
    let mut first_domain_error = None;
    for outcome in outcomes {
        match outcome {
            Outcome::Ok { residual } => verdict.max_residual = verdict.max_residual.max(residual),
            Outcome::Violation { reason, witness } => {
                verdict.violations += 1;
                if reason != FailReason::RangeEscape {
                    verdict.max_residual = verdict.max_residual.max(witness.residual.abs());
                }
                first_violation.get_or_insert((reason, witness));
            }
            Outcome::DomainError(w) => {
                first_domain_error.get_or_insert(w);
            }
        }
    }
    if let Some(w) = first_domain_error {
        verdict.status = Status::DomainError;
        verdict.witness = Some(w);
    } else if let Some((reason, w)) = first_violation {
        verdict.status = Status::Fail;
        verdict.reason = Some(reason);
        verdict.witness = Some(w);
    }
    verdict
}

fn run_samples(plan: &SamplePlan, sample: impl Fn(u64) -> Outcome + Sync + Send) -> Vec<Outcome> {
    (0..plan.sample_count as u64)
        .into_par_iter()
        .map(sample)
        .collect()
}

fn membership_sample(
    f: &ScalarFunction,
    a: Interval,
    domain: &DomainBox,
    plan: &SamplePlan,
    index: u64,
) -> Outcome {
    let x = plan.sample_point(domain, index, 0);
    let fx = match f.eval(&x) {
        Ok(v) => v,
        Err(e) => return Outcome::DomainError(domain_witness(index, &x, &e)),
    };
    let tolerance = plan.tolerance(fx);
    let excess = a.excess(fx);
    if excess > tolerance {
        return Outcome::Violation {
            reason: FailReason::RangeEscape,
            witness: Witness {
                sample_index: index,
                point: x,
                value: vec![fx],
                self_applied: Vec::new(),
                residual: excess,
                tolerance,
                iteration: None,
                detail: Some(format!("f(x) = {fx} lies outside [{}, {}]", a.lo, a.hi)),
            },
        };
    }
    let ffx = match f.eval_diagonal(fx) {
        Ok(v) => v,
        Err(e) => return Outcome::DomainError(domain_witness(index, &x, &e)),
    };
    let residual = ffx - fx;
    if residual.abs() > tolerance {
        return Outcome::Violation {
            reason: FailReason::NotIdempotent,
            witness: Witness {
                sample_index: index,
                point: x,
                value: vec![fx],
                self_applied: vec![ffx],
                residual,
                tolerance,
                iteration: None,
                detail: None,
            },
        };
    }
    Outcome::Ok {
        residual: residual.abs(),
    }
}

fn check_dims(
    f: &ScalarFunction,
    domain: &DomainBox,
    plan: &SamplePlan,
) -> Result<(), VerifyError> {
    plan.validate()?;
    if domain.dim() != f.arity() {
        return Err(VerifyError::DimensionMismatch {
            expected: f.arity(),
            found: domain.dim(),
        });
    }
    Ok(())
}

/// Membership of a function of one variable in `O(A)`, `A = [lo, hi]`.
///
/// Each sample checks range containment first (`RANGE_ESCAPE`), then
/// `|f(f(x)) − f(x)| ≤ atol + rtol·|f(x)|`.
pub fn check_univariate_membership(
    f: &ScalarFunction,
    domain: &DomainBox,
    plan: &SamplePlan,
) -> Result<Verdict, VerifyError> {
    if f.arity() != 1 {
        return Err(VerifyError::NotUnivariate(f.arity()));
    }
    check_dims(f, domain, plan)?;
    let a = domain.intervals()[0];
    let outcomes = run_samples(plan, |i| membership_sample(f, a, domain, plan, i));
    Ok(aggregate(CheckKind::UnivariateMembership, outcomes, None))
}

/// Membership of an n-ary function (n ≥ 2) in `O(Aⁿ)`.
///
/// All coordinates must share the interval `A`, and the self-application
/// is `f(f(x), …, f(x))`.
pub fn check_multivariate_membership(
    f: &ScalarFunction,
    domain: &DomainBox,
    plan: &SamplePlan,
) -> Result<Verdict, VerifyError> {
    if f.arity() < 2 {
        return Err(VerifyError::NotMultivariate(f.arity()));
    }
    check_dims(f, domain, plan)?;
    let a = domain
        .common_interval()
        .ok_or(VerifyError::MixedIntervals)?;
    let outcomes = run_samples(plan, |i| membership_sample(f, a, domain, plan, i));
    Ok(aggregate(CheckKind::MultivariateMembership, outcomes, None))
}

/// Dispatches on arity.
pub fn check_membership(
    f: &ScalarFunction,
    domain: &DomainBox,
    plan: &SamplePlan,
) -> Result<Verdict, VerifyError> {
    if f.arity() == 1 {
        check_univariate_membership(f, domain, plan)
    } else {
        check_multivariate_membership(f, domain, plan)
    }
}

/// Iterated equation: for k = 2..=k_max the k-fold self-application
/// `t ← f(t, …, t)` starting from `t = f(x)` must stay within tolerance of
/// `f(x)`. `max_residual` reports the largest drift over all samples and k.
pub fn check_iterated(
    f: &ScalarFunction,
    domain: &DomainBox,
    plan: &SamplePlan,
) -> Result<Verdict, VerifyError> {
    check_dims(f, domain, plan)?;
    let outcomes = run_samples(plan, |index| {
        let x = plan.sample_point(domain, index, 0);
        let first = match f.eval(&x) {
            Ok(v) => v,
            Err(e) => return Outcome::DomainError(domain_witness(index, &x, &e)),
        };
        let tolerance = plan.tolerance(first);
        let mut t = first;
        let mut max_drift: f64 = 0.0;
        let mut bad: Option<(u32, f64, f64)> = None;
        let mut last_k = plan.k_max;
        for k in 2..=plan.k_max {
            t = match f.eval_diagonal(t) {
                Ok(v) => v,
                // drift already established; the blow-up that follows is not news
                Err(_) if bad.is_some() => {
                    last_k = k - 1;
                    break;
                }
                Err(e) => return Outcome::DomainError(domain_witness(index, &x, &e)),
            };
            let drift = t - first;
            max_drift = max_drift.max(drift.abs());
            if drift.abs() > tolerance && bad.is_none() {
                bad = Some((k, t, drift));
            }
        }
        match bad {
            None => Outcome::Ok {
                residual: max_drift,
            },
            Some((k, t, drift)) => Outcome::Violation {
                reason: FailReason::IterationDrift,
                witness: Witness {
                    sample_index: index,
                    point: x,
                    value: vec![first],
                    self_applied: vec![t],
                    residual: drift,
                    tolerance,
                    iteration: Some(k),
                    detail: Some(format!("max drift {max_drift:e} over k = 2..={last_k}")),
                },
            },
        }
    });
    Ok(aggregate(CheckKind::Iterated, outcomes, None))
}

fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn check_operator_dims(
    op: &VectorOperator,
    domain: &DomainBox,
    plan: &SamplePlan,
) -> Result<(), VerifyError> {
    plan.validate()?;
    if domain.dim() != op.dim() {
        return Err(VerifyError::DimensionMismatch {
            expected: op.dim(),
            found: domain.dim(),
        });
    }
    Ok(())
}

/// `‖P(P(x)) − P(x)‖∞ ≤ atol + rtol·‖P(x)‖∞` at every sample.
pub fn check_operator_idempotence(
    op: &VectorOperator,
    domain: &DomainBox,
    plan: &SamplePlan,
) -> Result<Verdict, VerifyError> {
    check_operator_dims(op, domain, plan)?;
    let outcomes = run_samples(plan, |index| {
        let x = plan.sample_point(domain, index, 0);
        let px = op.apply(&x);
        let ppx = op.apply(&px);
        let residual = sup_distance(&ppx, &px);
        let tolerance = plan.tolerance(sup_norm(&px));
        if residual > tolerance {
            Outcome::Violation {
                reason: FailReason::NotIdempotent,
                witness: Witness {
                    sample_index: index,
                    point: x,
                    value: px,
                    self_applied: ppx,
                    residual,
                    tolerance,
                    iteration: None,
                    detail: None,
                },
            }
        } else {
            Outcome::Ok { residual }
        }
    });
    Ok(aggregate(
        CheckKind::OperatorIdempotence,
        outcomes,
        Some(VECTOR_EXTENSION),
    ))
}

/// Iterated form of [`check_operator_idempotence`]: `Pᵏ(x)` against `P(x)`.
pub fn check_operator_iterated(
    op: &VectorOperator,
    domain: &DomainBox,
    plan: &SamplePlan,
) -> Result<Verdict, VerifyError> {
    check_operator_dims(op, domain, plan)?;
    let outcomes = run_samples(plan, |index| {
        let x = plan.sample_point(domain, index, 0);
        let first = op.apply(&x);
        let tolerance = plan.tolerance(sup_norm(&first));
        let mut t = first.clone();
        let mut max_drift: f64 = 0.0;
        let mut bad = None;
        for k in 2..=plan.k_max {
            t = op.apply(&t);
            let drift = sup_distance(&t, &first);
            max_drift = max_drift.max(drift);
            if drift > tolerance && bad.is_none() {
                bad = Some((k, t.clone(), drift));
            }
        }
        match bad {
            None => Outcome::Ok {
                residual: max_drift,
            },
            Some((k, t, drift)) => Outcome::Violation {
                reason: FailReason::IterationDrift,
                witness: Witness {
                    sample_index: index,
                    point: x,
                    value: first,
                    self_applied: t,
                    residual: drift,
                    tolerance,
                    iteration: Some(k),
                    detail: None,
                },
            },
        }
    });
    Ok(aggregate(
        CheckKind::OperatorIterated,
        outcomes,
        Some(VECTOR_EXTENSION),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::ScalarFunction;

    fn f(src: &str) -> ScalarFunction {
        ScalarFunction::parse(src).unwrap()
    }

    fn unit(n: usize) -> DomainBox {
        DomainBox::uniform(n, -10.0, 10.0).unwrap()
    }

    #[test]
    fn abs_is_a_member() {
        let v =
            check_univariate_membership(&f("abs(x)"), &unit(1), &SamplePlan::default()).unwrap();
        assert_eq!(v.status, Status::Pass);
        assert_eq!(v.samples_evaluated + v.samples_skipped, 256);
        assert!(v.witness.is_none());
    }

    #[test]
    fn translation_fails() {
        let v = check_univariate_membership(&f("x + 1"), &unit(1), &SamplePlan::default()).unwrap();
        assert_eq!(v.status, Status::Fail);
        let w = v.witness.unwrap();
        match v.reason.unwrap() {
            FailReason::NotIdempotent => assert_eq!(w.residual, 1.0),
            FailReason::RangeEscape => assert!(w.value[0] > 10.0),
            other => panic!("{other:?}"),
        }
        assert_eq!(w.sample_index, 0);
    }

    #[test]
    fn halving_fails_with_half_residual() {
        let v = check_univariate_membership(&f("x/2"), &unit(1), &SamplePlan::default()).unwrap();
        assert_eq!(v.reason, Some(FailReason::NotIdempotent));
        let w = v.witness.unwrap();
        assert_eq!(w.residual, -w.value[0] / 2.0);
    }

    #[test]
    fn multivariate_examples() {
        let plan = SamplePlan::default();
        for src in ["(x1+x2)/2", "max(x1,x2)"] {
            let v = check_multivariate_membership(&f(src), &unit(2), &plan).unwrap();
            assert_eq!(v.status, Status::Pass, "{src}");
        }
        let v = check_multivariate_membership(&f("x1*x2"), &unit(2), &plan).unwrap();
        assert_eq!(v.status, Status::Fail);
    }

    #[test]
    fn configuration_errors() {
        let plan = SamplePlan::default();
        assert_eq!(
            check_univariate_membership(&f("x1 + x2"), &unit(2), &plan),
            Err(VerifyError::NotUnivariate(2))
        );
        assert_eq!(
            check_multivariate_membership(&f("x"), &unit(1), &plan),
            Err(VerifyError::NotMultivariate(1))
        );
        assert!(matches!(
            check_membership(&f("x1 + x2"), &unit(3), &plan),
            Err(VerifyError::DimensionMismatch {
                expected: 2,
                found: 3
            })
        ));
        let mixed = DomainBox::new(vec![
            Interval::new(0.0, 1.0).unwrap(),
            Interval::new(0.0, 2.0).unwrap(),
        ])
        .unwrap();
        assert_eq!(
            check_multivariate_membership(&f("max(x1,x2)"), &mixed, &plan),
            Err(VerifyError::MixedIntervals)
        );
    }

    #[test]
    fn bad_domain_is_domain_error() {
        let v = check_univariate_membership(&f("ln(x)"), &unit(1), &SamplePlan::default()).unwrap();
        assert_eq!(v.status, Status::DomainError);
        assert!(v.witness.unwrap().detail.unwrap().contains("ln(x)"));
    }

    #[test]
    fn iterated_exact_families_have_zero_drift() {
        let plan = SamplePlan {
            k_max: 64,
            ..SamplePlan::default()
        };
        for src in ["clamp(x,0,1)", "floor(x)"] {
            let v = check_iterated(&f(src), &unit(1), &plan).unwrap();
            assert_eq!(v.status, Status::Pass);
            assert_eq!(v.max_residual, 0.0, "{src}");
        }
    }

    #[test]
    fn iterated_catches_drift() {
        let v = check_iterated(&f("x/2"), &unit(1), &SamplePlan::default()).unwrap();
        assert_eq!(v.status, Status::Fail);
        assert_eq!(v.reason, Some(FailReason::IterationDrift));
        assert_eq!(v.witness.unwrap().iteration, Some(2));
    }

    #[test]
    fn parallel_matches_sequential() {
        let plan = SamplePlan::default();
        let g = f("x1*x2");
        let dom = unit(2);
        let par = check_multivariate_membership(&g, &dom, &plan).unwrap();
        let a = dom.common_interval().unwrap();
        let seq: Vec<Outcome> = (0..plan.sample_count as u64)
            .map(|i| membership_sample(&g, a, &dom, &plan, i))
            .collect();
        assert_eq!(par, aggregate(CheckKind::MultivariateMembership, seq, None));
    }

    #[test]
    fn operator_checks() {
        let plan = SamplePlan::default();
        let ball = VectorOperator::l2_ball(2, 1.0).unwrap();
        let v = check_operator_idempotence(&ball, &unit(2), &plan).unwrap();
        assert!(v.passed());
        assert_eq!(v.extension, Some(VECTOR_EXTENSION));
        assert!(check_operator_iterated(&ball, &unit(2), &plan)
            .unwrap()
            .passed());
        assert!(check_operator_idempotence(&ball, &unit(3), &plan).is_err());
    }
}
