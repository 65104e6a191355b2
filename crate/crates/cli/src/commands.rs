use std::io::Write as _;
use std::time::{SystemTime, UNIX_EPOCH};

use ouroboros_core::catalog::{list_entries, reference_table};
use ouroboros_core::deriv::{
    check_unity, sample_unity, ClaimTally, DerivError, Method, UnitySweep, GRADIENT_FLOOR,
};
use ouroboros_core::finite::{
    count_idempotent, enumerate_idempotent, MAX_COUNT_M, MAX_ENUMERATE_M,
};
use ouroboros_core::verifier::{
    check_iterated, check_membership, check_operator_idempotence, check_operator_iterated,
    VerifyError,
};
use ouroboros_core::{SamplePlan, ScalarFunction, Status, Target, UnityReport, Verdict};
use serde::Serialize;

use crate::args::{
    CatalogArgs, CheckArgs, DeriveArgs, EnumerateArgs, Format, MethodArg, OutputArgs, PlanArgs,
};
use crate::config::FileConfig;
use crate::error::CliError;
use crate::report::{
    CheckReport, ClaimSummary, ClaimWitness, DeriveReport, EnumerateReport, KinkDetail, UnityPoint,
    UnitySection, SCHEMA_VERSION,
};
use crate::target::{resolve, Resolved};

fn plan_from(args: &PlanArgs) -> Result<SamplePlan, CliError> {
    let defaults = SamplePlan::default();
    let plan = SamplePlan {
        seed: args.seed.unwrap_or(defaults.seed),
        sample_count: args.samples.unwrap_or(defaults.sample_count),
        atol: args.atol.unwrap_or(defaults.atol),
        rtol: args.rtol.unwrap_or(defaults.rtol),
        kink_margin: defaults.kink_margin,
        k_max: args.kmax.unwrap_or(defaults.k_max),
    };
    plan.validate()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(plan)
}

fn verify_error(e: VerifyError) -> CliError {
    CliError::Usage(e.to_string())
}

fn timestamp(output: &OutputArgs) -> Option<u64> {
    output.timestamp.then(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs())
    })
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn emit(output: &OutputArgs, body: &str) -> Result<(), CliError> {
    match &output.out {
        Some(path) => std::fs::write(path, body).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(body.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: "standard output".into(),
                    source,
                })
        }
    }
}

fn text_or_json(output: &OutputArgs) -> Result<Format, CliError> {
    match output.format.unwrap_or(Format::Text) {
        Format::Csv => Err(CliError::Usage(
            "--format csv applies to `enumerate` only".into(),
        )),
        f => Ok(f),
    }
}

/// DOMAIN_ERROR beats FAIL beats DEGENERATE beats PASS.
fn worst(statuses: impl IntoIterator<Item = Status>) -> Status {
    let rank = |s: Status| match s {
        Status::Pass => 0,
        Status::Degenerate => 1,
        Status::Fail => 2,
        Status::DomainError => 3,
    };
    statuses
        .into_iter()
        .max_by_key(|s| rank(*s))
        .unwrap_or(Status::Pass)
}

pub fn exit_code(status: Status, strict_degenerate: bool) -> i32 {
    match status {
        Status::Pass => 0,
        Status::Degenerate if strict_degenerate => 1,
        Status::Degenerate => 0,
        Status::Fail => 1,
        Status::DomainError => 3,
    }
}

fn membership_checks(resolved: &Resolved, plan: &SamplePlan) -> Result<Vec<Verdict>, CliError> {
    let checks = match &resolved.target {
        Target::Scalar(f) => vec![
            check_membership(f, &resolved.domain, plan).map_err(verify_error)?,
            check_iterated(f, &resolved.domain, plan).map_err(verify_error)?,
        ],
        Target::Operator(op) => vec![
            check_operator_idempotence(op, &resolved.domain, plan).map_err(verify_error)?,
            check_operator_iterated(op, &resolved.domain, plan).map_err(verify_error)?,
        ],
    };
    Ok(checks)
}

pub fn cmd_check(args: &CheckArgs) -> Result<i32, CliError> {
    let file = FileConfig::for_output(&args.output)?;
    let output = file.merge_output(&args.output)?;
    let format = text_or_json(&output)?;
    let plan = plan_from(&file.merge_plan(&args.plan))?;
    let resolved = resolve(&file.merge_target(&args.target))?;

    let checks = membership_checks(&resolved, &plan)?;
    let status = worst(checks.iter().map(|v| v.status));
    let report = CheckReport {
        schema_version: SCHEMA_VERSION,
        command: "check",
        generated_at_unix: timestamp(&output),
        target: resolved.info,
        domain: resolved.domain.intervals().to_vec(),
        plan,
        checks,
        status,
        exit_code: exit_code(status, false),
    };
    let body = match format {
        Format::Json => json(&report),
        _ => report.to_text(),
    };
    emit(&output, &body)?;
    Ok(report.exit_code)
}

fn derive_error(e: DerivError) -> CliError {
    match e {
        DerivError::Eval(e) => CliError::Domain(format!("evaluation failed: {e}")),
        DerivError::Config(e) => verify_error(e),
        other => CliError::Usage(other.to_string()),
    }
}

fn point_from_report(
    sample_index: Option<u64>,
    attempt: Option<u32>,
    report: UnityReport,
) -> UnityPoint {
    UnityPoint {
        sample_index,
        attempt,
        point: report.point.clone(),
        sum_to_one: report.sum_to_one,
        equal_shares: report.equal_shares,
        reason: report.is_degenerate().then_some("GRADIENT_FLOOR"),
        kink: None,
        report: Some(report),
    }
}

fn summarize(points: &[UnityPoint], claim: fn(&UnityPoint) -> Status) -> ClaimSummary {
    let mut tally = ClaimTally::default();
    let mut witness = None;
    for p in points {
        match claim(p) {
            Status::Pass => tally.pass += 1,
            Status::Fail => {
                tally.fail += 1;
                if witness.is_none() {
                    let r = p.report.as_ref().expect("a judged point has a report");
                    witness = Some(ClaimWitness {
                        sample_index: p.sample_index,
                        point: p.point.clone(),
                        shares: r.shares.clone().unwrap_or_default(),
                        share_sum: r.share_sum.unwrap_or(f64::NAN),
                        max_share_deviation: r.max_share_deviation.unwrap_or(f64::NAN),
                    });
                }
            }
            _ => tally.degenerate += 1,
        }
    }
    ClaimSummary {
        status: UnitySweep::claim_status(&tally),
        tally,
        witness,
    }
}

fn unity_at_point(
    f: &ScalarFunction,
    point: &[f64],
    plan: &SamplePlan,
    method: Method,
) -> Result<Vec<UnityPoint>, CliError> {
    if point.len() != f.arity() {
        return Err(CliError::Usage(format!(
            "--point has {} coordinate(s) but the function takes {}",
            point.len(),
            f.arity()
        )));
    }
    match check_unity(f, point, plan, method) {
        Ok(report) => Ok(vec![point_from_report(None, None, report)]),
        Err(DerivError::Kink { site, point, kink }) => Ok(vec![UnityPoint {
            sample_index: None,
            attempt: None,
            point,
            sum_to_one: Status::Degenerate,
            equal_shares: Status::Degenerate,
            reason: Some("KINK"),
            kink: Some(KinkDetail { site, kink }),
            report: None,
        }]),
        Err(e) => Err(derive_error(e)),
    }
}

pub fn cmd_derive(args: &DeriveArgs) -> Result<i32, CliError> {
    let file = FileConfig::for_output(&args.output)?;
    let output = file.merge_output(&args.output)?;
    let format = text_or_json(&output)?;
    let plan = plan_from(&file.merge_plan(&args.plan))?;
    let method = match file.method(args.method)?.unwrap_or(MethodArg::Dual) {
        MethodArg::Dual => Method::Dual,
        MethodArg::Fd => Method::FiniteDifference,
    };
    let point = args.point.clone().or_else(|| file.point.clone());
    let skip_membership = args.skip_membership || file.skip_membership.unwrap_or(false);
    let strict = args.strict_degenerate || file.strict_degenerate.unwrap_or(false);
    let resolved = resolve(&file.merge_target(&args.target))?;
    let f = match &resolved.target {
        Target::Scalar(f) => f.clone(),
        Target::Operator(_) => {
            return Err(CliError::Usage(
                "derive needs a scalar function; vector operators have no unity claims".into(),
            ))
        }
    };

    let mut warnings = Vec::new();
    if resolved.info.flags.is_some_and(|fl| !fl.smooth) {
        warnings
            .push("entry is not flagged smooth; points on kinks are resampled or reported".into());
    }
    if let Some(p) = &point {
        if p.len() == f.arity() && !resolved.domain.contains(p) {
            warnings.push("--point lies outside the domain box".into());
        }
    }

    let membership = if skip_membership {
        None
    } else {
        Some(membership_checks(&resolved, &plan)?)
    };
    let membership_status = worst(membership.iter().flatten().map(|v| v.status));

    let unity = if membership_status == Status::Pass {
        let (mode, points, skipped) = match &point {
            Some(p) => ("point", unity_at_point(&f, p, &plan, method)?, Vec::new()),
            None => {
                let sweep =
                    sample_unity(&f, &resolved.domain, &plan, method).map_err(derive_error)?;
                let points = sweep
                    .reports
                    .into_iter()
                    .map(|s| point_from_report(Some(s.sample_index), Some(s.attempt), s.report))
                    .collect();
                ("sampled", points, sweep.skipped)
            }
        };
        Some(UnitySection {
            mode,
            method,
            tolerance: method.unity_tolerance(),
            gradient_floor: GRADIENT_FLOOR,
            sum_to_one: summarize(&points, |p| p.sum_to_one),
            equal_shares: summarize(&points, |p| p.equal_shares),
            skipped,
            points,
        })
    } else {
        warnings.push("membership did not pass; unity claims were not evaluated".into());
        None
    };

    let status = match &unity {
        Some(u) => worst([
            membership_status,
            u.sum_to_one.status,
            u.equal_shares.status,
        ]),
        None => membership_status,
    };
    if status == Status::Degenerate {
        warnings.push("DEGENERATE: the gradient floor or a kink left the claims undecided".into());
    }
    let report = DeriveReport {
        schema_version: SCHEMA_VERSION,
        command: "derive",
        generated_at_unix: timestamp(&output),
        target: resolved.info,
        domain: resolved.domain.intervals().to_vec(),
        plan,
        membership,
        unity,
        warnings,
        status,
        exit_code: exit_code(status, strict),
    };
    if status == Status::Degenerate && !strict {
        eprintln!("warning: result is DEGENERATE (exit 0; use --strict-degenerate to fail)");
    }
    let body = match format {
        Format::Json => json(&report),
        _ => report.to_text(),
    };
    emit(&output, &body)?;
    Ok(report.exit_code)
}

pub fn cmd_enumerate(args: &EnumerateArgs) -> Result<i32, CliError> {
    let file = FileConfig::for_output(&args.output)?;
    let output = file.merge_output(&args.output)?;
    let m = args
        .m
        .or(file.m)
        .ok_or_else(|| CliError::Usage("--m is required".into()))?;
    let count_only = args.count_only || file.count_only.unwrap_or(false);
    let limit = if count_only {
        MAX_COUNT_M
    } else {
        MAX_ENUMERATE_M
    };
    if m == 0 || m > limit {
        let what = if count_only { "counting" } else { "listing" };
        return Err(CliError::Usage(format!(
            "m must be in 1..={limit} for {what}, got {m}"
        )));
    }
    let count = count_idempotent(m).map_err(|e| CliError::Usage(e.to_string()))?;
    let enumerated = if m <= MAX_ENUMERATE_M {
        Some(enumerate_idempotent(m).map_err(|e| CliError::Usage(e.to_string()))?)
    } else {
        None
    };
    if let Some(maps) = &enumerated {
        assert_eq!(
            maps.len() as u64,
            count,
            "closed form disagrees with enumeration"
        );
    }
    let report = EnumerateReport {
        schema_version: SCHEMA_VERSION,
        command: "enumerate",
        generated_at_unix: timestamp(&output),
        m,
        count,
        cross_checked: enumerated.is_some(),
        maps: if count_only {
            None
        } else {
            enumerated.map(|maps| maps.iter().map(|f| f.table().to_vec()).collect())
        },
    };
    let body = match output.format.unwrap_or(Format::Text) {
        Format::Json => json(&report),
        Format::Csv => report.to_csv(),
        Format::Text => report.to_text(),
    };
    emit(&output, &body)?;
    Ok(0)
}

pub fn cmd_catalog(args: &CatalogArgs) -> Result<i32, CliError> {
    let file = FileConfig::for_output(&args.output)?;
    let output = file.merge_output(&args.output)?;
    let body = match text_or_json(&output)? {
        Format::Json => json(&list_entries()),
        _ => reference_table(),
    };
    emit(&output, &body)?;
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn status_ordering() {
        assert_eq!(worst([Status::Pass, Status::Fail]), Status::Fail);
        assert_eq!(
            worst([Status::Fail, Status::DomainError]),
            Status::DomainError
        );
        assert_eq!(
            worst([Status::Degenerate, Status::Pass]),
            Status::Degenerate
        );
        assert_eq!(worst([]), Status::Pass);
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(Status::Degenerate, false), 0);
        assert_eq!(exit_code(Status::Degenerate, true), 1);
        assert_eq!(exit_code(Status::DomainError, false), 3);
    }

    #[test]
    fn plan_validation_is_a_usage_error() {
        let bad = PlanArgs {
            kmax: Some(1),
            ..PlanArgs::default()
        };
        assert_eq!(plan_from(&bad).unwrap_err().exit_code(), 2);
    }
}
