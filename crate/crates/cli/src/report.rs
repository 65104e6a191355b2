//! Report documents. JSON is the serde form of these structs; the text
//! form is rendered from the same values, so both carry identical verdicts
//! and witnesses.

use std::fmt::Write as _;

use ouroboros_core::deriv::{ClaimTally, KinkSite, Method};
use ouroboros_core::expr::Kink;
use ouroboros_core::{Interval, SamplePlan, Status, UnityReport, Verdict};
use serde::Serialize;

use crate::target::TargetInfo;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct CheckReport {
    pub schema_version: u32,
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_at_unix: Option<u64>,
    pub target: TargetInfo,
    pub domain: Vec<Interval>,
    pub plan: SamplePlan,
    pub checks: Vec<Verdict>,
    pub status: Status,
    pub exit_code: i32,
}

#[derive(Debug, Serialize)]
pub struct DeriveReport {
    pub schema_version: u32,
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_at_unix: Option<u64>,
    pub target: TargetInfo,
    pub domain: Vec<Interval>,
    pub plan: SamplePlan,
    /// Absent with `--skip-membership`.
    pub membership: Option<Vec<Verdict>>,
    /// Absent when membership did not pass.
    pub unity: Option<UnitySection>,
    pub warnings: Vec<String>,
    pub status: Status,
    pub exit_code: i32,
}

#[derive(Debug, Serialize)]
pub struct UnitySection {
    pub mode: &'static str,
    pub method: Method,
    pub tolerance: f64,
    pub gradient_floor: f64,
    pub sum_to_one: ClaimSummary,
    pub equal_shares: ClaimSummary,
    /// Sample indices abandoned after the kink retries ran out.
    pub skipped: Vec<u64>,
    pub points: Vec<UnityPoint>,
}

#[derive(Debug, Serialize)]
pub struct ClaimSummary {
    pub status: Status,
    #[serde(flatten)]
    pub tally: ClaimTally,
    /// First failing point, in sample order.
    pub witness: Option<ClaimWitness>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClaimWitness {
    pub sample_index: Option<u64>,
    pub point: Vec<f64>,
    pub shares: Vec<f64>,
    pub share_sum: f64,
    pub max_share_deviation: f64,
}

#[derive(Debug, Serialize)]
pub struct UnityPoint {
    pub sample_index: Option<u64>,
    pub attempt: Option<u32>,
    pub point: Vec<f64>,
    pub sum_to_one: Status,
    pub equal_shares: Status,
    /// `GRADIENT_FLOOR` or `KINK` when the claims are DEGENERATE.
    pub reason: Option<&'static str>,
    pub kink: Option<KinkDetail>,
    pub report: Option<UnityReport>,
}

#[derive(Debug, Serialize)]
pub struct KinkDetail {
    pub site: KinkSite,
    #[serde(flatten)]
    pub kink: Kink,
}

#[derive(Debug, Serialize)]
pub struct EnumerateReport {
    pub schema_version: u32,
    pub command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generated_at_unix: Option<u64>,
    pub m: usize,
    pub count: u64,
    /// Whether the closed-form count was compared with an enumeration.
    pub cross_checked: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub maps: Option<Vec<Vec<usize>>>,
}

fn vector(v: &[f64]) -> String {
    let items: Vec<String> = v.iter().map(|x| format!("{x:?}")).collect();
    format!("[{}]", items.join(", "))
}

fn interval_list(domain: &[Interval]) -> String {
    let first = domain[0];
    if domain.iter().all(|iv| *iv == first) {
        format!("[{:?}, {:?}]^{}", first.lo, first.hi, domain.len())
    } else {
        domain
            .iter()
            .map(|iv| format!("[{:?}, {:?}]", iv.lo, iv.hi))
            .collect::<Vec<_>>()
            .join(" x ")
    }
}

fn target_lines(out: &mut String, t: &TargetInfo) {
    match (t.catalog, &t.expression, &t.operator) {
        (Some(name), Some(e), _) => {
            let _ = writeln!(out, "target: {e}  (catalog {name}, arity {})", t.arity);
        }
        (Some(name), None, Some(op)) => {
            let _ = writeln!(
                out,
                "target: {op:?}  (catalog {name}, dimension {})",
                t.arity
            );
        }
        (_, Some(e), _) => {
            let _ = writeln!(out, "target: {e}  (arity {})", t.arity);
        }
        _ => {}
    }
    if let Some(vars) = &t.variables {
        let _ = writeln!(out, "variables: {}", vars.join(", "));
    }
    if let Some(f) = t.flags {
        let _ = writeln!(
            out,
            "flags: smooth={} symmetric={} exact_fixed_points={}",
            f.smooth, f.symmetric, f.exact_fixed_points
        );
    }
}

fn plan_line(out: &mut String, domain: &[Interval], plan: &SamplePlan) {
    let _ = writeln!(out, "domain: {}", interval_list(domain));
    let _ = writeln!(
        out,
        "plan: seed {}, {} samples, atol {:?}, rtol {:?}, k_max {}",
        plan.seed, plan.sample_count, plan.atol, plan.rtol, plan.k_max
    );
}

pub fn verdict_lines(out: &mut String, v: &Verdict) {
    let _ = write!(out, "{}: {}", v.check.as_str(), v.status);
    if let Some(r) = v.reason {
        let _ = write!(out, " ({})", r.as_str());
    }
    let _ = writeln!(
        out,
        "  evaluated {}, skipped {}, violations {}, max residual {:?}",
        v.samples_evaluated, v.samples_skipped, v.violations, v.max_residual
    );
    if let Some(w) = &v.witness {
        let _ = write!(
            out,
            "  witness: sample {}, x = {}",
            w.sample_index,
            vector(&w.point)
        );
        if !w.value.is_empty() {
            let _ = write!(out, ", f(x) = {}", vector(&w.value));
        }
        if !w.self_applied.is_empty() {
            let _ = write!(out, ", self-applied = {}", vector(&w.self_applied));
        }
        if let Some(k) = w.iteration {
            let _ = write!(out, ", k = {k}");
        }
        let _ = writeln!(
            out,
            ", residual {:?}, tolerance {:?}",
            w.residual, w.tolerance
        );
        if let Some(d) = &w.detail {
            let _ = writeln!(out, "  detail: {d}");
        }
    }
    if let Some(ext) = v.extension {
        let _ = writeln!(out, "  note: {ext}");
    }
}

impl CheckReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        target_lines(&mut out, &self.target);
        plan_line(&mut out, &self.domain, &self.plan);
        for v in &self.checks {
            verdict_lines(&mut out, v);
        }
        let _ = writeln!(out, "result: {}", self.status);
        out
    }
}

fn claim_lines(out: &mut String, name: &str, c: &ClaimSummary) {
    let _ = writeln!(
        out,
        "{name}: {}  (pass {}, fail {}, degenerate {})",
        c.status, c.tally.pass, c.tally.fail, c.tally.degenerate
    );
    if let Some(w) = &c.witness {
        let index = w
            .sample_index
            .map_or_else(|| "point".to_string(), |i| format!("sample {i}"));
        let _ = writeln!(
            out,
            "  witness: {index}, x = {}, shares {}, sum {:?}, max |share - 1/n| {:?}",
            vector(&w.point),
            vector(&w.shares),
            w.share_sum,
            w.max_share_deviation
        );
    }
}

fn point_lines(out: &mut String, p: &UnityPoint) {
    let _ = writeln!(out, "point {}:", vector(&p.point));
    if let Some(k) = &p.kink {
        let site = match k.site {
            KinkSite::Point => "sampled point",
            KinkSite::Diagonal => "diagonal point",
        };
        let _ = writeln!(out, "  kink at the {site}: {}", k.kink);
    }
    if let Some(r) = &p.report {
        let _ = writeln!(out, "  f(x) = {:?}", r.diagonal_value);
        let _ = writeln!(out, "  outer gradient: {}", vector(&r.outer_gradient));
        if let (Some(shares), Some(sum)) = (&r.shares, r.share_sum) {
            let _ = writeln!(out, "  shares: {}", vector(shares));
            let _ = writeln!(out, "  sum: {sum:?}");
        }
    }
    let reason = p.reason.map(|r| format!(" ({r})")).unwrap_or_default();
    let _ = writeln!(out, "  sum_to_one: {}{reason}", p.sum_to_one);
    let _ = writeln!(out, "  equal_shares: {}{reason}", p.equal_shares);
}

impl DeriveReport {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        target_lines(&mut out, &self.target);
        plan_line(&mut out, &self.domain, &self.plan);
        match &self.membership {
            Some(checks) => checks.iter().for_each(|v| verdict_lines(&mut out, v)),
            None => out.push_str("membership: skipped\n"),
        }
        if let Some(u) = &self.unity {
            let _ = writeln!(
                out,
                "method: {} (tolerance {:?}, gradient floor {:?})",
                u.method.as_str(),
                u.tolerance,
                u.gradient_floor
            );
            if u.mode == "point" {
                u.points.iter().for_each(|p| point_lines(&mut out, p));
            } else {
                let _ = writeln!(
                    out,
                    "sampled {} point(s), {} skipped after kink retries",
                    u.points.len(),
                    u.skipped.len()
                );
            }
            claim_lines(&mut out, "sum_to_one", &u.sum_to_one);
            claim_lines(&mut out, "equal_shares", &u.equal_shares);
        }
        for w in &self.warnings {
            let _ = writeln!(out, "warning: {w}");
        }
        let _ = writeln!(out, "result: {}", self.status);
        out
    }
}

impl EnumerateReport {
    pub fn to_text(&self) -> String {
        match &self.maps {
            None => format!("{}\n", self.count),
            Some(maps) => {
                let mut out = format!("m = {}: {} idempotent map(s)\n", self.m, self.count);
                for m in maps {
                    let items: Vec<String> = m.iter().map(usize::to_string).collect();
                    let _ = writeln!(out, "[{}]", items.join(", "));
                }
                out
            }
        }
    }

    pub fn to_csv(&self) -> String {
        match &self.maps {
            None => format!("m,count\n{},{}\n", self.m, self.count),
            Some(maps) => {
                let mut out = String::new();
                for m in maps {
                    let items: Vec<String> = m.iter().map(usize::to_string).collect();
                    let _ = writeln!(out, "{}", items.join(","));
                }
                out
            }
        }
    }
}
