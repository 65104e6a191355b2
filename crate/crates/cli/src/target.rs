use ouroboros_core::catalog::{self, CatalogError, Flags};
use ouroboros_core::{DomainBox, Interval, Params, ScalarFunction, Target, VectorOperator};
use serde::Serialize;

use crate::args::TargetArgs;
use crate::error::CliError;

/// What the report says about the function under test.
#[derive(Debug, Clone, Serialize)]
pub struct TargetInfo {
    pub source: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub catalog: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<Params>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expression: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variables: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub operator: Option<VectorOperator>,
    pub arity: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub flags: Option<Flags>,
}

pub struct Resolved {
    pub info: TargetInfo,
    pub target: Target,
    pub domain: DomainBox,
}

pub fn parse_interval(text: &str) -> Result<Interval, CliError> {
    let bad = || CliError::Usage(format!("--box expects lo:hi with lo < hi, got `{text}`"));
    let (lo, hi) = text.split_once(':').ok_or_else(bad)?;
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    Interval::new(lo, hi).map_err(|_| bad())
}

fn build_domain(boxes: &[String], dim: usize, default: DomainBox) -> Result<DomainBox, CliError> {
    let intervals = boxes
        .iter()
        .map(|b| parse_interval(b))
        .collect::<Result<Vec<_>, _>>()?;
    let intervals = match intervals.len() {
        0 => return Ok(default),
        1 => vec![intervals[0]; dim],
        k if k == dim => intervals,
        k => {
            return Err(CliError::Usage(format!(
                "got {k} --box values for a function of {dim} variable(s)"
            )))
        }
    };
    DomainBox::new(intervals).map_err(|e| CliError::Usage(e.to_string()))
}

fn catalog_params(args: &TargetArgs) -> Result<Params, CliError> {
    let mut params = Params::new();
    for assignment in &args.params {
        params
            .parse_assignment(assignment)
            .map_err(CliError::Usage)?;
    }
    if let Some(n) = args.n {
        params.set("n", [n as f64]);
    }
    if let Some(w) = &args.w {
        params.set("w", w.clone());
    }
    Ok(params)
}

pub fn resolve(args: &TargetArgs) -> Result<Resolved, CliError> {
    match (&args.expr, &args.catalog) {
        (Some(src), None) => {
            if args.n.is_some() || args.w.is_some() || !args.params.is_empty() {
                return Err(CliError::Usage(
                    "--n, --w and --params apply to catalog entries only".into(),
                ));
            }
            let f = ScalarFunction::parse(src)
                .map_err(|e| CliError::Usage(format!("cannot parse --expr: {e}")))?;
            let n = f.arity();
            let domain = build_domain(
                &args.boxes,
                n,
                DomainBox::uniform(n, -10.0, 10.0).expect("default box"),
            )?;
            Ok(Resolved {
                info: TargetInfo {
                    source: "expression",
                    catalog: None,
                    params: None,
                    expression: Some(f.to_string()),
                    variables: Some(f.vars().to_vec()),
                    operator: None,
                    arity: n,
                    flags: None,
                },
                target: Target::Scalar(f),
                domain,
            })
        }
        (None, Some(name)) => {
            let params = catalog_params(args)?;
            let inst = catalog::instantiate(name, &params).map_err(|e| match e {
                CatalogError::UnknownEntry(_) | CatalogError::UnknownParam { .. } => {
                    CliError::Usage(e.to_string())
                }
                CatalogError::InvalidParam { .. } | CatalogError::Operator(_) => {
                    CliError::Domain(format!("invalid catalog parameters: {e}"))
                }
            })?;
            let dim = inst.dim();
            let domain = build_domain(&args.boxes, dim, inst.domain.clone())?;
            let (expression, variables, operator) = match &inst.target {
                Target::Scalar(f) => (Some(f.to_string()), Some(f.vars().to_vec()), None),
                Target::Operator(op) => (None, None, Some(op.clone())),
            };
            Ok(Resolved {
                info: TargetInfo {
                    source: "catalog",
                    catalog: Some(inst.entry.name),
                    params: Some(params),
                    expression,
                    variables,
                    operator,
                    arity: dim,
                    flags: Some(inst.entry.flags),
                },
                target: inst.target,
                domain,
            })
        }
        (Some(_), Some(_)) => Err(CliError::Usage(
            "give either --expr or --catalog, not both".into(),
        )),
        (None, None) => Err(CliError::Usage(
            "one of --expr or --catalog is required".into(),
        )),
    }
}
