//! Optional TOML run file. Keys mirror the long flag names with `-` or `_`;
//! any flag given on the command line replaces the file's value.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::args::{Format, MethodArg, OutputArgs, PlanArgs, TargetArgs};
use crate::error::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    One(f64),
    Many(Vec<f64>),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub expr: Option<String>,
    pub catalog: Option<String>,
    pub n: Option<usize>,
    pub w: Option<Vec<f64>>,
    pub params: Option<BTreeMap<String, ParamValue>>,
    #[serde(rename = "box")]
    pub boxes: Option<Vec<String>>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub atol: Option<f64>,
    pub rtol: Option<f64>,
    pub kmax: Option<u32>,
    pub point: Option<Vec<f64>>,
    pub method: Option<String>,
    #[serde(alias = "skip_membership")]
    pub skip_membership: Option<bool>,
    #[serde(alias = "strict_degenerate")]
    pub strict_degenerate: Option<bool>,
    pub m: Option<usize>,
    #[serde(alias = "count_only")]
    pub count_only: Option<bool>,
    pub format: Option<String>,
    pub out: Option<PathBuf>,
    pub timestamp: Option<bool>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<FileConfig, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text)
            .map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }

    pub fn for_output(output: &OutputArgs) -> Result<FileConfig, CliError> {
        match &output.config {
            Some(path) => FileConfig::load(path),
            None => Ok(FileConfig::default()),
        }
    }

    /// Flags first, then the file.
    pub fn merge_target(&self, flags: &TargetArgs) -> TargetArgs {
        let (expr, catalog) = if flags.expr.is_some() || flags.catalog.is_some() {
            (flags.expr.clone(), flags.catalog.clone())
        } else {
            (self.expr.clone(), self.catalog.clone())
        };
        let mut params: Vec<String> = self
            .params
            .iter()
            .flatten()
            .map(|(k, v)| {
                let values = match v {
                    ParamValue::One(x) => vec![*x],
                    ParamValue::Many(xs) => xs.clone(),
                };
                let joined: Vec<String> = values.iter().map(f64::to_string).collect();
                format!("{k}={}", joined.join(","))
            })
            .collect();
        // later assignments win, so flag params go last
        params.extend(flags.params.iter().cloned());
        TargetArgs {
            expr,
            catalog,
            n: flags.n.or(self.n),
            w: flags.w.clone().or_else(|| self.w.clone()),
            params,
            boxes: if flags.boxes.is_empty() {
                self.boxes.clone().unwrap_or_default()
            } else {
                flags.boxes.clone()
            },
        }
    }

    pub fn merge_plan(&self, flags: &PlanArgs) -> PlanArgs {
        PlanArgs {
            samples: flags.samples.or(self.samples),
            seed: flags.seed.or(self.seed),
            atol: flags.atol.or(self.atol),
            rtol: flags.rtol.or(self.rtol),
            kmax: flags.kmax.or(self.kmax),
        }
    }

    pub fn merge_output(&self, flags: &OutputArgs) -> Result<OutputArgs, CliError> {
        let format = match (flags.format, &self.format) {
            (Some(f), _) => Some(f),
            (None, Some(s)) => Some(parse_enum::<Format>(s, "format")?),
            (None, None) => None,
        };
        Ok(OutputArgs {
            format,
            out: flags.out.clone().or_else(|| self.out.clone()),
            config: flags.config.clone(),
            timestamp: flags.timestamp || self.timestamp.unwrap_or(false),
        })
    }

    pub fn method(&self, flag: Option<MethodArg>) -> Result<Option<MethodArg>, CliError> {
        match (flag, &self.method) {
            (Some(m), _) => Ok(Some(m)),
            (None, Some(s)) => parse_enum::<MethodArg>(s, "method").map(Some),
            (None, None) => Ok(None),
        }
    }
}

fn parse_enum<T: clap::ValueEnum>(s: &str, key: &str) -> Result<T, CliError> {
    T::from_str(s, true)
        .map_err(|_| CliError::Usage(format!("config key `{key}`: unknown value `{s}`")))
}
