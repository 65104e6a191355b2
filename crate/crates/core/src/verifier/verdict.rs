use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Pass,
    Fail,
    Degenerate,
    DomainError,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Degenerate => "DEGENERATE",
            Status::DomainError => "DOMAIN_ERROR",
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Why a sample violated membership.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FailReason {
    /// `f(x)` left the domain, so it is not a legal input to `f`.
    RangeEscape,
    /// `|f(f(x)) − f(x)|` exceeded tolerance.
    NotIdempotent,
    /// A k-fold self-application drifted away from `f(x)`.
    IterationDrift,
}

impl FailReason {
    pub fn as_str(self) -> &'static str {
        match self {
            FailReason::RangeEscape => "RANGE_ESCAPE",
            FailReason::NotIdempotent => "NOT_IDEMPOTENT",
            FailReason::IterationDrift => "ITERATION_DRIFT",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    UnivariateMembership,
    MultivariateMembership,
    Iterated,
    OperatorIdempotence,
    OperatorIterated,
}

impl CheckKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckKind::UnivariateMembership => "univariate_membership",
            CheckKind::MultivariateMembership => "multivariate_membership",
            CheckKind::Iterated => "iterated",
            CheckKind::OperatorIdempotence => "operator_idempotence",
            CheckKind::OperatorIterated => "operator_iterated",
        }
    }
}

/// Evidence for a non-PASS verdict.
///
/// `value` is `f(x)` (`P(x)` for operators) and `self_applied` is
/// `f(f(x), …)`, or the k-fold iterate for drift failures. Scalar
/// functions store one-element vectors. For `RANGE_ESCAPE` the residual is
/// the distance from `f(x)` to the domain interval and `self_applied` is
/// empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Witness {
    pub sample_index: u64,
    pub point: Vec<f64>,
    pub value: Vec<f64>,
    pub self_applied: Vec<f64>,
    pub residual: f64,
    pub tolerance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub iteration: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// Outcome of a sampled check. PASS means no violation was found among
/// `samples_evaluated` points, nothing more.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub check: CheckKind,
    pub status: Status,
    pub reason: Option<FailReason>,
    pub witness: Option<Witness>,
    pub samples_evaluated: usize,
    pub samples_skipped: usize,
    pub violations: usize,
    /// Largest `|f(f(x)) − f(x)|` (membership) or drift (iterated) seen.
    pub max_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub extension: Option<&'static str>,
}

impl Verdict {
    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}
