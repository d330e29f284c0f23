//! Report types and file output.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use benney_core::verifier::{FitStatus, ResidualEntry};
use benney_core::SignConvention;
use serde::Serialize;

use crate::error::CliError;

/// How a check is judged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Rule {
    /// The fitted order over the ladder is at least this.
    Order(f64),
    /// The finest-level L∞ norm is at most this.
    Threshold(f64),
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub rule: Rule,
    pub linf: f64,
    pub l2: f64,
    pub samples: usize,
    pub masked: usize,
    /// `(spacing, L∞)` per ladder level, coarse to fine.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<(f64, f64)>>,
    #[serde(skip)]
    pub order: Option<OrderSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub passed: bool,
}

impl CheckResult {
    pub fn judge(entry: &ResidualEntry, rule: Rule) -> Self {
        let fit = entry.convergence.as_ref();
        let passed = entry.samples > 0
            && match rule {
                Rule::Order(min) => fit.is_some_and(|f| f.passes(min)),
                Rule::Threshold(tol) => entry.linf <= tol,
            };
        CheckResult {
            name: entry.name.clone(),
            rule,
            linf: entry.linf,
            l2: entry.l2,
            samples: entry.samples,
            masked: entry.masked,
            levels: fit.map(|f| f.levels.clone()),
            order: OrderSummary::of(entry),
            error: None,
            passed,
        }
    }

    pub fn failed(name: &str, rule: Rule, error: String) -> Self {
        CheckResult {
            name: name.into(),
            rule,
            linf: f64::NAN,
            l2: f64::NAN,
            samples: 0,
            masked: 0,
            levels: None,
            order: None,
            error: Some(error),
            passed: false,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderSummary {
    pub status: FitStatus,
    pub order: Option<f64>,
    pub floor: f64,
}

impl OrderSummary {
    pub fn of(entry: &ResidualEntry) -> Option<Self> {
        entry.convergence.as_ref().map(|f| OrderSummary { status: f.status, order: f.order(), floor: f.floor })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CandidateSummary {
    pub convention: SignConvention,
    pub converged: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub orders: BTreeMap<String, Option<OrderSummary>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SignsReport {
    /// `auto`, `forced` or `not_applicable`.
    pub mode: &'static str,
    pub chosen: SignConvention,
    pub candidates: Vec<CandidateSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub family: &'static str,
    pub residuals: Vec<CheckResult>,
    pub orders: BTreeMap<String, OrderSummary>,
    pub signs: SignsReport,
    pub masked_fraction: f64,
    pub passed: bool,
    pub first_failure: Option<String>,
}

impl VerifyReport {
    pub fn new(family: &'static str, signs: SignsReport, masked_fraction: f64, residuals: Vec<CheckResult>) -> Self {
        let mut orders = BTreeMap::new();
        for r in &residuals {
            if let (Rule::Order(_), Some(o)) = (r.rule, &r.order) {
                orders.insert(r.name.clone(), o.clone());
            }
        }
        let first_failure = residuals.iter().find(|r| !r.passed).map(|r| r.name.clone());
        VerifyReport {
            family,
            passed: first_failure.is_none(),
            first_failure,
            residuals,
            orders,
            signs,
            masked_fraction,
        }
    }

    pub fn table(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{:<22} {:>12} {:>10} {:>12}  result", "check", "linf", "order", "rule");
        for r in &self.residuals {
            let order = self
                .orders
                .get(&r.name)
                .map(|o| match o.order {
                    Some(v) => format!("{v:.3}"),
                    None => format!("{:?}", o.status),
                })
                .unwrap_or_else(|| "-".into());
            let rule = match r.rule {
                Rule::Order(m) => format!(">= {m}"),
                Rule::Threshold(t) => format!("<= {t:e}"),
            };
            let _ = writeln!(
                s,
                "{:<22} {:>12.3e} {:>10} {:>12}  {}",
                r.name,
                r.linf,
                order,
                rule,
                if r.passed { "pass" } else { "FAIL" }
            );
        }
        let c = self.signs.chosen;
        let _ = writeln!(s, "signs: s_h = {}, s_phi = {} ({})", c.s_h, c.s_phi, self.signs.mode);
        let _ = writeln!(s, "masked fraction: {}", self.masked_fraction);
        s
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| CliError::io(path, e))
}

/// Appends a timestamped line to `run.log`; the only place wall-clock time appears.
pub fn log(out: &Path, line: &str) {
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
    if let Ok(mut f) = std::fs::OpenOptions::new().create(true).append(true).open(out.join("run.log")) {
        let _ = writeln!(f, "{secs} {line}");
    }
}
