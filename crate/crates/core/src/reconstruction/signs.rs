use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::SignConvention;
use crate::verifier::ResidualReport;
use crate::Error;

/// Outcome of the residual ladder for one convention.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SignCandidate {
    pub convention: SignConvention,
    pub report: Option<ResidualReport>,
    pub error: Option<String>,
    pub converged: bool,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SignResolution {
    pub chosen: SignConvention,
    pub candidates: Vec<SignCandidate>,
}

/// Runs `check` (a convergence ladder of the Benney residual) for every
/// convention and records whether it converges at `min_order` or better.
pub fn sign_candidates<F>(conventions: &[SignConvention], min_order: f64, mut check: F) -> Vec<SignCandidate>
where
    F: FnMut(SignConvention) -> Result<ResidualReport, Error>,
{
    conventions
        .iter()
        .map(|&convention| match check(convention) {
            Ok(report) => {
                let converged = report.converged(min_order);
                SignCandidate { convention, report: Some(report), error: None, converged }
            }
            Err(e) => SignCandidate { convention, report: None, error: Some(e.to_string()), converged: false },
        })
        .collect()
}

/// The unique convention whose residual converges under refinement.
pub fn resolve_signs<F>(conventions: &[SignConvention], min_order: f64, check: F) -> Result<SignResolution, Error>
where
    F: FnMut(SignConvention) -> Result<ResidualReport, Error>,
{
    let candidates = sign_candidates(conventions, min_order, check);
    let winners: Vec<SignConvention> = candidates.iter().filter(|c| c.converged).map(|c| c.convention).collect();
    match winners.len() {
        0 => Err(Error::NoConvention),
        1 => Ok(SignResolution { chosen: winners[0], candidates }),
        count => Err(Error::DegenerateSigns { count }),
    }
}
