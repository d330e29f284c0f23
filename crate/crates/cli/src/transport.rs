//! Conservation of `G` along characteristics over a ladder of steps.

use benney_core::expr::ExprAst;
use benney_core::families::{DistributionColumn, Provenance};
use benney_core::transport::{conservation_check, family_forcing};
use benney_core::verifier::{attach_fits, ResidualEntry};
use benney_core::{Distribution, Error, ResidualReport};
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{FamilyConfig, Forcing, RunConfig, TransportConfig};
use crate::error::CliError;
use crate::model::Model;
use crate::report::{OrderSummary, SignsReport};
use crate::suite::resolve;

/// Free streaming under a uniform force `c`: `G = G0(x + λt − ct²/2, λ − ct)`.
pub struct ForcedStream {
    g0: ExprAst,
    c: f64,
}

impl ForcedStream {
    pub fn new(g0: &str, c: f64) -> Result<Self, CliError> {
        let g0 = ExprAst::parse(g0, &["xi", "lambda"]).map_err(|e| CliError::Config(format!("`g0`: {e}")))?;
        Ok(Self { g0, c })
    }
}

struct ForcedColumn<'a> {
    dist: &'a ForcedStream,
    t: f64,
    x: f64,
}

impl DistributionColumn for ForcedColumn<'_> {
    fn g(&self, lambda: f64) -> Result<f64, Error> {
        let (t, c) = (self.t, self.dist.c);
        Ok(self.dist.g0.eval_at(&[self.x + lambda * t - 0.5 * c * t * t, lambda - c * t])?)
    }

    fn range(&self) -> Option<(f64, f64)> {
        None
    }
}

impl Distribution for ForcedStream {
    fn column(&self, t: f64, x: f64) -> Result<Box<dyn DistributionColumn + '_>, Error> {
        Ok(Box::new(ForcedColumn { dist: self, t, x }))
    }

    fn provenance(&self) -> Provenance {
        Provenance::FreeStreaming
    }
}

#[derive(Debug, Serialize)]
pub struct TransportReport {
    pub family: &'static str,
    pub forcing: Forcing,
    pub signs: SignsReport,
    pub t: [f64; 2],
    pub seeds: usize,
    pub conservation: ResidualEntry,
    pub order: Option<OrderSummary>,
    pub min_order: f64,
    pub passed: bool,
    pub first_failure: Option<String>,
}

type Forcer<'a> = Box<dyn Fn(f64, f64) -> Result<f64, Error> + Sync + 'a>;

pub fn transport(cfg: &RunConfig, model: &Model) -> Result<TransportReport, CliError> {
    let tc: &TransportConfig =
        cfg.transport.as_ref().ok_or_else(|| CliError::Config("`transport`: section missing".into()))?;
    let tol = cfg.tolerance()?;
    let signs = resolve(cfg, model, tol).map_err(|e| CliError::Verification(format!("sign resolution: {e}")))?;
    let conv = signs.chosen;
    let forced;
    let (dist, hxx): (&dyn Distribution, Forcer) = match (model, tc.forcing, &cfg.family) {
        (Model::Freestream(f), Forcing::Family, _) => (f, Box::new(|_, _| Ok(0.0))),
        (Model::Freestream(_), Forcing::Constant(c), FamilyConfig::Freestream { g0, .. }) => {
            forced = ForcedStream::new(g0, c)?;
            (&forced, Box::new(move |_, _| Ok(c)))
        }
        (Model::Rational { .. }, Forcing::Family, _) => {
            let fam = model.lambda_family(conv).expect("rational");
            (model.distribution(conv), Box::new(family_forcing(fam, conv.s_h, tol)))
        }
        _ => {
            return Err(CliError::Config(
                "`transport.forcing`: supported are freestream with either forcing and rational with its own".into(),
            ))
        }
    };
    let seeds = tc.seeds();
    let times = (tc.t[0], tc.t[1]);
    let x_box = (tc.x_box[0], tc.x_box[1]);
    let reports = tc
        .dts
        .par_iter()
        .map(|&dt| Ok((dt, conservation_check(dist, &*hxx, &seeds, times, dt, x_box)?)))
        .collect::<Result<Vec<(f64, ResidualReport)>, Error>>()
        .map_err(|e| CliError::Verification(format!("conservation: {e}")))?;
    let report = attach_fits(reports, tc.floor);
    let entry = report.get("conservation").expect("single entry").clone();
    let passed = entry.convergence.as_ref().is_some_and(|f| f.passes(tc.min_order));
    Ok(TransportReport {
        family: model.kind(),
        forcing: tc.forcing,
        signs,
        t: tc.t,
        seeds: seeds.len(),
        order: OrderSummary::of(&entry),
        conservation: entry,
        min_order: tc.min_order,
        passed,
        first_failure: (!passed).then(|| "conservation".to_string()),
    })
}
