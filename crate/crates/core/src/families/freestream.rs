use alloc::boxed::Box;

use super::{BoundaryPair, Distribution, DistributionColumn, Provenance};
use crate::expr::ExprAst;
use crate::numerics::{expand_bracket, find_root, GridSpec, Tolerance};
use crate::Error;

/// The `h = 0` branch: `G(t,x,λ) = G0(x + λt, λ)` and `ν` from the level set
/// `G0(x + νt, ν) = g_lo`.
#[derive(Debug, Clone)]
pub struct FreestreamFamily {
    g0: ExprAst,
    g_lo: f64,
    lambda_limits: (f64, f64),
    seed: f64,
    tol: Tolerance,
}

const BRACKET_STEP: f64 = 0.25;
const BRACKET_STEPS: usize = 64;
const VALIDATION_NODES: usize = 17;

impl FreestreamFamily {
    /// `g0` is an expression in `xi` and `lambda`. Every `(t, x)` node of
    /// `domain` (subsampled) must have a bracketed `ν`.
    pub fn new(
        g0: &str,
        g_lo: f64,
        lambda_limits: (f64, f64),
        domain: &GridSpec,
        tol: Tolerance,
    ) -> Result<Self, Error> {
        let g0 = ExprAst::parse(g0, &["xi", "lambda"]).map_err(|e| Error::parse("G0", e))?;
        if !(lambda_limits.0 < lambda_limits.1) {
            return Err(Error::invalid("lambda_limits", "lower limit must be below upper"));
        }
        let seed = 0.0f64.clamp(lambda_limits.0, lambda_limits.1);
        let fam = Self { g0, g_lo, lambda_limits, seed, tol };
        let t_axis = domain.axis_named("t").unwrap_or_else(|| domain.axis(0));
        let x_axis = domain.axis_named("x").unwrap_or_else(|| domain.axis(1.min(domain.dim() - 1)));
        let sub = |n: usize, k: usize| k * (n - 1) / (VALIDATION_NODES.min(n) - 1);
        for i in 0..VALIDATION_NODES.min(t_axis.count) {
            for j in 0..VALIDATION_NODES.min(x_axis.count) {
                let (t, x) = (t_axis.node(sub(t_axis.count, i)), x_axis.node(sub(x_axis.count, j)));
                fam.nu(t, x)?;
            }
        }
        Ok(fam)
    }

    pub fn g_lo(&self) -> f64 {
        self.g_lo
    }

    fn g(&self, t: f64, x: f64, lambda: f64) -> Result<f64, Error> {
        Ok(self.g0.eval_at(&[x + lambda * t, lambda])?)
    }
}

struct FreestreamColumn<'a> {
    fam: &'a FreestreamFamily,
    t: f64,
    x: f64,
}

impl DistributionColumn for FreestreamColumn<'_> {
    fn g(&self, lambda: f64) -> Result<f64, Error> {
        self.fam.g(self.t, self.x, lambda)
    }

    fn range(&self) -> Option<(f64, f64)> {
        Some(self.fam.lambda_limits)
    }
}

impl Distribution for FreestreamFamily {
    fn column(&self, t: f64, x: f64) -> Result<Box<dyn DistributionColumn + '_>, Error> {
        Ok(Box::new(FreestreamColumn { fam: self, t, x }))
    }

    fn provenance(&self) -> Provenance {
        Provenance::FreeStreaming
    }
}

impl BoundaryPair for FreestreamFamily {
    fn boundary(&self, t: f64, x: f64) -> Result<(f64, Option<f64>), Error> {
        let f = |l: f64| self.g(t, x, l).map(|g| g - self.g_lo).unwrap_or(f64::NAN);
        let bracket = expand_bracket(f, self.seed, BRACKET_STEP, self.lambda_limits.1, BRACKET_STEPS)
            .or_else(|_| expand_bracket(f, self.seed, BRACKET_STEP, self.lambda_limits.0, BRACKET_STEPS))
            .map_err(|_| Error::Bracket { what: "nu", t, x })?;
        let nu = find_root(f, bracket.0, bracket.1, &self.tol)?;
        Ok((nu, None))
    }
}
