//! Families built from a [`RunConfig`] and the field views they expose.

use benney_core::expr::ExprAst;
use benney_core::families::{theta_separable, ConstFamily, FreestreamFamily, HodographTheta, InvertedG};
use benney_core::families::{RationalFamily, RationalParams};
use benney_core::reconstruction::{LambdaFields, MomentFields, PerturbedFields};
use benney_core::{BoundaryPair, Distribution, Fields, LambdaFamily, SignConvention, Tolerance};

use crate::config::{FamilyConfig, RunConfig, ThetaConfig};
use crate::error::CliError;

pub enum Model {
    Freestream(FreestreamFamily),
    Const(ConstFamily),
    /// One family per sign of `Φ`.
    Rational {
        plus: InvertedG<RationalFamily>,
        minus: InvertedG<RationalFamily>,
    },
}

/// Signs reported for a family whose depth vanishes identically.
pub const FREESTREAM_SIGNS: SignConvention = SignConvention { s_h: -1.0, s_phi: 1.0 };

impl Model {
    pub fn build(cfg: &RunConfig) -> Result<Self, CliError> {
        let tol = cfg.tolerance()?;
        let domain = {
            let g = cfg.generation_grid();
            benney_core::GridSpec::new(vec![g.axis(0).clone(), g.axis(1).clone()]).expect("valid")
        };
        Ok(match &cfg.family {
            FamilyConfig::Freestream { g0, g_lo, lambda_limits } => Model::Freestream(
                FreestreamFamily::new(g0, *g_lo, (lambda_limits[0], lambda_limits[1]), &domain, tol)
                    .map_err(CliError::from_build)?,
            ),
            FamilyConfig::ConstTheta { a, theta, guess } => {
                let theta = match theta {
                    ThetaConfig::Expr(src) => HodographTheta::from_expr(src, *a),
                    ThetaConfig::Separable { k, r_range, steps } => {
                        theta_separable(*k, *a, (r_range[0], r_range[1]), *steps)
                    }
                }
                .map_err(CliError::from_build)?;
                Model::Const(ConstFamily::new(theta, &domain, (guess[0], guess[1]), tol).map_err(CliError::from_build)?)
            }
            FamilyConfig::Rational { u, v, g_lo, g_hi, t_range } => {
                let t_range = (t_range[0], t_range[1]);
                if cfg.domain.t[0] < t_range.0 || cfg.domain.t[1] > t_range.1 {
                    return Err(CliError::Config("`t_range`: must contain `domain.t`".into()));
                }
                let build = |sign| {
                    let p = RationalParams::parse(u, v, *g_lo, *g_hi, sign).map_err(CliError::from_build)?;
                    let fam = RationalFamily::with_t_range(p, t_range).map_err(CliError::from_build)?;
                    Ok::<_, CliError>(InvertedG::new(fam, tol))
                };
                Model::Rational { plus: build(1.0)?, minus: build(-1.0)? }
            }
        })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Model::Freestream(_) => "freestream",
            Model::Const(_) => "const_theta",
            Model::Rational { .. } => "rational",
        }
    }

    /// Conventions that sign resolution chooses between. Empty when the
    /// fields do not depend on the signs.
    pub fn candidates(&self) -> Vec<SignConvention> {
        match self {
            Model::Freestream(_) => Vec::new(),
            Model::Const(_) => vec![SignConvention { s_h: 1.0, s_phi: 1.0 }, SignConvention { s_h: -1.0, s_phi: 1.0 }],
            Model::Rational { .. } => SignConvention::ALL.to_vec(),
        }
    }

    pub fn rational(&self, conv: SignConvention) -> Option<&InvertedG<RationalFamily>> {
        match self {
            Model::Rational { plus, minus } => Some(if conv.s_phi > 0.0 { plus } else { minus }),
            _ => None,
        }
    }

    pub fn lambda_family(&self, conv: SignConvention) -> Option<&dyn LambdaFamily> {
        self.rational(conv).map(|f| f.family() as &dyn LambdaFamily)
    }

    pub fn distribution(&self, conv: SignConvention) -> &dyn Distribution {
        match self {
            Model::Freestream(f) => f,
            Model::Const(f) => f,
            Model::Rational { .. } => self.rational(conv).expect("rational"),
        }
    }

    pub fn pair(&self, conv: SignConvention) -> &dyn BoundaryPair {
        match self {
            Model::Freestream(f) => f,
            Model::Const(f) => f,
            Model::Rational { .. } => self.rational(conv).expect("rational"),
        }
    }

    /// Benney fields: the λ route for the rational family, moments otherwise.
    pub fn fields(&self, conv: SignConvention, tol: Tolerance) -> Box<dyn Fields + '_> {
        match self.lambda_family(conv) {
            Some(fam) => Box::new(LambdaFields::new(fam, conv, tol)),
            None => Box::new(MomentFields::new(self.distribution(conv), self.pair(conv), conv, tol)),
        }
    }

    /// [`Model::fields`] with `v` perturbed by `perturb_v`, when configured.
    pub fn fields_for(&self, cfg: &RunConfig, conv: SignConvention) -> Result<Box<dyn Fields + '_>, CliError> {
        let tol = cfg.tolerance()?;
        let base = self.fields(conv, tol);
        let Some(src) = &cfg.perturb_v else { return Ok(base) };
        let expr = ExprAst::parse(src, &["t", "x", "y"]).map_err(|e| CliError::Config(format!("`perturb_v`: {e}")))?;
        Ok(Box::new(PerturbedFields::new(base, move |t, x, y| expr.eval_at(&[t, x, y]).unwrap_or(f64::NAN))))
    }
}
