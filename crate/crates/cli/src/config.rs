//! The JSON run configuration.

use std::path::Path;

use benney_core::numerics::Axis;
use benney_core::{GridSpec, SignConvention, Tolerance};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub family: FamilyConfig,
    pub domain: Domain,
    /// Node counts of the generation grid along `(t, x, y)`.
    #[serde(default = "default_generation")]
    pub generation: [usize; 3],
    /// Interval counts per axis, each double the previous.
    #[serde(default = "default_ladder")]
    pub ladder: Vec<usize>,
    /// Probe lattice nodes per axis (ends included, then dropped).
    #[serde(default = "default_probes")]
    pub probes: usize,
    #[serde(default)]
    pub tolerance: ToleranceConfig,
    #[serde(default)]
    pub sign_mode: SignMode,
    #[serde(default = "default_min_order")]
    pub min_order: f64,
    #[serde(default)]
    pub checks: CheckConfig,
    /// Expression in `t, x, y` added to `v`; a negative-control fixture.
    #[serde(default)]
    pub perturb_v: Option<String>,
    #[serde(default)]
    pub transport: Option<TransportConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilyConfig {
    Freestream {
        /// `G0(xi, lambda)` with `xi = x + λt`.
        g0: String,
        g_lo: f64,
        lambda_limits: [f64; 2],
    },
    ConstTheta {
        a: f64,
        theta: ThetaConfig,
        /// `(μ, ν)` at `(t_min, x_min)`.
        guess: [f64; 2],
    },
    Rational {
        u: String,
        v: String,
        g_lo: f64,
        g_hi: f64,
        t_range: [f64; 2],
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ThetaConfig {
    /// Expression in `Sigma` and `R`.
    Expr(String),
    Separable {
        k: f64,
        r_range: [f64; 2],
        steps: usize,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Domain {
    pub t: [f64; 2],
    pub x: [f64; 2],
    pub y: [f64; 2],
    /// `λ` range of the kinetic check when the family has no `μ`.
    #[serde(default)]
    pub lambda: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceConfig {
    pub abs: f64,
    pub rel: f64,
    pub max_iterations: usize,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        let t = Tolerance::tight();
        Self { abs: t.abs, rel: t.rel, max_iterations: t.max_iterations }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignMode {
    #[default]
    Auto,
    Forced {
        s_h: f64,
        s_phi: f64,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckConfig {
    pub round_trip_samples: usize,
    pub seed: u64,
    /// `g` values per probe in the CR check.
    pub g_count: usize,
    /// Residual floor for Benney-type ladders.
    pub floor: f64,
    /// Floor for the `X_tt` spreads, set by the root-solve noise over `Δt²`.
    pub qtt_floor: f64,
    pub closed_form_tol: f64,
    pub cr_tol: f64,
    pub round_trip_tol: f64,
    pub bed_tol: f64,
    pub boundary_tol: f64,
    /// Root bracket of `X(t, f, g)`; defaults to the `x` domain widened by one.
    pub x_range: Option<[f64; 2]>,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            round_trip_samples: 10_000,
            seed: 20_240_601,
            g_count: 17,
            floor: 1e-12,
            qtt_floor: 1e-7,
            closed_form_tol: 1e-8,
            cr_tol: 1e-8,
            round_trip_tol: 1e-9,
            bed_tol: 1e-10,
            boundary_tol: 1e-9,
            x_range: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportConfig {
    /// `[t0, t1]`.
    pub t: [f64; 2],
    pub dts: Vec<f64>,
    /// `(min, max, count)` per seed axis.
    pub seeds_x: (f64, f64, usize),
    pub seeds_lambda: (f64, f64, usize),
    pub x_box: [f64; 2],
    #[serde(default)]
    pub forcing: Forcing,
    #[serde(default = "default_transport_floor")]
    pub floor: f64,
    #[serde(default = "default_transport_order")]
    pub min_order: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Forcing {
    /// `H_xx` of the family itself.
    #[default]
    Family,
    Constant(f64),
}

fn default_generation() -> [usize; 3] {
    [33, 33, 17]
}
fn default_ladder() -> Vec<usize> {
    vec![32, 64, 128]
}
fn default_probes() -> usize {
    5
}
fn default_min_order() -> f64 {
    1.9
}
fn default_transport_floor() -> f64 {
    1e-9
}
fn default_transport_order() -> f64 {
    3.9
}

fn check_range(field: &str, r: [f64; 2]) -> Result<(), CliError> {
    if !(r[0].is_finite() && r[1].is_finite() && r[0] < r[1]) {
        return Err(CliError::Config(format!("`{field}`: lower end must be below upper")));
    }
    Ok(())
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        check_range("domain.t", self.domain.t)?;
        check_range("domain.x", self.domain.x)?;
        check_range("domain.y", self.domain.y)?;
        if let Some(l) = self.domain.lambda {
            check_range("domain.lambda", l)?;
        }
        if let FamilyConfig::Rational { g_lo, g_hi, .. } = &self.family {
            if !(g_lo < g_hi) {
                return Err(CliError::Config("`g_lo`: must be below `g_hi`".into()));
            }
        }
        if self.generation.iter().any(|&n| n < 2) {
            return Err(CliError::Config("`generation`: every axis needs at least two nodes".into()));
        }
        if self.ladder.len() < 3 {
            return Err(CliError::Config("`ladder`: at least three levels are needed to fit an order".into()));
        }
        if self.ladder[0] < 4 || !self.ladder[0].is_multiple_of(2) || self.ladder.windows(2).any(|w| w[1] != 2 * w[0]) {
            return Err(CliError::Config("`ladder`: levels must be even and double each time".into()));
        }
        if self.probes < 3 {
            return Err(CliError::Config("`probes`: need at least three".into()));
        }
        if let SignMode::Forced { s_h, s_phi } = self.sign_mode {
            SignConvention::new(s_h, s_phi).map_err(|e| CliError::Config(e.to_string()))?;
        }
        self.tolerance()?;
        if let Some(t) = &self.transport {
            t.validate()?;
        }
        Ok(())
    }

    pub fn tolerance(&self) -> Result<Tolerance, CliError> {
        let t = self.tolerance;
        Tolerance::new(t.abs, t.rel, t.max_iterations).map_err(|e| CliError::Config(format!("`tolerance`: {e}")))
    }

    fn grid(&self, axes: &[(&str, [f64; 2], usize)]) -> GridSpec {
        GridSpec::new(axes.iter().map(|&(n, r, c)| Axis::new(n, r[0], r[1], c)).collect()).expect("ranges validated")
    }

    /// The `(t, x, y)` grid with `n` intervals per axis.
    pub fn txy(&self, n: usize) -> GridSpec {
        let d = &self.domain;
        self.grid(&[("t", d.t, n + 1), ("x", d.x, n + 1), ("y", d.y, n + 1)])
    }

    pub fn tx(&self, n: usize) -> GridSpec {
        let d = &self.domain;
        self.grid(&[("t", d.t, n + 1), ("x", d.x, n + 1)])
    }

    /// `(t, x, third)` with the third axis on `range`.
    pub fn tx_and(&self, name: &str, range: [f64; 2], n: usize) -> GridSpec {
        let d = &self.domain;
        self.grid(&[("t", d.t, n + 1), ("x", d.x, n + 1), (name, range, n + 1)])
    }

    pub fn generation_grid(&self) -> GridSpec {
        let (d, g) = (&self.domain, self.generation);
        self.grid(&[("t", d.t, g[0]), ("x", d.x, g[1]), ("y", d.y, g[2])])
    }
}

impl TransportConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        check_range("transport.t", self.t)?;
        check_range("transport.x_box", self.x_box)?;
        if self.dts.len() < 3 {
            return Err(CliError::Config("`transport.dts`: an order fit needs at least three steps".into()));
        }
        if self.dts.iter().any(|&d| !(d > 0.0 && d.is_finite())) || self.dts.windows(2).any(|w| w[1] >= w[0]) {
            return Err(CliError::Config("`transport.dts`: steps must be positive and decreasing".into()));
        }
        for (name, s) in [("seeds_x", self.seeds_x), ("seeds_lambda", self.seeds_lambda)] {
            if s.2 < 2 || !(s.0 < s.1) {
                return Err(CliError::Config(format!("`transport.{name}`: need min < max and at least two seeds")));
            }
        }
        Ok(())
    }

    pub fn seeds(&self) -> GridSpec {
        let (x, l) = (self.seeds_x, self.seeds_lambda);
        GridSpec::new(vec![Axis::new("x", x.0, x.1, x.2), Axis::new("lambda", l.0, l.1, l.2)]).expect("validated")
    }
}
