use alloc::boxed::Box;
use alloc::vec::Vec;

use super::{BoundaryPair, Distribution, DistributionColumn, Provenance};
use crate::expr::ExprAst;
use crate::numerics::{newton2d, rk4_step, GridSpec, HermiteTable, NumericsError, Tolerance};
use crate::Error;

#[derive(Debug, Clone)]
enum ThetaForm {
    Expr {
        theta: ExprAst,
        d_sigma: ExprAst,
        d_r: ExprAst,
    },
    /// `θ = exp(kΣ)·ρ(R)`.
    Separable {
        k: f64,
        rho: HermiteTable,
    },
}

/// Hodograph potential `θ(Σ, R)` for constant `G = −1/(2A)`, where
/// `Σ = (μ+ν)/2`, `R = (μ−ν)/2`. It solves `θ_RR = (1 + 1/(AR))·θ_ΣΣ`.
#[derive(Debug, Clone)]
pub struct HodographTheta {
    a: f64,
    form: ThetaForm,
}

impl HodographTheta {
    /// `source` is an expression in `Sigma` and `R`.
    pub fn from_expr(source: &str, a: f64) -> Result<Self, Error> {
        if !(a.is_finite() && a != 0.0) {
            return Err(Error::invalid("A", "must be finite and non-zero"));
        }
        let theta = ExprAst::parse(source, &["Sigma", "R"]).map_err(|e| Error::parse("theta", e))?;
        let d_sigma = theta.differentiate("Sigma").expect("declared");
        let d_r = theta.differentiate("R").expect("declared");
        Ok(Self { a, form: ThetaForm::Expr { theta, d_sigma, d_r } })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn theta(&self, sigma: f64, r: f64) -> f64 {
        match &self.form {
            ThetaForm::Expr { theta, .. } => theta.eval_at(&[sigma, r]).unwrap_or(f64::NAN),
            ThetaForm::Separable { k, rho } => {
                if !in_table(rho, r) {
                    return f64::NAN;
                }
                libm::exp(k * sigma) * rho.eval(r)
            }
        }
    }

    /// `(θ_Σ, θ_R)`.
    pub fn partials(&self, sigma: f64, r: f64) -> (f64, f64) {
        match &self.form {
            ThetaForm::Expr { d_sigma, d_r, .. } => {
                (d_sigma.eval_at(&[sigma, r]).unwrap_or(f64::NAN), d_r.eval_at(&[sigma, r]).unwrap_or(f64::NAN))
            }
            ThetaForm::Separable { k, rho } => {
                if !in_table(rho, r) {
                    return (f64::NAN, f64::NAN);
                }
                let e = libm::exp(k * sigma);
                (k * e * rho.eval(r), e * rho.derivative(r))
            }
        }
    }
}

fn in_table(t: &HermiteTable, r: f64) -> bool {
    let slack = 1e-12 * t.step;
    r >= t.start - slack && r <= t.end() + slack
}

/// Separable potential `θ = exp(kΣ)·ρ(R)` with
/// `ρ'' = k²(1 + 1/(AR))ρ`, `ρ(R₀) = 1`, `ρ'(R₀) = 0`, tabulated on
/// `4·steps` RK4 intervals and interpolated by cubic Hermite.
///
/// `A = ∞` gives the constant-coefficient limit.
pub fn theta_separable(k: f64, a: f64, r_range: (f64, f64), steps: usize) -> Result<HodographTheta, Error> {
    let (r0, r1) = r_range;
    if steps < 100 {
        return Err(Error::invalid("steps", "at least 100 steps are required"));
    }
    if !(r0 < r1) || !k.is_finite() || a == 0.0 || a.is_nan() {
        return Err(Error::invalid("R_range", "need R0 < R1, finite k and non-zero A"));
    }
    if r0 <= 0.0 && r1 >= 0.0 {
        return Err(Error::invalid("R_range", "must not contain R = 0"));
    }
    let singular = -1.0 / a;
    if singular >= r0 && singular <= r1 {
        return Err(Error::invalid("R_range", "must not contain R = -1/A"));
    }
    let n = 4 * steps;
    let h = (r1 - r0) / n as f64;
    let k2 = k * k;
    let rhs = |r: f64, y: &[f64; 2]| [y[1], k2 * (1.0 + 1.0 / (a * r)) * y[0]];
    let mut values = Vec::with_capacity(n + 1);
    let mut slopes = Vec::with_capacity(n + 1);
    let mut y = [1.0, 0.0];
    values.push(y[0]);
    slopes.push(y[1]);
    for i in 0..n {
        y = rk4_step(y, rhs, r0 + i as f64 * h, h)?;
        values.push(y[0]);
        slopes.push(y[1]);
    }
    Ok(HodographTheta { a, form: ThetaForm::Separable { k, rho: HermiteTable { start: r0, step: h, values, slopes } } })
}

/// Residual of the hodograph relations in the unknowns `(μ, ν)`:
/// `t(μ−ν) = θ_μ + θ_ν`, `x(μ−ν) = −(μθ_ν + νθ_μ)`.
fn hodograph_map(theta: &HodographTheta, t: f64, x: f64, mu: f64, nu: f64) -> (f64, f64) {
    let (ts, tr) = theta.partials(0.5 * (mu + nu), 0.5 * (mu - nu));
    let th_mu = 0.5 * (ts + tr);
    let th_nu = 0.5 * (ts - tr);
    (t * (mu - nu) - (th_mu + th_nu), x * (mu - nu) + mu * th_nu + nu * th_mu)
}

/// Constant-`G` family: `(μ, ν)` from the hodograph relations, continued
/// across a `(t, x)` table from a corner guess.
#[derive(Debug, Clone)]
pub struct ConstFamily {
    theta: HodographTheta,
    domain: GridSpec,
    /// `(μ, ν)` at the table nodes, row-major in `(t, x)`.
    table: Vec<(f64, f64)>,
    tol: Tolerance,
}

fn collapsed(mu: f64, nu: f64) -> bool {
    (mu - nu).abs() <= 1e-12 * (1.0 + mu.abs() + nu.abs())
}

impl ConstFamily {
    /// `domain` has axes `(t, x)`; `guess` is `(μ, ν)` at `(t_min, x_min)`.
    pub fn new(theta: HodographTheta, domain: &GridSpec, guess: (f64, f64), tol: Tolerance) -> Result<Self, Error> {
        if domain.dim() != 2 {
            return Err(Error::invalid("domain", "const family needs a (t, x) grid"));
        }
        let (ts, tr) = theta.partials(0.5 * (guess.0 + guess.1), 0.5 * (guess.0 - guess.1));
        let (t0, x0) = (domain.axis(0).min, domain.axis(1).min);
        if ts == 0.0 && tr == 0.0 {
            return Err(Error::Collapse { t: t0, x: x0 });
        }
        let mut fam = Self { theta, domain: domain.clone(), table: Vec::new(), tol };
        let (nt, nx) = (domain.axis(0).count, domain.axis(1).count);
        let mut table = alloc::vec![(0.0, 0.0); nt * nx];
        let mut row_start = guess;
        for i in 0..nt {
            let t = domain.axis(0).node(i);
            // Snake through the rows so that every solve starts from a neighbour.
            let forward = i % 2 == 0;
            let mut prev = row_start;
            for jj in 0..nx {
                let j = if forward { jj } else { nx - 1 - jj };
                let x = domain.axis(1).node(j);
                let sol = fam.solve(t, x, prev)?;
                table[i * nx + j] = sol;
                prev = sol;
            }
            row_start = prev;
        }
        fam.table = table;
        Ok(fam)
    }

    fn solve(&self, t: f64, x: f64, guess: (f64, f64)) -> Result<(f64, f64), Error> {
        let f = |mu: f64, nu: f64| hodograph_map(&self.theta, t, x, mu, nu);
        let sol = newton2d(f, guess, &self.tol).map_err(|e| match e {
            NumericsError::SingularJacobian { .. } if collapsed(guess.0, guess.1) => Error::Collapse { t, x },
            source => Error::Hodograph { t, x, source },
        })?;
        if collapsed(sol.0, sol.1) {
            return Err(Error::Collapse { t, x });
        }
        Ok(sol)
    }

    fn nearest(&self, t: f64, x: f64) -> (f64, f64) {
        let idx = |k: usize, v: f64| {
            let a = self.domain.axis(k);
            let s = libm::round((v - a.min) / a.spacing());
            s.clamp(0.0, (a.count - 1) as f64) as usize
        };
        self.table[idx(0, t) * self.domain.axis(1).count + idx(1, x)]
    }

    /// `(μ, ν)` at `(t, x)`.
    pub fn mu_nu(&self, t: f64, x: f64) -> Result<(f64, f64), Error> {
        self.solve(t, x, self.nearest(t, x))
    }

    pub fn g_value(&self) -> f64 {
        -0.5 / self.theta.a
    }

    pub fn theta(&self) -> &HodographTheta {
        &self.theta
    }
}

struct ConstColumn(f64);

impl DistributionColumn for ConstColumn {
    fn g(&self, _lambda: f64) -> Result<f64, Error> {
        Ok(self.0)
    }

    fn range(&self) -> Option<(f64, f64)> {
        None
    }
}

impl Distribution for ConstFamily {
    fn column(&self, _t: f64, _x: f64) -> Result<Box<dyn DistributionColumn + '_>, Error> {
        Ok(Box::new(ConstColumn(self.g_value())))
    }

    fn provenance(&self) -> Provenance {
        Provenance::Constant
    }
}

impl BoundaryPair for ConstFamily {
    fn boundary(&self, t: f64, x: f64) -> Result<(f64, Option<f64>), Error> {
        let (mu, nu) = self.mu_nu(t, x)?;
        Ok((nu, Some(mu)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{central2, Axis};

    fn grid(t: (f64, f64), x: (f64, f64), n: usize) -> GridSpec {
        GridSpec::new(alloc::vec![Axis::new("t", t.0, t.1, n), Axis::new("x", x.0, x.1, n)]).unwrap()
    }

    #[test]
    fn sigma_potential_inverts_by_hand() {
        let theta = HodographTheta::from_expr("Sigma", 2.0).unwrap();
        let fam = ConstFamily::new(theta, &grid((1.0, 2.0), (-1.0, 1.0), 9), (1.0, -1.0), Tolerance::tight()).unwrap();
        let (mu, nu) = fam.mu_nu(1.0, 0.0).unwrap();
        assert!((mu - 0.5).abs() < 1e-13 && (nu + 0.5).abs() < 1e-13);
        let (mu, nu) = fam.mu_nu(1.7, -0.4).unwrap();
        assert!((mu - 0.9 / 1.7).abs() < 1e-13 && (nu + 0.1 / 1.7).abs() < 1e-13);
        assert_eq!(fam.g_value(), -0.25);
    }

    #[test]
    fn constant_potential_collapses() {
        let theta = HodographTheta::from_expr("3", 2.0).unwrap();
        let err =
            ConstFamily::new(theta, &grid((1.0, 2.0), (-1.0, 1.0), 3), (1.0, -1.0), Tolerance::tight()).unwrap_err();
        assert!(matches!(err, Error::Collapse { .. }));
    }

    #[test]
    fn separable_k_zero_is_constant() {
        let th = theta_separable(0.0, 1.0, (2.0, 3.0), 100).unwrap();
        for r in [2.0, 2.3, 3.0] {
            assert_eq!(th.theta(0.4, r), 1.0);
        }
    }

    #[test]
    fn separable_constant_coefficient_limit_is_cosh() {
        let th = theta_separable(1.3, f64::INFINITY, (0.5, 1.5), 1000).unwrap();
        for r in [0.5, 0.77, 1.21, 1.5] {
            let exact = libm::cosh(1.3 * (r - 0.5));
            assert!((th.theta(0.0, r) - exact).abs() < 1e-6);
        }
    }

    #[test]
    fn separable_self_residual() {
        let th = theta_separable(1.0, 1.0, (2.0, 3.0), 250).unwrap();
        let h = 1e-3;
        for k in 0..10 {
            let r = 2.05 + 0.1 * k as f64;
            let rho = |r: f64| th.theta(0.0, r);
            let res = central2(rho, r, h) - (1.0 + 1.0 / r) * rho(r);
            assert!(res.abs() < 1e-6, "R={r}: {res}");
        }
    }

    #[test]
    fn separable_potential_solves_theta_equation() {
        let a = 1.0;
        let th = theta_separable(1.0, a, (0.5, 2.0), 400).unwrap();
        let h = 1e-3;
        for &(s, r) in &[(0.0, 1.0), (0.3, 1.4), (-0.2, 1.8)] {
            let rr = central2(|r| th.theta(s, r), r, h);
            let ss = central2(|s| th.theta(s, r), s, h);
            assert!((rr - (1.0 + 1.0 / (a * r)) * ss).abs() < 1e-6);
        }
    }

    #[test]
    fn separable_rejects_singular_ranges() {
        assert!(theta_separable(1.0, 1.0, (-0.5, 0.5), 100).is_err());
        assert!(theta_separable(1.0, 1.0, (-2.0, -0.5), 100).is_err());
        assert!(theta_separable(1.0, 1.0, (1.0, 2.0), 10).is_err());
    }

    #[test]
    fn separable_family_has_varying_depth() {
        let th = theta_separable(1.0, 1.0, (0.5, 2.0), 400).unwrap();
        let fam = ConstFamily::new(th, &grid((0.8, 1.2), (1.3, 1.9), 9), (1.467, -1.328), Tolerance::tight()).unwrap();
        let (m0, n0) = fam.mu_nu(1.0, 1.4).unwrap();
        let (m1, n1) = fam.mu_nu(1.0, 1.8).unwrap();
        assert!(((m1 - n1) - (m0 - n0)).abs() > 0.1);
        let r = hodograph_map(fam.theta(), 1.0, 1.4, m0, n0);
        assert!(r.0.abs() < 1e-12 && r.1.abs() < 1e-12);
    }
}
