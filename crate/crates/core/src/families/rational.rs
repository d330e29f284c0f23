use alloc::boxed::Box;
use alloc::vec::Vec;
use core::cell::Cell;

use super::{LambdaFamily, TimeSlice};
use crate::expr::ExprAst;
use crate::numerics::{kronrod_nodes, GridSpec};
use crate::Error;

/// Parameters of the rational family
/// `λ = −(x + Φ(t) + V(g))/(t + U(g)) + Φ_t`,
/// `Φ(t) = σ ∫ g U_g ln(t + U) dg`.
#[derive(Debug, Clone)]
pub struct RationalParams {
    pub u: ExprAst,
    pub v: ExprAst,
    pub g_lo: f64,
    pub g_hi: f64,
    /// `σ`, exactly `±1`.
    pub phi_sign: f64,
}

impl RationalParams {
    /// `u` and `v` are expressions in `g`.
    pub fn parse(u: &str, v: &str, g_lo: f64, g_hi: f64, phi_sign: f64) -> Result<Self, Error> {
        let u = ExprAst::parse(u, &["g"]).map_err(|e| Error::parse("U", e))?;
        let v = ExprAst::parse(v, &["g"]).map_err(|e| Error::parse("V", e))?;
        Ok(Self { u, v, g_lo, g_hi, phi_sign })
    }

    pub fn with_phi_sign(mut self, phi_sign: f64) -> Self {
        self.phi_sign = phi_sign;
        self
    }
}

/// Quadrature nodes for the `Φ` integrals, built once over the configured
/// time range: `w·g·U_g` and `U` at every node.
#[derive(Debug, Clone)]
struct PhiNodes {
    weight: Vec<f64>,
    u: Vec<f64>,
}

const PANEL_DEPTH: u32 = 24;
const PANEL_REL: f64 = 1e-15;
const SCAN: usize = 257;

#[derive(Debug, Clone)]
pub struct RationalFamily {
    params: RationalParams,
    du: ExprAst,
    dv: ExprAst,
    t_range: (f64, f64),
    nodes: PhiNodes,
}

fn eval(e: &ExprAst, g: f64) -> Result<f64, Error> {
    let v = e.eval_at(&[g])?;
    if !v.is_finite() {
        return Err(Error::invalid("U", "non-finite value"));
    }
    Ok(v)
}

impl RationalFamily {
    /// The time range is the `t` axis of `domain` (or its first axis).
    pub fn new(params: RationalParams, domain: &GridSpec) -> Result<Self, Error> {
        let t_axis = domain.axis_named("t").unwrap_or_else(|| domain.axis(0));
        Self::with_t_range(params, (t_axis.min, t_axis.max))
    }

    pub fn with_t_range(params: RationalParams, t_range: (f64, f64)) -> Result<Self, Error> {
        let (g_lo, g_hi) = (params.g_lo, params.g_hi);
        if !(g_lo < g_hi) {
            return Err(Error::invalid("g_lo", "g_lo must be below g_hi"));
        }
        if params.phi_sign != 1.0 && params.phi_sign != -1.0 {
            return Err(Error::invalid("phi_sign", "must be +1 or -1"));
        }
        let du = params.u.differentiate("g").map_err(|_| Error::invalid("U", "no variable g"))?;
        let dv = params.v.differentiate("g").map_err(|_| Error::invalid("V", "no variable g"))?;
        let mut ug_sign = 0.0;
        for k in 0..SCAN {
            let g = g_lo + (g_hi - g_lo) * k as f64 / (SCAN - 1) as f64;
            let u = eval(&params.u, g)?;
            let ug = eval(&du, g)?;
            eval(&params.v, g)?;
            eval(&dv, g)?;
            if t_range.0 + u <= 0.0 {
                return Err(Error::invalid("U", "t + U(g) must stay positive"));
            }
            if ug != 0.0 {
                if ug_sign == 0.0 {
                    ug_sign = ug.signum();
                } else if ug.signum() != ug_sign {
                    return Err(Error::invalid("U", "U_g must keep one sign"));
                }
            }
        }
        let mut fam = Self { params, du, dv, t_range, nodes: PhiNodes { weight: Vec::new(), u: Vec::new() } };
        fam.build_nodes()?;
        Ok(fam)
    }

    fn panel(&self, a: f64, b: f64) -> Result<([f64; 15], [f64; 15]), Error> {
        let mut w = [0.0; 15];
        let mut u = [0.0; 15];
        for (k, &(g, wk)) in kronrod_nodes(a, b).iter().enumerate() {
            w[k] = wk * g * eval(&self.du, g)?;
            u[k] = eval(&self.params.u, g)?;
        }
        Ok((w, u))
    }

    fn panel_sums(&self, w: &[f64; 15], u: &[f64; 15], t: f64) -> [f64; 3] {
        let mut s = [0.0; 3];
        for k in 0..15 {
            let d = t + u[k];
            s[0] += w[k] * libm::log(d);
            s[1] += w[k] / d;
            s[2] += w[k] / (d * d);
        }
        s
    }

    /// Bisects panels until each Kronrod panel agrees with its two halves
    /// at both ends of the time range.
    fn build_nodes(&mut self) -> Result<(), Error> {
        let mut stack = alloc::vec![(self.params.g_lo, self.params.g_hi, 0u32)];
        let mut accepted: Vec<(f64, [f64; 15], [f64; 15])> = Vec::new();
        while let Some((a, b, depth)) = stack.pop() {
            let m = 0.5 * (a + b);
            let whole = self.panel(a, b)?;
            let left = self.panel(a, m)?;
            let right = self.panel(m, b)?;
            let mut ok = true;
            for t in [self.t_range.0, self.t_range.1] {
                let s = self.panel_sums(&whole.0, &whole.1, t);
                let l = self.panel_sums(&left.0, &left.1, t);
                let r = self.panel_sums(&right.0, &right.1, t);
                for i in 0..3 {
                    let split = l[i] + r[i];
                    if (s[i] - split).abs() > PANEL_REL * (1.0 + split.abs()) {
                        ok = false;
                    }
                }
            }
            if ok || depth >= PANEL_DEPTH {
                accepted.push((a, left.0, left.1));
                accepted.push((m, right.0, right.1));
            } else {
                stack.push((m, b, depth + 1));
                stack.push((a, m, depth + 1));
            }
        }
        accepted.sort_by(|p, q| p.0.total_cmp(&q.0));
        for (_, w, u) in accepted {
            self.nodes.weight.extend_from_slice(&w);
            self.nodes.u.extend_from_slice(&u);
        }
        Ok(())
    }

    pub fn params(&self) -> &RationalParams {
        &self.params
    }

    pub fn t_range(&self) -> (f64, f64) {
        self.t_range
    }

    /// `(Φ, Φ_t, Φ_tt)` at time `t`.
    pub fn phi(&self, t: f64) -> Result<(f64, f64, f64), Error> {
        let (mut p, mut pt, mut ptt) = (0.0, 0.0, 0.0);
        for (w, u) in self.nodes.weight.iter().zip(&self.nodes.u) {
            let d = t + u;
            if !(d > 0.0) {
                return Err(Error::Invalid { t, x: f64::NAN });
            }
            p += w * libm::log(d);
            pt += w / d;
            ptt -= w / (d * d);
        }
        let s = self.params.phi_sign;
        Ok((s * p, s * pt, s * ptt))
    }

    /// Same family with the opposite `σ`.
    pub fn flipped(&self) -> Self {
        let mut f = self.clone();
        f.params.phi_sign = -f.params.phi_sign;
        f
    }
}

struct RationalSlice<'a> {
    fam: &'a RationalFamily,
    t: f64,
    phi: f64,
    phi_t: f64,
    phi_tt: f64,
    /// Last `g` and its `(U, U_g, V, V_g)`.
    memo: Cell<(f64, [f64; 4])>,
}

impl RationalSlice<'_> {
    fn uv(&self, g: f64) -> [f64; 4] {
        let (last, vals) = self.memo.get();
        if last == g {
            return vals;
        }
        let f = self.fam;
        let e = |ast: &ExprAst| ast.eval_at(&[g]).unwrap_or(f64::NAN);
        let vals = [e(&f.params.u), e(&f.du), e(&f.params.v), e(&f.dv)];
        self.memo.set((g, vals));
        vals
    }
}

impl TimeSlice for RationalSlice<'_> {
    fn t(&self) -> f64 {
        self.t
    }

    fn lambda(&self, x: f64, g: f64) -> f64 {
        let [u, _, v, _] = self.uv(g);
        -(x + self.phi + v) / (self.t + u) + self.phi_t
    }

    fn lambda_t(&self, x: f64, g: f64) -> f64 {
        let [u, _, v, _] = self.uv(g);
        let d = self.t + u;
        -self.phi_t / d + (x + self.phi + v) / (d * d) + self.phi_tt
    }

    fn lambda_x(&self, _x: f64, g: f64) -> f64 {
        let [u, ..] = self.uv(g);
        -1.0 / (self.t + u)
    }

    fn lambda_g(&self, x: f64, g: f64) -> f64 {
        let [u, ug, v, vg] = self.uv(g);
        let d = self.t + u;
        -vg / d + (x + self.phi + v) * ug / (d * d)
    }

    fn lambda_gx(&self, _x: f64, g: f64) -> f64 {
        let [u, ug, ..] = self.uv(g);
        let d = self.t + u;
        ug / (d * d)
    }
}

impl LambdaFamily for RationalFamily {
    fn g_range(&self) -> (f64, f64) {
        (self.params.g_lo, self.params.g_hi)
    }

    fn slice(&self, t: f64) -> Result<Box<dyn TimeSlice + '_>, Error> {
        let (phi, phi_t, phi_tt) = self.phi(t)?;
        Ok(Box::new(RationalSlice { fam: self, t, phi, phi_t, phi_tt, memo: Cell::new((f64::NAN, [0.0; 4])) }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{central, integrate, mixed_central, Tolerance};

    fn family(sign: f64) -> RationalFamily {
        let p = RationalParams::parse("g", "0", 0.0, 1.0, sign).unwrap();
        RationalFamily::with_t_range(p, (0.5, 2.0)).unwrap()
    }

    #[test]
    fn phi_closed_forms_at_one() {
        for sign in [1.0, -1.0] {
            let (p, pt, ptt) = family(sign).phi(1.0).unwrap();
            assert!((p - sign * 0.25).abs() < 1e-14, "{p}");
            assert!((pt - sign * (1.0 - core::f64::consts::LN_2)).abs() < 1e-14);
            // −σ∫ g/(1+g)² dg = −σ(ln 2 − 1/2)
            assert!((ptt + sign * (core::f64::consts::LN_2 - 0.5)).abs() < 1e-14);
        }
    }

    #[test]
    fn phi_matches_adaptive_quadrature_across_range() {
        let fam = family(1.0);
        let tol = Tolerance::tight();
        for t in [0.5, 0.73, 1.4, 2.0] {
            let (p, pt, ptt) = fam.phi(t).unwrap();
            let q = integrate(|g| g * libm::log(t + g), 0.0, 1.0, &tol).unwrap();
            let qt = integrate(|g| g / (t + g), 0.0, 1.0, &tol).unwrap();
            let qtt = -integrate(|g| g / ((t + g) * (t + g)), 0.0, 1.0, &tol).unwrap();
            assert!((p - q).abs() < 1e-14 && (pt - qt).abs() < 1e-14 && (ptt - qtt).abs() < 1e-14);
        }
    }

    #[test]
    fn analytic_partials_match_fd() {
        let p = RationalParams::parse("g + g^2/4", "0.3*sin(g)", 0.0, 1.0, 1.0).unwrap();
        let fam = RationalFamily::with_t_range(p, (0.5, 2.0)).unwrap();
        for &(t, x, g) in &[(0.7, -1.8, 0.2), (1.3, -2.2, 0.55), (1.9, -1.1, 0.9)] {
            let s = fam.slice(t).unwrap();
            let lam = |t: f64, x: f64, g: f64| fam.slice(t).unwrap().lambda(x, g);
            let rel = |a: f64, b: f64| (a - b).abs() / (1.0 + b.abs());
            assert!(rel(s.lambda_t(x, g), central(|t| lam(t, x, g), t, 1e-5)) < 1e-6);
            assert!(rel(s.lambda_x(x, g), central(|x| lam(t, x, g), x, 1e-5)) < 1e-6);
            assert!(rel(s.lambda_g(x, g), central(|g| lam(t, x, g), g, 1e-5)) < 1e-6);
            let gx = mixed_central(|g, x| lam(t, x, g), g, x, 1e-4, 1e-4);
            assert!(rel(s.lambda_gx(x, g), gx) < 1e-6);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        let p = RationalParams::parse("g", "0", 1.0, 0.0, 1.0).unwrap();
        assert!(matches!(
            RationalFamily::with_t_range(p, (0.5, 2.0)),
            Err(Error::InvalidParameter { field: "g_lo", .. })
        ));
        let p = RationalParams::parse("g - 1", "0", 0.0, 1.0, 1.0).unwrap();
        assert!(RationalFamily::with_t_range(p, (0.5, 2.0)).is_err());
        let p = RationalParams::parse("(g - 0.5)^2", "0", 0.0, 1.0, 1.0).unwrap();
        assert!(RationalFamily::with_t_range(p, (0.5, 2.0)).is_err());
        let p = RationalParams::parse("g", "0", 0.0, 1.0, 0.5).unwrap();
        assert!(RationalFamily::with_t_range(p, (0.5, 2.0)).is_err());
    }
}
