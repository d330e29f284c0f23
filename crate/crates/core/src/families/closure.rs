use alloc::boxed::Box;

use super::{LambdaFamily, TimeSlice};
use crate::numerics::{central, mixed_central};
use crate::Error;

type Field = Box<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// A λ-family from closures `(t, x, g) ↦ …`. Partials not supplied are
/// taken by central differences.
pub struct FnFamily {
    g_range: (f64, f64),
    lambda: Field,
    lambda_t: Option<Field>,
    lambda_x: Option<Field>,
    lambda_g: Option<Field>,
    lambda_gx: Option<Field>,
}

const FD_STEP: f64 = 1e-5;
const FD_MIXED_STEP: f64 = 1e-4;

fn step(v: f64, h: f64) -> f64 {
    h * v.abs().max(1.0)
}

impl FnFamily {
    pub fn new<F>(g_range: (f64, f64), lambda: F) -> Self
    where
        F: Fn(f64, f64, f64) -> f64 + Send + Sync + 'static,
    {
        Self { g_range, lambda: Box::new(lambda), lambda_t: None, lambda_x: None, lambda_g: None, lambda_gx: None }
    }

    pub fn with_lambda_t(mut self, f: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.lambda_t = Some(Box::new(f));
        self
    }

    pub fn with_lambda_x(mut self, f: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.lambda_x = Some(Box::new(f));
        self
    }

    pub fn with_lambda_g(mut self, f: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.lambda_g = Some(Box::new(f));
        self
    }

    pub fn with_lambda_gx(mut self, f: impl Fn(f64, f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        self.lambda_gx = Some(Box::new(f));
        self
    }
}

struct FnSlice<'a> {
    fam: &'a FnFamily,
    t: f64,
}

impl TimeSlice for FnSlice<'_> {
    fn t(&self) -> f64 {
        self.t
    }

    fn lambda(&self, x: f64, g: f64) -> f64 {
        (self.fam.lambda)(self.t, x, g)
    }

    fn lambda_t(&self, x: f64, g: f64) -> f64 {
        match &self.fam.lambda_t {
            Some(f) => f(self.t, x, g),
            None => central(|t| (self.fam.lambda)(t, x, g), self.t, step(self.t, FD_STEP)),
        }
    }

    fn lambda_x(&self, x: f64, g: f64) -> f64 {
        match &self.fam.lambda_x {
            Some(f) => f(self.t, x, g),
            None => central(|x| self.lambda(x, g), x, step(x, FD_STEP)),
        }
    }

    fn lambda_g(&self, x: f64, g: f64) -> f64 {
        match &self.fam.lambda_g {
            Some(f) => f(self.t, x, g),
            None => central(|g| self.lambda(x, g), g, step(g, FD_STEP)),
        }
    }

    fn lambda_gx(&self, x: f64, g: f64) -> f64 {
        match &self.fam.lambda_gx {
            Some(f) => f(self.t, x, g),
            None => mixed_central(|g, x| self.lambda(x, g), g, x, step(g, FD_MIXED_STEP), step(x, FD_MIXED_STEP)),
        }
    }
}

impl LambdaFamily for FnFamily {
    fn g_range(&self) -> (f64, f64) {
        self.g_range
    }

    fn slice(&self, t: f64) -> Result<Box<dyn TimeSlice + '_>, Error> {
        Ok(Box::new(FnSlice { fam: self, t }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fd_fallback_matches_analytic() {
        let fam = FnFamily::new((0.0, 1.0), |t, x, g| libm::sin(x * g) + t * g * g);
        let s = fam.slice(0.7).unwrap();
        let (x, g) = (0.4, 0.6);
        assert!((s.lambda_t(x, g) - g * g).abs() < 1e-8);
        assert!((s.lambda_x(x, g) - g * libm::cos(x * g)).abs() < 1e-8);
        assert!((s.lambda_g(x, g) - (x * libm::cos(x * g) + 1.4 * g)).abs() < 1e-8);
        let gx = libm::cos(x * g) - x * g * libm::sin(x * g);
        assert!((s.lambda_gx(x, g) - gx).abs() < 1e-6);
    }
}
