use alloc::vec::Vec;

use super::{GridSpec, NumericsError};

/// Second-order central first derivative.
#[inline]
pub fn central<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Second-order central second derivative.
#[inline]
pub fn central2<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h)
}

/// Second-order central mixed derivative `∂²f/∂a∂b`.
#[inline]
pub fn mixed_central<F: Fn(f64, f64) -> f64>(f: F, a: f64, b: f64, ha: f64, hb: f64) -> f64 {
    (f(a + ha, b + hb) - f(a + ha, b - hb) - f(a - ha, b + hb) + f(a - ha, b - hb)) / (4.0 * ha * hb)
}

/// Central difference of a callable field along `axis`.
///
/// With a `domain`, the stencil must stay inside it.
pub fn fd_partial<F: Fn(&[f64]) -> f64>(
    f: F,
    point: &[f64],
    axis: usize,
    h: f64,
    domain: Option<&GridSpec>,
) -> Result<f64, NumericsError> {
    if h == 0.0 {
        return Err(NumericsError::ZeroStep);
    }
    if let Some(d) = domain {
        let a = d.axis(axis);
        if point[axis] - h < a.min || point[axis] + h > a.max {
            return Err(NumericsError::OutsideDomain { axis });
        }
    }
    let mut p: Vec<f64> = point.to_vec();
    p[axis] = point[axis] + h;
    let fp = f(&p);
    p[axis] = point[axis] - h;
    let fm = f(&p);
    let d = (fp - fm) / (2.0 * h);
    if !d.is_finite() {
        return Err(NumericsError::NonFinite { at: point[axis] });
    }
    Ok(d)
}

/// Values of a scalar field on the nodes of a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

impl SampledField {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self, NumericsError> {
        if values.len() != grid.len() {
            return Err(NumericsError::InvalidGrid("value count does not match grid"));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at every node.
    pub fn from_fn<F: Fn(&[f64]) -> f64>(grid: GridSpec, f: F) -> Self {
        let values = (0..grid.len()).map(|k| f(&grid.point(&grid.multi_index(k)))).collect();
        Self { grid, values }
    }

    pub fn at(&self, idx: &[usize]) -> f64 {
        self.values[self.grid.flat_index(idx)]
    }

    fn shifted(&self, idx: &[usize], axis: usize, offset: isize) -> f64 {
        let mut j: Vec<usize> = idx.to_vec();
        j[axis] = (j[axis] as isize + offset) as usize;
        self.at(&j)
    }

    /// First derivative along `axis`: central inside, one-sided second order
    /// on the boundary.
    pub fn partial(&self, idx: &[usize], axis: usize) -> f64 {
        let n = self.grid.axis(axis).count;
        let h = self.grid.spacing(axis);
        let i = idx[axis];
        if n < 3 {
            return (self.shifted(idx, axis, 1 - i as isize) - self.shifted(idx, axis, -(i as isize))) / h;
        }
        if i == 0 {
            (-3.0 * self.at(idx) + 4.0 * self.shifted(idx, axis, 1) - self.shifted(idx, axis, 2)) / (2.0 * h)
        } else if i + 1 == n {
            (3.0 * self.at(idx) - 4.0 * self.shifted(idx, axis, -1) + self.shifted(idx, axis, -2)) / (2.0 * h)
        } else {
            (self.shifted(idx, axis, 1) - self.shifted(idx, axis, -1)) / (2.0 * h)
        }
    }

    /// Second derivative along `axis` (one-sided second order on the
    /// boundary, which needs four nodes).
    pub fn second(&self, idx: &[usize], axis: usize) -> f64 {
        let n = self.grid.axis(axis).count;
        let h2 = self.grid.spacing(axis) * self.grid.spacing(axis);
        let i = idx[axis];
        if i == 0 && n >= 4 {
            (2.0 * self.at(idx) - 5.0 * self.shifted(idx, axis, 1) + 4.0 * self.shifted(idx, axis, 2)
                - self.shifted(idx, axis, 3))
                / h2
        } else if i + 1 == n && n >= 4 {
            (2.0 * self.at(idx) - 5.0 * self.shifted(idx, axis, -1) + 4.0 * self.shifted(idx, axis, -2)
                - self.shifted(idx, axis, -3))
                / h2
        } else {
            let i = i.clamp(1, n - 2);
            let mut j: Vec<usize> = idx.to_vec();
            j[axis] = i;
            (self.shifted(&j, axis, 1) - 2.0 * self.at(&j) + self.shifted(&j, axis, -1)) / h2
        }
    }

    /// Mixed derivative: the `b`-partial differenced along `a`.
    pub fn mixed(&self, idx: &[usize], a: usize, b: usize) -> f64 {
        let n = self.grid.axis(a).count;
        let h = self.grid.spacing(a);
        let i = idx[a];
        let pb = |off: isize| {
            let mut j: Vec<usize> = idx.to_vec();
            j[a] = (i as isize + off) as usize;
            self.partial(&j, b)
        };
        if i == 0 {
            (-3.0 * pb(0) + 4.0 * pb(1) - pb(2)) / (2.0 * h)
        } else if i + 1 == n {
            (3.0 * pb(0) - 4.0 * pb(-1) + pb(-2)) / (2.0 * h)
        } else {
            (pb(1) - pb(-1)) / (2.0 * h)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::Axis;
    use super::*;

    #[test]
    fn sine_slope_at_origin() {
        assert!((central(libm::sin, 0.0, 1e-3) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn quadratic_is_exact() {
        let d = fd_partial(|p| p[0] * p[0], &[3.0], 0, 0.25, None).unwrap();
        assert!((d - 6.0).abs() < 1e-13);
    }

    #[test]
    fn cubic_second_derivative() {
        let d = central2(|x| x * x * x, 2.0, 1e-2);
        assert!((d - 12.0).abs() < 1e-5);
    }

    #[test]
    fn callable_domain_check() {
        let g = GridSpec::new(alloc::vec![Axis::new("x", 0.0, 1.0, 11)]).unwrap();
        assert!(fd_partial(|p| p[0], &[0.05], 0, 0.1, Some(&g)).is_err());
        assert!(fd_partial(|p| p[0], &[0.5], 0, 0.1, Some(&g)).is_ok());
    }

    fn richardson_order(f: impl Fn(f64) -> f64, df: f64, x: f64) -> f64 {
        let e1 = (central(&f, x, 0.1) - df).abs();
        let e2 = (central(&f, x, 0.05) - df).abs();
        libm::log2(e1 / e2)
    }

    #[test]
    fn convergence_order_at_least_two() {
        assert!(richardson_order(libm::sin, libm::cos(0.7), 0.7) >= 1.9);
        assert!(richardson_order(libm::exp, libm::exp(0.3), 0.3) >= 1.9);
        assert!(richardson_order(|x| x.powi(4) - x, 4.0 * 1.5f64.powi(3) - 1.0, 1.5) >= 1.9);
    }

    #[test]
    fn sampled_boundaries_are_second_order() {
        let grid = |n| GridSpec::new(alloc::vec![Axis::new("x", 0.0, 1.0, n), Axis::new("y", 0.0, 1.0, n)]).unwrap();
        let err = |n: usize| {
            let f = SampledField::from_fn(grid(n), |p| libm::sin(2.0 * p[0]) * libm::exp(p[1]));
            let last = n - 1;
            let e1 = (f.partial(&[0, 0], 0) - 2.0).abs();
            let e2 = (f.second(&[last, 0], 0) + 4.0 * libm::sin(2.0)).abs();
            let e3 = (f.mixed(&[0, last], 0, 1) - 2.0 * libm::exp(1.0)).abs();
            (e1, e2, e3)
        };
        let (a1, a2, a3) = err(33);
        let (b1, b2, b3) = err(65);
        assert!(libm::log2(a1 / b1) > 1.8);
        assert!(libm::log2(a2 / b2) > 1.8);
        assert!(libm::log2(a3 / b3) > 1.8);
    }
}
