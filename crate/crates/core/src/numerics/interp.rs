use alloc::vec::Vec;

/// Cubic Hermite interpolation on a uniform table of values and slopes.
#[derive(Debug, Clone, PartialEq)]
pub struct HermiteTable {
    pub start: f64,
    pub step: f64,
    pub values: Vec<f64>,
    pub slopes: Vec<f64>,
}

impl HermiteTable {
    pub fn end(&self) -> f64 {
        self.start + self.step * (self.values.len() - 1) as f64
    }

    fn locate(&self, x: f64) -> (usize, f64) {
        let n = self.values.len();
        let s = ((x - self.start) / self.step).clamp(0.0, (n - 1) as f64);
        let i = (libm::floor(s) as usize).min(n - 2);
        (i, s - i as f64)
    }

    pub fn eval(&self, x: f64) -> f64 {
        let (i, s) = self.locate(x);
        let h = self.step;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.values[i] + h10 * h * self.slopes[i] + h01 * self.values[i + 1] + h11 * h * self.slopes[i + 1]
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let (i, s) = self.locate(x);
        let h = self.step;
        let s2 = s * s;
        let d00 = 6.0 * s2 - 6.0 * s;
        let d10 = 3.0 * s2 - 4.0 * s + 1.0;
        let d01 = -6.0 * s2 + 6.0 * s;
        let d11 = 3.0 * s2 - 2.0 * s;
        (d00 * self.values[i] + d01 * self.values[i + 1]) / h + d10 * self.slopes[i] + d11 * self.slopes[i + 1]
    }
}
