use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::NumericsError;

/// One uniformly sampled axis.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Axis {
    pub name: String,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(name: &str, min: f64, max: f64, count: usize) -> Self {
        Self { name: name.to_string(), min, max, count }
    }

    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / (self.count - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i + 1 == self.count {
            self.max
        } else {
            self.min + i as f64 * self.spacing()
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(move |i| self.node(i))
    }

    pub fn contains(&self, v: f64) -> bool {
        v >= self.min && v <= self.max
    }

    /// The same interval refined to `intervals` cells.
    pub fn with_intervals(&self, intervals: usize) -> Self {
        Self { name: self.name.clone(), min: self.min, max: self.max, count: intervals + 1 }
    }
}

/// A uniform tensor-product grid.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GridSpec {
    pub axes: Vec<Axis>,
}

impl GridSpec {
    pub fn new(axes: Vec<Axis>) -> Result<Self, NumericsError> {
        let grid = Self { axes };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<(), NumericsError> {
        if self.axes.is_empty() {
            return Err(NumericsError::InvalidGrid("no axes"));
        }
        for axis in &self.axes {
            if axis.count < 2 {
                return Err(NumericsError::InvalidGrid("count must be at least 2"));
            }
            if !(axis.min < axis.max) || !axis.min.is_finite() || !axis.max.is_finite() {
                return Err(NumericsError::InvalidGrid("min must be below max"));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axis(&self, i: usize) -> &Axis {
        &self.axes[i]
    }

    pub fn axis_named(&self, name: &str) -> Option<&Axis> {
        self.axes.iter().find(|a| a.name == name)
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.axes[axis].spacing()
    }

    /// Largest spacing over all axes; the representative mesh size.
    pub fn max_spacing(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).fold(0.0, f64::max)
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Row-major flat index (last axis fastest).
    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.axes).fold(0, |acc, (&i, a)| acc * a.count + i)
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = alloc::vec![0; self.axes.len()];
        for (k, a) in self.axes.iter().enumerate().rev() {
            idx[k] = flat % a.count;
            flat /= a.count;
        }
        idx
    }

    pub fn point(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().zip(&self.axes).map(|(&i, a)| a.node(i)).collect()
    }

    /// Every axis refined to `intervals` cells, bounds unchanged.
    pub fn refined(&self, intervals: usize) -> Self {
        Self { axes: self.axes.iter().map(|a| a.with_intervals(intervals)).collect() }
    }

    /// True when `fine` has the same bounds and exactly half the spacing.
    pub fn halves_into(&self, fine: &GridSpec) -> bool {
        self.axes.len() == fine.axes.len()
            && self
                .axes
                .iter()
                .zip(&fine.axes)
                .all(|(c, f)| c.min == f.min && c.max == f.max && f.count == 2 * (c.count - 1) + 1)
    }

    /// Interior nodes of a sub-lattice with `per_axis` nodes per axis
    /// (boundaries included in the count, then dropped).
    ///
    /// For nested grids the probe coordinates coincide across levels, which
    /// is what convergence fitting needs.
    pub fn probe_points(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let per_axis = per_axis.max(3);
        let coords: Vec<Vec<f64>> = self
            .axes
            .iter()
            .map(|a| (1..per_axis - 1).map(|k| a.min + (a.max - a.min) * k as f64 / (per_axis - 1) as f64).collect())
            .collect();
        let mut out = Vec::new();
        let mut idx = alloc::vec![0usize; coords.len()];
        'outer: loop {
            out.push(idx.iter().zip(&coords).map(|(&i, c)| c[i]).collect());
            for k in (0..idx.len()).rev() {
                idx[k] += 1;
                if idx[k] < coords[k].len() {
                    continue 'outer;
                }
                idx[k] = 0;
            }
            break;
        }
        out
    }
}
