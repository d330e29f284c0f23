use alloc::vec::Vec;

use super::Fields;
use crate::numerics::GridSpec;
use crate::Error;

/// One `(t, x)` column of samples along the `y` axis. Masked samples hold NaN.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnSamples {
    pub h: f64,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    pub mask: Vec<bool>,
}

/// Fields sampled on a `(t, x, y)` grid, row-major with `y` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSnapshot {
    pub grid: GridSpec,
    pub v: Vec<f64>,
    pub u: Vec<f64>,
    /// `h` per `(t, x)` column.
    pub h: Vec<f64>,
    /// `true` where the point could not be evaluated.
    pub mask: Vec<bool>,
}

impl FieldSnapshot {
    pub fn masked_fraction(&self) -> f64 {
        self.mask.iter().filter(|m| **m).count() as f64 / self.mask.len().max(1) as f64
    }
}

fn check_grid(grid: &GridSpec) -> Result<(), Error> {
    if grid.dim() != 3 {
        return Err(Error::invalid("grid", "fields are sampled on a (t, x, y) grid"));
    }
    Ok(())
}

/// Samples column `(it, ix)`; the column seeds each `y` with the previous root.
pub fn evaluate_column(fields: &dyn Fields, grid: &GridSpec, it: usize, ix: usize) -> ColumnSamples {
    let ny = grid.axis(2).count;
    let (t, x) = (grid.axis(0).node(it), grid.axis(1).node(ix));
    let mut out = ColumnSamples {
        h: f64::NAN,
        v: alloc::vec![f64::NAN; ny],
        u: alloc::vec![f64::NAN; ny],
        mask: alloc::vec![true; ny],
    };
    let Ok(col) = fields.column(t, x) else { return out };
    out.h = col.h();
    for k in 0..ny {
        let y = grid.axis(2).node(k);
        if let (Ok(v), Ok(u)) = (col.v(y), col.u(y)) {
            if v.is_finite() && u.is_finite() {
                out.v[k] = v;
                out.u[k] = u;
                out.mask[k] = false;
            }
        }
    }
    out
}

/// Joins columns given in `(it, ix)` row-major order.
pub fn assemble(grid: &GridSpec, columns: Vec<ColumnSamples>) -> Result<FieldSnapshot, Error> {
    check_grid(grid)?;
    let mut snap = FieldSnapshot {
        grid: grid.clone(),
        v: Vec::with_capacity(grid.len()),
        u: Vec::with_capacity(grid.len()),
        h: Vec::with_capacity(columns.len()),
        mask: Vec::with_capacity(grid.len()),
    };
    for c in columns {
        snap.h.push(c.h);
        snap.v.extend(c.v);
        snap.u.extend(c.u);
        snap.mask.extend(c.mask);
    }
    if snap.mask.len() != grid.len() {
        return Err(Error::invalid("grid", "column count does not match grid"));
    }
    let masked = snap.mask.iter().filter(|m| **m).count();
    if 2 * masked > snap.mask.len() {
        return Err(Error::TooManyMasked { masked, total: snap.mask.len() });
    }
    Ok(snap)
}

/// Samples `fields` on `grid`, flagging failed points rather than filling
/// them. Fails only when more than half the points are masked.
pub fn evaluate_fields(fields: &dyn Fields, grid: &GridSpec) -> Result<FieldSnapshot, Error> {
    check_grid(grid)?;
    let (nt, nx) = (grid.axis(0).count, grid.axis(1).count);
    let columns = (0..nt * nx).map(|k| evaluate_column(fields, grid, k / nx, k % nx)).collect();
    assemble(grid, columns)
}
