//! Field export on the generation grid.

use std::fmt::Write as _;
use std::path::Path;

use benney_core::reconstruction::{assemble, FieldSnapshot};
use benney_core::GridSpec;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::CliError;
use crate::model::Model;
use crate::report::{write_json, SignsReport};
use crate::suite::{resolve, sample_columns};

#[derive(Debug, Serialize)]
pub struct Metadata {
    pub family: &'static str,
    pub grid: GridSpec,
    pub signs: SignsReport,
    pub masked_fraction: f64,
    pub config: RunConfig,
}

pub fn generate(cfg: &RunConfig, model: &Model) -> Result<(FieldSnapshot, Metadata), CliError> {
    let tol = cfg.tolerance()?;
    let signs = resolve(cfg, model, tol).map_err(|e| CliError::Generation(format!("sign resolution: {e}")))?;
    let fields = model.fields_for(cfg, signs.chosen)?;
    let grid = cfg.generation_grid();
    let snap = assemble(&grid, sample_columns(cfg, &*fields)).map_err(CliError::generation)?;
    let meta =
        Metadata { family: model.kind(), grid, signs, masked_fraction: snap.masked_fraction(), config: cfg.clone() };
    Ok((snap, meta))
}

/// `t,x,y,v,u,h,mask` rows with shortest round-trip floats.
pub fn fields_csv(snap: &FieldSnapshot) -> String {
    let g = &snap.grid;
    let ny = g.axis(2).count;
    let mut s = String::from("t,x,y,v,u,h,mask\n");
    for k in 0..g.len() {
        let p = g.point(&g.multi_index(k));
        let m = u8::from(snap.mask[k]);
        let _ = writeln!(s, "{},{},{},{},{},{},{m}", p[0], p[1], p[2], snap.v[k], snap.u[k], snap.h[k / ny]);
    }
    s
}

pub fn write(out: &Path, snap: &FieldSnapshot, meta: &Metadata) -> Result<(), CliError> {
    let path = out.join("fields.csv");
    std::fs::write(&path, fields_csv(snap)).map_err(|e| CliError::io(&path, e))?;
    write_json(&out.join("metadata.json"), meta)
}
