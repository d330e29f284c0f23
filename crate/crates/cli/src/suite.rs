//! Convergence ladders, sign resolution and the verification suite.

use std::collections::BTreeMap;

use benney_core::families::LambdaFamily;
use benney_core::numerics::Tolerance;
use benney_core::ode_connection::{jacobian_check, qtt_check, round_trip_check, FField, XField};
use benney_core::reconstruction::{evaluate_column, resolve_signs, sign_candidates};
use benney_core::verifier::{
    attach_fits, benney_residual, cr_residual, hj_residual, hxx_from_fields, kinetic_residual, moment_round_trip,
    monge_residual, substituted_residual, uy_residual, LambdaAxis,
};
use benney_core::{Error, Fields, GridSpec, ResidualReport, SignConvention};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{RunConfig, SignMode};
use crate::error::CliError;
use crate::model::{Model, FREESTREAM_SIGNS};
use crate::report::{CandidateSummary, CheckResult, OrderSummary, Rule, SignsReport, VerifyReport};

/// Default margin between the `X` root bracket and the `x` domain.
const X_MARGIN: f64 = 1.0;

/// Runs `check` on every ladder level in parallel and fits the L∞ norms
/// against the grid spacing.
pub fn ladder<G, C>(levels: &[usize], floor: f64, grid_of: G, check: C) -> Result<ResidualReport, Error>
where
    G: Fn(usize) -> GridSpec + Sync,
    C: Fn(&GridSpec) -> Result<ResidualReport, Error> + Sync,
{
    let reports = levels
        .par_iter()
        .map(|&n| {
            let g = grid_of(n);
            Ok((g.max_spacing(), check(&g)?))
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(attach_fits(reports, floor))
}

fn benney_ladder(cfg: &RunConfig, fields: &dyn Fields) -> Result<ResidualReport, Error> {
    ladder(&cfg.ladder, cfg.checks.floor, |n| cfg.txy(n), |g| benney_residual(fields, g, cfg.probes))
}

/// Signs from the config, or the unique convention whose Benney ladder
/// converges.
pub fn resolve(cfg: &RunConfig, model: &Model, tol: Tolerance) -> Result<SignsReport, Error> {
    if let SignMode::Forced { s_h, s_phi } = cfg.sign_mode {
        return Ok(SignsReport { mode: "forced", chosen: SignConvention::new(s_h, s_phi)?, candidates: Vec::new() });
    }
    let conventions = model.candidates();
    if conventions.is_empty() {
        return Ok(SignsReport { mode: "not_applicable", chosen: FREESTREAM_SIGNS, candidates: Vec::new() });
    }
    let reports: Vec<Result<ResidualReport, Error>> =
        conventions.par_iter().map(|&c| benney_ladder(cfg, &*model.fields(c, tol))).collect();
    let lookup = |c: SignConvention| {
        let k = conventions.iter().position(|&d| d == c).expect("known convention");
        reports[k].clone()
    };
    let summaries = sign_candidates(&conventions, cfg.min_order, lookup)
        .into_iter()
        .map(|c| CandidateSummary {
            convention: c.convention,
            converged: c.converged,
            error: c.error,
            orders: c.report.as_ref().map(orders_of).unwrap_or_default(),
        })
        .collect();
    let chosen = resolve_signs(&conventions, cfg.min_order, lookup)?.chosen;
    Ok(SignsReport { mode: "auto", chosen, candidates: summaries })
}

/// Fields on the generation grid, one column per `(t, x)` node, in parallel.
pub fn sample_columns(cfg: &RunConfig, fields: &dyn Fields) -> Vec<benney_core::reconstruction::ColumnSamples> {
    let grid = cfg.generation_grid();
    let nx = grid.axis(1).count;
    (0..grid.axis(0).count * nx).into_par_iter().map(|k| evaluate_column(fields, &grid, k / nx, k % nx)).collect()
}

pub fn masked_fraction(columns: &[benney_core::reconstruction::ColumnSamples]) -> f64 {
    let (masked, total) =
        columns.iter().fold((0, 0), |(m, t), c| (m + c.mask.iter().filter(|&&b| b).count(), t + c.mask.len()));
    masked as f64 / total.max(1) as f64
}

/// Uniform `(t, x, y)` samples over the domain from a fixed seed.
pub fn random_samples(cfg: &RunConfig) -> Vec<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.checks.seed);
    let d = &cfg.domain;
    (0..cfg.checks.round_trip_samples)
        .map(|_| {
            [rng.random_range(d.t[0]..=d.t[1]), rng.random_range(d.x[0]..=d.x[1]), rng.random_range(d.y[0]..=d.y[1])]
        })
        .collect()
}

/// Collects checks, turning a failed computation into a failed check.
struct Checks(Vec<CheckResult>);

impl Checks {
    fn add(&mut self, report: Result<ResidualReport, Error>, rules: &[(&str, Rule)]) {
        match report {
            Ok(r) => {
                for &(name, rule) in rules {
                    match r.get(name) {
                        Some(e) => self.0.push(CheckResult::judge(e, rule)),
                        None => self.0.push(CheckResult::failed(name, rule, "entry missing".into())),
                    }
                }
            }
            Err(e) => {
                for &(name, rule) in rules {
                    self.0.push(CheckResult::failed(name, rule, e.to_string()));
                }
            }
        }
    }
}

/// Runs every check that applies to the configured family.
pub fn verify(cfg: &RunConfig, model: &Model) -> Result<VerifyReport, CliError> {
    let tol = cfg.tolerance()?;
    if matches!(model, Model::Freestream(_)) && cfg.domain.lambda.is_none() {
        return Err(CliError::Config("`domain.lambda`: the freestream kinetic check needs a lambda range".into()));
    }
    let signs = resolve(cfg, model, tol).map_err(|e| CliError::Verification(format!("sign resolution: {e}")))?;
    let conv = signs.chosen;
    let fields = model.fields_for(cfg, conv)?;
    let fields: &dyn Fields = &*fields;
    let columns = sample_columns(cfg, fields);
    let masked = masked_fraction(&columns);
    let order = Rule::Order(cfg.min_order);
    let c = &cfg.checks;
    let (levels, floor, probes) = (&cfg.ladder[..], c.floor, cfg.probes);
    let mut checks = Checks(Vec::new());

    checks.0.push(CheckResult {
        name: "masked_fraction".into(),
        rule: Rule::Threshold(0.5),
        linf: masked,
        l2: masked,
        samples: columns.iter().map(|c| c.mask.len()).sum(),
        masked: 0,
        levels: None,
        order: None,
        error: None,
        passed: masked <= 0.5,
    });
    if let Model::Const(fam) = model {
        checks.add(closed_form(cfg, &columns, fam, conv), &[("closed_form", Rule::Threshold(c.closed_form_tol))]);
    }
    checks.add(benney_ladder(cfg, fields), &[("benney_momentum", order), ("benney_mass", order)]);
    checks.add(
        ladder(levels, floor, |n| cfg.txy(n), |g| substituted_residual(fields, g, probes)),
        &[
            ("substituted_interior", order),
            ("substituted_bed", Rule::Threshold(c.boundary_tol)),
            ("substituted_surface", Rule::Threshold(c.boundary_tol)),
        ],
    );
    checks.add(ladder(levels, floor, |n| cfg.txy(n), |g| uy_residual(fields, g, probes)), &[("u_y", order)]);

    let dist = model.distribution(conv);
    let pair = model.pair(conv);
    let has_mu = !matches!(model, Model::Freestream(_));
    let (axis, range) = match cfg.domain.lambda {
        Some(l) if !has_mu => (LambdaAxis::Absolute, l),
        _ => (LambdaAxis::Fraction, [0.0, 1.0]),
    };
    checks.add(
        ladder(
            levels,
            floor,
            |n| cfg.tx_and("lambda", range, n),
            |g| {
                let dx = g.spacing(1);
                let hxx = |t, x| hxx_from_fields(fields, t, x, dx);
                kinetic_residual(dist, Some(pair), &hxx, g, axis, probes)
            },
        ),
        &[("kinetic", order)],
    );
    let monge_names: &[(&str, Rule)] =
        if has_mu { &[("monge_nu", order), ("monge_mu", order)] } else { &[("monge_nu", order)] };
    checks.add(
        ladder(
            levels,
            floor,
            |n| cfg.tx(n),
            |g| {
                let dx = g.spacing(1);
                let hxx = |t, x| hxx_from_fields(fields, t, x, dx);
                monge_residual(pair, &hxx, g, probes)
            },
        ),
        monge_names,
    );
    checks.add(
        round_trip(cfg, model, conv, &tol),
        &[("moment_round_trip", Rule::Threshold(c.round_trip_tol)), ("bed_velocity", Rule::Threshold(c.bed_tol))],
    );

    if let Some(fam) = model.lambda_family(conv) {
        rational_checks(cfg, fam, conv, &tol, &mut checks);
    }
    Ok(VerifyReport::new(model.kind(), signs, masked, checks.0))
}

fn round_trip(cfg: &RunConfig, model: &Model, conv: SignConvention, tol: &Tolerance) -> Result<ResidualReport, Error> {
    let samples = random_samples(cfg);
    let (dist, pair) = (model.distribution(conv), model.pair(conv));
    let parts = samples
        .par_chunks(256)
        .map(|chunk| moment_round_trip(dist, pair, chunk, tol))
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(merge_norms(parts))
}

/// Combines per-chunk reports entry by entry.
fn merge_norms(parts: Vec<ResidualReport>) -> ResidualReport {
    let mut out = parts.first().cloned().unwrap_or_default();
    for e in &mut out.entries {
        let same: Vec<_> = parts.iter().filter_map(|p| p.get(&e.name)).collect();
        let samples: usize = same.iter().map(|s| s.samples).sum();
        e.masked = same.iter().map(|s| s.masked).sum();
        e.linf = same.iter().filter(|s| s.samples > 0).map(|s| s.linf).fold(f64::NAN, f64::max);
        let sq: f64 = same.iter().map(|s| s.l2 * s.l2 * s.samples as f64).sum();
        e.l2 = if samples > 0 { (sq / samples as f64).sqrt() } else { 0.0 };
        e.samples = samples;
    }
    out
}

/// `v = −2Ay − ν`, `u = −Ay² − νy`, `h = −s_h(μ − ν)/(2A)` on the generation grid.
fn closed_form(
    cfg: &RunConfig,
    columns: &[benney_core::reconstruction::ColumnSamples],
    fam: &benney_core::families::ConstFamily,
    conv: SignConvention,
) -> Result<ResidualReport, Error> {
    let grid = cfg.generation_grid();
    let a = fam.theta().a();
    let nx = grid.axis(1).count;
    let mut norms = benney_core::verifier::Norms::default();
    for (k, col) in columns.iter().enumerate() {
        let (t, x) = (grid.axis(0).node(k / nx), grid.axis(1).node(k % nx));
        let (mu, nu) = fam.mu_nu(t, x)?;
        norms.push(Ok(col.h - (-conv.s_h * (mu - nu) / (2.0 * a))));
        for (j, y) in grid.axis(2).nodes().enumerate() {
            if col.mask[j] {
                norms.push(Err(Error::Degenerate("masked")));
                continue;
            }
            norms.push(Ok(col.v[j] - (-2.0 * a * y - nu)));
            norms.push(Ok(col.u[j] - (-a * y * y - nu * y)));
        }
    }
    Ok(ResidualReport { entries: vec![norms.entry("closed_form")] })
}

fn rational_checks(
    cfg: &RunConfig,
    fam: &dyn LambdaFamily,
    conv: SignConvention,
    tol: &Tolerance,
    checks: &mut Checks,
) {
    let order = Rule::Order(cfg.min_order);
    let c = &cfg.checks;
    let (levels, floor, probes) = (&cfg.ladder[..], c.floor, cfg.probes);
    let finest = *levels.last().expect("validated");
    let g_range = fam.g_range();
    let d = &cfg.domain;

    checks
        .add(cr_residual(fam, &cfg.tx(finest), probes, c.g_count, conv.s_h, tol), &[("cr", Rule::Threshold(c.cr_tol))]);
    checks.add(
        ladder(
            levels,
            floor,
            |n| cfg.tx_and("g", [g_range.0, g_range.1], n),
            |g| hj_residual(fam, g, probes, conv.s_h, tol),
        ),
        &[("hj", order)],
    );

    let x_range = c.x_range.map_or((d.x[0] - X_MARGIN, d.x[1] + X_MARGIN), |r| (r[0], r[1]));
    let x_field = XField::new(FField::new(fam, (d.t[0], d.x[0]), *tol), x_range);
    let x_field = match x_field {
        Ok(x) => x,
        Err(e) => {
            checks.0.push(CheckResult::failed("round_trip", Rule::Threshold(c.round_trip_tol), e.to_string()));
            return;
        }
    };
    let txg = |n| cfg.tx_and("g", [g_range.0, g_range.1], n);
    checks.add(round_trip_check(&x_field, &txg(finest), probes), &[("round_trip", Rule::Threshold(c.round_trip_tol))]);
    checks.add(ladder(levels, floor, txg, |g| jacobian_check(&x_field, g, probes)), &[("jacobian", order)]);
    checks.add(
        ladder(levels, floor, txg, |g| x_field.f_field().consistency(g, probes)),
        &[("f_x", Rule::Threshold(c.boundary_tol)), ("f_t", order)],
    );
    checks.add(
        ladder(levels, c.qtt_floor, txg, |g| qtt_check(&x_field, g, probes, None)),
        &[("qtt_matched", order), ("qtt_time", order)],
    );
}

fn orders_of(report: &ResidualReport) -> BTreeMap<String, Option<OrderSummary>> {
    report.entries.iter().map(|e| (e.name.clone(), OrderSummary::of(e))).collect()
}
