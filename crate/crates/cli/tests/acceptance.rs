//! One line per acceptance criterion; exits non-zero if any fails.

use std::path::{Path, PathBuf};
use std::process::Command;

use benney_cli::config::{RunConfig, SignMode};
use benney_cli::model::Model;
use benney_cli::{generate, suite, transport};
use benney_core::families::{RationalFamily, RationalParams};
use benney_core::numerics::Axis;
use benney_core::ode_connection::{jacobian_check, qtt_check, FField, FnX, XField, XSource};
use benney_core::reconstruction::PerturbedFields;
use benney_core::verifier::{
    benney_residual, cr_residual, hj_residual, moment_round_trip, uy_residual, FitStatus, ResidualEntry,
};
use benney_core::{GridSpec, ResidualReport, SignConvention, Tolerance};

const MIN_ORDER: f64 = 1.9;
const CLOSED_FORM_TOL: f64 = 1e-8;
const CR_TOL: f64 = 1e-8;
const CR_FLIP_FRACTION: f64 = 0.1;
const NEGATIVE_MAX_ORDER: f64 = 0.5;
const NEGATIVE_MIN_LINF: f64 = 1e-4;
const TRANSPORT_ORDER: f64 = 3.9;
const ROUND_TRIP_TOL: f64 = 1e-9;
const BED_TOL: f64 = 1e-10;
const ROUND_TRIP_SAMPLES: usize = 10_000;
const QTT_FLOOR: f64 = 1e-7;
const CONTROL_TIME_SPREAD: f64 = 0.1;
const LADDER: [usize; 3] = [32, 64, 128];
const PRESETS: [&str; 5] = ["freestream", "forced_stream", "const_theta", "const_separable", "rational"];

fn preset(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("presets").join(format!("{name}.json"))
}

fn load(name: &str) -> RunConfig {
    RunConfig::load(&preset(name)).expect("preset parses")
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn ladder_report<F: Fn(&GridSpec) -> ResidualReport + Sync>(
    grid: impl Fn(usize) -> GridSpec + Sync,
    floor: f64,
    f: F,
) -> ResidualReport {
    suite::ladder(&LADDER, floor, grid, |g| Ok(f(g))).expect("ladder runs")
}

fn fit(entry: &ResidualEntry) -> (FitStatus, f64, bool) {
    let c = entry.convergence.as_ref().expect("fitted");
    (c.status, c.slope, c.passes(MIN_ORDER))
}

fn describe(entry: &ResidualEntry) -> String {
    let (status, slope, _) = fit(entry);
    let levels: Vec<String> =
        entry.convergence.as_ref().unwrap().levels.iter().map(|l| format!("{:.2e}", l.1)).collect();
    format!("{} {:?} order {:.3} [{}]", entry.name, status, slope, levels.join(", "))
}

fn const_sigma_closed_form() -> Outcome {
    let cfg = load("const_theta");
    let model = Model::build(&cfg).unwrap();
    let (snap, _) = generate::generate(&cfg, &model).unwrap();
    let csv = generate::fields_csv(&snap);
    let a = 2.0;
    let mut worst: f64 = 0.0;
    let mut rows = 0;
    for line in csv.lines().skip(1) {
        let f: Vec<f64> = line.split(',').map(|s| s.parse().unwrap()).collect();
        let (t, x, y) = (f[0], f[1], f[2]);
        // θ = Σ inverts by hand: μ − ν = 1/t, μ + ν = −2x/t.
        let nu = -(x + 0.5) / t;
        let mu = (0.5 - x) / t;
        let dv = f[3] - (-2.0 * a * y - nu);
        let du = f[4] - (-a * y * y - nu * y);
        let dh = f[5] - (mu - nu) / (2.0 * a);
        worst = worst.max(dv.abs()).max(du.abs()).max(dh.abs());
        rows += usize::from(f[6] == 0.0);
    }
    let ok = rows == 33 * 33 * 17 && worst <= CLOSED_FORM_TOL;
    outcome(ok, format!("{rows} unmasked rows, max deviation {worst:.2e} (tol {CLOSED_FORM_TOL:e})"))
}

fn rational_signs() -> (RunConfig, Model, SignConvention, usize) {
    let cfg = load("rational");
    let model = Model::build(&cfg).unwrap();
    let signs = suite::resolve(&cfg, &model, cfg.tolerance().unwrap()).expect("unique convention");
    let converged = signs.candidates.iter().filter(|c| c.converged).count();
    (cfg, model, signs.chosen, converged)
}

fn benney_orders(rational_conv: SignConvention) -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for name in ["const_theta", "rational"] {
        let cfg = load(name);
        let model = Model::build(&cfg).unwrap();
        let conv = if name == "rational" { rational_conv } else { SignConvention::new(-1.0, 1.0).unwrap() };
        let fields = model.fields(conv, cfg.tolerance().unwrap());
        let r = ladder_report(|n| cfg.txy(n), 1e-12, |g| benney_residual(&*fields, g, cfg.probes).unwrap());
        for e in &r.entries {
            ok &= fit(e).2;
            parts.push(format!("{name}: {}", describe(e)));
        }
    }
    let cfg = load("const_theta");
    let model = Model::build(&cfg).unwrap();
    let base = model.fields(SignConvention::new(-1.0, 1.0).unwrap(), cfg.tolerance().unwrap());
    let perturbed = PerturbedFields::new(base, |_, x, _| 1e-3 * x.sin());
    let r = ladder_report(|n| cfg.txy(n), 1e-12, |g| benney_residual(&perturbed, g, cfg.probes).unwrap());
    let e = r.get("benney_momentum").unwrap();
    let (_, slope, _) = fit(e);
    let neg = slope <= NEGATIVE_MAX_ORDER && e.linf >= NEGATIVE_MIN_LINF;
    ok &= neg;
    parts.push(format!("perturbed: order {slope:.3} linf {:.2e}", e.linf));
    outcome(ok, parts.join("; "))
}

/// `∫₀¹ g/(t+g)² dg` for `U = g`.
fn phi_tt_magnitude(t: f64) -> f64 {
    ((t + 1.0) / t).ln() - 1.0 / (t + 1.0)
}

fn cr_sign_discrimination(conv: SignConvention) -> Outcome {
    let tol = Tolerance::tight();
    let t_range = (0.5, 2.0);
    let params = RationalParams::parse("g", "0", 0.0, 1.0, conv.s_phi).unwrap();
    let fam = RationalFamily::with_t_range(params, t_range).unwrap();
    let grid = GridSpec::new(vec![Axis::new("t", 0.5, 2.0, 129), Axis::new("x", -2.5, -1.5, 129)]).unwrap();
    let good = cr_residual(&fam, &grid, 9, 17, conv.s_h, &tol).unwrap();
    let flipped = cr_residual(&fam.flipped(), &grid, 9, 17, conv.s_h, &tol).unwrap();
    let max_phi_tt = (0..=150).map(|k| phi_tt_magnitude(0.5 + 0.01 * k as f64)).fold(0.0, f64::max);
    let g = good.get("cr").unwrap();
    let f = flipped.get("cr").unwrap();
    let ok = g.masked == 0 && g.linf <= CR_TOL && f.linf >= CR_FLIP_FRACTION * max_phi_tt;
    outcome(
        ok,
        format!(
            "resolved linf {:.2e} (tol {CR_TOL:e}); flipped linf {:.3} vs {CR_FLIP_FRACTION}·max|Φ_tt| = {:.4}",
            g.linf,
            f.linf,
            CR_FLIP_FRACTION * max_phi_tt
        ),
    )
}

fn conservation() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for name in ["freestream", "forced_stream", "rational"] {
        let cfg = load(name);
        let model = Model::build(&cfg).unwrap();
        let r = transport::transport(&cfg, &model).unwrap();
        let c = r.conservation.convergence.as_ref().unwrap();
        let levels: Vec<String> = c.levels.iter().map(|l| format!("{}:{:.2e}", l.0, l.1)).collect();
        ok &= r.passed && c.passes(TRANSPORT_ORDER);
        parts.push(format!("{name}: {:?} order {:.3} [{}]", c.status, c.slope, levels.join(", ")));
    }
    outcome(ok, parts.join("; "))
}

fn moment_round_trips(rational_conv: SignConvention) -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for name in ["freestream", "const_theta", "const_separable", "rational"] {
        let mut cfg = load(name);
        cfg.checks.round_trip_samples = ROUND_TRIP_SAMPLES;
        let model = Model::build(&cfg).unwrap();
        let conv = match name {
            "rational" => rational_conv,
            _ => SignConvention::new(-1.0, 1.0).unwrap(),
        };
        let tol = cfg.tolerance().unwrap();
        let samples = suite::random_samples(&cfg);
        let r = moment_round_trip(model.distribution(conv), model.pair(conv), &samples, &tol).unwrap();
        let trip = r.get("moment_round_trip").unwrap();
        let bed = r.get("bed_velocity").unwrap();
        let fields = model.fields(conv, tol);
        let uy = ladder_report(|n| cfg.txy(n), 1e-12, |g| uy_residual(&*fields, g, cfg.probes).unwrap());
        let uy = uy.get("u_y").unwrap();
        let pass =
            trip.samples == ROUND_TRIP_SAMPLES && trip.linf <= ROUND_TRIP_TOL && bed.linf <= BED_TOL && fit(uy).2;
        ok &= pass;
        parts.push(format!(
            "{name}: {} samples ({} masked) max {:.2e}, bed {:.2e}, {}",
            trip.samples,
            trip.masked,
            trip.linf,
            bed.linf,
            describe(uy)
        ));
    }
    outcome(ok, parts.join("; "))
}

fn txg(n: usize) -> GridSpec {
    GridSpec::new(vec![
        Axis::new("t", 0.75, 1.75, n + 1),
        Axis::new("x", -2.5, -1.5, n + 1),
        Axis::new("g", 0.0, 1.0, n + 1),
    ])
    .unwrap()
}

fn identities(conv: SignConvention, model: &Model, cfg: &RunConfig) -> Outcome {
    let fam = model.lambda_family(conv).unwrap();
    let tol = cfg.tolerance().unwrap();
    let x = XField::new(FField::new(fam, (0.75, -2.5), tol), (-3.5, -0.6)).unwrap();
    let jac = ladder_report(txg, 1e-12, |g| jacobian_check(&x, g, cfg.probes).unwrap());
    let qtt = |src: &dyn XSource| ladder_report(txg, QTT_FLOOR, |g| qtt_check(src, g, cfg.probes, None).unwrap());
    let (rq, tq, cq) = (qtt(&x), qtt(&FnX::translation()), qtt(&FnX::cosh()));
    let matched = |r: &ResidualReport| fit(r.get("qtt_matched").unwrap()).2;
    let time = |r: &ResidualReport| r.get("qtt_time").unwrap().clone();
    let cosh_time = time(&cq);
    let ok = fit(jac.get("jacobian").unwrap()).2
        && matched(&rq)
        && matched(&tq)
        && matched(&cq)
        && fit(&time(&rq)).2
        && cosh_time.linf >= CONTROL_TIME_SPREAD;
    outcome(
        ok,
        format!(
            "{}; rational {} / {}; translation {}; cosh {} with qtt_time {:.3} (>= {CONTROL_TIME_SPREAD})",
            describe(jac.get("jacobian").unwrap()),
            describe(rq.get("qtt_matched").unwrap()),
            describe(&time(&rq)),
            describe(tq.get("qtt_matched").unwrap()),
            describe(cq.get("qtt_matched").unwrap()),
            cosh_time.linf
        ),
    )
}

fn hamilton_jacobi(conv: SignConvention, model: &Model, cfg: &RunConfig) -> Outcome {
    let fam = model.lambda_family(conv).unwrap();
    let tol = cfg.tolerance().unwrap();
    let r = ladder_report(txg, 1e-12, |g| hj_residual(fam, g, cfg.probes, conv.s_h, &tol).unwrap());
    let e = r.get("hj").unwrap();
    outcome(fit(e).2 && e.masked == 0, describe(e))
}

fn run_binary(args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_benney")).args(args).status().map(|s| s.success()).unwrap_or(false)
}

fn determinism() -> Outcome {
    let root = tempfile::tempdir().unwrap();
    let mut ok = true;
    let mut compared = 0;
    for name in PRESETS {
        let cfg = load(name);
        let config = preset(name);
        let config = config.to_str().unwrap();
        for run in ["a", "b"] {
            let out = root.path().join(run).join(name);
            let out = out.to_str().unwrap();
            if cfg.transport.is_some() {
                ok &= run_binary(&["transport", "--config", config, "--out", out, "--quiet"]);
            }
            if name != "forced_stream" {
                ok &= run_binary(&["generate", "--config", config, "--out", out, "--quiet"]);
                ok &= run_binary(&["verify", "--config", config, "--out", out, "--quiet"]);
            }
        }
        for file in ["fields.csv", "metadata.json", "report.json", "transport.json"] {
            let (a, b) = (root.path().join("a").join(name).join(file), root.path().join("b").join(name).join(file));
            if a.exists() || b.exists() {
                ok &= std::fs::read(&a).ok() == std::fs::read(&b).ok();
                compared += 1;
            }
        }
    }
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(root.path().join("a/rational/report.json")).unwrap()).unwrap();
    let mode = report["signs"]["mode"].as_str().unwrap_or("").to_string();
    ok &= mode == "auto" && report["passed"] == true;
    outcome(ok, format!("{compared} file pairs byte-identical across two runs; rational report signs mode `{mode}`"))
}

fn main() {
    let (cfg, model, conv, converged) = rational_signs();
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    results.push((1, "const θ=Σ closed forms", const_sigma_closed_form()));
    let benney = benney_orders(conv);
    let cr = cr_sign_discrimination(conv);
    let unique = converged == 1 && matches!(cfg.sign_mode, SignMode::Auto);
    let signs = outcome(
        unique && benney.passed && cr.passed,
        format!("{converged} of 4 conventions converge; chosen s_h = {}, s_phi = {}", conv.s_h, conv.s_phi),
    );
    results.push((2, "Benney residual order", benney));
    results.push((3, "CR residual and sign discrimination", cr));
    results.push((4, "sign resolution uniqueness", signs));
    results.push((5, "conservation along characteristics", conservation()));
    results.push((6, "moment round trip", moment_round_trips(conv)));
    results.push((7, "f/X identities", identities(conv, &model, &cfg)));
    results.push((8, "Hamilton-Jacobi order", hamilton_jacobi(conv, &model, &cfg)));
    results.push((9, "determinism", determinism()));
    let mut failed = 0;
    for (id, title, o) in &results {
        println!("criterion {id} {} {title}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        failed += usize::from(!o.passed);
    }
    println!("acceptance: {} of {} criteria pass", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
