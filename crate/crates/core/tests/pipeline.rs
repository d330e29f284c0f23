use benney_core::families::{FreestreamFamily, InvertedG, RationalFamily, RationalParams};
use benney_core::numerics::Axis;
use benney_core::reconstruction::{LambdaFields, MomentFields};
use benney_core::transport::conservation_check;
use benney_core::verifier::{benney_residual, cr_residual};
use benney_core::{Fields, GridSpec, SignConvention, Tolerance};

const CONV: SignConvention = SignConvention { s_h: -1.0, s_phi: 1.0 };

fn rational(sign: f64) -> InvertedG<RationalFamily> {
    let p = RationalParams::parse("g", "0", 0.0, 1.0, sign).unwrap();
    InvertedG::new(RationalFamily::with_t_range(p, (0.5, 2.0)).unwrap(), Tolerance::tight())
}

fn grid(t: (f64, f64), x: (f64, f64), y: Option<(f64, f64)>, n: usize) -> GridSpec {
    let mut axes = vec![Axis::new("t", t.0, t.1, n + 1), Axis::new("x", x.0, x.1, n + 1)];
    if let Some(y) = y {
        axes.push(Axis::new("y", y.0, y.1, n + 1));
    }
    GridSpec::new(axes).unwrap()
}

#[test]
fn lambda_and_moment_routes_agree() {
    let inv = rational(1.0);
    let tol = Tolerance::tight();
    let by_lambda = LambdaFields::new(inv.family(), CONV, tol);
    let by_moment = MomentFields::new(&inv, &inv, CONV, tol);
    for &(t, x) in &[(0.8, -2.4), (1.2, -2.0), (1.7, -1.6)] {
        let (a, b) = (by_lambda.column(t, x).unwrap(), by_moment.column(t, x).unwrap());
        assert!((a.h() - b.h()).abs() < 1e-10, "h at ({t}, {x})");
        for k in 0..8 {
            let y = 0.01 * k as f64;
            assert!((a.v(y).unwrap() - b.v(y).unwrap()).abs() < 1e-8, "v at ({t}, {x}, {y})");
            assert!((a.u(y).unwrap() - b.u(y).unwrap()).abs() < 1e-8, "u at ({t}, {x}, {y})");
        }
    }
}

#[test]
fn rational_benney_residual_quarters_on_refinement() {
    let inv = rational(1.0);
    let fields = LambdaFields::new(inv.family(), CONV, Tolerance::tight());
    let linf = |n| {
        let g = grid((0.75, 1.75), (-2.5, -1.5), Some((0.0, 0.08)), n);
        benney_residual(&fields, &g, 3).unwrap().get("benney_momentum").unwrap().linf
    };
    let ratio = linf(32) / linf(64);
    assert!((3.6..4.4).contains(&ratio), "{ratio}");
}

#[test]
fn cr_separates_the_two_phi_signs() {
    let g = grid((0.5, 2.0), (-2.5, -1.5), None, 64);
    let tol = Tolerance::tight();
    let good = cr_residual(rational(1.0).family(), &g, 5, 17, -1.0, &tol).unwrap();
    let bad = cr_residual(rational(-1.0).family(), &g, 5, 17, -1.0, &tol).unwrap();
    assert!(good.get("cr").unwrap().linf < 1e-8);
    // 2Φ_tt at t = 2 is 2(ln(3/2) − 1/3) ≈ 0.144; smaller t only grows it.
    assert!(bad.get("cr").unwrap().linf > 0.14);
}

#[test]
fn freestream_fields_and_characteristics() {
    let domain = grid((0.0, 1.0), (-1.0, 1.0), None, 8);
    let fam = FreestreamFamily::new("lambda - 0.2*xi", 1.0, (-20.0, 20.0), &domain, Tolerance::tight()).unwrap();
    let fields = MomentFields::new(&fam, &fam, CONV, Tolerance::tight());
    let g = grid((0.0, 1.0), (-1.0, 1.0), Some((0.0, 0.4)), 32);
    let r = benney_residual(&fields, &g, 3).unwrap();
    assert_eq!(r.get("benney_mass").unwrap().linf, 0.0);
    assert!(r.get("benney_momentum").unwrap().linf < 1e-4);

    let seeds = GridSpec::new(vec![Axis::new("x", -1.0, 1.0, 5), Axis::new("lambda", -2.0, 2.0, 5)]).unwrap();
    let c = conservation_check(&fam, &|_, _| Ok(0.0), &seeds, (0.0, 1.0), 0.01, (-10.0, 10.0)).unwrap();
    assert!(c.get("conservation").unwrap().linf < 1e-12);
}
