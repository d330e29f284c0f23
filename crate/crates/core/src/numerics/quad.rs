use alloc::vec::Vec;

use super::{NumericsError, Tolerance, MAX_QUAD_DEPTH};

// Kronrod abscissae; odd indices are the embedded Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

const GL8_X: [f64; 4] = [
    0.183_434_642_495_649_804_939_476_142_360_184,
    0.525_532_409_916_328_985_817_739_049_189_254,
    0.796_666_477_413_626_739_591_553_936_475_830,
    0.960_289_856_497_536_231_683_560_868_569_473,
];
const GL8_W: [f64; 4] = [
    0.362_683_783_378_361_982_965_150_449_277_196,
    0.313_706_645_877_887_287_337_962_201_986_601,
    0.222_381_034_453_374_470_544_355_994_426_241,
    0.101_228_536_290_376_259_152_531_354_309_962,
];

/// Fixed rules for callers that integrate on small panels of known size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadRule {
    GaussLegendre8,
    /// `n` equal panels of 8-point Gauss–Legendre.
    CompositeGauss8(usize),
}

impl QuadRule {
    pub fn apply<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        match *self {
            QuadRule::GaussLegendre8 => gauss_legendre(f, a, b),
            QuadRule::CompositeGauss8(n) => {
                let n = n.max(1);
                let h = (b - a) / n as f64;
                (0..n)
                    .map(|k| {
                        let lo = a + k as f64 * h;
                        let hi = if k + 1 == n { b } else { lo + h };
                        gauss_legendre(&f, lo, hi)
                    })
                    .sum()
            }
        }
    }
}

/// 8-point Gauss–Legendre on `[a, b]`. Exact for degree ≤ 15.
pub fn gauss_legendre<F: Fn(f64) -> f64>(f: F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let mut s = 0.0;
    for k in 0..4 {
        let dx = r * GL8_X[k];
        s += GL8_W[k] * (f(c - dx) + f(c + dx));
    }
    s * r
}

/// Abscissae and weights of the 15-point Kronrod rule on `[a, b]`.
pub fn kronrod_nodes(a: f64, b: f64) -> [(f64, f64); 15] {
    let c = 0.5 * (a + b);
    let r = 0.5 * (b - a);
    let mut out = [(c, WGK[7] * r); 15];
    for j in 0..7 {
        out[2 * j] = (c - r * XGK[j], WGK[j] * r);
        out[2 * j + 1] = (c + r * XGK[j], WGK[j] * r);
    }
    out
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    estimate: f64,
    error: f64,
    /// Roundoff floor of the error estimate; bisecting cannot go below it.
    floor: f64,
    depth: u32,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, depth: u32) -> Result<Segment, NumericsError> {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    if !fc.is_finite() {
        return Err(NumericsError::NonFinite { at: centre });
    }
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let (x1, x2) = (centre - dx, centre + dx);
        let (f1, f2) = (f(x1), f(x2));
        if !f1.is_finite() {
            return Err(NumericsError::NonFinite { at: x1 });
        }
        if !f2.is_finite() {
            return Err(NumericsError::NonFinite { at: x2 });
        }
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let estimate = res_k * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * libm::pow(200.0 * error / res_asc, 1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * res_abs;
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(floor);
    }
    Ok(Segment { a, b, estimate, error, floor, depth })
}

/// Globally adaptive Gauss–Kronrod (7/15) quadrature of `f` over `[a, b]`.
///
/// Stops when the summed error estimate is at most
/// `max(tol.abs, tol.rel·|result|)`. Swapping the limits negates the result
/// exactly, and an empty interval returns zero without sampling `f`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: &Tolerance) -> Result<f64, NumericsError> {
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return integrate(f, b, a, tol).map(|v| -v);
    }
    let mut segments: Vec<Segment> = alloc::vec![gk15(&f, a, b, 0)?];
    loop {
        let total: f64 = segments.iter().map(|s| s.estimate).sum();
        let error: f64 = segments.iter().map(|s| s.error).sum();
        if error <= tol.abs.max(tol.rel * total.abs()) {
            return Ok(total);
        }
        let (worst, excess) = segments.iter().enumerate().fold((0, 0.0), |acc, (i, s)| {
            let excess = s.error - s.floor;
            if excess > acc.1 {
                (i, excess)
            } else {
                acc
            }
        });
        if excess <= 0.0 {
            // Every segment sits at its roundoff floor.
            return Ok(total);
        }
        let seg = segments[worst];
        if segments.len() > tol.max_iterations || seg.depth >= MAX_QUAD_DEPTH {
            return Err(NumericsError::QuadratureNotConverged { estimate: total, error });
        }
        let mid = 0.5 * (seg.a + seg.b);
        segments[worst] = gk15(&f, seg.a, mid, seg.depth + 1)?;
        segments.push(gk15(&f, mid, seg.b, seg.depth + 1)?);
    }
}
