use alloc::vec;

use super::{Norms, ResidualReport};
use crate::families::{BoundaryPair, Distribution};
use crate::numerics::{integrate, Tolerance};
use crate::reconstruction::solve_v;
use crate::Error;

/// Solves for `v` at each `(t, x, y)` sample and re-evaluates
/// `y + ∫_ν^{−v} G dλ` with a fresh quadrature (`moment_round_trip`), and
/// checks `v(t, x, 0) + ν` at the same `(t, x)` (`bed_velocity`).
pub fn moment_round_trip(
    dist: &dyn Distribution,
    pair: &dyn BoundaryPair,
    samples: &[[f64; 3]],
    tol: &Tolerance,
) -> Result<ResidualReport, Error> {
    let (mut trip, mut bed) = (Norms::default(), Norms::default());
    for &[t, x, y] in samples {
        let nu = match pair.nu(t, x) {
            Ok(nu) => nu,
            Err(e) => {
                trip.push(Err(e.clone()));
                bed.push(Err(e));
                continue;
            }
        };
        trip.push((|| {
            let v = solve_v(dist, nu, t, x, y, nu, tol)?;
            let col = dist.column(t, x)?;
            let i = integrate(|l| col.g(l).unwrap_or(f64::NAN), nu, -v, tol)?;
            Ok(y + i)
        })());
        bed.push(solve_v(dist, nu, t, x, 0.0, nu, tol).map(|v| v + nu));
    }
    Ok(ResidualReport { entries: vec![trip.entry("moment_round_trip"), bed.entry("bed_velocity")] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{DistributionColumn, InvertedG, Provenance, RationalFamily, RationalParams};
    use alloc::boxed::Box;

    #[test]
    fn rational_round_trip() {
        let p = RationalParams::parse("g", "0", 0.0, 1.0, 1.0).unwrap();
        let fam = InvertedG::new(RationalFamily::with_t_range(p, (0.5, 2.0)).unwrap(), Tolerance::tight());
        let samples = [[1.0, -2.0, 0.01], [1.5, -1.8, 0.05], [0.8, -2.2, 0.0]];
        let r = moment_round_trip(&fam, &fam, &samples, &Tolerance::tight()).unwrap();
        let e = r.get("moment_round_trip").unwrap();
        assert_eq!((e.samples, e.masked), (3, 0));
        assert!(e.linf < 1e-12, "{}", e.linf);
        assert_eq!(r.get("bed_velocity").unwrap().linf, 0.0);
    }

    /// `G = λ` with `ν = 1`: the root `−v` lies below `ν` and away from `−ν`.
    struct Linear;

    impl DistributionColumn for Linear {
        fn g(&self, l: f64) -> Result<f64, Error> {
            Ok(l)
        }
        fn range(&self) -> Option<(f64, f64)> {
            None
        }
    }

    impl Distribution for Linear {
        fn column(&self, _t: f64, _x: f64) -> Result<Box<dyn DistributionColumn + '_>, Error> {
            Ok(Box::new(Linear))
        }
        fn provenance(&self) -> Provenance {
            Provenance::Constant
        }
    }

    impl BoundaryPair for Linear {
        fn boundary(&self, _t: f64, _x: f64) -> Result<(f64, Option<f64>), Error> {
            Ok((1.0, None))
        }
    }

    #[test]
    fn linear_g_is_not_masked() {
        let samples = [[0.0, 0.0, 0.375], [0.0, 0.0, 0.1], [0.0, 0.0, 0.49]];
        let r = moment_round_trip(&Linear, &Linear, &samples, &Tolerance::tight()).unwrap();
        let e = r.get("moment_round_trip").unwrap();
        assert_eq!((e.samples, e.masked), (3, 0));
        assert!(e.linf < 1e-13, "{}", e.linf);
    }
}
