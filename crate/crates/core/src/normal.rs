//! Standard normal distribution function and its inverse.

use crate::error::{Error, Result};

const SQRT_2: f64 = core::f64::consts::SQRT_2;
const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// Φ(x), computed through `erfc` so both tails keep relative accuracy.
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / SQRT_2)
}

pub fn std_normal_pdf(x: f64) -> f64 {
    libm::exp(-0.5 * x * x) / SQRT_2PI
}

/// Φ⁻¹(u) for `0 < u < 1`.
///
/// Acklam's rational approximation (relative error about 1.15e-9) followed
/// by one Halley step against the `erfc`-based CDF. The lower half is solved
/// directly; `u > 0.5` reflects through `1 − u`, which is exact there, so
/// `inv_normal_cdf(u) == -inv_normal_cdf(1 - u)` bit for bit on that half.
pub fn inv_normal_cdf(u: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain {
            what: "probability",
            value: u,
        });
    }
    if u <= 0.5 {
        Ok(lower_quantile(u))
    } else {
        Ok(-lower_quantile(1.0 - u))
    }
}

fn lower_quantile(q: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;

    let x = if q < P_LOW {
        let r = libm::sqrt(-2.0 * libm::log(q));
        (((((C[0] * r + C[1]) * r + C[2]) * r + C[3]) * r + C[4]) * r + C[5])
            / ((((D[0] * r + D[1]) * r + D[2]) * r + D[3]) * r + 1.0)
    } else {
        let r = q - 0.5;
        let s = r * r;
        (((((A[0] * s + A[1]) * s + A[2]) * s + A[3]) * s + A[4]) * s + A[5]) * r
            / (((((B[0] * s + B[1]) * s + B[2]) * s + B[3]) * s + B[4]) * s + 1.0)
    };

    // Halley refinement
    let e = std_normal_cdf(x) - q;
    let step = e * SQRT_2PI * libm::exp(0.5 * x * x);
    x - step / (1.0 + 0.5 * x * step)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_outside_unit_interval() {
        for u in [0.0, 1.0, -0.5, 1.5, f64::NAN] {
            assert!(inv_normal_cdf(u).is_err(), "{u}");
        }
    }

    #[test]
    fn known_quantiles() {
        assert_eq!(inv_normal_cdf(0.5).unwrap(), 0.0);
        // mpmath: sqrt(2)*erfinv(0.95)
        assert!((inv_normal_cdf(0.975).unwrap() - 1.959_963_984_540_054).abs() < 1e-12);
        assert!((inv_normal_cdf(0.025).unwrap() + 1.959_963_984_540_054).abs() < 1e-12);
    }

    #[test]
    fn extreme_tails_stay_finite() {
        for u in [1e-300, 1e-20, 1.0 - 1e-16] {
            let x = inv_normal_cdf(u).unwrap();
            assert!(x.is_finite());
        }
        assert!(inv_normal_cdf(1e-300).unwrap() < -37.0);
    }

    #[test]
    fn monotone_on_grid() {
        let mut prev = f64::NEG_INFINITY;
        for i in 1..10_000 {
            let x = inv_normal_cdf(i as f64 / 10_000.0).unwrap();
            assert!(x > prev);
            prev = x;
        }
    }

    #[test]
    fn cdf_symmetry() {
        for x in [0.1, 1.0, 3.0, 7.5] {
            assert!((std_normal_cdf(x) + std_normal_cdf(-x) - 1.0).abs() < 1e-15);
        }
        assert_eq!(std_normal_cdf(0.0), 0.5);
    }
}
