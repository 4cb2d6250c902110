//! Normal distribution and logistic primitives.
//!
//! The normal CDF is computed from the complementary error function, which
//! keeps full relative precision in the lower tail. The logistic function is
//! available both exactly ([`sigmoid`]) and through its probit approximation
//! ([`sigmoid_probit_approx`]); the latter is what the explanation engine uses
//! for the logit link.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{ensure_finite, Result};

/// Variance inflation of the logit link under the probit approximation, 8/π.
pub const LOGIT_LAMBDA: f64 = 8.0 / PI;

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

/// Standard normal CDF. `±∞` map to 1 and 0; NaN propagates.
#[inline]
pub fn norm_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// `Φ(z)` held as its smaller tail `Φ(−|z|)`, so differences between two
/// upper-tail values keep their relative precision. Infinite `z` is allowed.
#[derive(Debug, Clone, Copy)]
pub(crate) struct TailCdf {
    upper: bool,
    tail: f64,
}

impl TailCdf {
    #[inline]
    pub(crate) fn new(z: f64) -> Self {
        Self {
            upper: z > 0.0,
            tail: norm_cdf(-z.abs()),
        }
    }

    #[inline]
    pub(crate) fn value(self) -> f64 {
        if self.upper {
            1.0 - self.tail
        } else {
            self.tail
        }
    }

    /// `Φ(self) − Φ(other)`
    #[inline]
    pub(crate) fn minus(self, other: Self) -> f64 {
        if self.upper && other.upper {
            other.tail - self.tail
        } else {
            self.value() - other.value()
        }
    }
}

/// Standard normal density.
#[inline]
pub fn norm_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / SQRT_2PI
}

/// Checked standard normal CDF; rejects non-finite input.
pub fn std_normal_cdf(z: f64) -> Result<f64> {
    ensure_finite("normal cdf argument", z).map(norm_cdf)
}

/// Standard normal quantile for `p` in (0, 1).
///
/// Acklam's rational approximation followed by one Halley step against
/// [`norm_cdf`], which brings the result to within a few ulps.
pub fn norm_quantile(p: f64) -> f64 {
    if p.is_nan() || !(0.0..=1.0).contains(&p) {
        return f64::NAN;
    }
    if p == 0.0 {
        return f64::NEG_INFINITY;
    }
    if p == 1.0 {
        return f64::INFINITY;
    }

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

    let x = if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };

    // Halley refinement. In the upper tail work with the complement so the
    // residual is not swamped by rounding of 1 - p.
    let e = if x > 0.0 {
        (1.0 - p) - norm_cdf(-x)
    } else {
        norm_cdf(x) - p
    };
    let u = e * SQRT_2PI * (0.5 * x * x).exp();
    x - u / (1.0 + 0.5 * x * u)
}

/// Exact logistic function, evaluated without overflow for either sign.
#[inline]
pub fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Checked logistic function `1 / (1 + e^-x)`.
pub fn sigmoid(x: f64) -> Result<f64> {
    ensure_finite("sigmoid argument", x).map(logistic)
}

/// Probit approximation of the logistic function, `Φ(x / √(8/π))`.
pub fn sigmoid_probit_approx(x: f64) -> Result<f64> {
    ensure_finite("sigmoid argument", x).map(|x| norm_cdf(x / LOGIT_LAMBDA.sqrt()))
}
