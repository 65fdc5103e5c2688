//! Error function, univariate and bivariate normal distribution functions,
//! and correlated normal sampling.
#![allow(clippy::excessive_precision)]

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

const TWO_PI: f64 = 2.0 * PI;

/// A correlation coefficient in `[-1, 1]`.
///
/// The closed endpoints are admitted so that degenerate limits can be
/// expressed (sampling and the bivariate CDF handle them analytically).
/// Anything dividing by `1 - rho^2` goes through [`Correlation::strict`].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, serde::Serialize)]
#[serde(transparent)]
pub struct Correlation(f64);

impl Correlation {
    pub const ZERO: Correlation = Correlation(0.0);

    pub fn new(rho: f64) -> Result<Self> {
        if !rho.is_finite() || !(-1.0..=1.0).contains(&rho) {
            return Err(Error::param("rho", format!("{rho} is outside [-1, 1]")));
        }
        Ok(Correlation(rho))
    }

    /// Returns `self` if `|rho| < 1`.
    pub fn strict(self) -> Result<Self> {
        if self.0.abs() < 1.0 {
            Ok(self)
        } else {
            Err(Error::DegenerateCorrelation(self.0))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// `sqrt(1 - rho^2)`, computed as `sqrt((1 - rho)(1 + rho))`.
    #[inline]
    pub fn complement(self) -> f64 {
        ((1.0 - self.0) * (1.0 + self.0)).sqrt()
    }
}

impl std::fmt::Display for Correlation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.0.fmt(f)
    }
}

/// Error function.
#[inline]
pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// Complementary error function `1 - erf(x)`, accurate in the far tail.
#[inline]
pub fn erfc(x: f64) -> f64 {
    libm::erfc(x)
}

/// Standard normal density.
#[inline]
pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / TWO_PI.sqrt()
}

/// Standard normal CDF, `Φ(x) = ½[1 + erf(x/√2)]`.
///
/// Evaluated through `erfc` so the lower tail keeps relative accuracy.
pub fn std_normal_cdf(x: f64) -> f64 {
    if x == f64::INFINITY {
        1.0
    } else if x == f64::NEG_INFINITY {
        0.0
    } else {
        0.5 * erfc(-x * FRAC_1_SQRT_2)
    }
}

// Gauss-Legendre abscissae on [-1, 0] with weights, one half of each
// symmetric rule. Rules of order 6, 12 and 20.
const GL6: [(f64, f64); 3] = [
    (0.1713244923791705e+00, -0.9324695142031522e+00),
    (0.3607615730481384e+00, -0.6612093864662647e+00),
    (0.4679139345726904e+00, -0.2386191860831970e+00),
];

const GL12: [(f64, f64); 6] = [
    (0.4717533638651177e-01, -0.9815606342467191e+00),
    (0.1069393259953183e+00, -0.9041172563704750e+00),
    (0.1600783285433464e+00, -0.7699026741943050e+00),
    (0.2031674267230659e+00, -0.5873179542866171e+00),
    (0.2334925365383547e+00, -0.3678314989981802e+00),
    (0.2491470458134029e+00, -0.1252334085114692e+00),
];

const GL20: [(f64, f64); 10] = [
    (0.1761400713915212e-01, -0.9931285991850949e+00),
    (0.4060142980038694e-01, -0.9639719272779138e+00),
    (0.6267204833410906e-01, -0.9122344282513259e+00),
    (0.8327674157670475e-01, -0.8391169718222188e+00),
    (0.1019301198172404e+00, -0.7463319064601508e+00),
    (0.1181945319615184e+00, -0.6360536807265150e+00),
    (0.1316886384491766e+00, -0.5108670019508271e+00),
    (0.1420961093183821e+00, -0.3737060887154196e+00),
    (0.1491729864726037e+00, -0.2277858511416451e+00),
    (0.1527533871307259e+00, -0.7652652113349733e-01),
];

/// Upper bivariate normal probability `P(X > h, Y > k)` for standard
/// normals with correlation `r`, `|r| < 1`.
///
/// Drezner-Wesolowsky integration over the correlation with Genz's
/// double-precision refinements: Gauss-Legendre in `asin(r)` for
/// `|r| < 0.925`, and an asymptotic expansion plus correction integral
/// in `sqrt(1 - r^2)` above that.
fn upper_bivariate(h: f64, k: f64, r: f64) -> f64 {
    let rule: &[(f64, f64)] = if r.abs() < 0.3 {
        &GL6
    } else if r.abs() < 0.75 {
        &GL12
    } else {
        &GL20
    };

    if r.abs() < 0.925 {
        let mut sum = 0.0;
        if r != 0.0 {
            let hk = h * k;
            let hs = 0.5 * (h * h + k * k);
            let asr = r.asin();
            for &(w, x) in rule {
                for node in [x, -x] {
                    let sn = (0.5 * asr * (node + 1.0)).sin();
                    sum += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
                }
            }
            sum *= asr / (2.0 * TWO_PI);
        }
        return sum + std_normal_cdf(-h) * std_normal_cdf(-k);
    }

    // |r| >= 0.925: reduce negative correlation to the positive case by
    // reflecting k.
    let (h, k) = (h, if r < 0.0 { -k } else { k });
    let hk = h * k;
    let mut bvn = 0.0;
    if r.abs() < 1.0 {
        let a_sq = (1.0 - r) * (1.0 + r);
        let mut a = a_sq.sqrt();
        let b_sq = (h - k) * (h - k);
        let c = (4.0 - hk) / 8.0;
        let d = (12.0 - hk) / 16.0;
        let lead = -0.5 * (b_sq / a_sq + hk);
        if lead > -100.0 {
            bvn = a
                * lead.exp()
                * (1.0 - c * (b_sq - a_sq) * (1.0 - d * b_sq / 5.0) / 3.0
                    + c * d * a_sq * a_sq / 5.0);
        }
        if hk > -160.0 {
            let b = b_sq.sqrt();
            bvn -= (-0.5 * hk).exp()
                * TWO_PI.sqrt()
                * std_normal_cdf(-b / a)
                * b
                * (1.0 - c * b_sq * (1.0 - d * b_sq / 5.0) / 3.0);
        }
        a *= 0.5;
        for &(w, x) in rule {
            for node in [x, -x] {
                let xs = (a * (node + 1.0)).powi(2);
                let rs = (1.0 - xs).sqrt();
                let expo = -0.5 * (b_sq / xs + hk);
                if expo > -100.0 {
                    bvn += a
                        * w
                        * expo.exp()
                        * ((-hk * (1.0 - rs) / (2.0 * (1.0 + rs))).exp() / rs
                            - (1.0 + c * xs * (1.0 + d * xs)));
                }
            }
        }
        bvn = -bvn / TWO_PI;
    }
    if r > 0.0 {
        bvn + std_normal_cdf(-h.max(k))
    } else {
        -bvn + (std_normal_cdf(-h) - std_normal_cdf(-k)).max(0.0)
    }
}

/// Standard bivariate normal CDF
///
/// ```text
/// N[a, b; χ] = 1 / (2π√(1-χ²)) ∫_{-∞}^{a} ∫_{-∞}^{b} exp(-(x² + y² - 2χxy) / (2(1-χ²))) dy dx
/// ```
///
/// Infinite limits and `χ = ±1` are evaluated analytically. `chi` must lie
/// in `[-1, 1]`.
pub fn bivariate_normal_cdf(a: f64, b: f64, chi: f64) -> f64 {
    debug_assert!(
        (-1.0..=1.0).contains(&chi),
        "correlation {chi} out of range"
    );
    if a.is_nan() || b.is_nan() || chi.is_nan() {
        return f64::NAN;
    }
    if a == f64::NEG_INFINITY || b == f64::NEG_INFINITY {
        return 0.0;
    }
    if a == f64::INFINITY {
        return std_normal_cdf(b);
    }
    if b == f64::INFINITY {
        return std_normal_cdf(a);
    }
    if chi >= 1.0 {
        return std_normal_cdf(a.min(b));
    }
    if chi <= -1.0 {
        return (std_normal_cdf(a) + std_normal_cdf(b) - 1.0).max(0.0);
    }
    upper_bivariate(-a, -b, chi).clamp(0.0, 1.0)
}

/// Maps independent standard normals `(z1, z_perp)` to a pair with
/// correlation `rho`: `(z1, rho·z1 + sqrt(1 - rho²)·z_perp)`.
#[inline]
pub fn correlate(z1: f64, z_perp: f64, rho: Correlation) -> (f64, f64) {
    (z1, rho.value() * z1 + rho.complement() * z_perp)
}

/// Draws a pair of standard normals with correlation `rho`.
///
/// Always consumes exactly two normal variates from `rng`, also in the
/// degenerate `|rho| = 1` case.
pub fn sample_correlated_pair<R: Rng + ?Sized>(rng: &mut R, rho: Correlation) -> (f64, f64) {
    let z1: f64 = rng.sample(StandardNormal);
    let z_perp: f64 = rng.sample(StandardNormal);
    correlate(z1, z_perp, rho)
}
