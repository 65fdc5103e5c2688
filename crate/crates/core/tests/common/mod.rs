//! Independent reference implementations shared by the integration tests.
//! Nothing here calls into the library's numerics.
#![allow(dead_code)]

use std::f64::consts::PI;

use asianpath::{
    mc_price, AssetDynamics, ControlDynamics, Correlation, McConfig, OptionKind, OptionSpec,
};

// 7-point Gauss / 15-point Kronrod nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15(f: &mut dyn FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kronrod += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kronrod * h, ((kronrod - gauss) * h).abs())
}

/// Adaptive Gauss-Kronrod quadrature on a finite interval, bisecting the
/// interval with the largest error estimate until the total estimate falls
/// below `abs_tol`.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, abs_tol: f64) -> f64 {
    let mut pieces = vec![{
        let (v, e) = gk15(&mut f, a, b);
        (a, b, v, e)
    }];
    for _ in 0..2000 {
        let err: f64 = pieces.iter().map(|p| p.3).sum();
        if err <= abs_tol {
            break;
        }
        let (i, _) = pieces
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .unwrap();
        let (lo, hi, _, _) = pieces.swap_remove(i);
        let mid = 0.5 * (lo + hi);
        let (v1, e1) = gk15(&mut f, lo, mid);
        let (v2, e2) = gk15(&mut f, mid, hi);
        pieces.push((lo, mid, v1, e1));
        pieces.push((mid, hi, v2, e2));
    }
    pieces.iter().map(|p| p.2).sum()
}

/// Nested adaptive quadrature over a rectangle.
pub fn integrate_2d(
    mut f: impl FnMut(f64, f64) -> f64,
    (a0, b0): (f64, f64),
    (a1, b1): (f64, f64),
    abs_tol: f64,
) -> f64 {
    let width = b0 - a0;
    integrate(
        |u| integrate(|v| f(u, v), a1, b1, abs_tol / (4.0 * width)),
        a0,
        b0,
        abs_tol,
    )
}

/// Nested adaptive quadrature over a box.
pub fn integrate_3d(
    mut f: impl FnMut(f64, f64, f64) -> f64,
    r0: (f64, f64),
    r1: (f64, f64),
    r2: (f64, f64),
    abs_tol: f64,
) -> f64 {
    let width = r0.1 - r0.0;
    integrate(
        |u| integrate_2d(|v, w| f(u, v, w), r1, r2, abs_tol / (4.0 * width)),
        r0.0,
        r0.1,
        abs_tol,
    )
}

/// erf from the all-positive series
/// `erf(x) = 2/sqrt(pi) e^{-x²} Σ 2^n x^{2n+1} / (1·3···(2n+1))`.
pub fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut n = 0.0;
    while term.abs() > 1e-18 * sum.abs() {
        n += 1.0;
        term *= 2.0 * x2 / (2.0 * n + 1.0);
        sum += term;
    }
    2.0 / PI.sqrt() * (-x2).exp() * sum
}

pub fn normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / (2.0 * PI).sqrt()
}

/// Φ as 1/2 plus a quadrature of the density from 0.
pub fn normal_cdf_quadrature(x: f64) -> f64 {
    0.5 + integrate(normal_pdf, 0.0, x, 1e-16)
}

/// Standard bivariate normal CDF by 2-D quadrature of the density.
pub fn bivariate_cdf_quadrature(a: f64, b: f64, chi: f64) -> f64 {
    const LO: f64 = -10.0;
    let (a, b) = (a.min(10.0), b.min(10.0));
    if a <= LO || b <= LO {
        return 0.0;
    }
    let det = 1.0 - chi * chi;
    let norm = 1.0 / (2.0 * PI * det.sqrt());
    integrate_2d(
        |u, v| norm * (-(u * u - 2.0 * chi * u * v + v * v) / (2.0 * det)).exp(),
        (LO, a),
        (LO, b),
        1e-13,
    )
}

/// Density of `(x_T, xbar_T)` written as a generic bivariate Gaussian with
/// mean `(mT, mT/2)` and covariance `sigma²T [[1, 1/2], [1/2, 1/3]]`.
pub fn gaussian_form_density(mu: f64, sigma: f64, t: f64, x: f64, xbar: f64) -> f64 {
    let m = mu - 0.5 * sigma * sigma;
    let s2 = sigma * sigma * t;
    let (c11, c12, c22) = (s2, s2 / 2.0, s2 / 3.0);
    let det = c11 * c22 - c12 * c12;
    let (dx, dy) = (x - m * t, xbar - m * t / 2.0);
    let q = (c22 * dx * dx - 2.0 * c12 * dx * dy + c11 * dy * dy) / det;
    (-0.5 * q).exp() / (2.0 * PI * det.sqrt())
}

/// Least-squares linear fit in `h = 1/sqrt(n)` through levels
/// n, 4n, 16n (h, h/2, h/4), evaluated at h = 0.
pub const EXTRAPOLATION_WEIGHTS: [f64; 3] = [-0.5, 0.5, 1.0];
pub const EXTRAPOLATION_STEPS: [u32; 3] = [100, 400, 1600];

#[derive(Debug, Clone, Copy)]
pub struct Extrapolated {
    pub value: f64,
    pub std_error: f64,
    pub levels: [f64; 3],
}

pub fn extrapolate(levels: [(f64, f64); 3]) -> Extrapolated {
    let w = EXTRAPOLATION_WEIGHTS;
    let value = (0..3).map(|i| w[i] * levels[i].0).sum();
    let var: f64 = (0..3).map(|i| (w[i] * levels[i].1).powi(2)).sum();
    Extrapolated {
        value,
        std_error: var.sqrt(),
        levels: [levels[0].0, levels[1].0, levels[2].0],
    }
}

/// Monte Carlo price extrapolated to continuous monitoring. Each level
/// gets its own seed so the three estimates are independent.
pub fn mc_extrapolated(
    p: &AssetDynamics,
    c: Option<&ControlDynamics>,
    spec: &OptionSpec,
    paths: u64,
    seed: u64,
) -> Extrapolated {
    let mut levels = [(0.0, 0.0); 3];
    for (i, &n) in EXTRAPOLATION_STEPS.iter().enumerate() {
        let est = mc_price(p, c, spec, &McConfig::new(paths, n, seed + i as u64)).unwrap();
        levels[i] = (est.value, est.std_error);
    }
    extrapolate(levels)
}

/// Shared parameter set: mu = nu = r = 0.03, sigma = xi = 0.25, T = 1,
/// S0 = K = 100.
pub const RATE: f64 = 0.03;
pub const STRIKE: f64 = 100.0;

pub fn base_asset() -> AssetDynamics {
    AssetDynamics::new(0.03, 0.25, 100.0, 1.0).unwrap()
}

pub fn base_control(s0y: f64, rho: f64, barrier: f64) -> ControlDynamics {
    ControlDynamics::new(0.03, 0.25, s0y, Correlation::new(rho).unwrap(), barrier).unwrap()
}

/// Control with a log barrier of 0.2, as used for the propagator surfaces.
pub fn surface_control(rho: f64) -> ControlDynamics {
    ControlDynamics::from_log_barrier(0.03, 0.25, Correlation::new(rho).unwrap(), 0.2).unwrap()
}

pub fn barrier_spec() -> OptionSpec {
    OptionSpec::new(OptionKind::BarrierAveragePriceCall, STRIKE, RATE).unwrap()
}

pub fn average_price_spec(strike: f64) -> OptionSpec {
    OptionSpec::new(OptionKind::AveragePriceCall, strike, RATE).unwrap()
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

#[cfg(test)]
mod self_checks {
    // The harness-less acceptance target compiles this module without running it.
    #[allow(unused_imports)]
    use super::*;

    #[test]
    fn quadrature_integrates_gaussian() {
        let v = integrate(normal_pdf, -10.0, 10.0, 1e-15);
        assert!((v - 1.0).abs() < 1e-14);
    }

    #[test]
    fn extrapolation_is_exact_for_linear_bias() {
        // value(h) = 1 + 3h with h = 1, 1/2, 1/4.
        let e = extrapolate([(4.0, 0.0), (2.5, 0.0), (1.75, 0.0)]);
        assert!((e.value - 1.0).abs() < 1e-15);
    }
}
