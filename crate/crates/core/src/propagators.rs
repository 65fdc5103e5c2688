//! Closed-form transition densities.
//!
//! * [`joint_density`]: density of the terminal logreturn `x_T` together with
//!   its time average `x̄_T`.
//! * [`two_process_density`]: the same, extended with a correlated control
//!   logreturn `y_T`.
//! * [`barrier_density`]: the two-process density with an absorbing
//!   up-and-out barrier on `y`, built by subtracting a weighted mirror
//!   source placed at `(x_S, y_S)` with a terminal-point dependent mirror
//!   average `x̄_S`.
//!
//! All densities require strictly positive volatilities and maturity.

use std::f64::consts::PI;

use serde::Serialize;

use crate::dynamics::{AssetDynamics, ControlDynamics};
use crate::error::{Error, Result};

/// A terminal point `(x_T, x̄_T)` and optionally `y_T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StatePoint {
    pub x: f64,
    pub xbar: f64,
    pub y: Option<f64>,
}

impl StatePoint {
    pub fn new(x: f64, xbar: f64) -> Self {
        StatePoint { x, xbar, y: None }
    }

    pub fn with_control(x: f64, xbar: f64, y: f64) -> Self {
        StatePoint {
            x,
            xbar,
            y: Some(y),
        }
    }

    fn finite(&self) -> Result<()> {
        if !(self.x.is_finite() && self.xbar.is_finite() && self.y.is_none_or(f64::is_finite)) {
            return Err(Error::param("state", "coordinates must be finite"));
        }
        Ok(())
    }

    fn control(&self) -> Result<f64> {
        self.y
            .ok_or_else(|| Error::param("state", "control coordinate y is required"))
    }
}

/// Joint density of `(x_T, x̄_T)`:
///
/// ```text
/// √3/(πσ²T) · exp{ -[x - (μ - σ²/2)T]² / (2σ²T) - 6(x̄ - x/2)² / (σ²T) }
/// ```
pub fn joint_density(p: &AssetDynamics, s: &StatePoint) -> Result<f64> {
    p.require_nondegenerate()?;
    s.finite()?;
    let v = p.sigma * p.sigma * p.horizon;
    let dx = s.x - p.log_drift() * p.horizon;
    let dm = s.xbar - 0.5 * s.x;
    Ok(3f64.sqrt() / (PI * v) * (-0.5 * dx * dx / v - 6.0 * dm * dm / v).exp())
}

/// Mean, variance and correlation with `x_t` of the running average `x̄_t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AverageMoments {
    pub mean: f64,
    pub variance: f64,
    pub corr_with_x: f64,
}

/// Moments of `x̄_t` at time `t ∈ (0, T]`: `((μ - σ²/2)t/2, σ²t/3, √3/2)`.
pub fn average_moments(p: &AssetDynamics, t: f64) -> Result<AverageMoments> {
    if !(t > 0.0 && t <= p.horizon) {
        return Err(Error::param("t", format!("{t} is outside (0, T]")));
    }
    Ok(AverageMoments {
        mean: 0.5 * p.log_drift() * t,
        variance: p.sigma * p.sigma * t / 3.0,
        corr_with_x: 0.75f64.sqrt(),
    })
}

/// Log of the normalizing prefactor of the three-variable density.
fn two_process_log_prefactor(p: &AssetDynamics, c: &ControlDynamics) -> f64 {
    let t = p.horizon;
    let one_minus_rho2 = (1.0 - c.rho.value()) * (1.0 + c.rho.value());
    0.5 * (3.0 / (2.0 * PI.powi(3) * t.powi(3) * p.sigma.powi(4) * c.xi * c.xi * one_minus_rho2))
        .ln()
}

/// Exponent of the three-variable density at `(x, y, x̄)` from the origin.
fn two_process_exponent(p: &AssetDynamics, c: &ControlDynamics, x: f64, y: f64, xbar: f64) -> f64 {
    let t = p.horizon;
    let rho = c.rho.value();
    let one_minus_rho2 = (1.0 - rho) * (1.0 + rho);
    let dx = x - p.log_drift() * t;
    let dy = y - c.log_drift() * t;
    let dm = xbar - 0.5 * x;
    rho / (p.sigma * c.xi * one_minus_rho2 * t) * dx * dy
        - dx * dx / (2.0 * p.sigma * p.sigma * one_minus_rho2 * t)
        - dy * dy / (2.0 * c.xi * c.xi * one_minus_rho2 * t)
        - 6.0 / (p.sigma * p.sigma * t) * dm * dm
}

/// Density of `(x_T, y_T, x̄_T)` for the correlated pair of processes,
/// without barrier. Needs `|rho| < 1` and `s.y`.
pub fn two_process_density(p: &AssetDynamics, c: &ControlDynamics, s: &StatePoint) -> Result<f64> {
    p.require_nondegenerate()?;
    c.require_nondegenerate()?;
    s.finite()?;
    let y = s.control()?;
    Ok((two_process_log_prefactor(p, c) + two_process_exponent(p, c, s.x, y, s.xbar)).exp())
}

/// Starting point of the mirror source for one terminal point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MirrorSource {
    pub x_s: f64,
    pub y_s: f64,
    pub xbar_s: f64,
}

/// Mirror coordinates for terminal point `(x, x̄)`:
///
/// ```text
/// x_S = (2y_B/ξ) · ρσ / (4 - 3ρ²)
/// y_S = 2y_B
/// x̄_S = [-(x_S - x) + sqrt((x_S - x)² + 4x̄(x̄ - x))] / 2
/// ```
///
/// Errors with [`Error::MirrorDomain`] when the square-root argument is
/// negative; no value is substituted.
pub fn mirror_source(
    p: &AssetDynamics,
    c: &ControlDynamics,
    x: f64,
    xbar: f64,
) -> Result<MirrorSource> {
    let rho = c.rho.value();
    let y_b = c.log_barrier();
    let x_s = 2.0 * y_b / c.xi * rho * p.sigma / (4.0 - 3.0 * rho * rho);
    let discriminant = (x_s - x).powi(2) + 4.0 * xbar * (xbar - x);
    if discriminant < 0.0 {
        return Err(Error::MirrorDomain {
            x,
            xbar,
            discriminant,
        });
    }
    Ok(MirrorSource {
        x_s,
        y_s: 2.0 * y_b,
        xbar_s: 0.5 * (-(x_s - x) + discriminant.sqrt()),
    })
}

/// Log of the image weight
/// `(2y_B / (ξ(4 - 3ρ²))) · [(4/ξ)(ν - ξ²/2) - 3(ρ/σ)(μ - σ²/2)]`.
pub fn image_log_weight(p: &AssetDynamics, c: &ControlDynamics) -> f64 {
    let rho = c.rho.value();
    2.0 * c.log_barrier() / (c.xi * (4.0 - 3.0 * rho * rho))
        * (4.0 / c.xi * c.log_drift() - 3.0 * rho / p.sigma * p.log_drift())
}

/// Direct and image contributions of the barrier density at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BarrierDensityTerms {
    /// Unconstrained three-variable density at the point.
    pub direct: f64,
    /// Weighted mirror density that is subtracted.
    pub image: f64,
    /// `direct - image`.
    pub value: f64,
}

/// Evaluates both terms of the barrier density without the `y < y_B`
/// cut-off. At `y = y_B` the two terms cancel.
pub fn barrier_density_terms(
    p: &AssetDynamics,
    c: &ControlDynamics,
    s: &StatePoint,
) -> Result<BarrierDensityTerms> {
    p.require_nondegenerate()?;
    c.require_nondegenerate()?;
    s.finite()?;
    let y = s.control()?;
    let log_pref = two_process_log_prefactor(p, c);
    let direct = (log_pref + two_process_exponent(p, c, s.x, y, s.xbar)).exp();
    if !c.has_barrier() {
        return Ok(BarrierDensityTerms {
            direct,
            image: 0.0,
            value: direct,
        });
    }
    let m = mirror_source(p, c, s.x, s.xbar)?;
    let image = (image_log_weight(p, c)
        + log_pref
        + two_process_exponent(p, c, s.x - m.x_s, y - m.y_s, m.xbar_s))
    .exp();
    Ok(BarrierDensityTerms {
        direct,
        image,
        value: direct - image,
    })
}

/// Barrier propagator: density of `(x_T, y_T, x̄_T)` restricted to paths of
/// `y` that stay below `y_B`. Zero at and above the barrier.
pub fn barrier_density(p: &AssetDynamics, c: &ControlDynamics, s: &StatePoint) -> Result<f64> {
    p.require_nondegenerate()?;
    c.require_nondegenerate()?;
    s.finite()?;
    if s.control()? >= c.log_barrier() {
        return Ok(0.0);
    }
    barrier_density_terms(p, c, s).map(|t| t.value)
}
