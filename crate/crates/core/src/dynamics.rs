use serde::Serialize;

use crate::error::{Error, Result};
use crate::specialfn::Correlation;

/// Black-Scholes dynamics of the priced asset. The logreturn
/// `x_t = ln(S_t / S_0)` follows `dx = (mu - sigma²/2) dt + sigma dW`.
///
/// `sigma = 0` and `horizon = 0` are admitted here so pricers can take the
/// analytic limits; density evaluation rejects them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AssetDynamics {
    /// Drift per year.
    pub mu: f64,
    /// Volatility per square-root year.
    pub sigma: f64,
    /// Spot price.
    pub s0: f64,
    /// Maturity in years.
    pub horizon: f64,
}

impl AssetDynamics {
    pub fn new(mu: f64, sigma: f64, s0: f64, horizon: f64) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::param("mu", "must be finite"));
        }
        if !(sigma.is_finite() && sigma >= 0.0) {
            return Err(Error::param(
                "sigma",
                format!("{sigma} is not a volatility"),
            ));
        }
        if !(s0.is_finite() && s0 > 0.0) {
            return Err(Error::param("s0", format!("{s0} is not a positive price")));
        }
        if !(horizon.is_finite() && horizon >= 0.0) {
            return Err(Error::param("T", format!("{horizon} is not a maturity")));
        }
        Ok(AssetDynamics {
            mu,
            sigma,
            s0,
            horizon,
        })
    }

    /// Drift of the logreturn, `mu - sigma²/2`.
    #[inline]
    pub fn log_drift(&self) -> f64 {
        self.mu - 0.5 * self.sigma * self.sigma
    }

    pub(crate) fn require_nondegenerate(&self) -> Result<()> {
        if self.sigma <= 0.0 {
            return Err(Error::param("sigma", "must be strictly positive here"));
        }
        if self.horizon <= 0.0 {
            return Err(Error::param("T", "must be strictly positive here"));
        }
        Ok(())
    }
}

/// Dynamics of the control process `dy = (nu - xi²/2) dt + xi dZ`, with
/// `<dW dZ> = rho dt`, carrying an up-and-out barrier at level `barrier`.
///
/// A barrier at or below `s0y` is representable; pricers report it as
/// knocked out at inception. `barrier = +inf` means no barrier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ControlDynamics {
    pub nu: f64,
    pub xi: f64,
    pub s0y: f64,
    pub rho: Correlation,
    pub barrier: f64,
}

impl ControlDynamics {
    pub fn new(nu: f64, xi: f64, s0y: f64, rho: Correlation, barrier: f64) -> Result<Self> {
        if !nu.is_finite() {
            return Err(Error::param("nu", "must be finite"));
        }
        if !(xi.is_finite() && xi >= 0.0) {
            return Err(Error::param("xi", format!("{xi} is not a volatility")));
        }
        if !(s0y.is_finite() && s0y > 0.0) {
            return Err(Error::param(
                "s0y",
                format!("{s0y} is not a positive price"),
            ));
        }
        if barrier.is_nan() || barrier <= 0.0 {
            return Err(Error::param(
                "barrier",
                format!("{barrier} is not a positive level"),
            ));
        }
        Ok(ControlDynamics {
            nu,
            xi,
            s0y,
            rho,
            barrier,
        })
    }

    /// Builds dynamics directly from the barrier in log units,
    /// `y_B = ln(B / s0y)`, with `s0y = 1`.
    pub fn from_log_barrier(nu: f64, xi: f64, rho: Correlation, log_barrier: f64) -> Result<Self> {
        if log_barrier.is_nan() {
            return Err(Error::param("barrier", "log barrier is NaN"));
        }
        Self::new(nu, xi, 1.0, rho, log_barrier.exp())
    }

    /// `y_B = ln(B / s0y)`.
    #[inline]
    pub fn log_barrier(&self) -> f64 {
        (self.barrier / self.s0y).ln()
    }

    #[inline]
    pub fn log_drift(&self) -> f64 {
        self.nu - 0.5 * self.xi * self.xi
    }

    pub fn is_knocked_out(&self) -> bool {
        self.barrier <= self.s0y
    }

    pub fn has_barrier(&self) -> bool {
        self.barrier.is_finite()
    }

    pub(crate) fn require_nondegenerate(&self) -> Result<()> {
        if self.xi <= 0.0 {
            return Err(Error::param("xi", "must be strictly positive here"));
        }
        self.rho.strict()?;
        Ok(())
    }
}
