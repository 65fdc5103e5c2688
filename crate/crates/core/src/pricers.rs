//! Closed-form prices of geometric Asian calls.
//!
//! Drift `mu` and discount rate `r` are independent inputs. Risk-neutral
//! prices are obtained by passing `mu = r`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::dynamics::{AssetDynamics, ControlDynamics};
use crate::error::{Error, Result};
use crate::specialfn::{bivariate_normal_cdf, std_normal_cdf};

/// Breakdown flag: the price came from a deterministic limit branch.
pub const FLAG_ANALYTIC_LIMIT: &str = "analytic-limit";
/// Breakdown flag: `d6` carries the control shift `y_S` rather than the
/// asset shift `x_S` (see [`price_barrier_average_price_call`]).
pub const FLAG_D6_AMENDED: &str = "d6-amended:y_s";
/// Breakdown flag: the barrier was at or below the control spot.
pub const FLAG_KNOCKED_OUT: &str = "knocked-out-at-inception";
/// Breakdown flag: the barrier formula is exact only at zero correlation.
pub const FLAG_APPROXIMATE: &str = "approximate:nonzero-correlation";
/// Breakdown flag: the four-term sum came out negative and was floored.
pub const FLAG_FLOORED: &str = "floored-at-zero";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptionKind {
    /// Payoff `max(S_T - S̄_T, 0)`.
    AverageStrikeCall,
    /// Payoff `max(S̄_T - K, 0)`.
    AveragePriceCall,
    /// Average-price call, void once the control process reaches its barrier.
    BarrierAveragePriceCall,
    /// Payoff `max(S̄_T - S_T, 0)`. Monte Carlo only.
    AverageStrikePut,
    /// Payoff `max(K - S̄_T, 0)`. Monte Carlo only.
    AveragePricePut,
}

impl OptionKind {
    /// Whether the contract reads the strike.
    pub fn uses_strike(self) -> bool {
        !matches!(
            self,
            OptionKind::AverageStrikeCall | OptionKind::AverageStrikePut
        )
    }

    pub fn has_closed_form(self) -> bool {
        matches!(
            self,
            OptionKind::AverageStrikeCall
                | OptionKind::AveragePriceCall
                | OptionKind::BarrierAveragePriceCall
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptionSpec {
    pub kind: OptionKind,
    /// Strike; ignored by the average-strike call.
    pub strike: f64,
    /// Continuously compounded discount rate.
    pub rate: f64,
}

impl OptionSpec {
    pub fn new(kind: OptionKind, strike: f64, rate: f64) -> Result<Self> {
        if !rate.is_finite() {
            return Err(Error::param("r", "must be finite"));
        }
        if kind.uses_strike() && !(strike.is_finite() && strike > 0.0) {
            return Err(Error::param(
                "strike",
                format!("{strike} is not a positive strike"),
            ));
        }
        Ok(OptionSpec { kind, strike, rate })
    }

    pub fn average_strike_call(rate: f64) -> Result<Self> {
        Self::new(OptionKind::AverageStrikeCall, f64::NAN, rate)
    }
}

/// Named intermediate quantities of a closed-form price.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Breakdown {
    /// `d1`, `d2`, ... as used in the formula.
    #[serde(flatten)]
    pub d: BTreeMap<String, f64>,
    /// Individual terms and factors, before discounting unless named otherwise.
    pub terms: BTreeMap<String, f64>,
    pub flags: Vec<String>,
}

impl Breakdown {
    fn d(&mut self, name: &str, v: f64) {
        self.d.insert(name.to_owned(), v);
    }

    fn term(&mut self, name: &str, v: f64) {
        self.terms.insert(name.to_owned(), v);
    }

    fn flag(&mut self, f: &str) {
        self.flags.push(f.to_owned());
    }

    pub fn has_flag(&self, f: &str) -> bool {
        self.flags.iter().any(|g| g == f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PriceResult {
    pub value: f64,
    pub breakdown: Breakdown,
}

/// Average-strike geometric Asian call,
///
/// ```text
/// V = S₀e^{-rT} [ e^{μT} Φ(d1) - e^{(μ - σ²/6)T/2} Φ(d2) ]
/// d1 = sqrt(3T/(4σ²)) (μ + σ²/2),   d2 = sqrt(3T/(4σ²)) (μ - σ²/6)
/// ```
///
/// `sigma = 0` and `T = 0` evaluate the deterministic payoff
/// `S₀e^{-rT} max(e^{μT} - e^{μT/2}, 0)`.
pub fn price_average_strike_call(p: &AssetDynamics, rate: f64) -> Result<PriceResult> {
    if !rate.is_finite() {
        return Err(Error::param("r", "must be finite"));
    }
    let t = p.horizon;
    let discount = (-rate * t).exp();
    let mut b = Breakdown::default();
    b.term("discount", discount);

    if p.sigma == 0.0 || t == 0.0 {
        b.flag(FLAG_ANALYTIC_LIMIT);
        let payoff = ((p.mu * t).exp() - (0.5 * p.mu * t).exp()).max(0.0);
        b.term("payoff", p.s0 * payoff);
        return Ok(PriceResult {
            value: p.s0 * discount * payoff,
            breakdown: b,
        });
    }

    let s2 = p.sigma * p.sigma;
    let scale = (3.0 * t / (4.0 * s2)).sqrt();
    let d1 = scale * (p.mu + 0.5 * s2);
    let d2 = scale * (p.mu - s2 / 6.0);
    let terminal = (p.mu * t).exp();
    let average = ((p.mu - s2 / 6.0) * 0.5 * t).exp();
    b.d("d1", d1);
    b.d("d2", d2);
    b.term("terminal_factor", terminal);
    b.term("average_factor", average);
    let value = p.s0 * discount * (terminal * std_normal_cdf(d1) - average * std_normal_cdf(d2));
    Ok(PriceResult {
        value: value.max(0.0),
        breakdown: b,
    })
}

/// Average-price geometric Asian call.
///
/// `x̄_T` is normal with mean `m = (μ - σ²/2)T/2` and variance `v = σ²T/3`,
/// so with `k = ln(K/S₀)`
///
/// ```text
/// V = e^{-rT} [ S₀e^{m + v/2} Φ((m - k + v)/√v) - K Φ((m - k)/√v) ]
/// ```
pub fn price_average_price_call(p: &AssetDynamics, spec: &OptionSpec) -> Result<PriceResult> {
    let strike = spec.strike;
    if !(strike.is_finite() && strike > 0.0) {
        return Err(Error::param(
            "strike",
            format!("{strike} is not a positive strike"),
        ));
    }
    let t = p.horizon;
    let discount = (-spec.rate * t).exp();
    let mean = 0.5 * p.log_drift() * t;
    let var = p.sigma * p.sigma * t / 3.0;
    let mut b = Breakdown::default();
    b.term("discount", discount);
    b.term("average_mean", mean);
    b.term("average_variance", var);

    if var == 0.0 {
        b.flag(FLAG_ANALYTIC_LIMIT);
        let payoff = (p.s0 * mean.exp() - strike).max(0.0);
        b.term("payoff", payoff);
        return Ok(PriceResult {
            value: discount * payoff,
            breakdown: b,
        });
    }

    let k = (strike / p.s0).ln();
    let sd = var.sqrt();
    let d1 = (mean - k + var) / sd;
    let d2 = (mean - k) / sd;
    let forward = p.s0 * (mean + 0.5 * var).exp();
    b.d("d1", d1);
    b.d("d2", d2);
    b.term("average_forward", forward);
    let value = discount * (forward * std_normal_cdf(d1) - strike * std_normal_cdf(d2));
    Ok(PriceResult {
        value: value.max(0.0),
        breakdown: b,
    })
}

/// Average-price call on `x` with an up-and-out barrier `B` on the control
/// process `y`, continuously monitored. With `χ = -ρ√3/2`, `y_B = ln(B/S₀y)`,
/// `γ = 2[(4/ξ)(ν - ξ²/2) - 3(ρ/σ)(μ - σ²/2)] / (ξ(4 - 3ρ²))`,
/// `x_S = (2y_B/ξ)ρσ/(4 - 3ρ²)` and `y_S = 2y_B`:
///
/// ```text
/// V = e^{-rT} [ S₀x e^{(T/2)(μ-σ²/6)} N(d1,d2;χ) - K N(d3,d4;χ)
///             - S₀x e^{(3T/σ²)(x_S/T + σ²/6)(2x_S/T + μ - σ²/6)} (B/S₀y)^γ N(d5,d6;χ)
///             + K e^{(3/σ²) x_S (2x_S/T + μ - σ²/2)} (B/S₀y)^γ N(d7,d8;χ) ]
/// ```
///
/// The mirror shift in `d6` is `y_S`, matching `d8`. With `x_S` there the
/// zero-correlation price would not reduce to the product of the
/// average-price integral and the reflection-principle survival
/// probability. The breakdown carries [`FLAG_D6_AMENDED`].
///
/// Exact at `rho = 0`, an approximation otherwise. A barrier at or below
/// `S₀y` returns zero flagged [`FLAG_KNOCKED_OUT`]; `B = inf` reduces to
/// [`price_average_price_call`].
pub fn price_barrier_average_price_call(
    p: &AssetDynamics,
    c: &ControlDynamics,
    spec: &OptionSpec,
) -> Result<PriceResult> {
    let strike = spec.strike;
    if !(strike.is_finite() && strike > 0.0) {
        return Err(Error::param(
            "strike",
            format!("{strike} is not a positive strike"),
        ));
    }
    if !spec.rate.is_finite() {
        return Err(Error::param("r", "must be finite"));
    }
    c.rho.strict()?;
    if p.sigma <= 0.0 {
        return Err(Error::param(
            "sigma",
            "must be strictly positive for the barrier formula",
        ));
    }
    if c.xi <= 0.0 {
        return Err(Error::param(
            "xi",
            "must be strictly positive for the barrier formula",
        ));
    }

    let t = p.horizon;
    let discount = (-spec.rate * t).exp();
    let mut b = Breakdown::default();
    b.term("discount", discount);

    if c.is_knocked_out() {
        b.flag(FLAG_KNOCKED_OUT);
        return Ok(PriceResult {
            value: 0.0,
            breakdown: b,
        });
    }
    if t == 0.0 {
        b.flag(FLAG_ANALYTIC_LIMIT);
        return Ok(PriceResult {
            value: (p.s0 - strike).max(0.0),
            breakdown: b,
        });
    }

    let (mu, sigma, s0x) = (p.mu, p.sigma, p.s0);
    let (xi, rho) = (c.xi, c.rho.value());
    let s2 = sigma * sigma;
    let m = p.log_drift();
    let a = c.log_drift();
    let k = (strike / s0x).ln();
    let y_b = c.log_barrier();
    let sd_avg = (s2 * t / 3.0).sqrt();
    let sd_y = xi * t.sqrt();
    let chi = -(0.75f64).sqrt() * rho;
    b.term("chi", chi);
    b.term("y_b", y_b);

    let d1 = -(k - 0.5 * t * (mu + s2 / 6.0)) / sd_avg;
    let d3 = -(k - 0.5 * t * m) / sd_avg;
    let (d2, d4) = if y_b.is_finite() {
        (
            (y_b - t * (a + 0.5 * sigma * xi * rho)) / sd_y,
            (y_b - t * a) / sd_y,
        )
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    let term1 = s0x * (0.5 * t * (mu - s2 / 6.0)).exp() * bivariate_normal_cdf(d1, d2, chi);
    let term2 = strike * bivariate_normal_cdf(d3, d4, chi);
    for (name, v) in [("d1", d1), ("d2", d2), ("d3", d3), ("d4", d4)] {
        b.d(name, v);
    }
    b.term("term1", term1);
    b.term("term2", term2);

    let (term3, term4) = if y_b.is_finite() {
        let denom = 4.0 - 3.0 * rho * rho;
        let x_s = 2.0 * y_b / xi * rho * sigma / denom;
        let y_s = 2.0 * y_b;
        let gamma = 2.0 * (4.0 / xi * a - 3.0 * rho / sigma * m) / (xi * denom);
        let u = x_s / t;
        let d5 = -(k - t * (2.0 * u + 0.5 * (mu + s2 / 6.0))) / sd_avg;
        let d6 = (y_b
            - t / sigma
                * (3.0 * xi * rho * u + sigma * y_s / t + sigma * (a + 0.5 * sigma * xi * rho)))
            / sd_y;
        let d7 = -(k - t * (2.0 * u + 0.5 * m)) / sd_avg;
        let d8 = (y_b
            - t / (2.0 * sigma)
                * ((6.0 * rho * x_s * xi + 2.0 * sigma * y_s) / t + 2.0 * sigma * a))
            / sd_y;
        let log_barrier_factor = gamma * y_b;
        let log_f3 = 3.0 * t / s2 * (u + s2 / 6.0) * (2.0 * u + mu - s2 / 6.0) + log_barrier_factor;
        let log_f4 = 3.0 / s2 * x_s * (2.0 * u + m) + log_barrier_factor;
        let term3 = s0x * scaled(log_f3, bivariate_normal_cdf(d5, d6, chi));
        let term4 = strike * scaled(log_f4, bivariate_normal_cdf(d7, d8, chi));
        for (name, v) in [("d5", d5), ("d6", d6), ("d7", d7), ("d8", d8)] {
            b.d(name, v);
        }
        b.term("x_s", x_s);
        b.term("y_s", y_s);
        b.term("barrier_exponent", gamma);
        b.term("term3", term3);
        b.term("term4", term4);
        b.flag(FLAG_D6_AMENDED);
        (term3, term4)
    } else {
        (0.0, 0.0)
    };

    if rho != 0.0 {
        b.flag(FLAG_APPROXIMATE);
    }
    let raw = discount * (term1 - term2 - term3 + term4);
    b.term("raw_value", raw);
    let value = if raw < 0.0 {
        b.flag(FLAG_FLOORED);
        0.0
    } else {
        raw
    };
    Ok(PriceResult {
        value,
        breakdown: b,
    })
}

/// `exp(log_factor) * prob`, zero when the probability underflows so that a
/// huge factor never meets a zero.
fn scaled(log_factor: f64, prob: f64) -> f64 {
    if prob == 0.0 {
        0.0
    } else {
        (log_factor + prob.ln()).exp()
    }
}

/// Dispatches on `spec.kind`. The barrier kind needs control dynamics;
/// puts have no closed form and return [`Error::Config`].
pub fn price(
    p: &AssetDynamics,
    c: Option<&ControlDynamics>,
    spec: &OptionSpec,
) -> Result<PriceResult> {
    match spec.kind {
        OptionKind::AverageStrikeCall => price_average_strike_call(p, spec.rate),
        OptionKind::AveragePriceCall => price_average_price_call(p, spec),
        OptionKind::BarrierAveragePriceCall => {
            let c = c.ok_or_else(|| {
                Error::Config("barrier option needs control-process dynamics".into())
            })?;
            price_barrier_average_price_call(p, c, spec)
        }
        OptionKind::AverageStrikePut | OptionKind::AveragePricePut => Err(Error::Config(
            "no closed form for puts; price them with the Monte Carlo engine".into(),
        )),
    }
}

/// Continuous-monitoring survival probability of `y` below its barrier,
/// `P(max_{t≤T} y_t < y_B)`, by the reflection principle.
pub fn survival_probability(c: &ControlDynamics, horizon: f64) -> Result<f64> {
    c.require_nondegenerate()?;
    if c.is_knocked_out() {
        return Ok(0.0);
    }
    let y_b = c.log_barrier();
    if !y_b.is_finite() {
        return Ok(1.0);
    }
    let a = c.log_drift();
    let sd = c.xi * horizon.sqrt();
    let reflected =
        (2.0 * a * y_b / (c.xi * c.xi)).exp() * std_normal_cdf((-y_b - a * horizon) / sd);
    Ok(std_normal_cdf((y_b - a * horizon) / sd) - reflected)
}
