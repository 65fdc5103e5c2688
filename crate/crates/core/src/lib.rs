//! Pricing of geometric Asian options in the Black-Scholes model.
//!
//! The library is organized bottom-up:
//!
//! * [`specialfn`]: error function, normal and bivariate normal CDFs,
//!   correlated normal sampling.
//! * [`dynamics`]: parameters of the priced asset and of the control process.
//! * [`propagators`]: closed-form transition densities of the logreturn and
//!   its time average, with and without a barrier on the control process.
//! * [`pricers`]: closed-form prices of average-strike, average-price and
//!   barrier average-price calls.
//! * [`montecarlo`]: the simulation engine used to check all of the above.
//! * [`cli`]: the `asianpath` command-line front end.

pub mod cli;
pub mod dynamics;
pub mod error;
pub mod montecarlo;
pub mod pricers;
pub mod propagators;
pub mod specialfn;

pub use dynamics::{AssetDynamics, ControlDynamics};
pub use error::{Error, Result};
pub use montecarlo::{
    average_histograms, mc_price, simulate_paths, AverageHistograms, McConfig, PathRecord,
    PriceEstimate,
};
pub use pricers::{
    price, price_average_price_call, price_average_strike_call, price_barrier_average_price_call,
    survival_probability, Breakdown, OptionKind, OptionSpec, PriceResult,
};
pub use propagators::{
    average_moments, barrier_density, barrier_density_terms, joint_density, mirror_source,
    two_process_density, AverageMoments, StatePoint,
};
pub use specialfn::{
    bivariate_normal_cdf, erf, sample_correlated_pair, std_normal_cdf, Correlation,
};
