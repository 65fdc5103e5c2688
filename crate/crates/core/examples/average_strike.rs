//! Closed-form average-strike call against a Monte Carlo estimate.
//!
//! cargo run --release --example average_strike -- [paths]

use asianpath::{mc_price, price_average_strike_call, AssetDynamics, McConfig, OptionSpec};

fn main() -> asianpath::Result<()> {
    let paths = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(500_000);
    let rate = 0.03;
    println!(
        "{:>6} {:>5} {:>10} {:>10} {:>9} {:>8}",
        "sigma", "T", "closed", "mc", "se", "rel"
    );
    for (sigma, t) in [(0.15, 1.0), (0.25, 1.0), (0.25, 3.0), (0.5, 0.5)] {
        let p = AssetDynamics::new(rate, sigma, 100.0, t)?;
        let closed = price_average_strike_call(&p, rate)?;
        let spec = OptionSpec::average_strike_call(rate)?;
        let est = mc_price(
            &p,
            None,
            &spec,
            &McConfig::new(paths, 100, 1).antithetic(true),
        )?;
        println!(
            "{sigma:>6} {t:>5} {:>10.5} {:>10.5} {:>9.5} {:>+8.4}%",
            closed.value,
            est.value,
            est.std_error,
            100.0 * (est.value / closed.value - 1.0)
        );
    }
    Ok(())
}
