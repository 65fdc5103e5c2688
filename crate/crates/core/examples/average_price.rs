//! Average-price call across strikes: closed form, Monte Carlo, and the
//! put obtained by simulation only.

use asianpath::{
    mc_price, price_average_price_call, AssetDynamics, McConfig, OptionKind, OptionSpec,
};

fn main() -> asianpath::Result<()> {
    let p = AssetDynamics::new(0.03, 0.25, 100.0, 1.0)?;
    let cfg = McConfig::new(200_000, 100, 7);
    println!(
        "{:>6} {:>10} {:>16} {:>16}",
        "K", "call", "call mc", "put mc"
    );
    for k in [80.0, 90.0, 100.0, 110.0, 120.0] {
        let call = OptionSpec::new(OptionKind::AveragePriceCall, k, 0.03)?;
        let put = OptionSpec::new(OptionKind::AveragePricePut, k, 0.03)?;
        let closed = price_average_price_call(&p, &call)?;
        let mc_call = mc_price(&p, None, &call, &cfg)?;
        let mc_put = mc_price(&p, None, &put, &cfg)?;
        println!(
            "{k:>6} {:>10.5} {:>9.5} ±{:.4} {:>9.5} ±{:.4}",
            closed.value, mc_call.value, mc_call.std_error, mc_put.value, mc_put.std_error
        );
    }
    Ok(())
}
