//! Moments of the average logreturn: closed form against simulated paths.

use asianpath::{average_moments, simulate_paths, AssetDynamics, McConfig};

fn main() -> asianpath::Result<()> {
    let p = AssetDynamics::new(0.03, 0.25, 100.0, 1.0)?;
    let want = average_moments(&p, p.horizon)?;
    let recs: Vec<_> = simulate_paths(&p, None, &McConfig::new(500_000, 100, 5))?.collect();
    let n = recs.len() as f64;
    let mx = recs.iter().map(|r| r.x_terminal).sum::<f64>() / n;
    let ma = recs.iter().map(|r| r.x_average).sum::<f64>() / n;
    let (mut saa, mut sxx, mut sxa) = (0.0, 0.0, 0.0);
    for r in &recs {
        let (dx, da) = (r.x_terminal - mx, r.x_average - ma);
        saa += da * da;
        sxx += dx * dx;
        sxa += dx * da;
    }
    println!("mean      closed {:.6}  simulated {:.6}", want.mean, ma);
    println!(
        "variance  closed {:.6}  simulated {:.6}",
        want.variance,
        saa / (n - 1.0)
    );
    println!(
        "corr      closed {:.6}  simulated {:.6}",
        want.corr_with_x,
        sxa / (sxx * saa).sqrt()
    );
    Ok(())
}
