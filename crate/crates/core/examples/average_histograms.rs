//! Distribution of the path average over surviving paths, against the
//! average treated as a separate Gaussian process correlated with the
//! terminal value. Without correlation to the control process the two
//! agree; with strong correlation the knockout filter separates them.
//!
//! cargo run --release --example average_histograms -- [out.csv]

use std::io::Write;

use asianpath::{average_histograms, AssetDynamics, ControlDynamics, Correlation, McConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let p = AssetDynamics::new(0.03, 0.25, 100.0, 1.0)?;
    let cfg = McConfig::new(200_000, 100, 3);
    let mut csv = std::env::args()
        .nth(1)
        .map(std::fs::File::create)
        .transpose()?;
    if let Some(f) = csv.as_mut() {
        writeln!(f, "rho,bin_left,bin_right,exact_mass,approx_mass")?;
    }
    for rho in [0.0, 0.3, 0.8] {
        let c = ControlDynamics::new(0.03, 0.25, 100.0, Correlation::new(rho)?, 120.0)?;
        let h = average_histograms(&p, &c, &cfg, 40)?;
        println!(
            "rho {rho}: {} of {} paths survive, L1 distance {:.4}",
            h.surviving,
            h.n_paths,
            h.l1_distance()
        );
        if let Some(f) = csv.as_mut() {
            for i in 0..h.exact.len() {
                writeln!(
                    f,
                    "{rho},{},{},{},{}",
                    h.edges[i],
                    h.edges[i + 1],
                    h.exact[i],
                    h.approx[i]
                )?;
            }
        }
    }
    Ok(())
}
