//! Barrier propagator on an (x, y) grid at fixed average, with the barrier
//! at y_B = 0.2. Prints the surface as CSV; the last column splits the
//! value into its direct and image parts.
//!
//! cargo run --release --example propagator_surface -- [rho] > surface.csv

use asianpath::{
    barrier_density_terms, AssetDynamics, ControlDynamics, Correlation, Error, StatePoint,
};

fn main() -> asianpath::Result<()> {
    let rho: f64 = std::env::args()
        .nth(1)
        .and_then(|s| s.parse().ok())
        .unwrap_or(0.0);
    let p = AssetDynamics::new(0.03, 0.25, 1.0, 1.0)?;
    let c = ControlDynamics::from_log_barrier(0.03, 0.25, Correlation::new(rho)?, 0.2)?;
    let xbar = 0.05;
    println!("x,y,density,direct,image");
    for i in 0..=40 {
        let x = -0.6 + 1.4 * i as f64 / 40.0;
        for j in 0..=40 {
            let y = -0.6 + (c.log_barrier() + 0.6) * j as f64 / 40.0;
            match barrier_density_terms(&p, &c, &StatePoint::with_control(x, xbar, y)) {
                Ok(t) => println!("{x:.4},{y:.4},{:e},{:e},{:e}", t.value, t.direct, t.image),
                // Strong correlation leaves parts of the plane without a mirror average.
                Err(Error::MirrorDomain { .. }) => continue,
                Err(e) => return Err(e),
            }
        }
    }
    Ok(())
}
