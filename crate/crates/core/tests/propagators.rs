mod common;

use asianpath::{
    average_moments, barrier_density, barrier_density_terms, joint_density, mc_price,
    price_barrier_average_price_call, survival_probability, two_process_density, AssetDynamics,
    ControlDynamics, Error, McConfig, StatePoint,
};
use common::{base_asset, base_control, integrate_2d, integrate_3d, normal_pdf, surface_control};
use proptest::prelude::*;

struct Box3 {
    x: (f64, f64),
    xbar: (f64, f64),
    y: (f64, f64),
}

/// ±8 standard deviations per coordinate around the mean.
fn box_for(p: &AssetDynamics, c: &ControlDynamics) -> Box3 {
    let t = p.horizon;
    let m = p.log_drift() * t;
    let (sx, sa, sy) = (
        p.sigma * t.sqrt(),
        p.sigma * (t / 3.0).sqrt(),
        c.xi * t.sqrt(),
    );
    let my = c.log_drift() * t;
    Box3 {
        x: (m - 8.0 * sx, m + 8.0 * sx),
        xbar: (m / 2.0 - 8.0 * sa, m / 2.0 + 8.0 * sa),
        y: (my - 8.0 * sy, my + 8.0 * sy),
    }
}

#[test]
fn joint_density_normalizes_with_exact_moments() {
    for (mu, sigma, t) in [(0.03, 0.25, 1.0), (-0.1, 0.6, 2.5), (0.2, 0.1, 0.25)] {
        let p = AssetDynamics::new(mu, sigma, 100.0, t).unwrap();
        let c = base_control(100.0, 0.0, f64::INFINITY);
        let b = box_for(&p, &c);
        let k = |x: f64, a: f64| joint_density(&p, &StatePoint::new(x, a)).unwrap();
        let mass = integrate_2d(k, b.x, b.xbar, 1e-11);
        let mom = average_moments(&p, t).unwrap();
        let mean = integrate_2d(|x, a| a * k(x, a), b.x, b.xbar, 1e-12);
        let var = integrate_2d(|x, a| (a - mom.mean).powi(2) * k(x, a), b.x, b.xbar, 1e-13);
        assert!((mass - 1.0).abs() <= 1e-8, "mass {mass}");
        assert!(
            (mean - mom.mean).abs() <= 1e-8,
            "mean {mean} vs {}",
            mom.mean
        );
        assert!(
            (var - mom.variance).abs() <= 1e-8,
            "variance {var} vs {}",
            mom.variance
        );
    }
}

#[test]
fn joint_density_equals_generic_gaussian_form() {
    let p = base_asset();
    for (x, a) in [(0.1, 0.05), (-0.3, 0.1), (0.5, 0.4), (0.0, -0.2)] {
        let got = joint_density(&p, &StatePoint::new(x, a)).unwrap();
        let want = common::gaussian_form_density(0.03, 0.25, 1.0, x, a);
        assert!(
            (got - want).abs() <= 1e-12 * want,
            "({x}, {a}): {got} vs {want}"
        );
    }
}

#[test]
fn two_process_density_normalizes() {
    let p = base_asset();
    for rho in [0.0, 0.5, -0.8] {
        let c = surface_control(rho);
        let b = box_for(&p, &c);
        let mass = integrate_3d(
            |x, a, y| two_process_density(&p, &c, &StatePoint::with_control(x, a, y)).unwrap(),
            b.x,
            b.xbar,
            b.y,
            1e-9,
        );
        assert!((mass - 1.0).abs() <= 1e-6, "rho {rho}: mass {mass}");
    }
}

#[test]
fn two_process_density_factorizes_without_correlation() {
    let p = base_asset();
    let c = surface_control(0.0);
    let my = c.log_drift();
    for (x, a, y) in [(0.1, 0.05, 0.0), (-0.2, -0.15, 0.3), (0.4, 0.1, -0.5)] {
        let got = two_process_density(&p, &c, &StatePoint::with_control(x, a, y)).unwrap();
        let want =
            joint_density(&p, &StatePoint::new(x, a)).unwrap() * normal_pdf((y - my) / 0.25) / 0.25;
        assert!((got - want).abs() <= 1e-12 * want);
    }
}

#[test]
fn two_process_marginal_in_x_is_lognormal_law() {
    let p = base_asset();
    let c = surface_control(0.6);
    let b = box_for(&p, &c);
    let m = p.log_drift();
    for x in [-0.4, 0.0, 0.03, 0.3] {
        let got = integrate_2d(
            |a, y| two_process_density(&p, &c, &StatePoint::with_control(x, a, y)).unwrap(),
            b.xbar,
            b.y,
            1e-12,
        );
        let want = normal_pdf((x - m) / 0.25) / 0.25;
        assert!((got - want).abs() <= 1e-8 * want, "x {x}: {got} vs {want}");
    }
}

#[test]
fn barrier_density_vanishes_on_the_barrier() {
    let p = base_asset();
    for rho in [0.0, 0.4, -0.6, 0.8] {
        let c = surface_control(rho);
        let y_b = c.log_barrier();
        let mut peak = 0.0f64;
        let mut worst = 0.0f64;
        for &x in &common::linspace(-0.6, 0.8, 21) {
            for &a in &common::linspace(-0.3, 0.4, 21) {
                for &y in &common::linspace(-0.6, y_b, 21) {
                    if let Ok(d) = barrier_density(&p, &c, &StatePoint::with_control(x, a, y)) {
                        peak = peak.max(d);
                    }
                }
                match barrier_density_terms(&p, &c, &StatePoint::with_control(x, a, y_b)) {
                    Ok(t) => worst = worst.max(t.value.abs()),
                    Err(Error::MirrorDomain { .. }) => assert!(rho != 0.0),
                    Err(e) => panic!("{e}"),
                }
            }
        }
        assert!(peak > 0.0);
        assert!(
            worst <= 1e-10 * peak,
            "rho {rho}: {worst:e} vs peak {peak:e}"
        );
    }
}

#[test]
fn barrier_density_below_free_density() {
    let p = base_asset();
    for rho in [0.0, 0.5] {
        let c = surface_control(rho);
        let mut violations = 0;
        for &x in &common::linspace(-0.6, 0.8, 15) {
            for &a in &common::linspace(-0.3, 0.4, 15) {
                for &y in &common::linspace(-0.6, 0.19, 15) {
                    let s = StatePoint::with_control(x, a, y);
                    let Ok(t) = barrier_density_terms(&p, &c, &s) else {
                        continue;
                    };
                    if t.image >= 0.0 && t.value > t.direct * (1.0 + 1e-12) {
                        violations += 1;
                    }
                    if rho == 0.0 {
                        assert!(t.image >= 0.0);
                        assert!(t.value <= t.direct);
                    } else if t.value < 0.0 {
                        violations += 1;
                    }
                }
            }
        }
        if violations > 0 {
            eprintln!("rho {rho}: {violations} grid points with negative or excess density");
        }
    }
}

/// Integrated barrier density at rho = 0 is the survival probability of the
/// control process, since the mirror weight leaves the (x, xbar) marginal
/// intact.
#[test]
fn barrier_density_integrates_to_survival() {
    let p = base_asset();
    for (s0y, barrier) in [(100.0, 150.0), (100.0, 120.0)] {
        let c = base_control(s0y, 0.0, barrier);
        let b = box_for(&p, &c);
        let y_b = c.log_barrier();
        let mass = integrate_3d(
            |y, x, a| barrier_density(&p, &c, &StatePoint::with_control(x, a, y)).unwrap(),
            (b.y.0, y_b),
            b.x,
            b.xbar,
            1e-9,
        );
        let want = survival_probability(&c, 1.0).unwrap();
        assert!((mass - want).abs() <= 1e-6, "B {barrier}: {mass} vs {want}");
    }
}

#[test]
fn survival_matches_extrapolated_monte_carlo() {
    let p = base_asset();
    let c = base_control(100.0, 0.0, 120.0);
    let spec = common::barrier_spec();
    const PATHS: u64 = 1_000_000;
    let mut levels = [(0.0, 0.0); 3];
    for (i, &n) in common::EXTRAPOLATION_STEPS.iter().enumerate() {
        let est = mc_price(
            &p,
            Some(&c),
            &spec,
            &McConfig::new(PATHS, n, 900 + i as u64),
        )
        .unwrap();
        let s = 1.0 - est.knockout_fraction.unwrap();
        levels[i] = (s, (s * (1.0 - s) / PATHS as f64).sqrt());
    }
    let e = common::extrapolate(levels);
    let want = survival_probability(&c, 1.0).unwrap();
    let z = (e.value - want) / e.std_error;
    eprintln!(
        "survival: closed form {want:.6}, extrapolated {:.6} ± {:.6}, z {z:.2}",
        e.value, e.std_error
    );
    assert!(z.abs() <= 3.0);
}

#[test]
fn barrier_density_prices_the_contract_at_zero_correlation() {
    let p = base_asset();
    let spec = common::barrier_spec();
    for s0y in [90.0, 120.0] {
        let c = base_control(s0y, 0.0, 150.0);
        let b = box_for(&p, &c);
        let disc = (-common::RATE).exp();
        let kink = (common::STRIKE / p.s0).ln();
        let value = integrate_3d(
            |a, x, y| {
                let d = barrier_density(&p, &c, &StatePoint::with_control(x, a, y)).unwrap();
                disc * (p.s0 * a.exp() - common::STRIKE) * d
            },
            (kink, b.xbar.1),
            b.x,
            (b.y.0, c.log_barrier()),
            1e-7,
        );
        let want = price_barrier_average_price_call(&p, &c, &spec)
            .unwrap()
            .value;
        assert!(
            (value - want).abs() <= 1e-6 * want,
            "s0y {s0y}: {value} vs {want}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 64,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn densities_are_positive_and_symmetric_in_noise(
        x in -1.0f64..1.0, a in -0.6f64..0.6, y in -1.0f64..0.19, rho in -0.95f64..0.95
    ) {
        let p = base_asset();
        let c = surface_control(rho);
        let s = StatePoint::with_control(x, a, y);
        prop_assert!(joint_density(&p, &s).unwrap() > 0.0);
        prop_assert!(two_process_density(&p, &c, &s).unwrap() >= 0.0);
        // Flipping the sign of both noises and drifts maps the density onto itself.
        let q = AssetDynamics::new(-p.mu + p.sigma * p.sigma, p.sigma, 1.0, 1.0).unwrap();
        let d = ControlDynamics::from_log_barrier(-c.nu + c.xi * c.xi, c.xi, c.rho, 1.0).unwrap();
        let mirrored = two_process_density(&q, &d, &StatePoint::with_control(-x, -a, -y)).unwrap();
        let direct = two_process_density(&p, &c, &s).unwrap();
        prop_assert!((mirrored - direct).abs() <= 1e-10 * direct.max(1e-300));
    }
}
