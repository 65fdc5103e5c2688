//! Monte Carlo oracle for the closed forms.
//!
//! Paths are simulated on a uniform grid of `n_steps` steps. The discrete
//! average of the logreturn is the trapezoidal mean
//! `(x_0/2 + x_1 + ... + x_{n-1} + x_n/2) / n`, whose variance differs from
//! the continuous `σ²T/3` only at `O(1/n²)`. The barrier is monitored at
//! every grid point including `t = 0`.
//!
//! Every path (or antithetic pair) draws from its own ChaCha8 stream keyed
//! by `(seed, path index)`. Paths are grouped into fixed blocks whose
//! summaries are merged in block order, so results are bit-identical for
//! any number of chunks and any thread schedule.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::{AssetDynamics, ControlDynamics};
use crate::error::{Error, Result};
use crate::pricers::{OptionKind, OptionSpec};
use crate::specialfn::{correlate, Correlation};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "ASIANPATH_THREADS";

/// Simulation units (paths, or antithetic pairs) per block.
const BLOCK_UNITS: u64 = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct McConfig {
    pub n_paths: u64,
    pub n_steps: u32,
    pub seed: u64,
    /// Parallel lanes. Affects scheduling only, never the result.
    pub n_chunks: u32,
    /// Pair every path with its reflection `z -> -z`.
    pub antithetic: bool,
}

impl McConfig {
    pub fn new(n_paths: u64, n_steps: u32, seed: u64) -> Self {
        McConfig {
            n_paths,
            n_steps,
            seed,
            n_chunks: 1,
            antithetic: false,
        }
    }

    pub fn chunks(mut self, n_chunks: u32) -> Self {
        self.n_chunks = n_chunks;
        self
    }

    pub fn antithetic(mut self, on: bool) -> Self {
        self.antithetic = on;
        self
    }

    /// Validates the config and rounds `n_paths` up to a multiple of
    /// `n_chunks` (and of 2 with antithetic pairing), logging a warning
    /// when it does.
    pub fn normalized(&self) -> Result<McConfig> {
        if self.n_paths == 0 {
            return Err(Error::Config("n_paths must be at least 1".into()));
        }
        if self.n_steps == 0 {
            return Err(Error::Config("n_steps must be at least 1".into()));
        }
        if self.n_chunks == 0 {
            return Err(Error::Config("n_chunks must be at least 1".into()));
        }
        let chunks = u64::from(self.n_chunks);
        let multiple = if self.antithetic && chunks % 2 == 1 {
            2 * chunks
        } else {
            chunks
        };
        let n_paths = self.n_paths.div_ceil(multiple) * multiple;
        if n_paths != self.n_paths {
            log::warn!(
                "n_paths {} rounded up to {} (multiple of {})",
                self.n_paths,
                n_paths,
                multiple
            );
        }
        Ok(McConfig { n_paths, ..*self })
    }

    /// Number of independent simulation units.
    fn units(&self) -> u64 {
        if self.antithetic {
            self.n_paths / 2
        } else {
            self.n_paths
        }
    }
}

/// Discounted Monte Carlo price with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PriceEstimate {
    pub value: f64,
    pub std_error: f64,
    /// Independent samples behind `std_error` (pairs under antithetic pairing).
    pub n_effective: u64,
    pub n_paths: u64,
    /// Share of paths knocked out; barrier runs only.
    pub knockout_fraction: Option<f64>,
}

/// Summary of one simulated path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PathRecord {
    pub x_terminal: f64,
    /// Trapezoidal time average of the logreturn.
    pub x_average: f64,
    /// Running maximum of `y`, when a control process is simulated.
    pub y_max: Option<f64>,
    pub knocked_out: bool,
}

#[derive(Debug, Clone, Copy)]
struct ControlStep {
    drift: f64,
    vol: f64,
    rho: Correlation,
    log_barrier: f64,
}

/// Per-step increments shared by all paths.
#[derive(Debug, Clone, Copy)]
struct Stepper {
    n_steps: u32,
    drift: f64,
    vol: f64,
    control: Option<ControlStep>,
}

impl Stepper {
    fn new(p: &AssetDynamics, c: Option<&ControlDynamics>, n_steps: u32) -> Self {
        let dt = p.horizon / f64::from(n_steps);
        Stepper {
            n_steps,
            drift: p.log_drift() * dt,
            vol: p.sigma * dt.sqrt(),
            control: c.map(|c| ControlStep {
                drift: c.log_drift() * dt,
                vol: c.xi * dt.sqrt(),
                rho: c.rho,
                log_barrier: c.log_barrier(),
            }),
        }
    }

    /// Simulates one path, and its antithetic twin when `pair` is set.
    fn simulate<R: Rng>(&self, rng: &mut R, pair: bool) -> (PathRecord, Option<PathRecord>) {
        let mut a = PathState::new(self.control.as_ref());
        let mut b = PathState::new(self.control.as_ref());
        for _ in 0..self.n_steps {
            let z1: f64 = rng.sample(StandardNormal);
            match self.control {
                None => {
                    a.step_x(self.drift, self.vol * z1);
                    if pair {
                        b.step_x(self.drift, -self.vol * z1);
                    }
                }
                Some(ctl) => {
                    let z_perp: f64 = rng.sample(StandardNormal);
                    let (zx, zy) = correlate(z1, z_perp, ctl.rho);
                    a.step_x(self.drift, self.vol * zx);
                    a.step_y(ctl.drift + ctl.vol * zy);
                    if pair {
                        b.step_x(self.drift, -self.vol * zx);
                        b.step_y(ctl.drift - ctl.vol * zy);
                    }
                }
            }
        }
        let barrier = self.control.map(|c| c.log_barrier);
        let first = a.finish(self.n_steps, barrier);
        let second = pair.then(|| b.finish(self.n_steps, barrier));
        (first, second)
    }
}

struct PathState {
    x: f64,
    // running sum of x_1..x_n
    sum: f64,
    y: f64,
    y_max: f64,
    has_control: bool,
}

impl PathState {
    fn new(control: Option<&ControlStep>) -> Self {
        PathState {
            x: 0.0,
            sum: 0.0,
            y: 0.0,
            y_max: 0.0,
            has_control: control.is_some(),
        }
    }

    #[inline]
    fn step_x(&mut self, drift: f64, shock: f64) {
        self.x += drift + shock;
        self.sum += self.x;
    }

    #[inline]
    fn step_y(&mut self, increment: f64) {
        self.y += increment;
        self.y_max = self.y_max.max(self.y);
    }

    fn finish(&self, n_steps: u32, log_barrier: Option<f64>) -> PathRecord {
        PathRecord {
            x_terminal: self.x,
            x_average: (self.sum - 0.5 * self.x) / f64::from(n_steps),
            y_max: self.has_control.then_some(self.y_max),
            knocked_out: log_barrier.is_some_and(|b| self.y_max >= b),
        }
    }
}

/// Stream factory: one ChaCha8 stream per simulation unit.
#[derive(Clone)]
struct Streams(ChaCha8Rng);

impl Streams {
    fn new(seed: u64) -> Self {
        Streams(ChaCha8Rng::seed_from_u64(seed))
    }

    fn unit(&self, index: u64) -> ChaCha8Rng {
        let mut rng = self.0.clone();
        rng.set_stream(index);
        rng
    }
}

/// Lazily generated sequence of path records, in path order. With
/// antithetic pairing each pair is yielded as two consecutive records.
pub struct PathStream {
    stepper: Stepper,
    streams: Streams,
    antithetic: bool,
    next_unit: u64,
    units: u64,
    pending: Option<PathRecord>,
}

impl Iterator for PathStream {
    type Item = PathRecord;

    fn next(&mut self) -> Option<PathRecord> {
        if let Some(r) = self.pending.take() {
            return Some(r);
        }
        if self.next_unit == self.units {
            return None;
        }
        let mut rng = self.streams.unit(self.next_unit);
        self.next_unit += 1;
        let (first, second) = self.stepper.simulate(&mut rng, self.antithetic);
        self.pending = second;
        Some(first)
    }
}

fn check_inputs(p: &AssetDynamics, c: Option<&ControlDynamics>) -> Result<()> {
    if p.horizon <= 0.0 {
        return Err(Error::param("T", "simulation needs a positive maturity"));
    }
    if let Some(c) = c {
        if !c.barrier.is_finite() && c.barrier != f64::INFINITY {
            return Err(Error::param("barrier", "must be a level or +inf"));
        }
    }
    Ok(())
}

/// Simulates `cfg.n_paths` paths of `x` (and of `y` when `c` is given).
/// Each step is `x += (μ - σ²/2)Δt + σ√Δt·z₁` and
/// `y += (ν - ξ²/2)Δt + ξ√Δt·z₂` with `corr(z₁, z₂) = ρ`.
pub fn simulate_paths(
    p: &AssetDynamics,
    c: Option<&ControlDynamics>,
    cfg: &McConfig,
) -> Result<PathStream> {
    let cfg = cfg.normalized()?;
    check_inputs(p, c)?;
    Ok(PathStream {
        stepper: Stepper::new(p, c, cfg.n_steps),
        streams: Streams::new(cfg.seed),
        antithetic: cfg.antithetic,
        next_unit: 0,
        units: cfg.units(),
        pending: None,
    })
}

/// Welford accumulator over unit payoffs plus a knockout counter.
#[derive(Debug, Clone, Copy, Default)]
struct Summary {
    count: u64,
    mean: f64,
    m2: f64,
    knocked_out: u64,
}

impl Summary {
    fn push(&mut self, v: f64) {
        self.count += 1;
        let delta = v - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (v - self.mean);
    }

    fn merge(self, other: Summary) -> Summary {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let w = other.count as f64 / count as f64;
        Summary {
            count,
            mean: self.mean + delta * w,
            m2: self.m2 + other.m2 + delta * delta * self.count as f64 * w,
            knocked_out: self.knocked_out + other.knocked_out,
        }
    }
}

/// Worker threads for `n_chunks` lanes, capped by [`THREADS_ENV`] or, when
/// unset, by the available parallelism.
pub fn lane_count(n_chunks: u32) -> usize {
    let cap = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    (n_chunks as usize).clamp(1, cap.max(1))
}

/// Runs `per_block` over the fixed block partition of `units`, on up to
/// `lanes` threads, returning block results in block order.
fn run_blocks<T, F>(units: u64, n_chunks: u32, per_block: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(std::ops::Range<u64>) -> T + Sync,
{
    let blocks: Vec<_> = (0..units.div_ceil(BLOCK_UNITS))
        .map(|b| b * BLOCK_UNITS..((b + 1) * BLOCK_UNITS).min(units))
        .collect();
    let lanes = lane_count(n_chunks);
    if lanes == 1 {
        return Ok(blocks.into_iter().map(per_block).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(lanes)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(|| blocks.into_par_iter().map(&per_block).collect()))
}

fn payoff(kind: OptionKind, s0: f64, strike: f64, r: &PathRecord) -> f64 {
    match kind {
        OptionKind::AverageStrikeCall => s0 * (r.x_terminal.exp() - r.x_average.exp()).max(0.0),
        OptionKind::AverageStrikePut => s0 * (r.x_average.exp() - r.x_terminal.exp()).max(0.0),
        OptionKind::AveragePriceCall => (s0 * r.x_average.exp() - strike).max(0.0),
        OptionKind::AveragePricePut => (strike - s0 * r.x_average.exp()).max(0.0),
        OptionKind::BarrierAveragePriceCall => {
            if r.knocked_out {
                0.0
            } else {
                (s0 * r.x_average.exp() - strike).max(0.0)
            }
        }
    }
}

/// Discounted expected payoff by simulation.
///
/// `value = e^{-rT} · mean(payoff)` and `std_error = e^{-rT} · sd / √n`,
/// where under antithetic pairing the sample is the pair averages.
pub fn mc_price(
    p: &AssetDynamics,
    c: Option<&ControlDynamics>,
    spec: &OptionSpec,
    cfg: &McConfig,
) -> Result<PriceEstimate> {
    let cfg = cfg.normalized()?;
    check_inputs(p, c)?;
    if spec.kind == OptionKind::BarrierAveragePriceCall && c.is_none() {
        return Err(Error::Config(
            "barrier option needs control-process dynamics".into(),
        ));
    }
    let stepper = Stepper::new(p, c, cfg.n_steps);
    let streams = Streams::new(cfg.seed);
    let (kind, s0, strike) = (spec.kind, p.s0, spec.strike);

    let blocks = run_blocks(cfg.units(), cfg.n_chunks, |range| {
        let mut s = Summary::default();
        for unit in range {
            let mut rng = streams.unit(unit);
            let (first, second) = stepper.simulate(&mut rng, cfg.antithetic);
            s.knocked_out += u64::from(first.knocked_out);
            let mut v = payoff(kind, s0, strike, &first);
            if let Some(second) = second {
                s.knocked_out += u64::from(second.knocked_out);
                v = 0.5 * (v + payoff(kind, s0, strike, &second));
            }
            s.push(v);
        }
        s
    })?;
    let total = blocks.into_iter().fold(Summary::default(), Summary::merge);

    let discount = (-spec.rate * p.horizon).exp();
    let std_error = if total.count > 1 {
        discount * (total.m2 / (total.count - 1) as f64).sqrt() / (total.count as f64).sqrt()
    } else {
        log::warn!("a single sample carries no standard error; reporting 0");
        0.0
    };
    let knockout_fraction = (kind == OptionKind::BarrierAveragePriceCall)
        .then(|| total.knocked_out as f64 / cfg.n_paths as f64);
    Ok(PriceEstimate {
        value: discount * total.mean,
        std_error,
        n_effective: total.count,
        n_paths: cfg.n_paths,
        knockout_fraction,
    })
}

/// Histograms of the exact discrete average and of the approximate
/// (separately drawn, correlated Gaussian) average over surviving paths.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AverageHistograms {
    /// `bins + 1` bin edges.
    pub edges: Vec<f64>,
    /// Normalized masses of the exact average.
    pub exact: Vec<f64>,
    /// Normalized masses of the approximate average.
    pub approx: Vec<f64>,
    pub surviving: u64,
    pub n_paths: u64,
}

impl AverageHistograms {
    /// `Σ |exact_i - approx_i|`.
    pub fn l1_distance(&self) -> f64 {
        self.exact
            .iter()
            .zip(&self.approx)
            .map(|(a, b)| (a - b).abs())
            .sum()
    }
}

/// Builds both histograms over `bins` equal bins spanning six standard
/// deviations of `x̄_T` either side of its mean; samples outside fall into
/// the edge bins. The approximate average of a path with terminal value
/// `x_T` is drawn as `m/2 + (x_T - m)/2 + σ√(T/12)·z`, `m = (μ - σ²/2)T`,
/// which has variance `σ²T/3` and correlation `√3/2` with `x_T`. Knocked-out
/// paths are dropped from both.
pub fn average_histograms(
    p: &AssetDynamics,
    c: &ControlDynamics,
    cfg: &McConfig,
    bins: usize,
) -> Result<AverageHistograms> {
    if bins < 10 {
        return Err(Error::Config(format!(
            "bins = {bins}; at least 10 are required"
        )));
    }
    p.require_nondegenerate()?;
    let cfg = cfg.normalized()?;
    check_inputs(p, Some(c))?;

    let t = p.horizon;
    let m = p.log_drift() * t;
    let sd_avg = p.sigma * (t / 3.0).sqrt();
    let sd_cond = p.sigma * (t / 12.0).sqrt();
    let lo = 0.5 * m - 6.0 * sd_avg;
    let width = 12.0 * sd_avg / bins as f64;
    let bin_of = |v: f64| (((v - lo) / width).floor().max(0.0) as usize).min(bins - 1);

    let stepper = Stepper::new(p, Some(c), cfg.n_steps);
    let streams = Streams::new(cfg.seed);
    let blocks = run_blocks(cfg.units(), cfg.n_chunks, |range| {
        let mut exact = vec![0u64; bins];
        let mut approx = vec![0u64; bins];
        for unit in range {
            let mut rng = streams.unit(unit);
            let (first, second) = stepper.simulate(&mut rng, cfg.antithetic);
            let z: f64 = rng.sample(StandardNormal);
            for (rec, sign) in [(Some(first), 1.0), (second, -1.0)] {
                let Some(rec) = rec else { continue };
                if rec.knocked_out {
                    continue;
                }
                let approx_avg = 0.5 * m + 0.5 * (rec.x_terminal - m) + sign * sd_cond * z;
                exact[bin_of(rec.x_average)] += 1;
                approx[bin_of(approx_avg)] += 1;
            }
        }
        (exact, approx)
    })?;

    let mut exact = vec![0u64; bins];
    let mut approx = vec![0u64; bins];
    for (e, a) in blocks {
        exact.iter_mut().zip(e).for_each(|(t, v)| *t += v);
        approx.iter_mut().zip(a).for_each(|(t, v)| *t += v);
    }
    let surviving: u64 = exact.iter().sum();
    if surviving == 0 {
        return Err(Error::Config(
            "every path was knocked out; histograms are empty".into(),
        ));
    }
    let normalize = |counts: Vec<u64>| -> Vec<f64> {
        counts
            .into_iter()
            .map(|n| n as f64 / surviving as f64)
            .collect()
    };
    Ok(AverageHistograms {
        edges: (0..=bins).map(|i| lo + width * i as f64).collect(),
        exact: normalize(exact),
        approx: normalize(approx),
        surviving,
        n_paths: cfg.n_paths,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn asset(sigma: f64) -> AssetDynamics {
        AssetDynamics::new(0.03, sigma, 100.0, 1.0).unwrap()
    }

    #[test]
    fn config_rounding() {
        let cfg = McConfig::new(10, 5, 1).chunks(4).normalized().unwrap();
        assert_eq!(cfg.n_paths, 12);
        let cfg = McConfig::new(7, 5, 1)
            .antithetic(true)
            .normalized()
            .unwrap();
        assert_eq!(cfg.n_paths, 8);
        let cfg = McConfig::new(10, 5, 1)
            .chunks(3)
            .antithetic(true)
            .normalized()
            .unwrap();
        assert_eq!(cfg.n_paths, 12);
        assert!(McConfig::new(0, 5, 1).normalized().is_err());
        assert!(McConfig::new(5, 0, 1).normalized().is_err());
        assert!(McConfig::new(5, 5, 1).chunks(0).normalized().is_err());
    }

    #[test]
    fn deterministic_without_noise() {
        let p = asset(0.0);
        let c = ControlDynamics::new(0.05, 0.0, 100.0, Correlation::ZERO, 200.0).unwrap();
        let paths: Vec<_> = simulate_paths(&p, Some(&c), &McConfig::new(3, 50, 9))
            .unwrap()
            .collect();
        for r in paths {
            assert!((r.x_terminal - 0.03).abs() < 1e-15);
            assert!((r.x_average - 0.015).abs() < 1e-15);
            assert!((r.y_max.unwrap() - 0.05).abs() < 1e-15);
            assert!(!r.knocked_out);
        }
    }

    #[test]
    fn knocked_out_iff_max_reaches_barrier() {
        let p = asset(0.25);
        let c = ControlDynamics::from_log_barrier(0.03, 0.25, Correlation::new(0.5).unwrap(), 0.1)
            .unwrap();
        let y_b = c.log_barrier();
        let mut seen = [false; 2];
        for r in simulate_paths(&p, Some(&c), &McConfig::new(2000, 20, 3)).unwrap() {
            assert_eq!(r.knocked_out, r.y_max.unwrap() >= y_b);
            seen[usize::from(r.knocked_out)] = true;
        }
        assert_eq!(seen, [true, true]);
    }

    #[test]
    fn barrier_at_spot_knocks_out_everything() {
        let c = ControlDynamics::new(0.03, 0.25, 150.0, Correlation::ZERO, 150.0).unwrap();
        let spec = OptionSpec::new(OptionKind::BarrierAveragePriceCall, 100.0, 0.03).unwrap();
        let est = mc_price(&asset(0.25), Some(&c), &spec, &McConfig::new(100, 10, 1)).unwrap();
        assert_eq!(est.value, 0.0);
        assert_eq!(est.knockout_fraction, Some(1.0));
    }

    #[test]
    fn antithetic_pairs_mirror_each_other() {
        let p = AssetDynamics::new(0.5 * 0.0625, 0.25, 100.0, 1.0).unwrap(); // zero log drift
        let recs: Vec<_> = simulate_paths(&p, None, &McConfig::new(6, 10, 4).antithetic(true))
            .unwrap()
            .collect();
        assert_eq!(recs.len(), 6);
        for pair in recs.chunks(2) {
            assert!((pair[0].x_terminal + pair[1].x_terminal).abs() < 1e-14);
            assert!((pair[0].x_average + pair[1].x_average).abs() < 1e-14);
        }
    }

    #[test]
    fn single_path_has_zero_error() {
        let spec = OptionSpec::average_strike_call(0.03).unwrap();
        let est = mc_price(&asset(0.25), None, &spec, &McConfig::new(1, 10, 1)).unwrap();
        assert_eq!(est.std_error, 0.0);
        assert_eq!(est.n_effective, 1);
    }

    #[test]
    fn barrier_kind_needs_control() {
        let spec = OptionSpec::new(OptionKind::BarrierAveragePriceCall, 100.0, 0.03).unwrap();
        let err = mc_price(&asset(0.25), None, &spec, &McConfig::new(10, 10, 1));
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn histogram_bins_validated() {
        let c = ControlDynamics::new(0.03, 0.25, 100.0, Correlation::ZERO, 150.0).unwrap();
        let err = average_histograms(&asset(0.25), &c, &McConfig::new(100, 10, 1), 9);
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn summary_merge_matches_sequential() {
        let data: Vec<f64> = (0..1000).map(|i| ((i * 37) % 101) as f64 * 0.1).collect();
        let mut all = Summary::default();
        data.iter().for_each(|&v| all.push(v));
        let (l, r) = data.split_at(333);
        let mut a = Summary::default();
        let mut b = Summary::default();
        l.iter().for_each(|&v| a.push(v));
        r.iter().for_each(|&v| b.push(v));
        let merged = a.merge(b);
        assert!((merged.mean - all.mean).abs() < 1e-12);
        assert!((merged.m2 - all.m2).abs() < 1e-9 * all.m2);
    }
}
