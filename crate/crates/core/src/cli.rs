//! The `asianpath` command-line front end.
//!
//! Subcommands: `price`, `mc`, `sweep`, `histogram`, `propagator-grid`.
//! JSON goes to stdout; CSV goes to `--out` with a `<out>.manifest.json`
//! next to it. Exit codes: 0 success, 2 usage error, 3 domain error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

use crate::dynamics::{AssetDynamics, ControlDynamics};
use crate::error::Error;
use crate::montecarlo::{average_histograms, mc_price, McConfig};
use crate::pricers::{price, OptionKind, OptionSpec};
use crate::propagators::{barrier_density, joint_density, two_process_density, StatePoint};
use crate::specialfn::Correlation;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DOMAIN: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "asianpath", version, about = "Geometric Asian option pricing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form price with its intermediate terms.
    Price(PriceArgs),
    /// Monte Carlo price with standard error.
    Mc(McArgs),
    /// Analytic and Monte Carlo prices over a parameter range, as CSV.
    Sweep(SweepArgs),
    /// Exact vs approximate average histograms over surviving paths, as CSV.
    Histogram(HistogramArgs),
    /// Density values on a two-dimensional grid, as CSV.
    PropagatorGrid(GridArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum KindArg {
    AvgStrikeCall,
    AvgPriceCall,
    BarrierAvgPriceCall,
    AvgStrikePut,
    AvgPricePut,
}

impl KindArg {
    fn option_kind(self) -> OptionKind {
        match self {
            KindArg::AvgStrikeCall => OptionKind::AverageStrikeCall,
            KindArg::AvgPriceCall => OptionKind::AveragePriceCall,
            KindArg::BarrierAvgPriceCall => OptionKind::BarrierAveragePriceCall,
            KindArg::AvgStrikePut => OptionKind::AverageStrikePut,
            KindArg::AvgPricePut => OptionKind::AveragePricePut,
        }
    }

    fn name(self) -> &'static str {
        match self {
            KindArg::AvgStrikeCall => "avg-strike-call",
            KindArg::AvgPriceCall => "avg-price-call",
            KindArg::BarrierAvgPriceCall => "barrier-avg-price-call",
            KindArg::AvgStrikePut => "avg-strike-put",
            KindArg::AvgPricePut => "avg-price-put",
        }
    }
}

#[derive(Debug, Clone, Args, Serialize)]
struct AssetArgs {
    /// Drift of the asset, per year.
    #[arg(long, allow_negative_numbers = true)]
    mu: f64,
    /// Volatility of the asset, per square-root year.
    #[arg(long)]
    sigma: f64,
    /// Spot price of the asset.
    #[arg(long)]
    s0: f64,
    /// Maturity in years.
    #[arg(long = "T")]
    horizon: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
struct ControlArgs {
    /// Drift of the control process, per year.
    #[arg(long, allow_negative_numbers = true)]
    nu: Option<f64>,
    /// Volatility of the control process.
    #[arg(long)]
    xi: Option<f64>,
    /// Spot of the control process.
    #[arg(long)]
    s0y: Option<f64>,
    /// Correlation between the asset and the control process.
    #[arg(long, allow_negative_numbers = true)]
    rho: Option<f64>,
    /// Up-and-out barrier level on the control process.
    #[arg(long)]
    barrier: Option<f64>,
}

#[derive(Debug, Clone, Args, Serialize)]
struct PriceArgs {
    #[arg(long, value_enum)]
    kind: KindArg,
    #[command(flatten)]
    #[serde(flatten)]
    asset: AssetArgs,
    /// Discount rate, per year.
    #[arg(long, allow_negative_numbers = true)]
    r: f64,
    #[arg(long)]
    strike: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    control: ControlArgs,
}

#[derive(Debug, Clone, Args, Serialize)]
struct McFlags {
    #[arg(long, default_value_t = 500_000)]
    paths: u64,
    #[arg(long, default_value_t = 100)]
    steps: u32,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    chunks: u32,
    #[arg(long)]
    antithetic: bool,
}

impl McFlags {
    fn config(&self) -> McConfig {
        McConfig::new(self.paths, self.steps, self.seed)
            .chunks(self.chunks)
            .antithetic(self.antithetic)
    }
}

#[derive(Debug, Clone, Args, Serialize)]
struct McArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pricing: PriceArgs,
    #[command(flatten)]
    #[serde(flatten)]
    mc: McFlags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum SweepParam {
    S0y,
    S0,
    Strike,
    Barrier,
    Sigma,
    Xi,
}

#[derive(Debug, Clone, Args, Serialize)]
struct SweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pricing: PriceArgs,
    #[command(flatten)]
    #[serde(flatten)]
    mc: McFlags,
    /// Parameter to vary.
    #[arg(long, value_enum)]
    param: SweepParam,
    #[arg(long, allow_negative_numbers = true)]
    from: f64,
    #[arg(long, allow_negative_numbers = true)]
    to: f64,
    #[arg(long)]
    points: usize,
    /// Correlations to sweep; defaults to `--rho`.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    rho_list: Vec<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
struct HistogramArgs {
    #[command(flatten)]
    #[serde(flatten)]
    asset: AssetArgs,
    #[command(flatten)]
    #[serde(flatten)]
    control: ControlArgs,
    #[command(flatten)]
    #[serde(flatten)]
    mc: McFlags,
    #[arg(long, default_value_t = 50)]
    bins: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum DensityArg {
    Barrier,
    TwoProcess,
    Joint,
}

#[derive(Debug, Clone, Args, Serialize)]
struct GridArgs {
    #[arg(long, value_enum, default_value_t = DensityArg::Barrier)]
    density: DensityArg,
    #[arg(long, allow_negative_numbers = true)]
    mu: f64,
    #[arg(long)]
    sigma: f64,
    #[arg(long = "T")]
    horizon: f64,
    #[arg(long, allow_negative_numbers = true)]
    nu: Option<f64>,
    #[arg(long)]
    xi: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    rho: Option<f64>,
    /// Barrier in log units, `ln(B / s0y)`; alternative to --barrier/--s0y.
    #[arg(long, allow_negative_numbers = true)]
    yb: Option<f64>,
    #[arg(long)]
    barrier: Option<f64>,
    #[arg(long)]
    s0y: Option<f64>,
    /// Axis spec `coord=lo:hi:n` with coord one of x, xbar, y. Give two.
    #[arg(long, num_args = 1)]
    grid: Vec<String>,
    /// Fixed value of the remaining coordinate, `coord=value`.
    #[arg(long)]
    at: Option<String>,
    /// Omit points where the mirror average is undefined instead of failing.
    #[arg(long)]
    skip_undefined: bool,
    #[arg(long)]
    out: PathBuf,
}

/// Provenance attached to every output.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: serde_json::Value,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub timestamp: String,
}

impl RunManifest {
    fn new(command: &str, inputs: &impl Serialize, seed: Option<u64>) -> Self {
        RunManifest {
            command: command.to_owned(),
            inputs: serde_json::to_value(inputs).unwrap_or(serde_json::Value::Null),
            seed,
            tool_version: env!("CARGO_PKG_VERSION").to_owned(),
            timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        }
    }
}

/// Command failure, mapped onto an exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Domain(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Domain(format!("i/o: {e}"))
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Runs the CLI on `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    let result = match cli.command {
        Command::Price(a) => cmd_price(&a, out),
        Command::Mc(a) => cmd_mc(&a, out, err),
        Command::Sweep(a) => cmd_sweep(&a),
        Command::Histogram(a) => cmd_histogram(&a),
        Command::PropagatorGrid(a) => cmd_propagator_grid(&a),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Domain(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_DOMAIN
        }
    }
}

fn require(v: Option<f64>, flag: &str, what: &str) -> Result<f64, Failure> {
    v.ok_or_else(|| Failure::Usage(format!("--{flag} is required for {what}")))
}

fn asset_dynamics(a: &AssetArgs) -> Result<AssetDynamics, Failure> {
    Ok(AssetDynamics::new(a.mu, a.sigma, a.s0, a.horizon)?)
}

fn control_dynamics(
    c: &ControlArgs,
    rho: Option<f64>,
    what: &str,
) -> Result<ControlDynamics, Failure> {
    let rho = rho.or(c.rho).unwrap_or(0.0);
    Ok(ControlDynamics::new(
        require(c.nu, "nu", what)?,
        require(c.xi, "xi", what)?,
        require(c.s0y, "s0y", what)?,
        Correlation::new(rho)?,
        require(c.barrier, "barrier", what)?,
    )?)
}

struct Contract {
    asset: AssetDynamics,
    control: Option<ControlDynamics>,
    spec: OptionSpec,
}

fn contract(a: &PriceArgs, rho: Option<f64>) -> Result<Contract, Failure> {
    let kind = a.kind.option_kind();
    let what = a.kind.name();
    let strike = if kind.uses_strike() {
        require(a.strike, "strike", what)?
    } else {
        f64::NAN
    };
    let control = if kind == OptionKind::BarrierAveragePriceCall {
        Some(control_dynamics(&a.control, rho, what)?)
    } else {
        None
    };
    Ok(Contract {
        asset: asset_dynamics(&a.asset)?,
        control,
        spec: OptionSpec::new(kind, strike, a.r)?,
    })
}

fn print_json(out: &mut dyn Write, v: &serde_json::Value) -> CmdResult {
    let text = serde_json::to_string_pretty(v).map_err(|e| Failure::Domain(e.to_string()))?;
    writeln!(out, "{text}")?;
    Ok(())
}

fn cmd_price(a: &PriceArgs, out: &mut dyn Write) -> CmdResult {
    let c = contract(a, None)?;
    let result = price(&c.asset, c.control.as_ref(), &c.spec)?;
    print_json(
        out,
        &json!({
            "kind": a.kind.name(),
            "inputs": a,
            "value": result.value,
            "breakdown": result.breakdown,
            "manifest": RunManifest::new("price", a, None),
        }),
    )
}

fn cmd_mc(a: &McArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    let c = contract(&a.pricing, None)?;
    let est = mc_price(&c.asset, c.control.as_ref(), &c.spec, &a.mc.config())?;
    let std_error = if est.n_effective > 1 {
        json!(est.std_error)
    } else {
        writeln!(err, "warning: one sample only; standard error is undefined")?;
        serde_json::Value::Null
    };
    let mut body = json!({
        "kind": a.pricing.kind.name(),
        "value": est.value,
        "std_error": std_error,
        "n_effective": est.n_effective,
        "n_paths": est.n_paths,
        "manifest": RunManifest::new("mc", a, Some(a.mc.seed)),
    });
    if let Some(f) = est.knockout_fraction {
        body["knockout_fraction"] = json!(f);
    }
    print_json(out, &body)
}

/// Float formatting for CSV: 17 significant digits.
pub fn csv_float(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_csv_with_manifest(path: &Path, csv: &str, manifest: &RunManifest) -> CmdResult {
    std::fs::write(path, csv)?;
    let mut mpath = path.as_os_str().to_owned();
    mpath.push(".manifest.json");
    let text =
        serde_json::to_string_pretty(manifest).map_err(|e| Failure::Domain(e.to_string()))?;
    std::fs::write(PathBuf::from(mpath), text + "\n")?;
    Ok(())
}

/// Inclusive, evenly spaced points; a single point sits at `from`.
fn linspace(from: f64, to: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![from];
    }
    (0..n)
        .map(|i| {
            if i == n - 1 {
                to
            } else {
                from + (to - from) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

fn cmd_sweep(a: &SweepArgs) -> CmdResult {
    if a.points == 0 {
        return Err(Failure::Usage("--points must be at least 1".into()));
    }
    if !(a.from.is_finite() && a.to.is_finite()) || (a.points > 1 && a.from >= a.to) {
        return Err(Failure::Usage(format!(
            "--from {} --to {} is not an increasing range",
            a.from, a.to
        )));
    }
    if !a.pricing.kind.option_kind().has_closed_form() {
        return Err(Failure::Domain(format!(
            "{} has no closed form to sweep",
            a.pricing.kind.name()
        )));
    }
    let rhos = if a.rho_list.is_empty() {
        vec![a.pricing.control.rho.unwrap_or(0.0)]
    } else {
        a.rho_list.clone()
    };

    let mut csv = String::from("param_value,rho,analytic_value,mc_value,mc_std_error\n");
    for v in linspace(a.from, a.to, a.points) {
        let mut args = a.pricing.clone();
        match a.param {
            SweepParam::S0y => args.control.s0y = Some(v),
            SweepParam::S0 => args.asset.s0 = v,
            SweepParam::Strike => args.strike = Some(v),
            SweepParam::Barrier => args.control.barrier = Some(v),
            SweepParam::Sigma => args.asset.sigma = v,
            SweepParam::Xi => args.control.xi = Some(v),
        }
        for &rho in &rhos {
            let c = contract(&args, Some(rho))?;
            let analytic = price(&c.asset, c.control.as_ref(), &c.spec)?;
            let est = mc_price(&c.asset, c.control.as_ref(), &c.spec, &a.mc.config())?;
            writeln!(
                csv,
                "{},{},{},{},{}",
                csv_float(v),
                csv_float(rho),
                csv_float(analytic.value),
                csv_float(est.value),
                csv_float(est.std_error)
            )
            .expect("writing to a String");
        }
    }
    write_csv_with_manifest(&a.out, &csv, &RunManifest::new("sweep", a, Some(a.mc.seed)))
}

fn cmd_histogram(a: &HistogramArgs) -> CmdResult {
    if a.bins < 10 {
        return Err(Failure::Usage(format!(
            "--bins {} is below the minimum of 10",
            a.bins
        )));
    }
    let p = asset_dynamics(&a.asset)?;
    let c = control_dynamics(&a.control, None, "histogram")?;
    let h = average_histograms(&p, &c, &a.mc.config(), a.bins)?;
    let mut csv = String::from("bin_left,bin_right,exact_mass,approx_mass\n");
    for i in 0..a.bins {
        writeln!(
            csv,
            "{},{},{},{}",
            csv_float(h.edges[i]),
            csv_float(h.edges[i + 1]),
            csv_float(h.exact[i]),
            csv_float(h.approx[i])
        )
        .expect("writing to a String");
    }
    let mut manifest = RunManifest::new("histogram", a, Some(a.mc.seed));
    manifest.inputs["surviving_paths"] = json!(h.surviving);
    manifest.inputs["l1_distance"] = json!(h.l1_distance());
    write_csv_with_manifest(&a.out, &csv, &manifest)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Coord {
    X,
    Xbar,
    Y,
}

impl Coord {
    fn parse(s: &str) -> Result<Coord, Failure> {
        match s.trim() {
            "x" => Ok(Coord::X),
            "xbar" => Ok(Coord::Xbar),
            "y" => Ok(Coord::Y),
            other => Err(Failure::Usage(format!(
                "unknown coordinate `{other}` (expected x, xbar or y)"
            ))),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Coord::X => "x",
            Coord::Xbar => "xbar",
            Coord::Y => "y",
        }
    }
}

struct Axis {
    coord: Coord,
    values: Vec<f64>,
}

fn parse_axis(spec: &str) -> Result<Axis, Failure> {
    let bad = || Failure::Usage(format!("--grid `{spec}` is not of the form coord=lo:hi:n"));
    let (name, range) = spec.split_once('=').ok_or_else(bad)?;
    let parts: Vec<_> = range.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err(bad());
    };
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    if n == 0 || !(lo.is_finite() && hi.is_finite()) || (n > 1 && lo >= hi) {
        return Err(bad());
    }
    Ok(Axis {
        coord: Coord::parse(name)?,
        values: linspace(lo, hi, n),
    })
}

fn cmd_propagator_grid(a: &GridArgs) -> CmdResult {
    let [first, second] = a.grid.as_slice() else {
        return Err(Failure::Usage("--grid must be given exactly twice".into()));
    };
    let (ax1, ax2) = (parse_axis(first)?, parse_axis(second)?);
    if ax1.coord == ax2.coord {
        return Err(Failure::Usage("the two --grid axes must differ".into()));
    }
    let fixed_coord = [Coord::X, Coord::Xbar, Coord::Y]
        .into_iter()
        .find(|c| *c != ax1.coord && *c != ax2.coord)
        .expect("three coordinates");
    let fixed_value = match &a.at {
        None => 0.0,
        Some(at) => {
            let bad = || Failure::Usage(format!("--at `{at}` is not of the form coord=value"));
            let (name, v) = at.split_once('=').ok_or_else(bad)?;
            if Coord::parse(name)? != fixed_coord {
                return Err(Failure::Usage(format!(
                    "--at must fix `{}`, the coordinate not on the grid",
                    fixed_coord.name()
                )));
            }
            v.trim().parse().map_err(|_| bad())?
        }
    };

    let p = AssetDynamics::new(a.mu, a.sigma, 1.0, a.horizon)?;
    let control = if a.density == DensityArg::Joint {
        if fixed_coord != Coord::Y {
            return Err(Failure::Usage("the joint density has no y axis".into()));
        }
        None
    } else {
        let what = "this density";
        let rho = Correlation::new(require(a.rho, "rho", what)?)?;
        let (nu, xi) = (require(a.nu, "nu", what)?, require(a.xi, "xi", what)?);
        let c = match a.yb {
            Some(yb) => ControlDynamics::from_log_barrier(nu, xi, rho, yb)?,
            None if a.density == DensityArg::TwoProcess && a.barrier.is_none() => {
                ControlDynamics::new(nu, xi, 1.0, rho, f64::INFINITY)?
            }
            None => ControlDynamics::new(
                nu,
                xi,
                require(a.s0y, "s0y", what)?,
                rho,
                require(a.barrier, "barrier", what)?,
            )?,
        };
        rho.strict()?;
        if a.density == DensityArg::Barrier {
            let y_b = c.log_barrier();
            let y_max = if fixed_coord == Coord::Y {
                fixed_value
            } else {
                let ys = if ax1.coord == Coord::Y {
                    &ax1.values
                } else {
                    &ax2.values
                };
                ys.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            };
            if y_max > y_b {
                return Err(Failure::Domain(format!(
                    "grid reaches y = {y_max}, above the barrier y_B = {y_b}"
                )));
            }
        }
        Some(c)
    };

    let mut csv = format!("{},{},density\n", ax1.coord.name(), ax2.coord.name());
    let mut skipped = 0u64;
    for &u in &ax1.values {
        for &v in &ax2.values {
            let mut point = [0.0; 3];
            point[ax1.coord as usize] = u;
            point[ax2.coord as usize] = v;
            point[fixed_coord as usize] = fixed_value;
            let [x, xbar, y] = point;
            let density = match (a.density, control.as_ref()) {
                (DensityArg::Joint, _) => joint_density(&p, &StatePoint::new(x, xbar)),
                (DensityArg::TwoProcess, Some(c)) => {
                    two_process_density(&p, c, &StatePoint::with_control(x, xbar, y))
                }
                (DensityArg::Barrier, Some(c)) => {
                    barrier_density(&p, c, &StatePoint::with_control(x, xbar, y))
                }
                _ => unreachable!("control dynamics are built for every two-process density"),
            };
            match density {
                Ok(d) => writeln!(csv, "{},{},{}", csv_float(u), csv_float(v), csv_float(d))
                    .expect("writing to a String"),
                Err(Error::MirrorDomain { .. }) if a.skip_undefined => skipped += 1,
                Err(e) => return Err(e.into()),
            }
        }
    }
    let mut manifest = RunManifest::new("propagator-grid", a, None);
    manifest.inputs["skipped_points"] = json!(skipped);
    write_csv_with_manifest(&a.out, &csv, &manifest)
}
