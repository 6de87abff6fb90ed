//! Command-line frontend for the tunnelcatch pipeline.
//!
//! Every number is printed with `{:.16e}` so runs are byte-reproducible and
//! can be pinned in regression tests. Exit codes: 0 ok, 2 bad input, 3
//! numerical failure, 4 nothing found.

use std::f64::consts::PI;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use tunnelcatch::dynamics::{grid_propagate, occupation_probabilities, write_csv};
use tunnelcatch::eigensolve::{
    classical_frequency, discretize_double_well, discretize_isolated_left,
    discretize_isolated_right, eigenvalues_between, solve_bound_states, BoundState, Grid,
};
use tunnelcatch::scanner::{
    infer_energy, scan, write_curve_csv, write_peaks_report, DeltaMethod, ScanCurve,
    ScanParameter,
};
use tunnelcatch::semiclassic::{barrier_center, two_level_spectrum, wkb_delta};
use tunnelcatch::squarewell::solve_levels;
use tunnelcatch::{
    check_separation, DoubleWellSpec, Error, PhysicalWellSpec, SquareWellSpec, WellFamily,
};

#[derive(Parser)]
#[command(name = "tunnelcatch", version, about = "Semiclassical double-well tunneling pipeline")]
struct Cli {
    /// Scenario file (JSON)
    #[arg(long, value_name = "PATH")]
    scenario: PathBuf,
    /// Override the scenario's hbar
    #[arg(long, value_name = "X")]
    hbar: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Isolated-well levels, the level pair, and two-level predictions
    Spectrum,
    /// Resonance scan of the transfer probability over width or depth
    Scan(ScanArgs),
    /// Occupation dynamics started from the left-well state
    Evolve(EvolveArgs),
    /// Closed-loop energy detection from the first resonance peak
    Detect(ScanArgs),
}

#[derive(Args)]
struct ScanArgs {
    /// Probe parameter to sweep
    #[arg(long, value_enum)]
    param: Option<ParamFlag>,
    /// Sweep range as lo:hi
    #[arg(long, value_parser = parse_range, value_name = "LO:HI")]
    range: Option<(f64, f64)>,
    /// Uniform pre-scan sample count
    #[arg(long, value_name = "N")]
    samples: Option<usize>,
    /// Directory for curve.csv and peaks.txt
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvolveArgs {
    /// Propagation method
    #[arg(long, value_enum)]
    method: Option<MethodFlag>,
    /// Time horizon (default: one transfer time pi hbar / Delta)
    #[arg(long, value_name = "T")]
    t_final: Option<f64>,
    /// Number of time steps
    #[arg(long, value_name = "N")]
    steps: Option<usize>,
    /// Directory for trace.csv
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ParamFlag {
    Width,
    Depth,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
enum MethodFlag {
    #[value(name = "two_level")]
    TwoLevel,
    Grid,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
enum DeltaFlag {
    Wkb,
    Wronskian,
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected LO:HI, got {s:?}"))?;
    let lo: f64 = lo.parse().map_err(|_| format!("bad range start {lo:?}"))?;
    let hi: f64 = hi.parse().map_err(|_| format!("bad range end {hi:?}"))?;
    Ok((lo, hi))
}

// ---------------------------------------------------------------------------
// scenario files

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    left: LeftWell,
    right: RightWell,
    hbar: f64,
    #[serde(default)]
    run: RunControls,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LeftWell {
    family: Family,
    depth: f64,
    center: f64,
    omega: Option<f64>,
    support: Option<f64>,
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case")]
enum Family {
    HarmonicCap,
    SmoothBump,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RightWell {
    b: f64,
    w: f64,
    v: f64,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct RunControls {
    /// Index of the left-well level to catch.
    level: usize,
    grid_step: Option<f64>,
    grid_padding: Option<f64>,
    scan: Option<ScanControls>,
    time: Option<TimeControls>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScanControls {
    parameter: Option<ParamFlag>,
    range: Option<[f64; 2]>,
    samples: Option<usize>,
    delta_method: Option<DeltaFlag>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TimeControls {
    t_final: Option<f64>,
    steps: Option<usize>,
    method: Option<MethodFlag>,
}

// ---------------------------------------------------------------------------
// failure plumbing

enum Failure {
    Usage(String),
    Io(String),
    Lib(Error),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Usage(m) | Failure::Io(m) => f.write_str(m),
            Failure::Lib(e) => write!(f, "{e}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn exit_code(failure: &Failure) -> u8 {
    match failure {
        Failure::Usage(_) | Failure::Io(_) => 2,
        Failure::Lib(e) => match e {
            Error::InvalidSpec(_)
            | Error::ValidityViolated { .. }
            | Error::InvalidTwoLevel
            | Error::EnergyOutOfRange { .. } => 2,
            Error::NoPeakFound | Error::NotFirstPeak { .. } => 4,
            _ => 3,
        },
    }
}

fn io_err<E: fmt::Display>(path: &Path) -> impl Fn(E) -> Failure + '_ {
    move |e| Failure::Io(format!("{}: {e}", path.display()))
}

// ---------------------------------------------------------------------------
// session state shared by the subcommands

struct Session {
    spec: DoubleWellSpec,
    run: RunControls,
}

fn load_session(cli: &Cli) -> Result<Session, Failure> {
    let text = fs::read_to_string(&cli.scenario).map_err(io_err(&cli.scenario))?;
    let file: ScenarioFile = serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(format!("{}: {e}", cli.scenario.display())))?;
    let l = &file.left;
    let left = match (&l.family, l.omega, l.support) {
        (Family::HarmonicCap, Some(omega), None) => {
            PhysicalWellSpec::harmonic_cap(l.depth, l.center, omega)?
        }
        (Family::HarmonicCap, None, Some(hw)) => {
            PhysicalWellSpec::harmonic_cap_with_support(l.depth, l.center, hw)?
        }
        (Family::HarmonicCap, _, _) => {
            return Err(Failure::Usage(
                "left well: harmonic_cap takes exactly one of omega or support".into(),
            ))
        }
        (Family::SmoothBump, None, Some(hw)) => {
            PhysicalWellSpec::smooth_bump(l.depth, l.center, hw)?
        }
        (Family::SmoothBump, _, _) => {
            return Err(Failure::Usage(
                "left well: smooth_bump takes support and no omega".into(),
            ))
        }
    };
    let right = SquareWellSpec::new(file.right.b, file.right.w, file.right.v)?;
    let spec = DoubleWellSpec::new(left, right, cli.hbar.unwrap_or(file.hbar))?;
    Ok(Session {
        spec,
        run: file.run,
    })
}

impl Session {
    fn grid_step(&self) -> f64 {
        self.run.grid_step.unwrap_or(0.002)
    }

    fn grid_padding(&self) -> f64 {
        self.run.grid_padding.unwrap_or(6.0)
    }

    /// Shared grid, padded for a shallow reference energy so even target
    /// levels well above the bottom keep harmless Dirichlet walls.
    fn base_grid(&self) -> Result<Grid, Error> {
        let e_ref = -0.25 * self.spec.left.depth.min(self.spec.right.v);
        Grid::for_spec(&self.spec, e_ref, self.grid_step(), self.grid_padding())
    }

    fn left_states(&self, grid: &Grid) -> Result<Vec<BoundState>, Error> {
        let op = discretize_isolated_left(&self.spec, grid);
        solve_bound_states(&op, self.run.level + 1)
    }

    fn scan_setup(&self, args: &ScanArgs) -> Result<(ScanParameter, (f64, f64), usize, DeltaMethod), Failure> {
        let ctl = self.run.scan.as_ref();
        let param = match args.param.or(ctl.and_then(|c| c.parameter)) {
            Some(ParamFlag::Width) | None => ScanParameter::Width,
            Some(ParamFlag::Depth) => ScanParameter::Depth,
        };
        let range = args
            .range
            .or(ctl.and_then(|c| c.range.map(|[lo, hi]| (lo, hi))))
            .ok_or_else(|| Failure::Usage("no scan range given (--range LO:HI)".into()))?;
        let samples = args.samples.or(ctl.and_then(|c| c.samples)).unwrap_or(60);
        let method = match ctl.and_then(|c| c.delta_method) {
            Some(DeltaFlag::Wronskian) => DeltaMethod::Wronskian,
            _ => DeltaMethod::Wkb,
        };
        Ok((param, range, samples, method))
    }
}

fn family_name(f: WellFamily) -> &'static str {
    match f {
        WellFamily::HarmonicCap => "harmonic_cap",
        WellFamily::SmoothBump => "smooth_bump",
    }
}

fn param_name(p: ScanParameter) -> &'static str {
    match p {
        ScanParameter::Width => "width",
        ScanParameter::Depth => "depth",
    }
}

fn write_scan_files(curve: &ScanCurve, dir: &Path) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let curve_path = dir.join("curve.csv");
    let mut f = fs::File::create(&curve_path).map_err(io_err(&curve_path))?;
    write_curve_csv(curve, &mut f).map_err(io_err(&curve_path))?;
    let peaks_path = dir.join("peaks.txt");
    let mut f = fs::File::create(&peaks_path).map_err(io_err(&peaks_path))?;
    write_peaks_report(curve, &mut f).map_err(io_err(&peaks_path))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// subcommands

fn cmd_spectrum(s: &Session) -> Result<(), Failure> {
    let spec = &s.spec;
    let grid = s.base_grid()?;
    let left = s.left_states(&grid)?;
    let e_l = left[s.run.level].energy;

    println!("hbar = {:.16e}", spec.hbar);
    println!(
        "left well: family = {}  depth = {:.16e}  center = {:.16e}  a = {:.16e}",
        family_name(spec.left.family),
        spec.left.depth,
        spec.left.center,
        spec.left.a()
    );
    println!(
        "probe well: b = {:.16e}  w = {:.16e}  v = {:.16e}",
        spec.right.b, spec.right.w, spec.right.v
    );
    let sep = check_separation(spec, e_l)?;
    println!("separation margin at E_l = {:.16e}", sep.margin);
    println!();

    println!("left-well levels (grid):");
    for st in &left {
        println!("  n = {}  E = {:.16e}", st.node_count, st.energy);
    }
    println!();

    println!("probe-well levels (analytic | grid):");
    let analytic = solve_levels(spec.right.w, spec.right.v, spec.hbar)?;
    let op_r = discretize_isolated_right(spec, &grid);
    let grid_levels = eigenvalues_between(&op_r, -spec.right.v, 0.0);
    for (lv, g) in analytic.iter().zip(grid_levels.iter()) {
        println!(
            "  k = {}  E = {:.16e}  E_grid = {:.16e}  diff = {:.16e}",
            lv.k,
            lv.e_r,
            g,
            g - lv.e_r
        );
    }
    println!();

    if !sep.valid {
        return Err(Error::ValidityViolated { margin: sep.margin }.into());
    }
    let (k_near, e_r) = grid_levels
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - e_l).abs().total_cmp(&(b.1 - e_l).abs()))
        .map(|(k, &e)| (k, e))
        .ok_or(Error::NoPeakFound)?;
    println!("target level n = {}  E_l = {:.16e}", s.run.level, e_l);
    println!(
        "nearest probe level k = {}  E_r = {:.16e}  detuning = {:.16e}",
        k_near,
        e_r,
        e_r - e_l
    );

    let omega_l = classical_frequency(&spec.left, e_l)?;
    let delta = wkb_delta(spec, e_l, omega_l)?;
    let tl = two_level_spectrum(e_l, e_r, delta)?;
    println!("omega_l = {:.16e}  delta_wkb = {:.16e}", omega_l, delta);
    println!(
        "two-level: E1 = {:.16e}  E2 = {:.16e}  splitting = {:.16e}  alpha = {:.16e}",
        tl.e1, tl.e2, tl.splitting, tl.alpha
    );

    let op_d = discretize_double_well(spec, &grid);
    let floor = -spec.left.depth.max(spec.right.v);
    let mut pair: Vec<f64> = eigenvalues_between(&op_d, floor, 0.0);
    pair.sort_by(|a, b| (a - e_l).abs().total_cmp(&(b - e_l).abs()));
    pair.truncate(2);
    pair.sort_by(f64::total_cmp);
    if pair.len() < 2 {
        return Err(Error::InvalidTwoLevel.into());
    }
    let d_grid = pair[1] - pair[0];
    println!(
        "double-well pair (grid): E1 = {:.16e}  E2 = {:.16e}",
        pair[0], pair[1]
    );
    println!(
        "Delta_grid = {:.16e}  two_level = {:.16e}  ratio = {:.16e}",
        d_grid,
        tl.splitting,
        d_grid / tl.splitting
    );
    Ok(())
}

fn cmd_scan(s: &Session, args: &ScanArgs) -> Result<(), Failure> {
    let (param, range, samples, method) = s.scan_setup(args)?;
    let grid = s.base_grid()?;
    let e_l = s.left_states(&grid)?[s.run.level].energy;
    let curve = scan(&s.spec, param, range, samples, e_l, method)?;
    if let Some(dir) = &args.out {
        write_scan_files(&curve, dir)?;
    }
    println!(
        "scan parameter = {}  range = [{:.16e}, {:.16e}]  samples = {}",
        param_name(param),
        range.0,
        range.1,
        curve.samples.len()
    );
    println!("target E_l = {:.16e}", e_l);
    println!("peaks = {}", curve.peaks.len());
    for pk in &curve.peaks {
        println!(
            "  k = {}  {} = {:.16e}  predicted = {:.16e}  P = {:.16e}  fwhm = {:.16e}",
            pk.k,
            param_name(param),
            pk.param_at_peak,
            pk.predicted_param,
            pk.p_at_peak,
            pk.fwhm_param
        );
    }
    Ok(())
}

fn cmd_evolve(s: &Session, args: &EvolveArgs) -> Result<(), Failure> {
    let time = s.run.time.as_ref();
    let method = args
        .method
        .or(time.and_then(|t| t.method))
        .unwrap_or(MethodFlag::TwoLevel);
    let grid = s.base_grid()?;
    let left = s.left_states(&grid)?;
    let e_l = left[s.run.level].energy;
    let sep = check_separation(&s.spec, e_l)?;
    if !sep.valid {
        return Err(Error::ValidityViolated { margin: sep.margin }.into());
    }
    let op_r = discretize_isolated_right(&s.spec, &grid);
    let e_r = eigenvalues_between(&op_r, -s.spec.right.v, 0.0)
        .into_iter()
        .min_by(|a, b| (a - e_l).abs().total_cmp(&(b - e_l).abs()))
        .ok_or(Error::NoPeakFound)?;
    let omega_l = classical_frequency(&s.spec.left, e_l)?;
    let delta = wkb_delta(&s.spec, e_l, omega_l)?;
    let tl = two_level_spectrum(e_l, e_r, delta)?;
    let t_final = args
        .t_final
        .or(time.and_then(|t| t.t_final))
        .unwrap_or(PI * s.spec.hbar / tl.splitting);

    let trace = match method {
        MethodFlag::TwoLevel => {
            let steps = args.steps.or(time.and_then(|t| t.steps)).unwrap_or(1000);
            if steps == 0 {
                return Err(Failure::Usage("steps must be >= 1".into()));
            }
            let times: Vec<f64> = (0..=steps)
                .map(|i| t_final * i as f64 / steps as f64)
                .collect();
            occupation_probabilities(&tl, tl.alpha, &times, s.spec.hbar)
        }
        MethodFlag::Grid => {
            let steps = args.steps.or(time.and_then(|t| t.steps)).unwrap_or(20_000);
            let bc = barrier_center(&s.spec, e_l)?;
            let op_d = discretize_double_well(&s.spec, &grid);
            grid_propagate(&op_d, &left[s.run.level], t_final, steps, bc.c)?
        }
    };

    if let Some(dir) = &args.out {
        fs::create_dir_all(dir).map_err(io_err(dir.as_path()))?;
        let path = dir.join("trace.csv");
        let mut f = fs::File::create(&path).map_err(io_err(&path))?;
        write_csv(&trace, &mut f).map_err(io_err(&path))?;
    }

    let method_name = match method {
        MethodFlag::TwoLevel => "two_level",
        MethodFlag::Grid => "grid",
    };
    println!("method = {method_name}");
    println!(
        "E_l = {:.16e}  E_r = {:.16e}  delta = {:.16e}  splitting = {:.16e}",
        e_l, e_r, tl.delta, tl.splitting
    );
    let max_p_r = trace.p_r.iter().cloned().fold(0.0f64, f64::max);
    println!(
        "t_final = {:.16e}  transfer time = {:.16e}  period = {:.16e}",
        t_final, trace.transfer_time, trace.period
    );
    println!(
        "max P_r = {:.16e}  final P_r = {:.16e}  final norm = {:.16e}",
        max_p_r,
        trace.p_r.last().unwrap(),
        trace.norms.last().unwrap()
    );
    Ok(())
}

fn cmd_detect(s: &Session, args: &ScanArgs) -> Result<(), Failure> {
    let (param, range, samples, method) = s.scan_setup(args)?;
    let grid = s.base_grid()?;
    let e_l = s.left_states(&grid)?[s.run.level].energy;
    let curve = scan(&s.spec, param, range, samples, e_l, method)?;
    if let Some(dir) = &args.out {
        write_scan_files(&curve, dir)?;
    }
    let first = curve
        .peaks
        .iter()
        .min_by(|a, b| a.param_at_peak.total_cmp(&b.param_at_peak))
        .ok_or(Error::NoPeakFound)?;
    let (v, w_at_peak) = match param {
        ScanParameter::Width => (s.spec.right.v, first.param_at_peak),
        ScanParameter::Depth => (first.param_at_peak, s.spec.right.w),
    };
    let inferred = infer_energy(first, v, w_at_peak, s.spec.hbar)?;
    let near = curve
        .samples
        .iter()
        .min_by(|a, b| {
            (a.param - first.param_at_peak)
                .abs()
                .total_cmp(&(b.param - first.param_at_peak).abs())
        })
        .ok_or(Error::NoPeakFound)?;

    println!(
        "scan parameter = {}  range = [{:.16e}, {:.16e}]",
        param_name(param),
        range.0,
        range.1
    );
    println!(
        "first peak: k = {}  {} = {:.16e}  predicted = {:.16e}  P = {:.16e}",
        first.k,
        param_name(param),
        first.param_at_peak,
        first.predicted_param,
        first.p_at_peak
    );
    println!("delta near peak = {:.16e}", near.delta);
    println!("E_inferred series = {:.16e}", inferred.series);
    println!("E_inferred exact  = {:.16e}", inferred.exact);
    println!("E_l grid          = {:.16e}", e_l);
    let miss = inferred.exact - e_l;
    println!("exact - E_l = {:.16e}", miss);
    println!(
        "within 2 delta: {}",
        if miss.abs() <= 2.0 * near.delta { "yes" } else { "no" }
    );
    Ok(())
}

// ---------------------------------------------------------------------------

#[cfg(feature = "parallel")]
fn init_threads() {
    if let Some(n) = std::env::var("TUNNELCATCH_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n >= 1)
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

#[cfg(not(feature = "parallel"))]
fn init_threads() {}

fn run(cli: &Cli) -> Result<(), Failure> {
    let session = load_session(cli)?;
    match &cli.command {
        Command::Spectrum => cmd_spectrum(&session),
        Command::Scan(args) => cmd_scan(&session, args),
        Command::Evolve(args) => cmd_evolve(&session, args),
        Command::Detect(args) => cmd_detect(&session, args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {failure}");
            ExitCode::from(exit_code(&failure))
        }
    }
}
