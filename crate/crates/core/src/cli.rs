//! Command-line front end.
//!
//! Commands compute their data in memory; files are written together at the
//! end of a run. Exit codes: 0 success, 1 numerical or validation failure,
//! 2 usage error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::conductance::{conductance_by_integral, CurveSampler, LevelWindow};
use crate::dirac::dirac_spectrum_window;
use crate::dispersion::{self, critical_point, gap_profile, linspace, SolverConfig};
use crate::error::{Error, Result};
use crate::output::{self, curves_csv, curves_svg, line_chart, to_json, Series, Style, SvgOptions};
use crate::params::{gamma_from_eta, Branch, FiberParams, Gamma};
use crate::validation;

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "EDGECURVES_WORKERS";

/// Largest tolerated deviation in `symmetry-check`.
pub const SYMMETRY_TOL: f64 = 1e-6;
/// Largest tolerated gap between the integral and the integer conductance.
pub const QUANTIZATION_TOL: f64 = 1e-2;
/// `symmetry-check` compares spectra on at most this many momenta.
pub const SYMMETRY_SAMPLES: usize = 9;

#[derive(Debug, Parser)]
#[command(
    name = "edgecurves",
    version,
    about = "Dispersion curves and edge Hall conductance of half-plane magnetic Dirac operators"
)]
pub struct Cli {
    /// Worker threads (overrides the environment variable).
    #[arg(long, global = true, env = WORKERS_ENV)]
    pub workers: Option<usize>,

    /// Grid spacing at |b| = 1 (default 0.00125; scaled by 1/|b|).
    #[arg(long, global = true)]
    pub spacing: Option<f64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample dispersion curves over a momentum range.
    Dispersion(DispersionArgs),
    /// Zigzag dispersion curves (gamma = 0 and gamma = inf).
    Zigzag(ZigzagArgs),
    /// Maximal negative energy of the full operator as a function of gamma.
    GapProfile(GapArgs),
    /// Critical point of the n-th negative curve as a function of gamma.
    CriticalPoint(CriticalArgs),
    /// Edge Hall conductance for a set of Landau levels.
    Conductance(ConductanceArgs),
    /// Compare symmetry-mapped spectra against directly assembled ones.
    SymmetryCheck(SymmetryArgs),
    /// Run all self-checks and print a pass/fail table.
    Validate(ValidateArgs),
}

/// Magnetic field and boundary parameter.
#[derive(Debug, Args)]
pub struct FieldArgs {
    /// Magnetic field strength (nonzero).
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub b: f64,

    /// Boundary parameter(s), comma separated; `inf` for the zigzag limit.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, conflicts_with = "eta")]
    pub gamma: Vec<Gamma>,

    /// Boundary angle(s), gamma = cos(eta)/(1 + sin(eta)).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub eta: Vec<f64>,
}

impl FieldArgs {
    fn gammas(&self) -> Result<Vec<Gamma>> {
        let out = if self.eta.is_empty() {
            self.gamma.clone()
        } else {
            self.eta.iter().map(|&e| gamma_from_eta(e)).collect::<Result<_>>()?
        };
        if out.is_empty() {
            return Err(usage("--gamma", "one of --gamma or --eta is required"));
        }
        Ok(out)
    }

    fn single_gamma(&self) -> Result<Gamma> {
        let g = self.gammas()?;
        if g.len() != 1 {
            return Err(usage("--gamma", "exactly one value expected"));
        }
        Ok(g[0])
    }
}

/// Output destinations.
#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Write CSV here.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Write JSON here.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Write an SVG chart here.
    #[arg(long)]
    pub svg: Option<PathBuf>,
    /// Energy axis range `min:max` of the chart.
    #[arg(long, allow_hyphen_values = true)]
    pub ylim: Option<YRange>,
}

impl OutputArgs {
    fn any(&self) -> bool {
        self.csv.is_some() || self.json.is_some() || self.svg.is_some()
    }

    fn svg_options(&self, title: String, x_label: &str) -> SvgOptions {
        SvgOptions {
            y_range: self.ylim.map(|r| (r.0, r.1)),
            title: Some(title),
            x_label: Some(x_label.into()),
            ..SvgOptions::default()
        }
    }
}

/// Curve selection.
#[derive(Debug, Args)]
pub struct BranchArgs {
    /// Momentum range `min:max:steps`, or a single value.
    #[arg(long, default_value = "-6:4:200", allow_hyphen_values = true)]
    pub xi: XiSpec,

    /// Branches such as `+1,-1,+2`; overrides --n-max.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub branches: Vec<Branch>,

    /// Use branches -n..-1, +1..+n.
    #[arg(long, default_value_t = 3)]
    pub n_max: u32,
}

impl BranchArgs {
    fn branches(&self) -> Result<Vec<Branch>> {
        if !self.branches.is_empty() {
            return Ok(self.branches.clone());
        }
        if self.n_max == 0 {
            return Err(usage("--n-max", "must be at least 1"));
        }
        Ok((1..=self.n_max)
            .rev()
            .map(Branch::minus)
            .chain((1..=self.n_max).map(Branch::plus))
            .collect())
    }
}

#[derive(Debug, Args)]
pub struct DispersionArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[command(flatten)]
    pub curves: BranchArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ZigzagArgs {
    /// Magnetic field strength (nonzero).
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub b: f64,
    /// Zigzag parameter(s): `0`, `inf` or both.
    #[arg(long, value_delimiter = ',', default_value = "0,inf")]
    pub gamma: Vec<Gamma>,
    #[command(flatten)]
    pub curves: BranchArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct GapArgs {
    /// Magnetic field strength (positive).
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    /// Boundary parameters `min:max:steps` (min >= 0).
    #[arg(long, default_value = "0:5:51")]
    pub gammas: XiSpec,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CriticalArgs {
    /// Magnetic field strength (positive).
    #[arg(long, default_value_t = 1.0)]
    pub b: f64,
    /// Boundary parameters `min:max:steps` or a single value (> 0).
    #[arg(long, default_value = "0.2:5:49")]
    pub gammas: XiSpec,
    /// Index of the negative curve.
    #[arg(long, default_value_t = 1)]
    pub n: u32,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ConductanceArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    /// Signed Landau level indices where the window equals 1.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub levels: Vec<i64>,
    /// Bump half-width (default: min(0.3 sqrt|b|, 0.9 x smallest half-gap)).
    #[arg(long)]
    pub delta: Option<f64>,
    /// Integration half-width (default 10 sqrt|b|).
    #[arg(long)]
    pub xi_max: Option<f64>,
    /// Highest curve index included in the integral.
    #[arg(long)]
    pub j_max: Option<u32>,
    /// Skip the integral and report the exact value only.
    #[arg(long)]
    pub limits_only: bool,
    /// Write JSON here instead of standard output.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SymmetryArgs {
    #[command(flatten)]
    pub field: FieldArgs,
    #[command(flatten)]
    pub curves: BranchArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Run only these checks.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<u32>,
}

/// Momenta: `min:max:steps` or one value.
#[derive(Debug, Clone, PartialEq)]
pub struct XiSpec(pub Vec<f64>);

impl FromStr for XiSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("bad number `{t}` in `{s}`")))
        };
        match parts.as_slice() {
            [v] => {
                let v = num(v)?;
                if !v.is_finite() {
                    return Err(Error::InvalidParameter(format!("value must be finite: `{s}`")));
                }
                Ok(Self(vec![v]))
            }
            [a, b, n] => {
                let steps: usize = n
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("bad step count `{n}` in `{s}`")))?;
                Ok(Self(linspace(num(a)?, num(b)?, steps)?))
            }
            _ => Err(Error::InvalidParameter(format!("expected min:max:steps or a number, got `{s}`"))),
        }
    }
}

/// Chart range `min:max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YRange(pub f64, pub f64);

impl FromStr for YRange {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidParameter(format!("expected min:max with min < max, got `{s}`"));
        let (a, b) = s.split_once(':').ok_or_else(bad)?;
        let (a, b): (f64, f64) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(bad());
        }
        Ok(Self(a, b))
    }
}

/// A usage error naming the offending flag.
fn usage(flag: &str, msg: &str) -> Error {
    Error::InvalidParameter(format!("{flag}: {msg}"))
}

/// Everything a run wants to emit.
#[derive(Debug, Default)]
struct Outputs {
    files: Vec<(PathBuf, String)>,
    stdout: String,
    /// Message for a failed invariant; the run exits with status 1.
    failure: Option<String>,
}

impl Outputs {
    fn file(&mut self, path: PathBuf, contents: String) {
        self.files.push((path, contents));
    }
}

/// `path` with `-tag` inserted before the extension.
fn tagged(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}-{tag}.{}", ext.to_string_lossy()),
        None => format!("{stem}-{tag}"),
    };
    path.with_file_name(name)
}

fn gamma_tag(g: Gamma) -> String {
    format!("gamma{g}")
}

fn solver_config(spacing: Option<f64>) -> Result<SolverConfig> {
    match spacing {
        None => Ok(SolverConfig::default()),
        Some(h) if h.is_finite() && h > 0.0 => Ok(SolverConfig::with_spacing(h)),
        Some(h) => Err(usage("--spacing", &format!("must be positive, got {h}"))),
    }
}

fn check_b(b: f64) -> Result<()> {
    if b.is_finite() && b != 0.0 {
        Ok(())
    } else {
        Err(usage("--b", &format!("must be finite and nonzero, got {b}")))
    }
}

/// Sweep each γ and stage CSV/JSON/SVG outputs, tagging paths when several
/// panels are produced.
fn curve_panels(
    panels: &[(String, Gamma, f64)],
    curves: &BranchArgs,
    out: &OutputArgs,
    cfg: &SolverConfig,
    o: &mut Outputs,
) -> Result<()> {
    let branches = curves.branches()?;
    if panels.len() > 1 && !out.any() {
        return Err(usage("--csv", "several panels need --csv, --json or --svg"));
    }
    for (tag, gamma, b) in panels {
        let data = dispersion::sweep_at(*gamma, *b, &curves.xi.0, &branches, cfg)?;
        let path = |p: &PathBuf| if panels.len() > 1 { tagged(p, tag) } else { p.clone() };
        let csv = curves_csv(&data)?;
        if !out.any() {
            o.stdout.push_str(&csv);
        }
        if let Some(p) = &out.csv {
            o.file(path(p), csv);
        }
        if let Some(p) = &out.json {
            o.file(path(p), to_json(&data)?);
        }
        if let Some(p) = &out.svg {
            let title = format!("b = {b}, gamma = {gamma}");
            o.file(path(p), curves_svg(&data, &out.svg_options(title, "xi"))?);
        }
    }
    Ok(())
}

fn dispersion_cmd(a: &DispersionArgs, cfg: &SolverConfig, o: &mut Outputs) -> Result<()> {
    check_b(a.field.b)?;
    let panels: Vec<_> = a
        .field
        .gammas()?
        .into_iter()
        .map(|g| (gamma_tag(g), g, a.field.b))
        .collect();
    curve_panels(&panels, &a.curves, &a.out, cfg, o)
}

fn zigzag_cmd(a: &ZigzagArgs, cfg: &SolverConfig, o: &mut Outputs) -> Result<()> {
    check_b(a.b)?;
    if let Some(g) = a.gamma.iter().find(|g| !g.is_zigzag()) {
        return Err(usage("--gamma", &format!("zigzag needs 0 or inf, got {g}")));
    }
    let panels: Vec<_> = a.gamma.iter().map(|&g| (gamma_tag(g), g, a.b)).collect();
    curve_panels(&panels, &a.curves, &a.out, cfg, o)
}

fn table_csv(header: &str, rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut s = format!("{header}\n");
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn gap_cmd(a: &GapArgs, cfg: &SolverConfig, o: &mut Outputs) -> Result<()> {
    if !(a.b.is_finite() && a.b > 0.0) {
        return Err(usage("--b", "gap-profile needs b > 0"));
    }
    if a.gammas.0.iter().any(|&g| g < 0.0) {
        return Err(usage("--gammas", "values must be >= 0"));
    }
    let gammas: Vec<Gamma> = a.gammas.0.iter().map(|&g| Gamma::Finite(g)).collect();
    let rows = gap_profile(a.b, &gammas, cfg)?;
    let csv = table_csv(
        "gamma,max_negative_energy,xi_star",
        rows.iter().map(|r| {
            vec![
                r.gamma.value().map_or_else(|| "inf".into(), num),
                num(r.max_negative_energy),
                r.xi_star.map_or_else(String::new, num),
            ]
        }),
    );
    stage_table(o, &a.out, csv, &rows, || {
        let pts = rows
            .iter()
            .filter_map(|r| r.gamma.value().map(|g| (g, r.max_negative_energy)))
            .collect();
        let series = [Series {
            label: "max negative energy".into(),
            colour: "#c0392b",
            style: Style::Line,
            points: pts,
        }];
        let opts = a.out.svg_options(format!("maximal negative energy, b = {}", a.b), "gamma");
        line_chart(&series, &[-(2.0 * a.b).sqrt()], &opts)
    })
}

fn critical_cmd(a: &CriticalArgs, cfg: &SolverConfig, o: &mut Outputs) -> Result<()> {
    if !(a.b.is_finite() && a.b > 0.0) {
        return Err(usage("--b", "critical-point needs b > 0"));
    }
    if a.n == 0 {
        return Err(usage("--n", "must be at least 1"));
    }
    if a.gammas.0.iter().any(|&g| !(g > 0.0 && g.is_finite())) {
        return Err(usage("--gammas", "values must be positive and finite"));
    }
    let rows = {
        use rayon::prelude::*;
        a.gammas
            .0
            .par_iter()
            .map(|&g| critical_point(g, a.b, a.n, cfg))
            .collect::<Result<Vec<_>>>()?
    };
    let csv = table_csv(
        "gamma,b,n,xi_star,theta_star,slope",
        rows.iter().map(|r| {
            vec![num(r.gamma), num(r.b), r.n.to_string(), num(r.xi), num(r.theta), num(r.slope)]
        }),
    );
    stage_table(o, &a.out, csv, &rows, || {
        let mut series = vec![Series {
            label: "xi*".into(),
            colour: "#1f5fbf",
            style: Style::Line,
            points: rows.iter().map(|r| (r.gamma, r.xi)).collect(),
        }];
        let ones: Vec<(f64, f64)> = rows.iter().filter(|r| (r.gamma - 1.0).abs() < 1e-9).map(|r| (r.gamma, r.xi)).collect();
        if !ones.is_empty() {
            series.push(Series {
                label: "gamma = 1".into(),
                colour: "#c0392b",
                style: Style::Points,
                points: ones,
            });
        }
        let opts = a.out.svg_options(format!("critical point of -{}, b = {}", a.n, a.b), "gamma");
        line_chart(&series, &[], &opts)
    })
}

/// Stage a table as CSV, JSON and SVG.
fn stage_table<T: Serialize>(
    o: &mut Outputs,
    out: &OutputArgs,
    csv: String,
    rows: &T,
    svg: impl FnOnce() -> Result<String>,
) -> Result<()> {
    if !out.any() {
        o.stdout.push_str(&csv);
    }
    if let Some(p) = &out.csv {
        o.file(p.clone(), csv);
    }
    if let Some(p) = &out.json {
        o.file(p.clone(), to_json(rows)?);
    }
    if let Some(p) = &out.svg {
        o.file(p.clone(), svg()?);
    }
    Ok(())
}

fn conductance_cmd(a: &ConductanceArgs, cfg: &SolverConfig, o: &mut Outputs) -> Result<()> {
    check_b(a.field.b)?;
    let gamma = a.field.single_gamma()?;
    let w = LevelWindow::new(a.field.b, &a.levels, a.delta)?;
    let report = if a.limits_only {
        crate::conductance::conductance_by_limits(gamma, a.field.b, &w)?
    } else {
        let mut sampler = CurveSampler::new(gamma, a.field.b, *cfg)?;
        let r = conductance_by_integral(&mut sampler, &w, a.xi_max, a.j_max)?;
        if let Some(v) = r.integral {
            if (v - r.integer as f64).abs() > QUANTIZATION_TOL {
                o.failure = Some(format!(
                    "integral {v} differs from the integer {} by more than {QUANTIZATION_TOL}",
                    r.integer
                ));
            }
        }
        r
    };
    let json = to_json(&report)?;
    match &a.json {
        Some(p) => o.file(p.clone(), json),
        None => o.stdout.push_str(&json),
    }
    Ok(())
}

/// Result of `symmetry-check`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymmetryReport {
    pub b: f64,
    pub gamma: Gamma,
    pub samples: Vec<f64>,
    /// Largest difference between directly assembled spectra and the
    /// symmetry images of canonical ones.
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

/// Parameter sets related to `(b, γ)` by charge conjugation and `σ₃`.
fn symmetry_partners(b: f64, gamma: Gamma) -> Vec<(&'static str, f64, Gamma)> {
    let mut v = vec![("original", b, gamma), ("conjugated", -b, gamma.inverse())];
    if let Gamma::Finite(g) = gamma {
        if g != 0.0 {
            v.push(("sigma3", b, Gamma::Finite(-g)));
        }
    }
    v
}

fn spectrum_deviation(b: f64, gamma: Gamma, xi: f64, cfg: &SolverConfig) -> Result<f64> {
    let p = FiberParams::new(b, gamma, xi)?;
    let (c, t) = dispersion::canonicalize(&p)?;
    let grid = cfg.grid(b.abs(), xi.abs().max(c.xi.abs()), 5);
    let direct = dirac_spectrum_window(&p, &grid, 8)?;
    let mut mapped: Vec<f64> = dirac_spectrum_window(&c, &grid, 8)?
        .into_iter()
        .map(|v| t.value(v))
        .collect();
    mapped.sort_by(f64::total_cmp);
    Ok(direct
        .iter()
        .zip(&mapped)
        .map(|(a, m)| (a - m).abs())
        .fold(0.0, f64::max))
}

fn symmetry_cmd(a: &SymmetryArgs, cfg: &SolverConfig, o: &mut Outputs) -> Result<()> {
    use rayon::prelude::*;
    check_b(a.field.b)?;
    let gamma = a.field.single_gamma()?;
    let xis = &a.curves.xi.0;
    let samples: Vec<f64> = if xis.len() <= SYMMETRY_SAMPLES {
        xis.clone()
    } else {
        (0..SYMMETRY_SAMPLES)
            .map(|k| xis[k * (xis.len() - 1) / (SYMMETRY_SAMPLES - 1)])
            .collect()
    };
    let partners = symmetry_partners(a.field.b, gamma);
    let jobs: Vec<(f64, Gamma, f64)> = partners
        .iter()
        .flat_map(|&(_, b, g)| samples.iter().map(move |&x| (b, g, x)))
        .collect();
    let max_deviation = jobs
        .par_iter()
        .map(|&(b, g, x)| spectrum_deviation(b, g, x, cfg))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let report = SymmetryReport {
        b: a.field.b,
        gamma,
        samples,
        max_deviation,
        tolerance: SYMMETRY_TOL,
        passed: max_deviation <= SYMMETRY_TOL,
    };
    if !report.passed {
        o.failure = Some(format!("symmetry deviation {max_deviation:e} exceeds {SYMMETRY_TOL:e}"));
    }
    match &a.out.json {
        Some(p) => o.file(p.clone(), to_json(&report)?),
        None => o.stdout.push_str(&to_json(&report)?),
    }
    if a.out.csv.is_some() || a.out.svg.is_some() {
        let branches = a.curves.branches()?;
        for (tag, b, g) in partners {
            let data = dispersion::sweep_at(g, b, xis, &branches, cfg)?;
            if let Some(p) = &a.out.csv {
                o.file(tagged(p, tag), curves_csv(&data)?);
            }
            if let Some(p) = &a.out.svg {
                let title = format!("{tag}: b = {b}, gamma = {g}");
                o.file(tagged(p, tag), curves_svg(&data, &a.out.svg_options(title, "xi"))?);
            }
        }
    }
    Ok(())
}

fn validate_cmd(a: &ValidateArgs, cfg: &SolverConfig, o: &mut Outputs) -> Result<()> {
    let ids: Vec<u32> = if a.only.is_empty() {
        validation::CHECKS.iter().map(|(id, _)| *id).collect()
    } else {
        a.only.clone()
    };
    if let Some(id) = ids.iter().find(|id| !validation::CHECKS.iter().any(|(i, _)| i == *id)) {
        return Err(usage("--only", &format!("no check {id}")));
    }
    let mut failed = 0;
    for id in ids {
        let r = validation::run_check(id, cfg);
        failed += usize::from(!r.passed);
        // streamed so progress is visible during the long checks
        println!("{}", validation::format_line(&r));
    }
    if failed > 0 {
        o.failure = Some(format!("{failed} check(s) failed"));
    }
    Ok(())
}

fn dispatch(cli: &Cli) -> Result<Outputs> {
    let cfg = solver_config(cli.spacing)?;
    let mut o = Outputs::default();
    match &cli.command {
        Command::Dispersion(a) => dispersion_cmd(a, &cfg, &mut o)?,
        Command::Zigzag(a) => zigzag_cmd(a, &cfg, &mut o)?,
        Command::GapProfile(a) => gap_cmd(a, &cfg, &mut o)?,
        Command::CriticalPoint(a) => critical_cmd(a, &cfg, &mut o)?,
        Command::Conductance(a) => conductance_cmd(a, &cfg, &mut o)?,
        Command::SymmetryCheck(a) => symmetry_cmd(a, &cfg, &mut o)?,
        Command::Validate(a) => validate_cmd(a, &cfg, &mut o)?,
    }
    Ok(o)
}

/// Exit status for a library error: bad input is a usage error.
fn status_of(e: &Error) -> i32 {
    match e {
        Error::InvalidParameter(_) | Error::Window(_) | Error::Domain(_) => 2,
        Error::Sample { source, .. } => status_of(source),
        _ => 1,
    }
}

/// Parse `args`, run, and return the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.workers {
        if n == 0 {
            eprintln!("error: --workers: must be at least 1");
            return 2;
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start workers: {e}");
            return 1;
        }
    };
    let outputs = match pool.install(|| dispatch(&cli)) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e}");
            return status_of(&e);
        }
    };
    for (path, contents) in &outputs.files {
        if let Err(e) = output::write_file(path, contents) {
            eprintln!("error: {e}");
            return 1;
        }
    }
    print!("{}", outputs.stdout);
    match outputs.failure {
        Some(msg) => {
            eprintln!("failed: {msg}");
            1
        }
        None => 0,
    }
}
