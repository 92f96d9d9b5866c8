//! Command-line front end: config parsing, the analysis commands, and the
//! CSV / SVG writers.
//!
//! Exit codes: 0 success, 1 analysis refused or failed, 2 bad input.

use std::fmt;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::fundamental_limits::{
    bode_integral, hinf_lower_bound, stable_for_all_gains, BoundReport, IntegralReport,
    StabilityReport,
};
use crate::polynomial::Poly;
use crate::rational_tf::RationalTF;
use crate::string_sensitivity::{
    evaluate_value, nudge_off_poles, sweep, FrequencyGrid, GridScale, Method, SweepResult,
    DEFAULT_POINTS_PER_DECADE, LINSOLVE_DEFAULT_CAP,
};
use crate::Tolerances;

/// Agreement threshold for `verify`.
pub const VERIFY_REL_TOL: f64 = 1e-7;
const VERIFY_POINTS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisConfig {
    pub plant_num: Vec<f64>,
    pub plant_den: Vec<f64>,
    pub controller_num: Vec<f64>,
    pub controller_den: Vec<f64>,
    pub n_values: Vec<usize>,
    pub grid: FrequencyGrid,
    pub tolerances: Tolerances,
}

impl AnalysisConfig {
    /// The loop `P(s) C(s)`.
    pub fn loop_tf(&self) -> crate::Result<RationalTF> {
        let tol = self.tolerances.cluster_tol;
        let plant = RationalTF::make(
            Poly::new(self.plant_num.clone()),
            Poly::new(self.plant_den.clone()),
            tol,
        )?;
        let controller = RationalTF::make(
            Poly::new(self.controller_num.clone()),
            Poly::new(self.controller_den.clone()),
            tol,
        )?;
        plant.mul(&controller)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub key: Option<String>,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error")?;
        if let Some(line) = self.line {
            write!(f, " at line {line}")?;
        }
        if let Some(key) = &self.key {
            write!(f, " (key `{key}`)")?;
        }
        write!(f, ": {}", self.message)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    plant_num: Option<Vec<f64>>,
    plant_den: Option<Vec<f64>>,
    controller_num: Option<Vec<f64>>,
    controller_den: Option<Vec<f64>>,
    n_values: Option<Vec<i64>>,
    omega_min: Option<f64>,
    omega_max: Option<f64>,
    points_per_decade: Option<i64>,
    scale: Option<String>,
    cluster_tol: Option<f64>,
    axis_tol: Option<f64>,
    quad_tol: Option<f64>,
}

const KEYS: [&str; 12] = [
    "plant_num",
    "plant_den",
    "controller_num",
    "controller_den",
    "n_values",
    "omega_min",
    "omega_max",
    "points_per_decade",
    "scale",
    "cluster_tol",
    "axis_tol",
    "quad_tol",
];

fn line_of_key(text: &str, key: &str) -> Option<usize> {
    text.lines()
        .position(|l| {
            let t = l.trim_start();
            t.strip_prefix(key)
                .map(|rest| rest.trim_start().starts_with('='))
                .unwrap_or(false)
        })
        .map(|i| i + 1)
}

/// Parses the flat TOML config. Coefficients are ascending powers of `s`.
pub fn parse_config(text: &str) -> Result<AnalysisConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| {
        let line = e
            .span()
            .map(|sp| text[..sp.start.min(text.len())].matches('\n').count() + 1);
        let key = line.and_then(|l| {
            let src = text.lines().nth(l - 1).unwrap_or("");
            KEYS.iter()
                .find(|k| src.trim_start().starts_with(*k))
                .map(|k| k.to_string())
        });
        let key = key.or_else(|| {
            KEYS.iter()
                .find(|k| e.message().contains(&format!("`{k}`")))
                .map(|k| k.to_string())
        });
        ConfigError {
            key,
            line,
            message: e.message().trim().to_string(),
        }
    })?;

    let err = |key: &str, message: String| ConfigError {
        key: Some(key.to_string()),
        line: line_of_key(text, key),
        message,
    };
    let coeffs = |key: &str, v: Option<Vec<f64>>, default: Option<Vec<f64>>| {
        let v = match (v, default) {
            (Some(v), _) => v,
            (None, Some(d)) => d,
            (None, None) => return Err(err(key, "missing required key".into())),
        };
        if v.is_empty() {
            return Err(err(key, "coefficient list is empty".into()));
        }
        if v.iter().any(|c| !c.is_finite()) {
            return Err(err(key, "coefficients must be finite".into()));
        }
        Ok(v)
    };
    let positive = |key: &str, v: Option<f64>, default: f64| {
        let v = v.unwrap_or(default);
        if !(v > 0.0 && v.is_finite()) {
            return Err(err(key, format!("must be a positive number, got {v}")));
        }
        Ok(v)
    };

    let plant_num = coeffs("plant_num", raw.plant_num, None)?;
    let plant_den = coeffs("plant_den", raw.plant_den, None)?;
    let controller_num = coeffs("controller_num", raw.controller_num, Some(vec![1.0]))?;
    let controller_den = coeffs("controller_den", raw.controller_den, Some(vec![1.0]))?;
    for (key, v) in [
        ("plant_den", &plant_den),
        ("controller_den", &controller_den),
    ] {
        if v.iter().all(|c| *c == 0.0) {
            return Err(err(key, "denominator is the zero polynomial".into()));
        }
    }

    let n_values = raw.n_values.unwrap_or_else(|| vec![1]);
    if n_values.is_empty() {
        return Err(err(
            "n_values",
            "must list at least one network size".into(),
        ));
    }
    if n_values.iter().any(|n| *n < 1) {
        return Err(err("n_values", "network sizes must be positive".into()));
    }
    if n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(err(
            "n_values",
            "network sizes must be strictly ascending".into(),
        ));
    }
    let n_values: Vec<usize> = n_values.into_iter().map(|n| n as usize).collect();

    let scale = match raw.scale.as_deref().unwrap_or("log") {
        "log" => GridScale::Log,
        "linear" => GridScale::Linear,
        other => {
            return Err(err(
                "scale",
                format!("expected \"log\" or \"linear\", got \"{other}\""),
            ))
        }
    };
    let omega_min = raw.omega_min.unwrap_or(1e-2);
    let omega_max = raw.omega_max.unwrap_or(1e2);
    // also rejects NaN
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    if !(omega_min < omega_max) {
        return Err(err("omega_min", "omega_min must be below omega_max".into()));
    }
    if omega_min < 0.0 || (scale == GridScale::Log && omega_min <= 0.0) {
        return Err(err(
            "omega_min",
            "must be positive for a log grid and nonnegative otherwise".into(),
        ));
    }
    let ppd = raw
        .points_per_decade
        .unwrap_or(DEFAULT_POINTS_PER_DECADE as i64);
    if ppd < 1 {
        return Err(err(
            "points_per_decade",
            "must be a positive integer".into(),
        ));
    }

    let defaults = Tolerances::default();
    let tolerances = Tolerances {
        cluster_tol: positive("cluster_tol", raw.cluster_tol, defaults.cluster_tol)?,
        axis_tol: positive("axis_tol", raw.axis_tol, defaults.axis_tol)?,
        quad_tol: positive("quad_tol", raw.quad_tol, defaults.quad_tol)?,
    };

    Ok(AnalysisConfig {
        plant_num,
        plant_den,
        controller_num,
        controller_den,
        n_values,
        grid: FrequencyGrid {
            omega_min,
            omega_max,
            points_per_decade: ppd as usize,
            scale,
        },
        tolerances,
    })
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Refused(String),
    Analysis(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Refused(_) | CliError::Analysis(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Refused(m) => write!(f, "refused: {m}"),
            CliError::Analysis(m) => write!(f, "analysis failed: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Refused(r) => CliError::Refused(r.to_string()),
            Error::ZeroDenominator | Error::InvalidGrid(_) | Error::DegenerateLoop => {
                CliError::Input(e.to_string())
            }
            other => CliError::Analysis(other.to_string()),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Input(e.to_string())
    }
}

pub fn cmd_bound(cfg: &AnalysisConfig) -> Result<BoundReport, CliError> {
    Ok(hinf_lower_bound(&cfg.loop_tf()?, cfg.tolerances.axis_tol)?)
}

pub fn cmd_stability(cfg: &AnalysisConfig) -> Result<StabilityReport, CliError> {
    Ok(stable_for_all_gains(&cfg.loop_tf()?)?)
}

/// One sweep per configured network size, all on the same grid.
pub fn cmd_sweep(cfg: &AnalysisConfig, method: Method) -> Result<Vec<SweepResult>, CliError> {
    let lp = cfg.loop_tf()?;
    cfg.n_values
        .iter()
        .map(|&n| sweep(&lp, n, &cfg.grid, method).map_err(CliError::from))
        .collect()
}

pub fn cmd_integral(
    cfg: &AnalysisConfig,
    method: Method,
    tol: Option<f64>,
) -> Result<Vec<IntegralReport>, CliError> {
    let lp = cfg.loop_tf()?;
    let tol = tol.unwrap_or(cfg.tolerances.quad_tol);
    cfg.n_values
        .iter()
        .map(|&n| bode_integral(&lp, n, method, tol).map_err(CliError::from))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyEntry {
    pub n: usize,
    pub points: usize,
    /// Points where the Möbius form declined (inside its guard band).
    pub mobius_skipped: usize,
    pub max_rel_dev: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub tolerance: f64,
    pub max_rel_dev: f64,
    pub entries: Vec<VerifyEntry>,
}

fn rel_dev(a: Complex64, b: Complex64) -> f64 {
    let scale = a.norm().max(b.norm()).max(f64::MIN_POSITIVE);
    (a - b).norm() / scale
}

/// Cross-checks the three `S_N` evaluation routes on log-spaced
/// frequencies across the configured band.
pub fn cmd_verify(cfg: &AnalysisConfig) -> Result<VerifyReport, CliError> {
    let lp = cfg.loop_tf()?;
    let (lo, hi) = (cfg.grid.omega_min.max(1e-12), cfg.grid.omega_max);
    let omegas: Vec<f64> = (0..VERIFY_POINTS)
        .map(|i| {
            let t = i as f64 / (VERIFY_POINTS - 1) as f64;
            nudge_off_poles(&lp, lo * (hi / lo).powf(t))
        })
        .collect();
    let mut entries = Vec::new();
    for &n in &cfg.n_values {
        let mut entry = VerifyEntry {
            n,
            points: omegas.len(),
            mobius_skipped: 0,
            max_rel_dev: 0.0,
        };
        for &w in &omegas {
            let v = lp.eval(Complex64::new(0.0, w))?;
            let mut values = vec![evaluate_value(v, n, Method::Eigenproduct)?.value];
            match evaluate_value(v, n, Method::Mobius) {
                Ok(e) => values.push(e.value),
                Err(Error::Conditioning { .. }) => entry.mobius_skipped += 1,
                Err(e) => return Err(e.into()),
            }
            if n <= LINSOLVE_DEFAULT_CAP {
                values.push(evaluate_value(v, n, Method::Linsolve)?.value);
            }
            for i in 0..values.len() {
                for j in i + 1..values.len() {
                    entry.max_rel_dev = entry.max_rel_dev.max(rel_dev(values[i], values[j]));
                }
            }
        }
        entries.push(entry);
    }
    let max_rel_dev = entries.iter().map(|e| e.max_rel_dev).fold(0.0, f64::max);
    Ok(VerifyReport {
        passed: max_rel_dev <= VERIFY_REL_TOL,
        tolerance: VERIFY_REL_TOL,
        max_rel_dev,
        entries,
    })
}

/// CSV with columns `omega, re_S{N}, im_S{N}, ln_abs_S{N}, ...`.
///
/// Numbers use the shortest representation that round-trips exactly.
pub fn write_csv(sweeps: &[SweepResult]) -> String {
    let mut out = String::from("omega");
    for s in sweeps {
        write!(out, ",re_S{n},im_S{n},ln_abs_S{n}", n = s.n).unwrap();
    }
    out.push('\n');
    let rows = sweeps.first().map(|s| s.len()).unwrap_or(0);
    for i in 0..rows {
        write!(out, "{:e}", sweeps[0].omegas[i]).unwrap();
        for s in sweeps {
            write!(
                out,
                ",{:e},{:e},{:e}",
                s.values[i].re, s.values[i].im, s.log_mags[i]
            )
            .unwrap();
        }
        out.push('\n');
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Preset {
    /// Axes follow the configured grid.
    #[default]
    Grid,
    /// ω ∈ [1e-2, 1e2] with a ln|S_N| axis.
    Figure,
}

const SVG_COLORS: [&str; 6] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf",
];

/// Self-contained SVG of `ln|S_N(jω)|` against log-scaled `ω`.
pub fn render_svg(sweeps: &[SweepResult], x_range: (f64, f64)) -> String {
    let (w, h) = (720.0, 440.0);
    let (left, right, top, bottom) = (70.0, 20.0, 20.0, 50.0);
    let (pw, ph) = (w - left - right, h - top - bottom);
    let (x0, x1) = (x_range.0.log10(), x_range.1.log10());

    let finite = sweeps
        .iter()
        .flat_map(|s| s.omegas.iter().zip(&s.log_mags))
        .filter(|(om, v)| v.is_finite() && **om >= x_range.0 && **om <= x_range.1)
        .map(|(_, v)| *v);
    let (mut y0, mut y1) = finite.fold((0.0_f64, 0.0_f64), |(a, b), v| (a.min(v), b.max(v)));
    let pad = 0.05 * (y1 - y0).max(1e-3);
    y0 -= pad;
    y1 += pad;

    let px = |om: f64| left + (om.log10() - x0) / (x1 - x0) * pw;
    let py = |v: f64| top + (y1 - v) / (y1 - y0) * ph;

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#).unwrap();
    writeln!(
        svg,
        r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    )
    .unwrap();

    for k in (x0.ceil() as i32)..=(x1.floor() as i32) {
        let x = px(10f64.powi(k));
        writeln!(
            svg,
            r##"<line x1="{x:.2}" y1="{top}" x2="{x:.2}" y2="{}" stroke="#ddd"/><text x="{x:.2}" y="{}" text-anchor="middle">1e{k}</text>"##,
            top + ph,
            top + ph + 16.0
        )
        .unwrap();
    }
    let step = nice_step((y1 - y0) / 6.0);
    let mut v = (y0 / step).ceil() * step;
    while v <= y1 {
        let y = py(v);
        writeln!(
            svg,
            r##"<line x1="{left}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#ddd"/><text x="{}" y="{:.2}" text-anchor="end">{}</text>"##,
            left + pw,
            left - 6.0,
            y + 4.0,
            trim_float(v)
        )
        .unwrap();
        v += step;
    }
    if y0 < 0.0 && y1 > 0.0 {
        writeln!(
            svg,
            r#"<line x1="{left}" y1="{:.2}" x2="{}" y2="{:.2}" stroke="black" stroke-dasharray="4 3"/>"#,
            py(0.0),
            left + pw,
            py(0.0)
        )
        .unwrap();
    }

    for (i, s) in sweeps.iter().enumerate() {
        let color = SVG_COLORS[i % SVG_COLORS.len()];
        // gaps split the curve
        let mut segment = Vec::new();
        let flush = |seg: &mut Vec<String>, svg: &mut String| {
            if seg.len() > 1 {
                writeln!(
                    svg,
                    r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                    seg.join(" ")
                )
                .unwrap();
            }
            seg.clear();
        };
        for (om, v) in s.omegas.iter().zip(&s.log_mags) {
            if v.is_finite() && *om >= x_range.0 && *om <= x_range.1 {
                segment.push(format!("{:.2},{:.2}", px(*om), py(v.clamp(y0, y1))));
            } else {
                flush(&mut segment, &mut svg);
            }
        }
        flush(&mut segment, &mut svg);
        let ly = top + 16.0 + 16.0 * i as f64;
        writeln!(
            svg,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/><text x="{}" y="{}">N = {}</text>"#,
            left + pw - 90.0,
            left + pw - 65.0,
            left + pw - 60.0,
            ly + 4.0,
            s.n
        )
        .unwrap();
    }
    writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">ω (rad/s)</text>"#,
        left + pw / 2.0,
        h - 10.0
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">ln|S_N(jω)|</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    )
    .unwrap();
    svg.push_str("</svg>\n");
    svg
}

fn nice_step(raw: f64) -> f64 {
    let mag = 10f64.powf(raw.log10().floor());
    let r = raw / mag;
    let m = if r <= 1.0 {
        1.0
    } else if r <= 2.0 {
        2.0
    } else if r <= 5.0 {
        5.0
    } else {
        10.0
    };
    m * mag
}

fn trim_float(v: f64) -> String {
    let s = format!("{:.3}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "stringsens",
    version,
    about = "Sensitivity limitations for string networks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// H∞ lower bound on sup_N ||S_N|| (JSON).
    Bound(CommonArgs),
    /// Stability of 1/(1 + kL) for all k in (0, 4) (JSON).
    Stability(CommonArgs),
    /// Frequency sweep of S_N(jω) to CSV, optionally SVG.
    Sweep(CommonArgs),
    /// ∫ ln|S_N(jω)| dω for each configured N (JSON list).
    Integral(CommonArgs),
    /// Cross-method agreement check; exit 0 iff it passes.
    Verify(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Config file (flat TOML, ascending-power coefficients).
    pub config: PathBuf,
    #[arg(long, default_value = "auto")]
    pub method: Method,
    /// Output path for sweep CSV.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write an SVG plot next to the CSV.
    #[arg(long)]
    pub svg: bool,
    /// Quadrature tolerance for integrals.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Print JSON on stdout.
    #[arg(long)]
    pub json: bool,
    /// Plot axis preset.
    #[arg(long, value_enum, default_value_t = Preset::Grid)]
    pub preset: Preset,
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("report serialization")
}

#[derive(Serialize)]
struct Sidecar<'a> {
    tool: &'static str,
    version: &'static str,
    config: &'a Path,
    method: Method,
    n_values: &'a [usize],
    grid: &'a FrequencyGrid,
    csv: &'a Path,
    svg: Option<&'a Path>,
}

fn run_command(cmd: &Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    let args = match cmd {
        Command::Bound(a)
        | Command::Stability(a)
        | Command::Sweep(a)
        | Command::Integral(a)
        | Command::Verify(a) => a,
    };
    if let Some(t) = args.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(CliError::Input(format!("--tol must be positive, got {t}")));
        }
    }
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Input(format!("{}: {e}", args.config.display())))?;
    let mut cfg = parse_config(&text)?;
    if args.preset == Preset::Figure {
        cfg.grid.omega_min = 1e-2;
        cfg.grid.omega_max = 1e2;
        cfg.grid.scale = GridScale::Log;
    }
    let io = |e: std::io::Error| CliError::Analysis(format!("write failed: {e}"));

    match cmd {
        Command::Bound(_) => writeln!(out, "{}", to_json(&cmd_bound(&cfg)?)).map_err(io)?,
        Command::Stability(_) => writeln!(out, "{}", to_json(&cmd_stability(&cfg)?)).map_err(io)?,
        Command::Integral(_) => writeln!(
            out,
            "{}",
            to_json(&cmd_integral(&cfg, args.method, args.tol)?)
        )
        .map_err(io)?,
        Command::Verify(_) => {
            let report = cmd_verify(&cfg)?;
            if args.json {
                writeln!(out, "{}", to_json(&report)).map_err(io)?;
            } else {
                writeln!(
                    out,
                    "{}: max relative deviation {:e} (tolerance {:e})",
                    if report.passed { "PASS" } else { "FAIL" },
                    report.max_rel_dev,
                    report.tolerance
                )
                .map_err(io)?;
            }
            if !report.passed {
                return Err(CliError::Analysis("methods disagree".into()));
            }
        }
        Command::Sweep(_) => {
            let sweeps = cmd_sweep(&cfg, args.method)?;
            for s in &sweeps {
                for g in &s.gaps {
                    writeln!(err, "N={} gap at omega={:e}: {}", s.n, g.omega, g.reason)
                        .map_err(io)?;
                }
            }
            let csv_path = args
                .out
                .clone()
                .unwrap_or_else(|| PathBuf::from("sweep.csv"));
            std::fs::write(&csv_path, write_csv(&sweeps))
                .map_err(|e| CliError::Input(format!("{}: {e}", csv_path.display())))?;
            let svg_path = args.svg.then(|| csv_path.with_extension("svg"));
            if let Some(p) = &svg_path {
                let svg = render_svg(&sweeps, (cfg.grid.omega_min.max(1e-12), cfg.grid.omega_max));
                std::fs::write(p, svg)
                    .map_err(|e| CliError::Input(format!("{}: {e}", p.display())))?;
            }
            let sidecar = Sidecar {
                tool: "stringsens",
                version: env!("CARGO_PKG_VERSION"),
                config: &args.config,
                method: args.method,
                n_values: &cfg.n_values,
                grid: &cfg.grid,
                csv: &csv_path,
                svg: svg_path.as_deref(),
            };
            let meta_path = PathBuf::from(format!("{}.meta.json", csv_path.display()));
            std::fs::write(&meta_path, to_json(&sidecar)).map_err(io)?;
            if args.json {
                writeln!(out, "{}", to_json(&sweeps)).map_err(io)?;
            }
        }
    }
    Ok(())
}

/// Runs one CLI invocation, returning the process exit code.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match run_command(&cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "{e}");
            e.exit_code()
        }
    }
}
