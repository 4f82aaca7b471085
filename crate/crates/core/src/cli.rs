//! Command-line front end.
//!
//! Exit codes: 0 success, 1 usage error, 2 domain error, 3 failed
//! expectations. `WINDRS_THREADS` caps the worker pool.

use crate::error::{invalid, Result};
use crate::geodesic::{integrate_direction, IntegrationOptions};
use crate::manifold::Point;
use crate::output::{csv_num, to_json_sig17};
use crate::reachability::{reachable_sweep, separation_with, Grid, SeparationOptions};
use crate::scenarios::{get_scenario, Scenario, ScenarioDoc};
use crate::wind::DEFAULT_REGIME_TOL;
use clap::{Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::io::Write;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DOMAIN: i32 = 2;
pub const EXIT_EXPECTATION: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "windrs", version, about = "Wind Riemannian structures: evaluation, geodesics, wind balls and completeness criteria")]
pub struct RunConfig {
    /// Built-in scenario, `id` or `id:p1,p2`.
    #[arg(long, global = true)]
    pub scenario: Option<String>,
    /// Scenario JSON document.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output file (a directory for `ball`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Regime band override.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// F, F_l, regime, domain class and h eigenvalues at (p, v).
    Eval {
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, allow_hyphen_values = true)]
        vector: String,
    },
    /// Trace CSV of the geodesic with initial direction v.
    Geodesic {
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, allow_hyphen_values = true)]
        vector: String,
        #[arg(long, default_value_t = 10.0)]
        horizon: f64,
    },
    /// Forward wind ball fronts.
    Ball {
        #[arg(long, allow_hyphen_values = true)]
        center: String,
        #[arg(long)]
        radius: f64,
        #[arg(long)]
        dt: Option<f64>,
        /// `lo:hi:h` per axis, comma separated.
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
    },
    /// F̄-separation from --center to --point.
    Separation {
        #[arg(long, allow_hyphen_values = true)]
        center: String,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, allow_hyphen_values = true)]
        grid: Option<String>,
    },
    /// Completeness criteria reports.
    Criteria {
        /// λ values for h_λ, comma separated.
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long)]
        horizon: Option<f64>,
    },
    /// Runs a scenario's expectations table.
    ScenarioSuite,
    /// Prints the scenario document.
    Export,
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| invalid(format!("not a number: `{t}`"))))
        .collect()
}

fn load(cfg: &RunConfig) -> Result<Scenario> {
    match (&cfg.scenario, &cfg.config) {
        (Some(id), None) => get_scenario(id),
        (None, Some(path)) => Scenario::from_doc(ScenarioDoc::from_json(&std::fs::read_to_string(path)?)?),
        _ => Err(invalid("exactly one of --scenario and --config is required")),
    }
}

struct Output {
    stdout: Vec<u8>,
    stderr: Vec<u8>,
}

fn emit(cfg: &RunConfig, out: &mut Output, text: &str) -> Result<()> {
    match &cfg.out {
        Some(p) => write_file(p, text),
        None => {
            out.stdout.extend_from_slice(text.as_bytes());
            Ok(())
        }
    }
}

fn write_file(p: &Path, text: &str) -> Result<()> {
    if let Some(dir) = p.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    std::fs::write(p, text)?;
    Ok(())
}

fn kv_csv(rows: &[(&str, Value)]) -> String {
    let mut s = String::from("quantity,value\n");
    for (k, v) in rows {
        let cell = match v {
            Value::Number(n) => csv_num(n.as_f64().unwrap_or(f64::NAN)),
            Value::Null => "".into(),
            Value::String(t) => t.clone(),
            Value::Array(items) => items
                .iter()
                .map(|i| i.as_f64().map(csv_num).unwrap_or_default())
                .collect::<Vec<_>>()
                .join(" "),
            other => other.to_string(),
        };
        s.push_str(&format!("{k},{cell}\n"));
    }
    s
}

fn cmd_eval(cfg: &RunConfig, s: &Scenario, point: &str, vector: &str, out: &mut Output) -> Result<i32> {
    let p = parse_list(point)?;
    let v = parse_list(vector)?;
    let tol = cfg.tol.unwrap_or(DEFAULT_REGIME_TOL);
    let t = s.zermelo.tangent(&p, &v)?;
    let l = s.zermelo.at(t.base.as_slice())?.to_sstk();
    let vv = DVector::from_vec(v.clone());
    let class = l.classify(&vv, tol);
    let f = l.conic_f(&vv, tol)?;
    let fl = l.lorentz_fl(&vv, tol).ok();
    let mut eig: Vec<f64> = l.h().symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(f64::total_cmp);
    let rows = [
        ("F", json!(f)),
        ("F_l", fl.map(|x| json!(x)).unwrap_or(Value::Null)),
        ("regime", json!(format!("{:?}", l.regime(tol)))),
        ("domain", json!(format!("{class:?}"))),
        ("h_eigenvalues", json!(eig)),
    ];
    let text = match cfg.format.unwrap_or(Format::Json) {
        Format::Json => to_json_sig17(&Value::Object(rows.iter().map(|(k, v)| (k.to_string(), v.clone())).collect())),
        Format::Csv => kv_csv(&rows),
    };
    emit(cfg, out, &text)?;
    Ok(EXIT_OK)
}

fn cmd_geodesic(cfg: &RunConfig, s: &Scenario, point: &str, vector: &str, horizon: f64, out: &mut Output) -> Result<i32> {
    let t = s.zermelo.tangent(&parse_list(point)?, &parse_list(vector)?)?;
    let trace = integrate_direction(&s.zermelo, &t, &IntegrationOptions::default().with_horizon(horizon), None)?;
    let text = match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => trace.to_csv(),
        Format::Json => to_json_sig17(&json!({
            "termination": trace.termination,
            "classification": trace.classification,
            "c": trace.c_rho,
            "null_drift": trace.null_drift,
            "c_drift": trace.c_drift,
            "samples": trace.samples.len(),
            "end": trace.last().x,
            "t_end": trace.last().t,
        })),
    };
    emit(cfg, out, &text)?;
    Ok(EXIT_OK)
}

/// Box around `points` with `margin` on each side, clipped to the chart. The
/// spacing is the largest power of two giving at least 64 cells across the
/// widest side, and the nodes are anchored at the first point.
fn default_grid(s: &Scenario, points: &[&[f64]], margin: f64) -> Result<Grid> {
    let n = s.dim();
    let mut lo = vec![f64::INFINITY; n];
    let mut hi = vec![f64::NEG_INFINITY; n];
    for p in points {
        if p.len() != n {
            return Err(invalid(format!("expected {n} coordinates")));
        }
        for k in 0..n {
            lo[k] = lo[k].min(p[k] - margin);
            hi[k] = hi[k].max(p[k] + margin);
        }
    }
    for k in 0..n {
        let b = s.chart.bounds()[k];
        lo[k] = lo[k].max(b.lo);
        hi[k] = hi[k].min(b.hi);
    }
    let width = (0..n).map(|k| hi[k] - lo[k]).fold(0.0, f64::max);
    let h = 2f64.powf((width / 64.0).log2().floor());
    let a = points[0];
    for k in 0..n {
        lo[k] = a[k] - ((a[k] - lo[k]) / h).floor() * h;
        hi[k] = a[k] + ((hi[k] - a[k]) / h).floor() * h;
    }
    Grid::new(s.chart.clone(), &lo, &hi, &vec![h; n])
}

fn cmd_ball(cfg: &RunConfig, s: &Scenario, center: &str, radius: f64, dt: Option<f64>, grid: Option<&str>, out: &mut Output) -> Result<i32> {
    let c = Point::new(parse_list(center)?);
    let grid = match grid {
        Some(g) => s.grid(g)?,
        None => default_grid(s, &[c.as_slice()], 2.0 * radius)?,
    };
    let dt = dt.unwrap_or(radius / (radius / grid.max_spacing()).ceil().max(1.0));
    let fronts = reachable_sweep(&s.zermelo, &c, radius, dt, &grid)?;
    let n = grid.dim();
    let mut summary = Vec::new();
    for f in &fronts {
        let cells = f.cells();
        let mut lo = vec![f64::INFINITY; n];
        let mut hi = vec![f64::NEG_INFINITY; n];
        for &i in &cells {
            for (k, x) in grid.coords(i).into_iter().enumerate() {
                lo[k] = lo[k].min(x);
                hi[k] = hi[k].max(x);
            }
        }
        summary.push(json!({"level": f.time_level, "count": cells.len(), "lo": lo, "hi": hi}));
    }
    if let Some(dir) = &cfg.out {
        std::fs::create_dir_all(dir)?;
        for (k, f) in fronts.iter().enumerate() {
            write_file(&dir.join(format!("front_{k:04}.csv")), &f.to_csv(&grid))?;
        }
        write_file(&dir.join("summary.json"), &to_json_sig17(&json!(summary)))?;
    } else {
        let text = match cfg.format.unwrap_or(Format::Json) {
            Format::Json => to_json_sig17(&json!(summary)),
            Format::Csv => fronts.iter().map(|f| f.to_csv(&grid)).collect::<Vec<_>>().join(""),
        };
        out.stdout.extend_from_slice(text.as_bytes());
    }
    Ok(EXIT_OK)
}

fn cmd_separation(cfg: &RunConfig, s: &Scenario, center: &str, point: &str, grid: Option<&str>, out: &mut Output) -> Result<i32> {
    let p = Point::new(parse_list(center)?);
    let q = Point::new(parse_list(point)?);
    let grid = match grid {
        Some(g) => s.grid(g)?,
        None => {
            let gap = s.chart.chart_distance(p.as_slice(), q.as_slice());
            default_grid(s, &[p.as_slice(), q.as_slice()], gap.max(1.0))?
        }
    };
    let r = separation_with(&s.zermelo, &p, &q, &grid, &SeparationOptions::default())?;
    emit(cfg, out, &to_json_sig17(&r.to_json(&grid)))?;
    Ok(EXIT_OK)
}

fn cmd_criteria(cfg: &RunConfig, s: &Scenario, lambda: Option<&str>, horizon: Option<f64>, out: &mut Output) -> Result<i32> {
    let lambdas = lambda.map(parse_list).transpose()?;
    let mut extra = Vec::new();
    if s.has_lower_bound() {
        // Seeded points on top of the grid samples.
        let c = s.criteria_doc()?;
        let g = s.grid(&c.grid)?;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for _ in 0..64 {
            let i = rng.gen_range(0..g.len());
            let jitter: Vec<f64> = g.spacing().iter().map(|h| rng.gen_range(-0.5..0.5) * h).collect();
            let x: Vec<f64> = g.coords(i).iter().zip(&jitter).map(|(a, b)| a + b).collect();
            if s.chart.check_bounds(&x).is_ok() {
                extra.push(x);
            }
        }
    }
    let run = s.run_criteria_with(false, lambdas.as_deref(), horizon, &extra)?;
    let body = run.to_json();
    emit(cfg, out, &to_json_sig17(&body))?;
    Ok(EXIT_OK)
}

fn cmd_suite(cfg: &RunConfig, s: &Scenario, out: &mut Output) -> Result<i32> {
    let results = s.run_suite();
    let all = results.iter().all(|r| r.passed);
    let body = json!({
        "scenario": s.id(),
        "passed": all,
        "results": results,
    });
    emit(cfg, out, &to_json_sig17(&body))?;
    if all {
        return Ok(EXIT_OK);
    }
    for r in results.iter().filter(|r| !r.passed) {
        out.stderr.extend_from_slice(format!("FAIL {}\n", r.diff_line()).as_bytes());
    }
    Ok(EXIT_EXPECTATION)
}

fn dispatch(cfg: &RunConfig, out: &mut Output) -> Result<i32> {
    let s = load(cfg)?;
    match &cfg.command {
        Command::Eval { point, vector } => cmd_eval(cfg, &s, point, vector, out),
        Command::Geodesic { point, vector, horizon } => cmd_geodesic(cfg, &s, point, vector, *horizon, out),
        Command::Ball { center, radius, dt, grid } => cmd_ball(cfg, &s, center, *radius, *dt, grid.as_deref(), out),
        Command::Separation { center, point, grid } => cmd_separation(cfg, &s, center, point, grid.as_deref(), out),
        Command::Criteria { lambda, horizon } => cmd_criteria(cfg, &s, lambda.as_deref(), *horizon, out),
        Command::ScenarioSuite => cmd_suite(cfg, &s, out),
        Command::Export => {
            emit(cfg, out, &to_json_sig17(&s.doc.to_json()))?;
            Ok(EXIT_OK)
        }
    }
}

/// Outcome of one invocation, with captured streams.
#[derive(Debug, Clone)]
pub struct Invocation {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn run<I, T>(args: I) -> Invocation
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cfg = match RunConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let text = e.render().to_string();
            return if code == EXIT_OK {
                Invocation { code, stdout: text, stderr: String::new() }
            } else {
                Invocation { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let mut out = Output { stdout: Vec::new(), stderr: Vec::new() };
    let code = match dispatch(&cfg, &mut out) {
        Ok(c) => c,
        Err(e) => {
            out.stderr.extend_from_slice(format!("error: {e}\n").as_bytes());
            if e.is_domain() {
                EXIT_DOMAIN
            } else {
                EXIT_USAGE
            }
        }
    };
    Invocation {
        code,
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

/// Caps the global worker pool from `WINDRS_THREADS`; ignored if unset or invalid.
pub fn init_threads() {
    if let Some(n) = std::env::var("WINDRS_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

pub fn main_entry() -> i32 {
    init_threads();
    let inv = run(std::env::args_os());
    let _ = std::io::stdout().write_all(inv.stdout.as_bytes());
    let _ = std::io::stderr().write_all(inv.stderr.as_bytes());
    inv.code
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> Invocation {
        run(std::iter::once("windrs").chain(args.iter().copied()))
    }

    #[test]
    fn eval_constant_wind() {
        let r = call(&["eval", "--scenario", "constant_wind:1,1", "--point", "0,0", "--vector", "2,1"]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        let v: Value = serde_json::from_str(&r.stdout).unwrap();
        assert!((v["F"].as_f64().unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(v["regime"], "Strong");
    }

    #[test]
    fn zero_vector_at_mild_point_is_domain_error() {
        let r = call(&["eval", "--scenario", "constant_wind:0.5,0", "--point", "0,0", "--vector", "0,0"]);
        assert_eq!(r.code, 2);
        assert!(r.stderr.contains("vector outside A∪A_E"), "{}", r.stderr);
    }

    #[test]
    fn usage_errors() {
        assert_eq!(call(&["eval", "--point", "0,0", "--vector", "1,0"]).code, 1);
        assert_eq!(call(&["eval", "--scenario", "torus", "--point", "a", "--vector", "1,0"]).code, 1);
        assert_eq!(call(&["frobnicate"]).code, 1);
        assert_eq!(call(&["--help"]).code, 0);
    }

    #[test]
    fn corridor_ball_stays_in_the_trap() {
        let r = call(&["ball", "--scenario", "corridor", "--center", "2,0", "--radius", "3"]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        let v: Value = serde_json::from_str(&r.stdout).unwrap();
        for level in v.as_array().unwrap() {
            assert!(level["lo"][0].as_f64().unwrap() >= 1.0 - 1e-9);
            assert!(level["hi"][0].as_f64().unwrap() <= 3.0 + 1e-9);
        }
    }

    #[test]
    fn negative_vector_components_parse() {
        let r = call(&["eval", "--scenario", "killing_horizon:1", "--point", "1.5", "--vector", "-1"]);
        assert_eq!(r.code, 0, "{}", r.stderr);
        let v: Value = serde_json::from_str(&r.stdout).unwrap();
        assert!(v["F"].as_f64().unwrap().is_finite());
        assert_eq!(v["regime"], "Mild");
    }
}
