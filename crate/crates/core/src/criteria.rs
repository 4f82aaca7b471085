//! Completeness criteria: Finslerian lower bounds, the conformal metric `h*`,
//! linear wind growth, the metric `h`, the family `h_λ`, and a ray-length
//! test for diverging curves.
//!
//! Riemannian completeness is only semi-decided. A ray of finite length
//! witnesses incompleteness; completeness is claimed from divergent rays only
//! when the scenario declares rays sufficient.

use crate::error::{invalid, Error, Result};
use crate::geodesic::{probe_completeness, IntegrationOptions, ProbeOutcome, Seed};
use crate::manifold::{ChartManifold, MetricField, Point};
use crate::reachability::{direction_fan, stencil, Grid};
use crate::wind::{LocalZermelo, ZermeloData, DEFAULT_REGIME_TOL};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail(Value),
    Inconclusive(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub criterion: String,
    pub verdict: Verdict,
    pub evidence: serde_json::Map<String, Value>,
}

impl CriterionReport {
    fn new(criterion: &str, verdict: Verdict, evidence: Value) -> Self {
        let evidence = match evidence {
            Value::Object(m) => m,
            _ => serde_json::Map::new(),
        };
        CriterionReport {
            criterion: criterion.into(),
            verdict,
            evidence,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_json(&self) -> Value {
        let (verdict, witness, reason) = match &self.verdict {
            Verdict::Pass => ("Pass", None, None),
            Verdict::Fail(w) => ("Fail", Some(w.clone()), None),
            Verdict::Inconclusive(r) => ("Inconclusive", None, Some(r.clone())),
        };
        let mut m = serde_json::Map::new();
        m.insert("criterion".into(), json!(self.criterion));
        m.insert("verdict".into(), json!(verdict));
        if let Some(w) = witness {
            m.insert("witness".into(), w);
        }
        if let Some(r) = reason {
            m.insert("reason".into(), json!(r));
        }
        m.insert("evidence".into(), Value::Object(self.evidence.clone()));
        Value::Object(m)
    }
}

/// A Finsler evaluator `H(x, v)`; `None` where it is undefined.
pub type FinslerFn<'a> = &'a (dyn Fn(&[f64], &[f64]) -> Option<f64> + Sync);

/// Checks `H(v) ≤ F(v)` on admissible vectors at the sample points, over the
/// direction fan (both signs in one dimension).
pub fn check_lower_bound(z: &ZermeloData, h: FinslerFn, points: &[Vec<f64>]) -> CriterionReport {
    let dirs = lower_bound_directions(z.dim());
    let mut checked = 0usize;
    let mut regimes = [0usize; 3];
    let mut worst = 0.0f64;
    for x in points {
        let Ok(l) = z.at(x) else { continue };
        let s = l.to_sstk();
        let reg = s.regime(DEFAULT_REGIME_TOL);
        regimes[reg as usize] += 1;
        for d in &dirs {
            let v = DVector::from_column_slice(d);
            let Ok(f) = s.conic_f(&v, DEFAULT_REGIME_TOL) else { continue };
            if !f.is_finite() {
                continue;
            }
            let Some(hv) = h(x, d) else { continue };
            checked += 1;
            worst = worst.max(hv / f);
            if hv > f * (1.0 + 1e-9) {
                return CriterionReport::new(
                    "lower_bound",
                    Verdict::Fail(json!({"point": x, "vector": d, "H": hv, "F": f})),
                    json!({"checked": checked}),
                );
            }
        }
    }
    let evidence = json!({
        "checked": checked,
        "max_ratio": worst,
        "mild_points": regimes[0],
        "critical_points": regimes[1],
        "strong_points": regimes[2],
    });
    if checked == 0 {
        return CriterionReport::new("lower_bound", Verdict::Inconclusive("no admissible samples".into()), evidence);
    }
    CriterionReport::new("lower_bound", Verdict::Pass, evidence)
}

fn lower_bound_directions(dim: usize) -> Vec<Vec<f64>> {
    if dim == 2 {
        return (0..64)
            .map(|k| {
                let a = k as f64 * std::f64::consts::PI / 32.0;
                vec![a.cos(), a.sin()]
            })
            .collect();
    }
    direction_fan(dim)
}

/// `h* = g_R / (1 + |W|_R)²`.
pub fn metric_h_star(z: &ZermeloData, p: &Point) -> Result<DMatrix<f64>> {
    let l = z.at(p.as_slice())?;
    let w = l.wind_norm();
    Ok(&l.g_r / (1.0 + w).powi(2))
}

/// `h = g_R − W♭⊗W♭ / (1 + |W|²_R)`.
pub fn metric_h(z: &ZermeloData, p: &Point) -> Result<DMatrix<f64>> {
    wind_shrunk(z, 1.0, p)
}

/// `h_λ = (g_R − W♭⊗W♭ / (λ² − 1 + |W|²_R)) / λ²`, for `λ > 1`.
pub fn metric_h_lambda(z: &ZermeloData, lambda: f64, p: &Point) -> Result<DMatrix<f64>> {
    if !(lambda > 1.0) {
        return Err(invalid(format!("h_λ needs λ > 1, got {lambda}")));
    }
    Ok(wind_shrunk(z, lambda * lambda - 1.0, p)? / (lambda * lambda))
}

// g_R − W♭⊗W♭/(k+|W|²), written with the unit wind so that it stays
// accurate when |W| is huge.
fn wind_shrunk(z: &ZermeloData, k: f64, p: &Point) -> Result<DMatrix<f64>> {
    let l = z.at(p.as_slice())?;
    let w = l.wind_norm();
    if w == 0.0 {
        return Ok(l.g_r);
    }
    let flat = (&l.g_r * &l.wind) / w;
    let coef = if w.is_finite() { (w * w) / (k + w * w) } else { 1.0 };
    Ok(&l.g_r - &flat * flat.transpose() * coef)
}

/// `|v|` for `h*`, `h` and `h_λ` (unscaled by `1/λ²`), evaluated through the
/// component of `v` orthogonal to the wind.
pub fn criterion_norm(z: &ZermeloData, kind: MetricKind, x: &[f64], v: &[f64]) -> Result<f64> {
    let l = z.at(x)?;
    Ok(criterion_quadratic(kind, &l, &DVector::from_column_slice(v)).sqrt())
}

/// `|v|²` of a criterion metric for pointwise Zermelo data.
pub fn criterion_quadratic(kind: MetricKind, l: &LocalZermelo, v: &DVector<f64>) -> f64 {
    let gv = &l.g_r * v;
    let vv = gv.dot(v).max(0.0);
    let w = l.wind_norm();
    match kind {
        MetricKind::GR => vv,
        MetricKind::HStar => vv / (1.0 + w).powi(2),
        MetricKind::H | MetricKind::HLambda(_) => {
            let (k, scale) = match kind {
                MetricKind::HLambda(lam) => (lam * lam - 1.0, lam * lam),
                _ => (1.0, 1.0),
            };
            if w == 0.0 {
                return vv / scale;
            }
            let s = l.wind.amax();
            let what = &l.wind / s / (w / s);
            let along = gv.dot(&what);
            let perp = v - &what * along;
            let perp2 = (&l.g_r * &perp).dot(&perp).max(0.0);
            // The wind component is shrunk by k/(k+|W|²).
            let shrink = if w.is_finite() { k / (k + w * w) } else { 0.0 };
            (perp2 + along * along * shrink) / scale
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum MetricKind {
    GR,
    HStar,
    H,
    HLambda(f64),
}

impl MetricKind {
    pub fn name(&self) -> String {
        match self {
            MetricKind::GR => "g_R".into(),
            MetricKind::HStar => "h_star".into(),
            MetricKind::H => "h".into(),
            MetricKind::HLambda(l) => format!("h_lambda({l})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RayVerdict {
    Divergent,
    Convergent(f64),
    Inconclusive(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    pub base: Vec<f64>,
    pub direction: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RayFamily {
    pub base: Vec<f64>,
    pub directions: Vec<Vec<f64>>,
    /// Largest parameter for rays that never leave the chart.
    pub horizon: f64,
    pub levels: usize,
}

impl RayFamily {
    pub fn fan(base: Vec<f64>) -> Self {
        let dim = base.len();
        RayFamily {
            base,
            directions: direction_fan(dim),
            horizon: 4096.0,
            levels: 12,
        }
    }

    pub fn rays(&self) -> Vec<Ray> {
        self.directions
            .iter()
            .map(|d| Ray {
                base: self.base.clone(),
                direction: d.clone(),
            })
            .collect()
    }
}

/// Parameter at which the ray meets a finite chart bound, if any.
fn exit_parameter(chart: &ChartManifold, ray: &Ray) -> f64 {
    let mut s = f64::INFINITY;
    for k in 0..chart.dim() {
        if chart.periods()[k].is_some() {
            continue;
        }
        let b = chart.bounds()[k];
        let d = ray.direction[k];
        if d > 0.0 && b.hi.is_finite() {
            s = s.min((b.hi - ray.base[k]) / d);
        } else if d < 0.0 && b.lo.is_finite() {
            s = s.min((b.lo - ray.base[k]) / d);
        }
    }
    for e in chart.excluded() {
        // Rays through an excluded point end there.
        let rel: Vec<f64> = (0..chart.dim()).map(|k| e[k] - ray.base[k]).collect();
        let dd: f64 = ray.direction.iter().map(|v| v * v).sum();
        let t = rel.iter().zip(&ray.direction).map(|(a, b)| a * b).sum::<f64>() / dd;
        if t > 0.0 {
            let miss: f64 = (0..chart.dim())
                .map(|k| (rel[k] - t * ray.direction[k]).powi(2))
                .sum::<f64>()
                .sqrt();
            if miss < 1e-12 {
                s = s.min(t);
            }
        }
    }
    s
}

fn simpson<F: Fn(f64) -> Result<f64>>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm)?;
    let frm = f(rm)?;
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let diff = left + right - whole;
    if depth == 0 || diff.abs() <= 15.0 * tol {
        return Ok(left + right + diff / 15.0);
    }
    Ok(simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

/// Adaptive Simpson quadrature.
pub fn integrate<F: Fn(f64) -> Result<f64>>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64> {
    // Split into pieces first so narrow features are not skipped.
    let pieces = 16;
    let mut total = 0.0;
    for i in 0..pieces {
        let lo = a + (b - a) * i as f64 / pieces as f64;
        let hi = a + (b - a) * (i + 1) as f64 / pieces as f64;
        let fa = f(lo)?;
        let fb = f(hi)?;
        let fm = f(0.5 * (lo + hi))?;
        let whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
        total += simpson(f, lo, hi, fa, fm, fb, whole, tol / pieces as f64, 40)?;
    }
    Ok(total)
}

/// Length of a ray truncated at geometrically increasing parameters, with
/// the level-to-level increments classified by a ratio test.
///
/// Rays that meet a chart bound at `S` are truncated at `S(1 − 2^{−k})`;
/// the others at `horizon·2^{k−levels}`. Evaluation failures past level 5 end
/// the sequence early instead of voiding it.
pub fn ray_length_estimate(
    norm: &(dyn Fn(&[f64], &[f64]) -> Result<f64> + Sync),
    chart: &ChartManifold,
    ray: &Ray,
    horizon: f64,
    levels: usize,
) -> RayVerdict {
    if ray.direction.iter().all(|v| *v == 0.0) {
        return RayVerdict::Inconclusive("zero direction".into());
    }
    let exit = exit_parameter(chart, ray);
    let params: Vec<f64> = (0..=levels)
        .map(|k| {
            if exit.is_finite() {
                exit * (1.0 - 0.5f64.powi(k as i32))
            } else {
                horizon * 2f64.powi(k as i32 - levels as i32)
            }
        })
        .collect();
    let speed = |s: f64| -> Result<f64> {
        let x: Vec<f64> = ray.base.iter().zip(&ray.direction).map(|(b, d)| b + s * d).collect();
        let x = chart.wrap_coords(&x);
        let v = norm(&x, &ray.direction)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(crate::error::DomainError::NonFinite("ray speed").into())
        }
    };
    let mut increments = Vec::new();
    let mut total = 0.0;
    let mut lengths = Vec::new();
    let mut start = if exit.is_finite() { 0.0 } else { 0.0 };
    for &s in &params {
        if s <= start && !increments.is_empty() {
            continue;
        }
        let seg = integrate(&speed, start, s, 1e-10 * (1.0 + total));
        match seg {
            Ok(v) => {
                total += v;
                increments.push(v);
                lengths.push(total);
                start = s;
            }
            Err(e) => {
                if increments.len() < 6 {
                    return RayVerdict::Inconclusive(format!("evaluation failed at s = {s}: {e}"));
                }
                break;
            }
        }
    }
    classify_increments(&increments, &lengths)
}

fn classify_increments(inc: &[f64], lengths: &[f64]) -> RayVerdict {
    let n = inc.len();
    if n < 4 {
        return RayVerdict::Inconclusive("too few levels".into());
    }
    let last = &inc[n - 3..];
    let ratios: Vec<f64> = (n - 3..n).map(|k| inc[k] / inc[k - 1]).collect();
    if last.iter().all(|v| *v >= 1e-6) && ratios.iter().all(|r| *r >= 0.9) {
        return RayVerdict::Divergent;
    }
    let total = *lengths.last().expect("levels");
    if last.iter().all(|v| *v < 1e-12 * (1.0 + total)) {
        return RayVerdict::Convergent(total);
    }
    if ratios.iter().all(|r| *r <= 0.75) {
        // Geometric tail extrapolation at the last two levels.
        let est = |k: usize| {
            let rho = inc[k] / inc[k - 1];
            lengths[k] + inc[k] * rho / (1.0 - rho)
        };
        let a = est(n - 1);
        let b = est(n - 2);
        if (a - b).abs() <= 1e-6 * (1.0 + a.abs()) {
            return RayVerdict::Convergent(a);
        }
    }
    RayVerdict::Inconclusive(format!("increments {last:?}, ratios {ratios:?}"))
}

/// Ray completeness test of one of the criterion metrics.
pub fn ray_test(z: &ZermeloData, kind: MetricKind, rays: &RayFamily, radial_sufficient: bool) -> CriterionReport {
    let chart = z.chart.clone();
    let norm = |x: &[f64], v: &[f64]| criterion_norm(z, kind, x, v);
    let verdicts: Vec<RayVerdict> = rays
        .rays()
        .par_iter()
        .map(|r| ray_length_estimate(&norm, &chart, r, rays.horizon, rays.levels))
        .collect();
    let summary: Vec<Value> = rays
        .directions
        .iter()
        .zip(&verdicts)
        .map(|(d, v)| json!({"direction": d, "verdict": v}))
        .collect();
    let evidence = json!({"base": rays.base, "rays": summary});
    let name = kind.name();
    if let Some((d, v)) = rays.directions.iter().zip(&verdicts).find(|(_, v)| matches!(v, RayVerdict::Convergent(_))) {
        let RayVerdict::Convergent(len) = v else { unreachable!() };
        return CriterionReport::new(
            &name,
            Verdict::Fail(json!({"ray_base": rays.base, "direction": d, "length": len})),
            evidence,
        );
    }
    if verdicts.iter().all(|v| *v == RayVerdict::Divergent) {
        if radial_sufficient {
            return CriterionReport::new(&name, Verdict::Pass, evidence);
        }
        return CriterionReport::new(
            &name,
            Verdict::Inconclusive("all rays diverge but rays are not declared sufficient".into()),
            evidence,
        );
    }
    CriterionReport::new(&name, Verdict::Inconclusive("some rays are inconclusive".into()), evidence)
}

#[derive(Clone, Copy, PartialEq)]
struct Entry(f64, usize);

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// `g_R`-distance from `x0` to every grid cell (shortest path, stencil radius 2,
/// midpoint weights).
pub fn riemannian_distances(z: &ZermeloData, x0: &[f64], grid: &Grid) -> Result<Vec<f64>> {
    let n = grid.dim();
    let src = grid.snap(x0)?;
    let offsets = stencil(n, 2);
    let h = grid.spacing().to_vec();
    let chart = &grid.chart;
    let mut dist = vec![f64::INFINITY; grid.len()];
    let mut done = vec![false; grid.len()];
    let mut heap = BinaryHeap::new();
    dist[src] = 0.0;
    heap.push(Entry(0.0, src));
    while let Some(Entry(d, idx)) = heap.pop() {
        if done[idx] {
            continue;
        }
        done[idx] = true;
        let m = grid.multi(idx);
        let x = grid.coords(idx);
        for off in &offsets {
            let t: Vec<i64> = (0..n).map(|k| m[k] + off[k]).collect();
            let Some(tidx) = grid.index(&t) else { continue };
            if done[tidx] {
                continue;
            }
            let u: Vec<f64> = (0..n).map(|k| off[k] as f64 * h[k]).collect();
            let mid: Vec<f64> = chart.wrap_coords(&(0..n).map(|k| x[k] + 0.5 * u[k]).collect::<Vec<_>>());
            let Ok(g) = z.g_r.metric(&mid) else { continue };
            let uv = DVector::from_vec(u);
            let w = (&g * &uv).dot(&uv).max(0.0).sqrt();
            if d + w < dist[tidx] {
                dist[tidx] = d + w;
                heap.push(Entry(d + w, tidx));
            }
        }
    }
    Ok(dist)
}

/// Linear growth `|W|_R ≤ λ₀ + λ₁ d_R(x₀, ·)` on the grid cells.
///
/// The slope is a least-squares fit on every other cell, the intercept the
/// smallest one enveloping those cells; the remaining cells are held out. A
/// ratio above 2.5 between maxima on successive doubling shells of `d_R`
/// flags superlinear growth.
pub fn check_linear_growth(z: &ZermeloData, x0: &[f64], grid: &Grid, completeness: &CriterionReport) -> CriterionReport {
    let dist = match riemannian_distances(z, x0, grid) {
        Ok(d) => d,
        Err(e) => return CriterionReport::new("linear_growth", Verdict::Inconclusive(e.to_string()), json!({})),
    };
    let mut samples: Vec<(f64, f64, usize)> = Vec::new();
    for (idx, &d) in dist.iter().enumerate() {
        if !d.is_finite() {
            continue;
        }
        let x = grid.coords(idx);
        if let Ok(l) = z.at(&x) {
            samples.push((d, l.wind_norm(), idx));
        }
    }
    if samples.len() < 8 {
        return CriterionReport::new("linear_growth", Verdict::Inconclusive("too few samples".into()), json!({}));
    }
    let (fit, held): (Vec<_>, Vec<_>) = samples.iter().enumerate().partition(|(k, _)| k % 2 == 0);
    let fit: Vec<(f64, f64, usize)> = fit.into_iter().map(|(_, s)| *s).collect();
    let held: Vec<(f64, f64, usize)> = held.into_iter().map(|(_, s)| *s).collect();
    let nf = fit.len() as f64;
    let md = fit.iter().map(|s| s.0).sum::<f64>() / nf;
    let mw = fit.iter().map(|s| s.1).sum::<f64>() / nf;
    let sxx: f64 = fit.iter().map(|s| (s.0 - md).powi(2)).sum();
    let sxy: f64 = fit.iter().map(|s| (s.0 - md) * (s.1 - mw)).sum();
    let lambda1 = if sxx > 0.0 { (sxy / sxx).max(0.0) } else { 0.0 };
    let lambda0 = fit.iter().map(|s| s.1 - lambda1 * s.0).fold(f64::NEG_INFINITY, f64::max).max(0.0);

    // Doubling shells of d_R.
    let dmax = samples.iter().map(|s| s.0).fold(0.0, f64::max);
    let mut shells: Vec<(f64, f64, usize)> = Vec::new();
    let mut outer = dmax;
    while outer > 4.0 * grid.max_spacing() {
        let inner = 0.5 * outer;
        if let Some(best) = samples
            .iter()
            .filter(|s| s.0 > inner && s.0 <= outer)
            .max_by(|a, b| a.1.total_cmp(&b.1))
        {
            shells.push((outer, best.1, best.2));
        }
        outer = inner;
    }
    shells.reverse();
    let mut evidence = json!({
        "lambda0": lambda0,
        "lambda1": lambda1,
        "samples": samples.len(),
        "shell_maxima": shells.iter().map(|s| json!([s.0, s.1])).collect::<Vec<_>>(),
    });
    for w in shells.windows(2) {
        if w[0].1 > 1.0 && w[1].1 / w[0].1 > 2.5 {
            evidence["superlinear_ratio"] = json!(w[1].1 / w[0].1);
            return CriterionReport::new(
                "linear_growth",
                Verdict::Fail(json!({"point": grid.coords(w[1].2), "wind_norm": w[1].1, "distance": w[1].0})),
                evidence,
            );
        }
    }
    let slack = 1e-6 * (1.0 + lambda0);
    if let Some(v) = held.iter().find(|s| s.1 > lambda0 + lambda1 * s.0 + slack + 0.05 * (lambda0 + lambda1 * s.0)) {
        return CriterionReport::new(
            "linear_growth",
            Verdict::Fail(json!({"point": grid.coords(v.2), "wind_norm": v.1, "distance": v.0})),
            evidence,
        );
    }
    evidence["g_R_completeness"] = completeness.to_json();
    match &completeness.verdict {
        Verdict::Pass => CriterionReport::new("linear_growth", Verdict::Pass, evidence),
        _ => CriterionReport::new(
            "linear_growth",
            Verdict::Inconclusive("growth is linear but g_R completeness is not certified".into()),
            evidence,
        ),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Aggregate {
    CompleteBySomeCriterion,
    NoCriterionApplies,
    IncompletenessWitness,
}

pub struct CriteriaConfig<'a> {
    pub x0: Vec<f64>,
    pub grid: Grid,
    pub rays: RayFamily,
    pub lambdas: Vec<f64>,
    pub lower_bound: Option<FinslerFn<'a>>,
    pub lower_bound_points: Vec<Vec<f64>>,
    pub radial_sufficient: bool,
    pub short_circuit: bool,
    pub probe_horizon: f64,
    pub probe_options: IntegrationOptions,
}

#[derive(Debug, Clone)]
pub struct CriteriaRun {
    pub reports: Vec<CriterionReport>,
    pub aggregate: Aggregate,
    /// Name of the passing criterion, or the incomplete probe.
    pub detail: Value,
}

impl CriteriaRun {
    pub fn to_json(&self) -> Value {
        json!({
            "aggregate": self.aggregate,
            "detail": self.detail,
            "reports": self.reports.iter().map(|r| r.to_json()).collect::<Vec<_>>(),
        })
    }
}

/// Runs linear growth, `h*`, `h`, `h_λ` and the scenario's `H` in that order;
/// without a passing criterion, probes for an incomplete geodesic.
pub fn run_criteria(z: &ZermeloData, cfg: &CriteriaConfig) -> CriteriaRun {
    let mut reports = Vec::new();
    let done = |reports: &Vec<CriterionReport>| cfg.short_circuit && reports.iter().any(|r| r.passed());

    let gr = ray_test(z, MetricKind::GR, &cfg.rays, cfg.radial_sufficient);
    reports.push(check_linear_growth(z, &cfg.x0, &cfg.grid, &gr));
    let mut kinds = vec![MetricKind::HStar, MetricKind::H];
    kinds.extend(cfg.lambdas.iter().map(|l| MetricKind::HLambda(*l)));
    for k in kinds {
        if done(&reports) {
            break;
        }
        reports.push(ray_test(z, k, &cfg.rays, cfg.radial_sufficient));
    }
    if let Some(h) = cfg.lower_bound {
        if !done(&reports) {
            reports.push(check_lower_bound(z, h, &cfg.lower_bound_points));
        }
    }
    if let Some(r) = reports.iter().find(|r| r.passed()) {
        return CriteriaRun {
            aggregate: Aggregate::CompleteBySomeCriterion,
            detail: json!({"criterion": r.criterion}),
            reports,
        };
    }
    let mut seeds = Vec::new();
    for d in &cfg.rays.directions {
        seeds.push(Seed::forward(cfg.x0.clone(), d.clone()));
        seeds.push(Seed::backward(cfg.x0.clone(), d.clone()));
    }
    let outcomes = probe_completeness(z, &seeds, cfg.probe_horizon, &cfg.probe_options);
    let best = seeds
        .iter()
        .zip(&outcomes)
        .filter_map(|(s, o)| match o {
            ProbeOutcome::Incomplete { length } => Some((s, *length)),
            _ => None,
        })
        .min_by(|a, b| a.1.total_cmp(&b.1));
    match best {
        Some((s, length)) => CriteriaRun {
            aggregate: Aggregate::IncompletenessWitness,
            detail: json!({"point": s.point, "direction": s.direction, "backward": s.backward, "length": length}),
            reports,
        },
        None => CriteriaRun {
            aggregate: Aggregate::NoCriterionApplies,
            detail: Value::Null,
            reports,
        },
    }
}

/// `h` from raw SSTK data in index notation:
/// `h_ij = g0_ij − ω_i ω_j / (1 + ω_k ω^k)`, valid for normalized data.
pub fn metric_h_from_sstk(g0: &DMatrix<f64>, omega: &DVector<f64>) -> Result<DMatrix<f64>> {
    let inv = g0.clone().try_inverse().ok_or_else(|| Error::SingularMetric(vec![]))?;
    let up = &inv * omega;
    let n2 = omega.dot(&up);
    Ok(g0 - omega * omega.transpose() / (1.0 + n2))
}

/// The norm of a metric field, for [`ray_length_estimate`].
pub fn field_norm(field: &MetricField) -> impl Fn(&[f64], &[f64]) -> Result<f64> + Sync + '_ {
    move |x, v| {
        let g = field.metric(x)?;
        let v = DVector::from_column_slice(v);
        Ok((&g * &v).dot(&v).max(0.0).sqrt())
    }
}
