//! Lightlike geodesics of the stationary spacetime `ℝ × M` and their
//! projections, the Σ-geodesics.
//!
//! Geodesics are integrated in affine parameter with an adaptive
//! Dormand-Prince 5(4) pair. After every accepted step the time component of
//! the velocity is re-solved from the null condition, picking the root closest
//! to the current value. Samples are recorded per accepted step; `t` is
//! strictly increasing along future-directed curves, so the samples double as
//! the `t`-parametrized projected curve.

use crate::error::{DomainError, Error, Result};
use crate::manifold::{ChartManifold, MetricField, Point, TangentVector};
use crate::output::csv_row;
use crate::wind::{zermelo_to_sstk, DomainClass, LocalSstk, LocalZermelo, SstkData, ZermeloData, DEFAULT_REGIME_TOL};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// A metric with coordinate derivatives.
pub trait MetricSource {
    fn dim(&self) -> usize;
    fn metric(&self, q: &[f64]) -> Result<DMatrix<f64>>;
    fn partial(&self, q: &[f64], i: usize) -> Result<DMatrix<f64>>;
}

impl MetricSource for MetricField {
    fn dim(&self) -> usize {
        MetricField::dim(self)
    }
    fn metric(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        MetricField::metric(self, q)
    }
    fn partial(&self, q: &[f64], i: usize) -> Result<DMatrix<f64>> {
        MetricField::partial(self, q, i)
    }
}

/// `-Λ dt² + ω⊗dt + dt⊗ω + g0` on `ℝ × M`; coordinate 0 is `t`.
#[derive(Clone)]
pub struct SstkMetric {
    pub source: SstkData,
    pub chart: Arc<ChartManifold>,
    /// Zermelo data of the normalized splitting, used for integration.
    pub nav: ZermeloData,
}

fn assemble(l: &LocalSstk) -> DMatrix<f64> {
    let n = l.dim();
    let mut g = DMatrix::zeros(n + 1, n + 1);
    g[(0, 0)] = -l.lapse;
    for i in 0..n {
        g[(0, i + 1)] = l.shift[i];
        g[(i + 1, 0)] = l.shift[i];
        for j in 0..n {
            g[(i + 1, j + 1)] = l.g0[(i, j)];
        }
    }
    g
}

impl SstkMetric {
    pub fn new(source: SstkData, chart: Arc<ChartManifold>) -> Result<Self> {
        let nav = source.to_zermelo((*chart).clone())?;
        Ok(SstkMetric { source, chart, nav })
    }

    /// Normalized spacetime of a Zermelo structure.
    pub fn from_zermelo(z: &ZermeloData) -> Self {
        SstkMetric {
            source: zermelo_to_sstk(z),
            chart: z.chart.clone(),
            nav: z.clone(),
        }
    }

    pub fn space_dim(&self) -> usize {
        self.source.dim()
    }

    pub fn local(&self, x: &[f64]) -> Result<LocalSstk> {
        self.source.at(x)
    }
}

impl MetricSource for SstkMetric {
    fn dim(&self) -> usize {
        self.source.dim() + 1
    }

    fn metric(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        Ok(assemble(&self.source.at(&q[1..])?))
    }

    fn partial(&self, q: &[f64], i: usize) -> Result<DMatrix<f64>> {
        let n = self.source.dim();
        if i == 0 {
            return Ok(DMatrix::zeros(n + 1, n + 1));
        }
        let x = &q[1..];
        let k = i - 1;
        let l = LocalSstk {
            lapse: self.source.lapse.partial(x, k)?,
            shift: self.source.shift.partial(x, k)?,
            g0: self.source.g0.partial(x, k)?,
        };
        Ok(assemble(&l))
    }
}

/// Christoffel symbols of the second kind, `Γ^a_{bc}`.
#[derive(Debug, Clone)]
pub struct Christoffel {
    n: usize,
    data: Vec<f64>,
}

impl Christoffel {
    pub fn get(&self, a: usize, b: usize, c: usize) -> f64 {
        self.data[(a * self.n + b) * self.n + c]
    }

    pub fn dim(&self) -> usize {
        self.n
    }
}

pub fn christoffel<G: MetricSource + ?Sized>(g: &G, q: &[f64]) -> Result<Christoffel> {
    let n = g.dim();
    let m = g.metric(q)?;
    let inv = m.try_inverse().ok_or_else(|| Error::SingularMetric(q.to_vec()))?;
    let dg: Vec<DMatrix<f64>> = (0..n).map(|i| g.partial(q, i)).collect::<Result<_>>()?;
    let mut data = vec![0.0; n * n * n];
    for b in 0..n {
        for c in 0..n {
            // first kind [bc, d]
            let first: Vec<f64> = (0..n)
                .map(|d| 0.5 * (dg[b][(d, c)] + dg[c][(b, d)] - dg[d][(b, c)]))
                .collect();
            for a in 0..n {
                data[(a * n + b) * n + c] = (0..n).map(|d| inv[(a, d)] * first[d]).sum();
            }
        }
    }
    Ok(Christoffel { n, data })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GeodesicClass {
    FGeodesic,
    FlGeodesic,
    Boundary,
    Exceptional,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    HorizonReached,
    DomainExit,
    StepUnderflow,
    ExcludedPointApproach,
    /// The caller's stop event fired.
    EventReached,
    /// `max_steps` accepted steps were taken.
    StepLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceSample {
    pub s: f64,
    pub t: f64,
    pub x: Vec<f64>,
    /// `dx/dt` of the projected curve.
    pub velocity: Vec<f64>,
    pub null_residual: f64,
    pub c_residual: f64,
}

#[derive(Debug, Clone)]
pub struct GeodesicTrace {
    pub samples: Vec<TraceSample>,
    pub c_rho: f64,
    /// Max `|g(ρ′,ρ′)|`, relative to `|u0|²`.
    pub null_drift: f64,
    /// Max `|g(ρ′,∂_t) − C|`.
    pub c_drift: f64,
    pub classification: GeodesicClass,
    pub termination: Termination,
    /// Chart-Euclidean norm of the initial spacetime velocity.
    pub u0_norm: f64,
    /// Final `(t, x, u)` state, usable for restarts.
    pub end_state: Vec<f64>,
}

impl GeodesicTrace {
    pub fn last(&self) -> &TraceSample {
        self.samples.last().expect("trace has at least one sample")
    }

    pub fn t_extent(&self) -> f64 {
        self.last().t - self.samples[0].t
    }

    pub fn end_velocity(&self) -> Vec<f64> {
        let m = self.end_state.len() / 2;
        self.end_state[m..].to_vec()
    }

    /// Trapezoidal quadrature of `norm(α′(t))` along the samples.
    pub fn length_by<F: Fn(&[f64], &[f64]) -> Option<f64>>(&self, norm: F) -> f64 {
        let vals: Vec<f64> = self
            .samples
            .iter()
            .map(|s| norm(&s.x, &s.velocity).unwrap_or(1.0))
            .collect();
        let mut len = 0.0;
        for k in 1..self.samples.len() {
            let dt = self.samples[k].t - self.samples[k - 1].t;
            len += 0.5 * dt * (vals[k] + vals[k - 1]);
        }
        len
    }

    /// F̄-length using the structure's conic metric.
    pub fn conic_length(&self, s: &SstkData) -> f64 {
        self.length_by(|x, v| {
            let l = s.at(x).ok()?;
            l.conic_f(&DVector::from_column_slice(v), DEFAULT_REGIME_TOL).ok()
        })
    }

    pub fn csv_header(&self) -> String {
        let n = self.samples.first().map_or(0, |s| s.x.len());
        let mut cols = vec!["s".to_string(), "t".to_string()];
        cols.extend((1..=n).map(|i| format!("x_{i}")));
        cols.extend((1..=n).map(|i| format!("v_{i}")));
        cols.push("null_residual".into());
        cols.push("C_residual".into());
        cols.join(",")
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.csv_header();
        out.push('\n');
        for s in &self.samples {
            let mut row = vec![s.s, s.t];
            row.extend(&s.x);
            row.extend(&s.velocity);
            row.push(s.null_residual);
            row.push(s.c_residual);
            out.push_str(&csv_row(&row));
            out.push('\n');
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct IntegrationOptions {
    /// Maximum `t`-extent.
    pub horizon: f64,
    pub max_steps: usize,
    pub rtol: f64,
    pub atol: f64,
    pub initial_step: f64,
    pub min_step: f64,
    pub max_step: f64,
    /// Leaving this chart-Euclidean radius counts as divergence.
    pub escape_radius: f64,
    /// Approaching an excluded point closer than this ends the trace.
    pub exclusion_radius: f64,
    pub project_null: bool,
}

impl Default for IntegrationOptions {
    fn default() -> Self {
        IntegrationOptions {
            horizon: 10.0,
            max_steps: 200_000,
            rtol: 1e-9,
            atol: 1e-11,
            initial_step: 1e-3,
            min_step: 1e-12,
            max_step: f64::INFINITY,
            escape_radius: 1e6,
            exclusion_radius: 1e-3,
            project_null: true,
        }
    }
}

impl IntegrationOptions {
    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Null geodesic flow in Zermelo variables, parametrized by `t`.
///
/// `y = (t, x, p, s)` with `p` the spatial part of the covector `ĝ(u,·)` of the
/// normalized spacetime and `s` its affine parameter. The flow is generated by
/// `H(x,p) = p(W) + |p|_{g_R}`, which equals `-C` of the normalized metric.
struct Rhs<'a> {
    nav: &'a ZermeloData,
    n: usize,
}

struct NavLocal {
    local: LocalZermelo,
    /// `g_R⁻¹ p`
    q: DVector<f64>,
    pn: f64,
}

impl Rhs<'_> {
    fn local(&self, x: &[f64], p: &[f64]) -> Result<NavLocal> {
        let local = self.nav.at(x)?;
        let p = DVector::from_column_slice(p);
        let q = match local.g_r.clone().cholesky() {
            Some(c) => c.solve(&p),
            None => return Err(Error::SingularMetric(x.to_vec())),
        };
        let pn = p.dot(&q).max(0.0).sqrt();
        Ok(NavLocal { local, q, pn })
    }

    fn hamiltonian(&self, x: &[f64], p: &[f64]) -> Result<f64> {
        let l = self.local(x, p)?;
        Ok(l.local.wind.dot(&DVector::from_column_slice(p)) + l.pn)
    }

    fn eval(&self, y: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        let x = &y[1..=n];
        let p = &y[n + 1..=2 * n];
        let l = self.local(x, p)?;
        if !(l.pn > 0.0) {
            return Err(DomainError::NonFinite("vanishing covector").into());
        }
        let mut out = vec![0.0; 2 * n + 2];
        out[0] = 1.0;
        for i in 0..n {
            out[1 + i] = l.local.wind[i] + l.q[i] / l.pn;
        }
        let pv = DVector::from_column_slice(p);
        for k in 0..n {
            let dw = self.nav.wind.partial(x, k)?;
            let dg = self.nav.g_r.partial(x, k)?;
            out[n + 1 + k] = -dw.dot(&pv) + (&dg * &l.q).dot(&l.q) / (2.0 * l.pn);
        }
        out[2 * n + 1] = 1.0 / l.pn;
        Ok(out)
    }

    /// Spacetime velocity `(u^t, u^x)` of the normalized metric.
    fn velocity(&self, y: &[f64]) -> Result<Vec<f64>> {
        let n = self.n;
        let l = self.local(&y[1..=n], &y[n + 1..=2 * n])?;
        let mut u = vec![l.pn];
        u.extend((0..n).map(|i| l.local.wind[i] * l.pn + l.q[i]));
        Ok(u)
    }
}

struct StepResult {
    y: Vec<f64>,
    err: f64,
}

fn rk_step(rhs: &Rhs, y: &[f64], h: f64, k0: &[f64], opts: &IntegrationOptions) -> Result<StepResult> {
    let dim = y.len();
    let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
    k.push(k0.to_vec());
    let mut tmp = vec![0.0; dim];
    for stage in 1..7 {
        for i in 0..dim {
            let mut acc = y[i];
            for j in 0..stage {
                acc += h * A[stage][j] * k[j][i];
            }
            tmp[i] = acc;
        }
        k.push(rhs.eval(&tmp)?);
    }
    let mut y5 = vec![0.0; dim];
    let mut err: f64 = 0.0;
    let n = rhs.n;
    // Error is controlled on x and on the direction of p.
    let pscale = y[n + 1..=2 * n].iter().map(|v| v.abs()).fold(0.0, f64::max);
    for i in 0..dim {
        let mut s5 = 0.0;
        let mut s4 = 0.0;
        for j in 0..7 {
            s5 += B5[j] * k[j][i];
            s4 += B4[j] * k[j][i];
        }
        y5[i] = y[i] + h * s5;
        if i == 0 || i == dim - 1 {
            continue;
        }
        let e = h * (s5 - s4);
        let mag = if i > n { pscale } else { y[i].abs().max(y5[i].abs()) };
        let scale = opts.atol + opts.rtol * mag;
        err = err.max((e / scale).abs());
    }
    if !y5.iter().all(|v| v.is_finite()) {
        return Err(DomainError::NonFinite("geodesic state").into());
    }
    Ok(StepResult { y: y5, err })
}

fn spacetime_c(l: &LocalSstk, u: &[f64]) -> f64 {
    -l.lapse * u[0] + l.shift.dot(&DVector::from_column_slice(&u[1..]))
}

fn null_value(g: &DMatrix<f64>, u: &[f64]) -> f64 {
    let u = DVector::from_column_slice(u);
    (g * &u).dot(&u)
}

/// Euclidean distance from `e` to the chord `a → b`, honouring periods.
fn chord_distance(chart: &ChartManifold, a: &[f64], b: &[f64], e: &[f64]) -> f64 {
    let ab = chart.delta(a, b);
    let ae = chart.delta(a, e);
    let len2: f64 = ab.iter().map(|x| x * x).sum();
    let t = if len2 > 0.0 {
        (ab.iter().zip(&ae).map(|(x, y)| x * y).sum::<f64>() / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    ab.iter()
        .zip(&ae)
        .map(|(x, y)| (y - t * x).powi(2))
        .sum::<f64>()
        .sqrt()
}

fn escape_norm(chart: &ChartManifold, x: &[f64]) -> f64 {
    x.iter()
        .enumerate()
        .filter(|(k, _)| chart.periods()[*k].is_none())
        .map(|(_, v)| v * v)
        .sum::<f64>()
        .sqrt()
}

/// Stop event: integration ends when `event(t, x)` first becomes `<= 0`.
pub type StopEvent<'a> = &'a (dyn Fn(f64, &[f64]) -> f64 + Sync);

/// Integrates the lightlike geodesic from `(0, p0)` with velocity `u0 = (u^t, u^x)`.
pub fn integrate_lightlike(
    g: &SstkMetric,
    p0: &Point,
    u0: &[f64],
    opts: &IntegrationOptions,
) -> Result<GeodesicTrace> {
    integrate_until(g, p0, u0, opts, None)
}

pub fn integrate_until(
    g: &SstkMetric,
    p0: &Point,
    u0: &[f64],
    opts: &IntegrationOptions,
    event: Option<StopEvent>,
) -> Result<GeodesicTrace> {
    let n = g.space_dim();
    if u0.len() != n + 1 || p0.dim() != n {
        return Err(Error::InvalidArgument("velocity/point dimension mismatch".into()));
    }
    let chart = g.chart.clone();
    let x0 = p0.as_slice();
    let l0 = g.local(x0)?;
    let u0_norm = u0.iter().map(|x| x * x).sum::<f64>().sqrt();
    if !(u0[0] > 0.0) {
        return Err(Error::InvalidArgument("initial velocity is not future-directed".into()));
    }
    let scale = u0_norm * u0_norm;
    let n0 = null_value(&assemble(&l0), u0);
    if n0.abs() > 1e-10 * scale * (1.0 + l0.lapse.abs()) {
        return Err(Error::InvalidArgument(format!(
            "initial velocity is not lightlike (g(u,u) = {n0:e})"
        )));
    }
    let c_rho = spacetime_c(&l0, u0);
    let branch = class_of_c(c_rho, c_tolerance(u0_norm));
    let conformal = if g.source.normalized { 1.0 } else { l0.conformal_factor()? };
    let rhs = Rhs { nav: &g.nav, n };

    // Covector of the normalized metric: p = u^t g_R(v/u^t - W).
    let z0 = g.nav.at(x0)?;
    let rel = DVector::from_iterator(n, (0..n).map(|i| u0[1 + i] - u0[0] * z0.wind[i]));
    let p_init = &z0.g_r * rel;
    let mut y: Vec<f64> = std::iter::once(0.0)
        .chain(x0.iter().copied())
        .chain(p_init.iter().copied())
        .chain(std::iter::once(0.0))
        .collect();
    let h0 = rhs.hamiltonian(x0, p_init.as_slice())?;
    let c_of = |h: f64| -conformal * h;
    let project = branch != GeodesicClass::Boundary && opts.project_null;

    let mut h = opts.initial_step;
    let mut samples = vec![TraceSample {
        s: 0.0,
        t: 0.0,
        x: x0.to_vec(),
        velocity: u0[1..].iter().map(|v| v / u0[0]).collect(),
        null_residual: n0 / scale,
        c_residual: c_of(h0) - c_rho,
    }];
    let mut null_drift = (n0 / scale).abs();
    let mut c_drift: f64 = (c_of(h0) - c_rho).abs();
    let mut termination = Termination::StepLimit;
    let mut k0 = rhs.eval(&y)?;
    let t_end = opts.horizon;
    let mut accepted = 0usize;
    let pos = 1..=n;

    let time_event = |yy: &[f64]| t_end - yy[0];
    let user_event = |yy: &[f64]| match event {
        Some(e) => e(yy[0], &yy[1..=n]),
        None => 1.0,
    };

    loop {
        if accepted >= opts.max_steps {
            break;
        }
        h = h.min(opts.max_step);
        let (mut y1, err) = match rk_step(&rhs, &y, h, &k0, opts) {
            Ok(r) => (r.y, r.err),
            Err(e) => {
                if !e.is_domain() {
                    return Err(e);
                }
                h *= 0.25;
                if h < opts.min_step {
                    termination = match e {
                        Error::Domain(DomainError::OutOfBounds { .. }) => Termination::DomainExit,
                        _ => Termination::StepUnderflow,
                    };
                    break;
                }
                continue;
            }
        };
        if err > 1.0 {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.5);
            if h < opts.min_step {
                termination = Termination::StepUnderflow;
                break;
            }
            continue;
        }
        // Events on the accepted step: keep the earliest crossing.
        let mut frac_end: Option<(f64, Termination)> = None;
        if time_event(&y1) <= 0.0 {
            frac_end = Some((1.0, Termination::HorizonReached));
        }
        if user_event(&y1) <= 0.0 {
            frac_end = Some((1.0, Termination::EventReached));
        }
        let excluded_hit = chart
            .excluded()
            .iter()
            .any(|e| chord_distance(&chart, &y[pos.clone()], &y1[pos.clone()], e) < opts.exclusion_radius);
        if let Some((_, kind)) = frac_end {
            let f: &dyn Fn(&[f64]) -> f64 = match kind {
                Termination::HorizonReached => &time_event,
                _ => &user_event,
            };
            let (theta, yy) = locate(&rhs, &y, h, &k0, opts, f)?;
            let (theta, yy, kind) = if kind == Termination::HorizonReached && user_event(&yy) <= 0.0 {
                let (t2, y2) = locate(&rhs, &y, h, &k0, opts, &user_event)?;
                (t2, y2, Termination::EventReached)
            } else if kind == Termination::EventReached && time_event(&yy) < 0.0 {
                let (t2, y2) = locate(&rhs, &y, h, &k0, opts, &time_event)?;
                (t2, y2, Termination::HorizonReached)
            } else {
                (theta, yy, kind)
            };
            y1 = yy;
            h *= theta;
            frac_end = Some((theta, kind));
        }
        if excluded_hit {
            let near = |yy: &[f64]| {
                chart
                    .excluded()
                    .iter()
                    .map(|e| chart.chart_distance(&yy[1..=n], e))
                    .fold(f64::INFINITY, f64::min)
                    - opts.exclusion_radius
            };
            if near(&y1) > 0.0 {
                // Passed by inside one step: bisect for the first close approach.
                let mut lo = 0.0;
                let mut hi = 1.0;
                let mut best: Option<Vec<f64>> = None;
                for _ in 0..40 {
                    let mid = 0.5 * (lo + hi);
                    let r = rk_step(&rhs, &y, h * mid, &k0, opts)?;
                    if near(&r.y) <= 0.0 {
                        hi = mid;
                        best = Some(r.y);
                    } else {
                        let chord = chart
                            .excluded()
                            .iter()
                            .any(|e| chord_distance(&chart, &y[1..=n], &r.y[1..=n], e) < opts.exclusion_radius);
                        if chord {
                            hi = mid;
                        } else {
                            lo = mid;
                        }
                    }
                }
                if let Some(b) = best {
                    y1 = b;
                    h *= hi;
                    frac_end = Some((hi, Termination::ExcludedPointApproach));
                }
            } else {
                let (theta, yy) = locate(&rhs, &y, h, &k0, opts, &near)?;
                y1 = yy;
                h *= theta;
                frac_end = Some((theta, Termination::ExcludedPointApproach));
            }
        }

        // Accept.
        let x1: Vec<f64> = chart.wrap_coords(&y1[1..=n]);
        y1[1..=n].copy_from_slice(&x1);
        let h1 = match rhs.hamiltonian(&x1, &y1[n + 1..=2 * n]) {
            Ok(v) => v,
            Err(_) => {
                termination = Termination::DomainExit;
                break;
            }
        };
        let pn = rhs.local(&x1, &y1[n + 1..=2 * n]).map(|l| l.pn).unwrap_or(1.0);
        let nv = (h1 - h0) / pn.max(f64::MIN_POSITIVE);
        null_drift = null_drift.max(nv.abs());
        if project && h1 != 0.0 && ((h1 - h0) / h0).abs() < 1e-3 {
            let r = h0 / h1;
            for c in &mut y1[n + 1..=2 * n] {
                *c *= r;
            }
        }
        let c_now = c_of(rhs.hamiltonian(&x1, &y1[n + 1..=2 * n]).unwrap_or(h1));
        c_drift = c_drift.max((c_now - c_rho).abs());
        let vel = match rhs.eval(&y1) {
            Ok(k) => k,
            Err(_) => {
                termination = Termination::DomainExit;
                break;
            }
        };
        samples.push(TraceSample {
            s: y1[2 * n + 1],
            t: y1[0],
            x: x1.clone(),
            velocity: vel[1..=n].to_vec(),
            null_residual: nv,
            c_residual: c_now - c_rho,
        });
        y = y1;
        k0 = vel;
        accepted += 1;
        if let Some((_, kind)) = frac_end {
            termination = kind;
            break;
        }
        if escape_norm(&chart, &x1) > opts.escape_radius {
            termination = Termination::DomainExit;
            break;
        }
        let factor = if err > 0.0 { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) } else { 5.0 };
        h *= factor;
    }
    let mut end_state = vec![y[0]];
    end_state.extend_from_slice(&y[1..=n]);
    end_state.extend(rhs.velocity(&y).unwrap_or_else(|_| vec![f64::NAN; n + 1]));
    let mut trace = GeodesicTrace {
        samples,
        c_rho,
        null_drift,
        c_drift,
        classification: GeodesicClass::FGeodesic,
        termination,
        u0_norm,
        end_state,
    };
    trace.classification = classify_geodesic(&trace, c_tolerance(u0_norm));
    Ok(trace)
}

/// Finds `θ ∈ (0,1]` with `f(step(θh)) ≈ 0`, given `f(y) > 0` and `f(step(h)) <= 0`.
fn locate(
    rhs: &Rhs,
    y: &[f64],
    h: f64,
    k0: &[f64],
    opts: &IntegrationOptions,
    f: &dyn Fn(&[f64]) -> f64,
) -> Result<(f64, Vec<f64>)> {
    let f0 = f(y);
    if f0 <= 0.0 {
        return Ok((0.0, y.to_vec()));
    }
    let full = rk_step(rhs, y, h, k0, opts)?.y;
    let f1 = f(&full);
    let (mut a, mut fa) = (0.0, f0);
    let (mut b, mut fb) = (1.0, f1);
    let mut yb = full;
    let mut side = 0i32;
    for _ in 0..60 {
        let mut c = (a * fb - b * fa) / (fb - fa);
        if !(c > a && c < b) {
            c = 0.5 * (a + b);
        }
        let yc = rk_step(rhs, y, h * c, k0, opts)?.y;
        let fc = f(&yc);
        if fc <= 0.0 {
            b = c;
            fb = fc;
            yb = yc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if (b - a) < 1e-14 || fb.abs() < 1e-14 * (1.0 + f0.abs()) {
            break;
        }
    }
    Ok((b, yb))
}

/// Tolerance on `C` used to separate the classes.
pub fn c_tolerance(u0_norm: f64) -> f64 {
    1e-8 * u0_norm
}

fn class_of_c(c: f64, tol: f64) -> GeodesicClass {
    if c < -tol {
        GeodesicClass::FGeodesic
    } else if c > tol {
        GeodesicClass::FlGeodesic
    } else {
        GeodesicClass::Boundary
    }
}

pub fn classify_geodesic(trace: &GeodesicTrace, tol: f64) -> GeodesicClass {
    let c = trace.c_rho;
    if c < -tol {
        GeodesicClass::FGeodesic
    } else if c > tol {
        GeodesicClass::FlGeodesic
    } else {
        let x0 = &trace.samples[0].x;
        let moved = trace.samples.iter().any(|s| {
            s.x.iter().zip(x0).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt() > tol
        });
        if moved {
            GeodesicClass::Boundary
        } else {
            GeodesicClass::Exceptional
        }
    }
}

/// The lift `(F̄(v), v)` of a vector in `A ∪ A_E`; `∂_t` for a critical zero vector.
pub fn lift(s: &SstkData, v: &TangentVector) -> Result<Vec<f64>> {
    let l = s.at(v.base.as_slice())?;
    let tau = l.conic_f(&v.components, DEFAULT_REGIME_TOL)?;
    Ok(std::iter::once(tau).chain(v.components.iter().copied()).collect())
}

#[derive(Debug, Clone)]
pub struct ExpResult {
    pub endpoint: Option<Point>,
    pub trace: GeodesicTrace,
}

/// `exp^F̄_p(v)`: the projected geodesic at `t = F̄(v)`.
pub fn exp_f(z: &ZermeloData, v: &TangentVector, opts: &IntegrationOptions) -> Result<ExpResult> {
    let g = SstkMetric::from_zermelo(z);
    let u0 = lift(&g.source, v)?;
    let opts = IntegrationOptions {
        horizon: u0[0],
        ..opts.clone()
    };
    let trace = integrate_lightlike(&g, &v.base, &u0, &opts)?;
    let endpoint = (trace.termination == Termination::HorizonReached)
        .then(|| Point::new(trace.last().x.clone()));
    Ok(ExpResult { endpoint, trace })
}

/// Integrates the Σ-geodesic with initial direction `v`, scaled to unit `F̄`.
pub fn integrate_direction(
    z: &ZermeloData,
    v: &TangentVector,
    opts: &IntegrationOptions,
    event: Option<StopEvent>,
) -> Result<GeodesicTrace> {
    let g = SstkMetric::from_zermelo(z);
    let mut u0 = lift(&g.source, v)?;
    let tau = u0[0];
    for c in u0.iter_mut() {
        *c /= tau;
    }
    integrate_until(&g, &v.base, &u0, opts, event)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ProbeOutcome {
    CompleteToHorizon,
    Incomplete { length: f64 },
    Inconclusive(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Seed {
    pub point: Vec<f64>,
    pub direction: Vec<f64>,
    pub backward: bool,
}

impl Seed {
    pub fn forward(point: Vec<f64>, direction: Vec<f64>) -> Self {
        Seed { point, direction, backward: false }
    }

    pub fn backward(point: Vec<f64>, direction: Vec<f64>) -> Self {
        Seed { point, direction, backward: true }
    }
}

/// Probes one seed; backward seeds run on the reversed structure.
pub fn probe_seed(z: &ZermeloData, seed: &Seed, horizon: f64, opts: &IntegrationOptions) -> ProbeOutcome {
    let zz = if seed.backward { z.reversed() } else { z.clone() };
    let v = match zz.tangent(&seed.point, &seed.direction) {
        Ok(v) => v,
        Err(e) => return ProbeOutcome::Inconclusive(format!("seed: {e}")),
    };
    let sstk = zermelo_to_sstk(&zz);
    match sstk.at(v.base.as_slice()).map(|l| l.classify(&v.components, DEFAULT_REGIME_TOL)) {
        Ok(DomainClass::Outside) => {
            return ProbeOutcome::Inconclusive("direction outside A∪A_E".into())
        }
        Err(e) => return ProbeOutcome::Inconclusive(e.to_string()),
        _ => {}
    }
    let opts = IntegrationOptions { horizon, ..opts.clone() };
    let trace = match integrate_direction(&zz, &v, &opts, None) {
        Ok(t) => t,
        Err(e) => return ProbeOutcome::Inconclusive(e.to_string()),
    };
    let length = trace.conic_length(&sstk);
    let end = &trace.last().x;
    let chart = &zz.chart;
    let near_excluded = chart
        .distance_to_excluded(end)
        .is_some_and(|d| d < 10.0 * opts.exclusion_radius);
    let diverging = escape_norm(chart, end) > 0.1 * opts.escape_radius
        || chart.distance_to_boundary(end) < 1e-6;
    match trace.termination {
        Termination::HorizonReached => ProbeOutcome::CompleteToHorizon,
        Termination::DomainExit | Termination::ExcludedPointApproach if length < horizon => {
            ProbeOutcome::Incomplete { length }
        }
        Termination::StepUnderflow if length < horizon && (diverging || near_excluded) => {
            ProbeOutcome::Incomplete { length }
        }
        other => ProbeOutcome::Inconclusive(format!("trace ended with {other:?} at length {length}")),
    }
}

pub fn probe_completeness(
    z: &ZermeloData,
    seeds: &[Seed],
    horizon: f64,
    opts: &IntegrationOptions,
) -> Vec<ProbeOutcome> {
    seeds.par_iter().map(|s| probe_seed(z, s, horizon, opts)).collect()
}
