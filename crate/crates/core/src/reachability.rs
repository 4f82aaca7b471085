//! Wind balls, c-balls and the F̄-separation on a coordinate grid.
//!
//! Balls come from a time-stepped sweep: a cell joins the next front when a
//! straight step of duration `dt` from a current cell stays inside the
//! (slightly inflated) displaced unit ball. The separation is a shortest path
//! over straight lattice edges weighted by their conic length.
//!
//! Zermelo data are cached on the half-spacing lattice so that edge starts,
//! midpoints and ends are lookups.

use crate::error::{DomainError, Error, Result};
use crate::geodesic::{probe_completeness, IntegrationOptions, ProbeOutcome, Seed};
use crate::manifold::{ChartManifold, Point};
use crate::output::{csv_num, json_num_text};
use crate::wind::{ZermeloData, DEFAULT_REGIME_TOL};
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::Arc;

#[derive(Debug, Clone)]
pub struct Grid {
    pub chart: Arc<ChartManifold>,
    lo: Vec<f64>,
    spacing: Vec<f64>,
    counts: Vec<usize>,
    periodic: Vec<bool>,
}

impl Grid {
    /// Grid with nodes `lo + k·h` up to `hi`. Periodic axes always cover one
    /// full period, with the spacing adjusted to divide it.
    pub fn new(chart: Arc<ChartManifold>, lo: &[f64], hi: &[f64], spacing: &[f64]) -> Result<Self> {
        let n = chart.dim();
        if lo.len() != n || hi.len() != n || spacing.len() != n {
            return Err(DomainError::Dimension { expected: n, got: lo.len().min(hi.len()).min(spacing.len()) }.into());
        }
        let mut glo = Vec::with_capacity(n);
        let mut gh = Vec::with_capacity(n);
        let mut counts = Vec::with_capacity(n);
        let mut periodic = Vec::with_capacity(n);
        for k in 0..n {
            let h = spacing[k];
            if !(h > 0.0 && h.is_finite()) {
                return Err(Error::InvalidArgument(format!("grid spacing on axis {k} must be positive")));
            }
            match chart.periods()[k] {
                Some(p) => {
                    let m = (p / h).round().max(1.0) as usize;
                    glo.push(chart.fundamental_lo(k));
                    gh.push(p / m as f64);
                    counts.push(m);
                    periodic.push(true);
                }
                None => {
                    if !(lo[k].is_finite() && hi[k].is_finite() && hi[k] > lo[k]) {
                        return Err(Error::InvalidArgument(format!("empty grid extent on axis {k}")));
                    }
                    let m = ((hi[k] - lo[k]) / h + 1e-9).floor() as usize + 1;
                    glo.push(lo[k]);
                    gh.push(h);
                    counts.push(m);
                    periodic.push(false);
                }
            }
        }
        if counts.iter().product::<usize>() > 50_000_000 {
            return Err(Error::InvalidArgument("grid too large".into()));
        }
        Ok(Grid { chart, lo: glo, spacing: gh, counts, periodic })
    }

    /// Parses `lo:hi:h` per axis, comma separated.
    pub fn parse(chart: Arc<ChartManifold>, spec: &str) -> Result<Self> {
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        let mut h = Vec::new();
        for part in spec.split(',') {
            let f: Vec<f64> = part
                .split(':')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::InvalidArgument(format!("bad grid axis '{part}'")))?;
            if f.len() != 3 {
                return Err(Error::InvalidArgument(format!("grid axis '{part}' is not lo:hi:h")));
            }
            lo.push(f[0]);
            hi.push(f[1]);
            h.push(f[2]);
        }
        Grid::new(chart, &lo, &hi, &h)
    }

    pub fn dim(&self) -> usize {
        self.counts.len()
    }

    pub fn len(&self) -> usize {
        self.counts.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn max_spacing(&self) -> f64 {
        self.spacing.iter().copied().fold(0.0, f64::max)
    }

    /// Flat index of a multi-index; periodic axes wrap.
    pub fn index(&self, m: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for k in 0..self.dim() {
            let c = self.counts[k] as i64;
            let mut v = m[k];
            if self.periodic[k] {
                v = v.rem_euclid(c);
            } else if v < 0 || v >= c {
                return None;
            }
            idx = idx * self.counts[k] + v as usize;
        }
        Some(idx)
    }

    pub fn multi(&self, mut idx: usize) -> Vec<i64> {
        let mut m = vec![0i64; self.dim()];
        for k in (0..self.dim()).rev() {
            m[k] = (idx % self.counts[k]) as i64;
            idx /= self.counts[k];
        }
        m
    }

    pub fn coords(&self, idx: usize) -> Vec<f64> {
        self.multi(idx)
            .iter()
            .enumerate()
            .map(|(k, &i)| self.lo[k] + i as f64 * self.spacing[k])
            .collect()
    }

    /// Nearest node to `p`.
    pub fn snap(&self, p: &[f64]) -> Result<usize> {
        let x = self.chart.wrap_coords(p);
        let mut m = Vec::with_capacity(self.dim());
        for k in 0..self.dim() {
            let f = ((x[k] - self.lo[k]) / self.spacing[k]).round();
            if !self.periodic[k] && (f < 0.0 || f >= self.counts[k] as f64) {
                return Err(DomainError::OutOfBounds {
                    axis: k,
                    value: x[k],
                    lo: self.lo[k],
                    hi: self.lo[k] + (self.counts[k] - 1) as f64 * self.spacing[k],
                }
                .into());
            }
            m.push(f as i64);
        }
        Ok(self.index(&m).expect("snapped index in range"))
    }

    /// True on the outer layer of a non-periodic axis.
    pub fn on_boundary(&self, idx: usize) -> bool {
        let m = self.multi(idx);
        (0..self.dim()).any(|k| !self.periodic[k] && (m[k] == 0 || m[k] == self.counts[k] as i64 - 1))
    }

    fn half_counts(&self) -> Vec<usize> {
        (0..self.dim())
            .map(|k| if self.periodic[k] { 2 * self.counts[k] } else { 2 * self.counts[k] - 1 })
            .collect()
    }

    fn half_index(&self, d: &[i64]) -> Option<usize> {
        let hc = self.half_counts();
        let mut idx = 0usize;
        for k in 0..self.dim() {
            let c = hc[k] as i64;
            let mut v = d[k];
            if self.periodic[k] {
                v = v.rem_euclid(c);
            } else if v < 0 || v >= c {
                return None;
            }
            idx = idx * hc[k] + v as usize;
        }
        Some(idx)
    }
}

/// `(g_R, W)` on the half-spacing lattice; `None` where the data are undefined.
struct HalfCache {
    nodes: Vec<Option<(DMatrix<f64>, DVector<f64>)>>,
}

impl HalfCache {
    fn build(z: &ZermeloData, grid: &Grid) -> Self {
        let hc = grid.half_counts();
        let total: usize = hc.iter().product();
        let chart = &grid.chart;
        let nodes = (0..total)
            .into_par_iter()
            .map(|mut i| {
                let mut x = vec![0.0; hc.len()];
                for k in (0..hc.len()).rev() {
                    let d = (i % hc[k]) as f64;
                    i /= hc[k];
                    x[k] = grid.lo[k] + 0.5 * d * grid.spacing[k];
                }
                let x = chart.wrap_coords(&x);
                if chart.check_bounds(&x).is_err() {
                    return None;
                }
                if chart.distance_to_excluded(&x).is_some_and(|d| d <= 1e-9) {
                    return None;
                }
                let l = z.at(&x).ok()?;
                l.g_r.iter().chain(l.wind.iter()).all(|v| v.is_finite()).then_some((l.g_r, l.wind))
            })
            .collect();
        HalfCache { nodes }
    }

    fn get(&self, grid: &Grid, d: &[i64]) -> Option<&(DMatrix<f64>, DVector<f64>)> {
        self.nodes[grid.half_index(d)?].as_ref()
    }
}

/// Time needed to traverse `u` in a straight line, i.e. the conic length
/// `F̄(u)`; `None` when `u` is not admissible. `slack` widens the cone of
/// strong-wind points relative to `b²`.
pub fn edge_time(g: &DMatrix<f64>, w: &DVector<f64>, u: &DVector<f64>, slack: f64) -> Option<f64> {
    let gu = g * u;
    let c = gu.dot(u);
    if !(c > 0.0) {
        return None;
    }
    let b = gu.dot(w);
    let mut a = (g * w).dot(w) - 1.0;
    if a.abs() <= DEFAULT_REGIME_TOL {
        a = 0.0;
    }
    if a < 0.0 {
        let disc = b * b - a * c;
        return Some(c / (b + disc.sqrt()));
    }
    if b <= 0.0 {
        return None;
    }
    if a == 0.0 {
        return Some(c / (2.0 * b));
    }
    let disc = b * b - a * c;
    if disc < -slack * b * b {
        return None;
    }
    Some(c / (b + disc.max(0.0).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepDirection {
    /// `B̂⁺`: reachable from the center.
    Forward,
    /// `B̂⁻`: can reach the center; swept with the reversed wind.
    Backward,
}

#[derive(Debug, Clone)]
pub struct FrontSet {
    pub time_level: f64,
    pub members: Vec<bool>,
    /// Cell of the previous level each member was reached from.
    pub predecessor: Vec<Option<usize>>,
}

impl FrontSet {
    pub fn cells(&self) -> Vec<usize> {
        self.members.iter().enumerate().filter(|(_, m)| **m).map(|(i, _)| i).collect()
    }

    pub fn count(&self) -> usize {
        self.members.iter().filter(|m| **m).count()
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.members[idx]
    }

    /// Rows `(level, i_1..i_n, reached)` for every cell.
    pub fn to_csv(&self, grid: &Grid) -> String {
        let mut out = String::from("level");
        for k in 1..=grid.dim() {
            out.push_str(&format!(",i_{k}"));
        }
        out.push_str(",reached\n");
        let level = csv_num(self.time_level);
        for (idx, m) in self.members.iter().enumerate() {
            out.push_str(&level);
            for i in grid.multi(idx) {
                out.push_str(&format!(",{i}"));
            }
            out.push_str(if *m { ",1\n" } else { ",0\n" });
        }
        out
    }
}

/// Relative inflation of the unit ball per sweep step: at most half a cell
/// of accumulated overshoot over the whole radius.
pub fn sweep_slack(grid: &Grid, r: f64) -> f64 {
    0.5 * grid.max_spacing() / r
}

pub fn reachable_sweep(z: &ZermeloData, p0: &Point, r: f64, dt: f64, grid: &Grid) -> Result<Vec<FrontSet>> {
    reachable_sweep_dir(z, p0, r, dt, grid, SweepDirection::Forward)
}

pub fn reachable_sweep_dir(
    z: &ZermeloData,
    p0: &Point,
    r: f64,
    dt: f64,
    grid: &Grid,
    direction: SweepDirection,
) -> Result<Vec<FrontSet>> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument("radius must be positive".into()));
    }
    if !(dt > 0.0) || dt >= r {
        return Err(Error::InvalidArgument("time step must lie in (0, r)".into()));
    }
    let steps = (r / dt).round();
    if (steps * dt - r).abs() > 1e-9 * r {
        return Err(Error::InvalidArgument("time step must divide the radius".into()));
    }
    let steps = steps as usize;
    let zz = match direction {
        SweepDirection::Forward => z.clone(),
        SweepDirection::Backward => z.reversed(),
    };
    let start = grid.snap(p0.as_slice())?;
    let cache = HalfCache::build(&zz, grid);
    let m0 = grid.multi(start);
    let d0: Vec<i64> = m0.iter().map(|v| 2 * v).collect();
    if cache.get(grid, &d0).is_none() {
        return Err(DomainError::ExcludedPoint(grid.coords(start)).into());
    }
    let eta = sweep_slack(grid, r);
    let radius2 = (1.0 + eta).powi(2) * (1.0 + 1e-12);
    let n = grid.dim();
    let h = grid.spacing().to_vec();

    let mut members = vec![false; grid.len()];
    members[start] = true;
    let mut fronts = vec![FrontSet {
        time_level: 0.0,
        members,
        predecessor: vec![None; grid.len()],
    }];
    for level in 1..=steps {
        let prev = fronts.last().expect("front");
        let sources = prev.cells();
        let hits: Vec<Vec<(usize, usize)>> = sources
            .par_iter()
            .map(|&src| {
                let m = grid.multi(src);
                let d: Vec<i64> = m.iter().map(|v| 2 * v).collect();
                let Some((g, w)) = cache.get(grid, &d) else { return Vec::new() };
                let ginv = match g.clone().try_inverse() {
                    Some(i) => i,
                    None => return Vec::new(),
                };
                // Axis extent of the displaced ball dt·(W + B(1+η)).
                let ranges: Vec<(i64, i64)> = (0..n)
                    .map(|k| {
                        let ext = (1.0 + eta) * ginv[(k, k)].max(0.0).sqrt();
                        let lo = ((dt * (w[k] - ext)) / h[k]).floor() as i64 - 1;
                        let hi = ((dt * (w[k] + ext)) / h[k]).ceil() as i64 + 1;
                        (lo, hi)
                    })
                    .collect();
                let mut out = Vec::new();
                let mut off: Vec<i64> = ranges.iter().map(|r| r.0).collect();
                loop {
                    let target: Vec<i64> = (0..n).map(|k| m[k] + off[k]).collect();
                    if let Some(tidx) = grid.index(&target) {
                        let u = DVector::from_iterator(n, (0..n).map(|k| off[k] as f64 * h[k]));
                        let ok = [1i64, 2].iter().all(|&s| {
                            let p: Vec<i64> = (0..n).map(|k| d[k] + s * off[k]).collect();
                            cache.get(grid, &p).is_some()
                        }) && [0i64, 1, 2].iter().all(|&s| {
                            let p: Vec<i64> = (0..n).map(|k| d[k] + s * off[k]).collect();
                            let (g, w) = cache.get(grid, &p).expect("checked");
                            let q = &u / dt - w;
                            (g * &q).dot(&q) <= radius2
                        });
                        if ok {
                            out.push((tidx, src));
                        }
                    }
                    // Odometer over the window.
                    let mut k = 0;
                    loop {
                        if k == n {
                            return out;
                        }
                        off[k] += 1;
                        if off[k] <= ranges[k].1 {
                            break;
                        }
                        off[k] = ranges[k].0;
                        k += 1;
                    }
                }
            })
            .collect();
        let mut members = vec![false; grid.len()];
        let mut predecessor: Vec<Option<usize>> = vec![None; grid.len()];
        for list in hits {
            for (t, s) in list {
                members[t] = true;
                // Lowest source index wins.
                if predecessor[t].is_none_or(|p| s < p) {
                    predecessor[t] = Some(s);
                }
            }
        }
        fronts.push(FrontSet {
            time_level: level as f64 * dt,
            members,
            predecessor,
        });
    }
    Ok(fronts)
}

/// Chain of cells from the sweep start to `idx` at `level`.
pub fn front_path(fronts: &[FrontSet], level: usize, idx: usize) -> Option<Vec<usize>> {
    if !fronts.get(level)?.contains(idx) {
        return None;
    }
    let mut path = vec![idx];
    let mut cur = idx;
    for l in (1..=level).rev() {
        cur = fronts[l].predecessor[cur]?;
        path.push(cur);
    }
    path.reverse();
    Some(path)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeparationStatus {
    Reached,
    Unreachable,
    Truncated,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeparationResult {
    pub value: f64,
    pub path: Option<Vec<usize>>,
    pub status: SeparationStatus,
}

impl SeparationResult {
    pub fn to_json(&self, grid: &Grid) -> serde_json::Value {
        let value = if self.status == SeparationStatus::Reached {
            serde_json::Value::from(self.value)
        } else {
            serde_json::Value::Null
        };
        let path = self.path.as_ref().map(|p| {
            p.iter()
                .map(|&i| serde_json::Value::from(grid.multi(i)))
                .collect::<Vec<_>>()
        });
        serde_json::json!({
            "value": value,
            "status": self.status,
            "path": path,
        })
    }

    pub fn value_text(&self) -> String {
        json_num_text(self.value)
    }
}

#[derive(Debug, Clone)]
pub struct SeparationOptions {
    /// Max-norm radius of the edge stencil; only primitive offsets are used.
    pub stencil_radius: usize,
    /// Relative widening of strong-wind cones, see [`edge_time`].
    pub slack: f64,
    /// Stop the search beyond this value and report `Truncated`.
    pub value_cap: Option<f64>,
}

impl Default for SeparationOptions {
    fn default() -> Self {
        SeparationOptions {
            stencil_radius: 2,
            slack: 1e-2,
            value_cap: None,
        }
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Primitive integer offsets with max-norm at most `radius`.
pub fn stencil(dim: usize, radius: usize) -> Vec<Vec<i64>> {
    let r = radius as i64;
    let mut out = Vec::new();
    let mut off = vec![-r; dim];
    loop {
        let g = off.iter().fold(0, |acc, &v| gcd(acc, v));
        if g == 1 {
            out.push(off.clone());
        }
        let mut k = 0;
        loop {
            if k == dim {
                return out;
            }
            off[k] += 1;
            if off[k] <= r {
                break;
            }
            off[k] = -r;
            k += 1;
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
struct Entry {
    value: f64,
    idx: usize,
}

impl Eq for Entry {}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .value
            .total_cmp(&self.value)
            .then_with(|| other.idx.cmp(&self.idx))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Edges admissible at start, midpoint and end, weighted by `F̄` at the
/// midpoint.
fn edge_weight(cache: &HalfCache, grid: &Grid, d: &[i64], off: &[i64], u: &DVector<f64>, slack: f64) -> Option<f64> {
    let n = grid.dim();
    let mut mid = None;
    for s in 0..3i64 {
        let p: Vec<i64> = (0..n).map(|k| d[k] + s * off[k]).collect();
        let (g, w) = cache.get(grid, &p)?;
        let t = edge_time(g, w, u, slack)?;
        if s == 1 {
            mid = Some(t);
        }
    }
    mid
}

pub fn separation(z: &ZermeloData, p: &Point, q: &Point, grid: &Grid) -> Result<SeparationResult> {
    separation_with(z, p, q, grid, &SeparationOptions::default())
}

pub fn separation_with(
    z: &ZermeloData,
    p: &Point,
    q: &Point,
    grid: &Grid,
    opts: &SeparationOptions,
) -> Result<SeparationResult> {
    let cache = HalfCache::build(z, grid);
    separation_cached(&cache, grid, p, q, opts)
}

fn separation_cached(
    cache: &HalfCache,
    grid: &Grid,
    p: &Point,
    q: &Point,
    opts: &SeparationOptions,
) -> Result<SeparationResult> {
    let src = grid.snap(p.as_slice())?;
    let dst = grid.snap(q.as_slice())?;
    let n = grid.dim();
    for &c in &[src, dst] {
        let d: Vec<i64> = grid.multi(c).iter().map(|v| 2 * v).collect();
        if cache.get(grid, &d).is_none() {
            return Err(DomainError::ExcludedPoint(grid.coords(c)).into());
        }
    }
    if src == dst {
        return Ok(SeparationResult {
            value: 0.0,
            path: Some(vec![src]),
            status: SeparationStatus::Reached,
        });
    }
    let offsets = stencil(n, opts.stencil_radius);
    let h = grid.spacing().to_vec();
    let vectors: Vec<DVector<f64>> = offsets
        .iter()
        .map(|o| DVector::from_iterator(n, (0..n).map(|k| o[k] as f64 * h[k])))
        .collect();
    let mut dist = vec![f64::INFINITY; grid.len()];
    let mut pred: Vec<Option<usize>> = vec![None; grid.len()];
    let mut done = vec![false; grid.len()];
    let mut heap = BinaryHeap::new();
    dist[src] = 0.0;
    heap.push(Entry { value: 0.0, idx: src });
    let mut truncated = false;
    while let Some(Entry { value, idx }) = heap.pop() {
        if done[idx] {
            continue;
        }
        if opts.value_cap.is_some_and(|cap| value > cap) {
            truncated = true;
            break;
        }
        done[idx] = true;
        if idx == dst {
            break;
        }
        let m = grid.multi(idx);
        let d: Vec<i64> = m.iter().map(|v| 2 * v).collect();
        for (off, u) in offsets.iter().zip(&vectors) {
            let t: Vec<i64> = (0..n).map(|k| m[k] + off[k]).collect();
            let Some(tidx) = grid.index(&t) else { continue };
            if done[tidx] {
                continue;
            }
            let Some(wt) = edge_weight(cache, grid, &d, off, u, opts.slack) else { continue };
            let nv = value + wt;
            if nv < dist[tidx] || (nv == dist[tidx] && pred[tidx].is_some_and(|p| idx < p)) {
                dist[tidx] = nv;
                pred[tidx] = Some(idx);
                heap.push(Entry { value: nv, idx: tidx });
            }
        }
    }
    if !done[dst] {
        return Ok(SeparationResult {
            value: f64::INFINITY,
            path: None,
            status: if truncated { SeparationStatus::Truncated } else { SeparationStatus::Unreachable },
        });
    }
    let mut path = vec![dst];
    let mut cur = dst;
    while let Some(pv) = pred[cur] {
        path.push(pv);
        cur = pv;
    }
    path.reverse();
    Ok(SeparationResult {
        value: dist[dst],
        path: Some(path),
        status: SeparationStatus::Reached,
    })
}

/// Separations from `p` to several targets, sharing the data cache.
pub fn separations(
    z: &ZermeloData,
    p: &Point,
    targets: &[Point],
    grid: &Grid,
    opts: &SeparationOptions,
) -> Result<Vec<SeparationResult>> {
    let cache = HalfCache::build(z, grid);
    targets
        .par_iter()
        .map(|q| separation_cached(&cache, grid, p, q, opts))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BallStatus {
    /// Every front stays off the grid edge, the chart edge and excluded points.
    Interior,
    /// A front touches the grid edge where the chart continues.
    GridLimited,
    /// A front comes within two cells of a finite chart bound.
    ReachesChartEdge { cell: Vec<f64>, level: f64 },
    /// A front comes within two cells of an excluded point.
    ReachesExcluded { cell: Vec<f64>, level: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BallCheck {
    pub sample: Vec<f64>,
    pub radius: f64,
    pub direction: SweepDirection,
    pub status: BallStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub point: Vec<f64>,
    pub direction: Vec<f64>,
    pub backward: bool,
    pub length: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CauchyVerdict {
    ConsistentComplete,
    ConsistentIncomplete(Witness),
    Inconsistent(String),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CauchyReport {
    pub verdict: CauchyVerdict,
    pub balls: Vec<BallCheck>,
    pub probes: Vec<(Witness, ProbeOutcome)>,
}

/// Fan of unit chart directions: 16 evenly spaced in the plane, `±e_i` and
/// `±e_i ± e_j` otherwise.
pub fn direction_fan(dim: usize) -> Vec<Vec<f64>> {
    if dim == 2 {
        return (0..16)
            .map(|k| {
                let a = k as f64 * std::f64::consts::PI / 8.0;
                vec![a.cos(), a.sin()]
            })
            .collect();
    }
    let mut out = Vec::new();
    for i in 0..dim {
        for s in [1.0, -1.0] {
            let mut v = vec![0.0; dim];
            v[i] = s;
            out.push(v);
        }
    }
    let r = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..dim {
        for j in i + 1..dim {
            for (a, b) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let mut v = vec![0.0; dim];
                v[i] = a * r;
                v[j] = b * r;
                out.push(v);
            }
        }
    }
    out
}

fn classify_ball(grid: &Grid, fronts: &[FrontSet]) -> BallStatus {
    let chart = &grid.chart;
    let margin = 2.0 * grid.max_spacing();
    let mut grid_limited = false;
    for f in fronts {
        for idx in f.cells() {
            let x = grid.coords(idx);
            if chart.distance_to_excluded(&x).is_some_and(|d| d <= margin) {
                return BallStatus::ReachesExcluded { cell: x, level: f.time_level };
            }
            if chart.distance_to_boundary(&x) <= margin {
                return BallStatus::ReachesChartEdge { cell: x, level: f.time_level };
            }
            if grid.on_boundary(idx) {
                grid_limited = true;
            }
        }
    }
    if grid_limited {
        BallStatus::GridLimited
    } else {
        BallStatus::Interior
    }
}

/// Sweep step used by the diagnostic: about five cells per step.
fn diagnostic_dt(grid: &Grid, radius: f64) -> f64 {
    let steps = (radius / (5.0 * grid.max_spacing())).ceil().max(2.0);
    radius / steps
}

/// Cross-checks ball precompactness against geodesic probes at each sample.
///
/// Probes are a direction fan, forward and backward, to twice the largest
/// radius. An incomplete probe is a witness; a ball reaching an excluded point
/// or the chart edge triggers a targeted probe toward the offending cell.
/// Disagreement is reported only when a ball clearly larger than a witness
/// stays interior, or a targeted probe contradicts a ball.
pub fn cauchy_slice_diagnostic(
    z: &ZermeloData,
    samples: &[Point],
    radii: &[f64],
    grid: &Grid,
    opts: &IntegrationOptions,
) -> Result<CauchyReport> {
    let r_max = radii.iter().copied().fold(0.0, f64::max);
    if !(r_max > 0.0) {
        return Err(Error::InvalidArgument("at least one positive radius is required".into()));
    }
    let mut balls = Vec::new();
    for p in samples {
        for &r in radii {
            for dir in [SweepDirection::Forward, SweepDirection::Backward] {
                let fronts = reachable_sweep_dir(z, p, r, diagnostic_dt(grid, r), grid, dir)?;
                balls.push(BallCheck {
                    sample: p.coords.iter().copied().collect(),
                    radius: r,
                    direction: dir,
                    status: classify_ball(grid, &fronts),
                });
            }
        }
    }

    let horizon = 2.0 * r_max;
    let mut seeds = Vec::new();
    for p in samples {
        let x: Vec<f64> = p.coords.iter().copied().collect();
        for d in direction_fan(grid.dim()) {
            seeds.push(Seed::forward(x.clone(), d.clone()));
            seeds.push(Seed::backward(x.clone(), d));
        }
    }
    let outcomes = probe_completeness(z, &seeds, horizon, opts);
    let mut probes: Vec<(Witness, ProbeOutcome)> = seeds
        .iter()
        .zip(outcomes)
        .map(|(s, o)| (seed_witness(s, &o), o))
        .collect();

    let best_witness = |probes: &[(Witness, ProbeOutcome)]| {
        probes
            .iter()
            .filter(|(_, o)| matches!(o, ProbeOutcome::Incomplete { .. }))
            .map(|(w, _)| w.clone())
            .min_by(|a, b| a.length.total_cmp(&b.length))
    };

    if let Some(w) = best_witness(&probes) {
        let contradicting = balls.iter().find(|b| {
            b.status == BallStatus::Interior
                && b.radius > 1.5 * w.length + 5.0 * grid.max_spacing()
                && b.sample == w.point
                && (b.direction == SweepDirection::Backward) == w.backward
        });
        let verdict = match contradicting {
            Some(b) => CauchyVerdict::Inconsistent(format!(
                "probe from {:?} is incomplete at length {} but the {:?} ball of radius {} stays interior",
                w.point, w.length, b.direction, b.radius
            )),
            None => CauchyVerdict::ConsistentIncomplete(w),
        };
        return Ok(CauchyReport { verdict, balls, probes });
    }

    // No witness from the fan: chase balls that reach an edge.
    let escaping: Vec<(Vec<f64>, Vec<f64>, bool)> = balls
        .iter()
        .filter_map(|b| match &b.status {
            BallStatus::ReachesChartEdge { cell, .. } | BallStatus::ReachesExcluded { cell, .. } => {
                Some((b.sample.clone(), cell.clone(), b.direction == SweepDirection::Backward))
            }
            _ => None,
        })
        .collect();
    if escaping.is_empty() {
        return Ok(CauchyReport {
            verdict: CauchyVerdict::ConsistentComplete,
            balls,
            probes,
        });
    }
    let mut targeted = Vec::new();
    for (x, cell, backward) in &escaping {
        let d = grid.chart.delta(x, cell);
        let norm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let d: Vec<f64> = d.iter().map(|v| v / norm).collect();
        targeted.push(if *backward { Seed::backward(x.clone(), d) } else { Seed::forward(x.clone(), d) });
    }
    let outcomes = probe_completeness(z, &targeted, horizon, opts);
    probes.extend(targeted.iter().zip(outcomes).map(|(s, o)| (seed_witness(s, &o), o)));
    let verdict = match best_witness(&probes) {
        Some(w) => CauchyVerdict::ConsistentIncomplete(w),
        None => CauchyVerdict::Inconsistent(format!(
            "balls reach the chart edge or an excluded point ({} cases) but every probe is complete or inconclusive",
            escaping.len()
        )),
    };
    Ok(CauchyReport { verdict, balls, probes })
}

fn seed_witness(s: &Seed, o: &ProbeOutcome) -> Witness {
    Witness {
        point: s.point.clone(),
        direction: s.direction.clone(),
        backward: s.backward,
        length: match o {
            ProbeOutcome::Incomplete { length } => *length,
            _ => f64::INFINITY,
        },
    }
}
