//! Charts, points, tangent vectors and smooth fields over a single chart.
//!
//! Fields are closures over raw chart coordinates. Derivatives come from a
//! registered analytic evaluator when there is one, otherwise from a second
//! order central difference.

use crate::error::{DomainError, Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Closed coordinate interval; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub const UNBOUNDED: Interval = Interval {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    pub fn new(lo: f64, hi: f64) -> Self {
        Interval { lo, hi }
    }

    pub fn is_unbounded(&self) -> bool {
        self.lo == f64::NEG_INFINITY && self.hi == f64::INFINITY
    }

    fn slack(&self) -> (f64, f64) {
        (1e-12 * (1.0 + self.lo.abs()), 1e-12 * (1.0 + self.hi.abs()))
    }

    pub fn contains(&self, x: f64) -> bool {
        let (sl, sh) = self.slack();
        x >= self.lo - sl && x <= self.hi + sh
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChartManifold {
    dim: usize,
    bounds: Vec<Interval>,
    periods: Vec<Option<f64>>,
    excluded: Vec<Vec<f64>>,
}

impl ChartManifold {
    pub fn new(
        bounds: Vec<Interval>,
        periods: Vec<Option<f64>>,
        excluded: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let dim = bounds.len();
        if dim == 0 {
            return Err(Error::InvalidArgument("chart dimension must be positive".into()));
        }
        if periods.len() != dim {
            return Err(Error::InvalidArgument("periods length differs from dimension".into()));
        }
        for (k, b) in bounds.iter().enumerate() {
            if b.lo.is_nan() || b.hi.is_nan() || b.lo >= b.hi {
                return Err(Error::InvalidArgument(format!("empty bounds on axis {k}")));
            }
        }
        for (k, p) in periods.iter().enumerate() {
            if let Some(p) = p {
                if !(*p > 0.0 && p.is_finite()) {
                    return Err(Error::InvalidArgument(format!("period on axis {k} must be positive")));
                }
            }
        }
        let chart = ChartManifold {
            dim,
            bounds,
            periods,
            excluded: Vec::new(),
        };
        for e in &excluded {
            if e.len() != dim {
                return Err(Error::InvalidArgument("excluded point has wrong dimension".into()));
            }
            chart.check_bounds(e)?;
        }
        Ok(ChartManifold { excluded, ..chart })
    }

    pub fn euclidean(dim: usize) -> Self {
        ChartManifold {
            dim,
            bounds: vec![Interval::UNBOUNDED; dim],
            periods: vec![None; dim],
            excluded: Vec::new(),
        }
    }

    pub fn torus(dim: usize, period: f64) -> Self {
        ChartManifold {
            dim,
            bounds: vec![Interval::new(0.0, period); dim],
            periods: vec![Some(period); dim],
            excluded: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bounds(&self) -> &[Interval] {
        &self.bounds
    }

    pub fn periods(&self) -> &[Option<f64>] {
        &self.periods
    }

    pub fn excluded(&self) -> &[Vec<f64>] {
        &self.excluded
    }

    /// Left end of the fundamental interval of a periodic axis.
    pub fn fundamental_lo(&self, axis: usize) -> f64 {
        let lo = self.bounds[axis].lo;
        if lo.is_finite() {
            lo
        } else {
            0.0
        }
    }

    /// Reduce periodic coordinates; leaves the others untouched.
    pub fn wrap_coords(&self, raw: &[f64]) -> Vec<f64> {
        raw.iter()
            .enumerate()
            .map(|(k, &x)| match self.periods[k] {
                Some(p) => {
                    let lo = self.fundamental_lo(k);
                    let mut y = (x - lo).rem_euclid(p);
                    if y >= p {
                        y -= p;
                    }
                    lo + y
                }
                None => x,
            })
            .collect()
    }

    pub fn check_bounds(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(DomainError::Dimension {
                expected: self.dim,
                got: x.len(),
            }
            .into());
        }
        for (k, &v) in x.iter().enumerate() {
            if !v.is_finite() {
                return Err(DomainError::NonFinite("chart coordinate").into());
            }
            if self.periods[k].is_some() {
                continue;
            }
            if !self.bounds[k].contains(v) {
                return Err(DomainError::OutOfBounds {
                    axis: k,
                    value: v,
                    lo: self.bounds[k].lo,
                    hi: self.bounds[k].hi,
                }
                .into());
            }
        }
        Ok(())
    }

    /// Shortest coordinate displacement from `a` to `b`, honouring periods.
    pub fn delta(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|k| {
                let mut d = b[k] - a[k];
                if let Some(p) = self.periods[k] {
                    d -= p * (d / p).round();
                }
                d
            })
            .collect()
    }

    pub fn chart_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        self.delta(a, b).iter().map(|d| d * d).sum::<f64>().sqrt()
    }

    /// Chart distance to the nearest excluded point.
    pub fn distance_to_excluded(&self, x: &[f64]) -> Option<f64> {
        self.excluded
            .iter()
            .map(|e| self.chart_distance(x, e))
            .min_by(|a, b| a.total_cmp(b))
    }

    /// Distance to the nearest non-periodic finite bound.
    pub fn distance_to_boundary(&self, x: &[f64]) -> f64 {
        let mut d = f64::INFINITY;
        for k in 0..self.dim {
            if self.periods[k].is_some() {
                continue;
            }
            d = d.min(x[k] - self.bounds[k].lo).min(self.bounds[k].hi - x[k]);
        }
        d
    }

    pub fn point(&self, raw: &[f64]) -> Result<Point> {
        wrap_point(self, raw)
    }
}

pub const EXCLUSION_TOL: f64 = 1e-12;

/// Reduce periodic coordinates and validate the result.
pub fn wrap_point(chart: &ChartManifold, raw: &[f64]) -> Result<Point> {
    let coords = chart.wrap_coords(raw);
    chart.check_bounds(&coords)?;
    if let Some(d) = chart.distance_to_excluded(&coords) {
        if d <= EXCLUSION_TOL {
            return Err(DomainError::ExcludedPoint(coords).into());
        }
    }
    Ok(Point::new(coords))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub coords: DVector<f64>,
}

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point {
            coords: DVector::from_vec(coords),
        }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        self.coords.as_slice()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TangentVector {
    pub base: Point,
    pub components: DVector<f64>,
}

impl TangentVector {
    pub fn new(base: Point, components: Vec<f64>) -> Self {
        TangentVector {
            base,
            components: DVector::from_vec(components),
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        TangentVector {
            base: self.base.clone(),
            components: &self.components * s,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| *c == 0.0)
    }
}

/// Values a field can take; supplies the central-difference combination.
pub trait FieldValue: Clone + Send + Sync + 'static {
    fn central(plus: &Self, minus: &Self, width: f64) -> Self;
    fn all_finite(&self) -> bool;
}

impl FieldValue for f64 {
    fn central(plus: &Self, minus: &Self, width: f64) -> Self {
        (plus - minus) / width
    }
    fn all_finite(&self) -> bool {
        self.is_finite()
    }
}

impl FieldValue for DVector<f64> {
    fn central(plus: &Self, minus: &Self, width: f64) -> Self {
        (plus - minus) / width
    }
    fn all_finite(&self) -> bool {
        self.iter().all(|x| x.is_finite())
    }
}

impl FieldValue for DMatrix<f64> {
    fn central(plus: &Self, minus: &Self, width: f64) -> Self {
        (plus - minus) / width
    }
    fn all_finite(&self) -> bool {
        self.iter().all(|x| x.is_finite())
    }
}

pub type Eval<T> = Arc<dyn Fn(&[f64]) -> Result<T> + Send + Sync>;
pub type PartialEval<T> = Arc<dyn Fn(&[f64], usize) -> Result<T> + Send + Sync>;

/// A smooth field over a chart.
#[derive(Clone)]
pub struct Field<T> {
    dim: usize,
    eval: Eval<T>,
    partial: Option<PartialEval<T>>,
    pub derivative_step: Option<f64>,
    domain: Option<Arc<ChartManifold>>,
}

pub type ScalarField = Field<f64>;
/// Vector fields and one-forms share the component representation.
pub type VectorField = Field<DVector<f64>>;
pub type MetricField = Field<DMatrix<f64>>;

pub fn default_step(x: f64) -> f64 {
    1e-5 * (1.0 + x.abs())
}

impl<T: FieldValue> Field<T> {
    pub fn new<F>(dim: usize, f: F) -> Self
    where
        F: Fn(&[f64]) -> Result<T> + Send + Sync + 'static,
    {
        Field {
            dim,
            eval: Arc::new(f),
            partial: None,
            derivative_step: None,
            domain: None,
        }
    }

    pub fn with_partial<F>(mut self, f: F) -> Self
    where
        F: Fn(&[f64], usize) -> Result<T> + Send + Sync + 'static,
    {
        self.partial = Some(Arc::new(f));
        self
    }

    pub fn without_partial(mut self) -> Self {
        self.partial = None;
        self
    }

    pub fn with_step(mut self, h: f64) -> Self {
        self.derivative_step = Some(h);
        self
    }

    pub fn with_domain(mut self, chart: Arc<ChartManifold>) -> Self {
        self.domain = Some(chart);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn has_analytic_partial(&self) -> bool {
        self.partial.is_some()
    }

    pub fn at(&self, x: &[f64]) -> Result<T> {
        if x.len() != self.dim {
            return Err(DomainError::Dimension {
                expected: self.dim,
                got: x.len(),
            }
            .into());
        }
        if let Some(chart) = &self.domain {
            chart.check_bounds(x)?;
        }
        let v = (self.eval)(x)?;
        if !v.all_finite() {
            return Err(DomainError::NonFinite("field value").into());
        }
        Ok(v)
    }

    /// Partial derivative along coordinate `i`.
    pub fn partial(&self, x: &[f64], i: usize) -> Result<T> {
        if i >= self.dim {
            return Err(Error::InvalidArgument(format!("coordinate index {i} out of range")));
        }
        if let Some(p) = &self.partial {
            if let Some(chart) = &self.domain {
                chart.check_bounds(x)?;
            }
            let v = p(x, i)?;
            if !v.all_finite() {
                return Err(DomainError::NonFinite("field derivative").into());
            }
            return Ok(v);
        }
        let h = self.derivative_step.unwrap_or_else(|| default_step(x[i]));
        self.central_difference(x, i, h)
    }

    /// Central difference with an explicit step, ignoring any analytic evaluator.
    pub fn central_difference(&self, x: &[f64], i: usize, h: f64) -> Result<T> {
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[i] += h;
        xm[i] -= h;
        let fp = self.at(&xp)?;
        let fm = self.at(&xm)?;
        Ok(T::central(&fp, &fm, 2.0 * h))
    }
}

impl ScalarField {
    pub fn constant(dim: usize, c: f64) -> Self {
        Field::new(dim, move |_| Ok(c)).with_partial(|_, _| Ok(0.0))
    }
}

impl VectorField {
    pub fn constant_vector(c: Vec<f64>) -> Self {
        let n = c.len();
        let v = DVector::from_vec(c);
        Field::new(n, move |_| Ok(v.clone())).with_partial(move |_, _| Ok(DVector::zeros(n)))
    }
}

impl MetricField {
    pub fn constant_matrix(m: DMatrix<f64>) -> Self {
        let n = m.nrows();
        Field::new(n, move |_| Ok(m.clone())).with_partial(move |_, _| Ok(DMatrix::zeros(n, n)))
    }

    pub fn euclidean(n: usize) -> Self {
        Self::constant_matrix(DMatrix::identity(n, n))
    }

    /// Metric value, checked for symmetry.
    pub fn metric(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let g = self.at(x)?;
        check_symmetric(&g)?;
        Ok(g)
    }

    /// Metric value, checked for symmetry and positive definiteness.
    pub fn riemannian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let g = self.metric(x)?;
        if g.clone().cholesky().is_none() {
            return Err(Error::SingularMetric(x.to_vec()));
        }
        Ok(g)
    }
}

pub fn check_symmetric(g: &DMatrix<f64>) -> Result<()> {
    let scale = g.iter().fold(0.0f64, |a, b| a.max(b.abs())).max(f64::MIN_POSITIVE);
    for i in 0..g.nrows() {
        for j in 0..i {
            if (g[(i, j)] - g[(j, i)]).abs() > 1e-12 * scale {
                return Err(Error::InvalidArgument(format!(
                    "metric not symmetric at ({i},{j})"
                )));
            }
        }
    }
    Ok(())
}

/// `∂_i` of the metric components at `p`.
pub fn metric_partials(field: &MetricField, p: &Point, i: usize) -> Result<DMatrix<f64>> {
    let d = field.partial(p.as_slice(), i)?;
    Ok((&d + d.transpose()) * 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn wrap_examples() {
        let t = ChartManifold::torus(2, 4.0);
        assert_eq!(wrap_point(&t, &[4.5, 0.0]).unwrap().as_slice(), &[0.5, 0.0]);
        let p = wrap_point(&t, &[-0.2, 3.9]).unwrap();
        assert_abs_diff_eq!(p.coords[0], 3.8, epsilon = 1e-14);
        assert_eq!(p.coords[1], 3.9);
        let e = ChartManifold::euclidean(2);
        assert_eq!(wrap_point(&e, &[0.0, 0.0]).unwrap().as_slice(), &[0.0, 0.0]);
    }

    #[test]
    fn wrap_rejects_bounds_and_excluded() {
        let c = ChartManifold::new(
            vec![Interval::new(0.5, 1.5), Interval::UNBOUNDED],
            vec![None, None],
            vec![vec![1.0, 0.0]],
        )
        .unwrap();
        assert!(matches!(
            wrap_point(&c, &[2.0, 0.0]),
            Err(Error::Domain(DomainError::OutOfBounds { axis: 0, .. }))
        ));
        assert!(matches!(
            wrap_point(&c, &[1.0, 0.0]),
            Err(Error::Domain(DomainError::ExcludedPoint(_)))
        ));
    }

    #[test]
    fn chart_validation() {
        assert!(ChartManifold::new(vec![Interval::new(1.0, 0.0)], vec![None], vec![]).is_err());
        assert!(ChartManifold::new(vec![Interval::UNBOUNDED], vec![Some(-1.0)], vec![]).is_err());
        assert!(ChartManifold::new(
            vec![Interval::new(0.0, 1.0)],
            vec![None],
            vec![vec![2.0]]
        )
        .is_err());
    }

    #[test]
    fn constant_field_has_zero_partials() {
        let g = MetricField::constant_matrix(DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]));
        let p = Point::new(vec![0.3, -1.0]);
        assert_eq!(metric_partials(&g, &p, 0).unwrap(), DMatrix::zeros(2, 2));
        let fd = g.central_difference(p.as_slice(), 1, 1e-3).unwrap();
        assert_eq!(fd, DMatrix::zeros(2, 2));
    }

    #[test]
    fn polynomial_partial() {
        let g = MetricField::new(2, |x| Ok(DMatrix::from_diagonal(&DVector::from_vec(vec![x[0] * x[0], 1.0]))));
        let d = metric_partials(&g, &Point::new(vec![3.0, 0.0]), 0).unwrap();
        assert_abs_diff_eq!(d[(0, 0)], 6.0, epsilon = 1e-8);
        assert_abs_diff_eq!(d[(1, 1)], 0.0, epsilon = 1e-8);
    }

    #[test]
    fn stencil_outside_chart_is_domain_error() {
        let chart = Arc::new(
            ChartManifold::new(vec![Interval::new(0.0, 1.0)], vec![None], vec![]).unwrap(),
        );
        let g = MetricField::new(1, |x| Ok(DMatrix::from_element(1, 1, 1.0 + x[0])))
            .with_domain(chart);
        let err = metric_partials(&g, &Point::new(vec![1.0]), 0).unwrap_err();
        assert!(err.is_domain());
    }

    #[test]
    fn halving_step_is_second_order() {
        let g = MetricField::new(1, |x| Ok(DMatrix::from_element(1, 1, x[0].powi(3) + 2.0 * x[0])));
        let exact = 3.0 * 1.3f64.powi(2) + 2.0;
        let e1 = (g.central_difference(&[1.3], 0, 0.1).unwrap()[(0, 0)] - exact).abs();
        let e2 = (g.central_difference(&[1.3], 0, 0.05).unwrap()[(0, 0)] - exact).abs();
        assert!(e1 / e2 >= 3.5, "ratio {}", e1 / e2);
    }

    #[test]
    fn periodic_delta_is_shortest() {
        let t = ChartManifold::torus(2, 4.0);
        let d = t.delta(&[3.9, 0.0], &[0.1, 0.0]);
        assert_abs_diff_eq!(d[0], 0.2, epsilon = 1e-12);
    }
}
