//! Zermelo data, SSTK data and the pointwise wind geometry: regimes, the
//! conic metric F, its Lorentz-Finsler companion F_l, the h metric and the
//! domains A and A_E.

use crate::error::{ConeCondition, DomainError, Error, Result};
use crate::manifold::{ChartManifold, Field, MetricField, Point, ScalarField, TangentVector, VectorField};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

pub const DEFAULT_REGIME_TOL: f64 = 1e-9;
/// Relative band inside which `h(v,v)` counts as zero.
pub const CONE_BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum WindRegime {
    Mild,
    Critical,
    Strong,
}

impl WindRegime {
    pub fn from_lapse(lapse: f64, tol: f64) -> Self {
        if lapse > tol {
            WindRegime::Mild
        } else if lapse < -tol {
            WindRegime::Strong
        } else {
            WindRegime::Critical
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DomainClass {
    InA,
    InAEOnly,
    Outside,
}

/// Riemannian metric plus wind on a chart.
#[derive(Clone)]
pub struct ZermeloData {
    pub chart: Arc<ChartManifold>,
    pub g_r: MetricField,
    pub wind: VectorField,
}

/// Lapse, shift and base metric of a stationary splitting.
#[derive(Clone)]
pub struct SstkData {
    pub lapse: ScalarField,
    pub shift: VectorField,
    pub g0: MetricField,
    pub normalized: bool,
}

/// Zermelo data frozen at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalZermelo {
    pub g_r: DMatrix<f64>,
    pub wind: DVector<f64>,
}

/// SSTK data frozen at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalSstk {
    pub lapse: f64,
    pub shift: DVector<f64>,
    pub g0: DMatrix<f64>,
}

fn quad(m: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    (m * v).dot(v)
}

impl LocalZermelo {
    pub fn new(g_r: DMatrix<f64>, wind: DVector<f64>) -> Self {
        LocalZermelo { g_r, wind }
    }

    pub fn dim(&self) -> usize {
        self.wind.len()
    }

    /// `|W|_R`, computed without overflow for huge winds.
    pub fn wind_norm(&self) -> f64 {
        let s = self.wind.amax();
        if s == 0.0 || !s.is_finite() {
            return if s == 0.0 { 0.0 } else { f64::INFINITY };
        }
        let u = &self.wind / s;
        s * quad(&self.g_r, &u).sqrt()
    }

    pub fn norm(&self, v: &DVector<f64>) -> f64 {
        quad(&self.g_r, v).max(0.0).sqrt()
    }

    pub fn lapse(&self) -> f64 {
        1.0 - quad(&self.g_r, &self.wind)
    }

    /// Normalized SSTK data: `g0 = g_R`, `ω = -g_R(W,·)`, `Λ = 1 - |W|²`.
    pub fn to_sstk(&self) -> LocalSstk {
        LocalSstk {
            lapse: self.lapse(),
            shift: -(&self.g_r * &self.wind),
            g0: self.g_r.clone(),
        }
    }

    pub fn reversed(&self) -> Self {
        LocalZermelo {
            g_r: self.g_r.clone(),
            wind: -&self.wind,
        }
    }

    pub fn indicatrix_residual(&self, v: &DVector<f64>) -> f64 {
        self.norm(&(v - &self.wind)) - 1.0
    }
}

/// Outcome of solving `-Λτ² + 2τω(v) + g0(v,v) = 0` for `τ > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NullRoots {
    /// Smaller positive root, `F(v)`.
    pub convex: Option<f64>,
    /// Larger positive root, `F_l(v)` (Strong points only).
    pub concave: Option<f64>,
}

impl LocalSstk {
    pub fn dim(&self) -> usize {
        self.shift.len()
    }

    pub fn regime(&self, tol: f64) -> WindRegime {
        WindRegime::from_lapse(self.lapse, tol)
    }

    /// `Λ + |ω|²₀`, the conformal factor.
    pub fn conformal_factor(&self) -> Result<f64> {
        let inv = self
            .g0
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::SingularMetric(vec![]))?;
        Ok(self.lapse + quad(&inv, &self.shift))
    }

    pub fn normalized(&self) -> Result<LocalSstk> {
        let c = self.conformal_factor()?;
        if !(c > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "Λ + |ω|² = {c} is not positive"
            )));
        }
        Ok(LocalSstk {
            lapse: self.lapse / c,
            shift: &self.shift / c,
            g0: &self.g0 / c,
        })
    }

    /// Zermelo data of the normalized splitting.
    pub fn to_zermelo(&self) -> Result<LocalZermelo> {
        let c = self.conformal_factor()?;
        let inv = self.g0.clone().try_inverse().ok_or_else(|| Error::SingularMetric(vec![]))?;
        Ok(LocalZermelo {
            g_r: &self.g0 / c,
            wind: -(inv * &self.shift),
        })
    }

    pub fn h(&self) -> DMatrix<f64> {
        &self.g0 * self.lapse + &self.shift * self.shift.transpose()
    }

    /// `(g0(v,v), ω(v), h(v,v))`.
    pub fn parts(&self, v: &DVector<f64>) -> (f64, f64, f64) {
        let g = quad(&self.g0, v);
        let w = self.shift.dot(v);
        (g, w, self.lapse * g + w * w)
    }

    fn boundary_band(&self, g: f64, w: f64) -> f64 {
        CONE_BOUNDARY_TOL * (self.lapse.abs() * g + w * w).max(f64::MIN_POSITIVE)
    }

    pub fn lift_residual(&self, tau: f64, v: &DVector<f64>) -> f64 {
        let (g, w, _) = self.parts(v);
        -self.lapse * tau * tau + 2.0 * tau * w + g
    }

    pub fn classify(&self, v: &DVector<f64>, tol: f64) -> DomainClass {
        let regime = self.regime(tol);
        if v.iter().all(|c| *c == 0.0) {
            return if regime == WindRegime::Critical {
                DomainClass::InAEOnly
            } else {
                DomainClass::Outside
            };
        }
        let (g, w, d) = self.parts(v);
        match regime {
            WindRegime::Mild => DomainClass::InA,
            WindRegime::Critical => {
                if -w > 0.0 {
                    DomainClass::InA
                } else {
                    DomainClass::Outside
                }
            }
            WindRegime::Strong => {
                if -w <= 0.0 {
                    return DomainClass::Outside;
                }
                let band = self.boundary_band(g, w);
                if d > band {
                    DomainClass::InA
                } else if d >= -band {
                    DomainClass::InAEOnly
                } else {
                    DomainClass::Outside
                }
            }
        }
    }

    /// Checks membership in A ∪ A_E and returns `(g, w, clamped h(v,v))`.
    fn admissible_parts(&self, v: &DVector<f64>, tol: f64) -> Result<(f64, f64, f64)> {
        let (g, w, d) = self.parts(v);
        match self.regime(tol) {
            WindRegime::Mild => Ok((g, w, d.max(0.0))),
            WindRegime::Critical | WindRegime::Strong => {
                if !(-w > 0.0) {
                    return Err(DomainError::OutsideCone(ConeCondition::WindAlignment).into());
                }
                if d < 0.0 {
                    let band = self.boundary_band(g, w);
                    if d < -band && self.regime(tol) == WindRegime::Strong {
                        return Err(DomainError::OutsideCone(ConeCondition::HSign).into());
                    }
                    return Ok((g, w, 0.0));
                }
                Ok((g, w, d))
            }
        }
    }

    /// The conic metric extended by `F(0) = 1` at critical points.
    pub fn conic_f(&self, v: &DVector<f64>, tol: f64) -> Result<f64> {
        if v.iter().all(|c| *c == 0.0) {
            return if self.regime(tol) == WindRegime::Critical {
                Ok(1.0)
            } else {
                Err(DomainError::OutsideCone(ConeCondition::ZeroVector).into())
            };
        }
        let (g, w, d) = self.admissible_parts(v, tol)?;
        let s = d.sqrt();
        // Rationalized form avoids cancellation when ω(v) > 0.
        if w > 0.0 {
            return Ok((w + s) / self.lapse);
        }
        Ok(g / (-w + s))
    }

    pub fn lorentz_fl(&self, v: &DVector<f64>, tol: f64) -> Result<f64> {
        let regime = self.regime(tol);
        if v.iter().all(|c| *c == 0.0) {
            return if regime == WindRegime::Critical {
                Ok(1.0)
            } else {
                Err(DomainError::OutsideCone(ConeCondition::ZeroVector).into())
            };
        }
        let (_, w, d) = self.admissible_parts(v, tol)?;
        match regime {
            WindRegime::Strong => Ok((-w + d.sqrt()) / (-self.lapse)),
            _ => Ok(f64::INFINITY),
        }
    }

    /// Positive roots of the null condition for the lift `(τ, v)`.
    pub fn null_roots(&self, v: &DVector<f64>) -> NullRoots {
        let (g, w, d) = self.parts(v);
        let band = self.boundary_band(g, w);
        let d = if d < 0.0 && d >= -band { 0.0 } else { d };
        if d < 0.0 {
            return NullRoots { convex: None, concave: None };
        }
        let s = d.sqrt();
        let l = self.lapse;
        let convex = if w <= 0.0 {
            let den = -w + s;
            (den > 0.0).then(|| g / den)
        } else if l > 0.0 {
            Some((w + s) / l)
        } else {
            None
        };
        let concave = if l < 0.0 && w < 0.0 { Some((-w + s) / (-l)) } else { None };
        NullRoots { convex, concave }
    }
}

impl ZermeloData {
    pub fn new(chart: ChartManifold, g_r: MetricField, wind: VectorField) -> Result<Self> {
        let n = chart.dim();
        if g_r.dim() != n || wind.dim() != n {
            return Err(Error::InvalidArgument("field dimension differs from chart".into()));
        }
        let chart = Arc::new(chart);
        Ok(ZermeloData {
            g_r: g_r.with_domain(chart.clone()),
            wind: wind.with_domain(chart.clone()),
            chart,
        })
    }

    /// Euclidean metric with a constant wind on `ℝⁿ`.
    pub fn constant(wind: Vec<f64>) -> Self {
        let n = wind.len();
        ZermeloData::new(
            ChartManifold::euclidean(n),
            MetricField::euclidean(n),
            VectorField::constant_vector(wind),
        )
        .expect("dimensions agree")
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn at(&self, x: &[f64]) -> Result<LocalZermelo> {
        let g_r = self.g_r.riemannian(x)?;
        let wind = self.wind.at(x)?;
        Ok(LocalZermelo { g_r, wind })
    }

    /// The structure with wind `-W`; its forward objects are our backward ones.
    pub fn reversed(&self) -> Self {
        let w = self.wind.clone();
        let dw = self.wind.clone();
        let mut rev = Field::new(self.dim(), move |x| Ok(-w.at(x)?));
        if self.wind.has_analytic_partial() {
            rev = rev.with_partial(move |x, i| Ok(-dw.partial(x, i)?));
        }
        ZermeloData {
            chart: self.chart.clone(),
            g_r: self.g_r.clone(),
            wind: rev.with_domain(self.chart.clone()),
        }
    }

    pub fn with_chart(&self, chart: ChartManifold) -> Self {
        let chart = Arc::new(chart);
        ZermeloData {
            g_r: self.g_r.clone().with_domain(chart.clone()),
            wind: self.wind.clone().with_domain(chart.clone()),
            chart,
        }
    }

    pub fn point(&self, raw: &[f64]) -> Result<Point> {
        self.chart.point(raw)
    }

    pub fn tangent(&self, p: &[f64], v: &[f64]) -> Result<TangentVector> {
        let base = self.point(p)?;
        if v.len() != base.dim() {
            return Err(DomainError::Dimension {
                expected: base.dim(),
                got: v.len(),
            }
            .into());
        }
        Ok(TangentVector::new(base, v.to_vec()))
    }
}

impl SstkData {
    pub fn new(lapse: ScalarField, shift: VectorField, g0: MetricField) -> Self {
        SstkData {
            lapse,
            shift,
            g0,
            normalized: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.g0.dim()
    }

    pub fn at(&self, x: &[f64]) -> Result<LocalSstk> {
        let local = LocalSstk {
            lapse: self.lapse.at(x)?,
            shift: self.shift.at(x)?,
            g0: self.g0.metric(x)?,
        };
        if self.normalized {
            // c = 1 by construction; recomputing it cancels catastrophically
            // where the wind is large.
            return Ok(local);
        }
        let c = local.conformal_factor()?;
        if !(c > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "Λ + |ω|² = {c} is not positive at {x:?}"
            )));
        }
        Ok(local)
    }

    /// Normalized pointwise data.
    pub fn at_normalized(&self, x: &[f64]) -> Result<LocalSstk> {
        let local = self.at(x)?;
        if self.normalized {
            Ok(local)
        } else {
            local.normalized()
        }
    }

    fn analytic(&self) -> bool {
        self.lapse.has_analytic_partial()
            && self.shift.has_analytic_partial()
            && self.g0.has_analytic_partial()
    }

    /// Zermelo data of the normalized splitting: `g_R = g0/c`, `W = -g0⁻¹ω`.
    pub fn to_zermelo(&self, chart: ChartManifold) -> Result<ZermeloData> {
        let n = self.dim();
        let s1 = self.clone();
        let s2 = self.clone();
        let mut g_r = Field::new(n, move |x| Ok(s1.at(x)?.to_zermelo()?.g_r));
        let mut wind = Field::new(n, move |x| Ok(s2.at(x)?.to_zermelo()?.wind));
        if self.analytic() {
            let s3 = self.clone();
            let s4 = self.clone();
            g_r = g_r.with_partial(move |x, i| Ok(s3.zermelo_partials(x, i)?.0));
            wind = wind.with_partial(move |x, i| Ok(s4.zermelo_partials(x, i)?.1));
        }
        ZermeloData::new(chart, g_r, wind)
    }

    fn zermelo_partials(&self, x: &[f64], i: usize) -> Result<(DMatrix<f64>, DVector<f64>)> {
        let l = self.at(x)?;
        let dl = self.lapse.partial(x, i)?;
        let dw = self.shift.partial(x, i)?;
        let dg = self.g0.partial(x, i)?;
        let inv = l.g0.clone().try_inverse().ok_or_else(|| Error::SingularMetric(x.to_vec()))?;
        let dinv = -(&inv * &dg * &inv);
        let c = l.lapse + quad(&inv, &l.shift);
        let dc = dl + 2.0 * (&inv * &l.shift).dot(&dw) + quad(&dinv, &l.shift);
        let dgr = &dg / c - &l.g0 * (dc / (c * c));
        let dwind = -(&dinv * &l.shift + &inv * &dw);
        Ok((dgr, dwind))
    }
}

/// Normalized SSTK data of a Zermelo structure.
pub fn zermelo_to_sstk(z: &ZermeloData) -> SstkData {
    let n = z.dim();
    let (za, zb, zc) = (z.clone(), z.clone(), z.clone());
    let mut lapse = Field::new(n, move |x| Ok(za.at(x)?.lapse()));
    let mut shift = Field::new(n, move |x| Ok(zb.at(x)?.to_sstk().shift));
    let g0 = Field::new(n, move |x| zc.g_r.metric(x));
    let mut g0 = g0;
    if z.g_r.has_analytic_partial() && z.wind.has_analytic_partial() {
        let (zd, ze, zf) = (z.clone(), z.clone(), z.clone());
        lapse = lapse.with_partial(move |x, i| {
            let l = zd.at(x)?;
            let dg = zd.g_r.partial(x, i)?;
            let dw = zd.wind.partial(x, i)?;
            Ok(-(2.0 * (&l.g_r * &l.wind).dot(&dw) + quad(&dg, &l.wind)))
        });
        shift = shift.with_partial(move |x, i| {
            let l = ze.at(x)?;
            let dg = ze.g_r.partial(x, i)?;
            let dw = ze.wind.partial(x, i)?;
            Ok(-(dg * &l.wind + &l.g_r * dw))
        });
        g0 = g0.with_partial(move |x, i| zf.g_r.partial(x, i));
    }
    let chart = z.chart.clone();
    SstkData {
        lapse: lapse.with_domain(chart.clone()),
        shift: shift.with_domain(chart.clone()),
        g0: g0.with_domain(chart),
        normalized: true,
    }
}

pub fn classify_regime(z: &ZermeloData, p: &Point, tol: f64) -> Result<WindRegime> {
    Ok(WindRegime::from_lapse(z.at(p.as_slice())?.lapse(), tol))
}

pub fn conic_f(s: &SstkData, v: &TangentVector) -> Result<f64> {
    s.at(v.base.as_slice())?.conic_f(&v.components, DEFAULT_REGIME_TOL)
}

pub fn lorentz_fl(s: &SstkData, v: &TangentVector) -> Result<f64> {
    s.at(v.base.as_slice())?.lorentz_fl(&v.components, DEFAULT_REGIME_TOL)
}

pub fn classify_domain(s: &SstkData, v: &TangentVector, tol: f64) -> Result<DomainClass> {
    Ok(s.at(v.base.as_slice())?.classify(&v.components, tol))
}

pub fn h_metric(s: &SstkData, p: &Point) -> Result<DMatrix<f64>> {
    Ok(s.at_normalized(p.as_slice())?.h())
}

pub fn randers_f(z: &ZermeloData, v: &TangentVector) -> Result<f64> {
    let s = z.at(v.base.as_slice())?.to_sstk();
    if s.regime(DEFAULT_REGIME_TOL) != WindRegime::Mild {
        return Err(DomainError::NotMild.into());
    }
    if v.is_zero() {
        return Err(DomainError::OutsideCone(ConeCondition::ZeroVector).into());
    }
    let (g, w, _) = s.parts(&v.components);
    let a = w / s.lapse;
    Ok(a + (g / s.lapse + a * a).sqrt())
}

pub fn indicatrix_residual(z: &ZermeloData, v: &TangentVector) -> Result<f64> {
    Ok(z.at(v.base.as_slice())?.indicatrix_residual(&v.components))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn local(w: &[f64]) -> LocalSstk {
        LocalZermelo::new(DMatrix::identity(w.len(), w.len()), DVector::from_row_slice(w)).to_sstk()
    }

    fn v(c: &[f64]) -> DVector<f64> {
        DVector::from_row_slice(c)
    }

    const TOL: f64 = DEFAULT_REGIME_TOL;

    #[test]
    fn sstk_of_strong_constant_wind() {
        let s = local(&[2.0, 0.0]);
        assert_eq!(s.lapse, -3.0);
        assert_eq!(s.shift, v(&[-2.0, 0.0]));
        assert_eq!(s.h(), DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -3.0]));
        let z = local(&[0.0, 0.0]);
        assert_eq!(z.lapse, 1.0);
        assert_eq!(z.shift, v(&[0.0, 0.0]));
    }

    #[test]
    fn conic_examples() {
        assert_abs_diff_eq!(local(&[0.0, 0.0]).conic_f(&v(&[3.0, 4.0]), TOL).unwrap(), 5.0, epsilon = 1e-14);
        assert_abs_diff_eq!(local(&[1.0, 1.0]).conic_f(&v(&[2.0, 1.0]), TOL).unwrap(), 1.0, epsilon = 1e-14);
        let s = local(&[2.0, 0.0]);
        assert_abs_diff_eq!(s.conic_f(&v(&[2.0, 0.0]), TOL).unwrap(), 2.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.lorentz_fl(&v(&[2.0, 0.0]), TOL).unwrap(), 2.0, epsilon = 1e-14);
        let b = v(&[3f64.sqrt(), 1.0]);
        assert_abs_diff_eq!(s.conic_f(&b, TOL).unwrap(), 2.0 / 3f64.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(s.lorentz_fl(&b, TOL).unwrap(), 2.0 / 3f64.sqrt(), epsilon = 1e-12);
        assert_eq!(s.classify(&b, TOL), DomainClass::InAEOnly);
        assert_eq!(s.classify(&v(&[2.0, 0.0]), TOL), DomainClass::InA);
    }

    #[test]
    fn outside_reports_condition() {
        let s = local(&[2.0, 0.0]);
        let e = s.conic_f(&v(&[-1.0, 0.0]), TOL).unwrap_err();
        assert!(matches!(e, Error::Domain(DomainError::OutsideCone(ConeCondition::WindAlignment))));
        let e = s.conic_f(&v(&[1.0, 2.0]), TOL).unwrap_err();
        assert!(matches!(e, Error::Domain(DomainError::OutsideCone(ConeCondition::HSign))));
        let e = local(&[0.5, 0.0]).conic_f(&v(&[0.0, 0.0]), TOL).unwrap_err();
        assert!(matches!(e, Error::Domain(DomainError::OutsideCone(ConeCondition::ZeroVector))));
    }

    #[test]
    fn critical_conventions() {
        let s = local(&[1.0, 0.0]);
        assert_eq!(s.regime(TOL), WindRegime::Critical);
        assert_eq!(s.conic_f(&v(&[0.0, 0.0]), TOL).unwrap(), 1.0);
        assert_eq!(s.lorentz_fl(&v(&[0.0, 0.0]), TOL).unwrap(), 1.0);
        assert_eq!(s.classify(&v(&[0.0, 0.0]), TOL), DomainClass::InAEOnly);
        assert_eq!(s.lorentz_fl(&v(&[1.0, 0.3]), TOL).unwrap(), f64::INFINITY);
        assert_eq!(s.classify(&v(&[-1.0, 0.3]), TOL), DomainClass::Outside);
        assert_abs_diff_eq!(s.h().determinant(), 0.0, epsilon = 1e-10);
        // Kropina: F = |v|² / (2 W·v)
        assert_abs_diff_eq!(s.conic_f(&v(&[1.0, 1.0]), TOL).unwrap(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn mild_conventions() {
        let s = local(&[0.5, 0.0]);
        assert_eq!(s.lorentz_fl(&v(&[1.0, 0.0]), TOL).unwrap(), f64::INFINITY);
        assert_eq!(s.classify(&v(&[-1.0, 0.0]), TOL), DomainClass::InA);
        assert_abs_diff_eq!(s.conic_f(&v(&[1.0, 0.0]), TOL).unwrap(), 2.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.conic_f(&v(&[-1.0, 0.0]), TOL).unwrap(), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn randers_and_indicatrix() {
        let z = ZermeloData::constant(vec![0.5, 0.0]);
        let t = z.tangent(&[0.0, 0.0], &[1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(randers_f(&z, &t).unwrap(), 2.0 / 3.0, epsilon = 1e-14);
        let t = z.tangent(&[0.0, 0.0], &[-1.0, 0.0]).unwrap();
        assert_abs_diff_eq!(randers_f(&z, &t).unwrap(), 2.0, epsilon = 1e-14);
        let strong = ZermeloData::constant(vec![2.0, 0.0]);
        let t = strong.tangent(&[0.0, 0.0], &[1.0, 0.0]).unwrap();
        assert!(matches!(randers_f(&strong, &t), Err(Error::Domain(DomainError::NotMild))));
        let zero = ZermeloData::constant(vec![0.0, 0.0]);
        let t = zero.tangent(&[0.0, 0.0], &[3.0, 4.0]).unwrap();
        assert_abs_diff_eq!(indicatrix_residual(&zero, &t).unwrap(), 4.0, epsilon = 1e-14);
        let crit = ZermeloData::constant(vec![0.0, 1.0]);
        let t = crit.tangent(&[0.0, 0.0], &[0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(indicatrix_residual(&crit, &t).unwrap(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn regime_of_zermelo() {
        let p = Point::new(vec![0.0, 0.0]);
        let tol = TOL;
        assert_eq!(classify_regime(&ZermeloData::constant(vec![0.0, 0.0]), &p, tol).unwrap(), WindRegime::Mild);
        assert_eq!(classify_regime(&ZermeloData::constant(vec![0.6, 0.8]), &p, tol).unwrap(), WindRegime::Critical);
        assert_eq!(classify_regime(&ZermeloData::constant(vec![2.0, 0.0]), &p, tol).unwrap(), WindRegime::Strong);
    }

    #[test]
    fn sstk_round_trip() {
        let z = ZermeloData::constant(vec![0.3, -1.7]);
        let s = zermelo_to_sstk(&z);
        let l = s.at(&[0.0, 0.0]).unwrap();
        assert_abs_diff_eq!(l.conformal_factor().unwrap(), 1.0, epsilon = 1e-12);
        let back = l.to_zermelo().unwrap();
        assert_abs_diff_eq!((back.wind - DVector::from_vec(vec![0.3, -1.7])).amax(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn raw_sstk_normalization_keeps_f() {
        let raw = LocalSstk {
            lapse: 0.3,
            shift: v(&[0.2, -0.4]),
            g0: DMatrix::from_row_slice(2, 2, &[2.0, 0.1, 0.1, 1.5]),
        };
        let n = raw.normalized().unwrap();
        assert_abs_diff_eq!(n.conformal_factor().unwrap(), 1.0, epsilon = 1e-12);
        let u = v(&[0.7, 0.2]);
        let a = raw.conic_f(&u, TOL).unwrap();
        let b = n.conic_f(&u, TOL).unwrap();
        assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        let z = raw.to_zermelo().unwrap();
        assert_abs_diff_eq!(z.to_sstk().conic_f(&u, TOL).unwrap(), a, epsilon = 1e-12);
    }

    #[test]
    fn null_roots_match_metrics() {
        let s = local(&[2.0, 0.5]);
        let u = v(&[1.5, 0.2]);
        let r = s.null_roots(&u);
        assert_abs_diff_eq!(r.convex.unwrap(), s.conic_f(&u, TOL).unwrap(), epsilon = 1e-12);
        assert_abs_diff_eq!(r.concave.unwrap(), s.lorentz_fl(&u, TOL).unwrap(), epsilon = 1e-12);
        let m = local(&[0.2, 0.1]);
        let r = m.null_roots(&u);
        assert!(r.concave.is_none());
        assert_abs_diff_eq!(m.lift_residual(r.convex.unwrap(), &u), 0.0, epsilon = 1e-12);
    }
}
