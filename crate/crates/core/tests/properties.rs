use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use std::sync::OnceLock;
use windrs::criteria::{criterion_quadratic, metric_h, metric_h_from_sstk, metric_h_star, MetricKind};
use windrs::manifold::Point;
use windrs::reachability::{reachable_sweep, separations, Grid, SeparationOptions, SeparationStatus};
use windrs::scenarios::{get_scenario, Scenario};
use windrs::wind::{LocalZermelo, DEFAULT_REGIME_TOL};

fn corridor() -> &'static (Scenario, Grid) {
    static S: OnceLock<(Scenario, Grid)> = OnceLock::new();
    S.get_or_init(|| {
        let s = get_scenario("corridor").unwrap();
        let g = s.grid("0.5:2.5:0.125,-0.5:0.5:0.125").unwrap();
        (s, g)
    })
}

fn node(g: &Grid, i: usize, j: usize) -> Point {
    let c = g.coords(i * g.counts()[1] + j);
    Point::new(c)
}

fn spd() -> impl Strategy<Value = DMatrix<f64>> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b, c, d)| {
        let m = DMatrix::from_row_slice(2, 2, &[a, b, c, d]);
        &m * m.transpose() + DMatrix::identity(2, 2) * 0.05
    })
}

fn min_eig(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigenvalues().iter().copied().fold(f64::INFINITY, f64::min)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn separation_triangle_inequality(a in (0usize..17, 0usize..9), b in (0usize..17, 0usize..9), c in (0usize..17, 0usize..9)) {
        let (s, g) = corridor();
        let (p, q, r) = (node(g, a.0, a.1), node(g, b.0, b.1), node(g, c.0, c.1));
        let opts = SeparationOptions::default();
        let from_p = separations(&s.zermelo, &p, &[q.clone(), r.clone()], g, &opts).unwrap();
        let from_q = separations(&s.zermelo, &q, std::slice::from_ref(&r), g, &opts).unwrap();
        let d = |x: &windrs::reachability::SeparationResult| {
            if x.status == SeparationStatus::Reached { x.value } else { f64::INFINITY }
        };
        let (pq, pr, qr) = (d(&from_p[0]), d(&from_p[1]), d(&from_q[0]));
        prop_assert!(pr <= pq + qr + 1e-12, "d(p,r) = {pr} > {pq} + {qr}");
    }

    #[test]
    fn mild_fronts_are_nested(cx in 1.25..2.75f64, cy in -0.5..0.5f64) {
        // Stopping is admissible where |W| < 1, so earlier fronts persist.
        let s = get_scenario("corridor").unwrap();
        let g = s.grid("-1:5:0.125,-2:2:0.125").unwrap();
        let fronts = reachable_sweep(&s.zermelo, &Point::new(vec![cx, cy]), 1.0, 0.25, &g).unwrap();
        for pair in fronts.windows(2) {
            for i in pair[0].cells() {
                prop_assert!(pair[1].contains(i));
            }
        }
    }

    #[test]
    fn enclosure_of_wind_plus_unit(g in spd(), w in (-4.0..4.0f64, -4.0..4.0f64), a in 0.0..std::f64::consts::TAU) {
        let w = DVector::from_vec(vec![w.0, w.1]);
        let u = DVector::from_vec(vec![a.cos(), a.sin()]);
        let u = &u / (&g * &u).dot(&u).sqrt();
        let l = LocalZermelo::new(g, w.clone());
        prop_assert!(criterion_quadratic(MetricKind::H, &l, &(&w + &u)) <= 2.0 + 1e-12);
        for lam in [1.1, 2f64.sqrt(), 3.0] {
            prop_assert!(criterion_quadratic(MetricKind::HLambda(lam), &l, &(&w + &u)) <= 1.0 + 1e-9);
        }
    }

    #[test]
    fn metric_ordering(x in -3.0..3.0f64, y in -3.0..3.0f64) {
        for id in ["x_ey", "corridor", "bump_squares", "torus"] {
            let s = get_scenario(id).unwrap();
            let p = Point::new(vec![x, y]);
            let gr = s.zermelo.at(&[x, y]).unwrap().g_r.clone();
            let hs = metric_h_star(&s.zermelo, &p).unwrap();
            let h = metric_h(&s.zermelo, &p).unwrap();
            let scale = gr.amax().max(1.0);
            prop_assert!(min_eig(&(&h - &hs)) >= -1e-12 * scale, "{id}: h* ≤ h fails");
            prop_assert!(min_eig(&(&gr - &h)) >= -1e-12 * scale, "{id}: h ≤ g_R fails");
        }
    }

    #[test]
    fn index_form_matches(g in spd(), w in (-3.0..3.0f64, -3.0..3.0f64)) {
        let w = DVector::from_vec(vec![w.0, w.1]);
        let l = LocalZermelo::new(g.clone(), w.clone());
        let omega = -(&g * &w);
        let h = metric_h_from_sstk(&g, &omega).unwrap();
        let v = DVector::from_vec(vec![0.3, -1.1]);
        let a = (&h * &v).dot(&v);
        let b = criterion_quadratic(MetricKind::H, &l, &v);
        prop_assert!((a - b).abs() <= 1e-10 * (1.0 + a.abs()), "{a} vs {b}");
    }

    #[test]
    fn conic_f_homogeneous_and_conformal(w in (-3.0..3.0f64, -3.0..3.0f64), v in (-2.0..2.0f64, -2.0..2.0f64), c in 0.1..10.0f64, k in 0.1..10.0f64) {
        let l = LocalZermelo::new(DMatrix::identity(2, 2), DVector::from_vec(vec![w.0, w.1])).to_sstk();
        let v = DVector::from_vec(vec![v.0, v.1]);
        prop_assume!(v.norm() > 1e-3);
        let Ok(f) = l.conic_f(&v, DEFAULT_REGIME_TOL) else { return Ok(()) };
        prop_assume!(f.is_finite() && f > 1e-6);
        let fc = l.conic_f(&(&v * c), DEFAULT_REGIME_TOL).unwrap();
        prop_assert!((fc - c * f).abs() <= 1e-9 * c * f);
        let mut scaled = l.clone();
        scaled.lapse *= k;
        scaled.shift *= k;
        scaled.g0 *= k;
        let fk = scaled.conic_f(&v, DEFAULT_REGIME_TOL).unwrap();
        prop_assert!((fk - f).abs() <= 1e-9 * f);
    }
}
