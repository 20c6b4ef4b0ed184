mod common;

use common::*;
use libor_core::cir::CirParams;
use libor_core::pricing::McAccumulator;
use libor_core::{TenorStructure, TimeGrid};
use proptest::prelude::*;

/// Riccati right-hand side `(φ', ψ') = (aθψ, ½σ²ψ² − aψ)`.
fn rhs(p: &CirParams, psi: f64) -> (f64, f64) {
    let s2 = p.vol_of_vol * p.vol_of_vol;
    (
        p.mean_reversion * p.long_run_level * psi,
        0.5 * s2 * psi * psi - p.mean_reversion * psi,
    )
}

/// Classical RK4 with `steps` steps; returns `None` on blow-up.
fn rk4(p: &CirParams, t: f64, u: f64, steps: usize) -> Option<(f64, f64)> {
    let h = t / steps as f64;
    let (mut phi, mut psi) = (0.0, u);
    for _ in 0..steps {
        let k1 = rhs(p, psi);
        let k2 = rhs(p, psi + 0.5 * h * k1.1);
        let k3 = rhs(p, psi + 0.5 * h * k2.1);
        let k4 = rhs(p, psi + h * k3.1);
        phi += h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
        psi += h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
        if !psi.is_finite() || psi.abs() > 1e12 {
            return None;
        }
    }
    Some((phi, psi))
}

fn params() -> CirParams {
    CirParams::new(0.8, 0.05, 0.4, 0.04).unwrap()
}

#[test]
fn flow_matches_runge_kutta() {
    let p = params();
    for &(t, u) in &[(1.0, 0.5), (1.0, -2.0), (2.5, 3.0), (0.3, 10.0)] {
        let (phi, psi) = p.flow(t, u).unwrap();
        let (rp, rq) = rk4(&p, t, u, 40_000).unwrap();
        assert!(
            (phi - rp).abs() < 1e-9 && (psi - rq).abs() < 1e-9,
            "t={t} u={u}"
        );
    }
    assert_eq!(p.flow(0.0, 0.7).unwrap(), (0.0, 0.7));
}

#[test]
fn explosion_boundary_matches_bisection() {
    let p = params();
    let t = 1.0;
    let explodes = |u: f64| rk4(&p, t, u, 20_000).is_none();
    let (mut lo, mut hi) = (0.0, 1.0);
    while !explodes(hi) {
        hi *= 2.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if explodes(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let um = p.u_max(t);
    assert!((lo - um).abs() < 1e-3 * um, "{lo} vs {um}");
    assert!(p.flow(t, um * (1.0 - 1e-6)).is_ok());
    assert!(p.flow(t, um * (1.0 + 1e-6)).is_err());
}

#[test]
fn moment_domain_shrinks_with_horizon() {
    let p = params();
    let mut prev = f64::INFINITY;
    for i in 1..40 {
        let um = p.u_max(0.25 * i as f64);
        assert!(um <= prev);
        prev = um;
    }
}

#[test]
fn exact_simulation_reproduces_the_flow() {
    let p = params();
    let tenor = TenorStructure::new(0.5, 4).unwrap();
    let g = TimeGrid::refine(&tenor, 2, 3).unwrap();
    let set = p.simulate_cir(&g, 100_000, 3).unwrap();
    let last = g.n_steps();
    let t = g.times()[last];
    for u in [-5.0, 1.0, 4.0] {
        let mut acc = McAccumulator::default();
        for q in 0..set.n_paths() {
            acc.push((u * set.state(q, last)).exp());
        }
        assert_3se(&acc, p.mgf(t, u, p.x0).unwrap(), "E[e^{uX_t}]");
    }
    assert!((0..set.n_paths()).all(|q| set.path(q).iter().all(|x| *x >= 0.0)));
}

#[test]
fn low_dimension_draws_stay_non_negative() {
    // 4aθ/σ² < 1: the Poisson-mixture branch
    let p = CirParams::new(0.2, 0.01, 0.6, 0.02).unwrap();
    assert!(p.chi2_dof() < 1.0);
    let tenor = TenorStructure::new(0.5, 3).unwrap();
    let g = TimeGrid::refine(&tenor, 2, 2).unwrap();
    let set = p.simulate_cir(&g, 50_000, 8).unwrap();
    let mut acc = McAccumulator::default();
    for q in 0..set.n_paths() {
        assert!(set.path(q).iter().all(|x| *x >= 0.0));
        acc.push(set.state(q, g.n_steps()));
    }
    let t = g.times()[g.n_steps()];
    let mean = p.x0 * (-p.mean_reversion * t).exp()
        + p.long_run_level * (1.0 - (-p.mean_reversion * t).exp());
    assert_3se(&acc, mean, "mean of X_t");
}

proptest! {
    #[test]
    fn semi_flow(t in 0.01f64..3.0, s in 0.01f64..3.0, frac in -3.0f64..0.95) {
        let p = params();
        let u = frac * p.u_max(t + s);
        let (pt, qt) = p.flow(t, u).unwrap();
        let (ps, qs) = p.flow(s, qt).unwrap();
        let (pts, qts) = p.flow(t + s, u).unwrap();
        prop_assert!((pts - (pt + ps)).abs() < 1e-8 * (1.0 + pts.abs()));
        prop_assert!((qts - qs).abs() < 1e-8 * (1.0 + qts.abs()));
    }
}
