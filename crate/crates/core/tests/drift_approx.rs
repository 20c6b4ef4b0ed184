mod common;

use common::*;
use libor_core::lmm::LmmModel;
use libor_core::pricing::{caplet_accumulator, implied_vol};
use libor_core::schemes::{
    picard1_coefficients, picard_simulate_on, simulate_scheme_on, PicardOrder, TaylorState,
};
use libor_core::{InitialCurve, Scheme, TenorStructure, VolatilitySurface};

fn flat_model(n: usize, vol: f64) -> LmmModel {
    let c = flat_curve(n, 0.5, 0.04);
    let v = VolatilitySurface::flat(c.tenor(), vol).unwrap();
    LmmModel::new(c, v, brownian()).unwrap()
}

#[test]
fn picard_zero_is_frozen_drift() {
    let m = LmmModel::new(
        curve(6, 0.5),
        vols(&TenorStructure::new(0.5, 6).unwrap()),
        brownian(),
    )
    .unwrap();
    let driver = m.chars().simulate(&grid(m.tenor(), 4), 500, 8).unwrap();
    let frozen = simulate_scheme_on(&m, &driver, Scheme::Frozen).unwrap();
    let p0 = picard_simulate_on(&m, &driver, PicardOrder::Zero).unwrap();
    for p in 0..500 {
        for j in 0..6 {
            for k in 0..6 {
                assert_eq!(frozen.rate(p, j, k).to_bits(), p0.rate(p, j, k).to_bits());
            }
        }
    }
}

#[test]
fn schemes_agree_on_the_terminal_rate() {
    let m = LmmModel::new(
        curve(6, 0.5),
        vols(&TenorStructure::new(0.5, 6).unwrap()),
        brownian(),
    )
    .unwrap();
    let driver = m.chars().simulate(&grid(m.tenor(), 4), 500, 9).unwrap();
    let runs: Vec<_> = [
        Scheme::Exact,
        Scheme::Frozen,
        Scheme::Picard1,
        Scheme::Taylor,
    ]
    .iter()
    .map(|s| simulate_scheme_on(&m, &driver, *s).unwrap())
    .collect();
    for p in 0..500 {
        for j in 0..6 {
            let exact = runs[0].rate(p, j, 5);
            for r in &runs[1..] {
                assert!((r.rate(p, j, 5) - exact).abs() < 1e-9 * exact);
            }
        }
    }
}

#[test]
fn frozen_drift_is_exactly_log_normal() {
    let tenor = TenorStructure::new(0.5, 5).unwrap();
    let c = curve(5, 0.5);
    let v = vols(&tenor);
    let m = LmmModel::new(c.clone(), v.clone(), brownian()).unwrap();
    let g = grid(&tenor, 4);
    let driver = m.chars().simulate(&g, 300, 4).unwrap();
    let frozen = simulate_scheme_on(&m, &driver, Scheme::Frozen).unwrap();
    let z0: Vec<f64> = c
        .libors()
        .iter()
        .map(|l| 0.5 * l / (1.0 + 0.5 * l))
        .collect();
    let law = TaylorState::new(&m);
    for k in 1..5 {
        for j in 1..=k {
            // closed-form mean and variance of log L(T_j, T_k)
            let mut mean = c.libor(k).unwrap().ln();
            let mut var = 0.0;
            for i in 0..j {
                let lam = v.lambda(k, i);
                let tail: f64 = (k + 1..5).map(|l| z0[l] * v.lambda(l, i)).sum();
                mean += (-0.5 * lam * lam - lam * tail) * 0.5;
                var += lam * lam * 0.5;
            }
            let got = law.log_libor_law(k, j);
            assert!((got.mean - mean).abs() < 1e-10 && (got.variance - var).abs() < 1e-10);
            for p in 0..300 {
                let w: f64 = (0..g.tenor_step(j))
                    .map(|s| v.lambda(k, g.period(s)) * driver.dw(p, s))
                    .sum();
                let centred = frozen.rate(p, j, k).ln() - w;
                assert!(
                    (centred - mean).abs() < 1e-10,
                    "k={k} j={j}: {centred} vs {mean}"
                );
            }
        }
    }
}

#[test]
fn picard_initial_weight() {
    let m = flat_model(4, 0.2);
    let st = picard1_coefficients(&m).unwrap();
    assert!((st.z0()[2] - 0.02 / 1.02).abs() < 1e-15);
    assert!(picard1_coefficients(
        &LmmModel::new(m.curve().clone(), m.vols().clone(), jumpy()).unwrap()
    )
    .is_err());
}

#[test]
fn picard_first_iterate_law() {
    let m = flat_model(5, 0.3);
    let st = picard1_coefficients(&m).unwrap();
    let driver = m.chars().simulate(&grid(m.tenor(), 8), 20_000, 12).unwrap();
    let g = driver.grid().clone();
    // Z¹ rebuilt from its coefficients and the driver matches the stated law
    let (k, j) = (3, 3);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for p in 0..driver.n_paths() {
        let mut z = st.z0()[k];
        for s in 0..g.tenor_step(j) {
            let i = g.period(s);
            z += st.a(k, i) * g.dt(s) + st.b(k, i) * driver.dw(p, s);
        }
        sum += z;
        sum_sq += z * z;
    }
    let n = driver.n_paths() as f64;
    let mean = sum / n;
    let var = sum_sq / n - mean * mean;
    let law = st.z1_law(k, j);
    let se = (law.variance / n).sqrt();
    assert!((mean - law.mean).abs() < 4.0 * se);
    assert!((var / law.variance - 1.0).abs() < 0.05);
}

fn iv_errors(m: &LmmModel, n_paths: usize, seed: u64, schemes: &[Scheme]) -> Vec<f64> {
    let c = m.curve().clone();
    let driver = m
        .chars()
        .simulate(&grid(m.tenor(), 4), n_paths, seed)
        .unwrap();
    let exact = simulate_scheme_on(m, &driver, Scheme::Exact).unwrap();
    let runs: Vec<_> = schemes
        .iter()
        .map(|s| simulate_scheme_on(m, &driver, *s).unwrap())
        .collect();
    let mut worst = vec![0.0f64; schemes.len()];
    for k in 1..m.n() {
        for strike in [0.03, 0.04, 0.05] {
            let iv = |paths| {
                let acc = caplet_accumulator(paths, k, strike, &c).unwrap();
                implied_vol(
                    acc.mean(),
                    c.libor(k).unwrap(),
                    strike,
                    0.5,
                    c.bond(k + 1),
                    c.tenor().date(k),
                )
                .unwrap()
            };
            let base = iv(&exact);
            for (e, r) in worst.iter_mut().zip(&runs) {
                *e = e.max((iv(r) - base).abs());
            }
        }
    }
    worst
}

#[test]
fn corrected_schemes_beat_frozen_drift() {
    let m = flat_model(10, 0.2);
    let e = iv_errors(
        &m,
        20_000,
        2024,
        &[Scheme::Frozen, Scheme::Picard1, Scheme::Taylor],
    );
    eprintln!("frozen {:e} picard1 {:e} taylor {:e}", e[0], e[1], e[2]);
    assert!(e[1] <= e[0]);
    assert!(e[2] < e[0]);
}

#[test]
fn taylor_error_shrinks_with_volatility() {
    let strong = |scale: f64| {
        let c = flat_curve(8, 0.5, 0.04);
        let v = VolatilitySurface::flat(c.tenor(), 0.3 * scale).unwrap();
        let m = LmmModel::new(c, v, brownian()).unwrap();
        let driver = m.chars().simulate(&grid(m.tenor(), 4), 4000, 31).unwrap();
        let exact = simulate_scheme_on(&m, &driver, Scheme::Exact).unwrap();
        let taylor = simulate_scheme_on(&m, &driver, Scheme::Taylor).unwrap();
        let mut total = 0.0;
        for p in 0..4000 {
            for k in 1..8 {
                total += (exact.rate(p, k, k).ln() - taylor.rate(p, k, k).ln()).abs();
            }
        }
        total / (4000.0 * 7.0)
    };
    let (full, half) = (strong(1.0), strong(0.5));
    assert!(half / full <= 0.6, "{half} / {full}");
}

#[test]
fn zero_vol_schemes_are_deterministic() {
    let c = InitialCurve::flat(TenorStructure::new(0.5, 4).unwrap(), 0.03).unwrap();
    let m = LmmModel::new(c.clone(), VolatilitySurface::zero(c.tenor()), brownian()).unwrap();
    let driver = m.chars().simulate(&grid(m.tenor(), 4), 10, 1).unwrap();
    for s in [
        Scheme::Exact,
        Scheme::Frozen,
        Scheme::Picard1,
        Scheme::Taylor,
    ] {
        let r = simulate_scheme_on(&m, &driver, s).unwrap();
        for p in 0..10 {
            assert!(r.rates_at(p, 3).iter().all(|l| (*l - 0.03).abs() < 1e-15));
        }
    }
}
