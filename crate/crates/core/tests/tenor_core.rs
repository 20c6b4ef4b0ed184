mod common;

use common::*;
use libor_core::lmm::LmmModel;
use libor_core::pricing::accumulate;
use libor_core::tenor::libor_from_bonds;
use libor_core::{InitialCurve, TenorStructure, TimeGrid};
use proptest::prelude::*;

#[test]
fn libor_from_two_bonds() {
    let want = (0.98 / 0.97 - 1.0) / 0.5;
    assert_eq!(libor_from_bonds(0.98, 0.97, 0.5), want);
    let c = InitialCurve::from_bonds(TenorStructure::new(0.5, 2).unwrap(), vec![1.0, 0.98, 0.97])
        .unwrap();
    assert!((c.libor(1).unwrap() - want).abs() < 1e-15);
}

#[test]
fn invalid_curves_are_rejected() {
    let t = TenorStructure::new(0.5, 2).unwrap();
    assert!(InitialCurve::from_bonds(t.clone(), vec![1.0, 0.0, 0.97]).is_err());
    assert!(InitialCurve::from_bonds(t.clone(), vec![1.0, 0.98]).is_err());
    assert!(TenorStructure::new(0.0, 3).is_err());
    assert!(TenorStructure::new(0.5, 0).is_err());
    assert!(TenorStructure::from_dates(&[0.0, 0.5, 0.9]).is_err());
}

#[test]
fn density_chain_weights_have_unit_mean() {
    let c = curve(5, 0.5);
    let m = LmmModel::new(c.clone(), vols(c.tenor()), jumpy()).unwrap();
    let paths = m.simulate_exact(&grid(c.tenor(), 4), 100_000, 15).unwrap();
    for k in 1..5 {
        let j = k;
        let acc = accumulate(&paths, |p| {
            let factors: Vec<f64> = (k..5).map(|l| 1.0 + 0.5 * paths.rate(p, j, l)).collect();
            c.density_chain_weight(k, &factors)
        })
        .unwrap();
        // dP_{T_k}/dP_{T_N} at T_k: the factor for L(T_k,T_k) is known at T_k
        assert_3se(&acc, 1.0, &format!("k={k}"));
    }
}

#[test]
fn refined_grid_hits_tenor_dates() {
    let t = TenorStructure::new(0.5, 4).unwrap();
    let g = TimeGrid::refine(&t, 4, 3).unwrap();
    assert_eq!(g.n_steps(), 12);
    for j in 0..=3 {
        assert_eq!(g.times()[g.tenor_step(j)], t.date(j));
    }
    assert!((g.max_step() - 0.125).abs() < 1e-15);
}

proptest! {
    #[test]
    fn forward_prices_telescope(rates in proptest::collection::vec(0.0f64..0.2, 1..12), k_frac in 0.0f64..1.0) {
        let n = rates.len();
        let c = InitialCurve::from_libors(TenorStructure::new(0.5, n).unwrap(), &rates).unwrap();
        let k = ((n as f64) * k_frac) as usize;
        let prod: f64 = (k..n).map(|j| 1.0 + 0.5 * rates[j]).product();
        let fp = c.forward_price(k, n).unwrap();
        prop_assert!((fp - prod).abs() < 1e-12 * prod);
        for (a, b) in c.libors().iter().zip(&rates) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
