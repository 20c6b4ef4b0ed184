mod common;

use common::*;
use libor_core::lmm::LmmModel;
use libor_core::math::quad::integrate;
use libor_core::pricing::{
    black_caplet, forward_swap_value, implied_vol, mc_caplet, mc_swaption, swaption_accumulator,
    McAccumulator,
};
use libor_core::Error;
use proptest::prelude::*;

#[test]
fn black_matches_log_normal_quadrature() {
    let (l0, k, v, delta, disc) = (0.04f64, 0.045f64, 0.3f64, 0.5, 0.96);
    let mu = l0.ln() - 0.5 * v * v;
    let integrand = |y: f64| {
        let pdf = (-(y - mu) * (y - mu) / (2.0 * v * v)).exp()
            / (v * (2.0 * std::f64::consts::PI).sqrt());
        (y.exp() - k) * pdf
    };
    let oracle = disc * delta * integrate(integrand, k.ln(), mu + 14.0 * v, 1e-15).unwrap();
    assert!((black_caplet(l0, k, v, delta, disc).unwrap() - oracle).abs() < 1e-10);
}

#[test]
fn implied_vol_bounds() {
    let p = black_caplet(0.04, 0.03, 0.2, 0.5, 0.95).unwrap();
    assert!(implied_vol(p, 0.04, 0.03, 0.5, 0.95, 1.0).is_ok());
    assert!(matches!(
        implied_vol(0.95 * 0.5 * 0.001, 0.04, 0.03, 0.5, 0.95, 1.0),
        Err(Error::PriceOutOfBounds { .. })
    ));
    assert!(matches!(
        implied_vol(0.95 * 0.5 * 0.04, 0.04, 0.03, 0.5, 0.95, 1.0),
        Err(Error::PriceOutOfBounds { .. })
    ));
    let mut prev = 0.0;
    for i in 1..20 {
        let price = black_caplet(0.04, 0.05, 0.05 * i as f64, 0.5, 0.95).unwrap();
        let iv = implied_vol(price, 0.04, 0.05, 0.5, 0.95, 2.0).unwrap();
        assert!(iv > prev);
        prev = iv;
    }
}

#[test]
fn one_period_swaption_is_a_caplet() {
    let c = curve(5, 0.5);
    let m = LmmModel::new(c.clone(), vols(c.tenor()), jumpy()).unwrap();
    let paths = m.simulate_exact(&grid(c.tenor(), 4), 20_000, 2).unwrap();
    for k in 1..5 {
        let cap = mc_caplet(&paths, k, 0.04, &c).unwrap();
        let swn = mc_swaption(&paths, k, k + 1, 0.04, &c).unwrap();
        assert!((cap.price - swn.price).abs() < 1e-12 + 1e-9 * cap.price);
    }
}

#[test]
fn payer_minus_receiver_is_the_forward_swap() {
    let c = curve(6, 0.5);
    let m = LmmModel::new(c.clone(), vols(c.tenor()), brownian()).unwrap();
    let paths = m.simulate_exact(&grid(c.tenor(), 4), 20_000, 3).unwrap();
    let (a, b, strike) = (2, 6, 0.04);
    let payer = swaption_accumulator(&paths, a, b, strike, &c, true).unwrap();
    let receiver = swaption_accumulator(&paths, a, b, strike, &c, false).unwrap();
    let mut diff = McAccumulator::default();
    diff.n = payer.n;
    diff.sum = payer.sum - receiver.sum;
    // a conservative error bar: both legs' errors added
    let se = payer.stderr() + receiver.stderr();
    let want = forward_swap_value(&c, a, b, strike);
    assert!(
        (diff.mean() - want).abs() <= 3.0 * se,
        "{} vs {want}",
        diff.mean()
    );
}

proptest! {
    #[test]
    fn implied_vol_inverts_black(l0 in 0.005f64..0.1, moneyness in 0.5f64..1.8, sigma in 0.05f64..1.0, t in 0.25f64..10.0) {
        let strike = l0 * moneyness;
        let v = sigma * t.sqrt();
        let price = black_caplet(l0, strike, v, 0.5, 0.9).unwrap();
        let intrinsic = 0.45 * (l0 - strike).max(0.0);
        prop_assume!(price - intrinsic > 1e-12 * price);
        let iv = implied_vol(price, l0, strike, 0.5, 0.9, t).unwrap();
        let back = black_caplet(l0, strike, iv * t.sqrt(), 0.5, 0.9).unwrap();
        prop_assert!((back - price).abs() < 1e-12);
    }
}
