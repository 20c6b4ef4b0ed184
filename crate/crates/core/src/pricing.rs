//! Black's formula, Monte Carlo caplets and swaptions, implied volatility.

use libm::{log, sqrt};

use crate::error::invalid;
use crate::math::roots::brent;
use crate::math::special::norm_cdf;
use crate::{Error, InitialCurve, LiborPathSet, Result};

/// A caplet (or swaption) price with optional Monte Carlo error and Black vol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CapletQuote {
    pub k: usize,
    pub strike: f64,
    pub price: f64,
    pub implied_vol: Option<f64>,
    pub stderr: Option<f64>,
}

/// Running sums of i.i.d. samples; blocks merge in any grouping but the
/// merge order fixes the floating-point result.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct McAccumulator {
    pub n: u64,
    pub sum: f64,
    pub sum_sq: f64,
}

impl McAccumulator {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sum_sq += x * x;
    }

    pub fn merge(&mut self, other: &McAccumulator) {
        self.n += other.n;
        self.sum += other.sum;
        self.sum_sq += other.sum_sq;
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.sum / self.n as f64
        }
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let var = ((self.sum_sq - self.sum * self.sum / n) / (n - 1.0)).max(0.0);
        sqrt(var / n)
    }
}

/// Feeds per-path samples into an accumulator, averaging antithetic pairs
/// first so the standard error reflects the pair correlation.
pub fn accumulate(
    paths: &LiborPathSet,
    mut sample: impl FnMut(usize) -> Result<f64>,
) -> Result<McAccumulator> {
    let mut acc = McAccumulator::default();
    if paths.antithetic {
        for q in 0..paths.n_paths() / 2 {
            acc.push(0.5 * (sample(2 * q)? + sample(2 * q + 1)?));
        }
    } else {
        for p in 0..paths.n_paths() {
            acc.push(sample(p)?);
        }
    }
    Ok(acc)
}

/// `discount·δ·[L0 Φ(d₁) − K Φ(d₂)]` with total volatility `total_vol`.
pub fn black_caplet(
    l0: f64,
    strike: f64,
    total_vol: f64,
    delta: f64,
    discount: f64,
) -> Result<f64> {
    if !(l0 > 0.0) || !(strike > 0.0) {
        return Err(invalid(
            "black_caplet",
            "forward and strike must be positive",
        ));
    }
    if !(total_vol >= 0.0) || !(delta > 0.0) || !(discount > 0.0) {
        return Err(invalid(
            "black_caplet",
            "volatility, accrual and discount must be non-negative",
        ));
    }
    Ok(discount * delta * black_call(l0, strike, total_vol))
}

fn black_call(f: f64, k: f64, v: f64) -> f64 {
    if v == 0.0 {
        return (f - k).max(0.0);
    }
    let d1 = (log(f / k) + 0.5 * v * v) / v;
    f * norm_cdf(d1) - k * norm_cdf(d1 - v)
}

/// Black volatility (per √year over `expiry` years) reproducing `price`.
pub fn implied_vol(
    price: f64,
    l0: f64,
    strike: f64,
    delta: f64,
    discount: f64,
    expiry: f64,
) -> Result<f64> {
    if !(l0 > 0.0) || !(strike > 0.0) {
        return Err(invalid(
            "implied_vol",
            "forward and strike must be positive",
        ));
    }
    if !(expiry > 0.0) {
        return Err(invalid("expiry", "must be positive"));
    }
    let scale = discount * delta;
    let lower = scale * (l0 - strike).max(0.0);
    let upper = scale * l0;
    let tol = 1e-12 * upper;
    if price < lower - tol {
        return Err(Error::PriceOutOfBounds {
            price,
            bound: "intrinsic",
            value: lower,
        });
    }
    if price >= upper {
        return Err(Error::PriceOutOfBounds {
            price,
            bound: "forward",
            value: upper,
        });
    }
    if price <= lower + tol {
        return Ok(0.0);
    }
    let target = price / scale;
    let mut hi = 1.0;
    while black_call(l0, strike, hi) < target {
        hi *= 2.0;
        if hi > 1e3 {
            return Err(Error::PriceOutOfBounds {
                price,
                bound: "forward",
                value: upper,
            });
        }
    }
    let total = brent(|v| black_call(l0, strike, v) - target, 0.0, hi, 1e-15)?;
    Ok(total / sqrt(expiry))
}

/// Discounted caplet payoffs `B(0,T_{k+1})·δ·w·(L(T_k,T_k) − K)^+` with the
/// `P_{T_{k+1}}` density weight `w` at `T_k`.
pub fn caplet_accumulator(
    paths: &LiborPathSet,
    k: usize,
    strike: f64,
    curve: &InitialCurve,
) -> Result<McAccumulator> {
    check_cover(paths, k)?;
    if !paths.has_weights() {
        return Err(Error::MissingWeights);
    }
    let scale = curve.bond(k + 1) * curve.delta();
    accumulate(paths, |p| {
        let w = paths.weight(p, k, k)?;
        Ok(scale * w * (paths.rate(p, k, k) - strike).max(0.0))
    })
}

pub fn mc_caplet(
    paths: &LiborPathSet,
    k: usize,
    strike: f64,
    curve: &InitialCurve,
) -> Result<CapletQuote> {
    let acc = caplet_accumulator(paths, k, strike, curve)?;
    Ok(quote_from(acc, k, strike, curve))
}

/// Turns an accumulated caplet into a quote, attaching a Black vol when
/// one exists.
pub fn quote_from(acc: McAccumulator, k: usize, strike: f64, curve: &InitialCurve) -> CapletQuote {
    let price = acc.mean();
    let implied = match (curve.libor(k), k) {
        (Ok(l0), k) if k > 0 => implied_vol(
            price,
            l0,
            strike,
            curve.delta(),
            curve.bond(k + 1),
            curve.tenor().date(k),
        )
        .ok(),
        _ => None,
    };
    CapletQuote {
        k,
        strike,
        price,
        implied_vol: implied,
        stderr: Some(acc.stderr()),
    }
}

fn check_cover(paths: &LiborPathSet, k: usize) -> Result<()> {
    if k >= paths.n_dates() {
        return Err(Error::DateNotCovered(k));
    }
    Ok(())
}

/// Payer (`payer = true`) or receiver swaption exercised at `T_a` into the
/// swap paying on `T_{a+1}..=T_b`, priced under the terminal measure:
/// `B(0,T_N)·E[Π_{m≥a}(1+δL(T_a,T_m))·A·(±(S − K))^+]` with annuity `A` and
/// swap rate `S` rebuilt from the simulated LIBORs.
pub fn swaption_accumulator(
    paths: &LiborPathSet,
    a: usize,
    b: usize,
    strike: f64,
    curve: &InitialCurve,
    payer: bool,
) -> Result<McAccumulator> {
    check_cover(paths, a)?;
    if b <= a || b > curve.n() {
        return Err(invalid("swap_end_index", "need exercise < swap end <= N"));
    }
    let delta = curve.delta();
    let n = curve.n();
    let bn = curve.bond(n);
    accumulate(paths, |p| {
        Ok(bn * swaption_payoff(paths.rates_at(p, a), a, b, n, strike, delta, payer))
    })
}

pub(crate) fn swaption_payoff(
    rates: &[f64],
    a: usize,
    b: usize,
    n: usize,
    strike: f64,
    delta: f64,
    payer: bool,
) -> f64 {
    let mut bond = 1.0;
    let mut annuity = 0.0;
    for m in a..b {
        bond /= 1.0 + delta * rates[m];
        annuity += delta * bond;
    }
    let swap = (1.0 - bond) / annuity;
    let numeraire_inv: f64 = (a..n).map(|m| 1.0 + delta * rates[m]).product();
    let intrinsic = if payer { swap - strike } else { strike - swap };
    numeraire_inv * annuity * intrinsic.max(0.0)
}

pub fn mc_swaption(
    paths: &LiborPathSet,
    exercise_index: usize,
    swap_end_index: usize,
    strike: f64,
    curve: &InitialCurve,
) -> Result<CapletQuote> {
    let acc = swaption_accumulator(paths, exercise_index, swap_end_index, strike, curve, true)?;
    Ok(CapletQuote {
        k: exercise_index,
        strike,
        price: acc.mean(),
        implied_vol: None,
        stderr: Some(acc.stderr()),
    })
}

/// Value of the forward payer swap: `B(0,T_a) − B(0,T_b) − Kδ Σ B(0,T_i)`.
pub fn forward_swap_value(curve: &InitialCurve, a: usize, b: usize, strike: f64) -> f64 {
    let fixed: f64 = (a + 1..=b).map(|i| curve.bond(i)).sum::<f64>() * curve.delta();
    curve.bond(a) - curve.bond(b) - strike * fixed
}
