//! Drift approximations for the LIBOR market model.
//!
//! * Frozen drift: the weights `Z_l = δL_l/(1+δL_l)` (and the jump products
//!   `Π γ_l`) are fixed at their time-zero values, so the drift is
//!   deterministic and tabulated once per accrual period.
//! * Picard log-normal scheme (Brownian drivers only): `Z_l` is replaced by
//!   its first Picard iterate `Z¹_l(t) = Z⁰_l + ∫A_l ds + ∫B_l dW`, where
//!   Itô's formula applied to `f(L) = δL/(1+δL)` with `f'(L)L = Z(1−Z)` and
//!   `f''(L)L² = −2Z²(1−Z)` gives
//!   `A_l = Z(1−Z)·(−cλ_l Σ_{m>l} Z_m λ_m) − Z²(1−Z)·cλ_l²` and
//!   `B_l = Z(1−Z)·√c λ_l`, both evaluated at `Z = Z⁰_l`.
//!   The zeroth iterate `Z⁰` is exactly the frozen drift.
//! * Strong Taylor scheme: the first variation
//!   `Y(t,T_l) = ∫β̂⁰(s,T_l) ds + ∫λ(s,T_l) dH_s` (the frozen-drift log
//!   increment) gives the predictor `L̃_l = L(0,T_l) e^{Y(s−,T_l)}`; the random
//!   drift terms are then evaluated at `L̃` instead of the unknown state.
//!
//! Every scheme can run on a shared [`DriverPathSet`], so differences between
//! schemes isolate the drift approximation from Monte Carlo noise.

use alloc::vec::Vec;

use libm::{exp, log, sqrt};

use crate::lmm::{run_paths, z_weight, DriftKernel, LmmModel};
use crate::{DriverPathSet, Error, LiborPathSet, Result, Scheme, TimeGrid};

/// Mean and variance of a (log-)Gaussian quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianLaw {
    pub mean: f64,
    pub variance: f64,
}

/// Deterministic drifts `β̂⁰(s,T_k)` with all random terms frozen at time zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TaylorState {
    n: usize,
    delta: f64,
    log_l0: Vec<f64>,
    beta0: Vec<f64>,
    lambda_sq: Vec<f64>,
    lambda_mean: Vec<f64>,
    // variance rate of H: c + intensity·E[J²]
    h_var_rate: f64,
    b: f64,
}

impl TaylorState {
    pub fn new(model: &LmmModel) -> Self {
        let n = model.n();
        let kernel = DriftKernel::new(model);
        let z0 = model.initial_z();
        let mut beta0 = alloc::vec![0.0; n * n];
        for j in 0..n {
            kernel.drifts_from_period(j, 0, &z0, &mut beta0[j * n..(j + 1) * n]);
        }
        let mut lambda_sq = alloc::vec![0.0; n * n];
        let mut lambda_mean = alloc::vec![0.0; n * n];
        for j in 0..n {
            for k in 0..n {
                let l = model.vols().lambda(k, j);
                lambda_sq[j * n + k] = l * l;
                lambda_mean[j * n + k] = l;
            }
        }
        let ch = model.chars();
        let jump_second = if ch.has_jumps() {
            match ch.jump_law {
                crate::JumpLaw::Normal { mean, sd } => mean * mean + sd * sd,
                crate::JumpLaw::DoubleExponential {
                    p,
                    eta_up,
                    eta_down,
                } => 2.0 * p / (eta_up * eta_up) + 2.0 * (1.0 - p) / (eta_down * eta_down),
            }
        } else {
            0.0
        };
        Self {
            n,
            delta: model.delta(),
            log_l0: model.curve().libors().iter().map(|l| log(*l)).collect(),
            beta0,
            lambda_sq,
            lambda_mean,
            h_var_rate: ch.diffusion_c + ch.jump_intensity * jump_second,
            b: ch.drift_b,
        }
    }

    /// `β̂⁰` on accrual period `j` for rate `k`.
    pub fn beta0(&self, k: usize, j: usize) -> f64 {
        self.beta0[j * self.n + k]
    }

    /// Mean and variance of `Y(T_j, T_k)`. The law is Gaussian for a
    /// Brownian driver.
    pub fn first_variation_law(&self, k: usize, j: usize) -> GaussianLaw {
        let mut mean = 0.0;
        let mut variance = 0.0;
        for i in 0..j.min(k) {
            let idx = i * self.n + k;
            mean += (self.beta0[idx] + self.lambda_mean[idx] * self.b) * self.delta;
            variance += self.lambda_sq[idx] * self.h_var_rate * self.delta;
        }
        GaussianLaw { mean, variance }
    }

    /// Law of `log L(T_j, T_k)` under the frozen-drift and law-level Taylor
    /// approximations: `log L(0,T_k) + Y(T_j, T_k)`.
    pub fn log_libor_law(&self, k: usize, j: usize) -> GaussianLaw {
        let y = self.first_variation_law(k, j);
        GaussianLaw {
            mean: self.log_l0[k] + y.mean,
            variance: y.variance,
        }
    }
}

/// Deterministic Picard coefficients at the frozen weights `Z⁰`.
#[derive(Debug, Clone, PartialEq)]
pub struct PicardState {
    n: usize,
    delta: f64,
    z0: Vec<f64>,
    a: Vec<f64>,
    b: Vec<f64>,
}

/// Which Picard iterate replaces the random weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PicardOrder {
    Zero,
    One,
}

pub fn picard1_coefficients(model: &LmmModel) -> Result<PicardState> {
    if model.chars().has_jumps() {
        return Err(Error::UnsupportedScheme("picard1"));
    }
    let n = model.n();
    let c = model.chars().diffusion_c;
    let z0 = model.initial_z();
    let mut a = alloc::vec![0.0; n * n];
    let mut b = alloc::vec![0.0; n * n];
    for j in 0..n {
        let mut s = 0.0;
        for l in (0..n).rev() {
            let lam = model.vols().lambda(l, j);
            let z = z0[l];
            let beta_lg = -c * lam * s;
            a[j * n + l] = z * (1.0 - z) * beta_lg - z * z * (1.0 - z) * c * lam * lam;
            b[j * n + l] = z * (1.0 - z) * sqrt(c) * lam;
            s += z * lam;
        }
    }
    Ok(PicardState {
        n,
        delta: model.delta(),
        z0,
        a,
        b,
    })
}

impl PicardState {
    pub fn z0(&self) -> &[f64] {
        &self.z0
    }

    /// `A_k` on accrual period `j`.
    pub fn a(&self, k: usize, j: usize) -> f64 {
        self.a[j * self.n + k]
    }

    /// `B_k` on accrual period `j` (loading on the standard Brownian motion).
    pub fn b(&self, k: usize, j: usize) -> f64 {
        self.b[j * self.n + k]
    }

    /// Gaussian law of `Z¹(T_j, T_k)`.
    pub fn z1_law(&self, k: usize, j: usize) -> GaussianLaw {
        let mut mean = self.z0[k];
        let mut variance = 0.0;
        for i in 0..j.min(self.n) {
            mean += self.a(k, i) * self.delta;
            variance += self.b(k, i) * self.b(k, i) * self.delta;
        }
        GaussianLaw { mean, variance }
    }
}

pub fn frozen_drift_simulate(
    model: &LmmModel,
    grid: &TimeGrid,
    n_paths: usize,
    seed: u64,
) -> Result<LiborPathSet> {
    let driver = model.chars().simulate(grid, n_paths, seed)?;
    frozen_drift_simulate_on(model, &driver)
}

pub fn frozen_drift_simulate_on(model: &LmmModel, driver: &DriverPathSet) -> Result<LiborPathSet> {
    model.check_grid(driver.grid())?;
    let table = TaylorState::new(model);
    let n = model.n();
    Ok(run_paths(
        model,
        driver,
        Scheme::Frozen,
        |_, _, j, _, out| {
            out.copy_from_slice(&table.beta0[j * n..(j + 1) * n]);
        },
    ))
}

pub fn picard1_simulate(
    model: &LmmModel,
    grid: &TimeGrid,
    n_paths: usize,
    seed: u64,
) -> Result<LiborPathSet> {
    let driver = model.chars().simulate(grid, n_paths, seed)?;
    picard_simulate_on(model, &driver, PicardOrder::One)
}

/// Picard scheme of the given order on a shared driver.
pub fn picard_simulate_on(
    model: &LmmModel,
    driver: &DriverPathSet,
    order: PicardOrder,
) -> Result<LiborPathSet> {
    model.check_grid(driver.grid())?;
    let state = picard1_coefficients(model)?;
    let kernel = DriftKernel::new(model);
    let n = model.n();
    let grid = driver.grid();
    let mut z1 = state.z0.clone();
    let scheme = match order {
        PicardOrder::Zero => Scheme::Picard0,
        PicardOrder::One => Scheme::Picard1,
    };
    Ok(run_paths(model, driver, scheme, |p, step, j, _, out| {
        if step == 0 {
            z1.copy_from_slice(&state.z0);
        }
        kernel.drifts_from_period(j, 0, &z1, out);
        if order == PicardOrder::One {
            let dt = grid.dt(step);
            let dw = driver.dw(p, step);
            for l in j + 1..n {
                z1[l] += state.a[j * n + l] * dt + state.b[j * n + l] * dw;
            }
        }
    }))
}

pub fn taylor_simulate(
    model: &LmmModel,
    grid: &TimeGrid,
    n_paths: usize,
    seed: u64,
) -> Result<LiborPathSet> {
    let driver = model.chars().simulate(grid, n_paths, seed)?;
    taylor_simulate_on(model, &driver)
}

pub fn taylor_simulate_on(model: &LmmModel, driver: &DriverPathSet) -> Result<LiborPathSet> {
    model.check_grid(driver.grid())?;
    let table = TaylorState::new(model);
    let kernel = DriftKernel::new(model);
    let n = model.n();
    let delta = model.delta();
    let grid = driver.grid();
    let mut y = alloc::vec![0.0; n];
    let mut z = alloc::vec![0.0; n];
    Ok(run_paths(
        model,
        driver,
        Scheme::Taylor,
        |p, step, j, _, out| {
            if step == 0 {
                y.iter_mut().for_each(|v| *v = 0.0);
            }
            for l in 0..n {
                z[l] = z_weight(exp(table.log_l0[l] + y[l]), delta);
            }
            kernel.drifts_from_period(j, 0, &z, out);
            let dt = grid.dt(step);
            let dh = driver.dh(p, step);
            for l in j + 1..n {
                y[l] += table.beta0(l, j) * dt + model.vols().lambda(l, j) * dh;
            }
        },
    ))
}

/// Runs `scheme` on a shared driver.
pub fn simulate_scheme_on(
    model: &LmmModel,
    driver: &DriverPathSet,
    scheme: Scheme,
) -> Result<LiborPathSet> {
    match scheme {
        Scheme::Exact => model.simulate_exact_on(driver),
        Scheme::Frozen => frozen_drift_simulate_on(model, driver),
        Scheme::Picard0 => picard_simulate_on(model, driver, PicardOrder::Zero),
        Scheme::Picard1 => picard_simulate_on(model, driver, PicardOrder::One),
        Scheme::Taylor => taylor_simulate_on(model, driver),
        Scheme::ForwardPrice | Scheme::Affine => Err(Error::UnsupportedScheme(scheme.as_str())),
    }
}
