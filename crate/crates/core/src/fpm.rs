//! The forward price model.
//!
//! Forward prices `F_k = 1 + δL(·,T_k)` are exponentials of the driver with
//! deterministic loadings, `F_k(t) = F_k(0) exp(∫β(s,T_k) ds + ∫λ(s,T_k) dH_s)`.
//! With `Λ_k = Σ_{l>k} λ_l` the density `dP_{T_{k+1}}/dP_{T_N}` equals
//! `exp(∫Λ_k dH − ∫κ(Λ_k) ds)`, an Esscher transform, so under every forward
//! measure the driver stays a time-inhomogeneous Lévy process: the Brownian
//! part is shifted by `Λ_k √c` and the compensator tilted by `e^{xΛ_k}`.
//! The martingale drift is `β(s,T_k) = −[κ(λ_k + Λ_k) − κ(Λ_k)]`.
//! Nothing keeps `F_k` above one, so rates can turn negative.

use alloc::vec::Vec;

use libm::{exp, log, sqrt};
use num_complex::Complex64;

use crate::error::invalid;
use crate::fourier::{damped_call, midpoint_damping};
use crate::lmm::period_of;
use crate::paths::weights_from_factors;
use crate::{
    DriverPathSet, Error, InitialCurve, LevyCharacteristics, LiborPathSet, Result, Scheme,
    TenorStructure, TimeGrid, VolatilitySurface,
};

#[derive(Debug, Clone)]
pub struct FpmModel {
    curve: InitialCurve,
    vols: VolatilitySurface,
    chars: LevyCharacteristics,
    // β(·,T_k) and κ(Λ_k) per period, indexed [j * N + k]
    drift_table: Vec<f64>,
    tilt_table: Vec<f64>,
}

impl FpmModel {
    pub fn new(
        curve: InitialCurve,
        vols: VolatilitySurface,
        chars: LevyCharacteristics,
    ) -> Result<Self> {
        if vols.n() != curve.n() {
            return Err(invalid(
                "vols",
                "surface and curve have different tenor counts",
            ));
        }
        let n = curve.n();
        let mut drift_table = alloc::vec![0.0; n * n];
        let mut tilt_table = alloc::vec![0.0; n * n];
        for j in 0..n {
            let mut tail = 0.0;
            for k in (0..n).rev() {
                let lam = vols.lambda(k, j);
                let k_tail = chars.cumulant(tail)?;
                tilt_table[j * n + k] = k_tail;
                drift_table[j * n + k] = -(chars.cumulant(lam + tail)? - k_tail);
                tail += lam;
            }
        }
        Ok(Self {
            curve,
            vols,
            chars,
            drift_table,
            tilt_table,
        })
    }

    pub fn curve(&self) -> &InitialCurve {
        &self.curve
    }

    pub fn tenor(&self) -> &TenorStructure {
        self.curve.tenor()
    }

    pub fn vols(&self) -> &VolatilitySurface {
        &self.vols
    }

    pub fn chars(&self) -> &LevyCharacteristics {
        &self.chars
    }

    pub fn n(&self) -> usize {
        self.curve.n()
    }

    /// `Λ_k = Σ_{l>k} λ(·,T_l)` on period `j`.
    pub fn tail_loading(&self, k: usize, j: usize) -> f64 {
        (k + 1..self.n()).map(|l| self.vols.lambda(l, j)).sum()
    }

    /// Deterministic drift `β(s,T_k)`.
    pub fn fpm_drift(&self, s: f64, k: usize) -> Result<f64> {
        self.tenor().check_index(k)?;
        if k == self.n() {
            return Err(Error::IndexOutOfRange {
                index: k,
                max: self.n() - 1,
            });
        }
        if s > self.tenor().date(k) + 1e-12 {
            return Ok(0.0);
        }
        Ok(self.drift(k, period_of(self.tenor(), s)))
    }

    fn drift(&self, k: usize, j: usize) -> f64 {
        self.drift_table[j * self.n() + k]
    }

    /// `∫_0^{T_j} κ(Λ_k(s)) ds`, the deterministic part of the log-density
    /// of `P_{T_{k+1}}` at `T_j`.
    pub fn log_density_compensator(&self, k: usize, j: usize) -> f64 {
        let n = self.n();
        (0..j)
            .map(|i| self.tilt_table[i * n + k] * self.tenor().delta())
            .sum()
    }

    pub fn simulate_fpm(&self, grid: &TimeGrid, n_paths: usize, seed: u64) -> Result<LiborPathSet> {
        let driver = self.chars.simulate(grid, n_paths, seed)?;
        self.simulate_fpm_on(&driver)
    }

    /// Exact simulation on the driver grid; the stored weights use the
    /// Esscher form `exp(∫Λ_k dH − ∫κ(Λ_k) ds)`.
    pub fn simulate_fpm_on(&self, driver: &DriverPathSet) -> Result<LiborPathSet> {
        let n = self.n();
        let grid = driver.grid();
        if grid.horizon() + 1 < n {
            return Err(invalid(
                "grid",
                "grid must reach the last reset date T_{N-1}",
            ));
        }
        let delta = self.curve.delta();
        let l0 = self.curve.libors();
        let logf0: Vec<f64> = l0.iter().map(|l| log(1.0 + delta * l)).collect();
        let mut set = LiborPathSet::with_capacity(
            Scheme::ForwardPrice,
            driver.seed(),
            driver.range(),
            driver.antithetic(),
            n,
        );
        let mut logf = alloc::vec![0.0; n];
        let mut rates = alloc::vec![0.0; n];
        let mut tilt_int = alloc::vec![0.0; n];
        let mut weights = alloc::vec![1.0; n];
        let last = grid.tenor_step(n - 1);
        for p in 0..driver.n_paths() {
            logf.copy_from_slice(&logf0);
            rates.copy_from_slice(&l0);
            tilt_int.iter_mut().for_each(|v| *v = 0.0);
            weights.iter_mut().for_each(|w| *w = 1.0);
            set.push_date(&rates, &weights);
            let dh = driver.path_dh(p);
            let mut next = 1;
            for step in 0..last {
                let j = grid.period(step);
                let dt = grid.dt(step);
                let mut tail = 0.0;
                for k in (0..n).rev() {
                    let lam = self.vols.lambda(k, j);
                    tilt_int[k] += tail * dh[step] - self.tilt_table[j * n + k] * dt;
                    if k > j {
                        logf[k] += self.drift(k, j) * dt + lam * dh[step];
                    }
                    tail += lam;
                }
                if next < n && step + 1 == grid.tenor_step(next) {
                    for k in 0..n {
                        rates[k] = (exp(logf[k]) - 1.0) / delta;
                        weights[k] = exp(tilt_int[k]);
                    }
                    set.push_date(&rates, &weights);
                    next += 1;
                }
            }
        }
        Ok(set)
    }

    /// Density weights recomputed from the simulated forward prices,
    /// `Π_{l>k} F_l(T_j) / F_l(0)`.
    pub fn telescoped_weights(&self, paths: &LiborPathSet, p: usize, j: usize) -> Vec<f64> {
        let delta = self.curve.delta();
        let l0 = self.curve.libors();
        let ratios: Vec<f64> = (0..self.n())
            .map(|k| (1.0 + delta * paths.rate(p, j, k)) / (1.0 + delta * l0[k]))
            .collect();
        let mut out = alloc::vec![0.0; self.n()];
        weights_from_factors(&ratios, &mut out);
        out
    }

    /// `log E_{T_{k+1}}[e^{u log F_k(T_k)}]` for complex `u`.
    pub fn forward_log_mgf(&self, k: usize, u: Complex64) -> Result<Complex64> {
        let delta = self.curve.delta();
        let logf0 = log(1.0 + delta * self.curve.libor(k)?);
        let mut acc = u * logf0;
        for j in 0..k {
            let lam = self.vols.lambda(k, j);
            let tail = self.tail_loading(k, j);
            let shifted =
                self.chars.cumulant_complex(u * lam + tail)? - self.tilt_table[j * self.n() + k];
            acc += (u * self.drift(k, j) + shifted) * delta;
        }
        Ok(acc)
    }

    /// Largest damping `α` with `(1+α)λ_k + Λ_k` inside the moment domain on
    /// every period before `T_k`.
    fn damping_bound(&self, k: usize) -> f64 {
        let bound = self.chars.exp_moment_bound();
        if !bound.is_finite() {
            return f64::INFINITY;
        }
        let mut amax = f64::INFINITY;
        for j in 0..k {
            let lam = self.vols.lambda(k, j);
            let tail = self.tail_loading(k, j);
            if lam.abs() > 0.0 {
                let hi = ((bound - tail) / lam.abs()).min((bound + tail) / lam.abs());
                amax = amax.min(hi - 1.0);
            }
        }
        amax
    }

    /// Caplet `B(0,T_{k+1})·δ·E_{T_{k+1}}[(L(T_k,T_k) − K)^+]` by damped
    /// Fourier inversion on `log F_k(T_k)`.
    pub fn fpm_caplet_fourier(&self, k: usize, strike: f64) -> Result<f64> {
        let delta = self.curve.delta();
        if k >= self.n() {
            return Err(Error::IndexOutOfRange {
                index: k,
                max: self.n() - 1,
            });
        }
        if !(1.0 + delta * strike > 0.0) {
            return Err(invalid("strike", "strike must exceed -1/δ"));
        }
        let discount = self.curve.bond(k + 1);
        let variance: f64 = (0..k)
            .map(|j| {
                let l = self.vols.lambda(k, j);
                l * l * delta
            })
            .sum();
        let log_strike = log(1.0 + delta * strike);
        if variance == 0.0 {
            let f0 = 1.0 + delta * self.curve.libor(k)?;
            return Ok(discount * (f0 - (1.0 + delta * strike)).max(0.0));
        }
        let alpha = midpoint_damping(self.damping_bound(k))?;
        let scale =
            sqrt(variance * (self.chars.diffusion_c + self.chars.jump_intensity * 0.01).max(1e-12));
        let call = damped_call(|u| self.forward_log_mgf(k, u), log_strike, alpha, scale)?;
        Ok(discount * call)
    }
}
