//! The Lévy LIBOR market model under the terminal measure.
//!
//! Each rate follows `L(t,T_k) = L(0,T_k) exp(∫_0^t β̂(s,T_k) ds + ∫_0^t λ(s,T_k) dH_s)`
//! with the state-dependent drift
//!
//! `β̂(s,T_k) = −λb − ½λ²c − cλ Σ_{l>k} Z_l λ_l − ∫[(e^{λx} − 1) Π_{l>k} γ_l(x) − λx] F(dx)`,
//!
//! where `Z_l = δL_l/(1+δL_l)`, `γ_l(x) = Z_l (e^{λ_l x} − 1) + 1` and every
//! quantity is evaluated at `s−`. All rates advance together on one driver
//! path; forward measures only enter through density weights.

use alloc::vec::Vec;

use libm::{exp, expm1, log, sqrt};

use crate::error::invalid;
use crate::math::quad::Rule;
use crate::paths::weights_from_factors;
use crate::{
    DriverPathSet, InitialCurve, LevyCharacteristics, LiborPathSet, Result, Scheme, TenorStructure,
    TimeGrid, VolatilitySurface,
};

/// `γ = δL/(1+δL)·(e^{λx} − 1) + 1`.
pub fn gamma_factor(libor: f64, delta: f64, lambda_l: f64, x: f64) -> f64 {
    let z = delta * libor / (1.0 + delta * libor);
    z * expm1(lambda_l * x) + 1.0
}

/// `δL/(1+δL)`.
#[inline]
pub fn z_weight(libor: f64, delta: f64) -> f64 {
    delta * libor / (1.0 + delta * libor)
}

/// Accrual period `j` with `s ∈ (T_j, T_{j+1}]` (period 0 for `s = 0`).
pub fn period_of(tenor: &TenorStructure, s: f64) -> usize {
    let q = s / tenor.delta();
    let j = libm::ceil(q - 1e-12) as isize - 1;
    j.clamp(0, tenor.n() as isize - 1) as usize
}

/// Semimartingale characteristics of the driver under `P_{T_{k+1}}`
/// relative to the terminal measure.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardCharacteristics {
    /// Drift of `W` under `P_{T_{k+1}}`: `√c Σ_{l>k} Z_l λ_l`.
    pub brownian_shift: f64,
    z: Vec<f64>,
    lambdas: Vec<f64>,
}

impl ForwardCharacteristics {
    /// `Y(x) = Π_{l>k} γ_l(x)` with `ν^{T_{k+1}}(dx) = Y(x) ν(dx)`.
    pub fn compensator_factor(&self, x: f64) -> f64 {
        self.z
            .iter()
            .zip(&self.lambdas)
            .map(|(z, l)| z * expm1(l * x) + 1.0)
            .product()
    }
}

/// A calibrated-by-hand LIBOR market model.
#[derive(Debug, Clone)]
pub struct LmmModel {
    curve: InitialCurve,
    vols: VolatilitySurface,
    chars: LevyCharacteristics,
    rule: Rule,
    // Σ_m w_m x_m of the jump rule
    rule_mean: f64,
}

impl LmmModel {
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
        if curve.libors().iter().any(|l| !(*l >= 0.0)) {
            return Err(invalid("curve", "initial LIBOR rates must be non-negative"));
        }
        // the drift needs e^{zx} for z up to Σ_{l≥k} λ_l
        let zmax = vols.max_abs_tail_sum().max(vols.sup_abs());
        chars.check_domain(zmax)?;
        let rule = chars.jump_rule(zmax)?;
        let rule_mean = rule.apply(|x| x);
        Ok(Self {
            curve,
            vols,
            chars,
            rule,
            rule_mean,
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

    pub fn delta(&self) -> f64 {
        self.curve.delta()
    }

    /// The same model with different loadings.
    pub fn with_vols(&self, vols: VolatilitySurface) -> Result<Self> {
        Self::new(self.curve.clone(), vols, self.chars.clone())
    }

    /// `Z_l = δL(0,T_l)/(1+δL(0,T_l))` for every rate.
    pub fn initial_z(&self) -> Vec<f64> {
        self.curve
            .libors()
            .iter()
            .map(|l| z_weight(*l, self.delta()))
            .collect()
    }

    /// Drift `β̂(s,T_k)` at the state `state[l] = L(s−,T_l)`.
    pub fn terminal_drift(&self, state: &[f64], s: f64, k: usize) -> Result<f64> {
        self.check_state(state, k)?;
        if s > self.tenor().date(k) + 1e-12 {
            return Ok(0.0);
        }
        let z: Vec<f64> = state.iter().map(|l| z_weight(*l, self.delta())).collect();
        let kernel = DriftKernel::new(self);
        let mut out = alloc::vec![0.0; self.n()];
        kernel.drifts_from_period(period_of(self.tenor(), s), k, &z, &mut out);
        Ok(out[k])
    }

    pub fn forward_measure_characteristics(
        &self,
        state: &[f64],
        s: f64,
        k: usize,
    ) -> Result<ForwardCharacteristics> {
        self.check_state(state, k)?;
        let j = period_of(self.tenor(), s);
        let mut z = Vec::new();
        let mut lambdas = Vec::new();
        let mut shift = 0.0;
        for l in k + 1..self.n() {
            let zl = z_weight(state[l], self.delta());
            let ll = self.vols.lambda(l, j);
            shift += zl * ll;
            z.push(zl);
            lambdas.push(ll);
        }
        Ok(ForwardCharacteristics {
            brownian_shift: shift * sqrt(self.chars.diffusion_c),
            z,
            lambdas,
        })
    }

    fn check_state(&self, state: &[f64], k: usize) -> Result<()> {
        if state.len() != self.n() {
            return Err(invalid("state", "need one LIBOR per tenor index"));
        }
        if k >= self.n() {
            return Err(crate::Error::IndexOutOfRange {
                index: k,
                max: self.n() - 1,
            });
        }
        if state.iter().any(|l| !(*l >= 0.0)) {
            return Err(invalid("state", "LIBOR states must be non-negative"));
        }
        Ok(())
    }

    pub(crate) fn check_grid(&self, grid: &TimeGrid) -> Result<()> {
        if grid.horizon() + 1 < self.n() {
            return Err(invalid(
                "grid",
                "grid must reach the last reset date T_{N-1}",
            ));
        }
        grid.check_max_step(self.delta() / 4.0)
    }

    /// Exact-drift simulation on a fresh driver.
    pub fn simulate_exact(
        &self,
        grid: &TimeGrid,
        n_paths: usize,
        seed: u64,
    ) -> Result<LiborPathSet> {
        self.check_grid(grid)?;
        let driver = self.chars.simulate(grid, n_paths, seed)?;
        self.simulate_exact_on(&driver)
    }

    /// Exact-drift simulation on a given driver path set.
    pub fn simulate_exact_on(&self, driver: &DriverPathSet) -> Result<LiborPathSet> {
        self.check_grid(driver.grid())?;
        let kernel = DriftKernel::new(self);
        let delta = self.delta();
        let mut z = alloc::vec![0.0; self.n()];
        Ok(run_paths(
            self,
            driver,
            Scheme::Exact,
            |_, _, j, state, out| {
                for (zl, l) in z.iter_mut().zip(state) {
                    *zl = z_weight(*l, delta);
                }
                kernel.drifts_from_period(j, 0, &z, out);
            },
        ))
    }
}

/// Per-period tables for fast drift evaluation.
pub(crate) struct DriftKernel<'a> {
    model: &'a LmmModel,
    // e^{λ(k,j) x_m}, indexed [(j * N + k) * M + m]
    exp_tab: Vec<f64>,
    n_nodes: usize,
}

impl<'a> DriftKernel<'a> {
    pub(crate) fn new(model: &'a LmmModel) -> Self {
        let n = model.n();
        let m = model.rule.len();
        let mut exp_tab = Vec::with_capacity(n * n * m);
        for j in 0..n {
            for k in 0..n {
                let lam = model.vols.lambda(k, j);
                exp_tab.extend(model.rule.nodes.iter().map(|x| exp(lam * x)));
            }
        }
        Self {
            model,
            exp_tab,
            n_nodes: m,
        }
    }

    /// Drifts of all rates `k ≥ first` on period `j` given the weights
    /// `z[l]`; rates that have reset get zero.
    pub(crate) fn drifts_from_period(&self, j: usize, first: usize, z: &[f64], out: &mut [f64]) {
        let n = self.model.n();
        let ch = &self.model.chars;
        let (b, c) = (ch.drift_b, ch.diffusion_c);
        let m = self.n_nodes;
        let weights = &self.model.rule.weights;
        let mut prod = alloc::vec![1.0; m];
        let mut s = 0.0;
        for k in (first.max(j + 1)..n).rev() {
            let lam = self.model.vols.lambda(k, j);
            let mut jump = 0.0;
            if m > 0 {
                let e = &self.exp_tab[(j * n + k) * m..(j * n + k + 1) * m];
                for i in 0..m {
                    jump += weights[i] * (e[i] - 1.0) * prod[i];
                }
                jump -= lam * self.model.rule_mean;
                let zk = z[k];
                for i in 0..m {
                    prod[i] *= zk * (e[i] - 1.0) + 1.0;
                }
            }
            out[k] = -lam * b - 0.5 * lam * lam * c - c * lam * s - jump;
            s += z[k] * lam;
        }
        for o in out.iter_mut().take(first.max(j + 1).min(n)) {
            *o = 0.0;
        }
    }
}

/// Runs the log-Euler recursion on every path of `driver`.
///
/// `drift(p, step, period, state, out)` writes the drifts of the step into
/// `out` given the left-endpoint rates `state`.
pub(crate) fn run_paths(
    model: &LmmModel,
    driver: &DriverPathSet,
    scheme: Scheme,
    mut drift: impl FnMut(usize, usize, usize, &[f64], &mut [f64]),
) -> LiborPathSet {
    let n = model.n();
    let grid = driver.grid();
    let l0 = model.curve.libors();
    let g0: Vec<f64> = l0.iter().map(|l| log(*l)).collect();
    let mut set = LiborPathSet::with_capacity(
        scheme,
        driver.seed(),
        driver.range(),
        driver.antithetic(),
        n,
    );
    let mut g = alloc::vec![0.0; n];
    let mut state = alloc::vec![0.0; n];
    let mut beta = alloc::vec![0.0; n];
    let mut fac = alloc::vec![1.0; n];
    let mut weights = alloc::vec![1.0; n];
    let last_step = grid.tenor_step(n - 1);
    for p in 0..driver.n_paths() {
        g.copy_from_slice(&g0);
        state.copy_from_slice(&l0);
        fac.iter_mut().for_each(|f| *f = 1.0);
        weights.iter_mut().for_each(|w| *w = 1.0);
        set.push_date(&state, &weights);
        let dh = driver.path_dh(p);
        let mut next_date = 1;
        for step in 0..last_step {
            let j = grid.period(step);
            let dt = grid.dt(step);
            drift(p, step, j, &state, &mut beta);
            for k in j + 1..n {
                let dg = beta[k] * dt + model.vols.lambda(k, j) * dh[step];
                g[k] += dg;
                let zk = z_weight(state[k], model.delta());
                fac[k] *= 1.0 + zk * expm1(dg);
                state[k] = exp(g[k]);
            }
            if next_date < n && step + 1 == grid.tenor_step(next_date) {
                weights_from_factors(&fac, &mut weights);
                set.push_date(&state, &weights);
                next_date += 1;
            }
        }
    }
    set
}
