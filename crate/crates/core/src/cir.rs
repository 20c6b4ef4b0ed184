//! The CIR process `dX = a(θ − X) dt + σ √X dW`, `X ≥ 0`, as an affine
//! process on `ℝ_{≥0}`.
//!
//! `E_x[e^{u X_t}] = exp(φ_t(u) + ψ_t(u) x)` where the Riccati equations
//! `ψ' = ½σ²ψ² − aψ`, `φ' = aθψ` with `ψ_0 = u`, `φ_0 = 0` have the closed
//! form
//!
//! `ψ_t(u) = u e^{−at} / (1 − c(t) u)`, `φ_t(u) = −(2aθ/σ²) log(1 − c(t) u)`,
//! `c(t) = σ² (1 − e^{−at}) / (2a)` (`σ² t / 2` when `a = 0`).
//!
//! The solution explodes at `u_max(t) = 1 / c(t)`, so the moment domain at
//! horizon `t` is `(−∞, 1/c(t))`. The closed form is used on the whole
//! domain: `1/ψ` solves a linear ODE, so no cancellation occurs near the
//! boundary.

use alloc::vec::Vec;

use libm::{exp, expm1, log1p, sqrt};
use num_complex::Complex64;
use rand_distr::{Distribution, Gamma, Poisson, StandardNormal};

use crate::error::invalid;
use crate::rng::{path_rng, CIR_DOMAIN};
use crate::{Error, PathRange, Result, TimeGrid};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CirParams {
    pub mean_reversion: f64,
    pub long_run_level: f64,
    pub vol_of_vol: f64,
    pub x0: f64,
}

impl CirParams {
    pub fn new(mean_reversion: f64, long_run_level: f64, vol_of_vol: f64, x0: f64) -> Result<Self> {
        let all = [mean_reversion, long_run_level, vol_of_vol, x0];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(invalid("cir", "parameters must be finite"));
        }
        if mean_reversion < 0.0 || long_run_level < 0.0 {
            return Err(invalid(
                "cir",
                "mean reversion and long-run level must be >= 0",
            ));
        }
        if !(vol_of_vol > 0.0) {
            return Err(invalid("vol_of_vol", "must be positive"));
        }
        if x0 < 0.0 {
            return Err(invalid("x0", "initial state must be >= 0"));
        }
        Ok(Self {
            mean_reversion,
            long_run_level,
            vol_of_vol,
            x0,
        })
    }

    /// `c(t) = σ²(1 − e^{−at})/(2a)`.
    pub fn c(&self, t: f64) -> f64 {
        let a = self.mean_reversion;
        let s2 = self.vol_of_vol * self.vol_of_vol;
        if a * t < 1e-10 {
            0.5 * s2 * t * (1.0 - 0.5 * a * t)
        } else {
            -s2 * expm1(-a * t) / (2.0 * a)
        }
    }

    /// Upper end of the moment domain `I_t = (−∞, u_max(t))`.
    pub fn u_max(&self, t: f64) -> f64 {
        if t <= 0.0 {
            f64::INFINITY
        } else {
            1.0 / self.c(t)
        }
    }

    /// `(φ_t(u), ψ_t(u))`.
    pub fn flow(&self, t: f64, u: f64) -> Result<(f64, f64)> {
        if !(t >= 0.0) {
            return Err(invalid("t", "flow time must be >= 0"));
        }
        if t == 0.0 {
            return Ok((0.0, u));
        }
        let c = self.c(t);
        let cu = c * u;
        if !(cu < 1.0) || !u.is_finite() {
            return Err(Error::FlowDomain { u, u_max: 1.0 / c });
        }
        let a = self.mean_reversion;
        let s2 = self.vol_of_vol * self.vol_of_vol;
        let psi = u * exp(-a * t) / (1.0 - cu);
        let phi = -(2.0 * a * self.long_run_level / s2) * log1p(-cu);
        Ok((phi, psi))
    }

    pub fn phi(&self, t: f64, u: f64) -> Result<f64> {
        self.flow(t, u).map(|f| f.0)
    }

    pub fn psi(&self, t: f64, u: f64) -> Result<f64> {
        self.flow(t, u).map(|f| f.1)
    }

    /// Flow at a complex argument with `Re u < u_max(t)`.
    pub fn flow_complex(&self, t: f64, u: Complex64) -> Result<(Complex64, Complex64)> {
        if t == 0.0 {
            return Ok((Complex64::new(0.0, 0.0), u));
        }
        let c = self.c(t);
        if !(c * u.re < 1.0) {
            return Err(Error::FlowDomain {
                u: u.re,
                u_max: 1.0 / c,
            });
        }
        let a = self.mean_reversion;
        let s2 = self.vol_of_vol * self.vol_of_vol;
        let one_minus = Complex64::new(1.0, 0.0) - u * c;
        let psi = u * exp(-a * t) / one_minus;
        let phi = -one_minus.ln() * (2.0 * a * self.long_run_level / s2);
        Ok((phi, psi))
    }

    /// `E_x[e^{u X_t}]`.
    pub fn mgf(&self, t: f64, u: f64, x: f64) -> Result<f64> {
        let (phi, psi) = self.flow(t, u)?;
        Ok(exp(phi + psi * x))
    }

    /// Dimension `4aθ/σ²` of the noncentral χ² transition law.
    pub fn chi2_dof(&self) -> f64 {
        4.0 * self.mean_reversion * self.long_run_level / (self.vol_of_vol * self.vol_of_vol)
    }

    /// Samples `X_{t+dt}` given `X_t = x`: `X = (c/2)·χ'²_d(λ)` with
    /// `λ = 2 x e^{−a dt} / c` and `c = c(dt)`.
    pub fn sample_transition<R: rand::Rng + ?Sized>(&self, x: f64, dt: f64, rng: &mut R) -> f64 {
        let c = self.c(dt);
        let nc = 2.0 * x * exp(-self.mean_reversion * dt) / c;
        0.5 * c * sample_noncentral_chi2(self.chi2_dof(), nc, rng)
    }

    pub fn simulate_cir(&self, grid: &TimeGrid, n_paths: usize, seed: u64) -> Result<CirPathSet> {
        self.simulate_cir_range(grid, PathRange::first(n_paths), seed)
    }

    /// Exact simulation of a block of global path indices; path `p` draws
    /// from its own stream so blocks compose.
    pub fn simulate_cir_range(
        &self,
        grid: &TimeGrid,
        range: PathRange,
        seed: u64,
    ) -> Result<CirPathSet> {
        if grid.n_steps() == 0 {
            return Err(Error::EmptyGrid);
        }
        range.validate(false)?;
        let n_times = grid.n_steps() + 1;
        let mut states = Vec::with_capacity(range.count * n_times);
        for p in 0..range.count as u64 {
            let mut rng = path_rng(seed, CIR_DOMAIN, range.start + p);
            let mut x = self.x0;
            states.push(x);
            for i in 0..grid.n_steps() {
                x = self.sample_transition(x, grid.dt(i), &mut rng);
                states.push(x);
            }
        }
        Ok(CirPathSet {
            grid: grid.clone(),
            seed,
            range,
            states,
        })
    }
}

/// Noncentral χ² draw: `(Z + √λ)² + χ²_{d−1}` when `d > 1`, otherwise a
/// Poisson mixture of central χ² laws.
pub fn sample_noncentral_chi2<R: rand::Rng + ?Sized>(dof: f64, nc: f64, rng: &mut R) -> f64 {
    if dof > 1.0 {
        let z: f64 = StandardNormal.sample(rng);
        let shifted = z + sqrt(nc);
        shifted * shifted + chi2(dof - 1.0, rng)
    } else {
        let k = if nc > 0.0 {
            Poisson::new(0.5 * nc).expect("positive mean").sample(rng)
        } else {
            0.0
        };
        chi2(dof + 2.0 * k, rng)
    }
}

fn chi2<R: rand::Rng + ?Sized>(dof: f64, rng: &mut R) -> f64 {
    if dof <= 0.0 {
        0.0
    } else {
        Gamma::new(0.5 * dof, 2.0)
            .expect("positive shape")
            .sample(rng)
    }
}

/// Simulated CIR states on every grid time.
#[derive(Debug, Clone, PartialEq)]
pub struct CirPathSet {
    grid: TimeGrid,
    seed: u64,
    range: PathRange,
    states: Vec<f64>,
}

impl CirPathSet {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn range(&self) -> PathRange {
        self.range
    }

    pub fn n_paths(&self) -> usize {
        self.range.count
    }

    /// State at grid index `i` on path `p`.
    pub fn state(&self, p: usize, i: usize) -> f64 {
        self.states[p * (self.grid.n_steps() + 1) + i]
    }

    pub fn path(&self, p: usize) -> &[f64] {
        let m = self.grid.n_steps() + 1;
        &self.states[p * m..(p + 1) * m]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flow_boundary_cases() {
        let cir = CirParams::new(0.8, 0.05, 0.3, 0.04).unwrap();
        assert_eq!(cir.flow(0.0, 0.7).unwrap(), (0.0, 0.7));
        assert_eq!(cir.flow(2.0, 0.0).unwrap(), (0.0, 0.0));
        let um = cir.u_max(1.0);
        assert!(cir.flow(1.0, um * (1.0 - 1e-9)).is_ok());
        match cir.flow(1.0, um * (1.0 + 1e-9)) {
            Err(Error::FlowDomain { u_max, .. }) => assert!((u_max - um).abs() < 1e-9 * um),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn complex_flow_matches_real() {
        let cir = CirParams::new(0.5, 0.1, 0.4, 0.2).unwrap();
        let (p, q) = cir.flow(1.3, 2.0).unwrap();
        let (pc, qc) = cir.flow_complex(1.3, Complex64::new(2.0, 0.0)).unwrap();
        assert!((pc.re - p).abs() < 1e-14 && (qc.re - q).abs() < 1e-14);
        assert!(pc.im.abs() < 1e-15);
    }

    #[test]
    fn zero_mean_reversion_limit() {
        let cir = CirParams::new(0.0, 0.0, 0.5, 1.0).unwrap();
        assert!((cir.c(2.0) - 0.25).abs() < 1e-15);
    }
}
