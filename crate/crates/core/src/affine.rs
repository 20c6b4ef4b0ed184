//! The affine LIBOR model driven by a CIR process.
//!
//! For `u` in the moment domain the martingales
//! `M_t^u = E[e^{u X_{T_N}} | F_t] = exp(φ_{T_N−t}(u) + ψ_{T_N−t}(u) X_t)` are
//! at least one when `u ≥ 0` and increase in `u`. Bond quotients are modelled
//! as `B(t,T_k)/B(t,T_N) = M_t^{u_k}` with `u_1 ≥ … ≥ u_N = 0`, so
//!
//! `1 + δL(t,T_k) = M_t^{u_k} / M_t^{u_{k+1}} = exp(A_k(t) + B_k(t) X_t)`,
//! `A_k(t) = φ_{T_N−t}(u_k) − φ_{T_N−t}(u_{k+1})`,
//! `B_k(t) = ψ_{T_N−t}(u_k) − ψ_{T_N−t}(u_{k+1}) ≥ 0`,
//!
//! and rates are non-negative by construction. Under every forward measure
//! `X` stays a time-inhomogeneous affine process. The rate `L(·,T_0)` fixes at
//! time zero and is taken from the initial curve.

use alloc::vec::Vec;

use libm::{exp, log, sqrt};
use num_complex::Complex64;

use crate::cir::CirParams;
use crate::error::invalid;
use crate::fourier::{damped_call, midpoint_damping};
use crate::math::roots::brent;
use crate::math::special::noncentral_chi2_sf;
use crate::{Error, InitialCurve, LiborPathSet, PathRange, Result, Scheme, TimeGrid};

#[derive(Debug, Clone, PartialEq)]
pub struct AffineLiborModel {
    cir: CirParams,
    curve: InitialCurve,
    // u[k] for k = 0..=N; u[0] is unused and kept equal to u[1]
    u: Vec<f64>,
}

/// Coefficients of `log(1 + δL(t,T_k)) = A + B·x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineLiborCoeffs {
    pub a: f64,
    pub b: f64,
}

/// Supremum of `M_0^u` over the moment domain: unbounded unless the state
/// starts and stays at zero.
pub fn attainable_supremum(cir: &CirParams) -> f64 {
    if cir.x0 > 0.0 || cir.mean_reversion * cir.long_run_level > 0.0 {
        f64::INFINITY
    } else {
        1.0
    }
}

/// `M_t^u = exp(φ_{T−t}(u) + ψ_{T−t}(u) x)`.
pub fn martingale_value(cir: &CirParams, u: f64, t: f64, x: f64, horizon: f64) -> Result<f64> {
    if !(t <= horizon) {
        return Err(invalid("t", "time beyond the horizon"));
    }
    cir.mgf(horizon - t, u, x)
}

impl AffineLiborModel {
    /// Fits `u_{N-1}, …, u_1` to the initial curve with `u_N = 0`.
    pub fn fit_initial_curve(curve: InitialCurve, cir: CirParams) -> Result<Self> {
        let n = curve.n();
        let horizon = curve.tenor().date(n);
        let sup = attainable_supremum(&cir);
        let u_max = cir.u_max(horizon);
        let x0 = cir.x0;
        let mut u = alloc::vec![0.0; n + 1];
        for k in (1..n).rev() {
            let target = curve.bond(k) / curve.bond(n);
            let log_target = log(target);
            let lo = u[k + 1];
            let g = |v: f64| -> f64 {
                match cir.flow(horizon, v) {
                    Ok((phi, psi)) => phi + psi * x0 - log_target,
                    Err(_) => f64::INFINITY,
                }
            };
            let glo = g(lo);
            if glo >= 0.0 {
                u[k] = lo;
                continue;
            }
            if !(target < sup) {
                return Err(Error::FitInfeasible {
                    k,
                    target,
                    supremum: sup,
                });
            }
            let mut hi = if u_max.is_finite() {
                0.5 * (lo + u_max)
            } else {
                lo + 1.0
            };
            let mut tries = 0;
            while g(hi) < 0.0 {
                tries += 1;
                if tries > 200 {
                    return Err(Error::FitInfeasible {
                        k,
                        target,
                        supremum: sup,
                    });
                }
                hi = if u_max.is_finite() {
                    0.5 * (hi + u_max)
                } else {
                    2.0 * hi + 1.0
                };
            }
            u[k] = brent(g, lo, hi, 1e-16 * (1.0 + hi.abs()))?;
        }
        u[0] = u[1];
        Ok(Self { cir, curve, u })
    }

    pub fn cir(&self) -> &CirParams {
        &self.cir
    }

    pub fn curve(&self) -> &InitialCurve {
        &self.curve
    }

    pub fn n(&self) -> usize {
        self.curve.n()
    }

    pub fn horizon(&self) -> f64 {
        self.curve.tenor().date(self.n())
    }

    /// `u_k` for `k = 1..=N`.
    pub fn u(&self, k: usize) -> f64 {
        self.u[k]
    }

    pub fn u_seq(&self) -> &[f64] {
        &self.u[1..]
    }

    /// `M_t^{u_k}` at state `x`.
    pub fn martingale(&self, k: usize, t: f64, x: f64) -> Result<f64> {
        martingale_value(&self.cir, self.u[k], t, x, self.horizon())
    }

    pub fn m0(&self, k: usize) -> Result<f64> {
        self.martingale(k, 0.0, self.cir.x0)
    }

    pub fn coeffs(&self, k: usize, t: f64) -> Result<AffineLiborCoeffs> {
        if k == 0 || k >= self.n() {
            return Err(invalid("k", "affine coefficients exist for k = 1..N-1"));
        }
        let r = self.horizon() - t;
        let (pk, qk) = self.cir.flow(r, self.u[k])?;
        let (pn, qn) = self.cir.flow(r, self.u[k + 1])?;
        Ok(AffineLiborCoeffs {
            a: pk - pn,
            b: qk - qn,
        })
    }

    /// `L(t,T_k)` at state `x`.
    pub fn libor_value(&self, k: usize, t: f64, x: f64) -> Result<f64> {
        if k == 0 {
            return self.curve.libor(0);
        }
        let c = self.coeffs(k, t)?;
        Ok(libm::expm1(c.a + c.b * x) / self.curve.delta())
    }

    /// `E_{T_k}[e^{v X_r} | X_s = x_s]` for `s ≤ r ≤ T_N`.
    pub fn forward_measure_mgf(&self, k: usize, v: f64, s: f64, r: f64, x_s: f64) -> Result<f64> {
        let (c0, c1) = self.forward_measure_log_coeffs(k, v, s, r)?;
        Ok(exp(c0 + c1 * x_s))
    }

    /// `(c0, c1)` with `log E_{T_k}[e^{v X_r} | X_s = x] = c0 + c1 x`.
    pub fn forward_measure_log_coeffs(
        &self,
        k: usize,
        v: f64,
        s: f64,
        r: f64,
    ) -> Result<(f64, f64)> {
        self.check_times(k, s, r)?;
        let p = self.cir.psi(self.horizon() - r, self.u[k])?;
        let (a1, b1) = self.cir.flow(r - s, p + v)?;
        let (a0, b0) = self.cir.flow(r - s, p)?;
        Ok((a1 - a0, b1 - b0))
    }

    pub fn forward_measure_log_mgf_complex(
        &self,
        k: usize,
        v: Complex64,
        s: f64,
        r: f64,
        x_s: f64,
    ) -> Result<Complex64> {
        self.check_times(k, s, r)?;
        let p = self.cir.psi(self.horizon() - r, self.u[k])?;
        let (a1, b1) = self.cir.flow_complex(r - s, v + p)?;
        let (a0, b0) = self.cir.flow(r - s, p)?;
        Ok(a1 - a0 + (b1 - b0) * x_s)
    }

    fn check_times(&self, k: usize, s: f64, r: f64) -> Result<()> {
        if k == 0 || k > self.n() {
            return Err(invalid("k", "forward measure index must lie in 1..=N"));
        }
        if !(0.0 <= s && s <= r && r <= self.horizon() + 1e-12) {
            return Err(invalid("times", "need 0 <= s <= r <= T_N"));
        }
        Ok(())
    }

    /// Caplet `B(0,T_{k+1})·δ·E_{T_{k+1}}[(L(T_k,T_k) − K)^+]` by damped Fourier
    /// inversion on `Y = A_k(T_k) + B_k(T_k) X_{T_k}`.
    pub fn caplet_price_affine(&self, k: usize, strike: f64) -> Result<f64> {
        let (discount, kprime, coeffs) = match self.caplet_setup(k, strike)? {
            Setup::Deterministic(v) => return Ok(v),
            Setup::Random(d, kp, c) => (d, kp, c),
        };
        let tk = self.curve.tenor().date(k);
        let p = self.cir.psi(self.horizon() - tk, self.u[k + 1])?;
        let amax = (self.cir.u_max(tk) - p) / coeffs.b - 1.0;
        let alpha = midpoint_damping(amax)?;
        let x0 = self.cir.x0;
        let sd = coeffs.b
            * self.cir.vol_of_vol
            * sqrt((x0.max(self.cir.long_run_level) * tk).max(1e-12));
        let call = damped_call(
            |u| {
                Ok(u * coeffs.a
                    + self.forward_measure_log_mgf_complex(k + 1, u * coeffs.b, 0.0, tk, x0)?)
            },
            log(kprime),
            alpha,
            sd,
        )?;
        Ok(discount * call)
    }

    /// The same caplet from the noncentral χ² law of `X_{T_k}` under
    /// `P_{T_{k+1}}`: with `c = c(T_k)` and `p = ψ_{T_N−T_k}(u_{k+1})` the
    /// tilted state is `(c'/2)·χ'²_d(λ')`, `c' = c/(1 − cp)`,
    /// `λ' = 2 e^{−aT_k} x_0 / (c (1 − cp))`.
    pub fn caplet_price_chi2(&self, k: usize, strike: f64) -> Result<f64> {
        let (discount, kprime, coeffs) = match self.caplet_setup(k, strike)? {
            Setup::Deterministic(v) => return Ok(v),
            Setup::Random(d, kp, c) => (d, kp, c),
        };
        let tk = self.curve.tenor().date(k);
        let c = self.cir.c(tk);
        let p = self.cir.psi(self.horizon() - tk, self.u[k + 1])?;
        let dof = self.cir.chi2_dof();
        let decay = exp(-self.cir.mean_reversion * tk) * self.cir.x0;
        let tilted = |q: f64| -> (f64, f64) {
            let cq = c / (1.0 - c * q);
            (cq, 2.0 * decay / (c * (1.0 - c * q)))
        };
        let x_star = (log(kprime) - coeffs.a) / coeffs.b;
        let (c1, l1) = tilted(p);
        let (c2, l2) = tilted(p + coeffs.b);
        if !(c * (p + coeffs.b) < 1.0) {
            return Err(Error::FlowDomain {
                u: p + coeffs.b,
                u_max: 1.0 / c,
            });
        }
        // E[e^{BX}] under the tilted law, then the doubly tilted tail
        let mgf = libm::pow(1.0 - c1 * coeffs.b, -0.5 * dof)
            * exp(0.5 * l1 * c1 * coeffs.b / (1.0 - c1 * coeffs.b));
        let tail_exp = noncentral_chi2_sf(2.0 * x_star / c2, dof, l2);
        let tail = noncentral_chi2_sf(2.0 * x_star / c1, dof, l1);
        Ok(discount * (exp(coeffs.a) * mgf * tail_exp - kprime * tail).max(0.0))
    }

    fn caplet_setup(&self, k: usize, strike: f64) -> Result<Setup> {
        let n = self.n();
        if k >= n {
            return Err(Error::IndexOutOfRange {
                index: k,
                max: n - 1,
            });
        }
        if !(strike >= 0.0) {
            return Err(invalid(
                "strike",
                "affine caplets need a non-negative strike",
            ));
        }
        let delta = self.curve.delta();
        let discount = self.curve.bond(k + 1);
        let kprime = 1.0 + delta * strike;
        if k == 0 {
            let l = self.curve.libor(0)?;
            return Ok(Setup::Deterministic(
                discount * delta * (l - strike).max(0.0),
            ));
        }
        let tk = self.curve.tenor().date(k);
        let coeffs = self.coeffs(k, tk)?;
        if coeffs.b == 0.0 {
            return Ok(Setup::Deterministic(
                discount * (exp(coeffs.a) - kprime).max(0.0),
            ));
        }
        Ok(Setup::Random(discount, kprime, coeffs))
    }

    pub fn simulate(&self, grid: &TimeGrid, n_paths: usize, seed: u64) -> Result<LiborPathSet> {
        self.simulate_range(grid, PathRange::first(n_paths), seed)
    }

    /// Simulates the CIR state exactly on `grid` and records rates and the
    /// density weights `M_t^{u_{k+1}} / M_0^{u_{k+1}}` at the tenor dates.
    pub fn simulate_range(
        &self,
        grid: &TimeGrid,
        range: PathRange,
        seed: u64,
    ) -> Result<LiborPathSet> {
        let n = self.n();
        if grid.horizon() + 1 < n {
            return Err(invalid(
                "grid",
                "grid must reach the last reset date T_{N-1}",
            ));
        }
        let states = self.cir.simulate_cir_range(grid, range, seed)?;
        let mut set = LiborPathSet::with_capacity(Scheme::Affine, seed, range, false, n);
        let m0: Vec<f64> = (1..=n).map(|k| self.m0(k)).collect::<Result<_>>()?;
        let dates = self.curve.tenor().dates().to_vec();
        // per tenor date: coefficients of log(1 + δL) and of log M^{u_{k+1}}
        let mut lib_coeffs = Vec::with_capacity(n * n);
        let mut mart_coeffs = Vec::with_capacity(n * n);
        for j in 0..n {
            for k in 0..n {
                let t = dates[j.min(k)];
                lib_coeffs.push(if k == 0 {
                    AffineLiborCoeffs { a: 0.0, b: 0.0 }
                } else {
                    self.coeffs(k, t)?
                });
                mart_coeffs.push(self.cir.flow(self.horizon() - dates[j], self.u[k + 1])?);
            }
        }
        let delta = self.curve.delta();
        let l00 = self.curve.libor(0)?;
        let mut rates = alloc::vec![0.0; n];
        let mut weights = alloc::vec![0.0; n];
        for p in 0..range.count {
            for j in 0..n {
                for k in 0..n {
                    let x = states.state(p, grid.tenor_step(j.min(k)));
                    let c = lib_coeffs[j * n + k];
                    rates[k] = if k == 0 {
                        l00
                    } else {
                        libm::expm1(c.a + c.b * x) / delta
                    };
                    let xj = states.state(p, grid.tenor_step(j));
                    let (phi, psi) = mart_coeffs[j * n + k];
                    weights[k] = exp(phi + psi * xj) / m0[k];
                }
                set.push_date(&rates, &weights);
            }
        }
        Ok(set)
    }
}

enum Setup {
    Deterministic(f64),
    Random(f64, f64, AffineLiborCoeffs),
}
