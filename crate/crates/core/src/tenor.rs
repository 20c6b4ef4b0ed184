//! Tenor structure, initial term structure, and the identities that tie
//! bonds, LIBOR rates, forward prices and forward-measure densities.
//!
//! With constant accrual `δ`,
//! `1 + δ L(t, T_k) = B(t, T_k) / B(t, T_{k+1}) = F(t, T_k, T_{k+1})`, and the
//! density of `P_{T_k}` with respect to the terminal measure `P_{T_N}` is the
//! normalized forward price `F(t, T_k, T_N) / F(0, T_k, T_N)`.

use alloc::vec::Vec;

use crate::error::invalid;
use crate::{Error, Result};

/// Equally spaced dates `0 = T_0 < T_1 < … < T_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct TenorStructure {
    delta: f64,
    dates: Vec<f64>,
}

impl TenorStructure {
    pub fn new(delta: f64, n: usize) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(invalid(
                "delta",
                "accrual period must be positive and finite",
            ));
        }
        if n == 0 {
            return Err(invalid("n", "tenor structure needs at least one period"));
        }
        let dates = (0..=n).map(|k| k as f64 * delta).collect();
        Ok(Self { delta, dates })
    }

    /// Builds a tenor from explicit dates, rejecting anything that is not
    /// equally spaced from zero.
    pub fn from_dates(dates: &[f64]) -> Result<Self> {
        if dates.len() < 2 {
            return Err(invalid("dates", "need at least T_0 and T_1"));
        }
        if dates[0] != 0.0 {
            return Err(invalid("dates", "T_0 must be 0"));
        }
        let delta = dates[1] - dates[0];
        let tenor = Self::new(delta, dates.len() - 1)?;
        for (k, (&given, &expected)) in dates.iter().zip(&tenor.dates).enumerate() {
            if (given - expected).abs() > 1e-12 * expected.abs().max(delta) {
                return Err(invalid(
                    "dates",
                    alloc::format!("T_{k} = {given} breaks constant spacing {delta}"),
                ));
            }
        }
        Ok(tenor)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Number of accrual periods `N`.
    pub fn n(&self) -> usize {
        self.dates.len() - 1
    }

    pub fn dates(&self) -> &[f64] {
        &self.dates
    }

    pub fn date(&self, k: usize) -> f64 {
        self.dates[k]
    }

    pub fn check_index(&self, k: usize) -> Result<()> {
        if k > self.n() {
            Err(Error::IndexOutOfRange {
                index: k,
                max: self.n(),
            })
        } else {
            Ok(())
        }
    }
}

/// Initial term structure, stored canonically as bond prices `B(0, T_k)`,
/// `k = 0..=N`.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialCurve {
    tenor: TenorStructure,
    bonds: Vec<f64>,
}

impl InitialCurve {
    pub fn from_bonds(tenor: TenorStructure, bonds: Vec<f64>) -> Result<Self> {
        if bonds.len() != tenor.n() + 1 {
            return Err(invalid("bonds", "need one bond price per tenor date"));
        }
        for (k, &b) in bonds.iter().enumerate() {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::NonPositiveBond { index: k, value: b });
            }
            if b > 1.0 {
                return Err(invalid(
                    "bonds",
                    alloc::format!("B(0,T_{k}) = {b} exceeds 1"),
                ));
            }
        }
        if let Some(k) = bonds.windows(2).position(|w| w[1] > w[0]) {
            return Err(invalid(
                "bonds",
                alloc::format!(
                    "bond prices increase between T_{k} and T_{} (negative LIBOR)",
                    k + 1
                ),
            ));
        }
        Ok(Self { tenor, bonds })
    }

    /// Builds the curve from fixings `L(0, T_k)`, `k = 0..N-1`, with `B(0,T_0) = 1`.
    pub fn from_libors(tenor: TenorStructure, libors: &[f64]) -> Result<Self> {
        if libors.len() != tenor.n() {
            return Err(invalid(
                "libors",
                "need one LIBOR fixing per accrual period",
            ));
        }
        if let Some((k, &l)) = libors
            .iter()
            .enumerate()
            .find(|(_, l)| !(**l >= 0.0 && l.is_finite()))
        {
            return Err(invalid(
                "libors",
                alloc::format!("L(0,T_{k}) = {l} must be non-negative"),
            ));
        }
        let delta = tenor.delta();
        let mut bonds = Vec::with_capacity(libors.len() + 1);
        let mut b = 1.0;
        bonds.push(b);
        for &l in libors {
            b /= 1.0 + delta * l;
            bonds.push(b);
        }
        Self::from_bonds(tenor, bonds)
    }

    pub fn flat(tenor: TenorStructure, libor: f64) -> Result<Self> {
        let libors = alloc::vec![libor; tenor.n()];
        Self::from_libors(tenor, &libors)
    }

    pub fn tenor(&self) -> &TenorStructure {
        &self.tenor
    }

    pub fn bonds(&self) -> &[f64] {
        &self.bonds
    }

    pub fn bond(&self, k: usize) -> f64 {
        self.bonds[k]
    }

    pub fn n(&self) -> usize {
        self.tenor.n()
    }

    pub fn delta(&self) -> f64 {
        self.tenor.delta()
    }

    /// `L(0, T_k) = (B(0,T_k) / B(0,T_{k+1}) - 1) / δ`.
    pub fn libor(&self, k: usize) -> Result<f64> {
        if k >= self.n() {
            return Err(Error::IndexOutOfRange {
                index: k,
                max: self.n() - 1,
            });
        }
        Ok(libor_from_bonds(
            self.bonds[k],
            self.bonds[k + 1],
            self.delta(),
        ))
    }

    pub fn libors(&self) -> Vec<f64> {
        (0..self.n())
            .map(|k| libor_from_bonds(self.bonds[k], self.bonds[k + 1], self.delta()))
            .collect()
    }

    /// `F(0, T_k, T_l) = B(0,T_k) / B(0,T_l)` for `k <= l`.
    pub fn forward_price(&self, k: usize, l: usize) -> Result<f64> {
        self.tenor.check_index(l)?;
        if k > l {
            return Err(invalid(
                "k",
                alloc::format!("forward price needs k <= l, got {k} > {l}"),
            ));
        }
        Ok(self.bonds[k] / self.bonds[l])
    }

    /// Radon–Nikodym weight `dP_{T_k}/dP_{T_N}` at a time `t` on a path,
    /// given the path's one-period forward factors `1 + δ L(t, T_j)` for
    /// `j = k..N-1` (empty for `k = N`).
    pub fn density_chain_weight(&self, k: usize, path_factors: &[f64]) -> Result<f64> {
        self.tenor.check_index(k)?;
        if path_factors.len() != self.n() - k {
            return Err(invalid(
                "path_factors",
                "need one forward factor per period from k to N-1",
            ));
        }
        if let Some(&f) = path_factors.iter().find(|f| !(**f > 0.0)) {
            return Err(invalid(
                "path_factors",
                alloc::format!("non-positive forward price {f}"),
            ));
        }
        let forward: f64 = path_factors.iter().product();
        Ok(forward * self.bonds[self.n()] / self.bonds[k])
    }
}

pub fn libor_from_bonds(b_k: f64, b_next: f64, delta: f64) -> f64 {
    (b_k / b_next - 1.0) / delta
}
