use alloc::vec::Vec;

use crate::error::invalid;
use crate::{Result, TenorStructure};

/// Deterministic loadings `λ(t, T_k)`, piecewise constant between tenor
/// dates and zero after the reset date `T_k`.
///
/// Row `k` holds the values on the periods `(T_j, T_{j+1}]`, `j < k`. Row 0
/// is empty because `L(·, T_0)` is fixed at time zero.
#[derive(Debug, Clone, PartialEq)]
pub struct VolatilitySurface {
    rows: Vec<Vec<f64>>,
}

impl VolatilitySurface {
    pub fn from_rows(tenor: &TenorStructure, rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = tenor.n();
        if rows.len() != n {
            return Err(invalid(
                "vols",
                alloc::format!("expected {n} rows (k = 0..N-1)"),
            ));
        }
        for (k, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(invalid(
                    "vols",
                    alloc::format!("row {k} needs {k} period values, got {}", row.len()),
                ));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(invalid(
                    "vols",
                    alloc::format!("row {k} has non-finite values"),
                ));
            }
        }
        Ok(Self { rows })
    }

    pub fn flat(tenor: &TenorStructure, value: f64) -> Result<Self> {
        Self::from_rows(
            tenor,
            (0..tenor.n()).map(|k| alloc::vec![value; k]).collect(),
        )
    }

    /// One constant loading per rate, `values[k]` for `k = 0..N-1`.
    pub fn per_rate(tenor: &TenorStructure, values: &[f64]) -> Result<Self> {
        if values.len() != tenor.n() {
            return Err(invalid("vols", "need one value per rate"));
        }
        Self::from_rows(
            tenor,
            (0..tenor.n()).map(|k| alloc::vec![values[k]; k]).collect(),
        )
    }

    pub fn zero(tenor: &TenorStructure) -> Self {
        Self::flat(tenor, 0.0).expect("zero surface is valid")
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    /// `λ(t, T_k)` on accrual period `j`.
    pub fn lambda(&self, k: usize, period: usize) -> f64 {
        self.rows[k].get(period).copied().unwrap_or(0.0)
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn sup_abs(&self) -> f64 {
        self.rows.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest `|Σ_{l≥k} λ(t, T_l)|` over all periods and starting indices.
    pub fn max_abs_tail_sum(&self) -> f64 {
        let n = self.n();
        let mut m: f64 = 0.0;
        for j in 0..n {
            let mut acc = 0.0;
            for k in (0..n).rev() {
                acc += self.lambda(k, j);
                m = m.max(acc.abs());
            }
        }
        m
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().flatten().all(|v| *v == 0.0)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            rows: self
                .rows
                .iter()
                .map(|r| r.iter().map(|v| v * factor).collect())
                .collect(),
        }
    }

    /// `∫_0^{T_m} λ(s, T_k)² ds` over whole periods.
    pub fn integrated_variance(&self, tenor: &TenorStructure, k: usize, m: usize) -> f64 {
        (0..m.min(k))
            .map(|j| {
                let l = self.lambda(k, j);
                l * l * tenor.delta()
            })
            .sum()
    }
}
