use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::invalid;
use crate::{Error, Result};

/// A contiguous block of global path indices. Simulations are defined per
/// global index, so blocks can be produced independently and concatenated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathRange {
    pub start: u64,
    pub count: usize,
}

impl PathRange {
    pub fn new(start: u64, count: usize) -> Self {
        Self { start, count }
    }

    pub fn first(count: usize) -> Self {
        Self { start: 0, count }
    }

    pub(crate) fn validate(&self, antithetic: bool) -> Result<()> {
        if self.count == 0 {
            return Err(invalid("n_paths", "need at least one path"));
        }
        if antithetic && (!self.start.is_multiple_of(2) || !self.count.is_multiple_of(2)) {
            return Err(invalid(
                "n_paths",
                "antithetic blocks must start and end on pair boundaries",
            ));
        }
        Ok(())
    }
}

/// Which dynamics produced a [`LiborPathSet`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Exact,
    Frozen,
    Picard0,
    Picard1,
    Taylor,
    ForwardPrice,
    Affine,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Exact => "exact",
            Scheme::Frozen => "frozen",
            Scheme::Picard0 => "picard0",
            Scheme::Picard1 => "picard1",
            Scheme::Taylor => "taylor",
            Scheme::ForwardPrice => "fpm",
            Scheme::Affine => "affine",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "exact" => Scheme::Exact,
            "frozen" => Scheme::Frozen,
            "picard0" => Scheme::Picard0,
            "picard1" => Scheme::Picard1,
            "taylor" => Scheme::Taylor,
            "fpm" => Scheme::ForwardPrice,
            "affine" => Scheme::Affine,
            _ => return Err(invalid("scheme", alloc::format!("unknown scheme `{s}`"))),
        })
    }
}

/// Simulated LIBOR rates at the tenor dates, with density weights.
///
/// `rate(p, j, k)` is `L(T_j, T_k)` on path `p` for dates `j = 0..=N-1` and
/// rates `k = 0..N-1` (constant in `j` once `j ≥ k`). `weight(p, j, k)` is
/// the density `dP_{T_{k+1}} / dP_{T_N}` restricted to `F_{T_j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LiborPathSet {
    pub scheme: Scheme,
    pub seed: u64,
    pub range: PathRange,
    pub antithetic: bool,
    pub(crate) n: usize,
    pub(crate) rates: Vec<f64>,
    pub(crate) weights: Option<Vec<f64>>,
}

impl LiborPathSet {
    pub(crate) fn with_capacity(
        scheme: Scheme,
        seed: u64,
        range: PathRange,
        antithetic: bool,
        n: usize,
    ) -> Self {
        let size = range.count * n * n;
        Self {
            scheme,
            seed,
            range,
            antithetic,
            n,
            rates: Vec::with_capacity(size),
            weights: Some(Vec::with_capacity(size)),
        }
    }

    /// Number of accrual periods `N` of the underlying tenor.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn n_paths(&self) -> usize {
        self.range.count
    }

    /// Number of stored tenor dates (`T_0..=T_{N-1}`).
    pub fn n_dates(&self) -> usize {
        self.n
    }

    #[inline]
    fn idx(&self, p: usize, j: usize, k: usize) -> usize {
        (p * self.n + j) * self.n + k
    }

    #[inline]
    pub fn rate(&self, p: usize, j: usize, k: usize) -> f64 {
        self.rates[self.idx(p, j, k)]
    }

    /// All rates `L(T_j, T_k)`, `k = 0..N-1`, on path `p` at date `j`.
    pub fn rates_at(&self, p: usize, j: usize) -> &[f64] {
        let i = self.idx(p, j, 0);
        &self.rates[i..i + self.n]
    }

    pub fn weight(&self, p: usize, j: usize, k: usize) -> Result<f64> {
        let i = self.idx(p, j, k);
        self.weights
            .as_ref()
            .map(|w| w[i])
            .ok_or(Error::MissingWeights)
    }

    pub fn has_weights(&self) -> bool {
        self.weights.is_some()
    }

    /// Drops the density weights (e.g. to exercise the missing-weight path).
    pub fn without_weights(mut self) -> Self {
        self.weights = None;
        self
    }

    pub(crate) fn push_date(&mut self, rates: &[f64], weights: &[f64]) {
        self.rates.extend_from_slice(rates);
        if let Some(w) = self.weights.as_mut() {
            w.extend_from_slice(weights);
        }
    }

    /// Appends another block of the same simulation.
    pub fn append(&mut self, other: LiborPathSet) -> Result<()> {
        if other.n != self.n || other.scheme != self.scheme || other.seed != self.seed {
            return Err(invalid(
                "paths",
                "can only append blocks of the same simulation",
            ));
        }
        if other.range.start != self.range.start + self.range.count as u64 {
            return Err(invalid("paths", "blocks must be contiguous"));
        }
        self.range.count += other.range.count;
        self.rates.extend(other.rates);
        match (self.weights.as_mut(), other.weights) {
            (Some(a), Some(b)) => a.extend(b),
            _ => self.weights = None,
        }
        Ok(())
    }
}

/// Fills the weight slots of one date from the forward factors:
/// `w_k = Π_{l>k} (1 + δL(t,T_l)) / (1 + δL(0,T_l))`.
pub(crate) fn weights_from_factors(factor_ratios: &[f64], out: &mut [f64]) {
    let n = factor_ratios.len();
    let mut acc = 1.0;
    for k in (0..n).rev() {
        out[k] = acc;
        acc *= factor_ratios[k];
    }
}
