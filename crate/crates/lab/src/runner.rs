//! Chunked, parallel Monte Carlo with a fixed merge order.
//!
//! Paths are split into blocks of global indices; every block draws from
//! its own per-path streams, so the blocks can run on any thread and the
//! results merged in block order are identical to a sequential run.

use libor_core::pricing::{caplet_accumulator, quote_from, CapletQuote, McAccumulator};
use libor_core::{InitialCurve, LiborPathSet, PathRange};
use rayon::prelude::*;

use crate::error::LabError;

pub fn path_chunks(total: usize, chunk: usize) -> Vec<PathRange> {
    let mut out = Vec::new();
    let mut start = 0;
    while start < total {
        let count = chunk.min(total - start);
        out.push(PathRange::new(start as u64, count));
        start += count;
    }
    out
}

/// Runs `f` on every block in parallel and returns the results in block order.
pub fn par_chunks<T, F>(ranges: &[PathRange], f: F) -> Result<Vec<T>, LabError>
where
    T: Send,
    F: Fn(PathRange) -> Result<T, LabError> + Sync + Send,
{
    ranges.par_iter().map(|r| f(*r)).collect()
}

/// Caplet accumulators for every reset index `k = 1..N−1` and strike.
#[derive(Debug, Clone, PartialEq)]
pub struct CapletBook {
    pub n: usize,
    pub strikes: Vec<f64>,
    accs: Vec<McAccumulator>,
}

impl CapletBook {
    pub fn new(n: usize, strikes: &[f64]) -> Self {
        Self {
            n,
            strikes: strikes.to_vec(),
            accs: vec![McAccumulator::default(); n.saturating_sub(1) * strikes.len()],
        }
    }

    pub fn from_paths(
        paths: &LiborPathSet,
        curve: &InitialCurve,
        strikes: &[f64],
    ) -> Result<Self, LabError> {
        let mut book = Self::new(curve.n(), strikes);
        for k in 1..curve.n() {
            for (s, &strike) in strikes.iter().enumerate() {
                book.accs[(k - 1) * strikes.len() + s] =
                    caplet_accumulator(paths, k, strike, curve)?;
            }
        }
        Ok(book)
    }

    pub fn merge(&mut self, other: &CapletBook) {
        for (a, b) in self.accs.iter_mut().zip(&other.accs) {
            a.merge(b);
        }
    }

    pub fn acc(&self, k: usize, s: usize) -> &McAccumulator {
        &self.accs[(k - 1) * self.strikes.len() + s]
    }

    pub fn quotes(&self, curve: &InitialCurve) -> Vec<CapletQuote> {
        let mut out = Vec::new();
        for k in 1..self.n {
            for (s, &strike) in self.strikes.iter().enumerate() {
                out.push(quote_from(*self.acc(k, s), k, strike, curve));
            }
        }
        out
    }
}

/// Merges per-block books in block order.
pub fn merge_books(books: Vec<CapletBook>) -> Option<CapletBook> {
    let mut it = books.into_iter();
    let mut first = it.next()?;
    for b in it {
        first.merge(&b);
    }
    Some(first)
}
