use alloc::vec::Vec;

use crate::error::invalid;
use crate::{Error, Result, TenorStructure};

/// Simulation time grid refining the tenor dates `T_0..=T_h`.
///
/// Every step lies inside exactly one accrual period, so piecewise-constant
/// loadings are constant over each step.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
    // grid index of tenor date T_j, j = 0..=horizon
    tenor_steps: Vec<usize>,
    // accrual period j containing step i (the interval (t_i, t_{i+1}])
    period: Vec<usize>,
}

impl TimeGrid {
    /// Splits each of the first `horizon` accrual periods into
    /// `steps_per_period` equal steps.
    pub fn refine(tenor: &TenorStructure, steps_per_period: usize, horizon: usize) -> Result<Self> {
        if steps_per_period == 0 {
            return Err(invalid("steps_per_period", "must be at least 1"));
        }
        tenor.check_index(horizon)?;
        let mut times = Vec::with_capacity(horizon * steps_per_period + 1);
        let mut tenor_steps = Vec::with_capacity(horizon + 1);
        let mut period = Vec::with_capacity(horizon * steps_per_period);
        times.push(0.0);
        tenor_steps.push(0);
        for j in 0..horizon {
            let (a, b) = (tenor.date(j), tenor.date(j + 1));
            for s in 1..=steps_per_period {
                let t = if s == steps_per_period {
                    b
                } else {
                    a + (b - a) * s as f64 / steps_per_period as f64
                };
                times.push(t);
                period.push(j);
            }
            tenor_steps.push(times.len() - 1);
        }
        Ok(Self {
            times,
            tenor_steps,
            period,
        })
    }

    /// Builds a grid from explicit times; it must start at zero, be strictly
    /// increasing, and contain every tenor date up to its last time.
    pub fn from_times(tenor: &TenorStructure, times: Vec<f64>) -> Result<Self> {
        if times.is_empty() {
            return Err(Error::EmptyGrid);
        }
        if times[0] != 0.0 {
            return Err(invalid("times", "grid must start at 0"));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("times", "grid must be strictly increasing"));
        }
        let end = *times.last().unwrap();
        let tol = 1e-12 * tenor.delta();
        let mut tenor_steps = Vec::new();
        for (j, &tj) in tenor.dates().iter().enumerate() {
            if tj > end + tol {
                break;
            }
            match times.iter().position(|&t| (t - tj).abs() <= tol) {
                Some(i) => tenor_steps.push(i),
                None => {
                    return Err(invalid(
                        "times",
                        alloc::format!("grid misses tenor date T_{j} = {tj}"),
                    ))
                }
            }
        }
        let mut period = Vec::with_capacity(times.len() - 1);
        let mut j = 0;
        for i in 0..times.len() - 1 {
            while j + 1 < tenor_steps.len() && i >= tenor_steps[j + 1] {
                j += 1;
            }
            period.push(j);
        }
        Ok(Self {
            times,
            tenor_steps,
            period,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn n_steps(&self) -> usize {
        self.times.len() - 1
    }

    pub fn dt(&self, step: usize) -> f64 {
        self.times[step + 1] - self.times[step]
    }

    pub fn max_step(&self) -> f64 {
        self.times
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(0.0, f64::max)
    }

    /// Index of the last tenor date covered by the grid.
    pub fn horizon(&self) -> usize {
        self.tenor_steps.len() - 1
    }

    pub fn tenor_step(&self, j: usize) -> usize {
        self.tenor_steps[j]
    }

    pub fn period(&self, step: usize) -> usize {
        self.period[step]
    }

    pub fn check_max_step(&self, max: f64) -> Result<()> {
        let step = self.max_step();
        if step > max * (1.0 + 1e-12) {
            Err(Error::StepTooLarge { step, max })
        } else {
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn refine_hits_tenor_dates() {
        let tenor = TenorStructure::new(0.5, 4).unwrap();
        let g = TimeGrid::refine(&tenor, 4, 3).unwrap();
        assert_eq!(g.n_steps(), 12);
        assert_eq!(g.horizon(), 3);
        for j in 0..=3 {
            assert_eq!(g.times()[g.tenor_step(j)], tenor.date(j));
        }
        assert_eq!(g.period(0), 0);
        assert_eq!(g.period(4), 1);
        assert!((g.max_step() - 0.125).abs() < 1e-15);
        assert!(g.check_max_step(0.125).is_ok());
        assert!(g.check_max_step(0.1).is_err());
    }

    #[test]
    fn explicit_times_must_contain_tenor_dates() {
        let tenor = TenorStructure::new(0.5, 2).unwrap();
        assert!(TimeGrid::from_times(&tenor, vec![0.0, 0.3, 0.7]).is_err());
        assert!(matches!(
            TimeGrid::from_times(&tenor, vec![]),
            Err(Error::EmptyGrid)
        ));
        let g = TimeGrid::from_times(&tenor, vec![0.0, 0.2, 0.5, 0.9, 1.0]).unwrap();
        assert_eq!(g.horizon(), 2);
        assert_eq!(g.period(2), 1);
    }
}
