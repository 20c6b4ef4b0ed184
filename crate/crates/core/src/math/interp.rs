use alloc::vec::Vec;

use crate::error::invalid;
use crate::Result;

/// Shape-preserving piecewise cubic Hermite interpolant (PCHIP slopes).
///
/// Monotone data produce a monotone interpolant. Outside the node range the
/// boundary values are returned; [`MonotoneCubic::eval_checked`] reports
/// when that clamping happened.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneCubic {
    xs: Vec<f64>,
    ys: Vec<f64>,
    slopes: Vec<f64>,
}

impl MonotoneCubic {
    pub fn new(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() || xs.is_empty() {
            return Err(invalid(
                "xs",
                "node and value arrays must be non-empty and equal length",
            ));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid(
                "xs",
                "interpolation nodes must be strictly increasing",
            ));
        }
        let n = xs.len();
        let mut slopes = alloc::vec![0.0; n];
        if n >= 2 {
            let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
            let d: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
            if n == 2 {
                slopes[0] = d[0];
                slopes[1] = d[0];
            } else {
                for i in 1..n - 1 {
                    if d[i - 1] * d[i] <= 0.0 {
                        slopes[i] = 0.0;
                    } else {
                        let w1 = 2.0 * h[i] + h[i - 1];
                        let w2 = h[i] + 2.0 * h[i - 1];
                        slopes[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
                    }
                }
                slopes[0] = end_slope(h[0], h[1], d[0], d[1]);
                slopes[n - 1] = end_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
            }
        }
        Ok(Self { xs, ys, slopes })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.ys
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_checked(x).0
    }

    /// Returns the interpolated value and whether `x` fell outside the nodes.
    pub fn eval_checked(&self, x: f64) -> (f64, bool) {
        let n = self.xs.len();
        if n == 1 {
            return (self.ys[0], x != self.xs[0]);
        }
        if x <= self.xs[0] {
            return (self.ys[0], x < self.xs[0]);
        }
        if x >= self.xs[n - 1] {
            return (self.ys[n - 1], x > self.xs[n - 1]);
        }
        let i = self.xs.partition_point(|&v| v <= x) - 1;
        let h = self.xs[i + 1] - self.xs[i];
        let t = (x - self.xs[i]) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let v = h00 * self.ys[i]
            + h10 * h * self.slopes[i]
            + h01 * self.ys[i + 1]
            + h11 * h * self.slopes[i + 1];
        (v, false)
    }
}

// Three-point one-sided end slope with the usual monotonicity fix-ups.
fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if s.signum() != d0.signum() {
        0.0
    } else if d0.signum() != d1.signum() && s.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_nodes_and_clamps() {
        let f = MonotoneCubic::new(vec![0.0, 1.0, 2.0, 4.0], vec![0.0, 1.0, 4.0, 16.0]).unwrap();
        assert_eq!(f.eval(1.0), 1.0);
        assert_eq!(f.eval(4.0), 16.0);
        assert_eq!(f.eval_checked(5.0), (16.0, true));
        assert_eq!(f.eval_checked(-1.0), (0.0, true));
    }

    #[test]
    fn monotone_data_stay_monotone() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 * 0.3).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|&x| if x < 2.0 { x } else { 2.0 + 0.01 * x })
            .collect();
        let f = MonotoneCubic::new(xs, ys).unwrap();
        let mut last = f64::NEG_INFINITY;
        for i in 0..=570 {
            let v = f.eval(i as f64 * 0.01);
            assert!(v >= last - 1e-15);
            last = v;
        }
    }

    #[test]
    fn smooth_function_accuracy() {
        let xs: Vec<f64> = (0..=200).map(|i| -3.0 + 0.03 * i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| libm::exp(x)).collect();
        let f = MonotoneCubic::new(xs, ys).unwrap();
        for i in 0..100 {
            let x = -2.9 + 0.0583 * i as f64;
            assert!((f.eval(x) - libm::exp(x)).abs() / libm::exp(x) < 1e-6);
        }
    }
}
