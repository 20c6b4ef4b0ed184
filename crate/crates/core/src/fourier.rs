//! Damped Fourier inversion for call-type payoffs.

use core::cell::Cell;
use core::f64::consts::PI;

use libm::exp;
use num_complex::Complex64;

use crate::error::invalid;
use crate::math::quad::integrate_to_infinity;
use crate::{Error, Result};

/// Damping used when the moment strip is unbounded above.
pub const UNBOUNDED_STRIP_CAP: f64 = 4.0;

/// Midpoint of the admissible damping interval `(0, alpha_max)`, with
/// `alpha_max` capped at [`UNBOUNDED_STRIP_CAP`].
pub fn midpoint_damping(alpha_max: f64) -> Result<f64> {
    if !(alpha_max > 0.0) {
        return Err(invalid(
            "damping",
            "no admissible damping: the moment strip is empty",
        ));
    }
    Ok(0.5 * alpha_max.min(UNBOUNDED_STRIP_CAP))
}

/// `E[(e^X − e^k)^+]` given `log_mgf(u) = log E[e^{uX}]` on the line
/// `Re u = 1 + alpha`, by Fourier inversion of the damped call.
///
/// `scale` is a rough standard deviation of `X` and only sets the first
/// panel width. The frequency integral is truncated once a whole panel stays
/// below `1e-12` relative to the integrand at zero frequency.
pub fn damped_call(
    log_mgf: impl Fn(Complex64) -> Result<Complex64>,
    log_strike: f64,
    alpha: f64,
    scale: f64,
) -> Result<f64> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(invalid("damping", "damping parameter must be positive"));
    }
    let failure: Cell<Option<Error>> = Cell::new(None);
    let integrand = |v: f64| -> f64 {
        let u = Complex64::new(1.0 + alpha, v);
        let lm = match log_mgf(u) {
            Ok(x) => x,
            Err(e) => {
                failure.set(Some(e));
                return 0.0;
            }
        };
        let denom = Complex64::new(alpha * alpha + alpha - v * v, (2.0 * alpha + 1.0) * v);
        let phase = Complex64::new(0.0, -v * log_strike);
        ((lm + phase).exp() / denom).re
    };
    let f0 = integrand(0.0).abs().max(f64::MIN_POSITIVE);
    if let Some(e) = failure.take() {
        return Err(e);
    }
    let h0 = (2.0 / scale.max(1e-6)).min(1e6);
    let integral = integrate_to_infinity(&integrand, 0.0, h0, 1e-14 * f0, 1e-12 * f0)?;
    if let Some(e) = failure.take() {
        return Err(e);
    }
    Ok((exp(-alpha * log_strike) / PI * integral).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::special::norm_cdf;

    #[test]
    fn lognormal_call() {
        let (m, s2): (f64, f64) = (-0.02, 0.04);
        let k = 0.1;
        let price = damped_call(|u| Ok(u * m + u * u * (0.5 * s2)), k, 1.0, s2.sqrt()).unwrap();
        let fwd = (m + 0.5 * s2).exp();
        let s = s2.sqrt();
        let d1 = ((fwd / k.exp()).ln() + 0.5 * s2) / s;
        let black = fwd * norm_cdf(d1) - k.exp() * norm_cdf(d1 - s);
        assert!((price - black).abs() < 1e-11, "{price} vs {black}");
    }
}
