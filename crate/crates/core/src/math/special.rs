use core::f64::consts::{FRAC_1_SQRT_2, PI};

use libm::{erfc, exp, lgamma, log, sqrt};

pub fn norm_pdf(x: f64) -> f64 {
    exp(-0.5 * x * x) / sqrt(2.0 * PI)
}

pub fn norm_cdf(x: f64) -> f64 {
    0.5 * erfc(-x * FRAC_1_SQRT_2)
}

/// Regularized lower incomplete gamma function `P(a, x)`.
pub fn gamma_p(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        gamma_p_series(a, x)
    } else {
        1.0 - gamma_q_cont_frac(a, x)
    }
}

/// Regularized upper incomplete gamma function `Q(a, x) = 1 - P(a, x)`.
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_cont_frac(a, x)
    }
}

fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut ap = a;
    let mut term = 1.0 / a;
    let mut sum = term;
    for _ in 0..10_000 {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if term.abs() < sum.abs() * 1e-17 {
            break;
        }
    }
    sum * exp(-x + a * log(x) - lgamma(a))
}

// Modified Lentz evaluation of the continued fraction for Q(a, x).
fn gamma_q_cont_frac(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    exp(-x + a * log(x) - lgamma(a)) * h
}

/// Survival function `P(X > x)` of a noncentral chi-square variable with
/// `dof` degrees of freedom and noncentrality `nc`, summed as a Poisson
/// mixture of central chi-square tails starting from the Poisson mode.
pub fn noncentral_chi2_sf(x: f64, dof: f64, nc: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let half_nc = 0.5 * nc;
    if half_nc == 0.0 {
        return if dof == 0.0 {
            0.0
        } else {
            gamma_q(0.5 * dof, 0.5 * x)
        };
    }
    let mode = libm::floor(half_nc) as u64;
    let log_weight = |j: u64| -half_nc + (j as f64) * log(half_nc) - lgamma(j as f64 + 1.0);
    let term = |j: u64| {
        let shape = 0.5 * dof + j as f64;
        // zero degrees of freedom is a point mass at the origin
        if shape == 0.0 {
            0.0
        } else {
            exp(log_weight(j)) * gamma_q(shape, 0.5 * x)
        }
    };

    let mut sum = 0.0;
    let mut j = mode;
    loop {
        let w = exp(log_weight(j));
        sum += term(j);
        if w < 1e-18 {
            break;
        }
        j += 1;
    }
    let mut j = mode;
    while j > 0 {
        j -= 1;
        let w = exp(log_weight(j));
        sum += term(j);
        if w < 1e-18 {
            break;
        }
    }
    sum.min(1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normal_cdf_reference_values() {
        assert!((norm_cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((norm_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        assert!((norm_cdf(-2.5) - 0.006_209_665_325_776_132).abs() < 1e-16);
    }

    #[test]
    fn incomplete_gamma_exponential_case() {
        // a = 1: P(1, x) = 1 - e^{-x}
        for &x in &[0.1, 1.0, 2.5, 10.0] {
            assert!((gamma_p(1.0, x) - (1.0 - exp(-x))).abs() < 1e-14);
            assert!((gamma_p(1.0, x) + gamma_q(1.0, x) - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn central_chi2_tail_two_dof() {
        // chi-square with 2 dof: P(X > x) = e^{-x/2}
        for &x in &[0.5, 3.0, 9.0] {
            assert!((noncentral_chi2_sf(x, 2.0, 0.0) - exp(-0.5 * x)).abs() < 1e-14);
        }
    }

    #[test]
    fn noncentral_chi2_one_dof_matches_normal() {
        // dof 1, nc = mu^2: X = (Z + mu)^2
        let mu: f64 = 1.3;
        for &x in &[0.2, 1.0, 4.0] {
            let r = sqrt(x);
            let expect = norm_cdf(-r - mu) + norm_cdf(mu - r);
            assert!((noncentral_chi2_sf(x, 1.0, mu * mu) - expect).abs() < 1e-12);
        }
    }
}
