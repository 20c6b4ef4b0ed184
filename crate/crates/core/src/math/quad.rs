//! Gaussian quadrature rules and adaptive Gauss–Kronrod integration.

use alloc::vec::Vec;
use core::f64::consts::PI;

use libm::{cos, pow, sqrt};

use crate::{Error, Result};

/// Nodes and weights of a quadrature rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Rule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn apply(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Gauss–Hermite rule for the standard normal law: `E[f(Z)] ≈ Σ wᵢ f(zᵢ)`.
///
/// Nodes are found by Newton iteration on the orthonormal Hermite recurrence
/// and rescaled from the `e^{-x²}` weight; the weights sum to one.
pub fn gauss_hermite(n: usize) -> Rule {
    assert!(n >= 1, "gauss_hermite needs at least one node");
    let mut x = alloc::vec![0.0; n];
    let mut w = alloc::vec![0.0; n];
    let pim4 = 1.0 / pow(PI, 0.25);
    let m = n.div_ceil(2);
    let nf = n as f64;
    let mut z = 0.0;
    for i in 0..m {
        z = match i {
            0 => sqrt(2.0 * nf + 1.0) - 1.855_75 * pow(2.0 * nf + 1.0, -1.0 / 6.0),
            1 => z - 1.14 * pow(nf, 0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * sqrt(2.0 / (jf + 1.0)) * p2 - sqrt(jf / (jf + 1.0)) * p3;
            }
            pp = sqrt(2.0 * nf) * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    let s2 = sqrt(2.0);
    let sp = sqrt(PI);
    let mut nodes: Vec<f64> = x.iter().map(|v| v * s2).collect();
    let mut weights: Vec<f64> = w.iter().map(|v| v / sp).collect();
    nodes.reverse();
    weights.reverse();
    Rule { nodes, weights }
}

/// Gauss–Laguerre rule for the unit exponential law: `E[f(E)] ≈ Σ wᵢ f(xᵢ)`.
pub fn gauss_laguerre(n: usize) -> Rule {
    assert!(n >= 1, "gauss_laguerre needs at least one node");
    let nf = n as f64;
    let mut x = alloc::vec![0.0; n];
    let mut w = alloc::vec![0.0; n];
    let mut z = 0.0;
    for i in 0..n {
        let fi = i as f64;
        z = match i {
            0 => 3.0 / (1.0 + 2.4 * nf),
            1 => z + 15.0 / (1.0 + 2.5 * nf),
            _ => {
                let ai = fi - 1.0;
                z + ((1.0 + 2.55 * ai) / (1.9 * ai)) * (z - x[i - 2])
            }
        };
        let mut pp = 0.0;
        let mut p2 = 0.0;
        for _ in 0..200 {
            let mut p1 = 1.0;
            p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf + 1.0 - z) * p2 - jf * p3) / (jf + 1.0);
            }
            pp = (nf * p1 - nf * p2) / z;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        w[i] = -1.0 / (pp * nf * p2);
    }
    Rule {
        nodes: x,
        weights: w,
    }
}

/// Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Rule {
    assert!(n >= 1, "gauss_legendre needs at least one node");
    let nf = n as f64;
    let m = n.div_ceil(2);
    let mut x = alloc::vec![0.0; n];
    let mut w = alloc::vec![0.0; n];
    for i in 0..m {
        let mut z = cos(PI * (i as f64 + 0.75) / (nf + 0.5));
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p1 = 1.0;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
            }
            pp = nf * (z * p1 - p2) / (z * z - 1.0);
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[n - 1 - i] = w[i];
    }
    Rule {
        nodes: x,
        weights: w,
    }
}

const GK_NODES: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const GK_WEIGHTS_K: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const GK_WEIGHTS_G: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One 15-point Kronrod evaluation; returns (integral, error estimate, max |f|).
fn gk15(f: &mut impl FnMut(f64) -> f64, a: f64, b: f64) -> (f64, f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * GK_WEIGHTS_K[7];
    let mut gauss = fc * GK_WEIGHTS_G[3];
    let mut fmax = fc.abs();
    for j in 0..7 {
        let dx = h * GK_NODES[j];
        let f1 = f(c - dx);
        let f2 = f(c + dx);
        fmax = fmax.max(f1.abs()).max(f2.abs());
        kron += GK_WEIGHTS_K[j] * (f1 + f2);
        if j % 2 == 1 {
            gauss += GK_WEIGHTS_G[j / 2] * (f1 + f2);
        }
    }
    (kron * h, ((kron - gauss) * h).abs(), fmax)
}

/// Adaptive Gauss–Kronrod integration of `f` over `[a, b]` to absolute
/// tolerance `tol`.
pub fn integrate(mut f: impl FnMut(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    integrate_with_max(&mut f, a, b, tol).map(|(v, _)| v)
}

fn integrate_with_max(
    f: &mut impl FnMut(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<(f64, f64)> {
    const MAX_SEGMENTS: usize = 20_000;
    let mut stack: Vec<(f64, f64, f64)> = Vec::with_capacity(64);
    stack.push((a, b, tol));
    let mut total = 0.0;
    let mut fmax: f64 = 0.0;
    let mut segments = 0;
    while let Some((lo, hi, tl)) = stack.pop() {
        segments += 1;
        let (v, err, m) = gk15(f, lo, hi);
        fmax = fmax.max(m);
        if !v.is_finite() {
            return Err(Error::Numeric(alloc::format!(
                "non-finite integrand on [{lo}, {hi}]"
            )));
        }
        if err <= tl || (hi - lo) < 1e-13 * (1.0 + lo.abs()) {
            total += v;
        } else if segments > MAX_SEGMENTS {
            return Err(Error::Numeric(alloc::format!(
                "adaptive quadrature did not reach tolerance {tol} on [{a}, {b}]"
            )));
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((lo, mid, 0.5 * tl));
            stack.push((mid, hi, 0.5 * tl));
        }
    }
    Ok((total, fmax))
}

/// Integrates `f` over `[a, ∞)` panel by panel until a whole panel has
/// integrand magnitude below `cutoff`. Panel widths start at `h0` and grow
/// by half each step.
pub fn integrate_to_infinity(
    mut f: impl FnMut(f64) -> f64,
    a: f64,
    h0: f64,
    tol: f64,
    cutoff: f64,
) -> Result<f64> {
    let mut lo = a;
    let mut h = h0;
    let mut total = 0.0;
    for _ in 0..400 {
        let (v, m) = integrate_with_max(&mut f, lo, lo + h, tol)?;
        total += v;
        if m < cutoff {
            return Ok(total);
        }
        lo += h;
        h *= 1.5;
    }
    Err(Error::Numeric(alloc::format!(
        "integrand did not decay below {cutoff} before x = {lo}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use libm::exp;

    #[test]
    fn hermite_reproduces_normal_moments() {
        let r = gauss_hermite(64);
        assert!((r.apply(|_| 1.0) - 1.0).abs() < 1e-14);
        assert!(r.apply(|z| z).abs() < 1e-14);
        assert!((r.apply(|z| z * z) - 1.0).abs() < 1e-13);
        assert!((r.apply(|z| z.powi(4)) - 3.0).abs() < 1e-12);
        // E[e^{0.7 Z}] = e^{0.245}
        assert!((r.apply(|z| exp(0.7 * z)) - exp(0.245)).abs() < 1e-14);
    }

    #[test]
    fn hermite_small_orders() {
        let r = gauss_hermite(1);
        assert_eq!(r.nodes, [0.0]);
        assert!((r.weights[0] - 1.0).abs() < 1e-15);
        let r = gauss_hermite(5);
        assert!((r.apply(|z| z.powi(8)) - 105.0).abs() < 1e-10);
    }

    #[test]
    fn laguerre_reproduces_exponential_moments() {
        let r = gauss_laguerre(32);
        assert!((r.apply(|_| 1.0) - 1.0).abs() < 1e-13);
        assert!((r.apply(|x| x * x * x) - 6.0).abs() < 1e-11);
        // E[e^{0.3 E}] = 1 / 0.7
        assert!((r.apply(|x| exp(0.3 * x)) - 1.0 / 0.7).abs() < 1e-10);
    }

    #[test]
    fn legendre_integrates_polynomials() {
        let r = gauss_legendre(8);
        assert!((r.apply(|x| x.powi(14)) - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn adaptive_integration() {
        let v = integrate(|x| libm::sin(x), 0.0, PI, 1e-13).unwrap();
        assert!((v - 2.0).abs() < 1e-13);
        let v = integrate_to_infinity(|x| exp(-x), 0.0, 1.0, 1e-14, 1e-16).unwrap();
        assert!((v - 1.0).abs() < 1e-13);
    }
}
