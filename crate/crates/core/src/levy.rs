//! The driving Lévy process under the terminal measure.
//!
//! `H_t = b t + √c W_t + Σ_{jumps ≤ t} J − t·intensity·E[J]`: a Brownian
//! motion with drift plus a compensated compound Poisson process. With the
//! compensation `E[H_t] = b t` and the cumulant is
//! `κ(z) = b z + ½ c z² + intensity·(E[e^{zJ}] − 1 − z E[J])`.

use alloc::vec::Vec;

use libm::{exp, sqrt};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Exp, Normal, Poisson, StandardNormal};

use crate::error::invalid;
use crate::math::quad::{gauss_hermite, gauss_laguerre, Rule};
use crate::rng::{path_rng, DRIVER_DOMAIN};
use crate::{Error, PathRange, Result, TimeGrid};

/// Jump-size distribution of the compound Poisson part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JumpLaw {
    Normal {
        mean: f64,
        sd: f64,
    },
    /// Up-jumps with probability `p` and rate `eta_up`, down-jumps with
    /// rate `eta_down`.
    DoubleExponential {
        p: f64,
        eta_up: f64,
        eta_down: f64,
    },
}

impl JumpLaw {
    fn validate(&self) -> Result<()> {
        match *self {
            JumpLaw::Normal { mean, sd } => {
                if !mean.is_finite() || !(sd >= 0.0) || !sd.is_finite() {
                    return Err(invalid(
                        "jump_law",
                        "normal jumps need finite mean and sd >= 0",
                    ));
                }
            }
            JumpLaw::DoubleExponential {
                p,
                eta_up,
                eta_down,
            } => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(invalid(
                        "jump_law",
                        "up-jump probability must lie in [0, 1]",
                    ));
                }
                if !(eta_up > 0.0 && eta_down > 0.0) || !eta_up.is_finite() || !eta_down.is_finite()
                {
                    return Err(invalid("jump_law", "exponential rates must be positive"));
                }
            }
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        match *self {
            JumpLaw::Normal { mean, .. } => mean,
            JumpLaw::DoubleExponential {
                p,
                eta_up,
                eta_down,
            } => p / eta_up - (1.0 - p) / eta_down,
        }
    }

    /// Supremum of `|z|` with `E[e^{zJ}] < ∞` (exclusive for double-exponential jumps).
    pub fn moment_bound(&self) -> f64 {
        match *self {
            JumpLaw::Normal { .. } => f64::INFINITY,
            JumpLaw::DoubleExponential {
                eta_up, eta_down, ..
            } => eta_up.min(eta_down),
        }
    }

    /// `E[e^{zJ}]`, assuming `z` is inside the moment domain.
    pub fn mgf(&self, z: f64) -> f64 {
        match *self {
            JumpLaw::Normal { mean, sd } => exp(mean * z + 0.5 * sd * sd * z * z),
            JumpLaw::DoubleExponential {
                p,
                eta_up,
                eta_down,
            } => p * eta_up / (eta_up - z) + (1.0 - p) * eta_down / (eta_down + z),
        }
    }

    pub fn mgf_complex(&self, z: Complex64) -> Complex64 {
        match *self {
            JumpLaw::Normal { mean, sd } => (z * mean + z * z * (0.5 * sd * sd)).exp(),
            JumpLaw::DoubleExponential {
                p,
                eta_up,
                eta_down,
            } => {
                (p * eta_up) / (Complex64::new(eta_up, 0.0) - z)
                    + ((1.0 - p) * eta_down) / (Complex64::new(eta_down, 0.0) + z)
            }
        }
    }

    /// Quadrature rule for expectations against the jump law.
    fn rule(&self, order: usize) -> Rule {
        match *self {
            JumpLaw::Normal { mean, sd } => {
                let r = gauss_hermite(order);
                Rule {
                    nodes: r.nodes.iter().map(|z| mean + sd * z).collect(),
                    weights: r.weights,
                }
            }
            JumpLaw::DoubleExponential {
                p,
                eta_up,
                eta_down,
            } => {
                let r = gauss_laguerre(order);
                let mut nodes = Vec::with_capacity(2 * order);
                let mut weights = Vec::with_capacity(2 * order);
                for (x, w) in r.nodes.iter().zip(&r.weights) {
                    nodes.push(x / eta_up);
                    weights.push(p * w);
                    nodes.push(-x / eta_down);
                    weights.push((1.0 - p) * w);
                }
                Rule { nodes, weights }
            }
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            JumpLaw::Normal { mean, sd } => Normal::new(mean, sd).expect("validated").sample(rng),
            JumpLaw::DoubleExponential {
                p,
                eta_up,
                eta_down,
            } => {
                if rng.random::<f64>() < p {
                    Exp::new(eta_up).expect("validated").sample(rng)
                } else {
                    -Exp::new(eta_down).expect("validated").sample(rng)
                }
            }
        }
    }
}

/// Characteristic triplet `(b, c, F)` of the driver, with
/// `F = intensity · jump_law`.
#[derive(Debug, Clone, PartialEq)]
pub struct LevyCharacteristics {
    pub drift_b: f64,
    pub diffusion_c: f64,
    pub jump_intensity: f64,
    pub jump_law: JumpLaw,
}

impl LevyCharacteristics {
    pub fn new(
        drift_b: f64,
        diffusion_c: f64,
        jump_intensity: f64,
        jump_law: JumpLaw,
    ) -> Result<Self> {
        if !drift_b.is_finite() {
            return Err(invalid("drift_b", "must be finite"));
        }
        if !(diffusion_c >= 0.0) || !diffusion_c.is_finite() {
            return Err(invalid("diffusion_c", "must be finite and >= 0"));
        }
        if !(jump_intensity >= 0.0) || !jump_intensity.is_finite() {
            return Err(invalid("jump_intensity", "must be finite and >= 0"));
        }
        jump_law.validate()?;
        Ok(Self {
            drift_b,
            diffusion_c,
            jump_intensity,
            jump_law,
        })
    }

    /// Brownian motion with drift `b` and variance rate `c`.
    pub fn brownian(drift_b: f64, diffusion_c: f64) -> Result<Self> {
        Self::new(
            drift_b,
            diffusion_c,
            0.0,
            JumpLaw::Normal { mean: 0.0, sd: 0.0 },
        )
    }

    pub fn has_jumps(&self) -> bool {
        self.jump_intensity > 0.0
    }

    pub fn exp_moment_bound(&self) -> f64 {
        if self.has_jumps() {
            self.jump_law.moment_bound()
        } else {
            f64::INFINITY
        }
    }

    pub fn check_domain(&self, z: f64) -> Result<()> {
        let bound = self.exp_moment_bound();
        let inside = match self.jump_law {
            JumpLaw::Normal { .. } => z.abs() <= bound,
            JumpLaw::DoubleExponential { .. } => z.abs() < bound || !self.has_jumps(),
        };
        if inside && z.is_finite() {
            Ok(())
        } else {
            Err(Error::MomentDomain { value: z, bound })
        }
    }

    /// Jump part of the cumulant: `intensity·(E[e^{zJ}] − 1 − z E[J])`.
    pub fn jump_cumulant(&self, z: f64) -> f64 {
        if !self.has_jumps() {
            return 0.0;
        }
        self.jump_intensity * (self.jump_law.mgf(z) - 1.0 - z * self.jump_law.mean())
    }

    pub fn cumulant(&self, z: f64) -> Result<f64> {
        self.check_domain(z)?;
        Ok(self.cumulant_unchecked(z))
    }

    pub(crate) fn cumulant_unchecked(&self, z: f64) -> f64 {
        self.drift_b * z + 0.5 * self.diffusion_c * z * z + self.jump_cumulant(z)
    }

    /// Cumulant at a complex argument; the real part must lie in the
    /// moment domain.
    pub fn cumulant_complex(&self, z: Complex64) -> Result<Complex64> {
        self.check_domain(z.re)?;
        let mut k = z * self.drift_b + z * z * (0.5 * self.diffusion_c);
        if self.has_jumps() {
            k += (self.jump_law.mgf_complex(z) - 1.0 - z * self.jump_law.mean())
                * self.jump_intensity;
        }
        Ok(k)
    }

    /// Esscher tilt `e^{x·lambda_sum}` relating the compensator under a
    /// forward measure to the terminal one.
    pub fn shifted_compensator_factor(&self, lambda_sum: f64, x: f64) -> Result<f64> {
        self.check_domain(lambda_sum)?;
        Ok(exp(x * lambda_sum))
    }

    /// Quadrature rule for integrals against the Lévy measure `F(dx)`
    /// (weights include the intensity), accurate for exponentials `e^{zx}`
    /// with `|z| ≤ z_max`. The order is raised until the rule reproduces the
    /// closed-form jump cumulant at `±z_max` within `1e-9`.
    pub fn jump_rule(&self, z_max: f64) -> Result<Rule> {
        if !self.has_jumps() {
            return Ok(Rule {
                nodes: Vec::new(),
                weights: Vec::new(),
            });
        }
        self.check_domain(z_max)?;
        let mean = self.jump_law.mean();
        let mut worst = 0.0;
        for order in [24, 48, 96, 160] {
            let mut rule = self.jump_law.rule(order);
            for w in rule.weights.iter_mut() {
                *w *= self.jump_intensity;
            }
            worst = 0.0f64;
            for z in [z_max, -z_max, 0.5 * z_max, -0.5 * z_max] {
                let q = rule.apply(|x| exp(z * x) - 1.0 - z * x);
                let exact = self.jump_intensity * (self.jump_law.mgf(z) - 1.0 - z * mean);
                worst = worst.max((q - exact).abs() / exact.abs().max(1.0));
            }
            if worst < 1e-9 {
                return Ok(rule);
            }
        }
        Err(Error::Numeric(alloc::format!(
            "jump quadrature misses the cumulant by {worst:e} at |z| = {z_max}"
        )))
    }

    /// Simulates the driver on `grid` for paths `0..n_paths`.
    pub fn simulate(&self, grid: &TimeGrid, n_paths: usize, seed: u64) -> Result<DriverPathSet> {
        self.simulate_range(grid, PathRange::first(n_paths), seed, false)
    }

    /// Simulates the block of global path indices `range`.
    ///
    /// With `antithetic`, paths `2q` and `2q+1` share the stream of pair `q`:
    /// the odd path negates every Brownian increment and keeps the jumps.
    pub fn simulate_range(
        &self,
        grid: &TimeGrid,
        range: PathRange,
        seed: u64,
        antithetic: bool,
    ) -> Result<DriverPathSet> {
        if grid.n_steps() == 0 {
            return Err(Error::EmptyGrid);
        }
        range.validate(antithetic)?;
        let n_steps = grid.n_steps();
        let total = range.count * n_steps;
        let mut set = DriverPathSet {
            grid: grid.clone(),
            seed,
            range,
            antithetic,
            dw: Vec::with_capacity(total),
            dh: Vec::with_capacity(total),
            jump_offsets: Vec::with_capacity(total + 1),
            jump_times: Vec::new(),
            jump_sizes: Vec::new(),
        };
        set.jump_offsets.push(0);
        let sqrt_c = sqrt(self.diffusion_c);
        let comp = if self.has_jumps() {
            self.jump_intensity * self.jump_law.mean()
        } else {
            0.0
        };
        let poissons: Vec<Option<Poisson<f64>>> = (0..n_steps)
            .map(|i| {
                let m = self.jump_intensity * grid.dt(i);
                if m > 0.0 {
                    Poisson::new(m).ok()
                } else {
                    None
                }
            })
            .collect();

        let mut step_w = alloc::vec![0.0; n_steps];
        let mut step_jumps: Vec<Vec<(f64, f64)>> = alloc::vec![Vec::new(); n_steps];
        let emit =
            |set: &mut DriverPathSet, sign: f64, step_w: &[f64], step_jumps: &[Vec<(f64, f64)>]| {
                for i in 0..n_steps {
                    let dt = grid.dt(i);
                    let dw = sign * step_w[i];
                    let mut jumps = 0.0;
                    for &(t, x) in &step_jumps[i] {
                        set.jump_times.push(t);
                        set.jump_sizes.push(x);
                        jumps += x;
                    }
                    set.jump_offsets.push(set.jump_sizes.len());
                    set.dw.push(dw);
                    set.dh
                        .push(self.drift_b * dt + sqrt_c * dw + jumps - comp * dt);
                }
            };

        let draw = |stream: u64, step_w: &mut [f64], step_jumps: &mut [Vec<(f64, f64)>]| {
            let mut rng = path_rng(seed, DRIVER_DOMAIN, stream);
            for i in 0..n_steps {
                let dt = grid.dt(i);
                let z: f64 = StandardNormal.sample(&mut rng);
                step_w[i] = sqrt(dt) * z;
                step_jumps[i].clear();
                if let Some(pois) = &poissons[i] {
                    let count = pois.sample(&mut rng) as usize;
                    let t0 = grid.times()[i];
                    for _ in 0..count {
                        let t = t0 + dt * rng.random::<f64>();
                        let x = self.jump_law.sample(&mut rng);
                        step_jumps[i].push((t, x));
                    }
                    step_jumps[i].sort_by(|a, b| a.0.total_cmp(&b.0));
                }
            }
        };

        if antithetic {
            let first_pair = range.start / 2;
            for q in 0..(range.count / 2) as u64 {
                draw(first_pair + q, &mut step_w, &mut step_jumps);
                emit(&mut set, 1.0, &step_w, &step_jumps);
                emit(&mut set, -1.0, &step_w, &step_jumps);
            }
        } else {
            for p in 0..range.count as u64 {
                draw(range.start + p, &mut step_w, &mut step_jumps);
                emit(&mut set, 1.0, &step_w, &step_jumps);
            }
        }
        Ok(set)
    }
}

/// Simulated driver increments on a time grid.
///
/// For every path and step it stores the standard Brownian increment `ΔW`
/// (variance `Δt`), the driver increment `ΔH` and the jumps (time, size)
/// falling into the step.
#[derive(Debug, Clone, PartialEq)]
pub struct DriverPathSet {
    grid: TimeGrid,
    seed: u64,
    range: PathRange,
    antithetic: bool,
    dw: Vec<f64>,
    dh: Vec<f64>,
    jump_offsets: Vec<usize>,
    jump_times: Vec<f64>,
    jump_sizes: Vec<f64>,
}

impl DriverPathSet {
    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn range(&self) -> PathRange {
        self.range
    }

    pub fn antithetic(&self) -> bool {
        self.antithetic
    }

    pub fn n_paths(&self) -> usize {
        self.range.count
    }

    pub fn n_steps(&self) -> usize {
        self.grid.n_steps()
    }

    #[inline]
    pub fn dw(&self, p: usize, step: usize) -> f64 {
        self.dw[p * self.n_steps() + step]
    }

    #[inline]
    pub fn dh(&self, p: usize, step: usize) -> f64 {
        self.dh[p * self.n_steps() + step]
    }

    pub fn path_dh(&self, p: usize) -> &[f64] {
        let n = self.n_steps();
        &self.dh[p * n..(p + 1) * n]
    }

    pub fn path_dw(&self, p: usize) -> &[f64] {
        let n = self.n_steps();
        &self.dw[p * n..(p + 1) * n]
    }

    /// Jump sizes inside step `step` of path `p`, in time order.
    pub fn jump_sizes(&self, p: usize, step: usize) -> &[f64] {
        let i = p * self.n_steps() + step;
        &self.jump_sizes[self.jump_offsets[i]..self.jump_offsets[i + 1]]
    }

    pub fn jump_times(&self, p: usize, step: usize) -> &[f64] {
        let i = p * self.n_steps() + step;
        &self.jump_times[self.jump_offsets[i]..self.jump_offsets[i + 1]]
    }

    /// `H` at grid time index `step` on path `p` (with `H_0 = 0`).
    pub fn h_at(&self, p: usize, step: usize) -> f64 {
        self.path_dh(p)[..step].iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::TenorStructure;

    fn jumpy() -> LevyCharacteristics {
        LevyCharacteristics::new(
            0.0,
            0.04,
            1.5,
            JumpLaw::Normal {
                mean: -0.05,
                sd: 0.1,
            },
        )
        .unwrap()
    }

    #[test]
    fn cumulant_basics() {
        let bm = LevyCharacteristics::brownian(0.0, 1.0).unwrap();
        assert!((bm.cumulant(0.7).unwrap() - 0.245).abs() < 1e-15);
        assert_eq!(jumpy().cumulant(0.0).unwrap(), 0.0);
        let de = LevyCharacteristics::new(
            0.0,
            0.0,
            1.0,
            JumpLaw::DoubleExponential {
                p: 0.4,
                eta_up: 10.0,
                eta_down: 5.0,
            },
        )
        .unwrap();
        assert!(de.cumulant(5.0).is_err());
        assert!(de.cumulant(4.9).is_ok());
    }

    #[test]
    fn complex_cumulant_agrees_on_real_axis() {
        let ch = jumpy();
        let z = Complex64::new(1.3, 0.0);
        assert!((ch.cumulant_complex(z).unwrap().re - ch.cumulant(1.3).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn jump_rule_matches_closed_form() {
        let de = LevyCharacteristics::new(
            0.0,
            0.0,
            2.0,
            JumpLaw::DoubleExponential {
                p: 0.3,
                eta_up: 25.0,
                eta_down: 20.0,
            },
        )
        .unwrap();
        let rule = de.jump_rule(2.0).unwrap();
        let q = rule.apply(|x| exp(1.5 * x) - 1.0 - 1.5 * x);
        assert!((q - de.jump_cumulant(1.5)).abs() < 1e-10);
        assert!(jumpy().jump_rule(3.0).is_ok());
    }

    #[test]
    fn antithetic_pairs_mirror_brownian_part() {
        let tenor = TenorStructure::new(0.5, 2).unwrap();
        let grid = TimeGrid::refine(&tenor, 4, 2).unwrap();
        let ch = jumpy();
        let set = ch
            .simulate_range(&grid, PathRange::new(2, 4), 9, true)
            .unwrap();
        for i in 0..grid.n_steps() {
            assert_eq!(set.dw(0, i), -set.dw(1, i));
            assert_eq!(set.jump_sizes(0, i), set.jump_sizes(1, i));
        }
        let whole = ch
            .simulate_range(&grid, PathRange::new(0, 6), 9, true)
            .unwrap();
        for i in 0..grid.n_steps() {
            assert_eq!(whole.dh(2, i), set.dh(0, i));
            assert_eq!(whole.dh(5, i), set.dh(3, i));
        }
    }
}
