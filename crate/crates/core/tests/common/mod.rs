#![allow(dead_code)]

use libor_core::pricing::McAccumulator;
use libor_core::{
    InitialCurve, JumpLaw, LevyCharacteristics, TenorStructure, TimeGrid, VolatilitySurface,
};

pub fn curve(n: usize, delta: f64) -> InitialCurve {
    let tenor = TenorStructure::new(delta, n).unwrap();
    let libors: Vec<f64> = (0..n).map(|k| 0.03 + 0.0025 * k as f64).collect();
    InitialCurve::from_libors(tenor, &libors).unwrap()
}

pub fn flat_curve(n: usize, delta: f64, rate: f64) -> InitialCurve {
    InitialCurve::flat(TenorStructure::new(delta, n).unwrap(), rate).unwrap()
}

pub fn vols(tenor: &TenorStructure) -> VolatilitySurface {
    let n = tenor.n();
    let rows = (0..n)
        .map(|k| {
            (0..k)
                .map(|j| 0.15 + 0.01 * k as f64 + 0.005 * j as f64)
                .collect()
        })
        .collect();
    VolatilitySurface::from_rows(tenor, rows).unwrap()
}

pub fn brownian() -> LevyCharacteristics {
    LevyCharacteristics::brownian(0.0, 1.0).unwrap()
}

pub fn jumpy() -> LevyCharacteristics {
    LevyCharacteristics::new(
        0.0,
        0.6,
        1.5,
        JumpLaw::Normal {
            mean: -0.1,
            sd: 0.3,
        },
    )
    .unwrap()
}

pub fn grid(tenor: &TenorStructure, steps: usize) -> TimeGrid {
    TimeGrid::refine(tenor, steps, tenor.n() - 1).unwrap()
}

/// `|mean − target| ≤ 3·SE` (with a floor for degenerate estimators).
pub fn within_3se(acc: &McAccumulator, target: f64) -> bool {
    (acc.mean() - target).abs() <= 3.0 * acc.stderr() + 1e-14 * target.abs().max(1.0)
}

pub fn assert_3se(acc: &McAccumulator, target: f64, what: &str) {
    assert!(
        within_3se(acc, target),
        "{what}: mean {} vs {} (se {})",
        acc.mean(),
        target,
        acc.stderr()
    );
}
