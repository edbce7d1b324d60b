//! Initial data generators.
//!
//! `random_smooth` is the reproducible generator behind the `random-smooth`
//! configuration kind. Its algorithm is fixed:
//!
//! 1. seed a ChaCha8 generator with `seed`;
//! 2. for `kx` in `0..=modes` and `ky` in `0..=modes`, skipping `(0, 0)`, draw
//!    `a`, `b` uniform in `[−1, 1)` (in that loop order, `ky` inner);
//! 3. add `exp(−(kx² + ky²)/modes)·(a·cos(2πkx·x/Lx) + b·sin(2πkx·x/Lx))·cos(πky·y/Ly)`;
//! 4. subtract the discrete mean, rescale to `max |z| = amplitude` and add `mean`.
//!
//! Every mode has zero normal derivative at `y = 0, Ly`.

use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::{Field, SlabGrid};
use crate::math;

pub fn constant(grid: &SlabGrid, m: f64) -> Field {
    grid.constant(m)
}

/// `mean + amplitude·cos(2πkx·x/Lx)·cos(πky·y/Ly)`
pub fn fourier(grid: &SlabGrid, mean: f64, amplitude: f64, kx: usize, ky: usize) -> Field {
    let (lx, ly) = (grid.lx(), grid.ly());
    grid.field_from_fn(|x, y| {
        mean + amplitude * math::cos(2.0 * PI * kx as f64 * x / lx) * math::cos(PI * ky as f64 * y / ly)
    })
}

pub fn random_smooth(grid: &SlabGrid, mean: f64, amplitude: f64, seed: u64, modes: usize) -> Field {
    let modes = modes.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (lx, ly) = (grid.lx(), grid.ly());
    let mut terms = alloc::vec::Vec::new();
    for kx in 0..=modes {
        for ky in 0..=modes {
            if kx == 0 && ky == 0 {
                continue;
            }
            let a: f64 = rng.random_range(-1.0..1.0);
            let b: f64 = rng.random_range(-1.0..1.0);
            let damp = math::exp(-((kx * kx + ky * ky) as f64) / modes as f64);
            terms.push((kx as f64, ky as f64, damp * a, damp * b));
        }
    }
    let mut z = grid.field_from_fn(|x, y| {
        terms
            .iter()
            .map(|&(kx, ky, a, b)| {
                let th = 2.0 * PI * kx * x / lx;
                (a * math::cos(th) + b * math::sin(th)) * math::cos(PI * ky * y / ly)
            })
            .sum()
    });
    let m = grid.mean(&z);
    z.add_constant(-m);
    let peak = z.max_abs();
    if peak > 0.0 {
        z.scale(amplitude / peak);
    }
    z.add_constant(mean);
    z
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn random_smooth_is_reproducible_and_scaled() {
        let g = SlabGrid::unit(16, 12).unwrap();
        let a = random_smooth(&g, 0.1, 0.3, 42, 4);
        let b = random_smooth(&g, 0.1, 0.3, 42, 4);
        assert_eq!(a, b);
        assert!((g.mean(&a) - 0.1).abs() < 1e-14);
        let dev = a.map(|v| v - 0.1).max_abs();
        assert!((dev - 0.3).abs() < 1e-12);
        assert_ne!(a, random_smooth(&g, 0.1, 0.3, 43, 4));
    }

    #[test]
    fn fourier_modes_are_neumann() {
        let g = SlabGrid::unit(16, 12).unwrap();
        let z = fourier(&g, 0.0, 1.0, 1, 2);
        assert!(g.mean(&z).abs() < 1e-14);
        // the one-sided stencil sees a cosine in y only through its O(hy²) defect
        let fine = SlabGrid::unit(16, 23).unwrap();
        let coarse = g.normal_derivative(&z).max_abs();
        let refined = fine.normal_derivative(&fourier(&fine, 0.0, 1.0, 1, 2)).max_abs();
        assert!(coarse / refined > 3.5);
    }
}
