#![allow(dead_code)]

use cahnbc_core::experiments::loglog_slope;
use cahnbc_core::stepper::{self, pack, unpack, RunConfig, State};
use cahnbc_core::{MonotoneGraph, Perturbation, PotentialPair, SlabGrid};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub const FD_STEPS: [f64; 4] = [1e-4, 1e-5, 1e-6, 1e-7];

/// Coarse, well-scaled configuration for directional-derivative checks: unit
/// spacings keep the stencil weights O(1) so that roundoff stays far below the
/// second-order term at the smallest step.
pub fn fd_config(graph: MonotoneGraph) -> RunConfig {
    let grid = SlabGrid::new(8, 8, 8.0, 8.0).unwrap();
    let pair = PotentialPair::symmetric(graph, Perturbation::linear(-1.0));
    let mut cfg = RunConfig::new(grid, pair, grid.constant(0.1));
    cfg.dt = 1.0;
    cfg.eps = 0.1;
    cfg
}

fn random_state(grid: &SlabGrid, rng: &mut StdRng, t: f64) -> State {
    let n = grid.len();
    let u = grid.field_from_vec((0..n).map(|_| rng.random_range(-0.8..0.8)).collect()).unwrap();
    let mu = grid.field_from_vec((0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
    State { u, mu, t }
}

fn inf(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Log-log slope of `‖J·hδ − (R(x + hδ) − R(x))‖∞` over [`FD_STEPS`], one per
/// (state, direction) pair.
pub fn fd_slopes(cfg: &RunConfig, seed: u64, states: usize, directions: usize) -> Vec<f64> {
    let grid = cfg.grid;
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Vec::new();
    for _ in 0..states {
        let old = random_state(&grid, &mut rng, 0.0);
        let new = random_state(&grid, &mut rng, cfg.dt);
        let x = pack(&new.u, &new.mu);
        let r0 = stepper::residual(&new, &old, cfg).unwrap();
        let jac = stepper::jacobian(&new, &old, cfg).unwrap();
        for _ in 0..directions {
            let d: Vec<f64> = (0..x.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut mism = Vec::new();
            for &h in &FD_STEPS {
                let xh: Vec<f64> = x.iter().zip(&d).map(|(a, b)| a + h * b).collect();
                let (u, mu) = unpack(&grid, &xh);
                let r1 = stepper::residual(&State { u, mu, t: cfg.dt }, &old, cfg).unwrap();
                let hd: Vec<f64> = d.iter().map(|v| h * v).collect();
                let jd = jac.mul_vec(&hd);
                let diff: Vec<f64> = (0..x.len()).map(|i| jd[i] - (r1[i] - r0[i])).collect();
                mism.push(inf(&diff));
            }
            out.push(loglog_slope(&FD_STEPS, &mism));
        }
    }
    out
}
