//! Backward Euler for the Yosida-regularized system, one Newton solve per step.
//!
//! Unknowns are interleaved per node: `u_p` at `2p`, `μ_p` at `2p + 1`. Row
//! `2p` is the mass equation
//!
//! ```text
//! (u⁺ − u)/Δt − Δᴺμ⁺ = 0
//! ```
//!
//! and row `2p + 1` the chemical potential equation
//!
//! ```text
//! μ⁺ − τ(u⁺ − u)/Δt + Δᴺu⁺ − β_ε(u⁺) − π(u°) + g − [p ∈ Γ]·(2/hy)·B = 0,
//! B = (u_Γ⁺ − u_Γ)/Δt − κΔ_Γu_Γ⁺ + β_Γ,ε(u_Γ⁺) + π_Γ(u_Γ°) − g_Γ.
//! ```
//!
//! `Δᴺ` is the mirror-closed Laplacian. On boundary rows `Δᴺu + (2/hy)∂_νu` is
//! the full Laplacian of [`SlabGrid::laplacian`], so the lift states the
//! dynamic boundary condition `∂_νu = −B` inside the bulk equation. Testing
//! the two rows with the quadrature weights reproduces the continuous energy
//! identity term by term, which is what makes the convex splitting
//! unconditionally stable.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::geometry::{BoundaryField, Field, SlabGrid};
use crate::graphs::PotentialPair;
use crate::linalg::{BandLu, SparseMatrix};
use crate::math;
use crate::{Error, Result};

/// Treatment of the perturbations `π`, `π_Γ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Splitting {
    /// `β_ε` implicit, `π` explicit.
    #[default]
    ImplicitConvex,
    FullyImplicit,
}

/// Data that may depend on time. Tables are piecewise constant: the value at
/// `t` is the last entry whose start time is `≤ t`.
#[derive(Clone)]
pub enum TimeData<T> {
    Constant(T),
    Table(Vec<(f64, T)>),
    Function(Arc<dyn Fn(f64) -> T + Send + Sync>),
}

impl<T: Clone> TimeData<T> {
    pub fn at(&self, t: f64) -> T {
        match self {
            TimeData::Constant(v) => v.clone(),
            TimeData::Table(rows) => {
                let mut cur = &rows[0].1;
                for (start, v) in rows {
                    if *start <= t + 1e-12 {
                        cur = v;
                    } else {
                        break;
                    }
                }
                cur.clone()
            }
            TimeData::Function(f) => f(t),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, TimeData::Constant(_))
    }
}

impl<T: fmt::Debug> fmt::Debug for TimeData<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TimeData::Constant(v) => f.debug_tuple("Constant").field(v).finish(),
            TimeData::Table(rows) => f.debug_tuple("Table").field(&rows.len()).finish(),
            TimeData::Function(_) => f.write_str("Function(..)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub grid: SlabGrid,
    pub tau: f64,
    pub kappa: f64,
    pub eps: f64,
    pub dt: f64,
    pub t_end: f64,
    pub potentials: PotentialPair,
    pub g: TimeData<Field>,
    pub g_gamma: TimeData<BoundaryField>,
    pub u0: Field,
    /// Newton stops once `‖R‖∞ ≤ newton_tol·(1 + s)`, `s` the largest single
    /// term entering the residual.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Relative residual below which a direct solve is accepted without
    /// iterative refinement.
    pub linear_tol: f64,
    pub splitting: Splitting,
}

impl RunConfig {
    /// Zero data, `τ = κ = 1`, `ε = 0.01`, `Δt = 1e−3`, `T = 0.1`.
    pub fn new(grid: SlabGrid, potentials: PotentialPair, u0: Field) -> Self {
        RunConfig {
            grid,
            tau: 1.0,
            kappa: 1.0,
            eps: 0.01,
            dt: 1e-3,
            t_end: 0.1,
            potentials,
            g: TimeData::Constant(grid.zeros()),
            g_gamma: TimeData::Constant(grid.boundary_zeros()),
            u0,
            newton_tol: 1e-10,
            newton_max_iter: 25,
            linear_tol: 1e-12,
            splitting: Splitting::ImplicitConvex,
        }
    }

    pub fn n_steps(&self) -> usize {
        math::ceil(self.t_end / self.dt - 1e-9).max(0.0) as usize
    }

    /// Parameter ranges of the model; returns every violation.
    pub fn violations(&self) -> Vec<alloc::string::String> {
        let mut out = Vec::new();
        if !(0.0..=1.0).contains(&self.tau) {
            out.push(format!("tau = {} outside [0, 1]", self.tau));
        }
        if !(0.0..=1.0).contains(&self.kappa) {
            out.push(format!("kappa = {} outside [0, 1]", self.kappa));
        }
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            out.push(format!("eps = {} outside (0, 1]", self.eps));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            out.push(format!("dt = {} must be positive", self.dt));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            out.push(format!("t_end = {} must be positive", self.t_end));
        }
        if !(self.newton_tol > 0.0) || self.newton_max_iter == 0 {
            out.push("Newton tolerance and iteration cap must be positive".into());
        }
        if self.u0.values().len() != self.grid.len() || !self.u0.is_finite() {
            out.push("u0 does not match the grid or is not finite".into());
        }
        if let Err(e) = self.potentials.validate() {
            out.push(format!("{e}"));
        }
        let m0 = self.grid.mean(&self.u0);
        let (dom, d) = (self.potentials.boundary.domain(), 1e-12 * (1.0 + m0.abs()));
        if !(dom.interior_contains(m0 - d) && dom.interior_contains(m0 + d)) {
            out.push(format!("mean of u0 = {m0} is not interior to the boundary graph domain"));
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(v.join("; ")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub u: Field,
    pub mu: Field,
    pub t: f64,
}

impl State {
    /// Initial state: `u₀` and the `μ` its chemical potential equation gives
    /// without the time derivative terms.
    pub fn initial(cfg: &RunConfig) -> Result<State> {
        let grid = &cfg.grid;
        let u = cfg.u0.clone();
        let p = &cfg.potentials;
        let g = cfg.g.at(0.0);
        let gg = cfg.g_gamma.at(0.0);
        let lap = grid.laplacian_neumann(&u);
        let mut mu = grid.zeros();
        for k in 0..grid.len() {
            mu[k] = -lap[k] + p.bulk.yosida(cfg.eps, u[k])? + p.pi.eval(u[k]) - g[k];
        }
        let ug = grid.trace(&u);
        let lb = grid.laplace_beltrami(&ug);
        let mut b = grid.boundary_zeros();
        for (side, (src, dst)) in [(&ug.bottom, &mut b.bottom), (&ug.top, &mut b.top)].into_iter().enumerate() {
            let (lbs, ggs) = if side == 0 { (&lb.bottom, &gg.bottom) } else { (&lb.top, &gg.top) };
            for i in 0..grid.nx() {
                dst[i] = -cfg.kappa * lbs[i] + p.boundary.yosida(cfg.eps, src[i])? + p.pi_gamma.eval(src[i]) - ggs[i];
            }
        }
        grid.add_boundary_lift(&mut mu, &b, 2.0 / grid.hy());
        Ok(State { u, mu, t: 0.0 })
    }

    pub fn u_gamma(&self, grid: &SlabGrid) -> BoundaryField {
        grid.trace(&self.u)
    }

    /// `ξ = β_ε(u)`
    pub fn xi(&self, cfg: &RunConfig) -> Result<Field> {
        let mut out = cfg.grid.zeros();
        for k in 0..out.values().len() {
            out[k] = cfg.potentials.bulk.yosida(cfg.eps, self.u[k])?;
        }
        Ok(out)
    }

    /// `ξ_Γ = β_Γ,ε(u_Γ)`
    pub fn xi_gamma(&self, cfg: &RunConfig) -> Result<BoundaryField> {
        let ug = self.u_gamma(&cfg.grid);
        let b = &cfg.potentials.boundary;
        let f = |v: &[f64]| v.iter().map(|&r| b.yosida(cfg.eps, r)).collect::<Result<Vec<_>>>();
        Ok(BoundaryField { bottom: f(&ug.bottom)?, top: f(&ug.top)? })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StepStats {
    pub newton_iterations: usize,
    pub residual: f64,
    /// Direct solves plus refinement sweeps.
    pub linear_iterations: usize,
    /// The step was completed as two half steps.
    pub halved: bool,
}

/// Interleaves `(u, μ)`.
pub fn pack(u: &Field, mu: &Field) -> Vec<f64> {
    let mut x = vec![0.0; 2 * u.values().len()];
    for (p, (a, b)) in u.values().iter().zip(mu.values()).enumerate() {
        x[2 * p] = *a;
        x[2 * p + 1] = *b;
    }
    x
}

pub fn unpack(grid: &SlabGrid, x: &[f64]) -> (Field, Field) {
    let n = grid.len();
    let u = (0..n).map(|p| x[2 * p]).collect();
    let mu = (0..n).map(|p| x[2 * p + 1]).collect();
    (grid.field_from_vec(u).unwrap(), grid.field_from_vec(mu).unwrap())
}

/// Per-step inputs that do not change across Newton iterations.
struct StepData<'a> {
    cfg: &'a RunConfig,
    dt: f64,
    u_old: &'a Field,
    g: Field,
    g_gamma: BoundaryField,
}

impl<'a> StepData<'a> {
    fn new(cfg: &'a RunConfig, u_old: &'a Field, t_new: f64, dt: f64) -> Self {
        StepData { cfg, dt, u_old, g: cfg.g.at(t_new), g_gamma: cfg.g_gamma.at(t_new) }
    }

    /// Residual and the magnitude of its largest term.
    fn residual(&self, x: &[f64]) -> Result<(Vec<f64>, f64)> {
        let cfg = self.cfg;
        let grid = &cfg.grid;
        let (nx, ny) = (grid.nx(), grid.ny());
        let (u, mu) = unpack(grid, x);
        let lap_mu = grid.laplacian_neumann(&mu);
        let lap_u = grid.laplacian_neumann(&u);
        let p = &cfg.potentials;
        let implicit = cfg.splitting == Splitting::FullyImplicit;
        let lift = 2.0 / grid.hy();
        let mut r = vec![0.0; x.len()];
        let mut scale: f64 = 0.0;
        let ug = grid.trace(&u);
        let lb = grid.laplace_beltrami(&ug);
        for j in 0..ny {
            for i in 0..nx {
                let k = grid.idx(i, j);
                let (un, uo) = (u[k], self.u_old[k]);
                let du = (un - uo) / self.dt;
                r[2 * k] = du - lap_mu[k];
                let beta = p.bulk.yosida(cfg.eps, un)?;
                let pi = p.pi.eval(if implicit { un } else { uo });
                let mut c = mu[k] - cfg.tau * du + lap_u[k] - beta - pi + self.g[k];
                scale = scale.max(du.abs()).max(lap_mu[k].abs()).max(mu[k].abs()).max(lap_u[k].abs());
                scale = scale.max(beta.abs()).max(pi.abs()).max(self.g[k].abs());
                if grid.is_boundary_row(j) {
                    let (lbv, ggv) = if j == 0 { (lb.bottom[i], self.g_gamma.bottom[i]) } else { (lb.top[i], self.g_gamma.top[i]) };
                    let bg = p.boundary.yosida(cfg.eps, un)?;
                    let pg = p.pi_gamma.eval(if implicit { un } else { uo });
                    let b = du - cfg.kappa * lbv + bg + pg - ggv;
                    c -= lift * b;
                    let s = du.abs().max((cfg.kappa * lbv).abs()).max(bg.abs()).max(pg.abs()).max(ggv.abs());
                    scale = scale.max(lift * s);
                }
                r[2 * k + 1] = c;
            }
        }
        Ok((r, scale))
    }

    fn jacobian(&self, x: &[f64]) -> Result<SparseMatrix> {
        let cfg = self.cfg;
        let grid = &cfg.grid;
        let (nx, ny) = (grid.nx(), grid.ny());
        let (cx, cy) = (1.0 / (grid.hx() * grid.hx()), 1.0 / (grid.hy() * grid.hy()));
        let p = &cfg.potentials;
        let implicit = cfg.splitting == Splitting::FullyImplicit;
        let lift = 2.0 / grid.hy();
        let idt = 1.0 / self.dt;
        let n = 2 * grid.len();
        let mut rows: Vec<Vec<(usize, f64)>> = Vec::with_capacity(n);
        for j in 0..ny {
            let (below, above) = if j == 0 {
                (1, 1)
            } else if j + 1 == ny {
                (ny - 2, ny - 2)
            } else {
                (j - 1, j + 1)
            };
            for i in 0..nx {
                let k = grid.idx(i, j);
                // mirror-closed stencil as (node, coefficient)
                let stencil = [
                    (k, -2.0 * cx - 2.0 * cy),
                    (grid.idx(grid.east(i), j), cx),
                    (grid.idx(grid.west(i), j), cx),
                    (grid.idx(i, above), cy),
                    (grid.idx(i, below), cy),
                ];
                let mut mass = Vec::with_capacity(6);
                mass.push((2 * k, idt));
                for &(q, c) in &stencil {
                    mass.push((2 * q + 1, -c));
                }
                rows.push(mass);

                let un = x[2 * k];
                let mut chem = Vec::with_capacity(9);
                chem.push((2 * k + 1, 1.0));
                for &(q, c) in &stencil {
                    chem.push((2 * q, c));
                }
                let mut diag = -cfg.tau * idt - p.bulk.yosida_derivative(cfg.eps, un)?;
                if implicit {
                    diag -= p.pi.derivative(un);
                }
                if grid.is_boundary_row(j) {
                    let ck = cfg.kappa * cx;
                    let mut bd = idt + 2.0 * ck + p.boundary.yosida_derivative(cfg.eps, un)?;
                    if implicit {
                        bd += p.pi_gamma.derivative(un);
                    }
                    diag -= lift * bd;
                    chem.push((2 * grid.idx(grid.east(i), j), lift * ck));
                    chem.push((2 * grid.idx(grid.west(i), j), lift * ck));
                }
                chem.push((2 * k, diag));
                rows.push(chem);
            }
        }
        Ok(SparseMatrix::from_rows(n, rows))
    }
}

/// Residual of the step from `old` to `new` over `new.t − old.t`.
pub fn residual(new: &State, old: &State, cfg: &RunConfig) -> Result<Vec<f64>> {
    let data = StepData::new(cfg, &old.u, new.t, new.t - old.t);
    data.residual(&pack(&new.u, &new.mu)).map(|(r, _)| r)
}

/// Jacobian of [`residual`] with respect to the interleaved `(u⁺, μ⁺)`.
pub fn jacobian(new: &State, old: &State, cfg: &RunConfig) -> Result<SparseMatrix> {
    let data = StepData::new(cfg, &old.u, new.t, new.t - old.t);
    data.jacobian(&pack(&new.u, &new.mu))
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn solve_linear(a: &SparseMatrix, rhs: &[f64], tol: f64) -> Result<(Vec<f64>, usize)> {
    let lu = BandLu::factor(a)?;
    let mut x = lu.solve(rhs);
    let bnorm = inf_norm(rhs).max(f64::MIN_POSITIVE);
    let mut sweeps = 1;
    for _ in 0..2 {
        let ax = a.mul_vec(&x);
        let r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, y)| b - y).collect();
        if inf_norm(&r) <= tol * bnorm {
            break;
        }
        let d = lu.solve(&r);
        for (xi, di) in x.iter_mut().zip(&d) {
            *xi += di;
        }
        sweeps += 1;
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Solver("non-finite linear solution".into()));
    }
    Ok((x, sweeps))
}

enum NewtonOutcome {
    Converged(State, StepStats),
    Diverged(f64),
}

fn newton(old: &State, cfg: &RunConfig, dt: f64) -> Result<NewtonOutcome> {
    let t_new = old.t + dt;
    let data = StepData::new(cfg, &old.u, t_new, dt);
    let mut x = pack(&old.u, &old.mu);
    let mut stats = StepStats::default();
    let mut last = f64::INFINITY;
    for _ in 0..cfg.newton_max_iter {
        let (r, _) = data.residual(&x)?;
        let jac = data.jacobian(&x)?;
        let neg: Vec<f64> = r.iter().map(|v| -v).collect();
        let (dx, sweeps) = solve_linear(&jac, &neg, cfg.linear_tol)?;
        stats.linear_iterations += sweeps;
        stats.newton_iterations += 1;
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi += di;
        }
        let (r, scale) = data.residual(&x)?;
        last = inf_norm(&r);
        if !last.is_finite() {
            return Ok(NewtonOutcome::Diverged(last));
        }
        if last <= cfg.newton_tol * (1.0 + scale) {
            stats.residual = last;
            let (u, mu) = unpack(&cfg.grid, &x);
            return Ok(NewtonOutcome::Converged(State { u, mu, t: t_new }, stats));
        }
    }
    Ok(NewtonOutcome::Diverged(last))
}

/// One backward Euler step of length `cfg.dt`. A step whose Newton iteration
/// fails is retried once as two half steps.
pub fn step(old: &State, cfg: &RunConfig) -> Result<(State, StepStats)> {
    step_dt(old, cfg, cfg.dt)
}

fn step_dt(old: &State, cfg: &RunConfig, dt: f64) -> Result<(State, StepStats)> {
    let tag = |e: Error| match e {
        Error::Solver(m) => Error::Solver(format!("at t = {}: {m}", old.t + dt)),
        other => other,
    };
    match newton(old, cfg, dt).map_err(tag)? {
        NewtonOutcome::Converged(s, st) => Ok((s, st)),
        NewtonOutcome::Diverged(_) => {
            let half = 0.5 * dt;
            let diverged = |r: f64| Error::NewtonDivergence { t: old.t + dt, residual: r };
            let (mid, a) = match newton(old, cfg, half).map_err(tag)? {
                NewtonOutcome::Converged(s, st) => (s, st),
                NewtonOutcome::Diverged(r) => return Err(diverged(r)),
            };
            let (mut end, b) = match newton(&mid, cfg, half).map_err(tag)? {
                NewtonOutcome::Converged(s, st) => (s, st),
                NewtonOutcome::Diverged(r) => return Err(diverged(r)),
            };
            end.t = old.t + dt;
            let stats = StepStats {
                newton_iterations: a.newton_iterations + b.newton_iterations,
                residual: b.residual,
                linear_iterations: a.linear_iterations + b.linear_iterations,
                halved: true,
            };
            Ok((end, stats))
        }
    }
}

/// Everything the driver hands to observers after each step.
pub struct StepEvent<'a> {
    pub k: usize,
    pub old: &'a State,
    pub new: &'a State,
    pub stats: &'a StepStats,
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub final_state: State,
    pub steps: usize,
    pub stats: Vec<StepStats>,
}

/// Steps from `t = 0` to `t_end`; `t_k = k·Δt`. `on_step` sees every step.
pub fn run(cfg: &RunConfig, mut on_step: impl FnMut(&StepEvent<'_>) -> Result<()>) -> Result<RunSummary> {
    cfg.validate()?;
    let n = cfg.n_steps();
    let mut state = State::initial(cfg)?;
    let mut stats = Vec::with_capacity(n);
    for k in 0..n {
        let (mut next, st) = step(&state, cfg)?;
        next.t = (k + 1) as f64 * cfg.dt;
        on_step(&StepEvent { k: k + 1, old: &state, new: &next, stats: &st })?;
        stats.push(st);
        state = next;
    }
    Ok(RunSummary { final_state: state, steps: n, stats })
}
