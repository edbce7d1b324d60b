//! Parameter sweeps, paired runs and order-of-accuracy studies.
//!
//! Every study is a list of independent runs followed by a deterministic
//! reduction. The `*_with` variants take the executor for the run list, so a
//! caller can run the points in parallel; results are reassembled in the
//! order of the parameter list.
//!
//! Norm conventions: `C([0,T]; X)` is the maximum over the stored time levels,
//! `L²(0,T; X)` the right-endpoint rule over levels `1..`.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::diagnostics::{self, DiagnosticsRecord, MonitorReport};
use crate::geometry::{BoundaryField, Field, SlabGrid};
use crate::graphs::{MonotoneGraph, Perturbation, PotentialPair};
use crate::math;
use crate::stepper::{self, RunConfig, StepStats, TimeData};
use crate::{Error, Result};

/// Stored time levels of one run.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub u: Vec<Field>,
    pub xi_gamma: Vec<BoundaryField>,
    pub records: Vec<DiagnosticsRecord>,
    pub stats: Vec<StepStats>,
}

/// Runs `cfg` and keeps every time level.
pub fn simulate(cfg: &RunConfig) -> Result<Trajectory> {
    let grid = &cfg.grid;
    let s0 = stepper::State::initial(cfg)?;
    let n = cfg.n_steps() + 1;
    let mut tr = Trajectory {
        times: Vec::with_capacity(n),
        u: Vec::with_capacity(n),
        xi_gamma: Vec::with_capacity(n),
        records: Vec::with_capacity(n),
        stats: Vec::new(),
    };
    tr.records.push(diagnostics::record(grid, None, &s0, cfg)?);
    tr.times.push(0.0);
    tr.xi_gamma.push(s0.xi_gamma(cfg)?);
    tr.u.push(s0.u);
    let summary = stepper::run(cfg, |ev| {
        tr.records.push(diagnostics::record(grid, Some(ev.old), ev.new, cfg)?);
        tr.times.push(ev.new.t);
        tr.xi_gamma.push(ev.new.xi_gamma(cfg)?);
        tr.u.push(ev.new.u.clone());
        Ok(())
    })?;
    tr.stats = summary.stats;
    Ok(tr)
}

/// Runs a list of configurations one after another.
pub fn run_sequential(cfgs: &[RunConfig]) -> Vec<Result<Trajectory>> {
    cfgs.iter().map(simulate).collect()
}

/// Distances between two trajectories on the same grid and time levels.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TrajectoryDistance {
    /// `C([0,T]; H)`
    pub c_h: f64,
    /// `L²(0,T; V)`
    pub l2_v: f64,
    /// `C([0,T]; H_Γ)`
    pub c_h_gamma: f64,
    /// `L²(0,T; H_Γ)` of `ξ_Γ`
    pub xi_gamma_l2: f64,
}

pub fn distance(grid: &SlabGrid, a: &Trajectory, b: &Trajectory) -> TrajectoryDistance {
    let mut d = TrajectoryDistance::default();
    let mut sv = 0.0;
    let mut sx = 0.0;
    for k in 0..a.u.len().min(b.u.len()) {
        let du = a.u[k].sub(&b.u[k]);
        d.c_h = d.c_h.max(grid.l2_bulk(&du));
        d.c_h_gamma = d.c_h_gamma.max(grid.l2_boundary(&grid.trace(&du)));
        if k > 0 {
            let dt = a.times[k] - a.times[k - 1];
            let v = grid.h1_norm(&du);
            sv += dt * v * v;
            let x = grid.l2_boundary(&a.xi_gamma[k].sub(&b.xi_gamma[k]));
            sx += dt * x * x;
        }
    }
    d.l2_v = math::sqrt(sv);
    d.xi_gamma_l2 = math::sqrt(sx);
    d
}

/// `L²(0,T; H_Γ)` of `ξ_Γ`.
pub fn xi_gamma_l2(grid: &SlabGrid, tr: &Trajectory) -> f64 {
    let mut s = 0.0;
    for k in 1..tr.u.len() {
        let x = grid.l2_boundary(&tr.xi_gamma[k]);
        s += (tr.times[k] - tr.times[k - 1]) * x * x;
    }
    math::sqrt(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepKind {
    Kappa,
    Epsilon,
}

#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub param: f64,
    /// Distance to the reference run (`κ = 0`); unused for `ε`.
    pub to_ref: TrajectoryDistance,
    /// Distance to the next parameter value; `None` for the last point.
    pub to_next: Option<TrajectoryDistance>,
    pub xi_gamma_l2: f64,
    pub max_obstacle_violation: f64,
    pub monitor: MonitorReport,
    pub records: Vec<DiagnosticsRecord>,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    pub kind: SweepKind,
    pub points: Vec<SweepPoint>,
    /// The `κ = 0` run of a kappa sweep.
    pub reference: Option<SweepPoint>,
    /// Least-squares slope of `log d` against `log param`.
    pub rate_fit: f64,
    pub passed: bool,
}

impl SweepResult {
    pub fn params(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.param).collect()
    }

    /// The distance series the pass criterion looks at: to the reference for
    /// kappa, pairwise for epsilon.
    pub fn d(&self) -> Vec<f64> {
        match self.kind {
            SweepKind::Kappa => self.points.iter().map(|p| p.to_ref.c_h).collect(),
            SweepKind::Epsilon => self.points.iter().filter_map(|p| p.to_next.map(|d| d.c_h)).collect(),
        }
    }
}

/// Least-squares slope of `log y` against `log x` over positive pairs; NaN
/// with fewer than two.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(a, b)| **a > 0.0 && **b > 0.0)
        .map(|(a, b)| (math::ln(*a), math::ln(*b)))
        .collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

fn check_params(params: &[f64]) -> Result<()> {
    if params.len() < 3 {
        return Err(Error::InvalidParameter("a sweep needs at least three values".into()));
    }
    let ok_range = |p: f64| p > 0.0 && p <= 1.0;
    if !params.iter().all(|&p| ok_range(p)) || params.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidParameter("sweep values must be strictly decreasing in (0, 1]".into()));
    }
    Ok(())
}

fn tag(kind: &str, param: f64) -> impl Fn(Error) -> Error + '_ {
    move |e| match e {
        Error::Solver(m) => Error::Solver(format!("{kind} = {param}: {m}")),
        Error::InvalidParameter(m) => Error::InvalidParameter(format!("{kind} = {param}: {m}")),
        other => other,
    }
}

fn nonincreasing(d: &[f64]) -> bool {
    d.windows(2).all(|w| w[1] <= w[0])
}

fn point(grid: &SlabGrid, param: f64, tr: &Trajectory) -> SweepPoint {
    SweepPoint {
        param,
        to_ref: TrajectoryDistance::default(),
        to_next: None,
        xi_gamma_l2: xi_gamma_l2(grid, tr),
        max_obstacle_violation: tr.records.iter().skip(1).fold(0.0, |m, r| m.max(r.obstacle_violation)),
        monitor: diagnostics::estimate_monitor(&tr.records),
        records: tr.records.clone(),
    }
}

pub fn kappa_sweep(base: &RunConfig, kappas: &[f64]) -> Result<SweepResult> {
    kappa_sweep_with(base, kappas, run_sequential)
}

/// One run per `κ` plus a `κ = 0` reference. Passes when the distance to the
/// reference is nonincreasing and shrinks by at least a factor ten.
pub fn kappa_sweep_with(
    base: &RunConfig,
    kappas: &[f64],
    exec: impl FnOnce(&[RunConfig]) -> Vec<Result<Trajectory>>,
) -> Result<SweepResult> {
    let kappas: Vec<f64> = kappas.iter().copied().filter(|&k| k > 0.0).collect();
    check_params(&kappas)?;
    let mut cfgs: Vec<RunConfig> = kappas.iter().map(|&k| RunConfig { kappa: k, ..base.clone() }).collect();
    cfgs.push(RunConfig { kappa: 0.0, ..base.clone() });
    let mut trs = Vec::with_capacity(cfgs.len());
    for (res, c) in exec(&cfgs).into_iter().zip(&cfgs) {
        trs.push(res.map_err(tag("kappa", c.kappa))?);
    }
    let grid = &base.grid;
    let reference = trs.pop().expect("reference run");
    let mut points: Vec<SweepPoint> = Vec::with_capacity(kappas.len());
    for (j, tr) in trs.iter().enumerate() {
        let mut p = point(grid, kappas[j], tr);
        p.to_ref = distance(grid, tr, &reference);
        p.to_next = trs.get(j + 1).map(|next| distance(grid, tr, next));
        points.push(p);
    }
    let d: Vec<f64> = points.iter().map(|p| p.to_ref.c_h).collect();
    let passed = nonincreasing(&d) && d[d.len() - 1] <= 0.1 * d[0];
    let rate_fit = loglog_slope(&kappas, &d);
    Ok(SweepResult {
        kind: SweepKind::Kappa,
        points,
        reference: Some(point(grid, 0.0, &reference)),
        rate_fit,
        passed,
    })
}

pub fn epsilon_sweep(base: &RunConfig, epsilons: &[f64]) -> Result<SweepResult> {
    epsilon_sweep_with(base, epsilons, run_sequential)
}

/// One run per `ε`. Passes when the pairwise distances are nonincreasing and,
/// for obstacle graphs, the maximal constraint violation decreases with `ε`.
pub fn epsilon_sweep_with(
    base: &RunConfig,
    epsilons: &[f64],
    exec: impl FnOnce(&[RunConfig]) -> Vec<Result<Trajectory>>,
) -> Result<SweepResult> {
    check_params(epsilons)?;
    let cfgs: Vec<RunConfig> = epsilons.iter().map(|&e| RunConfig { eps: e, ..base.clone() }).collect();
    let mut trs = Vec::with_capacity(cfgs.len());
    for (res, c) in exec(&cfgs).into_iter().zip(&cfgs) {
        trs.push(res.map_err(tag("eps", c.eps))?);
    }
    let grid = &base.grid;
    let mut points: Vec<SweepPoint> = Vec::with_capacity(trs.len());
    for (j, tr) in trs.iter().enumerate() {
        let mut p = point(grid, epsilons[j], tr);
        p.to_next = trs.get(j + 1).map(|next| distance(grid, tr, next));
        points.push(p);
    }
    let d: Vec<f64> = points.iter().filter_map(|p| p.to_next.map(|x| x.c_h)).collect();
    let obstacle = points.iter().any(|p| p.max_obstacle_violation > 0.0);
    let viol: Vec<f64> = points.iter().map(|p| p.max_obstacle_violation).collect();
    let viol_ok = !obstacle || viol.windows(2).all(|w| w[1] < w[0]);
    let rate_fit = loglog_slope(&epsilons[..d.len()], &d);
    Ok(SweepResult { kind: SweepKind::Epsilon, points, reference: None, rate_fit, passed: nonincreasing(&d) && viol_ok })
}

/// What the paired runs perturb.
#[derive(Debug, Clone)]
pub enum PerturbationTarget {
    /// `u₀ + a·shape`; `shape` must be mean-free.
    InitialData(Field),
    /// `g + a·shape`, constant in time.
    Source(Field),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContDepPoint {
    pub magnitude: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// `lhs/rhs`, `0` when both vanish.
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContDepResult {
    pub points: Vec<ContDepPoint>,
    /// `max ratio / min ratio`
    pub ratio_spread: f64,
    pub passed: bool,
}

/// Largest admissible `max/min` ratio across magnitudes.
pub const RATIO_SPREAD_CAP: f64 = 2.0;

/// Mean the perturbation shape may carry.
pub const SHAPE_MEAN_TOL: f64 = 1e-12;

pub fn continuous_dependence(base: &RunConfig, target: &PerturbationTarget, magnitudes: &[f64]) -> Result<ContDepResult> {
    continuous_dependence_with(base, target, magnitudes, run_sequential)
}

/// Paired runs against the unperturbed base; the left side collects the
/// solution differences, the right side the data differences, both squared.
pub fn continuous_dependence_with(
    base: &RunConfig,
    target: &PerturbationTarget,
    magnitudes: &[f64],
    exec: impl FnOnce(&[RunConfig]) -> Vec<Result<Trajectory>>,
) -> Result<ContDepResult> {
    let grid = base.grid;
    let shape = match target {
        PerturbationTarget::InitialData(s) | PerturbationTarget::Source(s) => s,
    };
    let m = grid.mean(shape);
    if m.abs() > SHAPE_MEAN_TOL * (1.0 + shape.max_abs()) {
        return Err(Error::Mean { mean: m, tol: SHAPE_MEAN_TOL });
    }
    let mut cfgs = vec![base.clone()];
    for &a in magnitudes {
        let mut c = base.clone();
        match target {
            PerturbationTarget::InitialData(s) => c.u0.axpy(a, s),
            PerturbationTarget::Source(s) => {
                let old = base.g.clone();
                let (s, t_shift) = (s.clone(), a);
                c.g = TimeData::Function(Arc::new(move |t| {
                    let mut g = old.at(t);
                    g.axpy(t_shift, &s);
                    g
                }));
            }
        }
        cfgs.push(c);
    }
    let mut trs = Vec::with_capacity(cfgs.len());
    for (res, a) in exec(&cfgs).into_iter().zip(core::iter::once(0.0).chain(magnitudes.iter().copied())) {
        trs.push(res.map_err(tag("magnitude", a))?);
    }
    let reference = &trs[0];
    let t_end = *reference.times.last().unwrap_or(&0.0);
    let mut points = Vec::with_capacity(magnitudes.len());
    for (j, &a) in magnitudes.iter().enumerate() {
        let tr = &trs[j + 1];
        let mut c_vstar: f64 = 0.0;
        let mut c_h: f64 = 0.0;
        let mut c_hg: f64 = 0.0;
        let mut l2v = 0.0;
        for k in 0..tr.u.len() {
            let mut du = tr.u[k].sub(&reference.u[k]);
            let dm = grid.mean(&du);
            du.add_constant(-dm);
            let v = grid.vstar_norm(&du)?;
            du.add_constant(dm);
            c_vstar = c_vstar.max(v * v);
            let h = grid.l2_bulk(&du);
            c_h = c_h.max(h * h);
            let hg = grid.l2_boundary(&grid.trace(&du));
            c_hg = c_hg.max(hg * hg);
            if k > 0 {
                let n = grid.h1_norm(&du);
                l2v += (tr.times[k] - tr.times[k - 1]) * n * n;
            }
        }
        let lhs = c_vstar + base.tau * c_h + l2v + c_hg;
        let rhs = match target {
            PerturbationTarget::InitialData(s) => {
                let mut d = s.clone();
                d.scale(a);
                let v = grid.vstar_norm(&d)?;
                let h = grid.l2_bulk(&d);
                let b = grid.l2_boundary(&grid.trace(&d));
                v * v + base.tau * h * h + b * b
            }
            PerturbationTarget::Source(s) => {
                let h = a * grid.l2_bulk(s);
                t_end * h * h
            }
        };
        let ratio = if lhs == 0.0 && rhs == 0.0 { 0.0 } else { lhs / rhs };
        points.push(ContDepPoint { magnitude: a, lhs, rhs, ratio });
    }
    let ratios: Vec<f64> = points.iter().map(|p| p.ratio).filter(|r| *r > 0.0).collect();
    let (lo, hi) = ratios.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &r| (lo.min(r), hi.max(r)));
    let ratio_spread = if ratios.is_empty() { 1.0 } else { hi / lo };
    let finite = points.iter().all(|p| p.ratio.is_finite());
    let mut by_mag = points.clone();
    by_mag.sort_by(|a, b| b.magnitude.total_cmp(&a.magnitude));
    let lhs_shrinks = by_mag.windows(2).all(|w| w[1].lhs <= w[0].lhs);
    Ok(ContDepResult { points, ratio_spread, passed: finite && ratio_spread <= RATIO_SPREAD_CAP && lhs_shrinks })
}

/// Manufactured solution
///
/// ```text
/// μ* = e^{−t} cos(kx) p(y),   p(y) = y²(3Ly − 2y)/Ly³,
/// u* = e^{−t} cos(kx) q(y),   q = k²p − p'',
/// ```
///
/// with `k = 2π/Lx`, so that `∂_t u* = Δμ*` and `∂_νμ* = 0`. The sources `g`
/// and `g_Γ` follow from the remaining two equations with the linear graphs
/// `β(r) = a·r`, `β_Γ(r) = a_Γ·r` and `π = π_Γ = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Manufactured {
    pub lx: f64,
    pub ly: f64,
    pub tau: f64,
    pub kappa: f64,
    pub eps: f64,
    pub a: f64,
    pub a_gamma: f64,
    pub t_end: f64,
}

impl Default for Manufactured {
    fn default() -> Self {
        Manufactured { lx: 1.0, ly: 1.0, tau: 1.0, kappa: 1.0, eps: 0.1, a: 1.0, a_gamma: 1.0, t_end: 0.1 }
    }
}

impl Manufactured {
    fn k(&self) -> f64 {
        2.0 * PI / self.lx
    }

    fn p(&self, y: f64) -> [f64; 3] {
        let l3 = self.ly * self.ly * self.ly;
        [y * y * (3.0 * self.ly - 2.0 * y) / l3, 6.0 * y * (self.ly - y) / l3, (6.0 * self.ly - 12.0 * y) / l3]
    }

    /// `q, q', q''`
    fn q(&self, y: f64) -> [f64; 3] {
        let k2 = self.k() * self.k();
        let [p, dp, ddp] = self.p(y);
        let l3 = self.ly * self.ly * self.ly;
        [k2 * p - ddp, k2 * dp + 12.0 / l3, k2 * ddp]
    }

    pub fn u(&self, x: f64, y: f64, t: f64) -> f64 {
        math::exp(-t) * math::cos(self.k() * x) * self.q(y)[0]
    }

    pub fn mu(&self, x: f64, y: f64, t: f64) -> f64 {
        math::exp(-t) * math::cos(self.k() * x) * self.p(y)[0]
    }

    fn b(&self) -> f64 {
        self.a / (1.0 + self.eps * self.a)
    }

    fn b_gamma(&self) -> f64 {
        self.a_gamma / (1.0 + self.eps * self.a_gamma)
    }

    /// `g = τ∂_tu − Δu + β_ε(u) − μ`
    pub fn g(&self, x: f64, y: f64, t: f64) -> f64 {
        let k2 = self.k() * self.k();
        let [q, _, ddq] = self.q(y);
        let c = math::exp(-t) * math::cos(self.k() * x);
        let u = c * q;
        let lap = c * (ddq - k2 * q);
        -self.tau * u - lap + self.b() * u - self.mu(x, y, t)
    }

    /// `g_Γ = ∂_tu + ∂_νu − κ∂²_xu + β_Γ,ε(u)`
    pub fn g_gamma(&self, x: f64, y: f64, t: f64) -> f64 {
        let k2 = self.k() * self.k();
        let [q, dq, _] = self.q(y);
        let c = math::exp(-t) * math::cos(self.k() * x);
        let u = c * q;
        let dn = if y == 0.0 { -c * dq } else { c * dq };
        -u + dn + self.kappa * k2 * u + self.b_gamma() * u
    }

    pub fn config(&self, nx: usize, ny: usize, dt: f64) -> Result<RunConfig> {
        let grid = SlabGrid::new(nx, ny, self.lx, self.ly)?;
        let mut pair = PotentialPair::symmetric(MonotoneGraph::linear(self.a), Perturbation::Zero);
        pair.boundary = MonotoneGraph::linear(self.a_gamma);
        let u0 = grid.field_from_fn(|x, y| self.u(x, y, 0.0));
        let mut cfg = RunConfig::new(grid, pair, u0);
        cfg.tau = self.tau;
        cfg.kappa = self.kappa;
        cfg.eps = self.eps;
        cfg.dt = dt;
        cfg.t_end = self.t_end;
        let me = *self;
        cfg.g = TimeData::Function(Arc::new(move |t| grid.field_from_fn(|x, y| me.g(x, y, t))));
        cfg.g_gamma = TimeData::Function(Arc::new(move |t| grid.boundary_from_fn(|x, y| me.g_gamma(x, y, t))));
        Ok(cfg)
    }

    /// Errors `C([0,T]; H)` and `L²(0,T; V)` against the exact solution.
    pub fn errors(&self, nx: usize, ny: usize, dt: f64) -> Result<ManufacturedRow> {
        let cfg = self.config(nx, ny, dt)?;
        let grid = cfg.grid;
        let mut err_h: f64 = 0.0;
        let mut sv = 0.0;
        stepper::run(&cfg, |ev| {
            let exact = grid.field_from_fn(|x, y| self.u(x, y, ev.new.t));
            let e = ev.new.u.sub(&exact);
            err_h = err_h.max(grid.l2_bulk(&e));
            let n = grid.h1_norm(&e);
            sv += (ev.new.t - ev.old.t) * n * n;
            Ok(())
        })?;
        Ok(ManufacturedRow { h: grid.hx().max(grid.hy()), dt, err_h, err_v: math::sqrt(sv) })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManufacturedRow {
    pub h: f64,
    pub dt: f64,
    pub err_h: f64,
    pub err_v: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManufacturedReport {
    pub space: Vec<ManufacturedRow>,
    pub time: Vec<ManufacturedRow>,
    /// Slope of `log err_h` against `log h`.
    pub order_space: f64,
    /// Slope of `log err_h` against `log Δt`.
    pub order_time: f64,
}

impl ManufacturedReport {
    pub fn passed(&self) -> bool {
        (self.order_space - 2.0).abs() <= 0.3 && (self.order_time - 1.0).abs() <= 0.3
    }
}

/// A grid refinement and a time refinement, each against its own
/// manufactured solution. The time study wants a smooth solution so that the
/// spatial error stays below the temporal one.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub space: Manufactured,
    /// Cells per direction; `ny = n + 1` nodes.
    pub sizes: Vec<usize>,
    pub dt_space: f64,
    pub time: Manufactured,
    pub n_time: usize,
    pub dts: Vec<f64>,
}

impl Default for ConvergenceStudy {
    fn default() -> Self {
        let l = 2.0 * PI;
        ConvergenceStudy {
            space: Manufactured::default(),
            sizes: vec![16, 32],
            dt_space: 1e-3,
            time: Manufactured { lx: l, ly: l, t_end: 1.0, ..Manufactured::default() },
            n_time: 48,
            dts: vec![0.1, 0.05, 0.025],
        }
    }
}

pub fn manufactured_convergence(study: &ConvergenceStudy) -> Result<ManufacturedReport> {
    let (ms, mt) = (&study.space, &study.time);
    let space = study.sizes.iter().map(|&n| ms.errors(n, n + 1, study.dt_space)).collect::<Result<Vec<_>>>()?;
    let time = study.dts.iter().map(|&dt| mt.errors(study.n_time, study.n_time + 1, dt)).collect::<Result<Vec<_>>>()?;
    let order_space = loglog_slope(
        &space.iter().map(|r| r.h).collect::<Vec<_>>(),
        &space.iter().map(|r| r.err_h).collect::<Vec<_>>(),
    );
    let order_time = loglog_slope(
        &time.iter().map(|r| r.dt).collect::<Vec<_>>(),
        &time.iter().map(|r| r.err_h).collect::<Vec<_>>(),
    );
    Ok(ManufacturedReport { space, time, order_space, order_time })
}

/// Column names of the manufactured report table.
pub const MANUFACTURED_HEADER: &str = "h,dt,err_H,err_V,order_space,order_time";

/// Column names of a sweep summary table; the monitor columns follow.
pub fn sweep_summary_header() -> String {
    let mut s = String::from("param,d_to_ref,d_pairwise,rate_fit,d_boundary,xi_gamma_diff_l2,xi_gamma_l2,max_obstacle_violation,energy_estimate");
    for name in diagnostics::CSV_HEADER.split(',').skip(1) {
        s.push_str(&format!(",{name}_linf,{name}_l2"));
    }
    s
}

/// Rows matching [`sweep_summary_header`]. The reference run of a kappa sweep
/// comes last with parameter 0.
pub fn sweep_summary_rows(res: &SweepResult) -> Vec<String> {
    let f = diagnostics::format_sci;
    let mut out = Vec::new();
    for p in res.points.iter().chain(res.reference.iter()) {
        let pair = p.to_next.map_or(f64::NAN, |d| d.c_h);
        let mut s = format!(
            "{},{},{},{},{},{},{},{},{}",
            f(p.param),
            f(p.to_ref.c_h),
            f(pair),
            f(res.rate_fit),
            f(p.to_ref.c_h_gamma),
            f(p.to_ref.xi_gamma_l2),
            f(p.xi_gamma_l2),
            f(p.max_obstacle_violation),
            f(p.monitor.energy_estimate)
        );
        for a in &p.monitor.aggregates {
            s.push_str(&format!(",{},{}", f(a.linf), f(a.l2)));
        }
        out.push(s);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let x = [1.0, 0.5, 0.25, 0.125];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v * v).collect();
        assert!((loglog_slope(&x, &y) - 2.0).abs() < 1e-12);
        assert!(loglog_slope(&[1.0], &[1.0]).is_nan());
    }

    #[test]
    fn manufactured_fields_are_consistent() {
        let m = Manufactured { lx: 1.3, ly: 0.7, ..Default::default() };
        let (x, y, t) = (0.31, 0.23, 0.4);
        let h = 1e-4;
        // ∂_t u = Δμ
        let dtu = (m.u(x, y, t + h) - m.u(x, y, t - h)) / (2.0 * h);
        let lap = (m.mu(x + h, y, t) + m.mu(x - h, y, t) + m.mu(x, y + h, t) + m.mu(x, y - h, t)
            - 4.0 * m.mu(x, y, t))
            / (h * h);
        assert!((dtu - lap).abs() < 1e-4 * (1.0 + lap.abs()));
        // μ has zero normal derivative on both lines
        for yb in [0.0, m.ly] {
            let d = (m.mu(x, yb + h, t) - m.mu(x, yb - h, t)) / (2.0 * h);
            assert!(d.abs() < 1e-6);
        }
    }

    #[test]
    fn sweep_rejects_bad_lists() {
        let grid = SlabGrid::unit(6, 6).unwrap();
        let cfg = RunConfig::new(grid, PotentialPair::regular(), grid.zeros());
        assert!(kappa_sweep(&cfg, &[1.0, 0.5]).is_err());
        assert!(epsilon_sweep(&cfg, &[0.1, 0.2, 0.05]).is_err());
    }
}
