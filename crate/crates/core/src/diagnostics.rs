//! Mass, free energy, dissipation and the monitor family of the a priori
//! estimates, evaluated on discrete states.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write;

use crate::geometry::{Field, SlabGrid};
use crate::graphs::GraphKind;
use crate::math;
use crate::stepper::{RunConfig, Splitting, State};
use crate::Result;

/// Slack allowed in the mean chemical potential bound.
pub const MEAN_MU_SLACK: f64 = 1e-10;

pub const CSV_HEADER: &str = "t,mass,energy,e_grad,e_pot,e_bgrad,e_bpot,vstar_dtu,sqrt_tau_dtu,dtu_gamma,u_V,sqrtkappa_uGamma_V,mu_V,mu_mean,xi_H,xiGamma_H,lap_u_H,normal_deriv,obstacle_violation";

/// One row of the diagnostics table. Time-derivative entries are backward
/// differences and vanish on the initial row.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub mass: f64,
    pub energy: f64,
    pub e_grad: f64,
    pub e_pot: f64,
    pub e_bgrad: f64,
    pub e_bpot: f64,
    pub vstar_dtu: f64,
    pub sqrt_tau_dtu: f64,
    pub dtu_gamma: f64,
    pub u_v: f64,
    pub sqrtkappa_ugamma_v: f64,
    pub mu_v: f64,
    pub mu_mean: f64,
    pub xi_h: f64,
    pub xigamma_h: f64,
    pub lap_u_h: f64,
    pub normal_deriv: f64,
    pub obstacle_violation: f64,
}

impl DiagnosticsRecord {
    pub fn values(&self) -> [f64; 19] {
        [
            self.t,
            self.mass,
            self.energy,
            self.e_grad,
            self.e_pot,
            self.e_bgrad,
            self.e_bpot,
            self.vstar_dtu,
            self.sqrt_tau_dtu,
            self.dtu_gamma,
            self.u_v,
            self.sqrtkappa_ugamma_v,
            self.mu_v,
            self.mu_mean,
            self.xi_h,
            self.xigamma_h,
            self.lap_u_h,
            self.normal_deriv,
            self.obstacle_violation,
        ]
    }

    pub fn csv_row(&self) -> String {
        let mut s = String::new();
        for (i, v) in self.values().iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            s.push_str(&format_sci(*v));
        }
        s
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }
}

/// C-style `%.12e`: twelve fraction digits, signed exponent of at least two
/// digits.
pub fn format_sci(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let raw = alloc::format!("{v:.12e}");
    let (mant, exp) = raw.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let mut s = String::with_capacity(mant.len() + 5);
    s.push_str(mant);
    let sign = if exp < 0 { '-' } else { '+' };
    let _ = write!(s, "e{sign}{:02}", exp.unsigned_abs());
    s
}

/// `|Ω|·m(u)`
pub fn total_mass(grid: &SlabGrid, s: &State) -> f64 {
    grid.integrate(&s.u)
}

/// Itemized free energy.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyParts {
    /// `½|∇u|²`
    pub grad: f64,
    /// `∫β̂_ε(u)`
    pub pot: f64,
    /// `(κ/2)|∇_Γu_Γ|²`
    pub bgrad: f64,
    /// `∫_Γ β̂_Γ,ε(u_Γ)`
    pub bpot: f64,
    /// `∫Π(u) + ∫_Γ Π_Γ(u_Γ)`
    pub perturbation: f64,
    /// `−∫g·u − ∫_Γ g_Γ·u_Γ`
    pub data: f64,
    pub total: f64,
}

pub fn free_energy(grid: &SlabGrid, s: &State, cfg: &RunConfig) -> Result<EnergyParts> {
    let p = &cfg.potentials;
    let g = cfg.g.at(s.t);
    let gg = cfg.g_gamma.at(s.t);
    let grad = 0.5 * grid.dirichlet_form(&s.u, &s.u);
    let mut pot_f = grid.zeros();
    let mut pert_f = grid.zeros();
    for k in 0..grid.len() {
        pot_f[k] = p.bulk.moreau(cfg.eps, s.u[k])?;
        pert_f[k] = p.pi.primitive(s.u[k]);
    }
    let pot = grid.integrate(&pot_f);
    let ug = s.u_gamma(grid);
    let sb = grid.h1_boundary_seminorm(&ug);
    let bgrad = 0.5 * cfg.kappa * sb * sb;
    let mut bpot_f = grid.boundary_zeros();
    for (src, dst) in [(&ug.bottom, &mut bpot_f.bottom), (&ug.top, &mut bpot_f.top)] {
        for (d, &r) in dst.iter_mut().zip(src.iter()) {
            *d = p.boundary.moreau(cfg.eps, r)?;
        }
    }
    let bpot = grid.integrate_boundary(&bpot_f);
    let perturbation = grid.integrate(&pert_f) + grid.integrate_boundary(&ug.map(|r| p.pi_gamma.primitive(r)));
    let data = -grid.inner(&g, &s.u) - grid.inner_boundary(&gg, &ug);
    let total = grad + pot + bgrad + bpot + perturbation + data;
    Ok(EnergyParts { grad, pot, bgrad, bpot, perturbation, data, total })
}

/// `D = |δu/Δt|²_{V*} + τ|δu/Δt|²_H + |δu_Γ/Δt|²_{H_Γ}`
pub fn dissipation(grid: &SlabGrid, old: &State, new: &State, cfg: &RunConfig) -> Result<f64> {
    let dt = new.t - old.t;
    let mut du = new.u.sub(&old.u);
    du.scale(1.0 / dt);
    let v = vstar_of_difference(grid, &du)?;
    let h = grid.l2_bulk(&du);
    let b = grid.l2_boundary(&grid.trace(&du));
    Ok(v * v + cfg.tau * h * h + b * b)
}

/// `E(old) − E(new) − Δt·D`; nonnegative for the convex splitting.
pub fn dissipation_balance(grid: &SlabGrid, old: &State, new: &State, cfg: &RunConfig) -> Result<f64> {
    let e0 = free_energy(grid, old, cfg)?.total;
    let e1 = free_energy(grid, new, cfg)?.total;
    Ok(e0 - e1 - (new.t - old.t) * dissipation(grid, old, new, cfg)?)
}

fn vstar_of_difference(grid: &SlabGrid, z: &Field) -> Result<f64> {
    let mut z = z.clone();
    let m = grid.mean(&z);
    z.add_constant(-m);
    grid.vstar_norm(&z)
}

/// Integrating the chemical potential equation over `Ω` expresses `|Ω|·m(μ)`
/// through the nonlinear terms and the data; bounding each by its `L¹` norm
/// gives the bound checked here.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanMuCheck {
    pub mean_mu: f64,
    /// Mismatch of the integrated identity.
    pub identity_residual: f64,
    pub bound: f64,
}

impl MeanMuCheck {
    pub fn holds(&self) -> bool {
        self.mean_mu.abs() <= self.bound + MEAN_MU_SLACK
    }
}

pub fn mean_mu_check(grid: &SlabGrid, old: &State, new: &State, cfg: &RunConfig) -> Result<MeanMuCheck> {
    let p = &cfg.potentials;
    let dt = new.t - old.t;
    let g = cfg.g.at(new.t);
    let gg = cfg.g_gamma.at(new.t);
    let explicit = cfg.splitting == Splitting::ImplicitConvex;
    let area = grid.area();
    let mut signed = grid.zeros();
    let mut abs = grid.zeros();
    for k in 0..grid.len() {
        let r = new.u[k];
        let ro = if explicit { old.u[k] } else { r };
        let beta = p.bulk.yosida(cfg.eps, r)?;
        let pi = p.pi.eval(ro);
        signed[k] = beta + pi - g[k];
        abs[k] = beta.abs() + pi.abs() + g[k].abs();
    }
    let ug = new.u_gamma(grid);
    let uo = old.u_gamma(grid);
    let mut bs = grid.boundary_zeros();
    let mut ba = grid.boundary_zeros();
    let sides = [
        (&ug.bottom, &uo.bottom, &gg.bottom, &mut bs.bottom, &mut ba.bottom),
        (&ug.top, &uo.top, &gg.top, &mut bs.top, &mut ba.top),
    ];
    for (un, uold, gs, s, a) in sides {
        for i in 0..grid.nx() {
            let r = un[i];
            let ro = if explicit { uold[i] } else { r };
            let d = (r - uold[i]) / dt;
            let b = p.boundary.yosida(cfg.eps, r)?;
            let pg = p.pi_gamma.eval(ro);
            s[i] = d + b + pg - gs[i];
            a[i] = d.abs() + b.abs() + pg.abs() + gs[i].abs();
        }
    }
    let mean_mu = grid.mean(&new.mu);
    let predicted = (grid.integrate(&signed) + grid.integrate_boundary(&bs)) / area;
    let bound = (grid.integrate(&abs) + grid.integrate_boundary(&ba)) / area;
    Ok(MeanMuCheck { mean_mu, identity_residual: (mean_mu - predicted).abs(), bound })
}

/// Diagnostics of `new`; `old` is the previous state, `None` on the initial row.
pub fn record(grid: &SlabGrid, old: Option<&State>, new: &State, cfg: &RunConfig) -> Result<DiagnosticsRecord> {
    let e = free_energy(grid, new, cfg)?;
    let (vstar_dtu, sqrt_tau_dtu, dtu_gamma) = match old {
        Some(old) => {
            let mut du = new.u.sub(&old.u);
            du.scale(1.0 / (new.t - old.t));
            (
                vstar_of_difference(grid, &du)?,
                math::sqrt(cfg.tau) * grid.l2_bulk(&du),
                grid.l2_boundary(&grid.trace(&du)),
            )
        }
        None => (0.0, 0.0, 0.0),
    };
    let ug = new.u_gamma(grid);
    let xi = new.xi(cfg)?;
    let xig = new.xi_gamma(cfg)?;
    let obstacle = matches!(cfg.potentials.bulk.kind, GraphKind::Obstacle)
        || matches!(cfg.potentials.boundary.kind, GraphKind::Obstacle);
    Ok(DiagnosticsRecord {
        t: new.t,
        mass: total_mass(grid, new),
        energy: e.total,
        e_grad: e.grad,
        e_pot: e.pot,
        e_bgrad: e.bgrad,
        e_bpot: e.bpot,
        vstar_dtu,
        sqrt_tau_dtu,
        dtu_gamma,
        u_v: grid.h1_norm(&new.u),
        sqrtkappa_ugamma_v: math::sqrt(cfg.kappa) * grid.h1_boundary_norm(&ug),
        mu_v: grid.h1_norm(&new.mu),
        mu_mean: grid.mean(&new.mu),
        xi_h: grid.l2_bulk(&xi),
        xigamma_h: grid.l2_boundary(&xig),
        lap_u_h: grid.l2_bulk(&grid.laplacian(&new.u)),
        normal_deriv: grid.l2_boundary(&grid.normal_derivative(&new.u)),
        obstacle_violation: if obstacle { obstacle_violation(&new.u) } else { 0.0 },
    })
}

/// `max(|u| − 1, 0)`
pub fn obstacle_violation(u: &Field) -> f64 {
    u.values().iter().fold(0.0, |m, v| m.max(v.abs() - 1.0))
}

/// `L∞(0,T)` and `L²(0,T)` aggregates of one monitored quantity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aggregate {
    pub name: &'static str,
    pub linf: f64,
    pub l2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonitorReport {
    pub aggregates: Vec<Aggregate>,
    /// The combination bounded uniformly in `ε` and `κ` by the first energy
    /// estimate: `L²` of the time derivatives plus `L∞` of the `V` norms and of
    /// the potential integrals.
    pub energy_estimate: f64,
}

impl MonitorReport {
    pub fn get(&self, name: &str) -> Option<&Aggregate> {
        self.aggregates.iter().find(|a| a.name == name)
    }
}

/// Aggregates of every column except `t`. `L²(0,T)` uses the right-endpoint
/// rule over rows `1..`.
pub fn estimate_monitor(records: &[DiagnosticsRecord]) -> MonitorReport {
    let names: Vec<&'static str> = CSV_HEADER.split(',').skip(1).collect();
    let mut aggregates = Vec::with_capacity(names.len());
    for (c, name) in names.iter().enumerate() {
        let mut linf: f64 = 0.0;
        let mut sq = 0.0;
        for (k, r) in records.iter().enumerate() {
            let v = r.values()[c + 1];
            linf = linf.max(v.abs());
            if k > 0 {
                sq += (r.t - records[k - 1].t) * v * v;
            }
        }
        aggregates.push(Aggregate { name, linf, l2: math::sqrt(sq) });
    }
    let mut report = MonitorReport { aggregates, energy_estimate: 0.0 };
    let l2 = |n: &str| report.get(n).map_or(0.0, |a| a.l2);
    let linf = |n: &str| report.get(n).map_or(0.0, |a| a.linf);
    let est = l2("vstar_dtu")
        + linf("u_V")
        + l2("sqrt_tau_dtu")
        + l2("dtu_gamma")
        + linf("sqrtkappa_uGamma_V")
        + linf("e_pot")
        + linf("e_bpot");
    report.energy_estimate = est;
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::PotentialPair;

    #[test]
    fn sci_format_matches_c() {
        assert_eq!(format_sci(1.0), "1.000000000000e+00");
        assert_eq!(format_sci(-0.000123), "-1.230000000000e-04");
        assert_eq!(format_sci(0.0), "0.000000000000e+00");
        assert_eq!(format_sci(6.02e123), "6.020000000000e+123");
    }

    #[test]
    fn header_has_nineteen_columns() {
        assert_eq!(CSV_HEADER.split(',').count(), DiagnosticsRecord::default().values().len());
    }

    #[test]
    fn mass_examples() {
        let g = SlabGrid::unit(8, 8).unwrap();
        let s = State { u: g.constant(0.5), mu: g.zeros(), t: 0.0 };
        assert!((total_mass(&g, &s) - 0.5).abs() < 1e-15);
        let c = State { u: g.field_from_fn(|x, _| (2.0 * core::f64::consts::PI * x).cos()), ..s };
        assert!(total_mass(&g, &c).abs() < 1e-14);
    }

    #[test]
    fn energy_examples() {
        let g = SlabGrid::new(8, 6, 2.0, 1.5).unwrap();
        let cfg = RunConfig::new(g, PotentialPair::regular(), g.zeros());
        let zero = State { u: g.zeros(), mu: g.zeros(), t: 0.0 };
        assert_eq!(free_energy(&g, &zero, &cfg).unwrap().total, 0.0);

        let c2 = 1.0;
        let m0 = 0.4;
        let cfg = RunConfig::new(g, PotentialPair::obstacle(c2), g.constant(m0));
        let s = State { u: g.constant(m0), mu: g.zeros(), t: 0.0 };
        let e = free_energy(&g, &s, &cfg).unwrap();
        let expect = -c2 * m0 * m0 * (g.lx() * g.ly() + 2.0 * g.lx());
        assert!((e.total - expect).abs() < 1e-12);

        let mut cfg = RunConfig::new(g, PotentialPair::regular(), g.zeros());
        cfg.kappa = 0.0;
        let w = State { u: g.field_from_fn(|x, y| x.sin() * y), mu: g.zeros(), t: 0.0 };
        assert_eq!(free_energy(&g, &w, &cfg).unwrap().bgrad, 0.0);
    }

    #[test]
    fn zero_trajectory_aggregates_vanish() {
        let recs = [DiagnosticsRecord::default(), DiagnosticsRecord { t: 0.1, ..Default::default() }];
        let m = estimate_monitor(&recs);
        assert!(m.aggregates.iter().all(|a| a.linf == 0.0 && a.l2 == 0.0));
        assert_eq!(m.energy_estimate, 0.0);
    }
}
