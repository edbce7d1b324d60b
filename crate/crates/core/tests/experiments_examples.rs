use cahnbc_core::experiments::{
    continuous_dependence, epsilon_sweep, kappa_sweep, simulate, sweep_summary_header, sweep_summary_rows, Manufactured,
    PerturbationTarget,
};
use cahnbc_core::stepper::TimeData;
use cahnbc_core::{initial, Error, PotentialPair, RunConfig, SlabGrid};

fn small(pair: PotentialPair, u0: impl FnOnce(&SlabGrid) -> cahnbc_core::Field) -> RunConfig {
    let grid = SlabGrid::unit(12, 12).unwrap();
    let u0 = u0(&grid);
    let mut cfg = RunConfig::new(grid, pair, u0);
    cfg.dt = 0.01;
    cfg.t_end = 0.05;
    cfg
}

#[test]
fn constant_state_is_kappa_independent() {
    let cfg = small(PotentialPair::regular(), |g| g.constant(0.3));
    let res = kappa_sweep(&cfg, &[1.0, 0.5, 0.25]).unwrap();
    assert!(res.d().iter().all(|&d| d == 0.0), "{:?}", res.d());
    assert!(res.passed);
    assert_eq!(res.reference.as_ref().unwrap().param, 0.0);
}

#[test]
fn constant_state_is_epsilon_independent() {
    // β_ε(0) = π(0) = 0, so zero data keep the zero state steady for every ε
    let cfg = small(PotentialPair::logarithmic(2.0), |g| g.constant(0.0));
    let res = epsilon_sweep(&cfg, &[0.1, 0.01, 0.001]).unwrap();
    assert!(res.d().iter().all(|&d| d <= cfg.newton_tol), "{:?}", res.d());
    assert!(res.passed);
}

#[test]
fn sweep_lists_are_checked() {
    let cfg = small(PotentialPair::regular(), |g| g.constant(0.0));
    for bad in [&[1.0, 0.5][..], &[0.5, 1.0, 0.25], &[2.0, 1.0, 0.5], &[0.5, 0.5, 0.25]] {
        assert!(matches!(epsilon_sweep(&cfg, bad), Err(Error::InvalidParameter(_))), "{bad:?}");
    }
    // zero only names the reference run
    assert!(kappa_sweep(&cfg, &[1.0, 0.5, 0.25, 0.0]).is_ok());
}

#[test]
fn kappa_sweep_is_reproducible() {
    let cfg = small(PotentialPair::regular(), |g| initial::random_smooth(g, 0.0, 0.5, 1, 3));
    let a = kappa_sweep(&cfg, &[1.0, 0.5, 0.25]).unwrap();
    let b = kappa_sweep(&cfg, &[1.0, 0.5, 0.25]).unwrap();
    assert_eq!(a.d(), b.d());
    assert_eq!(sweep_summary_rows(&a), sweep_summary_rows(&b));
    let rows = sweep_summary_rows(&a);
    assert_eq!(rows.len(), 4);
    let cols = sweep_summary_header().split(',').count();
    assert!(rows.iter().all(|r| r.split(',').count() == cols));
}

#[test]
fn identical_data_give_zero_ratio() {
    let cfg = small(PotentialPair::regular(), |g| initial::random_smooth(g, 0.1, 0.4, 2, 3));
    let zero = cfg.grid.zeros();
    let res = continuous_dependence(&cfg, &PerturbationTarget::InitialData(zero), &[1e-1, 1e-2]).unwrap();
    for p in &res.points {
        assert_eq!((p.lhs, p.rhs, p.ratio), (0.0, 0.0, 0.0));
    }
}

#[test]
fn mean_shifting_perturbation_is_rejected() {
    let cfg = small(PotentialPair::regular(), |g| g.constant(0.0));
    let shape = cfg.grid.field_from_fn(|x, _| x);
    let err = continuous_dependence(&cfg, &PerturbationTarget::InitialData(shape), &[1e-2]).unwrap_err();
    assert!(matches!(err, Error::Mean { .. }));
}

#[test]
fn source_perturbation_is_seen() {
    let cfg = small(PotentialPair::regular(), |g| initial::random_smooth(g, 0.1, 0.4, 2, 3));
    let shape = initial::random_smooth(&cfg.grid, 0.0, 1.0, 5, 3);
    let res = continuous_dependence(&cfg, &PerturbationTarget::Source(shape), &[1e-1, 1e-2, 1e-3]).unwrap();
    assert!(res.points.iter().all(|p| p.lhs > 0.0 && p.ratio.is_finite()));
    assert!(res.passed, "{res:?}");
}

#[test]
fn steady_constant_stays_put() {
    let pair = PotentialPair::obstacle(1.0);
    let mut cfg = small(pair, |g| g.constant(0.25));
    // the boundary source balances the boundary reaction
    cfg.g_gamma = TimeData::Constant(cfg.grid.boundary_constant(pair.pi_gamma.eval(0.25)));
    let tr = simulate(&cfg).unwrap();
    for u in &tr.u {
        assert!(u.values().iter().all(|v| (v - 0.25).abs() <= cfg.newton_tol));
    }
}

#[test]
fn manufactured_error_shrinks_with_the_grid() {
    let m = Manufactured { t_end: 0.02, ..Manufactured::default() };
    let coarse = m.errors(8, 9, 1e-3).unwrap();
    let fine = m.errors(16, 17, 1e-3).unwrap();
    let ratio = coarse.err_h / fine.err_h;
    assert!(ratio > 2.8 && ratio < 5.2, "{ratio}");
    assert!(fine.err_v > 0.0);
}

#[test]
fn manufactured_data_start_on_the_exact_solution() {
    let m = Manufactured::default();
    let cfg = m.config(10, 11, 1e-2).unwrap();
    let (x, y) = (cfg.grid.x(3), cfg.grid.y(4));
    assert_eq!(cfg.u0[cfg.grid.idx(3, 4)], m.u(x, y, 0.0));
    // the chemical potential has a vanishing normal derivative
    let h = 1e-6;
    assert!((m.mu(x, h, 0.5) - m.mu(x, 0.0, 0.5)).abs() < 1e-9);
}
