//! Subcommand bodies. Each one writes its files before reporting a failed
//! acceptance check, so the evidence is on disk either way.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use cahnbc_core::diagnostics::{self, format_sci, DiagnosticsRecord, CSV_HEADER};
use cahnbc_core::experiments::{
    self, continuous_dependence_with, epsilon_sweep_with, kappa_sweep_with, sweep_summary_header, sweep_summary_rows,
    ConvergenceStudy, PerturbationTarget, SweepResult, Trajectory, MANUFACTURED_HEADER,
};
use cahnbc_core::graphs::check_contracts;
use cahnbc_core::{initial, stepper, RunConfig, State};
use rayon::prelude::*;

use crate::config::Config;
use crate::error::{CliError, Result};
use crate::snapshot;

/// Loads and validates a configuration; relative data paths resolve against
/// the file's directory.
pub fn load(path: &Path) -> Result<(Config, RunConfig)> {
    let cfg = Config::load(path)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let run = cfg.resolve(base)?;
    Ok((cfg, run))
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(CliError::io(dir))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(CliError::io(path))
}

pub fn diagnostics_csv(records: &[DiagnosticsRecord]) -> String {
    let mut s = String::with_capacity(records.len() * 19 * 20);
    s.push_str(CSV_HEADER);
    s.push('\n');
    for r in records {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

/// Sweep points are independent; `collect` keeps them in parameter order.
pub fn parallel(cfgs: &[RunConfig]) -> Vec<cahnbc_core::Result<Trajectory>> {
    cfgs.par_iter().map(experiments::simulate).collect()
}

fn echo_config(dir: &Path, cfg: &Config) -> Result<()> {
    write_file(&dir.join("resolved.toml"), &cfg.to_toml())
}

pub struct RunReport {
    pub steps: usize,
    pub mass_drift: f64,
    pub energy: (f64, f64),
    pub newton_iterations: usize,
}

pub fn run(config: &Path, out: Option<&Path>) -> Result<RunReport> {
    let (file, cfg) = load(config)?;
    let dir = out.map_or_else(|| file.output.directory.clone(), Path::to_path_buf);
    let snaps = dir.join("snapshots");
    create_dir(&snaps)?;
    echo_config(&dir, &file)?;

    let grid = cfg.grid;
    let every = file.output.snapshot_every;
    let n = cfg.n_steps();
    let snap_name = |k: usize| snaps.join(format!("u_{k:06}.field"));
    let s0 = State::initial(&cfg)?;
    let mut records = vec![diagnostics::record(&grid, None, &s0, &cfg)?];
    snapshot::write(&snap_name(0), &grid, &s0.u, 0.0)?;
    let mut io_err = None;
    let summary = stepper::run(&cfg, |ev| {
        records.push(diagnostics::record(&grid, Some(ev.old), ev.new, &cfg)?);
        if (every > 0 && ev.k % every == 0) || ev.k == n {
            if let Err(e) = snapshot::write(&snap_name(ev.k), &grid, &ev.new.u, ev.new.t) {
                io_err.get_or_insert(e);
            }
        }
        Ok(())
    });
    // keep what was computed even when the solver gives up
    write_file(&dir.join("diagnostics.csv"), &diagnostics_csv(&records))?;
    let summary = summary?;
    if let Some(e) = io_err {
        return Err(e);
    }
    let m0 = records[0].mass;
    let mass_drift = records.iter().map(|r| (r.mass - m0).abs()).fold(0.0, f64::max);
    Ok(RunReport {
        steps: summary.steps,
        mass_drift,
        energy: (records[0].energy, records[records.len() - 1].energy),
        newton_iterations: summary.stats.iter().map(|s| s.newton_iterations).sum(),
    })
}

fn param_name(prefix: &str, p: f64) -> String {
    format!("{prefix}_{p}.csv")
}

fn write_sweep(dir: &Path, prefix: &str, res: &SweepResult) -> Result<()> {
    create_dir(dir)?;
    for p in res.points.iter().chain(res.reference.iter()) {
        write_file(&dir.join(param_name(prefix, p.param)), &diagnostics_csv(&p.records))?;
    }
    let mut s = sweep_summary_header();
    s.push('\n');
    for row in sweep_summary_rows(res) {
        s.push_str(&row);
        s.push('\n');
    }
    write_file(&dir.join("summary.csv"), &s)
}

fn sweep_table(res: &SweepResult, label: &str) -> String {
    let mut s = format!("{label:>12} {:>14} {:>14} {:>14}\n", "d_to_ref", "d_pairwise", "xi_gamma_L2");
    for p in res.points.iter().chain(res.reference.iter()) {
        let pair = p.to_next.map_or(f64::NAN, |d| d.c_h);
        let _ = writeln!(s, "{:>12} {:>14.6e} {:>14.6e} {:>14.6e}", p.param, p.to_ref.c_h, pair, p.xi_gamma_l2);
    }
    let _ = writeln!(s, "fitted rate {:.3}", res.rate_fit);
    s
}

fn out_dir(file: &Config, out: Option<&Path>, sub: &str) -> PathBuf {
    out.map_or_else(|| file.output.directory.join(sub), Path::to_path_buf)
}

pub fn sweep_kappa(config: &Path, kappas: &[f64], out: Option<&Path>) -> Result<String> {
    let (file, cfg) = load(config)?;
    let dir = out_dir(&file, out, "kappa_sweep");
    let res = kappa_sweep_with(&cfg, kappas, parallel)?;
    write_sweep(&dir, "kappa", &res)?;
    echo_config(&dir, &file)?;
    let table = sweep_table(&res, "kappa");
    if res.passed {
        Ok(table)
    } else {
        Err(CliError::Acceptance(format!("distances to the kappa = 0 run do not decay\n{table}")))
    }
}

pub fn sweep_epsilon(config: &Path, epsilons: &[f64], out: Option<&Path>) -> Result<String> {
    let (file, cfg) = load(config)?;
    let dir = out_dir(&file, out, "epsilon_sweep");
    let res = epsilon_sweep_with(&cfg, epsilons, parallel)?;
    write_sweep(&dir, "eps", &res)?;
    echo_config(&dir, &file)?;
    let mut table = sweep_table(&res, "eps");
    let viol: Vec<String> = res.points.iter().map(|p| format!("{:.3e}", p.max_obstacle_violation)).collect();
    let _ = writeln!(table, "max obstacle violation {}", viol.join(" "));
    if res.passed {
        Ok(table)
    } else {
        Err(CliError::Acceptance(format!("pairwise distances or obstacle violations do not decrease\n{table}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Target {
    /// `u0 + a·cos(2πx/Lx)`
    U0,
    /// `g + a·z`, `z` smooth, mean-free and seeded from the data seed
    G,
}

pub const CONTDEP_HEADER: &str = "target,magnitude,lhs,rhs,ratio,ratio_spread";

pub fn contdep(config: &Path, target: Target, magnitudes: &[f64], out: Option<&Path>) -> Result<String> {
    let (file, cfg) = load(config)?;
    if magnitudes.is_empty() {
        return Err(CliError::Usage("at least one magnitude is needed".into()));
    }
    let dir = out.map_or_else(|| file.output.directory.clone(), Path::to_path_buf);
    create_dir(&dir)?;
    let grid = cfg.grid;
    let (name, t) = match target {
        Target::U0 => ("u0", PerturbationTarget::InitialData(initial::fourier(&grid, 0.0, 1.0, 1, 0))),
        Target::G => {
            let z = initial::random_smooth(&grid, 0.0, 1.0, file.data.seed.wrapping_add(2), 6);
            ("g", PerturbationTarget::Source(z))
        }
    };
    let res = continuous_dependence_with(&cfg, &t, magnitudes, parallel)?;
    let mut s = String::from(CONTDEP_HEADER);
    s.push('\n');
    for p in &res.points {
        let f = format_sci;
        let _ = writeln!(s, "{name},{},{},{},{},{}", f(p.magnitude), f(p.lhs), f(p.rhs), f(p.ratio), f(res.ratio_spread));
    }
    write_file(&dir.join("contdep.csv"), &s)?;
    let msg = format!("ratio spread {:.4} over {} magnitudes\n{s}", res.ratio_spread, res.points.len());
    if res.passed {
        Ok(msg)
    } else {
        Err(CliError::Acceptance(format!("ratio is not stable across magnitudes: {msg}")))
    }
}

pub fn manufactured(study: &ConvergenceStudy, out: &Path) -> Result<String> {
    let rep = experiments::manufactured_convergence(study)?;
    create_dir(out)?;
    let mut s = String::from(MANUFACTURED_HEADER);
    s.push('\n');
    let f = format_sci;
    for r in rep.space.iter().chain(&rep.time) {
        let _ = writeln!(s, "{},{},{},{},{},{}", f(r.h), f(r.dt), f(r.err_h), f(r.err_v), f(rep.order_space), f(rep.order_time));
    }
    write_file(&out.join("manufactured.csv"), &s)?;
    let msg = format!("space order {:.3}, time order {:.3}", rep.order_space, rep.order_time);
    if rep.passed() {
        Ok(msg)
    } else {
        Err(CliError::Acceptance(format!("orders off target: {msg}")))
    }
}

/// Samples the domination inequalities and the Yosida contracts of both
/// graphs of the configured pair.
pub fn verify_graphs(config: &Path) -> Result<String> {
    let (_, cfg) = load(config)?;
    let pair = cfg.potentials;
    let eps: Vec<f64> = (0..13).map(|k| 10f64.powf(-k as f64 / 3.0)).collect();
    let pts: Vec<f64> = (0..=600).map(|k| -3.0 + k as f64 / 100.0).collect();
    // low-discrepancy triples: r, s in [-4, 4], eps in [1e-4, 1]
    let samples: Vec<(f64, f64, f64)> = (1..=1000)
        .map(|k| {
            let k = k as f64;
            let frac = |a: f64| (k * a).fract();
            (8.0 * frac(0.618_033_988_7) - 4.0, 8.0 * frac(0.754_877_666_2) - 4.0, 10f64.powf(-4.0 * frac(0.569_840_290_9)))
        })
        .collect();
    let mut report = String::new();
    let mut failures = Vec::new();
    for (name, g) in [("bulk", pair.bulk), ("boundary", pair.boundary)] {
        let c = check_contracts(&g, &samples, pair.rho.max(2.0));
        let _ = writeln!(report, "{name} {:?}: contract excess {:.3e} over {} samples", g.kind, c.worst(), c.samples);
        if !c.passed() {
            failures.push(format!("{name} graph contract fails: {c:?}"));
        }
    }
    let d = pair.check_domination(&eps, &pts);
    let w = d.max_violation();
    let _ = writeln!(report, "domination: {} samples, worst excess {:.3e} at r = {}, eps = {}", d.samples, w.value, w.r, w.eps);
    if !d.passed {
        let at = if w.eps == 0.0 { format!("r = {}", w.r) } else { format!("r = {}, eps = {}", w.r, w.eps) };
        failures.push(format!("domination violated at {at} by {:.3e}", w.value));
    }
    if failures.is_empty() {
        Ok(report)
    } else {
        Err(CliError::Acceptance(format!("{}\n{report}", failures.join("\n"))))
    }
}
