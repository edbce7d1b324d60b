//! TOML run configuration.
//!
//! Every section is optional; missing keys take the defaults below, which
//! describe the regular double-well potential on a unit square. Validation
//! reports every problem at once and names the model assumption each one
//! breaks.

use std::fmt;
use std::path::{Path, PathBuf};

use cahnbc_core::stepper::TimeData;
use cahnbc_core::{initial, BoundaryField, Field, GraphKind, MonotoneGraph, Perturbation, PotentialPair, RunConfig, SlabGrid, Splitting};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::snapshot;

/// Distance the initial mean keeps from the edge of the boundary graph domain.
const MEAN_MARGIN: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub grid: GridSection,
    pub physics: PhysicsSection,
    pub potentials: PotentialsSection,
    pub data: DataSection,
    pub time: TimeSection,
    pub solver: SolverSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub nx: usize,
    pub ny: usize,
    pub lx: f64,
    pub ly: f64,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { nx: 32, ny: 32, lx: 1.0, ly: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsSection {
    pub tau: f64,
    pub kappa: f64,
    pub eps: f64,
}

impl Default for PhysicsSection {
    fn default() -> Self {
        PhysicsSection { tau: 1.0, kappa: 1.0, eps: 0.01 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GraphName {
    Linear,
    Cubic,
    Obstacle,
    Logarithmic,
}

impl From<GraphName> for GraphKind {
    fn from(g: GraphName) -> Self {
        match g {
            GraphName::Linear => GraphKind::Linear,
            GraphName::Cubic => GraphKind::Cubic,
            GraphName::Obstacle => GraphKind::Obstacle,
            GraphName::Logarithmic => GraphKind::Logarithmic,
        }
    }
}

/// `params = [scale]` or `[scale, slope]` for `scale·β₀(r) + slope·r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub kind: GraphName,
    #[serde(default)]
    pub params: Vec<f64>,
}

impl GraphSpec {
    fn cubic() -> Self {
        GraphSpec { kind: GraphName::Cubic, params: vec![1.0] }
    }

    pub fn build(&self) -> std::result::Result<MonotoneGraph, String> {
        let (scale, slope) = match self.params[..] {
            [] => (1.0, 0.0),
            [a] => (a, 0.0),
            [a, b] => (a, b),
            _ => return Err(format!("expected at most two params, got {}", self.params.len())),
        };
        MonotoneGraph::composite(self.kind.into(), scale, slope).map_err(|e| e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerturbationSpec {
    /// `π(r) = slope·r`; zero means no perturbation.
    pub slope: f64,
}

impl Default for PerturbationSpec {
    fn default() -> Self {
        PerturbationSpec { slope: -1.0 }
    }
}

impl PerturbationSpec {
    fn build(&self) -> Perturbation {
        if self.slope == 0.0 {
            Perturbation::Zero
        } else {
            Perturbation::linear(self.slope)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PotentialsSection {
    pub bulk: GraphSpec,
    pub pi: PerturbationSpec,
    pub boundary: GraphSpec,
    pub pi_gamma: PerturbationSpec,
    pub rho: f64,
    pub c0: f64,
    pub same_growth: bool,
}

impl Default for PotentialsSection {
    fn default() -> Self {
        PotentialsSection {
            bulk: GraphSpec::cubic(),
            pi: PerturbationSpec::default(),
            boundary: GraphSpec::cubic(),
            pi_gamma: PerturbationSpec::default(),
            rho: 1.0,
            c0: 0.01,
            same_growth: true,
        }
    }
}

fn one() -> usize {
    1
}

fn four() -> usize {
    4
}

/// Bulk field recipes. `random-smooth` draws from the section seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldSpec {
    Zero,
    Constant {
        value: f64,
    },
    Fourier {
        #[serde(default)]
        mean: f64,
        amplitude: f64,
        #[serde(default = "one")]
        kx: usize,
        #[serde(default)]
        ky: usize,
    },
    RandomSmooth {
        #[serde(default)]
        mean: f64,
        amplitude: f64,
        #[serde(default = "four")]
        modes: usize,
    },
    /// A `.field` snapshot, relative to the configuration file.
    File {
        path: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BoundarySpec {
    Zero,
    Constant {
        value: f64,
    },
    /// `mean + amplitude·cos(2πkx·x/Lx)` on both boundary lines.
    Fourier {
        #[serde(default)]
        mean: f64,
        amplitude: f64,
        #[serde(default = "one")]
        kx: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataSection {
    pub seed: u64,
    pub u0: FieldSpec,
    pub g: FieldSpec,
    pub g_gamma: BoundarySpec,
}

impl Default for DataSection {
    fn default() -> Self {
        DataSection {
            seed: 0,
            u0: FieldSpec::RandomSmooth { mean: 0.0, amplitude: 0.5, modes: 4 },
            g: FieldSpec::Zero,
            g_gamma: BoundarySpec::Zero,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeSection {
    pub dt: f64,
    pub t_end: f64,
}

impl Default for TimeSection {
    fn default() -> Self {
        TimeSection { dt: 1e-3, t_end: 0.1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SplittingName {
    #[default]
    ImplicitConvex,
    FullyImplicit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    pub linear_tol: f64,
    pub splitting: SplittingName,
}

impl Default for SolverSection {
    fn default() -> Self {
        SolverSection { newton_tol: 1e-10, newton_max_iter: 25, linear_tol: 1e-12, splitting: SplittingName::ImplicitConvex }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub directory: PathBuf,
    /// Write a `u` snapshot every this many steps; 0 keeps only the first
    /// and last.
    pub snapshot_every: usize,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { directory: PathBuf::from("out"), snapshot_every: 0 }
    }
}

/// Model assumption a configuration value can break.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Assumption {
    /// A1: maximal monotone graphs with `0 ∈ β(0)`.
    Graphs,
    /// A2: the boundary graph dominates the bulk graph.
    Domination,
    /// A3: Lipschitz perturbations.
    Perturbations,
    /// A4: initial data, mean interior to the boundary graph domain.
    InitialData,
    /// A5: source data.
    SourceData,
    /// `τ, κ ∈ [0, 1]`, `ε ∈ (0, 1]`.
    Coefficients,
    /// Grid, time step and solver settings.
    Discretization,
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Assumption::Graphs => "A1, maximal monotone graphs",
            Assumption::Domination => "A2, boundary graph dominates bulk graph",
            Assumption::Perturbations => "A3, Lipschitz perturbations",
            Assumption::InitialData => "A4, initial data with mean interior to D(beta_gamma)",
            Assumption::SourceData => "A5, source data",
            Assumption::Coefficients => "coefficients normalised to tau, kappa in [0, 1] and eps in (0, 1]",
            Assumption::Discretization => "discretization",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub key: &'static str,
    pub assumption: Assumption,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} [breaks {}]", self.key, self.message, self.assumption)
    }
}

impl Config {
    pub fn from_toml(text: &str, path: &Path) -> Result<Config> {
        toml::from_str(text).map_err(|e| CliError::Parse { path: path.to_path_buf(), message: e.to_string() })
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
        Config::from_toml(&text, path)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("configuration serializes")
    }

    /// Validates every section and assembles the solver configuration.
    /// `base` resolves relative file paths.
    pub fn resolve(&self, base: &Path) -> Result<RunConfig> {
        let mut v = Vec::new();
        let mut bad = |key, assumption, message: String| v.push(Violation { key, assumption, message });

        let g = &self.grid;
        let grid = match SlabGrid::new(g.nx, g.ny, g.lx, g.ly) {
            Ok(grid) => Some(grid),
            Err(e) => {
                bad("grid", Assumption::Discretization, e.to_string());
                None
            }
        };

        let p = &self.physics;
        if !(0.0..=1.0).contains(&p.tau) {
            bad("physics.tau", Assumption::Coefficients, format!("tau = {} lies outside [0, 1]", p.tau));
        }
        if !(0.0..=1.0).contains(&p.kappa) {
            bad("physics.kappa", Assumption::Coefficients, format!("kappa = {} lies outside [0, 1]", p.kappa));
        }
        if !(p.eps > 0.0 && p.eps <= 1.0) {
            bad("physics.eps", Assumption::Coefficients, format!("eps = {} lies outside (0, 1]", p.eps));
        }

        let pot = &self.potentials;
        let bulk = pot.bulk.build().map_err(|m| bad("potentials.bulk", Assumption::Graphs, m)).ok();
        let boundary = pot.boundary.build().map_err(|m| bad("potentials.boundary", Assumption::Graphs, m)).ok();
        for (key, s) in [("potentials.pi.slope", pot.pi.slope), ("potentials.pi_gamma.slope", pot.pi_gamma.slope)] {
            if !s.is_finite() {
                bad(key, Assumption::Perturbations, format!("slope {s} is not finite"));
            }
        }
        if !(pot.rho >= 1.0) {
            bad("potentials.rho", Assumption::Domination, format!("rho = {} must be at least 1", pot.rho));
        }
        if !(pot.c0 > 0.0) {
            bad("potentials.c0", Assumption::Domination, format!("c0 = {} must be positive", pot.c0));
        }
        if let (Some(b), Some(bg)) = (bulk, boundary) {
            if !bg.domain().is_subset_of(b.domain()) {
                bad(
                    "potentials.boundary",
                    Assumption::Domination,
                    format!("domain {:?} of the boundary graph is not inside the bulk domain {:?}", bg.domain(), b.domain()),
                );
            } else if pot.same_growth && bg.domain() != b.domain() {
                bad("potentials.same_growth", Assumption::Domination, "same growth needs equal graph domains".into());
            }
        }

        let t = &self.time;
        if !(t.dt > 0.0 && t.dt.is_finite()) {
            bad("time.dt", Assumption::Discretization, format!("dt = {} must be positive", t.dt));
        }
        if !(t.t_end > 0.0 && t.t_end.is_finite()) {
            bad("time.t_end", Assumption::Discretization, format!("t_end = {} must be positive", t.t_end));
        }
        let s = &self.solver;
        if !(s.newton_tol > 0.0) || !(s.linear_tol > 0.0) || s.newton_max_iter == 0 {
            bad("solver", Assumption::Discretization, "tolerances and the iteration cap must be positive".into());
        }

        let mut fields = None;
        if let Some(grid) = grid {
            let u0 = self.field(&grid, &self.data.u0, self.data.seed, base)?;
            let gf = self.field(&grid, &self.data.g, self.data.seed.wrapping_add(1), base)?;
            let gg = boundary_field(&grid, &self.data.g_gamma);
            match &u0 {
                Err(m) => bad("data.u0", Assumption::InitialData, m.clone()),
                Ok(u) if !u.is_finite() => bad("data.u0", Assumption::InitialData, "values are not finite".into()),
                Ok(u) => {
                    if let Some(bg) = boundary {
                        let m0 = grid.mean(u);
                        // a constant field's quadrature mean can miss its value by an ulp
                        let d = MEAN_MARGIN * (1.0 + m0.abs());
                        if !(bg.domain().interior_contains(m0 - d) && bg.domain().interior_contains(m0 + d)) {
                            bad(
                                "data.u0",
                                Assumption::InitialData,
                                format!("mean m0 = {m0} is not in the interior of the boundary graph domain {:?}", bg.domain()),
                            );
                        }
                    }
                }
            }
            match &gf {
                Err(m) => bad("data.g", Assumption::SourceData, m.clone()),
                Ok(f) if !f.is_finite() => bad("data.g", Assumption::SourceData, "values are not finite".into()),
                Ok(_) => {}
            }
            if gg.iter().any(|x| !x.is_finite()) {
                bad("data.g_gamma", Assumption::SourceData, "values are not finite".into());
            }
            if let (Ok(u0), Ok(gf)) = (u0, gf) {
                fields = Some((grid, u0, gf, gg));
            }
        }

        if !v.is_empty() {
            return Err(CliError::Validation(v));
        }
        let (grid, u0, gf, gg) = fields.expect("validated");
        let potentials = PotentialPair {
            bulk: bulk.expect("validated"),
            pi: pot.pi.build(),
            boundary: boundary.expect("validated"),
            pi_gamma: pot.pi_gamma.build(),
            rho: pot.rho,
            c0: pot.c0,
            same_growth: pot.same_growth,
        };
        let mut cfg = RunConfig::new(grid, potentials, u0);
        cfg.tau = p.tau;
        cfg.kappa = p.kappa;
        cfg.eps = p.eps;
        cfg.dt = t.dt;
        cfg.t_end = t.t_end;
        cfg.g = TimeData::Constant(gf);
        cfg.g_gamma = TimeData::Constant(gg);
        cfg.newton_tol = s.newton_tol;
        cfg.newton_max_iter = s.newton_max_iter;
        cfg.linear_tol = s.linear_tol;
        cfg.splitting = match s.splitting {
            SplittingName::ImplicitConvex => Splitting::ImplicitConvex,
            SplittingName::FullyImplicit => Splitting::FullyImplicit,
        };
        Ok(cfg)
    }

    /// Outer error: the file could not be read. Inner error: it does not fit.
    fn field(&self, grid: &SlabGrid, spec: &FieldSpec, seed: u64, base: &Path) -> Result<std::result::Result<Field, String>> {
        Ok(Ok(match spec {
            FieldSpec::Zero => grid.zeros(),
            FieldSpec::Constant { value } => grid.constant(*value),
            FieldSpec::Fourier { mean, amplitude, kx, ky } => initial::fourier(grid, *mean, *amplitude, *kx, *ky),
            FieldSpec::RandomSmooth { mean, amplitude, modes } => initial::random_smooth(grid, *mean, *amplitude, seed, *modes),
            FieldSpec::File { path } => {
                let snap = snapshot::read(&base.join(path))?;
                if (snap.grid.nx(), snap.grid.ny()) != (grid.nx(), grid.ny()) {
                    return Ok(Err(format!(
                        "{} holds a {}x{} field, the grid is {}x{}",
                        path.display(),
                        snap.grid.nx(),
                        snap.grid.ny(),
                        grid.nx(),
                        grid.ny()
                    )));
                }
                snap.field
            }
        }))
    }
}

fn boundary_field(grid: &SlabGrid, spec: &BoundarySpec) -> BoundaryField {
    match spec {
        BoundarySpec::Zero => grid.boundary_zeros(),
        BoundarySpec::Constant { value } => grid.boundary_constant(*value),
        BoundarySpec::Fourier { mean, amplitude, kx } => {
            let k = 2.0 * std::f64::consts::PI * *kx as f64 / grid.lx();
            grid.boundary_from_fn(|x, _| mean + amplitude * (k * x).cos())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Config {
        Config::from_toml(text, Path::new("test.toml")).unwrap()
    }

    fn violations(text: &str) -> Vec<Violation> {
        match parse(text).resolve(Path::new(".")) {
            Err(CliError::Validation(v)) => v,
            Err(e) => panic!("expected a validation error, got {e}"),
            Ok(_) => panic!("expected a validation error"),
        }
    }

    #[test]
    fn empty_file_takes_defaults() {
        let c = parse("");
        assert_eq!(c, Config::default());
        let cfg = c.resolve(Path::new(".")).unwrap();
        assert_eq!((cfg.grid.nx(), cfg.grid.ny()), (32, 32));
        assert_eq!(cfg.potentials, PotentialPair::regular());
        // the echo parses back to the same configuration
        assert_eq!(parse(&c.to_toml()), c);
    }

    #[test]
    fn large_kappa_names_the_coefficient_range() {
        let v = violations("[physics]\nkappa = 1.5\n");
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].assumption, Assumption::Coefficients);
        assert!(v[0].to_string().contains("kappa = 1.5"));
    }

    #[test]
    fn obstacle_at_the_edge_breaks_the_initial_mean() {
        let v = violations(
            r#"
            [potentials]
            bulk = { kind = "obstacle" }
            boundary = { kind = "obstacle" }
            [data.u0]
            kind = "constant"
            value = 1.0
            "#,
        );
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].assumption, Assumption::InitialData);
        assert!(v[0].to_string().contains("A4"));
    }

    #[test]
    fn every_violation_is_reported() {
        let v = violations(
            r#"
            [physics]
            tau = -1.0
            kappa = 2.0
            eps = 0.0
            [potentials]
            rho = 0.5
            bulk = { kind = "cubic", params = [-1.0] }
            [time]
            dt = 0.0
            "#,
        );
        let keys: Vec<&str> = v.iter().map(|x| x.key).collect();
        assert_eq!(keys, ["physics.tau", "physics.kappa", "physics.eps", "potentials.bulk", "potentials.rho", "time.dt"]);
    }

    #[test]
    fn boundary_domain_must_sit_inside_bulk_domain() {
        let v = violations(
            r#"
            [potentials]
            bulk = { kind = "logarithmic" }
            boundary = { kind = "cubic" }
            same_growth = false
            "#,
        );
        assert_eq!(v[0].assumption, Assumption::Domination);
    }

    #[test]
    fn unknown_keys_are_parse_errors() {
        let err = Config::from_toml("[physics]\nkapa = 0.5\n", Path::new("x.toml")).unwrap_err();
        assert_eq!(err.exit_code(), 1);
        assert!(err.to_string().contains("kapa"));
    }

    #[test]
    fn data_kinds_build_fields() {
        let c = parse(
            r#"
            [grid]
            nx = 8
            ny = 6
            [data]
            seed = 3
            u0 = { kind = "fourier", mean = 0.1, amplitude = 0.2, kx = 2 }
            g = { kind = "constant", value = 0.5 }
            g_gamma = { kind = "fourier", amplitude = 1.0 }
            "#,
        );
        let cfg = c.resolve(Path::new(".")).unwrap();
        assert!((cfg.grid.mean(&cfg.u0) - 0.1).abs() < 1e-14);
        assert_eq!(cfg.g.at(0.0).values()[5], 0.5);
        assert_eq!(cfg.g_gamma.at(0.0).bottom[0], 1.0);
    }
}
