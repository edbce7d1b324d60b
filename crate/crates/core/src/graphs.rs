//! Maximal monotone graphs on the real line and their Yosida calculus.
//!
//! Every graph in the catalog has the form `β(r) = scale·β₀(r) + slope·r`
//! where `β₀` is one of the four base graphs of [`GraphKind`]. All of them are
//! odd, so the resolvent is computed for `|r|` and the sign is restored.

use alloc::vec::Vec;

use crate::math;
use crate::{Error, Result};

/// Absolute tolerance of the scalar resolvent solve.
pub const ROOT_TOL: f64 = 1e-12;
/// Iteration cap of the scalar resolvent solve.
pub const ROOT_MAX_ITER: usize = 100;
/// Slack allowed when sampled inequalities are checked.
pub const DOMINATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GraphKind {
    /// `β₀(r) = r`.
    Linear,
    /// `β₀(r) = r³`.
    Cubic,
    /// `β₀ = ∂I_[-1,1]`, the subdifferential of the indicator of `[-1, 1]`.
    Obstacle,
    /// `β₀(r) = ln(1 + r) − ln(1 − r)` on `(-1, 1)`.
    Logarithmic,
}

/// Effective domain `D(β)` of a graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    Real,
    /// `[-1, 1]`
    ClosedUnit,
    /// `(-1, 1)`
    OpenUnit,
}

impl Domain {
    pub fn contains(self, r: f64) -> bool {
        match self {
            Domain::Real => r.is_finite(),
            Domain::ClosedUnit => (-1.0..=1.0).contains(&r),
            Domain::OpenUnit => r > -1.0 && r < 1.0,
        }
    }

    pub fn interior_contains(self, r: f64) -> bool {
        match self {
            Domain::Real => r.is_finite(),
            Domain::ClosedUnit | Domain::OpenUnit => r > -1.0 && r < 1.0,
        }
    }

    /// `self ⊆ other`
    pub fn is_subset_of(self, other: Domain) -> bool {
        match (self, other) {
            (_, Domain::Real) => true,
            (Domain::Real, _) => false,
            (Domain::OpenUnit, _) => true,
            (Domain::ClosedUnit, Domain::ClosedUnit) => true,
            (Domain::ClosedUnit, Domain::OpenUnit) => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotoneGraph {
    pub kind: GraphKind,
    /// Multiplier of the base graph. Irrelevant for [`GraphKind::Obstacle`].
    pub scale: f64,
    /// Coefficient of the added linear part.
    pub slope: f64,
}

impl MonotoneGraph {
    /// `β(r) = a·r`, `a ≥ 0`.
    pub fn linear(a: f64) -> Self {
        MonotoneGraph { kind: GraphKind::Linear, scale: a, slope: 0.0 }
    }

    /// `β(r) = a·r³`, `a > 0`.
    pub fn cubic(a: f64) -> Self {
        MonotoneGraph { kind: GraphKind::Cubic, scale: a, slope: 0.0 }
    }

    pub fn obstacle() -> Self {
        MonotoneGraph { kind: GraphKind::Obstacle, scale: 1.0, slope: 0.0 }
    }

    pub fn logarithmic() -> Self {
        MonotoneGraph { kind: GraphKind::Logarithmic, scale: 1.0, slope: 0.0 }
    }

    /// Affine composite `scale·β₀(r) + slope·r` of a base graph.
    pub fn composite(kind: GraphKind, scale: f64, slope: f64) -> Result<Self> {
        let g = MonotoneGraph { kind, scale, slope };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let scale_ok = match self.kind {
            GraphKind::Linear => self.scale >= 0.0,
            GraphKind::Obstacle => true,
            GraphKind::Cubic | GraphKind::Logarithmic => self.scale > 0.0,
        };
        if !scale_ok || !self.scale.is_finite() {
            return Err(Error::InvalidParameter(alloc::format!(
                "graph scale {} not admissible for {:?}",
                self.scale,
                self.kind
            )));
        }
        if !(self.slope >= 0.0) || !self.slope.is_finite() {
            return Err(Error::InvalidParameter(alloc::format!(
                "graph slope {} must be finite and nonnegative",
                self.slope
            )));
        }
        Ok(())
    }

    pub fn domain(&self) -> Domain {
        match self.kind {
            GraphKind::Linear | GraphKind::Cubic => Domain::Real,
            GraphKind::Obstacle => Domain::ClosedUnit,
            GraphKind::Logarithmic => Domain::OpenUnit,
        }
    }

    /// Minimal section `β°(r)`, the element of `β(r)` of least modulus.
    pub fn min_section(&self, r: f64) -> Result<f64> {
        if !self.domain().contains(r) {
            return Err(Error::Domain { value: r });
        }
        let b = self.slope * r;
        Ok(match self.kind {
            GraphKind::Linear => self.scale * r + b,
            GraphKind::Cubic => self.scale * r * r * r + b,
            // at r = ±1 the set is slope·r ± [0, ∞); the minimal element is slope·r
            GraphKind::Obstacle => b,
            GraphKind::Logarithmic => self.scale * log_ratio(r) + b,
        })
    }

    /// Derivative of the single-valued part at an interior point.
    fn derivative(&self, r: f64) -> f64 {
        match self.kind {
            GraphKind::Linear => self.scale + self.slope,
            GraphKind::Cubic => 3.0 * self.scale * r * r + self.slope,
            GraphKind::Obstacle => self.slope,
            GraphKind::Logarithmic => 2.0 * self.scale / ((1.0 - r) * (1.0 + r)) + self.slope,
        }
    }

    /// Convex primitive `β̂` with `β̂(0) = 0`; `+∞` outside its effective domain.
    pub fn primitive(&self, r: f64) -> f64 {
        let quad = 0.5 * self.slope * r * r;
        match self.kind {
            GraphKind::Linear => 0.5 * (self.scale + self.slope) * r * r,
            GraphKind::Cubic => 0.25 * self.scale * r * r * r * r + quad,
            GraphKind::Obstacle => {
                if (-1.0..=1.0).contains(&r) {
                    quad
                } else {
                    f64::INFINITY
                }
            }
            GraphKind::Logarithmic => {
                if (-1.0..=1.0).contains(&r) {
                    self.scale * (xlogx(1.0 + r) + xlogx(1.0 - r)) + quad
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    /// Resolvent `J_ε(r) = (I + εβ)⁻¹(r)`.
    pub fn resolvent(&self, eps: f64, r: f64) -> Result<f64> {
        check_eps(eps)?;
        if r == 0.0 {
            return Ok(0.0);
        }
        let sign = if r < 0.0 { -1.0 } else { 1.0 };
        let s = r.abs();
        let lin = 1.0 + eps * self.slope;
        let j = match self.kind {
            GraphKind::Linear => s / (1.0 + eps * (self.scale + self.slope)),
            GraphKind::Obstacle => (s / lin).min(1.0),
            GraphKind::Cubic => {
                let ea = eps * self.scale;
                let f = |x: f64| x * lin + ea * x * x * x - s;
                let df = |x: f64| lin + 3.0 * ea * x * x;
                // both bounds dominate the root; f is convex on [0, ∞) so Newton
                // from the right converges monotonically
                let hi = (s / lin).min(libm::cbrt(s / ea));
                safeguarded_newton(f, df, 0.0, hi, hi).ok_or(Error::Convergence { r, eps })?
            }
            GraphKind::Logarithmic => {
                let ea = eps * self.scale;
                let f = |x: f64| x * lin + ea * log_ratio(x) - s;
                let df = |x: f64| lin + 2.0 * ea / ((1.0 - x) * (1.0 + x));
                let hi = (s / lin).min(ONE_MINUS_ULP);
                if f(hi) <= 0.0 {
                    // the root is closer to 1 than the float grid resolves
                    hi
                } else {
                    safeguarded_newton(f, df, 0.0, hi, 0.5 * hi)
                        .ok_or(Error::Convergence { r, eps })?
                }
            }
        };
        Ok(sign * j)
    }

    /// Yosida approximation `β_ε(r) = (r − J_ε(r))/ε`.
    pub fn yosida(&self, eps: f64, r: f64) -> Result<f64> {
        let j = self.resolvent(eps, r)?;
        Ok((r - j) / eps)
    }

    /// Derivative of `β_ε`; for the obstacle graph the a.e. derivative.
    pub fn yosida_derivative(&self, eps: f64, r: f64) -> Result<f64> {
        let j = self.resolvent(eps, r)?;
        Ok(self.yosida_derivative_at(eps, r, j))
    }

    fn yosida_derivative_at(&self, eps: f64, r: f64, j: f64) -> f64 {
        match self.kind {
            GraphKind::Obstacle => {
                if r.abs() < 1.0 + eps * self.slope {
                    self.slope / (1.0 + eps * self.slope)
                } else {
                    1.0 / eps
                }
            }
            _ => {
                let d = self.derivative(j);
                if d.is_finite() {
                    d / (1.0 + eps * d)
                } else {
                    1.0 / eps
                }
            }
        }
    }

    /// `(β_ε(r), β_ε'(r))` with a single resolvent solve.
    pub fn yosida_with_derivative(&self, eps: f64, r: f64) -> Result<(f64, f64)> {
        let j = self.resolvent(eps, r)?;
        Ok(((r - j) / eps, self.yosida_derivative_at(eps, r, j)))
    }

    /// Moreau envelope `β̂_ε(r) = β̂(J_ε(r)) + (r − J_ε(r))²/(2ε)`.
    pub fn moreau(&self, eps: f64, r: f64) -> Result<f64> {
        let j = self.resolvent(eps, r)?;
        let d = r - j;
        Ok(self.primitive(j) + d * d / (2.0 * eps))
    }
}

const ONE_MINUS_ULP: f64 = 1.0 - f64::EPSILON / 2.0;

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(alloc::format!("eps = {eps} not in (0, 1]")))
    }
}

fn log_ratio(r: f64) -> f64 {
    math::ln_1p(r) - math::ln_1p(-r)
}

fn xlogx(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        x * math::ln(x)
    }
}

/// Newton iteration for an increasing `f` with `f(lo) ≤ 0 ≤ f(hi)`, falling
/// back to bisection whenever a step leaves the bracket.
fn safeguarded_newton(
    f: impl Fn(f64) -> f64,
    df: impl Fn(f64) -> f64,
    mut lo: f64,
    mut hi: f64,
    start: f64,
) -> Option<f64> {
    let mut x = start;
    for _ in 0..ROOT_MAX_ITER {
        let fx = f(x);
        if fx == 0.0 {
            return Some(x);
        }
        if fx < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - fx / df(x);
        let next = if newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
        let step = (next - x).abs();
        x = next;
        if step <= ROOT_TOL || hi - lo <= ROOT_TOL {
            return Some(x);
        }
    }
    None
}

/// Lipschitz perturbation `π`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Perturbation {
    Zero,
    /// `π(r) = slope·r`
    Linear { slope: f64 },
}

impl Perturbation {
    pub fn linear(slope: f64) -> Self {
        Perturbation::Linear { slope }
    }

    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            Perturbation::Zero => 0.0,
            Perturbation::Linear { slope } => slope * r,
        }
    }

    pub fn derivative(&self, _r: f64) -> f64 {
        match *self {
            Perturbation::Zero => 0.0,
            Perturbation::Linear { slope } => slope,
        }
    }

    /// `Π(r) = ∫₀^r π(s) ds`
    pub fn primitive(&self, r: f64) -> f64 {
        match *self {
            Perturbation::Zero => 0.0,
            Perturbation::Linear { slope } => 0.5 * slope * r * r,
        }
    }

    pub fn lipschitz(&self) -> f64 {
        match *self {
            Perturbation::Zero => 0.0,
            Perturbation::Linear { slope } => slope.abs(),
        }
    }

    /// Whether explicit treatment of `π` keeps the convex splitting energy stable.
    pub fn is_concave(&self) -> bool {
        match *self {
            Perturbation::Zero => true,
            Perturbation::Linear { slope } => slope <= 0.0,
        }
    }
}

/// Bulk and boundary potential data together with the domination constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialPair {
    pub bulk: MonotoneGraph,
    pub pi: Perturbation,
    pub boundary: MonotoneGraph,
    pub pi_gamma: Perturbation,
    pub rho: f64,
    pub c0: f64,
    pub same_growth: bool,
}

impl PotentialPair {
    /// Equal bulk and boundary graphs with equal perturbations.
    pub fn symmetric(graph: MonotoneGraph, pi: Perturbation) -> Self {
        PotentialPair {
            bulk: graph,
            pi,
            boundary: graph,
            pi_gamma: pi,
            rho: 1.0,
            c0: 0.01,
            same_growth: true,
        }
    }

    /// `F(r) = (r² − 1)²/4`: `β = r³`, `π = −r`.
    pub fn regular() -> Self {
        Self::symmetric(MonotoneGraph::cubic(1.0), Perturbation::linear(-1.0))
    }

    /// Logarithmic potential with `π = −2c₁r`.
    pub fn logarithmic(c1: f64) -> Self {
        Self::symmetric(MonotoneGraph::logarithmic(), Perturbation::linear(-2.0 * c1))
    }

    /// Double obstacle potential with `π = −2c₂r`.
    pub fn obstacle(c2: f64) -> Self {
        Self::symmetric(MonotoneGraph::obstacle(), Perturbation::linear(-2.0 * c2))
    }

    pub fn lipschitz_bulk(&self) -> f64 {
        self.pi.lipschitz()
    }

    pub fn lipschitz_boundary(&self) -> f64 {
        self.pi_gamma.lipschitz()
    }

    /// Structural checks that need no sampling: graph parameters, constants and
    /// the domain inclusions.
    pub fn validate(&self) -> Result<()> {
        self.bulk.validate()?;
        self.boundary.validate()?;
        if !(self.rho >= 1.0) {
            return Err(Error::InvalidParameter(alloc::format!("rho = {} must be >= 1", self.rho)));
        }
        if !(self.c0 > 0.0) {
            return Err(Error::InvalidParameter(alloc::format!("c0 = {} must be > 0", self.c0)));
        }
        if !self.boundary.domain().is_subset_of(self.bulk.domain()) {
            return Err(Error::InvalidParameter("D(beta_gamma) is not contained in D(beta)".into()));
        }
        if self.same_growth && self.boundary.domain() != self.bulk.domain() {
            return Err(Error::InvalidParameter(
                "same growth requires D(beta_gamma) = D(beta)".into(),
            ));
        }
        Ok(())
    }

    /// Samples the domination inequalities.
    ///
    /// The minimal-section condition is checked on the sample points that lie in
    /// `D(β_Γ)`; its Yosida counterpart `|β_ε| ≤ ϱ|β_Γ,ε| + c₀` on every sample
    /// point and every `ε` of `eps_list`. With `same_growth` the reverse bounds
    /// `(1/ϱ)|·_Γ| − c₀ ≤ |·|` are checked as well.
    pub fn check_domination(&self, eps_list: &[f64], sample_points: &[f64]) -> DominationReport {
        let mut report = DominationReport::new(self.same_growth);
        let (rho, c0) = (self.rho, self.c0);

        for &r in sample_points {
            if !self.boundary.domain().contains(r) {
                continue;
            }
            let (b, bg) = match (self.bulk.min_section(r), self.boundary.min_section(r)) {
                (Ok(b), Ok(bg)) => (b, bg),
                _ => {
                    report.record_section(f64::INFINITY, r);
                    continue;
                }
            };
            report.record_section(b.abs() - rho * bg.abs() - c0, r);
            if self.same_growth {
                report.record_section(bg.abs() / rho - c0 - b.abs(), r);
            }
        }

        for &eps in eps_list {
            for &r in sample_points {
                report.samples += 1;
                let (b, bg) = match (self.bulk.yosida(eps, r), self.boundary.yosida(eps, r)) {
                    (Ok(b), Ok(bg)) => (b, bg),
                    _ => {
                        report.record_upper(f64::INFINITY, r, eps);
                        continue;
                    }
                };
                report.record_upper(b.abs() - rho * bg.abs() - c0, r, eps);
                if self.same_growth {
                    report.record_lower(bg.abs() / rho - c0 - b.abs(), r, eps);
                }
            }
        }
        report.passed = report.section_violation <= DOMINATION_TOL
            && report.upper.value <= DOMINATION_TOL
            && report.lower.map_or(true, |l| l.value <= DOMINATION_TOL);
        report
    }
}

/// Largest observed violation and where it happened.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub value: f64,
    pub r: f64,
    pub eps: f64,
}

impl Violation {
    fn none() -> Self {
        Violation { value: f64::NEG_INFINITY, r: f64::NAN, eps: f64::NAN }
    }

    fn update(&mut self, value: f64, r: f64, eps: f64) {
        if value > self.value || value.is_nan() {
            *self = Violation { value, r, eps };
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DominationReport {
    /// `max (|β°| − ϱ|β°_Γ| − c₀)` (and the reverse bound with same growth).
    pub section_violation: f64,
    pub section_worst_r: f64,
    /// `max (|β_ε| − ϱ|β_Γ,ε| − c₀)`
    pub upper: Violation,
    /// `max ((1/ϱ)|β_Γ,ε| − c₀ − |β_ε|)`, only with same growth.
    pub lower: Option<Violation>,
    pub samples: usize,
    pub passed: bool,
}

impl DominationReport {
    fn new(same_growth: bool) -> Self {
        DominationReport {
            section_violation: f64::NEG_INFINITY,
            section_worst_r: f64::NAN,
            upper: Violation::none(),
            lower: if same_growth { Some(Violation::none()) } else { None },
            samples: 0,
            passed: false,
        }
    }

    fn record_section(&mut self, value: f64, r: f64) {
        if value > self.section_violation || value.is_nan() {
            self.section_violation = value;
            self.section_worst_r = r;
        }
    }

    fn record_upper(&mut self, value: f64, r: f64, eps: f64) {
        self.upper.update(value, r, eps);
    }

    fn record_lower(&mut self, value: f64, r: f64, eps: f64) {
        if let Some(l) = self.lower.as_mut() {
            l.update(value, r, eps);
        }
    }

    /// The largest violation among all checked inequalities.
    pub fn max_violation(&self) -> Violation {
        let mut worst = self.upper;
        if let Some(l) = self.lower {
            if l.value > worst.value {
                worst = l;
            }
        }
        if self.section_violation > worst.value {
            worst = Violation { value: self.section_violation, r: self.section_worst_r, eps: 0.0 };
        }
        worst
    }
}

/// Maximal violations of the Yosida contract of a single graph over a sample.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ContractReport {
    pub nonexpansive: f64,
    pub lipschitz: f64,
    pub zero: f64,
    pub minorization: f64,
    pub moreau_sandwich: f64,
    pub parameter_monotone: f64,
    pub samples: usize,
}

impl ContractReport {
    pub fn worst(&self) -> f64 {
        [
            self.nonexpansive,
            self.lipschitz,
            self.zero,
            self.minorization,
            self.moreau_sandwich,
            self.parameter_monotone,
        ]
        .into_iter()
        .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.worst() <= DOMINATION_TOL
    }
}

/// Checks the standard Yosida properties of `g` on pairs of samples.
///
/// `samples` holds `(r, s, eps)` triples. `rho ≥ 1` is used for the parameter
/// monotonicity `|β_ερ(r)| ≤ |β_ε(r)|`.
pub fn check_contracts(g: &MonotoneGraph, samples: &[(f64, f64, f64)], rho: f64) -> ContractReport {
    let mut rep = ContractReport {
        nonexpansive: f64::NEG_INFINITY,
        lipschitz: f64::NEG_INFINITY,
        zero: f64::NEG_INFINITY,
        minorization: f64::NEG_INFINITY,
        moreau_sandwich: f64::NEG_INFINITY,
        parameter_monotone: f64::NEG_INFINITY,
        samples: samples.len(),
    };
    let bump = |slot: &mut f64, v: f64| {
        if v > *slot || v.is_nan() {
            *slot = v;
        }
    };
    for &(r, s, eps) in samples {
        let (jr, js, br, bs) = match (
            g.resolvent(eps, r),
            g.resolvent(eps, s),
            g.yosida(eps, r),
            g.yosida(eps, s),
        ) {
            (Ok(a), Ok(b), Ok(c), Ok(d)) => (a, b, c, d),
            _ => {
                bump(&mut rep.nonexpansive, f64::INFINITY);
                continue;
            }
        };
        bump(&mut rep.nonexpansive, (jr - js).abs() - (r - s).abs() - 2.0 * ROOT_TOL);
        bump(&mut rep.lipschitz, (br - bs).abs() - (r - s).abs() / eps - 2.0 * ROOT_TOL / eps);
        bump(&mut rep.zero, g.yosida(eps, 0.0).map_or(f64::INFINITY, f64::abs));
        if g.domain().contains(r) {
            if let Ok(m) = g.min_section(r) {
                bump(&mut rep.minorization, br.abs() - m.abs());
            }
            let hat = g.primitive(r);
            match g.moreau(eps, r) {
                Ok(env) => {
                    bump(&mut rep.moreau_sandwich, -env);
                    bump(&mut rep.moreau_sandwich, env - hat);
                }
                Err(_) => bump(&mut rep.moreau_sandwich, f64::INFINITY),
            }
        }
        if eps * rho <= 1.0 {
            if let Ok(coarse) = g.yosida(eps * rho, r) {
                bump(&mut rep.parameter_monotone, coarse.abs() - br.abs());
            }
        }
    }
    rep
}

/// Named pairs that are admissible under the domination assumption.
pub fn admissible_catalog(c1: f64, c2: f64) -> Vec<(&'static str, PotentialPair)> {
    let mut out = Vec::new();
    out.push(("regular", PotentialPair::regular()));
    out.push(("logarithmic", PotentialPair::logarithmic(c1)));
    out.push(("obstacle", PotentialPair::obstacle(c2)));
    out.push((
        "linear",
        PotentialPair::symmetric(MonotoneGraph::linear(1.0), Perturbation::Zero),
    ));
    out.push((
        "cubic-under-composite",
        PotentialPair {
            bulk: MonotoneGraph::cubic(1.0),
            pi: Perturbation::linear(-1.0),
            boundary: MonotoneGraph { kind: GraphKind::Cubic, scale: 2.0, slope: 1.0 },
            pi_gamma: Perturbation::linear(-1.0),
            rho: 1.0,
            c0: 0.01,
            same_growth: false,
        },
    ));
    out.push((
        "cubic-under-logarithmic",
        PotentialPair {
            bulk: MonotoneGraph::cubic(1.0),
            pi: Perturbation::linear(-1.0),
            boundary: MonotoneGraph::logarithmic(),
            pi_gamma: Perturbation::linear(-2.0 * c1),
            rho: 1.0,
            c0: 0.01,
            same_growth: false,
        },
    ));
    out.push((
        "obstacle-under-logarithmic",
        PotentialPair {
            bulk: MonotoneGraph::obstacle(),
            pi: Perturbation::linear(-2.0 * c2),
            boundary: MonotoneGraph::logarithmic(),
            pi_gamma: Perturbation::linear(-2.0 * c1),
            rho: 1.0,
            c0: 0.01,
            same_growth: false,
        },
    ));
    out
}
