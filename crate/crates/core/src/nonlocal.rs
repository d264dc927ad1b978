//! Nonlocal boundary functionals `g` for `x(0) = g(x)` (initial side) or
//! `x(T) = g(x)` (terminal side), together with sampled checks of the
//! hypotheses imposed on them by the existence results.
//!
//! Terminal-side problems are solved through time reversal: with
//! `y(s) = x(T - s)` the condition becomes an initial-side one for `y`, see
//! [`BoundaryFunctional::reversed`].

use serde::Serialize;

use crate::degree::{brouwer_degree, Domain, FnField};
use crate::ivp::{TimeGrid, Trajectory};
use crate::linalg::operator_norm;
use crate::multimap::MultiMap;
use crate::potential::{GuidingCertificate, Potential};
use crate::{sampling, Error, Matrix, Result, Vector};

/// `Σαᵢ` closer than this to 1 is rejected.
pub const RESONANCE_TOL: f64 = 1e-12;
/// Margin for the level-set conditions.
pub const LEVEL_SET_MARGIN: f64 = 1e-10;
/// Margin for the candidate-trajectory condition.
pub const CANDIDATE_MARGIN: f64 = 1e-9;
/// The sampled liminf must exceed `1 + LIMINF_MARGIN`.
pub const LIMINF_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `x(0) = g(x)`.
    Initial,
    /// `x(T) = g(x)`.
    Terminal,
}

/// The map `h` averaged by the mean-value condition.
#[derive(Debug, Clone, PartialEq)]
pub enum MeanMap {
    Linear(Matrix),
    /// `h(x) = s·x`.
    RadialClamp(f64),
}

impl MeanMap {
    fn apply(&self, x: &Vector) -> Vector {
        match self {
            MeanMap::Linear(c) => c * x,
            MeanMap::RadialClamp(s) => x * *s,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Variant {
    /// `g(x) = -x(T)` (initial side) or `-x(0)` (terminal side).
    AntiPeriodic,
    /// `g(x) = Σ αᵢ x(tᵢ)`.
    MultiPoint { coeffs: Vec<f64>, times: Vec<f64> },
    /// `g(x) = (1/T)∫₀ᵀ h(x(t)) dt`.
    MeanValue(MeanMap),
    /// `g(x) = Σ Aᵢ x(tᵢ) + v`.
    AffineEval { terms: Vec<(Matrix, f64)>, offset: Vector },
}

/// `|g(x)| ≤ c‖x‖ + d`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthEstimate {
    pub c: f64,
    pub d: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryFunctional {
    dim: usize,
    horizon: f64,
    variant: Variant,
    side: Side,
}

impl BoundaryFunctional {
    pub fn new(dim: usize, horizon: f64, variant: Variant, side: Side) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidBoundary(msg));
        if dim == 0 {
            return bad("dimension must be >= 1".into());
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return bad(format!("horizon {horizon} must be positive"));
        }
        let time_ok = |t: f64| match side {
            Side::Initial => t > 0.0 && t <= horizon,
            Side::Terminal => (0.0..horizon).contains(&t),
        };
        match &variant {
            Variant::AntiPeriodic => {}
            Variant::MultiPoint { coeffs, times } => {
                if coeffs.is_empty() || coeffs.len() != times.len() {
                    return bad("multi-point condition needs matching, nonempty coeffs and times".into());
                }
                if coeffs.iter().any(|a| !a.is_finite()) {
                    return bad("multi-point coefficients must be finite".into());
                }
                let abs_sum: f64 = coeffs.iter().map(|a| a.abs()).sum();
                if abs_sum > 1.0 {
                    return bad(format!("sum of |alpha_i| = {abs_sum} exceeds 1"));
                }
                let sum: f64 = coeffs.iter().sum();
                if (sum - 1.0).abs() <= RESONANCE_TOL {
                    return bad(format!("sum of alpha_i = {sum} equals 1"));
                }
                if let Some(t) = times.iter().find(|t| !time_ok(**t)) {
                    return bad(format!("multi-point time {t} outside the admissible range"));
                }
                if times.windows(2).any(|w| w[0] >= w[1]) {
                    return bad("multi-point times must be strictly increasing".into());
                }
            }
            Variant::MeanValue(h) => match h {
                MeanMap::Linear(c) => {
                    if c.nrows() != dim || c.ncols() != dim {
                        return Err(Error::Dimension { expected: dim, found: c.nrows() });
                    }
                    let norm = operator_norm(c);
                    if !(norm <= 1.0 + 1e-12) {
                        return bad(format!("mean-value map has operator norm {norm} > 1"));
                    }
                }
                MeanMap::RadialClamp(s) => {
                    if !(0.0..=1.0).contains(s) {
                        return bad(format!("radial clamp scale {s} outside [0, 1]"));
                    }
                }
            },
            Variant::AffineEval { terms, offset } => {
                if offset.len() != dim {
                    return Err(Error::Dimension { expected: dim, found: offset.len() });
                }
                if terms.is_empty() {
                    return bad("affine evaluation needs at least one term".into());
                }
                for (a, t) in terms {
                    if a.nrows() != dim || a.ncols() != dim {
                        return Err(Error::Dimension { expected: dim, found: a.nrows() });
                    }
                    if !(0.0..=horizon).contains(t) {
                        return bad(format!("evaluation time {t} outside [0, {horizon}]"));
                    }
                }
            }
        }
        Ok(BoundaryFunctional { dim, horizon, variant, side })
    }

    pub fn anti_periodic(dim: usize, horizon: f64, side: Side) -> Result<Self> {
        Self::new(dim, horizon, Variant::AntiPeriodic, side)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn variant(&self) -> &Variant {
        &self.variant
    }

    pub fn side(&self) -> Side {
        self.side
    }

    /// Node times `g` reads; grids must contain them exactly.
    pub fn eval_times(&self) -> Vec<f64> {
        match &self.variant {
            Variant::AntiPeriodic => vec![match self.side {
                Side::Initial => self.horizon,
                Side::Terminal => 0.0,
            }],
            Variant::MultiPoint { times, .. } => times.clone(),
            Variant::MeanValue(_) => Vec::new(),
            Variant::AffineEval { terms, .. } => terms.iter().map(|(_, t)| *t).collect(),
        }
    }

    /// The initial-side functional `g̃(y) = g(s ↦ y(T - s))` of the reversed
    /// problem.
    pub fn reversed(&self) -> BoundaryFunctional {
        let mirror = |t: f64| self.horizon - t;
        let variant = match &self.variant {
            Variant::AntiPeriodic => Variant::AntiPeriodic,
            Variant::MultiPoint { coeffs, times } => {
                let mut pairs: Vec<(f64, f64)> = coeffs.iter().copied().zip(times.iter().map(|t| mirror(*t))).collect();
                pairs.sort_by(|a, b| a.1.total_cmp(&b.1));
                Variant::MultiPoint {
                    coeffs: pairs.iter().map(|p| p.0).collect(),
                    times: pairs.iter().map(|p| p.1).collect(),
                }
            }
            Variant::MeanValue(h) => Variant::MeanValue(h.clone()),
            Variant::AffineEval { terms, offset } => Variant::AffineEval {
                terms: terms.iter().map(|(a, t)| (a.clone(), mirror(*t))).collect(),
                offset: offset.clone(),
            },
        };
        let side = match self.side {
            Side::Initial => Side::Terminal,
            Side::Terminal => Side::Initial,
        };
        BoundaryFunctional { dim: self.dim, horizon: self.horizon, variant, side }
    }

    /// `g(x)`.
    pub fn apply(&self, traj: &Trajectory) -> Result<Vector> {
        if traj.dim() != self.dim {
            return Err(Error::Dimension { expected: self.dim, found: traj.dim() });
        }
        match &self.variant {
            Variant::AntiPeriodic => {
                let x = match self.side {
                    Side::Initial => traj.x_final(),
                    Side::Terminal => traj.x0(),
                };
                Ok(x * -1.0)
            }
            Variant::MultiPoint { coeffs, times } => {
                let mut acc = traj.state_at(times[0])? * coeffs[0];
                for (a, t) in coeffs.iter().zip(times).skip(1) {
                    acc += traj.state_at(*t)? * *a;
                }
                Ok(acc)
            }
            Variant::MeanValue(h) => {
                let nodes = traj.grid.nodes();
                let mut acc = Vector::zeros(self.dim);
                let mut prev = h.apply(&traj.states[0]);
                for k in 0..traj.grid.steps() {
                    let next = h.apply(&traj.states[k + 1]);
                    acc += (&prev + &next) * (0.5 * (nodes[k + 1] - nodes[k]));
                    prev = next;
                }
                Ok(acc / self.horizon)
            }
            Variant::AffineEval { terms, offset } => {
                let mut acc = offset.clone();
                for (a, t) in terms {
                    acc += a * traj.state_at(*t)?;
                }
                Ok(acc)
            }
        }
    }

    /// `x(0) - g(x)` or `x(T) - g(x)`.
    pub fn residual_vector(&self, traj: &Trajectory) -> Result<Vector> {
        let g = self.apply(traj)?;
        Ok(match self.side {
            Side::Initial => traj.x0() - g,
            Side::Terminal => traj.x_final() - g,
        })
    }

    pub fn residual(&self, traj: &Trajectory) -> Result<f64> {
        Ok(self.residual_vector(traj)?.norm())
    }

    /// `(c, d)` with `|g(x)| ≤ c‖x‖ + d`.
    pub fn apply_growth(&self) -> GrowthEstimate {
        match &self.variant {
            Variant::AntiPeriodic => GrowthEstimate { c: 1.0, d: 0.0 },
            Variant::MultiPoint { coeffs, .. } => GrowthEstimate { c: coeffs.iter().map(|a| a.abs()).sum(), d: 0.0 },
            Variant::MeanValue(MeanMap::Linear(c)) => GrowthEstimate { c: operator_norm(c), d: 0.0 },
            Variant::MeanValue(MeanMap::RadialClamp(s)) => GrowthEstimate { c: *s, d: 0.0 },
            Variant::AffineEval { terms, offset } => {
                GrowthEstimate { c: terms.iter().map(|(a, _)| operator_norm(a)).sum(), d: offset.norm() }
            }
        }
    }

    /// `(g∘i)(x₀)`: `g` applied to the constant trajectory `x ≡ x₀`.
    pub fn on_constant(&self, grid: &TimeGrid, x0: &Vector) -> Result<Vector> {
        self.apply(&Trajectory::constant(grid.clone(), x0))
    }

    /// A coarse grid containing every evaluation time, for hypothesis checks.
    pub fn check_grid(&self, steps: usize) -> Result<TimeGrid> {
        TimeGrid::uniform(self.horizon, steps)?.refined_with(&self.eval_times())
    }
}

/// Trajectory through the given states with difference-quotient selections.
pub fn path_through(grid: TimeGrid, states: Vec<Vector>) -> Trajectory {
    let selections = (0..grid.steps()).map(|k| (&states[k + 1] - &states[k]) / grid.dt(k)).collect();
    Trajectory { grid, states, selections }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub pass: bool,
    /// Number of samples or candidates the condition was tested on.
    pub tested: usize,
    pub witness: Option<Vec<f64>>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Th4Report {
    pub level: f64,
    /// Some node `t > 0` with `|g(x)| ≤ |x(t)|`, on solver candidates only.
    pub candidate_condition: ConditionReport,
    /// `|g(i(x))| ≤ |x|` on the level set `V = r`.
    pub level_growth: ConditionReport,
    /// `g(i(x)) ≠ x` on the level set `V = r`.
    pub level_fixed_points: ConditionReport,
}

impl Th4Report {
    pub fn pass(&self) -> bool {
        self.candidate_condition.pass && self.level_growth.pass && self.level_fixed_points.pass
    }
}

/// Level-set conditions on `sphere_samples` points of `V⁻¹(r)` with `r` the
/// certificate level, and the candidate condition on those `candidates`
/// whose boundary residual is at most `tol_bc`.
pub fn check_th4_conditions(
    g: &BoundaryFunctional,
    potential: &Potential,
    cert: &GuidingCertificate,
    candidates: &[Trajectory],
    sphere_samples: usize,
    tol_bc: f64,
    seed: u64,
) -> Result<Th4Report> {
    if potential.dim() != g.dim() {
        return Err(Error::Dimension { expected: g.dim(), found: potential.dim() });
    }
    let level = cert.level;
    let grid = g.check_grid(64)?;
    let mut growth = ConditionReport { pass: true, tested: 0, witness: None, note: None };
    let mut fixed = ConditionReport { pass: true, tested: 0, witness: None, note: None };
    if potential.check_coercive() {
        for e in sampling::unit_directions(g.dim(), sphere_samples, seed) {
            let x = &e * potential.level_radius(&e, level)?;
            let gx = g.on_constant(&grid, &x)?;
            growth.tested += 1;
            fixed.tested += 1;
            if growth.pass && gx.norm() > x.norm() + LEVEL_SET_MARGIN {
                growth.pass = false;
                growth.witness = Some(x.as_slice().to_vec());
            }
            if fixed.pass && (&gx - &x).norm() <= LEVEL_SET_MARGIN {
                fixed.pass = false;
                fixed.witness = Some(x.as_slice().to_vec());
            }
        }
    } else {
        let note = Some("potential is not coercive; level set unbounded".to_string());
        growth = ConditionReport { pass: false, tested: 0, witness: None, note: note.clone() };
        fixed = ConditionReport { pass: false, tested: 0, witness: None, note };
    }

    let mut cand = ConditionReport {
        pass: true,
        tested: 0,
        witness: None,
        note: Some("checked on solver candidates only".into()),
    };
    for traj in candidates {
        if g.residual(traj)? > tol_bc {
            continue;
        }
        cand.tested += 1;
        let gx = g.apply(traj)?.norm();
        // Nodes other than the one carrying the boundary condition.
        let n = traj.grid.steps();
        let range = match g.side() {
            Side::Initial => 1..=n,
            Side::Terminal => 0..=n - 1,
        };
        let ok = traj.states[range].iter().any(|x| gx <= x.norm() + CANDIDATE_MARGIN);
        if !ok && cand.pass {
            cand.pass = false;
            cand.witness = Some(traj.x0().as_slice().to_vec());
        }
    }
    Ok(Th4Report { level, candidate_condition: cand, level_growth: growth, level_fixed_points: fixed })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiminfWitness {
    /// `constant`, `bump` or `random`.
    pub kind: String,
    pub norm: f64,
    pub ratio: f64,
    /// Peak point of the witness trajectory.
    pub peak: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiminfReport {
    pub pass: bool,
    pub min_ratio: f64,
    pub family: String,
    pub witness: Option<LiminfWitness>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeConditionReport {
    pub pass: bool,
    pub radius: Option<f64>,
    pub degree: Option<i64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Th6Report {
    pub liminf: LiminfReport,
    pub degree: DegreeConditionReport,
}

impl Th6Report {
    pub fn pass(&self) -> bool {
        self.liminf.pass && self.degree.pass
    }
}

/// Sampled surrogate for `liminf |g(x)|/‖x‖ > 1` and the degree condition
/// `deg(g∘i, B(R), 0) ≠ 0`.
///
/// The trajectory family at each norm in `norms` consists of constants,
/// tent bumps vanishing at every evaluation time of `g`, and random paths
/// (`samples` of each kind).
pub fn check_th6_conditions(
    g: &BoundaryFunctional,
    map: &MultiMap,
    norms: &[f64],
    samples: usize,
    seed: u64,
    degree_depth: usize,
) -> Result<Th6Report> {
    if map.dim() != g.dim() {
        return Err(Error::Dimension { expected: g.dim(), found: map.dim() });
    }
    let dim = g.dim();
    let grid = g.check_grid(64)?;
    let nodes = grid.nodes().to_vec();
    let dirs = sampling::unit_directions(dim, samples.max(1), seed);
    let bump = bump_profile(&nodes, &g.eval_times());
    let mut rng = sampling::rng(seed);

    let mut min_ratio = f64::INFINITY;
    let mut witness = None;
    let mut consider = |kind: &str, norm: f64, traj: Trajectory| -> Result<()> {
        let sup = traj.sup_norm();
        let ratio = g.apply(&traj)?.norm() / sup;
        if ratio < min_ratio {
            min_ratio = ratio;
            let peak = traj.states.iter().max_by(|a, b| a.norm().total_cmp(&b.norm())).expect("nonempty");
            witness = Some(LiminfWitness { kind: kind.into(), norm, ratio, peak: peak.as_slice().to_vec() });
        }
        Ok(())
    };
    for &norm in norms {
        for e in &dirs {
            let x = e * norm;
            consider("constant", norm, Trajectory::constant(grid.clone(), &x))?;
            if let Some(profile) = &bump {
                let states = profile.iter().map(|p| &x * *p).collect();
                consider("bump", norm, path_through(grid.clone(), states))?;
            }
            let states: Vec<Vector> = nodes.iter().map(|_| sampling::ball_point(dim, &mut rng)).collect();
            let sup = states.iter().map(|s| s.norm()).fold(0.0, f64::max);
            if sup > 0.0 {
                let states = states.into_iter().map(|s| s * (norm / sup)).collect();
                consider("random", norm, path_through(grid.clone(), states))?;
            }
        }
    }
    let family = format!(
        "constants, bumps vanishing at {:?}, random paths; {} directions at norms {:?}",
        g.eval_times(),
        dirs.len(),
        norms
    );
    let liminf = LiminfReport { pass: min_ratio > 1.0 + LIMINF_MARGIN, min_ratio, family, witness };

    let degree = degree_condition(g, &grid, degree_depth)?;
    Ok(Th6Report { liminf, degree })
}

/// `dist(t, E)/max_k dist(t_k, E)` at the nodes, `E` the evaluation times:
/// zero exactly where `g` reads the trajectory, peak value 1. `None` when
/// `g` reads no nodes or every node.
fn bump_profile(nodes: &[f64], eval_times: &[f64]) -> Option<Vec<f64>> {
    if eval_times.is_empty() {
        return None;
    }
    let dist: Vec<f64> =
        nodes.iter().map(|t| eval_times.iter().map(|e| (t - e).abs()).fold(f64::INFINITY, f64::min)).collect();
    let peak = dist.iter().copied().fold(0.0, f64::max);
    (peak > 0.0).then(|| dist.iter().map(|d| d / peak).collect())
}

fn degree_condition(g: &BoundaryFunctional, grid: &TimeGrid, depth: usize) -> Result<DegreeConditionReport> {
    let dim = g.dim();
    let field = FnField { dim, f: |x: &Vector| g.on_constant(grid, x) };
    let dirs = sampling::unit_directions(dim, 64, 0);
    let mut radius = None;
    for p in 0..=20 {
        let r = (1u64 << p) as f64;
        let mut min_norm = f64::INFINITY;
        for e in &dirs {
            min_norm = min_norm.min(g.on_constant(grid, &(e * r))?.norm());
        }
        if min_norm > crate::degree::ZERO_TOL * (1.0 + r) {
            radius = Some(r);
            break;
        }
    }
    let Some(r) = radius else {
        return Ok(DegreeConditionReport {
            pass: false,
            radius: None,
            degree: None,
            error: Some("no zero-free sphere found up to radius 2^20".into()),
        });
    };
    let domain = Domain::new_ball(Vector::zeros(dim), r)?;
    Ok(match brouwer_degree(&field, &domain, depth) {
        Ok(res) => {
            DegreeConditionReport { pass: res.value != 0, radius: Some(r), degree: Some(res.value), error: None }
        }
        Err(e @ (Error::Inconclusive { .. } | Error::DegenerateDomain { .. })) => {
            DegreeConditionReport { pass: false, radius: Some(r), degree: None, error: Some(e.to_string()) }
        }
        Err(e) => return Err(e),
    })
}
