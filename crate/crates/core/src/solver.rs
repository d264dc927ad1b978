//! Solvers for `ẋ ∈ F(t, x)` with a nonlocal condition, and certification of
//! their output.
//!
//! * fixed point: iterate `x₀ ↦ g(x(·; x₀))` along a fixed selection strategy;
//! * shooting: damped Newton on `ρ(x₀) = x₀ - g(x(·; x₀))` from a multistart
//!   grid, with an optional degree certificate for `ρ` on the search box;
//! * continuation: deform `λ(±W_V) + (1 - λ)F_V` from `λ = 1` to `λ = 0`,
//!   shooting at each step from the previous solution.
//!
//! Terminal-side conditions are solved on the time-reversed problem and
//! mapped back.

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{schauder_radius, BoundReport};
use crate::degree::{brouwer_degree, Domain, FnField};
use crate::ivp::{envelope_check, integrate, EnvelopeDiagnostics, SelectionStrategy, TimeGrid, Trajectory};
use crate::multimap::{MultiMap, Sign};
use crate::nonlocal::{BoundaryFunctional, GrowthEstimate, Side};
use crate::potential::{GuidingCertificate, Potential};
use crate::{sampling, Error, Result, Vector};

/// Forward-difference step, relative to `max(1, |x_j|)`.
pub const JACOBIAN_STEP: f64 = 1e-6;
/// Backtracking halvings per Newton step.
pub const MAX_HALVINGS: usize = 30;
/// Slack on the invariant-ball membership of fixed-point iterates.
pub const BALL_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    FixedPoint,
    Shooting,
    Continuation,
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fixed_point" => Ok(Method::FixedPoint),
            "shooting" => Ok(Method::Shooting),
            "continuation" => Ok(Method::Continuation),
            other => Err(Error::Config(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverSettings {
    pub tol_bc: f64,
    pub tol_dyn: f64,
    /// Fixed-point iterations.
    pub max_iter: usize,
    /// Newton iterations per start.
    pub newton_iter: usize,
    /// Multistart points per axis of the search box.
    pub multistart: usize,
    /// Search box for `x₀`; `None` means `[-1, 1]^N`.
    pub search_box: Option<Domain>,
    /// Refinement depth of the shooting degree certificate; `None` skips it.
    pub degree_depth: Option<usize>,
    pub lambda_steps: usize,
    /// First iterate / first Newton start; zero when absent.
    pub initial_guess: Option<Vector>,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings {
            tol_bc: 1e-6,
            tol_dyn: 1e-9,
            max_iter: 500,
            newton_iter: 50,
            multistart: 3,
            search_box: None,
            degree_depth: Some(4),
            lambda_steps: 32,
            initial_guess: None,
        }
    }
}

/// Multimap, boundary functional and a grid holding every evaluation time.
#[derive(Debug, Clone, PartialEq)]
pub struct Problem {
    map: MultiMap,
    boundary: BoundaryFunctional,
    grid: TimeGrid,
}

/// The initial-side form actually solved.
struct Oriented {
    map: MultiMap,
    boundary: BoundaryFunctional,
    grid: TimeGrid,
    reversed: bool,
}

impl Problem {
    /// Uniform grid with `steps` steps, refined with the evaluation times of
    /// `boundary` and the breakpoints of `map`.
    pub fn new(map: MultiMap, boundary: BoundaryFunctional, steps: usize) -> Result<Self> {
        if map.dim() != boundary.dim() {
            return Err(Error::Dimension { expected: map.dim(), found: boundary.dim() });
        }
        if map.horizon() != boundary.horizon() {
            return Err(Error::Config("multimap and boundary functional disagree on the horizon".into()));
        }
        let mut times = boundary.eval_times();
        times.extend(map.breakpoints());
        let grid = TimeGrid::uniform(map.horizon(), steps)?.refined_with(&times)?;
        Ok(Problem { map, boundary, grid })
    }

    pub fn map(&self) -> &MultiMap {
        &self.map
    }

    pub fn boundary(&self) -> &BoundaryFunctional {
        &self.boundary
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.map.dim()
    }

    fn oriented(&self) -> Oriented {
        match self.boundary.side() {
            Side::Initial => Oriented {
                map: self.map.clone(),
                boundary: self.boundary.clone(),
                grid: self.grid.clone(),
                reversed: false,
            },
            Side::Terminal => Oriented {
                map: self.map.time_reversed(),
                boundary: self.boundary.reversed(),
                grid: self.grid.reversed(),
                reversed: true,
            },
        }
    }

    fn restore(&self, o: &Oriented, traj: Trajectory) -> Trajectory {
        if o.reversed {
            Trajectory::from_reversed(&traj, self.grid.clone())
        } else {
            traj
        }
    }

    /// `ρ(x₀) = x₀ - g(x)` where `x` starts from `x₀` at the side carrying the
    /// boundary condition.
    pub fn shooting_residual(&self, strategy: &SelectionStrategy, x0: &Vector) -> Result<Vector> {
        let o = self.oriented();
        let strategy = orient_strategy(strategy, o.reversed);
        let traj = integrate(&o.map, x0, &o.grid, &strategy)?;
        o.boundary.residual_vector(&traj)
    }
}

/// Time reversal negates the field, so filter and homotopy signs flip.
fn orient_strategy(strategy: &SelectionStrategy, reversed: bool) -> SelectionStrategy {
    let flip = |s: Sign| if reversed { flip_sign(s) } else { s };
    match strategy {
        SelectionStrategy::Filtered { potential, sign, radius } => {
            SelectionStrategy::Filtered { potential: potential.clone(), sign: flip(*sign), radius: *radius }
        }
        SelectionStrategy::Homotopy { potential, sign, radius, lambda } => SelectionStrategy::Homotopy {
            potential: potential.clone(),
            sign: flip(*sign),
            radius: *radius,
            lambda: *lambda,
        },
        other => other.clone(),
    }
}

fn flip_sign(s: Sign) -> Sign {
    match s {
        Sign::Plus => Sign::Minus,
        Sign::Minus => Sign::Plus,
    }
}

/// Concrete form of the coincidence operator:
/// `T(x)(t_k) = x(0) + γ(x) + Σ_{j<k} Δt_j f_j` with `γ(x)` the boundary
/// residual. Its fixed points are exactly the discrete solutions.
#[derive(Debug, Clone, Copy)]
pub struct CoincidenceOperator<'a> {
    pub boundary: &'a BoundaryFunctional,
}

impl CoincidenceOperator<'_> {
    pub fn apply(&self, traj: &Trajectory) -> Result<Vec<Vector>> {
        let gamma = self.boundary.residual_vector(traj)?;
        let mut out = Vec::with_capacity(traj.states.len());
        out.push(traj.x0() + gamma);
        for (k, f) in traj.selections.iter().enumerate() {
            let next = &out[k] + f * traj.grid.dt(k);
            out.push(next);
        }
        Ok(out)
    }

    /// `max_k |T(x)(t_k) - x(t_k)|`.
    pub fn defect(&self, traj: &Trajectory) -> Result<f64> {
        Ok(self.apply(traj)?.iter().zip(&traj.states).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionSummary {
    pub x0: Vec<f64>,
    pub x_final: Vec<f64>,
    pub steps: usize,
    pub sup_norm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certification {
    pub pass: bool,
    pub residual_bc: f64,
    pub residual_dyn: f64,
    pub tol_bc: f64,
    pub tol_dyn: f64,
    pub envelope: EnvelopeDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LambdaStep {
    pub lambda: f64,
    pub x0: Vec<f64>,
    pub residual_bc: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DegreeCertificate {
    pub degree: Option<i64>,
    pub refinement_depth: Option<usize>,
    pub boundary_min_norm: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HypothesisReports {
    pub growth: GrowthEstimate,
    pub guiding: Option<GuidingCertificate>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub method: Method,
    pub solved: bool,
    pub iterations: usize,
    pub solution: Option<SolutionSummary>,
    pub residual_bc: Option<f64>,
    pub residual_dyn: Option<f64>,
    pub lambda_path: Vec<LambdaStep>,
    /// Initial values of the fixed-point iterates.
    pub iterate_history: Vec<Vec<f64>>,
    /// Whether every fixed-point iterate stayed in the corrected invariant
    /// ball (when that ball exists).
    pub in_invariant_ball: Option<bool>,
    pub degree_certificate: Option<DegreeCertificate>,
    pub bound_diagnostics: Vec<BoundReport>,
    pub hypothesis_reports: HypothesisReports,
    pub certification: Option<Certification>,
    pub notes: Vec<String>,
    #[serde(skip)]
    pub trajectory: Option<Trajectory>,
}

impl SolveReport {
    fn empty(method: Method, problem: &Problem, guiding: Option<&GuidingCertificate>) -> Self {
        SolveReport {
            method,
            solved: false,
            iterations: 0,
            solution: None,
            residual_bc: None,
            residual_dyn: None,
            lambda_path: Vec::new(),
            iterate_history: Vec::new(),
            in_invariant_ball: None,
            degree_certificate: None,
            bound_diagnostics: Vec::new(),
            hypothesis_reports: HypothesisReports {
                growth: problem.boundary.apply_growth(),
                guiding: guiding.cloned(),
            },
            certification: None,
            notes: Vec::new(),
            trajectory: None,
        }
    }

    /// Report for a run that stopped before producing a trajectory.
    pub fn aborted(method: Method, problem: &Problem, guiding: Option<&GuidingCertificate>, note: String) -> Self {
        let mut report = SolveReport::empty(method, problem, guiding);
        report.notes.push(note);
        report
    }

    /// Attaches a trajectory and its certification; `solved` requires both
    /// `converged` and a passing certificate.
    fn finish(
        mut self,
        problem: &Problem,
        traj: Trajectory,
        converged: bool,
        settings: &SolverSettings,
    ) -> Result<Self> {
        let cert = certify(&traj, problem, settings.tol_bc, settings.tol_dyn)?;
        let mu = problem.map.growth().mu_total;
        let x0n = traj.x0().norm();
        self.bound_diagnostics = vec![BoundReport::gronwall(x0n, mu), BoundReport::escape(x0n, mu)];
        if let Some(g) = &self.hypothesis_reports.guiding {
            self.bound_diagnostics.push(BoundReport::apriori(g.radius, mu));
        }
        let GrowthEstimate { c, d } = self.hypothesis_reports.growth;
        if let Some(r) = BoundReport::schauder(c, d, mu) {
            self.bound_diagnostics.push(r);
        }
        self.solution = Some(SolutionSummary {
            x0: traj.x0().as_slice().to_vec(),
            x_final: traj.x_final().as_slice().to_vec(),
            steps: traj.grid.steps(),
            sup_norm: traj.sup_norm(),
        });
        self.residual_bc = Some(cert.residual_bc);
        self.residual_dyn = Some(cert.residual_dyn);
        self.solved = converged && cert.pass;
        if converged && !cert.pass {
            self.notes.push("iteration converged but certification failed".into());
        }
        self.certification = Some(cert);
        self.trajectory = Some(traj);
        Ok(self)
    }
}

/// Recomputes both residuals of `traj` from scratch and attaches envelope
/// diagnostics.
pub fn certify(traj: &Trajectory, problem: &Problem, tol_bc: f64, tol_dyn: f64) -> Result<Certification> {
    let residual_bc = problem.boundary.residual(traj)?;
    let residual_dyn = traj.dynamics_residual(&problem.map)?;
    let envelope = envelope_check(traj, problem.map.growth());
    Ok(Certification {
        pass: residual_bc <= tol_bc && residual_dyn <= tol_dyn,
        residual_bc,
        residual_dyn,
        tol_bc,
        tol_dyn,
        envelope,
    })
}

fn start_point(problem: &Problem, settings: &SolverSettings) -> Result<Vector> {
    match &settings.initial_guess {
        Some(x) if x.len() != problem.dim() => Err(Error::Dimension { expected: problem.dim(), found: x.len() }),
        Some(x) => Ok(x.clone()),
        None => Ok(Vector::zeros(problem.dim())),
    }
}

/// Iterates `x₀ ↦ g(x(·; x₀))` from the initial guess.
pub fn solve_fixed_point(
    problem: &Problem,
    strategy: &SelectionStrategy,
    settings: &SolverSettings,
) -> Result<SolveReport> {
    let o = problem.oriented();
    let strategy = orient_strategy(strategy, o.reversed);
    let mut report = SolveReport::empty(Method::FixedPoint, problem, None);
    let GrowthEstimate { c, d } = problem.boundary.apply_growth();
    let mu = problem.map.growth().mu_total;
    if c >= 1.0 {
        log::warn!("fixed-point iteration with growth constant c = {c} >= 1 need not converge");
        report.notes.push(format!("growth constant c = {c} >= 1: no invariant ball"));
    }
    let ball = schauder_radius(c, d, mu).and_then(|r| r.corrected_radius);

    let mut x0 = start_point(problem, settings)?;
    let mut in_ball = ball.map(|r| x0.norm() <= r + BALL_SLACK);
    report.iterate_history.push(x0.as_slice().to_vec());
    let mut converged = false;
    for it in 1..=settings.max_iter {
        report.iterations = it;
        let traj = match integrate(&o.map, &x0, &o.grid, &strategy) {
            Ok(t) => t,
            Err(e @ Error::Divergence { .. }) => {
                report.notes.push(format!("iteration {it}: {e}"));
                return Ok(report);
            }
            Err(e) => return Err(e),
        };
        let next = o.boundary.apply(&traj)?;
        if next.iter().any(|v| !v.is_finite()) {
            report.notes.push(format!("iteration {it}: non-finite iterate"));
            return Ok(report);
        }
        if let (Some(r), Some(flag)) = (ball, in_ball.as_mut()) {
            *flag &= next.norm() <= r + BALL_SLACK;
        }
        let delta = (&next - &x0).norm();
        x0 = next;
        report.iterate_history.push(x0.as_slice().to_vec());
        if delta < settings.tol_bc {
            converged = true;
            break;
        }
    }
    report.in_invariant_ball = in_ball;
    if !converged {
        report.notes.push(format!("no convergence after {} iterations", settings.max_iter));
    }
    let traj = integrate(&o.map, &x0, &o.grid, &strategy)?;
    let traj = problem.restore(&o, traj);
    report.finish(problem, traj, converged, settings)
}

struct NewtonOutcome {
    x0: Vector,
    residual: f64,
    iterations: usize,
    converged: bool,
}

/// Guiding violations abort; any other integration failure only rejects the
/// point.
fn shooting_residual(o: &Oriented, strategy: &SelectionStrategy, x0: &Vector) -> Result<Option<Vector>> {
    match integrate(&o.map, x0, &o.grid, strategy) {
        Ok(traj) => {
            let r = o.boundary.residual_vector(&traj)?;
            Ok(r.iter().all(|v| v.is_finite()).then_some(r))
        }
        Err(e @ Error::GuidingViolation { .. }) => Err(e),
        Err(Error::Divergence { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn newton(
    o: &Oriented,
    strategy: &SelectionStrategy,
    start: &Vector,
    tol: f64,
    max_iter: usize,
) -> Result<NewtonOutcome> {
    let n = start.len();
    let mut x = start.clone();
    let Some(mut r) = shooting_residual(o, strategy, &x)? else {
        return Ok(NewtonOutcome { x0: x, residual: f64::INFINITY, iterations: 0, converged: false });
    };
    let mut iterations = 0;
    while r.norm() > tol && iterations < max_iter {
        iterations += 1;
        let mut jac = crate::Matrix::zeros(n, n);
        for j in 0..n {
            let h = JACOBIAN_STEP * x[j].abs().max(1.0);
            let mut xp = x.clone();
            xp[j] += h;
            let Some(rp) = shooting_residual(o, strategy, &xp)? else {
                return Ok(NewtonOutcome { x0: x, residual: r.norm(), iterations, converged: false });
            };
            jac.set_column(j, &((rp - &r) / h));
        }
        let Some(delta) = jac.lu().solve(&(-&r)) else {
            break;
        };
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let trial = &x + &delta * step;
            if let Some(rt) = shooting_residual(o, strategy, &trial)? {
                if rt.norm() < r.norm() {
                    x = trial;
                    r = rt;
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    let residual = r.norm();
    Ok(NewtonOutcome { x0: x, residual, iterations, converged: residual <= tol })
}

fn search_box(problem: &Problem, settings: &SolverSettings) -> Result<Domain> {
    match &settings.search_box {
        Some(d) if d.dim() != problem.dim() => Err(Error::Dimension { expected: problem.dim(), found: d.dim() }),
        Some(d) => Ok(d.clone()),
        None => {
            let n = problem.dim();
            Domain::new_box(Vector::from_element(n, -1.0), Vector::from_element(n, 1.0))
        }
    }
}

/// Lexicographic `m^N` grid over the box (its center when `m = 1`).
fn multistart_points(domain: &Domain, m: usize) -> Vec<Vector> {
    let (lower, upper) = match domain {
        Domain::Box { lower, upper } => (lower.clone(), upper.clone()),
        Domain::Ball { center, radius } => (center.add_scalar(-radius), center.add_scalar(*radius)),
    };
    let n = lower.len();
    let m = m.max(1);
    let coord = |i: usize, axis: usize| {
        if m == 1 {
            0.5 * (lower[axis] + upper[axis])
        } else {
            lower[axis] + (upper[axis] - lower[axis]) * i as f64 / (m - 1) as f64
        }
    };
    let total = m.pow(n as u32);
    (0..total)
        .map(|mut flat| {
            let mut idx = vec![0usize; n];
            for axis in (0..n).rev() {
                idx[axis] = flat % m;
                flat /= m;
            }
            Vector::from_iterator(n, idx.iter().enumerate().map(|(axis, &i)| coord(i, axis)))
        })
        .collect()
}

/// Initial guess first, then the multistart grid; best by smallest
/// residual, ties by order.
fn multistart_newton(
    o: &Oriented,
    strategy: &SelectionStrategy,
    starts: &[Vector],
    settings: &SolverSettings,
) -> Result<NewtonOutcome> {
    let outcomes: Vec<Result<NewtonOutcome>> =
        starts.par_iter().map(|s| newton(o, strategy, s, settings.tol_bc, settings.newton_iter)).collect();
    let mut best: Option<NewtonOutcome> = None;
    let mut total_iterations = 0;
    for out in outcomes {
        let out = out?;
        total_iterations += out.iterations;
        if best.as_ref().is_none_or(|b| out.residual < b.residual) {
            best = Some(out);
        }
    }
    let mut best = best.expect("at least one start");
    best.iterations = total_iterations;
    Ok(best)
}

/// Damped Newton on `ρ(x₀) = x₀ - g(x(·; x₀))` from the initial guess and a
/// multistart grid over the search box.
pub fn solve_shooting(
    problem: &Problem,
    strategy: &SelectionStrategy,
    settings: &SolverSettings,
) -> Result<SolveReport> {
    let o = problem.oriented();
    let strategy = orient_strategy(strategy, o.reversed);
    let domain = search_box(problem, settings)?;
    let mut starts = vec![start_point(problem, settings)?];
    starts.extend(multistart_points(&domain, settings.multistart));
    let best = multistart_newton(&o, &strategy, &starts, settings)?;

    let mut report = SolveReport::empty(Method::Shooting, problem, None);
    report.iterations = best.iterations;
    if let Some(depth) = settings.degree_depth {
        report.degree_certificate = Some(shooting_degree(&o, &strategy, &domain, depth));
    }
    if !best.converged {
        report.notes.push(format!("no root found; smallest |rho| = {:e}", best.residual));
    }
    if !best.residual.is_finite() {
        return Ok(report);
    }
    let traj = integrate(&o.map, &best.x0, &o.grid, &strategy)?;
    let traj = problem.restore(&o, traj);
    report.finish(problem, traj, best.converged, settings)
}

fn shooting_degree(o: &Oriented, strategy: &SelectionStrategy, domain: &Domain, depth: usize) -> DegreeCertificate {
    let field = FnField {
        dim: o.map.dim(),
        f: |x: &Vector| {
            let traj = integrate(&o.map, x, &o.grid, strategy)?;
            o.boundary.residual_vector(&traj)
        },
    };
    match brouwer_degree(&field, domain, depth) {
        Ok(res) => DegreeCertificate {
            degree: Some(res.value),
            refinement_depth: Some(res.refinement_depth),
            boundary_min_norm: Some(res.boundary_min_norm),
            error: None,
        },
        Err(e) => DegreeCertificate {
            degree: None,
            refinement_depth: None,
            boundary_min_norm: None,
            error: Some(e.to_string()),
        },
    }
}

/// Filter radius for `sign`: the strict-negative or weak-negative radius for
/// `-1`, the weak-positive radius for `+1`, else the certificate radius.
pub fn filter_radius(cert: &GuidingCertificate, sign: Sign) -> f64 {
    let r = &cert.class_radii;
    let pick = match sign {
        Sign::Minus => match (r.strict_negative, r.weak_negative) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        },
        Sign::Plus => r.weak_positive,
    };
    pick.unwrap_or(cert.radius)
}

/// First sample `(t, x)` of the certificate grid outside `B̄(radius)` where
/// `F_V(t, x)` is empty.
pub fn probe_filter(
    map: &MultiMap,
    potential: &Potential,
    cert: &GuidingCertificate,
    sign: Sign,
    radius: f64,
) -> Result<Option<(f64, Vector)>> {
    let res = &cert.sample_resolution;
    let dirs = sampling::unit_directions(map.dim(), res.directions, 0);
    let horizon = map.horizon();
    let steps = res.time_steps.max(1);
    let shells = (cert.r_max / res.radial_step).round() as usize;
    for j in 1..=shells {
        let r = if j == shells { cert.r_max } else { res.radial_step * j as f64 };
        if r <= radius {
            continue;
        }
        for e in &dirs {
            let x = e * r;
            for k in 0..=steps {
                let t = if k == steps { horizon } else { horizon * k as f64 / steps as f64 };
                if map.select_filtered(potential, t, &x, sign, radius)?.is_none() {
                    return Ok(Some((t, x)));
                }
            }
        }
    }
    Ok(None)
}

/// λ-continuation from the pure field `±W_V` to `F_V`.
///
/// The filter must be nonempty on the certificate grid outside its radius;
/// an empty sample aborts with [`Error::GuidingViolation`] before the sweep.
pub fn solve_continuation(
    problem: &Problem,
    potential: &Potential,
    cert: &GuidingCertificate,
    sign: Sign,
    settings: &SolverSettings,
) -> Result<SolveReport> {
    if settings.lambda_steps == 0 {
        return Err(Error::Config("lambda_steps must be >= 1".into()));
    }
    let radius = filter_radius(cert, sign);
    if let Some((t, x)) = probe_filter(&problem.map, potential, cert, sign, radius)? {
        return Err(Error::GuidingViolation { t, x: x.as_slice().to_vec() });
    }
    let compatible = match sign {
        Sign::Minus => cert.strict_negative() || cert.weak_negative(),
        Sign::Plus => cert.weak_positive(),
    };
    let mut report = SolveReport::empty(Method::Continuation, problem, Some(cert));
    if !compatible {
        log::warn!("guiding classification {:?} does not match sign {:?}", cert.classification, sign);
        report.notes.push(format!("classification {:?} incompatible with sign {:?}", cert.classification, sign));
    }

    let o = problem.oriented();
    let domain = search_box(problem, settings)?;
    let grid_starts = multistart_points(&domain, settings.multistart);
    let mut x = start_point(problem, settings)?;
    let steps = settings.lambda_steps;
    for i in 0..=steps {
        let lambda = if i == steps { 0.0 } else { 1.0 - i as f64 / steps as f64 };
        let strategy = orient_strategy(
            &SelectionStrategy::Homotopy { potential: potential.clone(), sign, radius, lambda },
            o.reversed,
        );
        let mut out = newton(&o, &strategy, &x, settings.tol_bc, settings.newton_iter)?;
        if !out.converged {
            let mut starts = vec![x.clone()];
            starts.extend(grid_starts.iter().cloned());
            let retry = multistart_newton(&o, &strategy, &starts, settings)?;
            let spent = out.iterations;
            out = retry;
            out.iterations += spent;
        }
        report.iterations += out.iterations;
        report.lambda_path.push(LambdaStep {
            lambda,
            x0: out.x0.as_slice().to_vec(),
            residual_bc: out.residual,
            iterations: out.iterations,
        });
        if !out.converged {
            report.notes.push(format!("continuation lost the branch at lambda = {lambda}"));
            if out.residual.is_finite() {
                let traj = integrate(&o.map, &out.x0, &o.grid, &strategy)?;
                let traj = problem.restore(&o, traj);
                return report.finish(problem, traj, false, settings);
            }
            return Ok(report);
        }
        x = out.x0;
    }
    let strategy = orient_strategy(
        &SelectionStrategy::Homotopy { potential: potential.clone(), sign, radius, lambda: 0.0 },
        o.reversed,
    );
    let traj = integrate(&o.map, &x, &o.grid, &strategy)?;
    let traj = problem.restore(&o, traj);
    report.finish(problem, traj, true, settings)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::apriori_m;
    use crate::multimap::{Family, PiecewiseConstant};
    use crate::nonlocal::{MeanMap, Variant};
    use crate::potential::GuidingGrid;
    use crate::Matrix;

    fn v(c: &[f64]) -> Vector {
        Vector::from_row_slice(c)
    }

    fn linear_ball(dim: usize, a: f64, b: f64, rho: f64, horizon: f64) -> MultiMap {
        MultiMap::new(
            dim,
            horizon,
            Family::LinearBall {
                a: Matrix::identity(dim, dim) * a,
                b: PiecewiseConstant::constant(Vector::from_element(dim, b)),
                rho: PiecewiseConstant::constant(rho),
            },
        )
        .unwrap()
    }

    fn zero_map(dim: usize) -> MultiMap {
        MultiMap::new(dim, 1.0, Family::AffineHull { pairs: vec![(Matrix::zeros(dim, dim), Vector::zeros(dim))] })
            .unwrap()
    }

    fn anti(dim: usize) -> BoundaryFunctional {
        BoundaryFunctional::anti_periodic(dim, 1.0, Side::Initial).unwrap()
    }

    /// `x₀ = -x(T)` for `ẋ = -x + u`: `x₀ = -u(1 - e^{-T})/(1 + e^{-T})`.
    fn anti_periodic_linear_x0(u: f64) -> f64 {
        let e = (-1f64).exp();
        -u * (1.0 - e) / (1.0 + e)
    }

    #[test]
    fn fixed_point_examples() {
        let s = SolverSettings::default();
        let p = Problem::new(linear_ball(1, -1.0, 0.0, 0.0, 1.0), anti(1), 1000).unwrap();
        let r = solve_fixed_point(&p, &SelectionStrategy::Center, &s).unwrap();
        assert!(r.solved);
        assert!(r.solution.unwrap().x0[0].abs() < 1e-6);

        let mean =
            BoundaryFunctional::new(1, 1.0, Variant::MeanValue(MeanMap::RadialClamp(0.5)), Side::Initial).unwrap();
        let p = Problem::new(zero_map(1), mean, 100).unwrap();
        let settings = SolverSettings { initial_guess: Some(v(&[3.0])), ..SolverSettings::default() };
        let r = solve_fixed_point(&p, &SelectionStrategy::Center, &settings).unwrap();
        assert!(r.solved);
        assert!(r.solution.unwrap().x0[0].abs() < 1e-6);
        assert_eq!(r.in_invariant_ball, Some(false));

        let p = Problem::new(linear_ball(1, -1.0, 0.5, 0.0, 1.0), anti(1), 10_000).unwrap();
        let r = solve_fixed_point(&p, &SelectionStrategy::Center, &s).unwrap();
        assert!(r.solved);
        assert!((r.solution.as_ref().unwrap().x0[0] - anti_periodic_linear_x0(0.5)).abs() < 1e-4);
        assert!((r.solution.unwrap().x0[0] - (-0.231059)).abs() < 1e-4);
    }

    #[test]
    fn fixed_point_iterates_stay_in_corrected_ball() {
        let g = BoundaryFunctional::new(
            1,
            1.0,
            Variant::AffineEval { terms: vec![(Matrix::from_element(1, 1, 0.25), 1.0)], offset: v(&[1.0]) },
            Side::Initial,
        )
        .unwrap();
        let map = linear_ball(1, 0.5, 0.0, 0.0, 1.0);
        let p = Problem::new(map, g, 1000).unwrap();
        let r = solve_fixed_point(&p, &SelectionStrategy::Center, &SolverSettings::default()).unwrap();
        assert!(r.solved);
        assert_eq!(r.in_invariant_ball, Some(true));
    }

    #[test]
    fn shooting_examples() {
        let s = SolverSettings::default();
        let mp =
            BoundaryFunctional::new(1, 1.0, Variant::MultiPoint { coeffs: vec![0.5], times: vec![1.0] }, Side::Initial)
                .unwrap();
        let p = Problem::new(linear_ball(1, -1.0, 0.0, 0.0, 1.0), mp, 1000).unwrap();
        let r = solve_shooting(&p, &SelectionStrategy::Center, &s).unwrap();
        assert!(r.solved);
        assert!(r.solution.unwrap().x0[0].abs() < 1e-8);

        let p = Problem::new(zero_map(1), anti(1), 100).unwrap();
        let r = solve_shooting(&p, &SelectionStrategy::Center, &s).unwrap();
        assert!(r.solved);
        assert_eq!(r.degree_certificate.unwrap().degree, Some(1));

        let p = Problem::new(linear_ball(1, -1.0, 0.5, 0.0, 1.0), anti(1), 10_000).unwrap();
        let r = solve_shooting(&p, &SelectionStrategy::Center, &s).unwrap();
        assert!(r.solved);
        assert!(r.residual_bc.unwrap() < 1e-6);
        assert!((r.solution.unwrap().x0[0] - anti_periodic_linear_x0(0.5)).abs() < 1e-4);
    }

    #[test]
    fn shooting_in_two_dimensions_with_rotation() {
        // ẋ = Jx + b, anti-periodic: a unique solution, found from the grid.
        let j = Matrix::from_row_slice(2, 2, &[-0.5, 2.0, -2.0, -0.5]);
        let map = MultiMap::new(
            2,
            1.0,
            Family::LinearBall {
                a: j,
                b: PiecewiseConstant::constant(v(&[1.0, -0.5])),
                rho: PiecewiseConstant::constant(0.0),
            },
        )
        .unwrap();
        let p = Problem::new(map, anti(2), 2000).unwrap();
        let r = solve_shooting(&p, &SelectionStrategy::Center, &SolverSettings::default()).unwrap();
        assert!(r.solved, "{:?}", r.notes);
        assert_eq!(r.degree_certificate.as_ref().unwrap().degree.map(i64::abs), Some(1));
    }

    #[test]
    fn terminal_side_matches_forward_solution() {
        // x(T) = ½x(0) for ẋ = -x + 1: forward Euler from the reported x₀
        // must satisfy the terminal condition.
        let g = BoundaryFunctional::new(
            1,
            1.0,
            Variant::MultiPoint { coeffs: vec![0.5], times: vec![0.0] },
            Side::Terminal,
        )
        .unwrap();
        let p = Problem::new(linear_ball(1, -1.0, 1.0, 0.0, 1.0), g, 4000).unwrap();
        let r = solve_shooting(&p, &SelectionStrategy::Center, &SolverSettings::default()).unwrap();
        assert!(r.solved, "{:?}", r.certification);
        let x0 = r.solution.as_ref().unwrap().x0[0];
        let e = (-1f64).exp();
        // x(1) = x₀e⁻¹ + (1 - e⁻¹) = ½x₀.
        let exact = (1.0 - e) / (0.5 - e);
        // Euler error O(Δt), amplified by 1/(½ - e⁻¹) ≈ 7.6.
        assert!((x0 - exact).abs() < 5e-3, "{x0} vs {exact}");
        let r2 = solve_fixed_point(&p, &SelectionStrategy::Center, &SolverSettings::default()).unwrap();
        assert!(r2.residual_bc.unwrap() < 1e-6 || !r2.solved);
    }

    #[test]
    fn certify_examples() {
        let p = Problem::new(linear_ball(2, 0.0, 0.0, 1.0, 1.0), anti(2), 100).unwrap();
        let zero = Trajectory::constant(p.grid().clone(), &Vector::zeros(2));
        assert!(certify(&zero, &p, 1e-6, 1e-9).unwrap().pass);

        let p = Problem::new(linear_ball(1, -1.0, 0.0, 0.0, 1.0), anti(1), 100).unwrap();
        let c = Trajectory::constant(p.grid().clone(), &v(&[0.7]));
        let cert = certify(&c, &p, 10.0, 1e-9).unwrap();
        assert!(!cert.pass);
        assert!((cert.residual_dyn - 0.7).abs() < 1e-15);
    }

    #[test]
    fn solved_reports_recertify() {
        let p = Problem::new(linear_ball(1, -1.0, 0.5, 0.0, 1.0), anti(1), 10_000).unwrap();
        let r = solve_fixed_point(&p, &SelectionStrategy::Center, &SolverSettings::default()).unwrap();
        let again = certify(r.trajectory.as_ref().unwrap(), &p, 1e-4, 1e-9).unwrap();
        assert!(again.pass);
        assert_eq!(Some(again.residual_bc), r.residual_bc);
        let op = CoincidenceOperator { boundary: p.boundary() };
        assert!(op.defect(r.trajectory.as_ref().unwrap()).unwrap() <= r.residual_bc.unwrap() + 1e-12);
    }

    #[test]
    fn coincidence_operator_fixes_solutions_only() {
        let p = Problem::new(zero_map(2), anti(2), 10).unwrap();
        let op = CoincidenceOperator { boundary: p.boundary() };
        let zero = Trajectory::constant(p.grid().clone(), &Vector::zeros(2));
        assert_eq!(op.defect(&zero).unwrap(), 0.0);
        let one = Trajectory::constant(p.grid().clone(), &v(&[1.0, 0.0]));
        assert_eq!(op.defect(&one).unwrap(), 2.0);
    }

    #[test]
    fn continuation_examples() {
        let s = SolverSettings { degree_depth: None, ..SolverSettings::default() };
        let pot = |n| Potential::radial(n, vec![0.0, 1.0]).unwrap();

        let map = linear_ball(2, 0.0, 0.0, 1.0, 1.0);
        let cert = pot(2).classify_guiding(&map, &GuidingGrid::default()).unwrap();
        let p = Problem::new(map, anti(2), 1000).unwrap();
        let r = solve_continuation(&p, &pot(2), &cert, Sign::Plus, &s).unwrap();
        assert!(r.solved);
        assert!(r.solution.unwrap().sup_norm < 1e-6);

        let map = linear_ball(2, -1.0, 0.0, 0.5, 1.0);
        let cert = pot(2).classify_guiding(&map, &GuidingGrid::default()).unwrap();
        assert!(cert.strict_negative());
        let mu = map.growth().mu_total;
        let p = Problem::new(map, anti(2), 10_000).unwrap();
        let r = solve_continuation(&p, &pot(2), &cert, Sign::Minus, &s).unwrap();
        assert!(r.solved);
        assert_eq!(r.lambda_path.len(), 33);
        assert_eq!(r.lambda_path[0].lambda, 1.0);
        assert_eq!(r.lambda_path[32].lambda, 0.0);
        assert!(r.solution.unwrap().sup_norm <= apriori_m(cert.radius, mu) + 1e-6);
    }

    #[test]
    fn continuation_aborts_on_empty_filter() {
        let pot = Potential::radial(1, vec![0.0, 1.0]).unwrap();
        let map = linear_ball(1, 1.0, 0.0, 0.0, 1.0);
        let cert = pot.classify_guiding(&map, &GuidingGrid::default()).unwrap();
        let p = Problem::new(map, anti(1), 100).unwrap();
        let err = solve_continuation(&p, &pot, &cert, Sign::Minus, &SolverSettings::default()).unwrap_err();
        let Error::GuidingViolation { x, .. } = err else { panic!("expected a guiding violation, got {err:?}") };
        assert!(x[0].abs() > cert.radius);
    }

    #[test]
    fn continuation_path_steps_shrink() {
        // Nontrivial branch: ẋ ∈ -x + 1 + B̄(0.2) forces a nonzero solution.
        let pot = Potential::radial(1, vec![0.0, 1.0]).unwrap();
        let map = linear_ball(1, -1.0, 1.0, 0.2, 1.0);
        let cert = pot.classify_guiding(&map, &GuidingGrid::default()).unwrap();
        let p = Problem::new(map, anti(1), 500).unwrap();
        let max_jump = |steps| {
            let s = SolverSettings { lambda_steps: steps, degree_depth: None, ..SolverSettings::default() };
            let r = solve_continuation(&p, &pot, &cert, Sign::Minus, &s).unwrap();
            assert!(r.solved, "{:?}", r.notes);
            r.lambda_path.windows(2).map(|w| (w[1].x0[0] - w[0].x0[0]).abs()).fold(0.0, f64::max)
        };
        let (a, b) = (max_jump(8), max_jump(16));
        assert!(a > 0.0);
        assert!(b < 0.75 * a, "{a} {b}");
    }

    #[test]
    fn multistart_grid_is_lexicographic() {
        let d = Domain::new_box(v(&[0.0, 10.0]), v(&[1.0, 12.0])).unwrap();
        let pts = multistart_points(&d, 2);
        assert_eq!(pts, vec![v(&[0.0, 10.0]), v(&[0.0, 12.0]), v(&[1.0, 10.0]), v(&[1.0, 12.0])]);
        assert_eq!(multistart_points(&d, 1), vec![v(&[0.5, 11.0])]);
    }
}
