//! Command layer behind the `nlbvp` binary.
//!
//! Every command is a pure function of the problem text and the overrides
//! ([`execute`]); [`run`] adds file IO. Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | file could not be read or written |
//! | 2 | parse or validation error |
//! | 3 | `solve` did not produce a certified solution |
//! | 4 | `solve` aborted on a guiding violation (empty filtered selection) |
//! | 5 | `degree` inconclusive, degenerate or not evaluable |

pub mod scenario;

use std::path::{Path, PathBuf};

use serde::Serialize;

use nlbvp_core::bounds::{self, BoundReport};
use nlbvp_core::degree::{brouwer_degree, AffineField, DegreeResult, Domain, FnField};
use nlbvp_core::ivp::Trajectory;
use nlbvp_core::nonlocal::{check_th4_conditions, check_th6_conditions, GrowthEstimate, Th4Report, Th6Report};
use nlbvp_core::potential::{GuidingCertificate, MonotoneReport};
use nlbvp_core::solver::{self, Method, Problem, SolveReport};
use nlbvp_core::{Error, Vector};

use scenario::{DegreeField, DegreeSpec, DomainKind};
pub use scenario::{ParseError, ProblemSpec};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_UNSOLVED: i32 = 3;
pub const EXIT_GUIDING: i32 = 4;
pub const EXIT_DEGREE: i32 = 5;

/// Norms at which the liminf condition is sampled by `verify`.
const TH6_NORMS: [f64; 4] = [1e2, 1e3, 1e4, 1e6];
const TH6_SAMPLES: usize = 8;
const TH6_DEGREE_DEPTH: usize = 6;
const TH4_SPHERE_SAMPLES: usize = 64;
const MONOTONE_SAMPLES: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Solve,
    Verify,
    Bounds,
    Degree,
}

/// Command-line overrides of `[solver]` keys.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub grid_n: Option<usize>,
    pub method: Option<Method>,
}

/// Result of one command: exit code, the JSON document and files to write.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub exit_code: i32,
    /// Printed to stdout; absent on parse errors.
    pub document: Option<String>,
    /// `(file name, contents)`.
    pub files: Vec<(String, String)>,
    /// Printed to stderr.
    pub message: Option<String>,
}

impl Outcome {
    fn failed(exit_code: i32, message: String) -> Self {
        Outcome { exit_code, document: None, files: Vec::new(), message: Some(message) }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Abort {
    /// `guiding_violation`, `divergence` or `error`.
    pub kind: String,
    pub message: String,
    pub t: Option<f64>,
    pub x: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveDocument {
    pub scenario: String,
    pub exit_code: i32,
    pub abort: Option<Abort>,
    pub report: SolveReport,
}

/// A report together with its overall verdict.
#[derive(Debug, Clone, Serialize)]
pub struct Checked<T> {
    pub pass: bool,
    #[serde(flatten)]
    pub detail: T,
}

#[derive(Debug, Clone, Serialize)]
pub struct CandidateSummary {
    pub method: Method,
    pub solved: bool,
    pub residual_bc: Option<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyDocument {
    pub scenario: String,
    /// `(c, d)` with `|g(x)| ≤ c‖x‖ + d`.
    pub growth: GrowthEstimate,
    pub mu_total: f64,
    pub guiding: Option<GuidingCertificate>,
    pub monotone: Option<MonotoneReport>,
    pub coercive: Option<bool>,
    pub candidate: CandidateSummary,
    pub th4: Option<Checked<Th4Report>>,
    pub th4_error: Option<String>,
    pub th6: Option<Checked<Th6Report>>,
    pub th6_error: Option<String>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundInputsDoc {
    pub x0_norm: f64,
    pub mu_total: f64,
    pub radius: Option<f64>,
    pub c: f64,
    pub d: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundsDocument {
    pub scenario: String,
    pub inputs: BoundInputsDoc,
    pub gronwall_upper: f64,
    pub escape_lower: f64,
    pub apriori_m: Option<f64>,
    pub schauder_radius: Option<f64>,
    pub schauder_corrected_radius: Option<f64>,
    pub reports: Vec<BoundReport>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DomainDoc {
    pub kind: DomainKind,
    pub center: Option<Vec<f64>>,
    pub radius: Option<f64>,
    pub lower: Option<Vec<f64>>,
    pub upper: Option<Vec<f64>>,
}

impl From<&Domain> for DomainDoc {
    fn from(d: &Domain) -> Self {
        match d {
            Domain::Ball { center, radius } => DomainDoc {
                kind: DomainKind::Ball,
                center: Some(center.as_slice().to_vec()),
                radius: Some(*radius),
                lower: None,
                upper: None,
            },
            Domain::Box { lower, upper } => DomainDoc {
                kind: DomainKind::Box,
                center: None,
                radius: None,
                lower: Some(lower.as_slice().to_vec()),
                upper: Some(upper.as_slice().to_vec()),
            },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DegreeDocument {
    pub scenario: String,
    pub field: DegreeField,
    pub domain: DomainDoc,
    pub max_depth: usize,
    pub result: Option<DegreeResult>,
    pub error: Option<String>,
}

/// Reads `path`, runs `command` and writes its files into `out_dir`
/// (falling back to `[output] dir`, then the current directory).
pub fn run(command: Command, path: &Path, overrides: Overrides, out_dir: Option<&Path>) -> Outcome {
    let text = match std::fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return Outcome::failed(EXIT_IO, format!("cannot read {}: {e}", path.display())),
    };
    let file_stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "problem".into());
    let outcome = execute(command, &text, &file_stem, overrides);
    if outcome.files.is_empty() {
        return outcome;
    }
    let dir = match out_dir {
        Some(d) => d.to_path_buf(),
        None => ProblemSpec::parse(&text)
            .ok()
            .and_then(|s| s.output.and_then(|o| o.dir))
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(".")),
    };
    if let Err(e) = write_files(&dir, &outcome.files) {
        return Outcome {
            exit_code: EXIT_IO,
            message: Some(format!("cannot write to {}: {e}", dir.display())),
            ..outcome
        };
    }
    outcome
}

fn write_files(dir: &Path, files: &[(String, String)]) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, contents) in files {
        std::fs::write(dir.join(name), contents)?;
    }
    Ok(())
}

/// Runs `command` on problem text; `file_stem` names the outputs unless the
/// problem sets `[output] stem`.
pub fn execute(command: Command, text: &str, file_stem: &str, overrides: Overrides) -> Outcome {
    let mut spec = match ProblemSpec::parse(text) {
        Ok(s) => s,
        Err(e) => return Outcome::failed(EXIT_PARSE, format!("parse error: {e}")),
    };
    if let Some(seed) = overrides.seed {
        spec.solver.seed = seed;
    }
    if let Some(n) = overrides.grid_n {
        spec.solver.grid_n = n;
    }
    if let Some(m) = overrides.method {
        spec.solver.method = match m {
            Method::FixedPoint => scenario::MethodSpec::FixedPoint,
            Method::Shooting => scenario::MethodSpec::Shooting,
            Method::Continuation => scenario::MethodSpec::Continuation,
        };
    }
    let stem = spec.output.as_ref().and_then(|o| o.stem.clone()).unwrap_or_else(|| file_stem.to_string());
    let ctx = match Context::new(spec) {
        Ok(c) => c,
        Err(e) => return Outcome::failed(EXIT_PARSE, format!("invalid problem: {e}")),
    };
    match command {
        Command::Solve => cmd_solve(&ctx, &stem),
        Command::Verify => cmd_verify(&ctx, &stem),
        Command::Bounds => cmd_bounds(&ctx, &stem),
        Command::Degree => cmd_degree(&ctx, &stem),
    }
}

/// Parsed problem with the objects every command needs.
struct Context {
    spec: ProblemSpec,
    built: scenario::Built,
    problem: Problem,
    guiding: Option<GuidingCertificate>,
}

impl Context {
    fn new(spec: ProblemSpec) -> Result<Self, ParseError> {
        let built = spec.build()?;
        let problem = Problem::new(built.map.clone(), built.boundary.clone(), built.grid_n)
            .map_err(|e| ParseError(format!("[solver] {e}")))?;
        let guiding = match &built.potential {
            Some(p) => Some(
                p.classify_guiding(&built.map, &built.guiding_grid)
                    .map_err(|e| ParseError(format!("[potential] {e}")))?,
            ),
            None => None,
        };
        Ok(Context { spec, built, problem, guiding })
    }

    fn solve(&self) -> Result<SolveReport, Error> {
        let settings = &self.built.settings;
        let mut report = match self.built.method {
            Method::Continuation => {
                let (Some(pot), Some(cert)) = (&self.built.potential, &self.guiding) else {
                    return Err(Error::Config("[solver] continuation needs a [potential]".into()));
                };
                solver::solve_continuation(&self.problem, pot, cert, self.built.sign, settings)?
            }
            method => {
                let radius = self.guiding.as_ref().map(|c| solver::filter_radius(c, self.built.sign));
                let strategy = self.spec.strategy(&self.built, radius).map_err(|e| Error::Config(e.0))?;
                match method {
                    Method::FixedPoint => solver::solve_fixed_point(&self.problem, &strategy, settings)?,
                    _ => solver::solve_shooting(&self.problem, &strategy, settings)?,
                }
            }
        };
        if report.hypothesis_reports.guiding.is_none() {
            if let Some(cert) = &self.guiding {
                report.hypothesis_reports.guiding = Some(cert.clone());
                if report.solution.is_some() {
                    let mu = self.problem.map().growth().mu_total;
                    report.bound_diagnostics.push(BoundReport::apriori(cert.radius, mu));
                }
            }
        }
        Ok(report)
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::GuidingViolation { .. } => EXIT_GUIDING,
        Error::Config(_)
        | Error::InvalidSet(_)
        | Error::InvalidMap(_)
        | Error::InvalidPotential(_)
        | Error::InvalidBoundary(_)
        | Error::Dimension { .. }
        | Error::NotCoercive => EXIT_PARSE,
        _ => EXIT_UNSOLVED,
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn cmd_solve(ctx: &Context, stem: &str) -> Outcome {
    let (report, abort, exit_code) = match ctx.solve() {
        Ok(report) => {
            let code = if report.solved { EXIT_OK } else { EXIT_UNSOLVED };
            (report, None, code)
        }
        Err(e) => {
            let code = exit_code_for(&e);
            if code == EXIT_PARSE {
                return Outcome::failed(code, format!("invalid problem: {e}"));
            }
            let abort = match &e {
                Error::GuidingViolation { t, x } => {
                    Abort { kind: "guiding_violation".into(), message: e.to_string(), t: Some(*t), x: Some(x.clone()) }
                }
                Error::Divergence { t, .. } => {
                    Abort { kind: "divergence".into(), message: e.to_string(), t: Some(*t), x: None }
                }
                _ => Abort { kind: "error".into(), message: e.to_string(), t: None, x: None },
            };
            let report = SolveReport::aborted(ctx.built.method, &ctx.problem, ctx.guiding.as_ref(), e.to_string());
            (report, Some(abort), code)
        }
    };
    let csv = report.trajectory.as_ref().map(Trajectory::to_csv);
    let message = abort
        .as_ref()
        .map(|a| a.message.clone())
        .or_else(|| (exit_code == EXIT_UNSOLVED).then(|| "no certified solution found".to_string()));
    let doc = to_json(&SolveDocument { scenario: stem.to_string(), exit_code, abort, report });
    let mut files = vec![(format!("{stem}_report.json"), doc.clone())];
    if let Some(csv) = csv {
        files.push((format!("{stem}_trajectory.csv"), csv));
    }
    Outcome { exit_code, document: Some(doc), files, message }
}

fn cmd_verify(ctx: &Context, stem: &str) -> Outcome {
    let b = &ctx.built;
    let mut notes = Vec::new();
    let (monotone, coercive) = match &b.potential {
        Some(p) => (Some(p.check_monotone(MONOTONE_SAMPLES, b.seed, b.guiding_grid.r_max)), Some(p.check_coercive())),
        None => {
            notes.push("no potential given; guiding checks skipped".into());
            (None, None)
        }
    };

    let solved = ctx.solve();
    let candidates: Vec<Trajectory> = match &solved {
        Ok(r) => r.trajectory.iter().cloned().collect(),
        Err(_) => Vec::new(),
    };
    let candidate = match &solved {
        Ok(r) => CandidateSummary { method: r.method, solved: r.solved, residual_bc: r.residual_bc, error: None },
        Err(e) => CandidateSummary { method: b.method, solved: false, residual_bc: None, error: Some(e.to_string()) },
    };

    let (th4, th4_error) = match (&b.potential, &ctx.guiding) {
        (Some(p), Some(cert)) => {
            match check_th4_conditions(&b.boundary, p, cert, &candidates, TH4_SPHERE_SAMPLES, b.settings.tol_bc, b.seed)
            {
                Ok(r) => (Some(Checked { pass: r.pass(), detail: r }), None),
                Err(e) => (None, Some(e.to_string())),
            }
        }
        _ => (None, Some("needs a [potential]".to_string())),
    };
    let (th6, th6_error) =
        match check_th6_conditions(&b.boundary, &b.map, &TH6_NORMS, TH6_SAMPLES, b.seed, TH6_DEGREE_DEPTH) {
            Ok(r) => (Some(Checked { pass: r.pass(), detail: r }), None),
            Err(e) => (None, Some(e.to_string())),
        };
    let doc = VerifyDocument {
        scenario: stem.to_string(),
        growth: b.boundary.apply_growth(),
        mu_total: b.map.growth().mu_total,
        guiding: ctx.guiding.clone(),
        monotone,
        coercive,
        candidate,
        th4,
        th4_error,
        th6,
        th6_error,
        notes,
    };
    let doc = to_json(&doc);
    Outcome {
        exit_code: EXIT_OK,
        document: Some(doc.clone()),
        files: vec![(format!("{stem}_verify.json"), doc)],
        message: None,
    }
}

fn cmd_bounds(ctx: &Context, stem: &str) -> Outcome {
    let o = ctx.spec.bounds.clone().unwrap_or_default();
    let growth = ctx.built.boundary.apply_growth();
    let inputs = BoundInputsDoc {
        x0_norm: o.x0_norm.unwrap_or(0.0),
        mu_total: o.mu_total.unwrap_or(ctx.built.map.growth().mu_total),
        radius: o.radius.or(ctx.guiding.as_ref().map(|c| c.radius)),
        c: o.c.unwrap_or(growth.c),
        d: o.d.unwrap_or(growth.d),
    };
    let mu = inputs.mu_total;
    let mut reports = vec![BoundReport::gronwall(inputs.x0_norm, mu), BoundReport::escape(inputs.x0_norm, mu)];
    if let Some(r) = inputs.radius {
        reports.push(BoundReport::apriori(r, mu));
    }
    reports.extend(BoundReport::schauder(inputs.c, inputs.d, mu));
    let schauder = bounds::schauder_radius(inputs.c, inputs.d, mu);
    let doc = BoundsDocument {
        scenario: stem.to_string(),
        gronwall_upper: bounds::gronwall_upper(inputs.x0_norm, mu),
        escape_lower: bounds::escape_lower(inputs.x0_norm, mu),
        apriori_m: inputs.radius.map(|r| bounds::apriori_m(r, mu)),
        schauder_radius: schauder.map(|s| s.linear_radius),
        schauder_corrected_radius: schauder.and_then(|s| s.corrected_radius),
        inputs,
        reports,
    };
    let doc = to_json(&doc);
    Outcome {
        exit_code: EXIT_OK,
        document: Some(doc.clone()),
        files: vec![(format!("{stem}_bounds.json"), doc)],
        message: None,
    }
}

fn degree_domain(spec: &DegreeSpec, n: usize) -> Result<Domain, ParseError> {
    let err = |e: Error| ParseError(format!("[degree] {e}"));
    match spec.domain {
        DomainKind::Ball => {
            let center = match &spec.center {
                Some(c) => c.build(n, "degree", "center")?,
                None => Vector::zeros(n),
            };
            Domain::new_ball(center, spec.radius).map_err(err)
        }
        DomainKind::Box => {
            let need = |key: &str| ParseError(format!("[degree] box domain needs `{key}`"));
            let lower = spec.lower.as_ref().ok_or_else(|| need("lower"))?.build(n, "degree", "lower")?;
            let upper = spec.upper.as_ref().ok_or_else(|| need("upper"))?.build(n, "degree", "upper")?;
            Domain::new_box(lower, upper).map_err(err)
        }
    }
}

fn cmd_degree(ctx: &Context, stem: &str) -> Outcome {
    let spec = ctx.spec.degree.clone().unwrap_or_default();
    let n = ctx.problem.dim();
    let domain = match degree_domain(&spec, n) {
        Ok(d) => d,
        Err(e) => return Outcome::failed(EXIT_PARSE, format!("invalid problem: {e}")),
    };
    let depth = spec.max_depth;
    let result = match spec.field {
        DegreeField::Affine => {
            let Some(a) = &spec.matrix else {
                return Outcome::failed(EXIT_PARSE, "invalid problem: [degree] affine field needs `matrix`".into());
            };
            let built = a.build(n, "degree", "matrix").and_then(|a| {
                let b = match &spec.offset {
                    Some(b) => b.build(n, "degree", "offset")?,
                    None => Vector::zeros(n),
                };
                Ok(AffineField { a, b })
            });
            match built {
                Ok(field) => brouwer_degree(&field, &domain, depth),
                Err(e) => return Outcome::failed(EXIT_PARSE, format!("invalid problem: {e}")),
            }
        }
        DegreeField::Boundary => {
            let g = ctx.problem.boundary();
            match g.check_grid(64) {
                Ok(grid) => {
                    brouwer_degree(&FnField { dim: n, f: |x: &Vector| g.on_constant(&grid, x) }, &domain, depth)
                }
                Err(e) => Err(e),
            }
        }
        DegreeField::Shooting => {
            let radius = ctx.guiding.as_ref().map(|c| solver::filter_radius(c, ctx.built.sign));
            let strategy = match ctx.spec.strategy(&ctx.built, radius) {
                Ok(s) => s,
                Err(e) => return Outcome::failed(EXIT_PARSE, format!("invalid problem: {e}")),
            };
            let field = FnField { dim: n, f: |x: &Vector| ctx.problem.shooting_residual(&strategy, x) };
            brouwer_degree(&field, &domain, depth)
        }
    };
    let (result, error, exit_code) = match result {
        Ok(r) => (Some(r), None, EXIT_OK),
        Err(e) => (None, Some(e.to_string()), EXIT_DEGREE),
    };
    let message = error.clone();
    let doc = to_json(&DegreeDocument {
        scenario: stem.to_string(),
        field: spec.field,
        domain: DomainDoc::from(&domain),
        max_depth: depth,
        result,
        error,
    });
    Outcome { exit_code, document: Some(doc.clone()), files: vec![(format!("{stem}_degree.json"), doc)], message }
}
