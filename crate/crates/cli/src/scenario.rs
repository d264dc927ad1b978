//! Problem files: a sectioned TOML document describing one problem.
//!
//! ```toml
//! dimension = 1
//! horizon = 1.0
//!
//! [multimap]
//! family = "linear_ball"
//! a = -1.0          # scalar means a multiple of the identity
//! b = 0.5           # scalar broadcasts to every component
//! rho = 0.0
//!
//! [boundary]
//! kind = "anti_periodic"
//!
//! [solver]
//! method = "fixed_point"
//! ```

use serde::{Deserialize, Serialize};

use nlbvp_core::degree::Domain;
use nlbvp_core::ivp::{DirectionSource, SelectionStrategy};
use nlbvp_core::multimap::{Family, Mode, MultiMap, PiecewiseConstant, Sign};
use nlbvp_core::nonlocal::{BoundaryFunctional, MeanMap, Side, Variant};
use nlbvp_core::potential::{GuidingGrid, Potential};
use nlbvp_core::solver::{Method, SolverSettings};
use nlbvp_core::{Matrix, Vector};

/// A problem file failed to parse or describes an invalid problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError(pub String);

impl std::fmt::Display for ParseError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ParseError {}

fn field_error(section: &str, msg: impl std::fmt::Display) -> ParseError {
    ParseError(format!("[{section}] {msg}"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixSpec {
    /// `s·I`.
    Scalar(f64),
    Rows(Vec<Vec<f64>>),
}

impl MatrixSpec {
    pub fn build(&self, dim: usize, section: &str, key: &str) -> Result<Matrix, ParseError> {
        match self {
            MatrixSpec::Scalar(s) => Ok(Matrix::identity(dim, dim) * *s),
            MatrixSpec::Rows(rows) => {
                if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                    return Err(field_error(section, format!("`{key}` must be a {dim}x{dim} matrix")));
                }
                Ok(Matrix::from_fn(dim, dim, |i, j| rows[i][j]))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VectorSpec {
    /// Same value in every component.
    Scalar(f64),
    Components(Vec<f64>),
}

impl VectorSpec {
    pub fn build(&self, dim: usize, section: &str, key: &str) -> Result<Vector, ParseError> {
        match self {
            VectorSpec::Scalar(s) => Ok(Vector::from_element(dim, *s)),
            VectorSpec::Components(c) => {
                if c.len() != dim {
                    return Err(field_error(section, format!("`{key}` must have {dim} components, found {}", c.len())));
                }
                Ok(Vector::from_row_slice(c))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PiecewiseSpec<T> {
    Constant(T),
    Pieces { breaks: Vec<f64>, values: Vec<T> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FamilyKind {
    LinearBall,
    AffineHull,
    Relay,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffinePairSpec {
    pub a: MatrixSpec,
    pub b: VectorSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MultiMapSpec {
    pub family: FamilyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<MatrixSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<PiecewiseSpec<VectorSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rho: Option<PiecewiseSpec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<AffinePairSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialKind {
    Radial,
    Quadratic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    #[serde(default = "defaults::r_max")]
    pub r_max: f64,
    #[serde(default = "defaults::radial_steps")]
    pub radial_steps: usize,
    #[serde(default = "defaults::directions")]
    pub directions: usize,
    #[serde(default = "defaults::time_steps")]
    pub time_steps: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            r_max: defaults::r_max(),
            radial_steps: defaults::radial_steps(),
            directions: defaults::directions(),
            time_steps: defaults::time_steps(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    pub kind: PotentialKind,
    /// `V(x) = φ(|x|²/2)` with `φ(s) = Σ coeffs[i]·s^i`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<f64>>,
    /// `V(x) = ½xᵀAx`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixSpec>,
    #[serde(default)]
    pub grid: GridSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryKind {
    AntiPeriodic,
    MultiPoint,
    MeanValue,
    AffineEval,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SideSpec {
    Initial,
    Terminal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeanKind {
    Linear,
    RadialClamp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSpec {
    pub matrix: MatrixSpec,
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundarySpec {
    pub kind: BoundaryKind,
    #[serde(default = "defaults::side")]
    pub side: SideSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub times: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h: Option<MeanKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub terms: Option<Vec<TermSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<VectorSpec>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MethodSpec {
    FixedPoint,
    Shooting,
    Continuation,
}

impl From<MethodSpec> for Method {
    fn from(m: MethodSpec) -> Method {
        match m {
            MethodSpec::FixedPoint => Method::FixedPoint,
            MethodSpec::Shooting => Method::Shooting,
            MethodSpec::Continuation => Method::Continuation,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StrategyKind {
    Center,
    Random,
    ExtremalMax,
    ExtremalMin,
    Filtered,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxSpec {
    pub lower: VectorSpec,
    pub upper: VectorSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSpec {
    #[serde(default = "defaults::method")]
    pub method: MethodSpec,
    #[serde(default = "defaults::tol_bc")]
    pub tol_bc: f64,
    #[serde(default = "defaults::tol_dyn")]
    pub tol_dyn: f64,
    #[serde(default = "defaults::grid_n")]
    pub grid_n: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "defaults::lambda_steps")]
    pub lambda_steps: usize,
    #[serde(default = "defaults::max_iter")]
    pub max_iter: usize,
    #[serde(default = "defaults::newton_iter")]
    pub newton_iter: usize,
    #[serde(default = "defaults::multistart")]
    pub multistart: usize,
    #[serde(default = "defaults::strategy")]
    pub strategy: StrategyKind,
    /// Filter / homotopy sign, `+1` or `-1`.
    #[serde(default = "defaults::sign")]
    pub sign: i64,
    #[serde(default = "defaults::certificate")]
    pub degree_certificate: bool,
    #[serde(default = "defaults::certificate_depth")]
    pub certificate_depth: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_guess: Option<VectorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search_box: Option<BoxSpec>,
}

impl Default for SolverSpec {
    fn default() -> Self {
        SolverSpec {
            method: defaults::method(),
            tol_bc: defaults::tol_bc(),
            tol_dyn: defaults::tol_dyn(),
            grid_n: defaults::grid_n(),
            seed: 0,
            lambda_steps: defaults::lambda_steps(),
            max_iter: defaults::max_iter(),
            newton_iter: defaults::newton_iter(),
            multistart: defaults::multistart(),
            strategy: defaults::strategy(),
            sign: defaults::sign(),
            degree_certificate: defaults::certificate(),
            certificate_depth: defaults::certificate_depth(),
            initial_guess: None,
            search_box: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegreeField {
    /// `x₀ ↦ g(i(x₀))`.
    Boundary,
    /// The shooting residual `ρ`.
    Shooting,
    /// `x ↦ Ax + b` from `matrix` and `offset`.
    Affine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DomainKind {
    Ball,
    Box,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DegreeSpec {
    #[serde(default = "defaults::degree_field")]
    pub field: DegreeField,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<VectorSpec>,
    #[serde(default = "defaults::domain")]
    pub domain: DomainKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<VectorSpec>,
    #[serde(default = "defaults::radius")]
    pub radius: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower: Option<VectorSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upper: Option<VectorSpec>,
    #[serde(default = "defaults::max_depth")]
    pub max_depth: usize,
}

impl Default for DegreeSpec {
    fn default() -> Self {
        DegreeSpec {
            field: defaults::degree_field(),
            matrix: None,
            offset: None,
            domain: defaults::domain(),
            center: None,
            radius: defaults::radius(),
            lower: None,
            upper: None,
            max_depth: defaults::max_depth(),
        }
    }
}

/// Overrides for `bounds`; absent values come from the problem.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0_norm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_total: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
    /// File-name stem; defaults to the problem file's stem.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stem: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub dimension: usize,
    pub horizon: f64,
    pub multimap: MultiMapSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub potential: Option<PotentialSpec>,
    pub boundary: BoundarySpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<DegreeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSpec>,
}

mod defaults {
    use super::*;

    pub fn r_max() -> f64 {
        GuidingGrid::default().r_max
    }
    pub fn radial_steps() -> usize {
        GuidingGrid::default().radial_steps
    }
    pub fn directions() -> usize {
        GuidingGrid::default().directions
    }
    pub fn time_steps() -> usize {
        GuidingGrid::default().time_steps
    }
    pub fn side() -> SideSpec {
        SideSpec::Initial
    }
    pub fn method() -> MethodSpec {
        MethodSpec::Shooting
    }
    pub fn tol_bc() -> f64 {
        SolverSettings::default().tol_bc
    }
    pub fn tol_dyn() -> f64 {
        SolverSettings::default().tol_dyn
    }
    pub fn grid_n() -> usize {
        10_000
    }
    pub fn lambda_steps() -> usize {
        SolverSettings::default().lambda_steps
    }
    pub fn max_iter() -> usize {
        SolverSettings::default().max_iter
    }
    pub fn newton_iter() -> usize {
        SolverSettings::default().newton_iter
    }
    pub fn multistart() -> usize {
        SolverSettings::default().multistart
    }
    pub fn strategy() -> StrategyKind {
        StrategyKind::Center
    }
    pub fn sign() -> i64 {
        -1
    }
    pub fn certificate() -> bool {
        true
    }
    pub fn certificate_depth() -> usize {
        4
    }
    pub fn degree_field() -> DegreeField {
        DegreeField::Boundary
    }
    pub fn domain() -> DomainKind {
        DomainKind::Ball
    }
    pub fn radius() -> f64 {
        1.0
    }
    pub fn max_depth() -> usize {
        8
    }
}

/// Core objects described by a problem file.
#[derive(Debug, Clone)]
pub struct Built {
    pub map: MultiMap,
    pub boundary: BoundaryFunctional,
    pub potential: Option<Potential>,
    pub guiding_grid: GuidingGrid,
    pub settings: SolverSettings,
    pub method: Method,
    pub sign: Sign,
    pub grid_n: usize,
    pub seed: u64,
}

impl ProblemSpec {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        toml::from_str(text).map_err(|e| ParseError(e.to_string().trim_end().to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("problem specs serialize")
    }

    pub fn build(&self) -> Result<Built, ParseError> {
        let n = self.dimension;
        if n == 0 {
            return Err(ParseError("`dimension` must be >= 1".into()));
        }
        let map = self.build_map()?;
        let boundary = self.build_boundary()?;
        let potential = self.build_potential()?;
        let grid = self.potential.as_ref().map(|p| p.grid.clone()).unwrap_or_default();
        let s = &self.solver;
        let guiding_grid = GuidingGrid {
            r_max: grid.r_max,
            radial_steps: grid.radial_steps,
            directions: grid.directions,
            time_steps: grid.time_steps,
            seed: s.seed,
        };
        let sign = Sign::from_i64(s.sign).map_err(|e| field_error("solver", e))?;
        let search_box = match &s.search_box {
            Some(b) => Some(
                Domain::new_box(
                    b.lower.build(n, "solver", "search_box.lower")?,
                    b.upper.build(n, "solver", "search_box.upper")?,
                )
                .map_err(|e| field_error("solver", e))?,
            ),
            None => None,
        };
        let initial_guess = s.initial_guess.as_ref().map(|v| v.build(n, "solver", "initial_guess")).transpose()?;
        if !s.tol_bc.is_finite() || s.tol_bc <= 0.0 || !s.tol_dyn.is_finite() || s.tol_dyn < 0.0 {
            return Err(field_error("solver", "tolerances must be positive"));
        }
        if s.grid_n == 0 || s.lambda_steps == 0 {
            return Err(field_error("solver", "`grid_n` and `lambda_steps` must be >= 1"));
        }
        let settings = SolverSettings {
            tol_bc: s.tol_bc,
            tol_dyn: s.tol_dyn,
            max_iter: s.max_iter,
            newton_iter: s.newton_iter,
            multistart: s.multistart,
            search_box,
            degree_depth: s.degree_certificate.then_some(s.certificate_depth),
            lambda_steps: s.lambda_steps,
            initial_guess,
        };
        Ok(Built {
            map,
            boundary,
            potential,
            guiding_grid,
            settings,
            method: s.method.into(),
            sign,
            grid_n: s.grid_n,
            seed: s.seed,
        })
    }

    fn build_map(&self) -> Result<MultiMap, ParseError> {
        let n = self.dimension;
        let m = &self.multimap;
        let sec = "multimap";
        let need = |key: &str| field_error(sec, format!("family {:?} needs `{key}`", m.family));
        let family = match m.family {
            FamilyKind::LinearBall => {
                let a = m.a.as_ref().ok_or_else(|| need("a"))?.build(n, sec, "a")?;
                let b = match &m.b {
                    None => PiecewiseConstant::constant(Vector::zeros(n)),
                    Some(PiecewiseSpec::Constant(v)) => PiecewiseConstant::constant(v.build(n, sec, "b")?),
                    Some(PiecewiseSpec::Pieces { breaks, values }) => {
                        let values = values.iter().map(|v| v.build(n, sec, "b.values")).collect::<Result<_, _>>()?;
                        PiecewiseConstant::new(breaks.clone(), values)
                            .map_err(|e| field_error(sec, format!("b: {e}")))?
                    }
                };
                let rho = match &m.rho {
                    None => PiecewiseConstant::constant(0.0),
                    Some(PiecewiseSpec::Constant(r)) => PiecewiseConstant::constant(*r),
                    Some(PiecewiseSpec::Pieces { breaks, values }) => {
                        PiecewiseConstant::new(breaks.clone(), values.clone())
                            .map_err(|e| field_error(sec, format!("rho: {e}")))?
                    }
                };
                Family::LinearBall { a, b, rho }
            }
            FamilyKind::AffineHull => {
                let pairs = m.pairs.as_ref().ok_or_else(|| need("pairs"))?;
                let pairs = pairs
                    .iter()
                    .map(|p| Ok((p.a.build(n, sec, "pairs.a")?, p.b.build(n, sec, "pairs.b")?)))
                    .collect::<Result<Vec<_>, ParseError>>()?;
                Family::AffineHull { pairs }
            }
            FamilyKind::Relay => Family::Relay { k: m.k.ok_or_else(|| need("k"))? },
        };
        MultiMap::new(n, self.horizon, family).map_err(|e| field_error(sec, e))
    }

    fn build_boundary(&self) -> Result<BoundaryFunctional, ParseError> {
        let n = self.dimension;
        let b = &self.boundary;
        let sec = "boundary";
        let need = |key: &str| field_error(sec, format!("kind {:?} needs `{key}`", b.kind));
        let variant = match b.kind {
            BoundaryKind::AntiPeriodic => Variant::AntiPeriodic,
            BoundaryKind::MultiPoint => Variant::MultiPoint {
                coeffs: b.coeffs.clone().ok_or_else(|| need("coeffs"))?,
                times: b.times.clone().ok_or_else(|| need("times"))?,
            },
            BoundaryKind::MeanValue => match b.h.ok_or_else(|| need("h"))? {
                MeanKind::Linear => Variant::MeanValue(MeanMap::Linear(
                    b.matrix.as_ref().ok_or_else(|| need("matrix"))?.build(n, sec, "matrix")?,
                )),
                MeanKind::RadialClamp => {
                    Variant::MeanValue(MeanMap::RadialClamp(b.scale.ok_or_else(|| need("scale"))?))
                }
            },
            BoundaryKind::AffineEval => {
                let terms = b.terms.as_ref().ok_or_else(|| need("terms"))?;
                let terms = terms
                    .iter()
                    .map(|t| Ok((t.matrix.build(n, sec, "terms.matrix")?, t.time)))
                    .collect::<Result<Vec<_>, ParseError>>()?;
                let offset = match &b.offset {
                    Some(v) => v.build(n, sec, "offset")?,
                    None => Vector::zeros(n),
                };
                Variant::AffineEval { terms, offset }
            }
        };
        let side = match b.side {
            SideSpec::Initial => Side::Initial,
            SideSpec::Terminal => Side::Terminal,
        };
        BoundaryFunctional::new(n, self.horizon, variant, side).map_err(|e| field_error(sec, e))
    }

    fn build_potential(&self) -> Result<Option<Potential>, ParseError> {
        let Some(p) = &self.potential else {
            return Ok(None);
        };
        let n = self.dimension;
        let sec = "potential";
        let pot = match p.kind {
            PotentialKind::Radial => {
                let coeffs = p.coeffs.clone().ok_or_else(|| field_error(sec, "radial potential needs `coeffs`"))?;
                Potential::radial(n, coeffs)
            }
            PotentialKind::Quadratic => {
                let a = p.matrix.as_ref().ok_or_else(|| field_error(sec, "quadratic potential needs `matrix`"))?;
                Potential::quadratic(a.build(n, sec, "matrix")?)
            }
        };
        pot.map(Some).map_err(|e| field_error(sec, e))
    }

    /// Selection strategy named in `[solver]`. Filtered selections need the
    /// filter radius from the guiding certificate.
    pub fn strategy(&self, built: &Built, filter_radius: Option<f64>) -> Result<SelectionStrategy, ParseError> {
        let need_potential = || {
            built.potential.clone().ok_or_else(|| {
                field_error("solver", format!("strategy {:?} needs a [potential]", self.solver.strategy))
            })
        };
        Ok(match self.solver.strategy {
            StrategyKind::Center => SelectionStrategy::Center,
            StrategyKind::Random => SelectionStrategy::Random { seed: built.seed },
            StrategyKind::ExtremalMax => {
                SelectionStrategy::Extremal { direction: DirectionSource::Gradient(need_potential()?), mode: Mode::Max }
            }
            StrategyKind::ExtremalMin => {
                SelectionStrategy::Extremal { direction: DirectionSource::Gradient(need_potential()?), mode: Mode::Min }
            }
            StrategyKind::Filtered => SelectionStrategy::Filtered {
                potential: need_potential()?,
                sign: built.sign,
                radius: filter_radius
                    .ok_or_else(|| field_error("solver", "filtered strategy needs a guiding certificate"))?,
            },
        })
    }
}
