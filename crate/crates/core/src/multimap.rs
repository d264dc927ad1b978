//! Carathéodory right-hand sides `F(t, x)`.
//!
//! Three built-in families cover the use cases:
//!
//! * `LinearBall`: `F(t, x) = A x + b(t) + B̄(0, ρ(t))`,
//! * `AffineHull`: `F(t, x) = conv { A_j x + b_j }`,
//! * `Relay` (`N = 1`): the Filippov convexification of `-k sgn(x)`.
//!
//! All time dependence is piecewise constant so growth integrals are exact.
//! Selections of the half-space-filtered map
//! `F_V(t, x) = F(t, x) ∩ { y : ±⟨∇V(x), y⟩ ≥ 0 }` (active only outside the
//! ball of radius `R`) are realised by extremal selection; an empty filtered
//! set is reported as `None`.

use crate::convexset::ConvexSet;
use crate::linalg::operator_norm;
use crate::potential::Potential;
use crate::{Error, Matrix, Result, Vector};

/// Tolerance under which the filtered-selection sign test still accepts a
/// selection.
pub const FILTER_MARGIN: f64 = 1e-10;

/// Right-continuous piecewise-constant function of time on `[0, T]`.
///
/// `values[i]` holds on `[breaks[i-1], breaks[i])` with `breaks[-1] = 0` and
/// the final piece extending to `T` inclusive.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseConstant<V> {
    breaks: Vec<f64>,
    values: Vec<V>,
}

impl<V: Clone> PiecewiseConstant<V> {
    pub fn constant(value: V) -> Self {
        PiecewiseConstant { breaks: Vec::new(), values: vec![value] }
    }

    /// `breaks` must be strictly increasing and `values.len() == breaks.len() + 1`.
    pub fn new(breaks: Vec<f64>, values: Vec<V>) -> Result<Self> {
        if values.len() != breaks.len() + 1 {
            return Err(Error::InvalidMap(format!(
                "{} breakpoints need {} values, got {}",
                breaks.len(),
                breaks.len() + 1,
                values.len()
            )));
        }
        if breaks.iter().any(|b| !b.is_finite()) || breaks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidMap("breakpoints must be finite and strictly increasing".into()));
        }
        Ok(PiecewiseConstant { breaks, values })
    }

    pub fn at(&self, t: f64) -> &V {
        let idx = self.breaks.partition_point(|b| *b <= t);
        &self.values[idx]
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[V] {
        &self.values
    }

    /// Pieces `(start, end, value)` clipped to `[0, horizon]`.
    pub fn pieces(&self, horizon: f64) -> Vec<(f64, f64, &V)> {
        let mut out = Vec::with_capacity(self.values.len());
        let mut start = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            let end = self.breaks.get(i).copied().unwrap_or(horizon).min(horizon);
            if end > start {
                out.push((start, end, v));
            }
            start = start.max(end);
        }
        out
    }
}

impl PiecewiseConstant<f64> {
    /// Exact `∫₀ᵗ`.
    pub fn integral_to(&self, t: f64) -> f64 {
        let mut total = 0.0;
        let mut start = 0.0;
        for (i, v) in self.values.iter().enumerate() {
            let end = self.breaks.get(i).copied().unwrap_or(f64::INFINITY).min(t);
            if end > start {
                total += v * (end - start);
            }
            start = start.max(end);
            if start >= t {
                break;
            }
        }
        total
    }

    pub fn sup(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}

/// The growth datum `μ` of `sup { |y| : y ∈ F(t, x) } ≤ μ(t)(1 + |x|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrowthProfile {
    pub mu: PiecewiseConstant<f64>,
    /// `‖μ‖₁ = ∫₀ᵀ μ`.
    pub mu_total: f64,
}

impl GrowthProfile {
    pub fn new(mu: PiecewiseConstant<f64>, horizon: f64) -> Result<Self> {
        if mu.values().iter().any(|m| !(*m >= 0.0) || !m.is_finite()) {
            return Err(Error::InvalidMap("growth values must be finite and nonnegative".into()));
        }
        let mu_total = mu.integral_to(horizon);
        Ok(GrowthProfile { mu, mu_total })
    }

    pub fn at(&self, t: f64) -> f64 {
        *self.mu.at(t)
    }

    pub fn integral_to(&self, t: f64) -> f64 {
        self.mu.integral_to(t)
    }

    /// `‖μ‖_∞`.
    pub fn sup(&self) -> f64 {
        self.mu.sup()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    LinearBall { a: Matrix, b: PiecewiseConstant<Vector>, rho: PiecewiseConstant<f64> },
    AffineHull { pairs: Vec<(Matrix, Vector)> },
    Relay { k: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Min,
    Max,
}

/// `+1` or `-1`: which side of the half-space filter, and whether the
/// homotopy uses `+W_V` or `-W_V`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    pub fn from_i64(s: i64) -> Result<Self> {
        match s {
            1 => Ok(Sign::Plus),
            -1 => Ok(Sign::Minus),
            other => Err(Error::Config(format!("sign must be +1 or -1, got {other}"))),
        }
    }

    /// Extremal mode that selects the element most favourable to the filter.
    fn mode(self) -> Mode {
        match self {
            Sign::Plus => Mode::Max,
            Sign::Minus => Mode::Min,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiMap {
    dim: usize,
    horizon: f64,
    family: Family,
    growth: GrowthProfile,
    /// Evaluate `-F(T - t, x)` instead of `F(t, x)`.
    reversed: bool,
}

impl MultiMap {
    pub fn new(dim: usize, horizon: f64, family: Family) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidMap("dimension must be >= 1".into()));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidMap(format!("horizon {horizon} must be positive and finite")));
        }
        let check_matrix = |a: &Matrix| -> Result<()> {
            if a.nrows() != dim || a.ncols() != dim {
                return Err(Error::InvalidMap(format!("matrix is {}x{}, expected {dim}x{dim}", a.nrows(), a.ncols())));
            }
            if a.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidMap("matrix has non-finite entries".into()));
            }
            Ok(())
        };
        match &family {
            Family::LinearBall { a, b, rho } => {
                check_matrix(a)?;
                for v in b.values() {
                    if v.len() != dim || v.iter().any(|c| !c.is_finite()) {
                        return Err(Error::InvalidMap("offset b(t) has wrong length or non-finite entries".into()));
                    }
                }
                if rho.values().iter().any(|r| !(*r >= 0.0) || !r.is_finite()) {
                    return Err(Error::InvalidMap("radius rho(t) must be finite and nonnegative".into()));
                }
            }
            Family::AffineHull { pairs } => {
                if pairs.is_empty() {
                    return Err(Error::InvalidMap("affine hull needs at least one pair".into()));
                }
                for (a, b) in pairs {
                    check_matrix(a)?;
                    if b.len() != dim || b.iter().any(|c| !c.is_finite()) {
                        return Err(Error::InvalidMap("affine offset has wrong length".into()));
                    }
                }
            }
            Family::Relay { k } => {
                if dim != 1 {
                    return Err(Error::InvalidMap("relay family requires N = 1".into()));
                }
                if !(*k > 0.0) || !k.is_finite() {
                    return Err(Error::InvalidMap(format!("relay gain {k} must be positive")));
                }
            }
        }
        let growth = derive_growth(dim, horizon, &family)?;
        Ok(MultiMap { dim, horizon, family, growth, reversed: false })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn growth(&self) -> &GrowthProfile {
        &self.growth
    }

    pub fn is_reversed(&self) -> bool {
        self.reversed
    }

    pub fn is_relay(&self) -> bool {
        matches!(self.family, Family::Relay { .. })
    }

    /// The map `(s, y) ↦ -F(T - s, y)` whose solutions are the time reversals
    /// of solutions of `F`. The growth profile is mirrored accordingly.
    pub fn time_reversed(&self) -> MultiMap {
        let mut out = self.clone();
        out.reversed = !self.reversed;
        out.growth = mirror_growth(&self.growth, self.horizon);
        out
    }

    /// Times at which the map's data jumps.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut out: Vec<f64> = match &self.family {
            Family::LinearBall { b, rho, .. } => b.breaks().iter().chain(rho.breaks()).copied().collect(),
            _ => Vec::new(),
        };
        if self.reversed {
            out.iter_mut().for_each(|t| *t = self.horizon - *t);
        }
        out.retain(|t| *t > 0.0 && *t < self.horizon);
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    /// The set `F(t, x)`.
    pub fn value(&self, t: f64, x: &Vector) -> Result<ConvexSet> {
        if !(0.0..=self.horizon).contains(&t) {
            return Err(Error::Domain { t, horizon: self.horizon });
        }
        if x.len() != self.dim {
            return Err(Error::Dimension { expected: self.dim, found: x.len() });
        }
        let t_eval = if self.reversed { self.horizon - t } else { t };
        let set = match &self.family {
            Family::LinearBall { a, b, rho } => {
                let center = a * x + b.at(t_eval);
                let radius = *rho.at(t_eval);
                if radius == 0.0 {
                    ConvexSet::Singleton { point: center }
                } else {
                    ConvexSet::Ball { center, radius }
                }
            }
            Family::AffineHull { pairs } => {
                let vertices: Vec<Vector> = pairs.iter().map(|(a, b)| a * x + b).collect();
                if vertices.len() == 1 {
                    ConvexSet::Singleton { point: vertices.into_iter().next().expect("one vertex") }
                } else {
                    ConvexSet::Polytope { vertices }
                }
            }
            Family::Relay { k } => {
                if x[0] == 0.0 {
                    ConvexSet::Polytope { vertices: vec![Vector::from_element(1, -k), Vector::from_element(1, *k)] }
                } else {
                    ConvexSet::Singleton { point: Vector::from_element(1, -k * x[0].signum()) }
                }
            }
        };
        if set.max_norm().is_finite() {
            Ok(if self.reversed { set.negated() } else { set })
        } else {
            Err(Error::Divergence { step: 0, t })
        }
    }

    /// The element of `F(t, x)` minimising or maximising `⟨direction, y⟩`.
    pub fn select_extremal(&self, t: f64, x: &Vector, direction: &Vector, mode: Mode) -> Result<Vector> {
        let set = self.value(t, x)?;
        Ok(match mode {
            Mode::Max => set.extreme_point(direction),
            Mode::Min => set.extreme_point(&-direction),
        })
    }

    /// Selection of the filtered map `F_V`.
    ///
    /// Inside `|x| ≤ R` the filter is inactive and the extremal element is
    /// returned unconditionally. Outside, the extremal element most favourable
    /// to the constraint `sign·⟨∇V(x), y⟩ ≥ 0` is returned if it satisfies it;
    /// otherwise `F_V(t, x)` is empty and `None` is returned.
    pub fn select_filtered(
        &self,
        potential: &Potential,
        t: f64,
        x: &Vector,
        sign: Sign,
        radius: f64,
    ) -> Result<Option<Vector>> {
        if !(radius > 0.0) {
            return Err(Error::Config(format!("filter radius {radius} must be positive")));
        }
        let grad = potential.grad(x);
        let y = self.select_extremal(t, x, &grad, sign.mode())?;
        if x.norm() <= radius {
            return Ok(Some(y));
        }
        let ip = grad.dot(&y);
        if sign.value() * ip >= -FILTER_MARGIN {
            Ok(Some(y))
        } else {
            Ok(None)
        }
    }
}

/// A valid growth profile for each built-in family.
fn derive_growth(dim: usize, horizon: f64, family: &Family) -> Result<GrowthProfile> {
    let mu = match family {
        Family::LinearBall { a, b, rho } => {
            let a_norm = operator_norm(a);
            let mut breaks: Vec<f64> = b.breaks().iter().chain(rho.breaks()).copied().collect();
            breaks.sort_by(f64::total_cmp);
            breaks.dedup();
            // One value per merged piece; evaluate on each piece's left end.
            let mut starts = vec![0.0];
            starts.extend(breaks.iter().copied());
            let values: Vec<f64> = starts.iter().map(|&t| a_norm.max(b.at(t).norm() + rho.at(t))).collect();
            PiecewiseConstant::new(breaks, values)?
        }
        Family::AffineHull { pairs } => {
            let m = pairs.iter().map(|(a, b)| operator_norm(a).max(b.norm())).fold(0.0, f64::max);
            PiecewiseConstant::constant(m)
        }
        Family::Relay { k } => PiecewiseConstant::constant(*k),
    };
    debug_assert!(dim >= 1);
    GrowthProfile::new(mu, horizon)
}

fn mirror_growth(g: &GrowthProfile, horizon: f64) -> GrowthProfile {
    let pieces = g.mu.pieces(horizon);
    let mut breaks: Vec<f64> = pieces.iter().skip(1).map(|(s, _, _)| horizon - s).collect();
    breaks.reverse();
    let values: Vec<f64> = pieces.iter().rev().map(|(_, _, v)| **v).collect();
    let mu = PiecewiseConstant { breaks, values };
    GrowthProfile { mu, mu_total: g.mu_total }
}

/// The homotopy `G(t, x, λ) = λ·(±W_V(x)) + (1 - λ)·F_V(t, x)` realised on
/// the filtered selection.
#[derive(Debug, Clone, Copy)]
pub struct HomotopyField<'a> {
    pub map: &'a MultiMap,
    pub potential: &'a Potential,
    pub sign: Sign,
    pub lambda: f64,
}

impl HomotopyField<'_> {
    /// `None` propagates emptiness of `F_V(t, x)`. At `λ = 1` the value is the
    /// pure field and the filter is not consulted.
    pub fn value(&self, t: f64, x: &Vector, radius: f64) -> Result<Option<Vector>> {
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::Config(format!("lambda {} outside [0, 1]", self.lambda)));
        }
        let field = self.potential.field_wv(x) * self.sign.value();
        if self.lambda == 1.0 {
            return Ok(Some(field));
        }
        let Some(sel) = self.map.select_filtered(self.potential, t, x, self.sign, radius)? else {
            return Ok(None);
        };
        Ok(Some(field * self.lambda + sel * (1.0 - self.lambda)))
    }
}
