//! Potentials `V`, the truncated gradient field `W_V`, and sampled
//! verification of the guiding, monotonicity and coercivity hypotheses.
//!
//! Verification is grid based: a [`GuidingCertificate`] is only as strong as
//! the resolution it records and says nothing about `|x| > R_max`.

use serde::Serialize;

use crate::linalg::symmetric_eigen;
use crate::multimap::MultiMap;
use crate::{sampling, Error, Matrix, Result, Vector};

/// Below this, `∇V(x)` counts as vanishing.
pub const GRADIENT_FLOOR: f64 = 1e-8;
/// Weak inequalities accept `≥ -STRICTNESS_MARGIN`; strict ones require
/// `≤ -STRICTNESS_MARGIN`.
pub const STRICTNESS_MARGIN: f64 = 1e-10;
/// Added to the sampled maximum of `V` on `B̄(R)` to obtain the level `r`.
pub const LEVEL_MARGIN: f64 = 1.0;
/// Added to the exact level radius by [`Potential::sublevel_ball_radius`].
pub const SUBLEVEL_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialFamily {
    /// `V(x) = φ(|x|²/2)` with `φ(u) = Σ coeffs[i]·u^i`.
    Radial { coeffs: Vec<f64> },
    /// `V(x) = ½⟨x, A x⟩` with `A` symmetric.
    Quadratic { a: Matrix },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    dim: usize,
    family: PotentialFamily,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    StrictNegative,
    WeakPositive,
    WeakNegative,
    None,
}

/// Smallest tested radius from which each guiding inequality (together with
/// nonsingularity) held on every sample up to `R_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassRadii {
    pub strict_negative: Option<f64>,
    pub weak_positive: Option<f64>,
    pub weak_negative: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleResolution {
    pub radial_step: f64,
    pub directions: usize,
    pub time_steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GuidingCertificate {
    /// Radius `R` for the reported classification (`R_max` when none holds).
    pub radius: f64,
    /// Level `r > max { V(x) : |x| ≤ R }`.
    pub level: f64,
    pub classification: Classification,
    pub class_radii: ClassRadii,
    pub sample_resolution: SampleResolution,
    pub r_max: f64,
}

impl GuidingCertificate {
    pub fn weak_positive(&self) -> bool {
        self.class_radii.weak_positive.is_some()
    }

    pub fn weak_negative(&self) -> bool {
        self.class_radii.weak_negative.is_some() || self.class_radii.strict_negative.is_some()
    }

    pub fn strict_negative(&self) -> bool {
        self.class_radii.strict_negative.is_some()
    }
}

/// Sampling grid for [`Potential::classify_guiding`]: spheres of radius
/// `R_max·j/radial_steps`, `directions` unit vectors and `time_steps + 1`
/// uniform times.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GuidingGrid {
    pub r_max: f64,
    pub radial_steps: usize,
    pub directions: usize,
    pub time_steps: usize,
    pub seed: u64,
}

impl Default for GuidingGrid {
    fn default() -> Self {
        GuidingGrid { r_max: 4.0, radial_steps: 64, directions: 32, time_steps: 8, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonotoneReport {
    pub pass: bool,
    /// `(x, y)` with `|x| ≤ |y|` and `V(x) > V(y)`.
    pub witness: Option<(Vec<f64>, Vec<f64>)>,
}

impl Potential {
    pub fn radial(dim: usize, coeffs: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidPotential("dimension must be >= 1".into()));
        }
        if coeffs.is_empty() || coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPotential("radial profile needs finite coefficients".into()));
        }
        Ok(Potential { dim, family: PotentialFamily::Radial { coeffs } })
    }

    pub fn quadratic(a: Matrix) -> Result<Self> {
        let dim = a.nrows();
        if dim == 0 || a.ncols() != dim {
            return Err(Error::InvalidPotential("quadratic form must be square".into()));
        }
        if a.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidPotential("quadratic form has non-finite entries".into()));
        }
        if (&a - a.transpose()).amax() > 1e-12 * a.amax().max(1.0) {
            return Err(Error::InvalidPotential("quadratic form must be symmetric".into()));
        }
        Ok(Potential { dim, family: PotentialFamily::Quadratic { a } })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn family(&self) -> &PotentialFamily {
        &self.family
    }

    pub fn eval(&self, x: &Vector) -> f64 {
        match &self.family {
            PotentialFamily::Radial { coeffs } => poly(coeffs, 0.5 * x.norm_squared()),
            PotentialFamily::Quadratic { a } => 0.5 * x.dot(&(a * x)),
        }
    }

    pub fn grad(&self, x: &Vector) -> Vector {
        match &self.family {
            PotentialFamily::Radial { coeffs } => x * poly_deriv(coeffs, 0.5 * x.norm_squared()),
            PotentialFamily::Quadratic { a } => a * x,
        }
    }

    /// `W_V(x)`: `∇V(x)` clipped to the closed unit ball.
    pub fn field_wv(&self, x: &Vector) -> Vector {
        let g = self.grad(x);
        let n = g.norm();
        if n <= 1.0 {
            g
        } else {
            g / n
        }
    }

    /// Finds, for each guiding inequality, the smallest grid radius from which
    /// it and nonsingularity hold on all samples up to `R_max`, and reports
    /// the strongest one (strict negative, then weak positive, then weak
    /// negative).
    pub fn classify_guiding(&self, map: &MultiMap, grid: &GuidingGrid) -> Result<GuidingCertificate> {
        if !(grid.r_max > 0.0) || !grid.r_max.is_finite() {
            return Err(Error::Config(format!("R_max = {} must be positive", grid.r_max)));
        }
        if grid.radial_steps == 0 || grid.directions == 0 || grid.time_steps == 0 {
            return Err(Error::Config("guiding grid needs at least one radius, direction and time step".into()));
        }
        if map.dim() != self.dim {
            return Err(Error::Dimension { expected: self.dim, found: map.dim() });
        }
        let dirs = sampling::unit_directions(self.dim, grid.directions, grid.seed);
        let horizon = map.horizon();
        let times: Vec<f64> = (0..=grid.time_steps)
            .map(|k| if k == grid.time_steps { horizon } else { horizon * k as f64 / grid.time_steps as f64 })
            .collect();
        let step = grid.r_max / grid.radial_steps as f64;

        // Per shell j = 1..=radial_steps: do all samples satisfy each inequality?
        let mut shells = Vec::with_capacity(grid.radial_steps);
        for j in 1..=grid.radial_steps {
            let radius = if j == grid.radial_steps { grid.r_max } else { step * j as f64 };
            let mut strict = true;
            let mut wpos = true;
            let mut wneg = true;
            for e in &dirs {
                let x = e * radius;
                let g = self.grad(&x);
                if g.norm() <= GRADIENT_FLOOR {
                    strict = false;
                    wpos = false;
                    wneg = false;
                    break;
                }
                for &t in &times {
                    let (lo, hi) = map.value(t, &x)?.inner_product_range(&g);
                    strict &= hi <= -STRICTNESS_MARGIN;
                    wpos &= hi >= -STRICTNESS_MARGIN;
                    wneg &= lo <= STRICTNESS_MARGIN;
                }
            }
            shells.push((radius, strict, wpos, wneg));
        }
        let smallest = |pick: fn(&(f64, bool, bool, bool)) -> bool| -> Option<f64> {
            let mut found = None;
            for shell in shells.iter().rev() {
                if pick(shell) {
                    found = Some(shell.0);
                } else {
                    break;
                }
            }
            found
        };
        let class_radii = ClassRadii {
            strict_negative: smallest(|s| s.1),
            weak_positive: smallest(|s| s.2),
            weak_negative: smallest(|s| s.3),
        };
        let (classification, radius) = if let Some(r) = class_radii.strict_negative {
            (Classification::StrictNegative, r)
        } else if let Some(r) = class_radii.weak_positive {
            (Classification::WeakPositive, r)
        } else if let Some(r) = class_radii.weak_negative {
            (Classification::WeakNegative, r)
        } else {
            (Classification::None, grid.r_max)
        };

        // Sampled max of V on the closed ball B̄(R), origin included.
        let mut vmax = self.eval(&Vector::zeros(self.dim));
        for &(shell_radius, ..) in &shells {
            if shell_radius > radius {
                break;
            }
            for e in &dirs {
                vmax = vmax.max(self.eval(&(e * shell_radius)));
            }
        }
        Ok(GuidingCertificate {
            radius,
            level: vmax + LEVEL_MARGIN,
            classification,
            class_radii,
            sample_resolution: SampleResolution {
                radial_step: step,
                directions: dirs.len(),
                time_steps: grid.time_steps,
            },
            r_max: grid.r_max,
        })
    }

    /// Checks `|x| ≤ |y| ⇒ V(x) ≤ V(y)`.
    ///
    /// Radial profiles are checked through `φ' ≥ 0` on `[0, R_max²/2]` (grid
    /// plus bracketed minima of `φ'`), quadratic forms through `A = aI`,
    /// `a ≥ 0`. Random pairs from the ball `B̄(R_max)` are a secondary check.
    pub fn check_monotone(&self, samples: usize, seed: u64, r_max: f64) -> MonotoneReport {
        let primary = match &self.family {
            PotentialFamily::Radial { coeffs } => radial_monotone_witness(coeffs, r_max),
            PotentialFamily::Quadratic { a } => quadratic_monotone_witness(a),
        };
        if let Some((x, y)) = primary {
            return MonotoneReport { pass: false, witness: Some((x.as_slice().to_vec(), y.as_slice().to_vec())) };
        }
        let mut rng = sampling::rng(seed);
        for _ in 0..samples {
            let mut x = sampling::ball_point(self.dim, &mut rng) * r_max;
            let mut y = sampling::ball_point(self.dim, &mut rng) * r_max;
            if x.norm() > y.norm() {
                std::mem::swap(&mut x, &mut y);
            }
            let (vx, vy) = (self.eval(&x), self.eval(&y));
            if vx > vy + 1e-12 * (1.0 + vx.abs().max(vy.abs())) {
                return MonotoneReport { pass: false, witness: Some((x.as_slice().to_vec(), y.as_slice().to_vec())) };
            }
        }
        MonotoneReport { pass: true, witness: None }
    }

    /// `V(x) → ∞` as `|x| → ∞`.
    pub fn check_coercive(&self) -> bool {
        match &self.family {
            PotentialFamily::Radial { coeffs } => match leading(coeffs) {
                Some((deg, c)) => deg >= 1 && c > 0.0,
                None => false,
            },
            PotentialFamily::Quadratic { a } => symmetric_eigen(a).0.min() > 1e-10,
        }
    }

    /// Exact distance from the origin to the level set `{V = r}` along the
    /// unit direction `e` (outermost crossing).
    pub fn level_radius(&self, e: &Vector, r: f64) -> Result<f64> {
        if !self.check_coercive() {
            return Err(Error::NotCoercive);
        }
        if r <= self.eval(&Vector::zeros(self.dim)) {
            return Err(Error::Config(format!("level {r} must exceed V(0)")));
        }
        match &self.family {
            PotentialFamily::Radial { coeffs } => Ok((2.0 * largest_root(coeffs, r)).sqrt()),
            PotentialFamily::Quadratic { a } => {
                let q = e.dot(&(a * e)) / e.norm_squared();
                Ok((2.0 * r / q).sqrt() / e.norm())
            }
        }
    }

    /// A radius `ρ*` with `V(x) > r` whenever `|x| > ρ*`: a bounding ball for
    /// the sublevel set `V⁻¹((-∞, r))`.
    pub fn sublevel_ball_radius(&self, r: f64) -> Result<f64> {
        if !self.check_coercive() {
            return Err(Error::NotCoercive);
        }
        if r <= self.eval(&Vector::zeros(self.dim)) {
            return Err(Error::Config(format!("level {r} must exceed V(0)")));
        }
        match &self.family {
            PotentialFamily::Radial { coeffs } => Ok((2.0 * largest_root(coeffs, r)).sqrt() + SUBLEVEL_MARGIN),
            PotentialFamily::Quadratic { a } => {
                let lambda_min = symmetric_eigen(a).0.min();
                Ok((2.0 * r / lambda_min).sqrt())
            }
        }
    }
}

fn poly(coeffs: &[f64], u: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * u + c)
}

fn poly_deriv(coeffs: &[f64], u: f64) -> f64 {
    coeffs.iter().enumerate().skip(1).rev().fold(0.0, |acc, (i, c)| acc * u + i as f64 * c)
}

fn poly_second_deriv(coeffs: &[f64], u: f64) -> f64 {
    coeffs.iter().enumerate().skip(2).rev().fold(0.0, |acc, (i, c)| acc * u + (i * (i - 1)) as f64 * c)
}

fn leading(coeffs: &[f64]) -> Option<(usize, f64)> {
    coeffs.iter().enumerate().rev().find(|(_, c)| **c != 0.0).map(|(i, c)| (i, *c))
}

/// Largest root of `φ(u) = r` on `u ≥ 0`, given `φ(0) < r` and a positive
/// leading coefficient.
fn largest_root(coeffs: &[f64], r: f64) -> f64 {
    let (deg, lead) = leading(coeffs).expect("coercive profile");
    let mut shifted = coeffs[..=deg].to_vec();
    shifted[0] -= r;
    let cauchy = 1.0 + shifted[..deg].iter().map(|c| (c / lead).abs()).fold(0.0, f64::max);
    let p = |u: f64| poly(&shifted, u);
    const SCAN: usize = 10_000;
    let mut hi = cauchy;
    let mut lo = 0.0;
    for k in (0..SCAN).rev() {
        let u = cauchy * k as f64 / SCAN as f64;
        if p(u) <= 0.0 {
            lo = u;
            break;
        }
        hi = u;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if p(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

const MONOTONE_FLOOR: f64 = -1e-12;
const MONOTONE_GRID: usize = 4096;

fn radial_monotone_witness(coeffs: &[f64], r_max: f64) -> Option<(Vector, Vector)> {
    let u_max = 0.5 * r_max * r_max;
    let h = u_max / MONOTONE_GRID as f64;
    let mut candidates: Vec<f64> = (0..=MONOTONE_GRID).map(|k| h * k as f64).collect();
    // Interior minima of φ': φ'' crosses from negative to positive.
    for k in 0..MONOTONE_GRID {
        let (a, b) = (h * k as f64, h * (k + 1) as f64);
        if poly_second_deriv(coeffs, a) < 0.0 && poly_second_deriv(coeffs, b) > 0.0 {
            let (mut lo, mut hi) = (a, b);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if poly_second_deriv(coeffs, mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            candidates.push(0.5 * (lo + hi));
        }
    }
    let u = candidates
        .into_iter()
        .filter(|&u| poly_deriv(coeffs, u) < MONOTONE_FLOOR)
        .min_by(|a, b| poly_deriv(coeffs, *a).total_cmp(&poly_deriv(coeffs, *b)))?;
    // Shrink the step until φ actually decreases.
    let mut delta = h.max(1e-3);
    while delta > 1e-14 {
        if poly(coeffs, u + delta) < poly(coeffs, u) {
            let x = Vector::from_element(1, (2.0 * u).sqrt());
            let y = Vector::from_element(1, (2.0 * (u + delta)).sqrt());
            return Some((x, y));
        }
        delta *= 0.5;
    }
    None
}

fn quadratic_monotone_witness(a: &Matrix) -> Option<(Vector, Vector)> {
    let n = a.nrows();
    let scale = a[(0, 0)];
    let scalar = (0..n).all(|i| (0..n).all(|j| (a[(i, j)] - if i == j { scale } else { 0.0 }).abs() <= 1e-12));
    if scalar && scale >= -1e-12 {
        return None;
    }
    if scalar {
        // V decreases radially: origin against a unit vector.
        let mut e = Vector::zeros(n);
        e[0] = 1.0;
        return Some((Vector::zeros(n), e));
    }
    // Equal norms, different values: largest against smallest eigenvector.
    let (_, vecs) = symmetric_eigen(a);
    Some((vecs.column(n - 1).into_owned(), vecs.column(0).into_owned()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::multimap::{Family, PiecewiseConstant};
    use approx::assert_relative_eq;

    fn v(c: &[f64]) -> Vector {
        Vector::from_row_slice(c)
    }

    fn linear_ball(dim: usize, a: Matrix, rho: f64) -> MultiMap {
        MultiMap::new(
            dim,
            1.0,
            Family::LinearBall {
                a,
                b: PiecewiseConstant::constant(Vector::zeros(dim)),
                rho: PiecewiseConstant::constant(rho),
            },
        )
        .unwrap()
    }

    fn central_diff(p: &Potential, x: &Vector) -> Vector {
        let h = 1e-6;
        Vector::from_fn(x.len(), |i, _| {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[i] += h;
            xm[i] -= h;
            (p.eval(&xp) - p.eval(&xm)) / (2.0 * h)
        })
    }

    #[test]
    fn eval_and_grad_examples() {
        let half = Potential::radial(2, vec![0.0, 1.0]).unwrap();
        assert_eq!(half.eval(&v(&[3.0, 4.0])), 12.5);
        assert_eq!(half.grad(&v(&[3.0, 4.0])), v(&[3.0, 4.0]));

        let q = Potential::quadratic(Matrix::identity(2, 2) * 2.0).unwrap();
        assert_eq!(q.eval(&v(&[1.0, 0.0])), 1.0);
        assert_eq!(q.grad(&v(&[1.0, 0.0])), v(&[2.0, 0.0]));

        let quartic = Potential::radial(2, vec![0.0, 0.0, 1.0]).unwrap();
        let x = v(&[1.0, 1.0]);
        assert_eq!(quartic.eval(&x), 1.0);
        assert_eq!(quartic.grad(&x), v(&[2.0, 2.0]));
        assert!((central_diff(&quartic, &x) - v(&[2.0, 2.0])).norm() < 1e-6);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let pots = [
            Potential::radial(3, vec![1.0, -0.5, 0.3, 0.05]).unwrap(),
            Potential::quadratic(Matrix::from_row_slice(3, 3, &[2.0, 0.5, 0.0, 0.5, 1.0, -0.3, 0.0, -0.3, 4.0]))
                .unwrap(),
        ];
        let mut rng = sampling::rng(5);
        for p in &pots {
            for _ in 0..100 {
                let x = sampling::ball_point(3, &mut rng) * 3.0;
                let g = p.grad(&x);
                let fd = central_diff(p, &x);
                assert!((g - fd).norm() <= 1e-6 * (1.0 + p.grad(&x).norm()), "x = {x:?}");
            }
        }
    }

    #[test]
    fn field_examples_and_bounds() {
        let half = Potential::radial(2, vec![0.0, 1.0]).unwrap();
        assert_eq!(half.field_wv(&v(&[0.5, 0.0])), v(&[0.5, 0.0]));
        assert_relative_eq!(half.field_wv(&v(&[3.0, 4.0])), v(&[0.6, 0.8]), epsilon = 1e-15);
        assert_eq!(half.field_wv(&v(&[0.0, 0.0])), v(&[0.0, 0.0]));

        let p = Potential::radial(2, vec![0.0, 2.0, 0.5]).unwrap();
        let mut rng = sampling::rng(9);
        for _ in 0..500 {
            let x = sampling::ball_point(2, &mut rng) * 5.0;
            let w = p.field_wv(&x);
            let g = p.grad(&x);
            assert!(w.norm() <= 1.0 + 1e-15);
            if g.norm() <= 1.0 {
                assert_eq!(w, g);
            }
            // Nonnegative multiple of the gradient.
            assert!(w.dot(&g) >= 0.0);
            assert!((w.norm() * g.norm() - w.dot(&g)).abs() <= 1e-9 * (1.0 + g.norm()));
        }
    }

    #[test]
    fn classification_examples() {
        let half = Potential::radial(2, vec![0.0, 1.0]).unwrap();
        let grid = GuidingGrid::default();

        // ⟨x, -x + u⟩⁺ = -|x|² + |x|/2 < 0 for |x| > 1/2.
        let cert = half.classify_guiding(&linear_ball(2, -Matrix::identity(2, 2), 0.5), &grid).unwrap();
        assert_eq!(cert.classification, Classification::StrictNegative);
        assert!(cert.radius <= 1.0 && cert.radius > 0.5);
        let analytic = |r: f64| -r * r + 0.5 * r;
        assert!(analytic(cert.radius) < 0.0);
        assert!(cert.level > 0.5 * cert.radius * cert.radius);
        assert!(cert.weak_negative());

        let ball = half.classify_guiding(&linear_ball(2, Matrix::zeros(2, 2), 1.0), &grid).unwrap();
        assert_eq!(ball.classification, Classification::WeakPositive);
        assert!(ball.weak_positive() && ball.weak_negative() && !ball.strict_negative());

        let outward = half.classify_guiding(&linear_ball(2, Matrix::identity(2, 2), 0.0), &grid).unwrap();
        assert_eq!(outward.classification, Classification::WeakPositive);
        assert!(!outward.weak_negative());
    }

    #[test]
    fn classification_rejects_degenerate_grid() {
        let half = Potential::radial(2, vec![0.0, 1.0]).unwrap();
        let f = linear_ball(2, -Matrix::identity(2, 2), 0.5);
        for grid in [
            GuidingGrid { radial_steps: 0, ..Default::default() },
            GuidingGrid { r_max: 0.0, ..Default::default() },
            GuidingGrid { time_steps: 0, ..Default::default() },
        ] {
            assert!(matches!(half.classify_guiding(&f, &grid), Err(Error::Config(_))));
        }
    }

    #[test]
    fn nothing_holds_for_rotating_field() {
        // V = ½|x|², F(x) = Rx + e₁·something that makes the sign of ⟨x, y⟩ vary.
        let half = Potential::radial(2, vec![0.0, 1.0]).unwrap();
        let f = MultiMap::new(
            2,
            1.0,
            Family::LinearBall {
                a: Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]),
                b: PiecewiseConstant::constant(Vector::zeros(2)),
                rho: PiecewiseConstant::constant(0.0),
            },
        )
        .unwrap();
        let cert = half.classify_guiding(&f, &GuidingGrid::default()).unwrap();
        assert_eq!(cert.classification, Classification::None);
        assert_eq!(cert.radius, 4.0);
    }

    #[test]
    fn strict_implies_weak_on_samples() {
        let half = Potential::radial(2, vec![0.0, 1.0]).unwrap();
        let f = linear_ball(2, -Matrix::identity(2, 2) * 2.0, 1.0);
        let cert = half.classify_guiding(&f, &GuidingGrid::default()).unwrap();
        let again = half.classify_guiding(&f, &GuidingGrid::default()).unwrap();
        assert_eq!(cert, again);
        let strict = cert.class_radii.strict_negative.unwrap();
        let weak = cert.class_radii.weak_negative.unwrap();
        assert!(weak <= strict);
    }

    #[test]
    fn monotone_examples() {
        let half = Potential::radial(2, vec![0.0, 1.0]).unwrap();
        assert!(half.check_monotone(200, 1, 10.0).pass);

        let diag = Potential::quadratic(Matrix::from_diagonal(&v(&[1.0, 2.0]))).unwrap();
        let report = diag.check_monotone(200, 1, 10.0);
        assert!(!report.pass);
        let (x, y) = report.witness.unwrap();
        let (x, y) = (Vector::from_vec(x), Vector::from_vec(y));
        assert_relative_eq!(x.norm(), y.norm(), epsilon = 1e-12);
        assert!(diag.eval(&x) > diag.eval(&y));
        let mut vals = [diag.eval(&x), diag.eval(&y)];
        vals.sort_by(f64::total_cmp);
        assert_relative_eq!(vals[0], 0.5, epsilon = 1e-12);
        assert_relative_eq!(vals[1], 1.0, epsilon = 1e-12);

        let dec = Potential::radial(1, vec![0.0, -1.0]).unwrap();
        let report = dec.check_monotone(10, 1, 10.0);
        assert!(!report.pass);
        let (x, y) = report.witness.unwrap();
        assert!(x[0].abs() <= y[0].abs());
        assert!(dec.eval(&Vector::from_vec(x)) > dec.eval(&Vector::from_vec(y)));
    }

    #[test]
    fn monotone_catches_interior_dip() {
        // φ(u) = u³ - 3u² + 3.1u has φ'(u) = 3(u-1)² + 0.1 > 0: monotone.
        let ok = Potential::radial(1, vec![0.0, 3.1, -3.0, 1.0]).unwrap();
        assert!(ok.check_monotone(100, 2, 3.0).pass);
        // φ(u) = u³ - 3u² + 2.9u dips slightly around u = 1.
        let dip = Potential::radial(1, vec![0.0, 2.9, -3.0, 1.0]).unwrap();
        assert!(!dip.check_monotone(100, 2, 3.0).pass);
    }

    #[test]
    fn coercive_examples() {
        assert!(Potential::radial(2, vec![0.0, 1.0]).unwrap().check_coercive());
        assert!(!Potential::quadratic(Matrix::from_diagonal(&v(&[1.0, -1.0]))).unwrap().check_coercive());
        let p = Potential::radial(2, vec![0.0, -5.0, 1.0]).unwrap();
        assert!(p.check_coercive());
        assert!(p.eval(&v(&[1e3, 0.0])) > 1e10);
        assert!(!Potential::radial(2, vec![3.0]).unwrap().check_coercive());
    }

    #[test]
    fn sublevel_radius_examples() {
        let half = Potential::radial(2, vec![0.0, 1.0]).unwrap();
        let r2 = half.sublevel_ball_radius(2.0).unwrap();
        assert_relative_eq!(half.eval(&v(&[2.0, 0.0])), 2.0);
        assert!((r2 - 2.0).abs() <= 2e-6);
        let r05 = half.sublevel_ball_radius(0.5).unwrap();
        assert!((r05 - 1.0).abs() <= 2e-6);
        let q = Potential::quadratic(Matrix::identity(2, 2) * 2.0).unwrap();
        assert_relative_eq!(q.sublevel_ball_radius(1.0).unwrap(), 1.0, epsilon = 1e-12);
        assert_eq!(q.eval(&v(&[1.0, 0.0])), 1.0);

        let flat = Potential::quadratic(Matrix::from_diagonal(&v(&[1.0, -1.0]))).unwrap();
        assert_eq!(flat.sublevel_ball_radius(1.0), Err(Error::NotCoercive));
        assert!(half.sublevel_ball_radius(-1.0).is_err());
    }

    #[test]
    fn sublevel_radius_bounds_the_sublevel_set() {
        let pots = [
            Potential::radial(3, vec![0.0, -5.0, 1.0]).unwrap(),
            Potential::quadratic(Matrix::from_diagonal(&v(&[0.5, 2.0, 3.0]))).unwrap(),
        ];
        let dirs = sampling::unit_directions(3, 100, 4);
        for p in &pots {
            for r in [0.5, 3.0, 40.0] {
                let rho = p.sublevel_ball_radius(r).unwrap();
                for e in &dirs {
                    assert!(p.eval(&(e * (rho + 1e-3))) > r);
                }
            }
        }
    }

    #[test]
    fn monotone_radial_values_depend_only_on_norm() {
        let p = Potential::radial(3, vec![0.2, 1.0, 0.3]).unwrap();
        let dirs = sampling::unit_directions(3, 40, 8);
        for s in [0.1, 1.0, 7.0] {
            let v0 = p.eval(&(&dirs[0] * s));
            for e in &dirs {
                assert_relative_eq!(p.eval(&(e * s)), v0, max_relative = 1e-14);
            }
        }
    }
}
