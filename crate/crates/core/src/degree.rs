//! Brouwer degree `deg(f, D, 0)` of continuous vector fields on boxes and
//! balls in `R^N`, `1 ≤ N ≤ 4`.
//!
//! For `N = 1` the degree is the exact sign formula
//! `(sgn f(b) - sgn f(a)) / 2`.
//!
//! For `N ≥ 2` the boundary `∂D` is triangulated (a uniform lattice on each
//! facet of the box, split into Kuhn simplices; balls use the radial
//! projection of the cube boundary) and refined uniformly until on every
//! simplex some component of `f` keeps one sign at all vertices with a margin,
//! and two consecutive such levels give the same count.
//! The piecewise-linear interpolant of `f` then maps `∂D` into `R^N \ {0}` and
//! its degree is the oriented count of boundary simplices whose image cone
//! contains a fixed generic ray.
//!
//! Sufficiency of the refinement is heuristic. A result is only returned when
//! the criterion is met on every simplex; otherwise the computation reports
//! [`Error::Inconclusive`] instead of guessing.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::linalg::determinant;
use crate::{Error, Matrix, Result, Vector};

pub const MAX_DIM: usize = 4;
/// Boundary values below this norm make the degree undefined.
pub const ZERO_TOL: f64 = 1e-10;
/// Hard cap on the number of boundary simplices at one level.
pub const SIMPLEX_BUDGET: usize = 5_000_000;

/// A continuous field `R^N → R^N`. Evaluation may fail (e.g. a shooting
/// residual whose trajectory diverges).
pub trait VectorField: Sync {
    fn dim(&self) -> usize;
    fn eval(&self, x: &Vector) -> Result<Vector>;
}

/// Wraps a closure as a field.
pub struct FnField<F> {
    pub dim: usize,
    pub f: F,
}

impl<F> VectorField for FnField<F>
where
    F: Fn(&Vector) -> Result<Vector> + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn eval(&self, x: &Vector) -> Result<Vector> {
        (self.f)(x)
    }
}

/// `x ↦ A x + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineField {
    pub a: Matrix,
    pub b: Vector,
}

impl AffineField {
    pub fn identity(dim: usize) -> Self {
        AffineField { a: Matrix::identity(dim, dim), b: Vector::zeros(dim) }
    }

    pub fn negated(&self) -> Self {
        AffineField { a: -&self.a, b: -&self.b }
    }
}

impl VectorField for AffineField {
    fn dim(&self) -> usize {
        self.b.len()
    }

    fn eval(&self, x: &Vector) -> Result<Vector> {
        Ok(&self.a * x + &self.b)
    }
}

/// `coeff · Π x_i^{powers[i]}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Monomial {
    pub coeff: f64,
    pub powers: Vec<u32>,
}

/// Polynomial field with total degree at most 4 per monomial.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialField {
    components: Vec<Vec<Monomial>>,
}

impl PolynomialField {
    pub fn new(components: Vec<Vec<Monomial>>) -> Result<Self> {
        let dim = components.len();
        if dim == 0 {
            return Err(Error::Config("polynomial field needs at least one component".into()));
        }
        for m in components.iter().flatten() {
            if m.powers.len() != dim {
                return Err(Error::Dimension { expected: dim, found: m.powers.len() });
            }
            if m.powers.iter().sum::<u32>() > 4 {
                return Err(Error::Config("polynomial field monomials must have degree <= 4".into()));
            }
            if !m.coeff.is_finite() {
                return Err(Error::Config("non-finite polynomial coefficient".into()));
            }
        }
        Ok(PolynomialField { components })
    }

    pub fn components(&self) -> &[Vec<Monomial>] {
        &self.components
    }
}

impl VectorField for PolynomialField {
    fn dim(&self) -> usize {
        self.components.len()
    }

    fn eval(&self, x: &Vector) -> Result<Vector> {
        Ok(Vector::from_iterator(
            self.components.len(),
            self.components.iter().map(|terms| {
                terms
                    .iter()
                    .map(|m| m.coeff * m.powers.iter().enumerate().map(|(i, p)| x[i].powi(*p as i32)).product::<f64>())
                    .sum::<f64>()
            }),
        ))
    }
}

/// `-f`.
pub struct Negated<'a, F: ?Sized>(pub &'a F);

impl<F: VectorField + ?Sized> VectorField for Negated<'_, F> {
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn eval(&self, x: &Vector) -> Result<Vector> {
        Ok(-self.0.eval(x)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Domain {
    Box { lower: Vector, upper: Vector },
    Ball { center: Vector, radius: f64 },
}

impl Domain {
    pub fn new_box(lower: Vector, upper: Vector) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::Dimension { expected: lower.len(), found: upper.len() });
        }
        if lower.is_empty() || lower.iter().zip(upper.iter()).any(|(l, u)| !(l < u) || !l.is_finite() || !u.is_finite())
        {
            return Err(Error::Config("box needs finite lower < upper in every coordinate".into()));
        }
        Ok(Domain::Box { lower, upper })
    }

    pub fn new_ball(center: Vector, radius: f64) -> Result<Self> {
        if center.is_empty() || !(radius > 0.0) || !radius.is_finite() || center.iter().any(|c| !c.is_finite()) {
            return Err(Error::Config("ball needs a finite center and radius > 0".into()));
        }
        Ok(Domain::Ball { center, radius })
    }

    pub fn dim(&self) -> usize {
        match self {
            Domain::Box { lower, .. } => lower.len(),
            Domain::Ball { center, .. } => center.len(),
        }
    }

    /// Map a point of the cube `[-1, 1]^N` boundary onto `∂D`.
    fn place(&self, q: &Vector) -> Vector {
        match self {
            Domain::Box { lower, upper } => {
                Vector::from_fn(q.len(), |i, _| lower[i] + 0.5 * (q[i] + 1.0) * (upper[i] - lower[i]))
            }
            Domain::Ball { center, radius } => center + q * (*radius / q.norm()),
        }
    }

    /// Lattice points on `∂D` with `per_edge` subdivisions of each cube edge,
    /// in lexicographic order of their lattice coordinates.
    pub fn boundary_points(&self, per_edge: usize) -> Vec<Vector> {
        let k = per_edge.max(1);
        boundary_lattice(self.dim(), k).iter().map(|idx| self.place(&cube_point(idx, k))).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DegreeResult {
    pub value: i64,
    pub refinement_depth: usize,
    pub boundary_min_norm: f64,
}

/// Degree of `f` on `domain`, refining the boundary lattice up to
/// `2^max_depth` cells per edge.
pub fn brouwer_degree<F: VectorField + ?Sized>(f: &F, domain: &Domain, max_depth: usize) -> Result<DegreeResult> {
    let n = domain.dim();
    if f.dim() != n {
        return Err(Error::Dimension { expected: n, found: f.dim() });
    }
    if n == 0 || n > MAX_DIM {
        return Err(Error::Config(format!("degree engine supports 1 <= N <= {MAX_DIM}, got {n}")));
    }
    if n == 1 {
        return degree_1d(f, domain);
    }

    // Vertex values cached by lattice coordinates at the finest scale.
    let finest = 1usize << max_depth;
    let mut cache: HashMap<Vec<usize>, Vector> = HashMap::new();
    let mut last_count = 0;
    let mut previous: Option<i64> = None;
    for depth in 0..=max_depth {
        let k = 1usize << depth;
        let cells_per_facet = k.pow((n - 1) as u32);
        let simplex_count = 2 * n * cells_per_facet * factorial(n - 1);
        if simplex_count > SIMPLEX_BUDGET {
            return Err(Error::Inconclusive { depth: depth.saturating_sub(1), simplices: last_count });
        }
        last_count = simplex_count;
        let scale = finest / k;

        let lattice = boundary_lattice(n, k);
        let missing: Vec<(Vec<usize>, Vector)> = lattice
            .iter()
            .map(|idx| idx.iter().map(|i| i * scale).collect::<Vec<_>>())
            .filter(|key| !cache.contains_key(key))
            .map(|key| {
                let idx: Vec<usize> = key.iter().map(|i| i / scale).collect();
                let p = domain.place(&cube_point(&idx, k));
                (key, p)
            })
            .collect();
        let values: Vec<Result<Vector>> = missing.par_iter().map(|(_, p)| f.eval(p)).collect();
        for ((key, _), val) in missing.into_iter().zip(values) {
            cache.insert(key, val?);
        }

        let lookup = |idx: &[usize]| -> &Vector {
            let key: Vec<usize> = idx.iter().map(|i| i * scale).collect();
            &cache[&key]
        };
        let min_norm = lattice.iter().map(|idx| lookup(idx).norm()).fold(f64::INFINITY, f64::min);
        if !(min_norm >= ZERO_TOL) {
            return Err(Error::DegenerateDomain { min_norm });
        }

        let simplices = boundary_simplices(n, k);
        let resolved = simplices.par_iter().all(|s| {
            let vals: Vec<&Vector> = s.iter().map(|idx| lookup(idx)).collect();
            sign_constant_component(&vals)
        });
        if !resolved {
            previous = None;
            continue;
        }

        let mut level_value = None;
        for dir in ray_directions(n) {
            let counts: Vec<Option<i64>> = simplices
                .par_iter()
                .map(|s| {
                    let vals: Vec<&Vector> = s.iter().map(|idx| lookup(idx)).collect();
                    ray_crossing(&vals, &dir)
                })
                .collect();
            if counts.iter().all(Option::is_some) {
                level_value = Some(counts.into_iter().map(|c| c.expect("checked")).sum());
                break;
            }
        }
        // A value is accepted once two consecutive resolved levels agree.
        match (previous, level_value) {
            (Some(p), Some(v)) if p == v => {
                return Ok(DegreeResult { value: v, refinement_depth: depth, boundary_min_norm: min_norm });
            }
            _ => previous = level_value,
        }
    }
    Err(Error::Inconclusive { depth: max_depth, simplices: last_count })
}

fn degree_1d<F: VectorField + ?Sized>(f: &F, domain: &Domain) -> Result<DegreeResult> {
    let (a, b) = match domain {
        Domain::Box { lower, upper } => (lower[0], upper[0]),
        Domain::Ball { center, radius } => (center[0] - radius, center[0] + radius),
    };
    let fa = f.eval(&Vector::from_element(1, a))?[0];
    let fb = f.eval(&Vector::from_element(1, b))?[0];
    let min_norm = fa.abs().min(fb.abs());
    if !(min_norm >= ZERO_TOL) {
        return Err(Error::DegenerateDomain { min_norm });
    }
    let value = ((fb.signum() - fa.signum()) / 2.0) as i64;
    Ok(DegreeResult { value, refinement_depth: 0, boundary_min_norm: min_norm })
}

/// Some component keeps one sign on all vertex values with margin
/// `½·min|f|/√N`.
fn sign_constant_component(vals: &[&Vector]) -> bool {
    let n = vals[0].len();
    let local_min = vals.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    let margin = 0.5 * local_min / (n as f64).sqrt();
    (0..n).any(|i| vals.iter().all(|v| v[i] >= margin) || vals.iter().all(|v| v[i] <= -margin))
}

/// Oriented contribution of one simplex: `±1` if the ray through `dir` meets
/// the cone over its image, `0` if not, `None` if the test is ambiguous.
fn ray_crossing(vals: &[&Vector], dir: &Vector) -> Option<i64> {
    let n = dir.len();
    let y = Matrix::from_fn(n, n, |r, c| vals[c][r]);
    let scale: f64 = vals.iter().map(|v| v.norm()).product();
    let det = determinant(&y);
    if det.abs() <= 1e-13 * scale {
        // Degenerate cone: a generic ray misses it.
        return Some(0);
    }
    let c = y.lu().solve(dir)?;
    let tol = 1e-11 * c.amax();
    if c.iter().any(|ci| *ci < -tol) {
        return Some(0);
    }
    if c.iter().any(|ci| ci.abs() <= tol) {
        return None;
    }
    Some(if det > 0.0 { 1 } else { -1 })
}

fn ray_directions(n: usize) -> Vec<Vector> {
    const SEEDS: [[f64; 4]; 4] = [
        [0.814_723_686, 0.905_791_937, 0.126_986_816, 0.913_375_856],
        [-0.632_359_246, 0.097_540_405, 0.278_498_219, -0.546_881_519],
        [0.957_506_835, -0.964_888_535, 0.157_613_081, 0.970_592_781],
        [-0.421_761_283, -0.915_735_525, 0.792_207_329, -0.959_492_426],
    ];
    SEEDS
        .iter()
        .map(|s| {
            let v = Vector::from_iterator(n, s.iter().copied().take(n));
            v.normalize()
        })
        .collect()
}

fn factorial(n: usize) -> usize {
    (1..=n).product()
}

fn cube_point(idx: &[usize], k: usize) -> Vector {
    Vector::from_iterator(idx.len(), idx.iter().map(|&i| -1.0 + 2.0 * i as f64 / k as f64))
}

/// All lattice points of `{0..=k}^n` with at least one coordinate in `{0, k}`,
/// lexicographically ordered.
fn boundary_lattice(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx = vec![0usize; n];
    loop {
        if idx.iter().any(|&i| i == 0 || i == k) {
            out.push(idx.clone());
        }
        let mut pos = n;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            if idx[pos] < k {
                idx[pos] += 1;
                idx[pos + 1..].fill(0);
                break;
            }
        }
    }
}

/// Kuhn triangulation of every facet of the cube lattice, each simplex
/// ordered so that it is positively oriented with respect to the outward
/// normal.
fn boundary_simplices(n: usize, k: usize) -> Vec<Vec<Vec<usize>>> {
    let free = n - 1;
    let perms = permutations(free);
    let mut out = Vec::with_capacity(2 * n * k.pow(free as u32) * perms.len());
    let center = Vector::zeros(n);
    for axis in 0..n {
        for side in [0, k] {
            let free_axes: Vec<usize> = (0..n).filter(|&a| a != axis).collect();
            let mut corner = vec![0usize; free];
            loop {
                for perm in &perms {
                    let mut v = vec![0usize; n];
                    v[axis] = side;
                    for (j, &a) in free_axes.iter().enumerate() {
                        v[a] = corner[j];
                    }
                    let mut simplex = vec![v.clone()];
                    for &p in perm {
                        v[free_axes[p]] += 1;
                        simplex.push(v.clone());
                    }
                    // Orientation: sign of det[v_i - center] in cube coordinates.
                    let m = Matrix::from_fn(n, n, |r, c| cube_point(&simplex[c], k)[r] - center[r]);
                    if determinant(&m) < 0.0 {
                        simplex.swap(0, 1);
                    }
                    out.push(simplex);
                }
                // Next cell corner.
                let mut pos = free;
                loop {
                    if pos == 0 {
                        break;
                    }
                    pos -= 1;
                    if corner[pos] + 1 < k {
                        corner[pos] += 1;
                        for c in corner.iter_mut().skip(pos + 1) {
                            *c = 0;
                        }
                        pos = usize::MAX;
                        break;
                    }
                }
                if pos != usize::MAX {
                    break;
                }
            }
        }
    }
    out
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoincareBohlReport {
    pub pass: bool,
    /// `(x, λ)` at which `λf(x) + (1-λ)g(x)` vanished.
    pub witness: Option<(Vec<f64>, f64)>,
    pub min_norm: f64,
}

/// Checks on sampled `∂D` that the linear homotopy `λf + (1-λ)g` has no zero
/// for `λ` on a 101-point grid of `[0, 1]`.
pub fn poincare_bohl_check<F, G>(f: &F, g: &G, domain: &Domain, per_edge: usize) -> Result<PoincareBohlReport>
where
    F: VectorField + ?Sized,
    G: VectorField + ?Sized,
{
    let mut min_norm = f64::INFINITY;
    for x in domain.boundary_points(per_edge) {
        let fx = f.eval(&x)?;
        let gx = g.eval(&x)?;
        for i in 0..=100 {
            let lambda = i as f64 / 100.0;
            let h = &fx * lambda + &gx * (1.0 - lambda);
            let norm = h.norm();
            min_norm = min_norm.min(norm);
            if !(norm > ZERO_TOL) {
                return Ok(PoincareBohlReport {
                    pass: false,
                    witness: Some((x.as_slice().to_vec(), lambda)),
                    min_norm: norm,
                });
            }
        }
    }
    Ok(PoincareBohlReport { pass: true, witness: None, min_norm })
}
