//! Compact convex subsets of `R^N` and the support-function calculus the
//! guiding conditions are phrased in.
//!
//! For a compact convex `A` and a direction `v` the lower and upper inner
//! products are
//!
//! ```text
//! ⟨v, A⟩⁻ = inf { ⟨v, a⟩ : a ∈ A } = -σ_A(-v)
//! ⟨v, A⟩⁺ = sup { ⟨v, a⟩ : a ∈ A } =  σ_A(v)
//! ```
//!
//! where `σ_A` is the support function.

use std::cmp::Ordering;

use crate::{Error, Matrix, Result, Vector};

/// Projection tolerance for polytopes with three or more vertices.
pub const PROJECTION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum ConvexSet {
    Ball {
        center: Vector,
        radius: f64,
    },
    /// Convex hull of the listed vertices.
    Polytope {
        vertices: Vec<Vector>,
    },
    Singleton {
        point: Vector,
    },
}

impl ConvexSet {
    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        if !(radius >= 0.0) || !radius.is_finite() {
            return Err(Error::InvalidSet(format!("ball radius {radius} must be finite and >= 0")));
        }
        check_finite(&center)?;
        Ok(ConvexSet::Ball { center, radius })
    }

    pub fn polytope(vertices: Vec<Vector>) -> Result<Self> {
        let first = vertices.first().ok_or_else(|| Error::InvalidSet("polytope needs at least one vertex".into()))?;
        let dim = first.len();
        for v in &vertices {
            if v.len() != dim {
                return Err(Error::Dimension { expected: dim, found: v.len() });
            }
            check_finite(v)?;
        }
        Ok(ConvexSet::Polytope { vertices })
    }

    pub fn singleton(point: Vector) -> Result<Self> {
        check_finite(&point)?;
        Ok(ConvexSet::Singleton { point })
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::Ball { center, .. } => center.len(),
            ConvexSet::Polytope { vertices } => vertices[0].len(),
            ConvexSet::Singleton { point } => point.len(),
        }
    }

    /// `sup { ⟨v, a⟩ : a ∈ A }`.
    pub fn support(&self, v: &Vector) -> f64 {
        match self {
            ConvexSet::Ball { center, radius } => v.dot(center) + radius * v.norm(),
            ConvexSet::Polytope { vertices } => vertices.iter().map(|a| v.dot(a)).fold(f64::NEG_INFINITY, f64::max),
            ConvexSet::Singleton { point } => v.dot(point),
        }
    }

    /// `(⟨v, A⟩⁻, ⟨v, A⟩⁺)`.
    pub fn inner_product_range(&self, v: &Vector) -> (f64, f64) {
        (-self.support(&-v), self.support(v))
    }

    /// An element of `A` attaining the support value in direction `v`.
    ///
    /// Zero directions select the center (ball) or the first vertex
    /// (polytope). Ties between polytope vertices go to the lexicographically
    /// smallest vertex.
    pub fn extreme_point(&self, v: &Vector) -> Vector {
        match self {
            ConvexSet::Ball { center, radius } => {
                let n = v.norm();
                if n == 0.0 {
                    center.clone()
                } else {
                    center + v * (radius / n)
                }
            }
            ConvexSet::Polytope { vertices } => {
                if v.iter().all(|c| *c == 0.0) {
                    return vertices[0].clone();
                }
                let mut best = &vertices[0];
                let mut best_val = v.dot(best);
                for a in &vertices[1..] {
                    let val = v.dot(a);
                    if val > best_val || (val == best_val && lex_cmp(a, best) == Ordering::Less) {
                        best = a;
                        best_val = val;
                    }
                }
                best.clone()
            }
            ConvexSet::Singleton { point } => point.clone(),
        }
    }

    /// A representative interior-ish element: ball center, vertex centroid,
    /// or the point itself.
    pub fn center(&self) -> Vector {
        match self {
            ConvexSet::Ball { center, .. } => center.clone(),
            ConvexSet::Polytope { vertices } => {
                let sum = vertices.iter().fold(Vector::zeros(self.dim()), |acc, v| acc + v);
                sum / vertices.len() as f64
            }
            ConvexSet::Singleton { point } => point.clone(),
        }
    }

    /// Largest norm of an element, `sup { |a| : a ∈ A }`.
    pub fn max_norm(&self) -> f64 {
        match self {
            ConvexSet::Ball { center, radius } => center.norm() + radius,
            ConvexSet::Polytope { vertices } => vertices.iter().map(|v| v.norm()).fold(0.0, f64::max),
            ConvexSet::Singleton { point } => point.norm(),
        }
    }

    /// Euclidean distance from `p` to the set.
    pub fn distance_to(&self, p: &Vector) -> f64 {
        match self {
            ConvexSet::Ball { center, radius } => ((p - center).norm() - radius).max(0.0),
            ConvexSet::Singleton { point } => (p - point).norm(),
            ConvexSet::Polytope { vertices } => match vertices.len() {
                1 => (p - &vertices[0]).norm(),
                2 => segment_distance(&vertices[0], &vertices[1], p),
                _ => (p - hull_projection(vertices, p)).norm(),
            },
        }
    }

    /// Pointwise negation `-A`.
    pub fn negated(&self) -> ConvexSet {
        match self {
            ConvexSet::Ball { center, radius } => ConvexSet::Ball { center: -center, radius: *radius },
            ConvexSet::Polytope { vertices } => ConvexSet::Polytope { vertices: vertices.iter().map(|v| -v).collect() },
            ConvexSet::Singleton { point } => ConvexSet::Singleton { point: -point },
        }
    }
}

fn check_finite(v: &Vector) -> Result<()> {
    if v.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidSet(format!("non-finite coordinate in {:?}", v.as_slice())))
    }
}

fn lex_cmp(a: &Vector, b: &Vector) -> Ordering {
    a.iter().zip(b.iter()).map(|(x, y)| x.total_cmp(y)).find(|o| *o != Ordering::Equal).unwrap_or(Ordering::Equal)
}

fn segment_distance(a: &Vector, b: &Vector, p: &Vector) -> f64 {
    let d = b - a;
    let len2 = d.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let s = ((p - a).dot(&d) / len2).clamp(0.0, 1.0);
    (p - (a + d * s)).norm()
}

/// Nearest point of `conv(vertices)` to `p`, by Wolfe's minimum-norm-point
/// iteration on the translated vertex set.
fn hull_projection(vertices: &[Vector], p: &Vector) -> Vector {
    let pts: Vec<Vector> = vertices.iter().map(|v| v - p).collect();
    let scale = pts.iter().map(|q| q.norm_squared()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);

    let start = (0..pts.len())
        .min_by(|&i, &j| pts[i].norm_squared().total_cmp(&pts[j].norm_squared()))
        .expect("nonempty polytope");
    let mut active: Vec<usize> = vec![start];
    let mut weights: Vec<f64> = vec![1.0];
    let mut x = pts[start].clone();

    for _major in 0..(10 * pts.len() + 50) {
        // Vertex most opposed to the current point.
        let (j, best) =
            (0..pts.len()).map(|i| (i, x.dot(&pts[i]))).min_by(|a, b| a.1.total_cmp(&b.1)).expect("nonempty polytope");
        if x.norm_squared() - best <= PROJECTION_TOL * PROJECTION_TOL * scale || active.contains(&j) {
            break;
        }
        active.push(j);
        weights.push(0.0);

        loop {
            let alpha = match affine_min_norm(&pts, &active) {
                Some(a) => a,
                None => {
                    // Affinely dependent active set: drop the newest point.
                    active.pop();
                    weights.pop();
                    break;
                }
            };
            if alpha.iter().all(|a| *a > 1e-14) {
                weights = alpha;
                break;
            }
            // Step from current weights towards alpha until a weight hits zero.
            let mut theta = 1.0f64;
            for (w, a) in weights.iter().zip(&alpha) {
                if *a <= 1e-14 && w - a > 0.0 {
                    theta = theta.min(w / (w - a));
                }
            }
            for (w, a) in weights.iter_mut().zip(&alpha) {
                *w += theta * (a - *w);
            }
            let mut k = 0;
            while k < active.len() {
                if weights[k] <= 1e-14 {
                    active.remove(k);
                    weights.remove(k);
                } else {
                    k += 1;
                }
            }
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
            if active.len() <= 1 {
                break;
            }
        }
        x = combine(&pts, &active, &weights);
    }
    x + p
}

fn combine(pts: &[Vector], active: &[usize], weights: &[f64]) -> Vector {
    active.iter().zip(weights).fold(Vector::zeros(pts[0].len()), |acc, (&i, &w)| acc + &pts[i] * w)
}

/// Minimum-norm point of the affine hull of the active points, as barycentric
/// weights. `None` if the points are affinely dependent.
fn affine_min_norm(pts: &[Vector], active: &[usize]) -> Option<Vec<f64>> {
    let k = active.len();
    let mut m = Matrix::zeros(k + 1, k + 1);
    let mut rhs = Vector::zeros(k + 1);
    for (r, &i) in active.iter().enumerate() {
        for (c, &j) in active.iter().enumerate() {
            m[(r, c)] = pts[i].dot(&pts[j]);
        }
        m[(r, k)] = 1.0;
        m[(k, r)] = 1.0;
    }
    rhs[k] = 1.0;
    let sol = m.lu().solve(&rhs)?;
    let w: Vec<f64> = sol.iter().take(k).copied().collect();
    if w.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some(w)
}
