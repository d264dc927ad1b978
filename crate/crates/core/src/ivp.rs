//! Selection-based explicit Euler integration of `x' ∈ F(t, x)`.
//!
//! Each step picks one element `f_k ∈ F(t_k, x_k)` according to a
//! [`SelectionStrategy`] and sets `x_{k+1} = x_k + Δt_k·f_k`. A bundle of such
//! trajectories is a finite sample of the solution set `S_F(x₀)`; no claim is
//! made about its topology.
//!
//! The relay family gets a projected step: when a step would cross `x = 0`
//! the state is placed on `0` and the realised difference quotient (which lies
//! in `F(t, 0) = [-k, k]`) is recorded as the selection.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::gronwall_upper;
use crate::convexset::ConvexSet;
use crate::multimap::{GrowthProfile, HomotopyField, Mode, MultiMap, Sign};
use crate::potential::Potential;
use crate::{sampling, Error, Result, Vector};

/// Nodes closer than this (relative to `T`) to a requested time are snapped
/// onto it.
const SNAP_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    nodes: Vec<f64>,
}

impl TimeGrid {
    /// `t_k = kT/n`, with the last node exactly `T`.
    pub fn uniform(horizon: f64, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::Config("time grid needs at least one step".into()));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::Config(format!("horizon {horizon} must be positive")));
        }
        let mut nodes: Vec<f64> = (0..=n).map(|k| horizon * k as f64 / n as f64).collect();
        nodes[n] = horizon;
        Ok(TimeGrid { nodes })
    }

    /// Adds every time in `times` as an exact node.
    pub fn refined_with(mut self, times: &[f64]) -> Result<Self> {
        let horizon = self.horizon();
        for &t in times {
            if !(0.0..=horizon).contains(&t) {
                return Err(Error::Domain { t, horizon });
            }
            let pos = self.nodes.partition_point(|n| *n < t);
            let near = |i: usize| self.nodes.get(i).is_some_and(|n| (n - t).abs() <= SNAP_TOL * horizon);
            if near(pos) {
                if pos != 0 && pos != self.nodes.len() - 1 {
                    self.nodes[pos] = t;
                }
            } else if pos > 0 && near(pos - 1) {
                if pos - 1 != 0 {
                    self.nodes[pos - 1] = t;
                }
            } else {
                self.nodes.insert(pos, t);
            }
        }
        Ok(self)
    }

    /// Grid of the time-reversed problem: nodes `T - t` in increasing order.
    pub fn reversed(&self) -> TimeGrid {
        let horizon = self.horizon();
        let mut nodes: Vec<f64> = self.nodes.iter().rev().map(|t| horizon - t).collect();
        nodes[0] = 0.0;
        let last = nodes.len() - 1;
        nodes[last] = horizon;
        TimeGrid { nodes }
    }

    pub fn horizon(&self) -> f64 {
        *self.nodes.last().expect("nonempty grid")
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn steps(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn dt(&self, k: usize) -> f64 {
        self.nodes[k + 1] - self.nodes[k]
    }

    pub fn max_step(&self) -> f64 {
        self.nodes.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Index of the node exactly equal to `t`.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let pos = self.nodes.partition_point(|n| *n < t);
        (self.nodes.get(pos) == Some(&t)).then_some(pos)
    }
}

/// Discrete solution: states at every node and the selection used on every
/// interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub states: Vec<Vector>,
    pub selections: Vec<Vector>,
}

impl Trajectory {
    /// `x ≡ point` with zero selections (the embedding `i(x₀)` of constants).
    pub fn constant(grid: TimeGrid, point: &Vector) -> Trajectory {
        let n = grid.steps();
        Trajectory { states: vec![point.clone(); n + 1], selections: vec![Vector::zeros(point.len()); n], grid }
    }

    /// Builds `x_{k+1} = x_k + Δt_k·f_k` from `x₀` and the selections.
    pub fn from_selections(grid: TimeGrid, x0: Vector, selections: Vec<Vector>) -> Trajectory {
        let mut states = Vec::with_capacity(selections.len() + 1);
        states.push(x0);
        for (k, f) in selections.iter().enumerate() {
            let next = euler_step(&states[k], grid.dt(k), f);
            states.push(next);
        }
        Trajectory { grid, states, selections }
    }

    /// Maps a solution `y` of the reversed problem `y' ∈ -F(T - s, y)` on
    /// `grid.reversed()` back to a forward trajectory on `grid`.
    pub fn from_reversed(reversed: &Trajectory, grid: TimeGrid) -> Trajectory {
        let x0 = reversed.states.last().expect("nonempty").clone();
        let selections: Vec<Vector> = reversed.selections.iter().rev().map(|g| -g).collect();
        Trajectory::from_selections(grid, x0, selections)
    }

    pub fn dim(&self) -> usize {
        self.states[0].len()
    }

    pub fn x0(&self) -> &Vector {
        &self.states[0]
    }

    pub fn x_final(&self) -> &Vector {
        self.states.last().expect("nonempty")
    }

    /// `‖x‖ = max_k |x_k|`.
    pub fn sup_norm(&self) -> f64 {
        self.states.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn min_norm(&self) -> f64 {
        self.states.iter().map(|x| x.norm()).fold(f64::INFINITY, f64::min)
    }

    /// State at an exact grid node.
    pub fn state_at(&self, t: f64) -> Result<&Vector> {
        self.grid.index_of(t).map(|k| &self.states[k]).ok_or(Error::MissingNode(t))
    }

    /// `max_k` distance of `f_k` from `F(t_k, x_k)`, or from `F(t_{k+1},
    /// x_{k+1})` when that is closer (projected and reversed steps select at
    /// the right node).
    pub fn dynamics_residual(&self, map: &MultiMap) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (k, f) in self.selections.iter().enumerate() {
            let t = self.grid.nodes()[k];
            let left = map.value(t, &self.states[k])?.distance_to(f);
            let d = if left == 0.0 {
                0.0
            } else {
                let right = map.value(self.grid.nodes()[k + 1], &self.states[k + 1])?.distance_to(f);
                left.min(right)
            };
            worst = worst.max(d);
        }
        Ok(worst)
    }

    /// Largest deviation from the Euler construction rule (zero for
    /// trajectories produced by [`integrate`]).
    pub fn euler_defect(&self) -> f64 {
        self.selections
            .iter()
            .enumerate()
            .map(|(k, f)| (euler_step(&self.states[k], self.grid.dt(k), f) - &self.states[k + 1]).amax())
            .fold(0.0, f64::max)
    }

    /// CSV with header `t,x1..xN,f1..fN`, one row per node, 17 significant
    /// digits. The last row repeats the final selection.
    pub fn to_csv(&self) -> String {
        let n = self.dim();
        let mut out = String::from("t");
        for i in 1..=n {
            out.push_str(&format!(",x{i}"));
        }
        for i in 1..=n {
            out.push_str(&format!(",f{i}"));
        }
        out.push('\n');
        for (k, x) in self.states.iter().enumerate() {
            let f = &self.selections[k.min(self.selections.len() - 1)];
            out.push_str(&format!("{:.16e}", self.grid.nodes()[k]));
            for v in x.iter().chain(f.iter()) {
                out.push_str(&format!(",{v:.16e}"));
            }
            out.push('\n');
        }
        out
    }
}

fn euler_step(x: &Vector, dt: f64, f: &Vector) -> Vector {
    Vector::from_iterator(x.len(), x.iter().zip(f.iter()).map(|(xi, fi)| xi + dt * fi))
}

#[derive(Debug, Clone, PartialEq)]
pub enum DirectionSource {
    Gradient(Potential),
    Fixed(Vector),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SelectionStrategy {
    /// Ball center, vertex centroid or the point itself.
    Center,
    /// Uniform in balls, Dirichlet-weighted in polytopes.
    Random {
        seed: u64,
    },
    Extremal {
        direction: DirectionSource,
        mode: Mode,
    },
    /// Selection of `F_V` (see [`MultiMap::select_filtered`]).
    Filtered {
        potential: Potential,
        sign: Sign,
        radius: f64,
    },
    /// Selection of `λ(±W_V) + (1 - λ)F_V`.
    Homotopy {
        potential: Potential,
        sign: Sign,
        radius: f64,
        lambda: f64,
    },
}

impl SelectionStrategy {
    fn select(&self, map: &MultiMap, t: f64, x: &Vector, rng: &mut Option<ChaCha8Rng>) -> Result<Option<Vector>> {
        match self {
            SelectionStrategy::Center => Ok(Some(map.value(t, x)?.center())),
            SelectionStrategy::Random { .. } => {
                let set = map.value(t, x)?;
                let rng = rng.as_mut().expect("random strategy carries an rng");
                Ok(Some(random_element(&set, rng)))
            }
            SelectionStrategy::Extremal { direction, mode } => {
                let dir = match direction {
                    DirectionSource::Gradient(v) => v.grad(x),
                    DirectionSource::Fixed(d) => d.clone(),
                };
                map.select_extremal(t, x, &dir, *mode).map(Some)
            }
            SelectionStrategy::Filtered { potential, sign, radius } => {
                map.select_filtered(potential, t, x, *sign, *radius)
            }
            SelectionStrategy::Homotopy { potential, sign, radius, lambda } => {
                HomotopyField { map, potential, sign: *sign, lambda: *lambda }.value(t, x, *radius)
            }
        }
    }
}

fn random_element(set: &ConvexSet, rng: &mut ChaCha8Rng) -> Vector {
    match set {
        ConvexSet::Ball { center, radius } => center + sampling::ball_point(center.len(), rng) * *radius,
        ConvexSet::Polytope { vertices } => {
            let weights: Vec<f64> = vertices.iter().map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
            let total: f64 = weights.iter().sum();
            vertices.iter().zip(&weights).fold(Vector::zeros(set.dim()), |acc, (v, w)| acc + v * (w / total))
        }
        ConvexSet::Singleton { point } => point.clone(),
    }
}

/// Explicit Euler with per-step selections.
pub fn integrate(map: &MultiMap, x0: &Vector, grid: &TimeGrid, strategy: &SelectionStrategy) -> Result<Trajectory> {
    if x0.len() != map.dim() {
        return Err(Error::Dimension { expected: map.dim(), found: x0.len() });
    }
    if (grid.horizon() - map.horizon()).abs() > SNAP_TOL * map.horizon() {
        return Err(Error::Config(format!(
            "grid horizon {} does not match the map horizon {}",
            grid.horizon(),
            map.horizon()
        )));
    }
    let mut rng = match strategy {
        SelectionStrategy::Random { seed } => Some(sampling::rng(*seed)),
        _ => None,
    };
    let n = grid.steps();
    let mut states = Vec::with_capacity(n + 1);
    let mut selections = Vec::with_capacity(n);
    states.push(x0.clone());
    for k in 0..n {
        let t = grid.nodes()[k];
        let x = &states[k];
        let dt = grid.dt(k);
        let f = strategy
            .select(map, t, x, &mut rng)?
            .ok_or_else(|| Error::GuidingViolation { t, x: x.as_slice().to_vec() })?;
        let mut next = euler_step(x, dt, &f);
        let mut f = f;
        if map.is_relay() && x[0] != 0.0 && next[0] * x[0] <= 0.0 {
            if let Some(q) = exact_landing(x[0], dt) {
                f = Vector::from_element(1, q);
                next = Vector::from_element(1, 0.0);
            }
        }
        if next.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence { step: k, t });
        }
        states.push(next);
        selections.push(f);
    }
    Ok(Trajectory { grid: grid.clone(), states, selections })
}

/// A float `q` near `-x/dt` with `x + dt·q == 0` exactly in floating point.
fn exact_landing(x: f64, dt: f64) -> Option<f64> {
    let q0 = -x / dt;
    let mut up = q0;
    let mut down = q0;
    for _ in 0..256 {
        if x + dt * up == 0.0 {
            return Some(up);
        }
        if x + dt * down == 0.0 {
            return Some(down);
        }
        up = up.next_up();
        down = down.next_down();
    }
    None
}

/// The center strategy, the two gradient-extremal strategies when a potential
/// is given, then seeded random strategies, truncated to `size`.
pub fn default_bundle(potential: Option<&Potential>, size: usize, seed: u64) -> Vec<SelectionStrategy> {
    let mut out = vec![SelectionStrategy::Center];
    if let Some(v) = potential {
        for mode in [Mode::Max, Mode::Min] {
            out.push(SelectionStrategy::Extremal { direction: DirectionSource::Gradient(v.clone()), mode });
        }
    }
    let mut i = 0u64;
    while out.len() < size {
        out.push(SelectionStrategy::Random { seed: seed.wrapping_add(i) });
        i += 1;
    }
    out.truncate(size.max(1));
    out
}

/// `size` trajectories from `x₀`: the given strategies first, then seeded
/// random ones. Members integrate concurrently; output follows input order.
pub fn sample_solution_set(
    map: &MultiMap,
    x0: &Vector,
    grid: &TimeGrid,
    strategies: &[SelectionStrategy],
    size: usize,
    seed: u64,
) -> Result<Vec<Trajectory>> {
    if size == 0 {
        return Err(Error::Config("bundle size must be >= 1".into()));
    }
    let mut plan: Vec<SelectionStrategy> = strategies.iter().take(size).cloned().collect();
    let mut i = 0u64;
    while plan.len() < size {
        plan.push(SelectionStrategy::Random { seed: seed.wrapping_add(i) });
        i += 1;
    }
    plan.par_iter().map(|s| integrate(map, x0, grid, s)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnvelopeDiagnostics {
    /// `C·Δt` with `C = (1 + gronwall_upper(|x₀|, ‖μ‖₁))·‖μ‖_∞`.
    pub slack: f64,
    /// `max_k (|x_k| - ((|x₀|+1)e^{∫₀^{t_k}μ} - 1))`.
    pub upper_excess: f64,
    /// `max_k (((|x₀|+1)e^{-∫₀^{t_k}μ} - 1) - |x_k|)`.
    pub lower_deficit: f64,
    pub upper_ok: bool,
    pub lower_ok: bool,
}

/// Compares a trajectory against the Gronwall envelope and the escape lower
/// envelope, both with slack `C·Δt`.
pub fn envelope_check(traj: &Trajectory, growth: &GrowthProfile) -> EnvelopeDiagnostics {
    let x0n = traj.x0().norm();
    let c = (1.0 + gronwall_upper(x0n, growth.mu_total)) * growth.sup();
    let slack = c * traj.grid.max_step();
    let mut upper_excess = f64::NEG_INFINITY;
    let mut lower_deficit = f64::NEG_INFINITY;
    for (t, x) in traj.grid.nodes().iter().zip(&traj.states) {
        let m = growth.integral_to(*t);
        let upper = (x0n + 1.0) * m.exp() - 1.0;
        let lower = (x0n + 1.0) * (-m).exp() - 1.0;
        let norm = x.norm();
        upper_excess = upper_excess.max(norm - upper);
        lower_deficit = lower_deficit.max(lower - norm);
    }
    EnvelopeDiagnostics {
        slack,
        upper_excess,
        lower_deficit,
        upper_ok: upper_excess <= slack,
        lower_ok: lower_deficit <= slack,
    }
}
