//! Deterministic direction sets shared by the sampled hypothesis checks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::Vector;

/// Seeded generator used everywhere a check needs randomness.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Unit directions in `R^dim`.
///
/// `dim == 1` gives `{+1, -1}`; `dim == 2` gives `count` equally spaced angles;
/// higher dimensions give the signed axes followed by seeded Gaussian
/// directions until `count` is reached.
pub fn unit_directions(dim: usize, count: usize, seed: u64) -> Vec<Vector> {
    match dim {
        0 => Vec::new(),
        1 => vec![Vector::from_element(1, 1.0), Vector::from_element(1, -1.0)],
        2 => (0..count.max(4))
            .map(|j| {
                let a = 2.0 * std::f64::consts::PI * j as f64 / count.max(4) as f64;
                Vector::from_vec(vec![a.cos(), a.sin()])
            })
            .collect(),
        _ => {
            let mut out = Vec::with_capacity(count.max(2 * dim));
            for i in 0..dim {
                for s in [1.0, -1.0] {
                    let mut e = Vector::zeros(dim);
                    e[i] = s;
                    out.push(e);
                }
            }
            let mut rng = rng(seed);
            while out.len() < count {
                let v = Vector::from_fn(dim, |_, _| StandardNormal.sample(&mut rng));
                let n = v.norm();
                if n > 1e-12 {
                    out.push(v / n);
                }
            }
            out
        }
    }
}

/// A uniformly distributed point of the unit ball.
pub fn ball_point<R: rand::Rng>(dim: usize, rng: &mut R) -> Vector {
    loop {
        let v = Vector::from_fn(dim, |_, _| StandardNormal.sample(rng));
        let n = v.norm();
        if n > 1e-12 {
            let radius: f64 = rng.random::<f64>().powf(1.0 / dim as f64);
            return v * (radius / n);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn directions_are_unit_and_deterministic() {
        for dim in 1..=4 {
            let a = unit_directions(dim, 24, 7);
            let b = unit_directions(dim, 24, 7);
            assert_eq!(a, b);
            for d in &a {
                assert!((d.norm() - 1.0).abs() < 1e-12);
            }
        }
    }
}
