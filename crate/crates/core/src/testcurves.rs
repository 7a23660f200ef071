//! Reproducible random tool paths for property suites and benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::geometry::Curve;

/// Parameters of the random-walk control polygon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSpec {
    pub degree: usize,
    pub min_points: usize,
    pub max_points: usize,
    /// Control polygon leg length range (mm).
    pub leg: (f64, f64),
    /// Largest heading change between legs (rad).
    pub max_turn: f64,
    pub weight: (f64, f64),
}

impl Default for CurveSpec {
    fn default() -> Self {
        CurveSpec {
            degree: 3,
            min_points: 8,
            max_points: 20,
            leg: (2.0, 8.0),
            max_turn: 150f64.to_radians(),
            weight: (0.5, 2.0),
        }
    }
}

/// Planar rational curve with uniform clamped knots, fully determined by `seed`.
pub fn random_curve(seed: u64, spec: &CurveSpec) -> Result<Curve> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(spec.min_points..=spec.max_points);
    let mut heading = rng.gen_range(0.0..std::f64::consts::TAU);
    let mut p = [0.0, 0.0];
    let mut points = Vec::with_capacity(n);
    points.push(p.to_vec());
    for _ in 1..n {
        let leg = rng.gen_range(spec.leg.0..=spec.leg.1);
        p = [p[0] + leg * heading.cos(), p[1] + leg * heading.sin()];
        points.push(p.to_vec());
        heading += rng.gen_range(-spec.max_turn..=spec.max_turn);
    }
    let weights = (0..n).map(|_| rng.gen_range(spec.weight.0..=spec.weight.1)).collect();
    Curve::new(spec.degree, &points, weights, Curve::uniform_knots(spec.degree, n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_curve() {
        let a = random_curve(7, &CurveSpec::default()).unwrap();
        let b = random_curve(7, &CurveSpec::default()).unwrap();
        let c = random_curve(8, &CurveSpec::default()).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let n = a.control_points().len();
        assert!((8..=20).contains(&n));
        assert_eq!(a.degree(), 3);
    }
}
