//! Pre-interpolation scan: walks the curve with second-order Taylor steps and
//! shrinks the feed at every step until the chord error fits the tolerance.
//! The result is the chord-limited feed rate scatter `(u_i, v_i)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Curve, Vec3};

/// Iteration cap for the per-point feed adjustment.
pub const MAX_LIMIT_ITERATIONS: usize = 64;

const FALLBACK_SAMPLES: usize = 33;

/// Kinematic and geometric limits plus the scheduling shape parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Limits {
    /// Sampling period (s).
    pub ts: f64,
    /// Chord error tolerance (mm).
    pub delta_max: f64,
    /// Feed rate ceiling (mm/s).
    pub v_max: f64,
    /// Tangential acceleration limit (mm/s^2).
    pub a_max: f64,
    /// Tangential jerk limit (mm/s^3).
    pub j_max: f64,
    /// Sigmoid window half-width.
    pub shape_s: f64,
    /// Breakpoint screening threshold (mm/s per unit u). `None` picks a
    /// threshold from the scatter itself.
    pub mu_s: Option<f64>,
}

impl Default for Limits {
    fn default() -> Self {
        Limits::standard()
    }
}

impl Limits {
    /// 1 ms, 0.5 um, 100 mm/s, 1000 mm/s^2, 26000 mm/s^3, s = 3.3.
    pub fn standard() -> Self {
        Limits {
            ts: 1e-3,
            delta_max: 5e-4,
            v_max: 100.0,
            a_max: 1000.0,
            j_max: 26000.0,
            shape_s: 3.3,
            mu_s: None,
        }
    }

    /// Same as [`Limits::standard`] with 3000 mm/s^2 and 55000 mm/s^3.
    pub fn high_dynamics() -> Self {
        Limits {
            a_max: 3000.0,
            j_max: 55000.0,
            ..Limits::standard()
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "standard" => Some(Self::standard()),
            "high-dynamics" => Some(Self::high_dynamics()),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("ts", self.ts),
            ("delta_max", self.delta_max),
            ("v_max", self.v_max),
            ("a_max", self.a_max),
            ("j_max", self.j_max),
            ("shape_s", self.shape_s),
        ];
        for (name, value) in fields {
            // acceleration and jerk may be unbounded; everything else must be finite
            let finite_ok = value.is_finite() || (value == f64::INFINITY && (name == "a_max" || name == "j_max"));
            if !(value > 0.0 && finite_ok) {
                return Err(Error::InvalidLimits(format!(
                    "{name} must be strictly positive, got {value}"
                )));
            }
        }
        if let Some(mu) = self.mu_s {
            if !(mu >= 0.0 && mu.is_finite()) {
                return Err(Error::InvalidLimits(format!(
                    "mu_s must be a non-negative finite number, got {mu}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterPoint {
    pub u: f64,
    pub v: f64,
}

/// Chord-limited feed values sampled along the curve.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeedrateScatter {
    pub points: Vec<ScatterPoint>,
}

impl FeedrateScatter {
    pub fn new(points: Vec<ScatterPoint>) -> Self {
        FeedrateScatter { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn validate(&self, v_max: f64) -> Result<()> {
        let pts = &self.points;
        if pts.len() < 2 {
            return Err(Error::MalformedScatter("fewer than two points".into()));
        }
        if pts[0].u != 0.0 || pts[pts.len() - 1].u != 1.0 {
            return Err(Error::MalformedScatter("scatter must span u = 0 to u = 1".into()));
        }
        if let Some(i) = pts.windows(2).position(|w| w[1].u <= w[0].u) {
            return Err(Error::MalformedScatter(format!(
                "u not strictly increasing at index {}",
                i + 1
            )));
        }
        if let Some(p) = pts.iter().find(|p| !(p.v > 0.0 && p.v <= v_max)) {
            return Err(Error::MalformedScatter(format!(
                "feed {} at u = {} outside (0, {v_max}]",
                p.v, p.u
            )));
        }
        Ok(())
    }

    /// Smallest scatter feed with `u` in `[u_a, u_b]`, if any point falls there.
    pub fn min_over(&self, u_a: f64, u_b: f64) -> Option<f64> {
        let start = self.points.partition_point(|p| p.u < u_a);
        self.points[start..]
            .iter()
            .take_while(|p| p.u <= u_b)
            .map(|p| p.v)
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.min(v))))
    }
}

/// One second-order Taylor step of the parameter for feed `v` over `ts`.
pub fn taylor_step(curve: &Curve, u: f64, v: f64, ts: f64) -> Result<f64> {
    if v < 0.0 {
        return Err(Error::domain("v", v, "[0, inf)"));
    }
    let (_, d1, d2) = curve.frame(u)?;
    let speed = d1.norm();
    if speed == 0.0 {
        return Err(Error::SingularParameterization { u });
    }
    let step = v * ts;
    let next = u + step / speed - d1.dot(d2) / (2.0 * speed.powi(4)) * step * step;
    if v > 0.0 && next <= u {
        return Err(Error::StepDegeneracy { u, v });
    }
    Ok(next.min(1.0))
}

fn distance_to_segment(p: Vec3, a: Vec3, b: Vec3) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(ab);
    if len2 == 0.0 {
        return p.distance(a);
    }
    let t = ((p - a).dot(ab) / len2).clamp(0.0, 1.0);
    p.distance(a + ab * t)
}

/// Largest distance between `C(u)` and the chord, sampled at `n` uniform parameters.
pub fn sampled_chord_deviation(curve: &Curve, u_a: f64, u_b: f64, n: usize) -> Result<f64> {
    let a = curve.evaluate(u_a)?;
    let b = curve.evaluate(u_b)?;
    let mut worst: f64 = 0.0;
    for i in 1..n - 1 {
        let u = u_a + (u_b - u_a) * i as f64 / (n - 1) as f64;
        worst = worst.max(distance_to_segment(curve.evaluate(u)?, a, b));
    }
    Ok(worst)
}

/// Chord error of the segment `C(u_a) -> C(u_b)` under the osculating-arc model.
pub fn chord_error(curve: &Curve, u_a: f64, u_b: f64) -> Result<f64> {
    if u_b <= u_a {
        return Err(Error::domain("u_b", u_b, "(u_a, 1]"));
    }
    let chord = curve.evaluate(u_b)?.distance(curve.evaluate(u_a)?);
    let rho = match curve.curvature_radius(0.5 * (u_a + u_b)) {
        Ok(r) => r,
        Err(Error::SingularParameterization { .. }) => {
            return sampled_chord_deviation(curve, u_a, u_b, FALLBACK_SAMPLES)
        }
        Err(e) => return Err(e),
    };
    if rho.is_infinite() {
        return Ok(0.0);
    }
    let half = 0.5 * chord;
    if 2.0 * rho > chord {
        // rho - sqrt(rho^2 - half^2), rearranged to avoid cancellation
        Ok(half * half / (rho + (rho * rho - half * half).sqrt()))
    } else {
        sampled_chord_deviation(curve, u_a, u_b, FALLBACK_SAMPLES)
    }
}

/// Largest feed (starting from `v_max`) whose next step respects the chord
/// tolerance at `u`. Returns the feed and the parameter it reaches.
pub fn limit_feedrate(curve: &Curve, u: f64, limits: &Limits) -> Result<(f64, f64)> {
    if !(0.0..1.0).contains(&u) {
        return Err(Error::domain("u", u, "[0, 1)"));
    }
    let mut v = limits.v_max;
    for _ in 0..MAX_LIMIT_ITERATIONS {
        let next = match taylor_step(curve, u, v, limits.ts) {
            Ok(n) => n,
            // the quadratic term overwhelms the step: the feed is far too high here
            Err(Error::StepDegeneracy { .. }) => {
                v *= 0.5;
                continue;
            }
            Err(e) => return Err(e),
        };
        let delta = chord_error(curve, u, next)?;
        if delta <= limits.delta_max {
            return Ok((v, next));
        }
        let tau = (limits.delta_max / delta).sqrt();
        // strictly decreasing even when tau rounds to 1
        v = (tau * v).min(v * (1.0 - 1e-12));
    }
    Err(Error::ScanConvergence {
        u,
        iterations: MAX_LIMIT_ITERATIONS,
    })
}

/// Scans the whole curve. The last point sits at `u = 1` and repeats the feed
/// of the step that reached it.
pub fn scan_curve(curve: &Curve, limits: &Limits) -> Result<FeedrateScatter> {
    limits.validate()?;
    let mut points = Vec::new();
    let mut u = 0.0;
    let mut last_v = limits.v_max;
    while u < 1.0 {
        let (v, next) = limit_feedrate(curve, u, limits)?;
        points.push(ScatterPoint { u, v });
        last_v = v;
        u = next;
    }
    points.push(ScatterPoint { u: 1.0, v: last_v });
    Ok(FeedrateScatter { points })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(len: f64) -> Curve {
        Curve::new(1, &[vec![0.0, 0.0], vec![len, 0.0]], vec![1.0, 1.0], vec![0.0, 0.0, 1.0, 1.0]).unwrap()
    }

    /// Full circle from four rational quadratic quarter arcs.
    pub(crate) fn circle(r: f64) -> Curve {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let pts = [
            [r, 0.0],
            [r, r],
            [0.0, r],
            [-r, r],
            [-r, 0.0],
            [-r, -r],
            [0.0, -r],
            [r, -r],
            [r, 0.0],
        ];
        let pts: Vec<Vec<f64>> = pts.iter().map(|p| p.to_vec()).collect();
        let weights = vec![1.0, h, 1.0, h, 1.0, h, 1.0, h, 1.0];
        let knots = vec![0.0, 0.0, 0.0, 0.25, 0.25, 0.5, 0.5, 0.75, 0.75, 1.0, 1.0, 1.0];
        Curve::new(2, &pts, weights, knots).unwrap()
    }

    #[test]
    fn first_order_step_on_line() {
        let u = taylor_step(&line(10.0), 0.0, 10.0, 1e-3).unwrap();
        assert!((u - 0.001).abs() < 1e-15);
        assert_eq!(taylor_step(&line(10.0), 0.4, 0.0, 1e-3).unwrap(), 0.4);
    }

    #[test]
    fn step_clamps_at_end() {
        assert_eq!(taylor_step(&line(10.0), 0.9999, 100.0, 1e-3).unwrap(), 1.0);
    }

    #[test]
    fn chord_error_models() {
        assert_eq!(chord_error(&line(10.0), 0.1, 0.2).unwrap(), 0.0);
        let r = 5.0;
        let c = circle(r);
        let (ua, ub) = (0.1, 0.1 + 1e-3);
        let chord = c.evaluate(ub).unwrap().distance(c.evaluate(ua).unwrap());
        let expect = r - (r * r - chord * chord / 4.0).sqrt();
        assert!((chord_error(&c, ua, ub).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn straight_line_keeps_ceiling() {
        let limits = Limits::standard();
        let (v, _) = limit_feedrate(&line(100.0), 0.2, &limits).unwrap();
        assert_eq!(v, limits.v_max);
    }

    #[test]
    fn circle_feed_matches_closed_form() {
        let limits = Limits {
            v_max: 200.0,
            ..Limits::standard()
        };
        let (rho, dm, ts) = (5.0, limits.delta_max, limits.ts);
        let expect = 2.0 / ts * (dm * (2.0 * rho - dm)).sqrt();
        let (v, _) = limit_feedrate(&circle(rho), 0.3, &limits).unwrap();
        assert!((v - expect).abs() / expect < 1e-3, "v = {v}, expected {expect}");
        assert!((expect - 141.42).abs() < 0.01);
    }

    #[test]
    fn line_scan() {
        let limits = Limits::standard();
        let s = scan_curve(&line(100.0), &limits).unwrap();
        assert!((s.len() as i64 - 1001).abs() <= 1, "{} points", s.len());
        assert!(s.points.iter().all(|p| p.v == 100.0));
        s.validate(limits.v_max).unwrap();
    }

    #[test]
    fn circle_scan_is_flat() {
        let limits = Limits::standard();
        let s = scan_curve(&circle(5.0), &limits).unwrap();
        s.validate(limits.v_max).unwrap();
        // the 5 mm circle allows ~141 mm/s, so the 100 mm/s ceiling holds everywhere
        assert!(s.points.iter().all(|p| p.v == 100.0));
        let s = scan_curve(&circle(1.0), &limits).unwrap();
        let expect = 2.0 / limits.ts * (limits.delta_max * (2.0 - limits.delta_max)).sqrt();
        // steps that straddle a knot see a jump in C'' and come out slightly slower
        for p in &s.points[1..s.len() - 2] {
            assert!((p.v - expect).abs() / expect < 2e-2, "v = {} vs {expect}", p.v);
        }
        let typical = s.points[s.len() / 3].v;
        assert!((typical - expect).abs() / expect < 1e-3);
    }

    #[test]
    fn limits_validation() {
        assert!(Limits::standard().validate().is_ok());
        let bad = Limits {
            ts: 0.0,
            ..Limits::standard()
        };
        assert!(bad.validate().is_err());
        let unbounded = Limits {
            j_max: f64::INFINITY,
            ..Limits::standard()
        };
        assert!(unbounded.validate().is_ok());
    }

    #[test]
    fn min_over_range() {
        let s = FeedrateScatter::new(vec![
            ScatterPoint { u: 0.0, v: 5.0 },
            ScatterPoint { u: 0.5, v: 2.0 },
            ScatterPoint { u: 1.0, v: 4.0 },
        ]);
        assert_eq!(s.min_over(0.6, 1.0), Some(4.0));
        assert_eq!(s.min_over(0.0, 1.0), Some(2.0));
        assert_eq!(s.min_over(0.6, 0.7), None);
    }
}
