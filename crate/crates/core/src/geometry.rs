//! Rational B-spline tool paths: evaluation, exact derivatives, curvature and
//! arc length.
//!
//! Planar curves are stored with `z = 0`, so every downstream computation works
//! on three components regardless of the input dimension.

use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use crate::error::{Error, Result};

/// Curvature below this (1/mm) is treated as a straight segment.
pub const STRAIGHTNESS_THRESHOLD: f64 = 1e-12;

/// Default relative tolerance for arc length quadrature.
pub const DEFAULT_ARC_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3 {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, other: Vec3) -> f64 {
        (self - other).norm()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Vec3 {
    fn add_assign(&mut self, o: Vec3) {
        self.x += o.x;
        self.y += o.y;
        self.z += o.z;
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, k: f64) -> Vec3 {
        Vec3::new(self.x * k, self.y * k, self.z * k)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// A clamped rational B-spline `C(u)` on `u ∈ [0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    degree: usize,
    dim: usize,
    control_points: Vec<Vec3>,
    weights: Vec<f64>,
    knots: Vec<f64>,
}

impl Curve {
    /// Builds a curve from points given as 2- or 3-component slices.
    pub fn new(
        degree: usize,
        control_points: &[Vec<f64>],
        weights: Vec<f64>,
        knots: Vec<f64>,
    ) -> Result<Curve> {
        let dim = match control_points.first() {
            Some(p) => p.len(),
            None => return Err(Error::InvalidCurve("control_points must not be empty".into())),
        };
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidCurve(format!(
                "control points must have 2 or 3 coordinates, got {dim}"
            )));
        }
        let mut pts = Vec::with_capacity(control_points.len());
        for (i, p) in control_points.iter().enumerate() {
            if p.len() != dim {
                return Err(Error::InvalidCurve(format!(
                    "control point {i} has {} coordinates, expected {dim}",
                    p.len()
                )));
            }
            if p.iter().any(|c| !c.is_finite()) {
                return Err(Error::InvalidCurve(format!(
                    "control point {i} has a non-finite coordinate"
                )));
            }
            pts.push(Vec3::new(p[0], p[1], if dim == 3 { p[2] } else { 0.0 }));
        }
        Self::from_points(degree, dim, pts, weights, knots)
    }

    pub fn from_points(
        degree: usize,
        dim: usize,
        control_points: Vec<Vec3>,
        weights: Vec<f64>,
        knots: Vec<f64>,
    ) -> Result<Curve> {
        let n = control_points.len();
        if degree < 1 {
            return Err(Error::InvalidCurve("degree must be at least 1".into()));
        }
        if n <= degree {
            return Err(Error::InvalidCurve(format!(
                "a degree-{degree} curve needs at least {} control points, got {n}",
                degree.saturating_add(1)
            )));
        }
        if weights.len() != n {
            return Err(Error::InvalidCurve(format!(
                "weights length {} must equal control point count {n}",
                weights.len()
            )));
        }
        if let Some(i) = weights.iter().position(|w| !(w.is_finite() && *w > 0.0)) {
            return Err(Error::InvalidCurve(format!(
                "weight {i} must be positive and finite, got {}",
                weights[i]
            )));
        }
        if knots.len() != n + degree + 1 {
            return Err(Error::InvalidCurve(format!(
                "knot vector length {} must equal control points + degree + 1 = {}",
                knots.len(),
                n + degree + 1
            )));
        }
        if knots.iter().any(|k| !k.is_finite()) {
            return Err(Error::InvalidCurve("knot vector has a non-finite entry".into()));
        }
        if let Some(i) = knots.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::InvalidCurve(format!(
                "knot vector must be non-decreasing (knots[{}] > knots[{}])",
                i,
                i + 1
            )));
        }
        if knots[0] != 0.0 || knots[knots.len() - 1] != 1.0 {
            return Err(Error::InvalidCurve(
                "knot vector must start at 0 and end at 1".into(),
            ));
        }
        let m = knots.len();
        if knots[..=degree].iter().any(|&k| k != 0.0) || knots[m - degree - 1..].iter().any(|&k| k != 1.0)
        {
            return Err(Error::InvalidCurve(format!(
                "knot vector must be clamped (first and last knot repeated {} times)",
                degree + 1
            )));
        }
        Ok(Curve {
            degree,
            dim,
            control_points,
            weights,
            knots,
        })
    }

    /// Uniform clamped knot vector for `n` control points.
    pub fn uniform_knots(degree: usize, n: usize) -> Vec<f64> {
        let spans = n - degree;
        let mut knots = vec![0.0; degree + 1];
        for i in 1..spans {
            knots.push(i as f64 / spans as f64);
        }
        knots.extend(std::iter::repeat_n(1.0, degree + 1));
        knots
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn control_points(&self) -> &[Vec3] {
        &self.control_points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    /// Distinct interior knot values, where the curve may lose smoothness.
    pub fn breaks(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for &k in &self.knots {
            if k > 0.0 && k < 1.0 && out.last() != Some(&k) {
                out.push(k);
            }
        }
        out
    }

    fn check_param(u: f64) -> Result<()> {
        if (0.0..=1.0).contains(&u) {
            Ok(())
        } else {
            Err(Error::domain("u", u, "[0, 1]"))
        }
    }

    fn find_span(&self, u: f64) -> usize {
        let n = self.control_points.len() - 1;
        let p = self.degree;
        if u >= self.knots[n + 1] {
            return n;
        }
        if u <= self.knots[p] {
            return p;
        }
        let (mut lo, mut hi) = (p, n + 1);
        let mut mid = (lo + hi) / 2;
        while u < self.knots[mid] || u >= self.knots[mid + 1] {
            if u < self.knots[mid] {
                hi = mid;
            } else {
                lo = mid;
            }
            mid = (lo + hi) / 2;
        }
        mid
    }

    /// Non-zero basis functions and their derivatives up to `nd` at `u`.
    /// Row `k` holds the k-th derivative of `N[span-p..=span]`.
    fn basis_derivs(&self, span: usize, u: f64, nd: usize) -> Vec<Vec<f64>> {
        let p = self.degree;
        let k = &self.knots;
        let mut ndu = vec![vec![0.0; p + 1]; p + 1];
        let mut left = vec![0.0; p + 1];
        let mut right = vec![0.0; p + 1];
        ndu[0][0] = 1.0;
        for j in 1..=p {
            left[j] = u - k[span + 1 - j];
            right[j] = k[span + j] - u;
            let mut saved = 0.0;
            for r in 0..j {
                ndu[j][r] = right[r + 1] + left[j - r];
                let temp = ndu[r][j - 1] / ndu[j][r];
                ndu[r][j] = saved + right[r + 1] * temp;
                saved = left[j - r] * temp;
            }
            ndu[j][j] = saved;
        }

        let mut ders = vec![vec![0.0; p + 1]; nd + 1];
        for j in 0..=p {
            ders[0][j] = ndu[j][p];
        }
        let mut a = vec![vec![0.0; p + 1]; 2];
        for r in 0..=p {
            let (mut s1, mut s2) = (0usize, 1usize);
            a[0][0] = 1.0;
            for kk in 1..=nd.min(p) {
                let mut d = 0.0;
                let rk = r as isize - kk as isize;
                let pk = p - kk;
                if r >= kk {
                    a[s2][0] = a[s1][0] / ndu[pk + 1][rk as usize];
                    d = a[s2][0] * ndu[rk as usize][pk];
                }
                let j1 = if rk >= -1 { 1 } else { (-rk) as usize };
                let j2 = if (r as isize - 1) <= pk as isize { kk - 1 } else { p - r };
                for j in j1..=j2 {
                    let idx = (rk + j as isize) as usize;
                    a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][idx];
                    d += a[s2][j] * ndu[idx][pk];
                }
                if r <= pk {
                    a[s2][kk] = -a[s1][kk - 1] / ndu[pk + 1][r];
                    d += a[s2][kk] * ndu[r][pk];
                }
                ders[kk][r] = d;
                std::mem::swap(&mut s1, &mut s2);
            }
        }
        let mut fac = p as f64;
        for kk in 1..=nd.min(p) {
            for v in ders[kk].iter_mut() {
                *v *= fac;
            }
            fac *= (p - kk) as f64;
        }
        ders
    }

    /// Position and the first `nd` derivatives (`nd <= 2`) of the rational curve.
    fn eval_derivs(&self, u: f64, nd: usize) -> [Vec3; 3] {
        let span = self.find_span(u);
        let basis = self.basis_derivs(span, u, nd);
        let p = self.degree;
        // homogeneous numerator A^(k) and denominator w^(k)
        let mut aw = [Vec3::ZERO; 3];
        let mut w = [0.0; 3];
        for (k, row) in basis.iter().enumerate() {
            for (j, &nb) in row.iter().enumerate() {
                let idx = span - p + j;
                let wi = self.weights[idx];
                aw[k] += self.control_points[idx] * (nb * wi);
                w[k] += nb * wi;
            }
        }
        let c0 = aw[0] * (1.0 / w[0]);
        let mut out = [c0, Vec3::ZERO, Vec3::ZERO];
        if nd >= 1 {
            out[1] = (aw[1] - c0 * w[1]) * (1.0 / w[0]);
        }
        if nd >= 2 {
            out[2] = (aw[2] - out[1] * (2.0 * w[1]) - c0 * w[2]) * (1.0 / w[0]);
        }
        out
    }

    pub fn evaluate(&self, u: f64) -> Result<Vec3> {
        Self::check_param(u)?;
        Ok(self.eval_derivs(u, 0)[0])
    }

    /// `[C'(u)]` for `order == 1`, `[C'(u), C''(u)]` for `order == 2`.
    pub fn derivatives(&self, u: f64, order: usize) -> Result<Vec<Vec3>> {
        if order != 1 && order != 2 {
            return Err(Error::UnsupportedOrder(order));
        }
        Self::check_param(u)?;
        let d = self.eval_derivs(u, order);
        Ok(d[1..=order].to_vec())
    }

    /// Position, first and second derivative in one pass.
    pub fn frame(&self, u: f64) -> Result<(Vec3, Vec3, Vec3)> {
        Self::check_param(u)?;
        let [c, d1, d2] = self.eval_derivs(u, 2);
        Ok((c, d1, d2))
    }

    pub(crate) fn speed_unchecked(&self, u: f64) -> f64 {
        self.eval_derivs(u, 1)[1].norm()
    }

    /// Radius of curvature `|C'|^3 / |C' x C''|`, `f64::INFINITY` on straight spans.
    pub fn curvature_radius(&self, u: f64) -> Result<f64> {
        Self::check_param(u)?;
        let [_, d1, d2] = self.eval_derivs(u, 2);
        let speed = d1.norm();
        if speed == 0.0 || !speed.is_finite() {
            return Err(Error::SingularParameterization { u });
        }
        let speed3 = speed * speed * speed;
        let curvature = d1.cross(d2).norm() / speed3;
        if curvature < STRAIGHTNESS_THRESHOLD {
            Ok(f64::INFINITY)
        } else {
            Ok(1.0 / curvature)
        }
    }

    /// Arc length over `[u_a, u_b]` to relative tolerance `tol`.
    pub fn arc_length(&self, u_a: f64, u_b: f64, tol: f64) -> Result<f64> {
        Self::check_param(u_a)?;
        Self::check_param(u_b)?;
        if u_a > u_b {
            return Err(Error::domain("u_a", u_a, "[0, u_b]"));
        }
        if u_a == u_b {
            return Ok(0.0);
        }
        let tol = if tol > 0.0 { tol } else { DEFAULT_ARC_TOL };
        let mut cuts = vec![u_a];
        cuts.extend(self.breaks().into_iter().filter(|&k| k > u_a && k < u_b));
        cuts.push(u_b);

        let f = |u: f64| self.speed_unchecked(u);
        let coarse: f64 = cuts.windows(2).map(|w| gauss_legendre(&f, w[0], w[1])).sum();
        let abs_tol = (tol * coarse).max(f64::MIN_POSITIVE);
        let total_width = u_b - u_a;
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let share = abs_tol * (w[1] - w[0]) / total_width;
            let whole = gauss_legendre(&f, w[0], w[1]);
            total += adaptive_gl(&f, w[0], w[1], whole, share, 0);
        }
        Ok(total)
    }

    /// Parameter `u >= u_start` whose arc length from `u_start` equals `length`.
    /// Lengths beyond the curve end return 1.
    pub fn param_at_length(&self, u_start: f64, length: f64, tol: f64) -> Result<f64> {
        Self::check_param(u_start)?;
        if length <= 0.0 {
            return Ok(u_start);
        }
        let remaining = self.arc_length(u_start, 1.0, tol)?;
        if length >= remaining {
            return Ok(1.0);
        }
        let (mut lo, mut hi) = (u_start, 1.0);
        let mut u = u_start + (1.0 - u_start) * (length / remaining);
        for _ in 0..100 {
            let s = self.arc_length(u_start, u, tol)?;
            let err = s - length;
            if err.abs() <= tol * length.max(1e-12) {
                return Ok(u);
            }
            if err > 0.0 {
                hi = u;
            } else {
                lo = u;
            }
            let speed = self.speed_unchecked(u);
            let mut next = if speed > 0.0 { u - err / speed } else { f64::NAN };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if hi - lo <= f64::EPSILON * 4.0 {
                return Ok(next);
            }
            u = next;
        }
        Ok(u)
    }
}

// 7-point Gauss-Legendre nodes and weights on [-1, 1].
const GL_NODES: [f64; 7] = [
    0.0,
    0.405_845_151_377_397_2,
    -0.405_845_151_377_397_2,
    0.741_531_185_599_394_4,
    -0.741_531_185_599_394_4,
    0.949_107_912_342_758_5,
    -0.949_107_912_342_758_5,
];
const GL_WEIGHTS: [f64; 7] = [
    0.417_959_183_673_469_4,
    0.381_830_050_505_118_9,
    0.381_830_050_505_118_9,
    0.279_705_391_489_276_7,
    0.279_705_391_489_276_7,
    0.129_484_966_168_869_7,
    0.129_484_966_168_869_7,
];

fn gauss_legendre(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    GL_NODES
        .iter()
        .zip(GL_WEIGHTS.iter())
        .map(|(&x, &w)| w * f(mid + half * x))
        .sum::<f64>()
        * half
}

fn adaptive_gl(f: &impl Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let left = gauss_legendre(f, a, m);
    let right = gauss_legendre(f, m, b);
    let split = left + right;
    if (split - whole).abs() <= tol || depth >= 40 || m <= a || m >= b {
        return split;
    }
    adaptive_gl(f, a, m, left, 0.5 * tol, depth + 1) + adaptive_gl(f, m, b, right, 0.5 * tol, depth + 1)
}
