//! Real roots of small polynomials on a closed interval.
//!
//! Roots of the derivative split the interval into monotone pieces; each piece
//! holds at most one root, found by bisection. Even-multiplicity roots show up
//! as critical points with a vanishing residual.

use crate::error::{Error, Result};

pub const MAX_DEGREE: usize = 6;
pub const DEDUP_TOL: f64 = 1e-7;

const TRIM_RATIO: f64 = 1e-14;
const RESIDUAL_RATIO: f64 = 1e-10;

/// Evaluates `coeffs[0] + coeffs[1] x + ...`.
pub fn eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn magnitude(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x.abs() + c.abs())
}

fn derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs.iter().enumerate().skip(1).map(|(i, &c)| i as f64 * c).collect()
}

fn trim(coeffs: &[f64]) -> &[f64] {
    let scale = coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let mut n = coeffs.len();
    while n > 0 && coeffs[n - 1].abs() <= TRIM_RATIO * scale {
        n -= 1;
    }
    &coeffs[..n]
}

fn bisect(coeffs: &[f64], mut a: f64, mut b: f64) -> f64 {
    let mut fa = eval(coeffs, a);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = eval(coeffs, m);
        if fm == 0.0 {
            return m;
        }
        if (fm > 0.0) == (fa > 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn roots_in(coeffs: &[f64], lo: f64, hi: f64) -> Vec<f64> {
    let c = trim(coeffs);
    match c.len() {
        0 | 1 => return Vec::new(),
        2 => {
            let x = -c[0] / c[1];
            return if (lo..=hi).contains(&x) { vec![x] } else { Vec::new() };
        }
        _ => {}
    }
    let mut knots = vec![lo];
    knots.extend(roots_in(&derivative(c), lo, hi).into_iter().filter(|&x| x > lo && x < hi));
    knots.push(hi);

    let near_zero = |x: f64| eval(c, x).abs() <= RESIDUAL_RATIO * magnitude(c, x).max(f64::MIN_POSITIVE);
    let crossings: Vec<Option<f64>> = knots
        .windows(2)
        .map(|w| {
            let (fa, fb) = (eval(c, w[0]), eval(c, w[1]));
            (fa != 0.0 && fb != 0.0 && (fa > 0.0) != (fb > 0.0)).then(|| bisect(c, w[0], w[1]))
        })
        .collect();
    let mut out = Vec::new();
    for (i, &k) in knots.iter().enumerate() {
        // a touching root leaves no sign change in the neighbouring monotone pieces
        let left = i > 0 && crossings[i - 1].is_some();
        let right = i < crossings.len() && crossings[i].is_some();
        if near_zero(k) && !(left || right) {
            out.push(k);
        }
        if let Some(Some(x)) = crossings.get(i) {
            out.push(*x);
        }
    }
    out
}

/// Sorted real roots of the polynomial in `[lo, hi]`, coefficients in ascending order.
pub fn solve_real_roots(coeffs: &[f64], lo: f64, hi: f64) -> Result<Vec<f64>> {
    if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
        return Err(Error::MalformedInput(format!("invalid root interval [{lo}, {hi}]")));
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::MalformedInput("non-finite polynomial coefficient".into()));
    }
    let c = trim(coeffs);
    if c.len() > MAX_DEGREE + 1 {
        return Err(Error::MalformedInput(format!(
            "polynomial degree {} exceeds {MAX_DEGREE}",
            c.len() - 1
        )));
    }
    let mut roots = roots_in(c, lo, hi);
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|b, a| (*b - *a).abs() <= DEDUP_TOL);
    Ok(roots)
}

/// Coefficients of `prod (x - r_i)`.
pub fn from_roots(roots: &[f64]) -> Vec<f64> {
    let mut c = vec![1.0];
    for &r in roots {
        let mut next = vec![0.0; c.len() + 1];
        for (i, &ci) in c.iter().enumerate() {
            next[i + 1] += ci;
            next[i] -= r * ci;
        }
        c = next;
    }
    c
}

/// Product of two polynomials.
pub fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Sum of two polynomials.
pub fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len().max(b.len())];
    for (i, &x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, &y) in b.iter().enumerate() {
        out[i] += y;
    }
    out
}

/// `k * a`.
pub fn scale(a: &[f64], k: f64) -> Vec<f64> {
    a.iter().map(|x| x * k).collect()
}
