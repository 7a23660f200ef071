//! Per-junction feed adjustment: peaks between two transitions, transitions
//! growing into a constant phase, and the accelerate / cruise / decelerate
//! triple.

use crate::chordscan::Limits;
use crate::error::{Error, Result};
use crate::poly::{self, solve_real_roots};
use crate::profile::ConstraintCoeffs;

/// Relative slack on lengths when testing a transition for feasibility.
pub const LENGTH_SLACK: f64 = 1e-10;

/// Shortest transition between `v_a` and `v_b` that respects the acceleration limit.
pub fn accel_length(c: &ConstraintCoeffs, v_a: f64, v_b: f64, limits: &Limits) -> f64 {
    if v_a == v_b || limits.a_max.is_infinite() {
        return 0.0;
    }
    c.accel * (v_b * v_b - v_a * v_a).abs() / limits.a_max
}

/// Shortest transition between `v_a` and `v_b` that respects the jerk limit.
pub fn jerk_length(c: &ConstraintCoeffs, v_a: f64, v_b: f64, limits: &Limits) -> f64 {
    if v_a == v_b || limits.j_max.is_infinite() {
        return 0.0;
    }
    let sum = v_a + v_b;
    (c.jerk * (v_b - v_a).abs() * sum * sum / limits.j_max).sqrt()
}

/// Shortest feasible transition between two feeds.
pub fn min_length(c: &ConstraintCoeffs, v_a: f64, v_b: f64, limits: &Limits) -> f64 {
    accel_length(c, v_a, v_b, limits).max(jerk_length(c, v_a, v_b, limits))
}

/// True when a transition of `length` between `v_a` and `v_b` respects both limits.
pub fn fits(c: &ConstraintCoeffs, v_a: f64, v_b: f64, length: f64, limits: &Limits) -> bool {
    min_length(c, v_a, v_b, limits) <= length * (1.0 + LENGTH_SLACK)
}

/// Largest feed reachable from `v_low` within `length`.
pub fn tight_high(c: &ConstraintCoeffs, v_low: f64, length: f64, limits: &Limits) -> f64 {
    if length <= 0.0 {
        return v_low;
    }
    let by_accel = if limits.a_max.is_infinite() {
        f64::INFINITY
    } else {
        (v_low * v_low + length * limits.a_max / c.accel).sqrt()
    };
    let by_jerk = if limits.j_max.is_infinite() {
        f64::INFINITY
    } else {
        tight_high_jerk(c, v_low, length, limits)
    };
    by_accel.min(by_jerk)
}

/// Root of `jerk (v - v0)(v + v0)^2 = j_max L^2` above `v0`.
fn tight_high_jerk(c: &ConstraintCoeffs, v0: f64, length: f64, limits: &Limits) -> f64 {
    let rhs = limits.j_max * length * length / c.jerk;
    let hi = v0 + rhs.cbrt();
    let cubic = [-v0 * v0 * v0 - rhs, -v0 * v0, v0, 1.0];
    match solve_real_roots(&cubic, v0, hi) {
        Ok(roots) if !roots.is_empty() => roots[roots.len() - 1],
        // the cubic is increasing on [v0, hi] with a sign change, so this is only reached on round-off
        _ => hi,
    }
}

/// Lowest feed the peak at a junction may take, or an error when no feed at or
/// above both neighbours is feasible.
pub fn adjust_peak_junction(
    v1: f64,
    v2: f64,
    v3: f64,
    l1: f64,
    l2: f64,
    c: &ConstraintCoeffs,
    limits: &Limits,
) -> Result<f64> {
    let floor = v1.max(v3);
    if !(v2 >= floor) {
        return Err(Error::MalformedInput(format!(
            "junction feed {v2} is not a peak over {v1} and {v3}"
        )));
    }
    if fits(c, v1, v2, l1, limits) && fits(c, v2, v3, l2, limits) {
        return Ok(v2);
    }
    let best = v2.min(tight_high(c, v1, l1, limits)).min(tight_high(c, v3, l2, limits));
    if best < floor {
        return Err(Error::InfeasibleJunction(format!(
            "peak between {v1} mm/s ({l1} mm) and {v3} mm/s ({l2} mm) cannot stay above {floor} mm/s"
        )));
    }
    Ok(best)
}

/// Result of growing a transition into an adjacent constant phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Extension {
    pub trans_length: f64,
    pub const_length: f64,
    pub v_const: f64,
}

/// Grows the transition from `v_low` up to `v_const` by taking length from the
/// constant phase. When the whole constant phase is not enough, it is used up
/// and the constant feed drops to what the combined length allows.
pub fn extend_into_constant(
    v_low: f64,
    trans_length: f64,
    v_const: f64,
    const_length: f64,
    c: &ConstraintCoeffs,
    limits: &Limits,
) -> Extension {
    let unchanged = Extension {
        trans_length,
        const_length,
        v_const,
    };
    if fits(c, v_low, v_const, trans_length, limits) {
        return unchanged;
    }
    let need = min_length(c, v_low, v_const, limits) - trans_length;
    if need <= const_length {
        return Extension {
            trans_length: trans_length + need,
            const_length: const_length - need,
            v_const,
        };
    }
    let total = trans_length + const_length;
    Extension {
        trans_length: total,
        const_length: 0.0,
        v_const: tight_high(c, v_low, total, limits).min(v_const),
    }
}

/// Optimal accelerate / cruise / decelerate split of a span.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdjustmentOutcome {
    pub v2: f64,
    /// Transition in, cruise, transition out (mm).
    pub lengths: [f64; 3],
}

impl AdjustmentOutcome {
    pub fn duration(&self, v1: f64, v3: f64) -> f64 {
        triple_time(v1, self.v2, v3, self.lengths)
    }
}

/// Traversal time of accelerate / cruise / decelerate with symmetric transitions.
pub fn triple_time(v1: f64, v2: f64, v3: f64, lengths: [f64; 3]) -> f64 {
    let [l1, l2, l3] = lengths;
    let part = |l: f64, a: f64, b: f64| if l == 0.0 { 0.0 } else { 2.0 * l / (a + b) };
    part(l1, v1, v2) + part(l2, v2, v2) + part(l3, v2, v3)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Binding {
    Accel,
    Jerk,
    Fixed,
}

struct Side<'a> {
    v: f64,
    floor: f64,
    c: &'a ConstraintCoeffs,
    limits: &'a Limits,
}

impl Side<'_> {
    fn length(&self, v2: f64) -> f64 {
        min_length(self.c, self.v, v2, self.limits).max(self.floor)
    }

    fn binding(&self, v2: f64) -> Binding {
        let acc = accel_length(self.c, self.v, v2, self.limits);
        let jerk = jerk_length(self.c, self.v, v2, self.limits);
        if self.floor >= acc.max(jerk) {
            Binding::Fixed
        } else if acc >= jerk {
            Binding::Accel
        } else {
            Binding::Jerk
        }
    }

    fn a(&self) -> f64 {
        self.c.accel / self.limits.a_max
    }

    fn b(&self) -> f64 {
        self.c.jerk / self.limits.j_max
    }

    /// `v2 * dpsi/dv2 - psi`, where the side adds `psi / v2` to the span time.
    fn marginal(&self, v2: f64) -> f64 {
        let vi = self.v;
        match self.binding(v2) {
            Binding::Accel => self.a() * (v2 * v2 - vi * vi),
            Binding::Jerk => (self.b() * (v2 - vi).max(0.0)).sqrt() * (0.5 * v2 + vi),
            Binding::Fixed => self.floor * (vi * vi + 2.0 * vi * v2 - v2 * v2) / ((v2 + vi) * (v2 + vi)),
        }
    }

    /// Acceleration/jerk crossover polynomial: positive where acceleration binds.
    fn crossover(&self) -> Vec<f64> {
        let (a, b, v) = (self.a(), self.b(), self.v);
        let a2 = a * a;
        vec![a2 * v.powi(4) + b * v.powi(3), b * v * v, -2.0 * a2 * v * v - b * v, -b, a2]
    }

    /// `b (v2 - v)(v2/2 + v)^2`: the squared jerk-bound marginal.
    fn jerk_marginal_sq(&self) -> Vec<f64> {
        let half = [self.v, 0.5];
        poly::scale(&poly::mul(&[-self.v, 1.0], &poly::mul(&half, &half)), self.b())
    }
}

/// Time-optimal split of a span of `total` mm between feeds `v1` and `v3`,
/// cruising at most at `v_ceiling`.
pub fn adjust_with_constant(
    v1: f64,
    v3: f64,
    total: f64,
    v_ceiling: f64,
    c: &ConstraintCoeffs,
    limits: &Limits,
) -> Result<AdjustmentOutcome> {
    adjust_with_constant_bounded(v1, v3, total, v_ceiling, [0.0, 0.0], c, limits)
}

/// As [`adjust_with_constant`], with lower bounds on the two transition lengths.
pub fn adjust_with_constant_bounded(
    v1: f64,
    v3: f64,
    total: f64,
    v_ceiling: f64,
    min_lengths: [f64; 2],
    c: &ConstraintCoeffs,
    limits: &Limits,
) -> Result<AdjustmentOutcome> {
    let v_lo = v1.max(v3);
    if !(total >= 0.0 && v1 > 0.0 && v3 > 0.0) {
        return Err(Error::MalformedInput(format!(
            "span needs positive end feeds and non-negative length, got {v1}, {v3}, {total}"
        )));
    }
    if !(v_ceiling >= v_lo) {
        return Err(Error::MalformedInput(format!(
            "ceiling {v_ceiling} mm/s below end feeds {v1} and {v3} mm/s"
        )));
    }
    let left = Side {
        v: v1,
        floor: min_lengths[0],
        c,
        limits,
    };
    let right = Side {
        v: v3,
        floor: min_lengths[1],
        c,
        limits,
    };
    let need = |v2: f64| left.length(v2) + right.length(v2);
    let budget = total * (1.0 + LENGTH_SLACK);
    if need(v_lo) > budget {
        return Err(Error::InfeasibleJunction(format!(
            "{total} mm cannot join {v1} and {v3} mm/s"
        )));
    }

    // largest feasible cruise feed; the transition lengths grow with v2
    let v_high = if need(v_ceiling) <= budget {
        v_ceiling
    } else {
        let (mut lo, mut hi) = (v_lo, v_ceiling);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if need(mid) <= budget {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    };

    let mut edges = vec![v_lo, v_high];
    if v_high > v_lo {
        for side in [&left, &right] {
            if limits.a_max.is_finite() && limits.j_max.is_finite() {
                edges.extend(solve_real_roots(&side.crossover(), v_lo, v_high)?);
            }
            if side.floor > 0.0 {
                edges.push(tight_high(c, side.v, side.floor, limits).clamp(v_lo, v_high));
            }
        }
    }
    edges.sort_by(f64::total_cmp);
    edges.dedup();

    let mut candidates = edges.clone();
    for w in edges.windows(2) {
        candidates.extend(stationary_points(&left, &right, total, w[0], w[1])?);
    }

    let mut best: Option<(f64, AdjustmentOutcome)> = None;
    for v2 in candidates {
        let l1 = left.length(v2);
        let l3 = right.length(v2);
        if l1 + l3 > budget {
            continue;
        }
        let lengths = [l1, (total - l1 - l3).max(0.0), l3];
        let time = triple_time(v1, v2, v3, lengths);
        let outcome = AdjustmentOutcome { v2, lengths };
        let better = match &best {
            None => true,
            Some((t, o)) => time < t * (1.0 - 1e-12) || (time <= t * (1.0 + 1e-12) && v2 > o.v2),
        };
        if better {
            best = Some((time, outcome));
        }
    }
    best.map(|(_, o)| o).ok_or_else(|| {
        Error::InfeasibleJunction(format!("no feasible cruise feed between {v1} and {v3} mm/s"))
    })
}

/// Interior stationary points of the span time on `[lo, hi]`, where the
/// binding constraint on each side does not change.
fn stationary_points(left: &Side, right: &Side, total: f64, lo: f64, hi: f64) -> Result<Vec<f64>> {
    if hi <= lo {
        return Ok(Vec::new());
    }
    let mid = 0.5 * (lo + hi);
    let residual = |v: f64| left.marginal(v) + right.marginal(v) - total;
    let bl = left.binding(mid);
    let br = right.binding(mid);

    let candidates = match (bl, br) {
        (Binding::Accel, Binding::Accel) => {
            let a = left.a();
            solve_real_roots(&[-a * (left.v * left.v + right.v * right.v) - total, 0.0, 2.0 * a], lo, hi)?
        }
        (Binding::Jerk, Binding::Accel) | (Binding::Accel, Binding::Jerk) => {
            let (jerk_side, accel_side) = if bl == Binding::Jerk { (left, right) } else { (right, left) };
            let a = accel_side.a();
            let vr = accel_side.v;
            let rest = [total + a * vr * vr, 0.0, -a];
            let eq = poly::add(&jerk_side.jerk_marginal_sq(), &poly::scale(&poly::mul(&rest, &rest), -1.0));
            solve_real_roots(&eq, lo, hi)?
        }
        (Binding::Jerk, Binding::Jerk) => {
            let p = left.jerk_marginal_sq();
            let q = right.jerk_marginal_sq();
            let inner = poly::add(&[total * total], &poly::scale(&poly::add(&p, &q), -1.0));
            let eq = poly::add(&poly::scale(&poly::mul(&p, &q), 4.0), &poly::scale(&poly::mul(&inner, &inner), -1.0));
            solve_real_roots(&eq, lo, hi)?
        }
        _ => bracket_roots(&residual, lo, hi, 32),
    };
    // squaring admits spurious roots; keep those of the unsquared condition
    Ok(candidates
        .into_iter()
        .filter(|&v| residual(v).abs() <= 1e-6 * total.max(1e-12))
        .collect())
}

fn bracket_roots(g: &dyn Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let mut out = Vec::new();
    let step = (hi - lo) / n as f64;
    let mut a = lo;
    let mut ga = g(a);
    for i in 1..=n {
        let b = if i == n { hi } else { lo + step * i as f64 };
        let gb = g(b);
        if ga == 0.0 {
            out.push(a);
        } else if (ga > 0.0) != (gb > 0.0) && gb != 0.0 {
            let (mut x0, mut x1, mut g0) = (a, b, ga);
            for _ in 0..200 {
                let m = 0.5 * (x0 + x1);
                if m <= x0 || m >= x1 {
                    break;
                }
                let gm = g(m);
                if (gm > 0.0) == (g0 > 0.0) {
                    x0 = m;
                    g0 = gm;
                } else {
                    x1 = m;
                }
            }
            out.push(0.5 * (x0 + x1));
        }
        a = b;
        ga = gb;
    }
    out
}
