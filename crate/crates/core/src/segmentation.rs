//! Breaking-point detection on the feed rate scatter and splitting into blocks.

use serde::{Deserialize, Serialize};

use crate::chordscan::{FeedrateScatter, Limits, ScatterPoint};
use crate::error::{Error, Result};
use crate::geometry::{Curve, DEFAULT_ARC_TOL};

/// Relative tolerance (against `v_max`) below which a block counts as constant.
pub const CONSTANT_TOL: f64 = 1e-9;

/// Multiplier on the median screening factor used when no threshold is given.
pub const DEFAULT_THRESHOLD_FACTOR: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockKind {
    Accel,
    Decel,
    Constant,
}

impl BlockKind {
    pub fn classify(v_s: f64, v_e: f64, v_max: f64) -> Self {
        let tol = CONSTANT_TOL * v_max;
        if (v_e - v_s).abs() <= tol {
            BlockKind::Constant
        } else if v_e > v_s {
            BlockKind::Accel
        } else {
            BlockKind::Decel
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BlockKind::Accel => "accel",
            BlockKind::Decel => "decel",
            BlockKind::Constant => "constant",
        }
    }
}

impl std::str::FromStr for BlockKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "accel" => Ok(BlockKind::Accel),
            "decel" => Ok(BlockKind::Decel),
            "constant" => Ok(BlockKind::Constant),
            other => Err(format!("unknown block kind `{other}`")),
        }
    }
}

/// One acceleration, deceleration or constant-feed span of the path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Block {
    pub u_s: f64,
    pub u_e: f64,
    pub v_s: f64,
    pub v_e: f64,
    /// Arc length (mm).
    pub length: f64,
    /// Duration (s); zero until the block has been scheduled.
    pub duration: f64,
    pub shape_s: f64,
    pub kind: BlockKind,
}

impl Block {
    /// Re-derives `kind` from the end feeds. A constant block gets exactly equal ends.
    pub fn reclassify(&mut self, v_max: f64) {
        self.kind = BlockKind::classify(self.v_s, self.v_e, v_max);
        if self.kind == BlockKind::Constant {
            let v = self.v_s.min(self.v_e);
            self.v_s = v;
            self.v_e = v;
        }
    }
}

/// Absolute change of slope of the scatter at `cur`.
pub fn screening_factor(prev: ScatterPoint, cur: ScatterPoint, next: ScatterPoint) -> Result<f64> {
    if !(prev.u < cur.u && cur.u < next.u) {
        return Err(Error::MalformedScatter(format!(
            "u not strictly increasing around u = {}",
            cur.u
        )));
    }
    let ahead = (next.v - cur.v) / (next.u - cur.u);
    let behind = (cur.v - prev.v) / (cur.u - prev.u);
    Ok((ahead - behind).abs())
}

/// Screening factors for every interior point (index `i` of the result is scatter point `i + 1`).
pub fn screening_factors(scatter: &FeedrateScatter) -> Result<Vec<f64>> {
    scatter
        .points
        .windows(3)
        .map(|w| screening_factor(w[0], w[1], w[2]))
        .collect()
}

/// Median screening factor times [`DEFAULT_THRESHOLD_FACTOR`].
pub fn default_threshold(scatter: &FeedrateScatter) -> Result<f64> {
    let mut mu = screening_factors(scatter)?;
    if mu.is_empty() {
        return Ok(0.0);
    }
    mu.sort_by(f64::total_cmp);
    let n = mu.len();
    let median = if n % 2 == 1 {
        mu[n / 2]
    } else {
        0.5 * (mu[n / 2 - 1] + mu[n / 2])
    };
    Ok(DEFAULT_THRESHOLD_FACTOR * median)
}

/// Trend-reversal test at an interior point. A step onto or off a plateau
/// counts as a reversal; a point inside a plateau does not.
pub fn is_trend_reversal(prev: f64, cur: f64, next: f64) -> bool {
    let behind = cur - prev;
    let ahead = next - cur;
    match (behind == 0.0, ahead == 0.0) {
        (true, true) => false,
        (true, false) | (false, true) => true,
        (false, false) => (behind > 0.0) != (ahead > 0.0),
    }
}

/// Indices of the breaking points: the endpoints plus every interior point
/// whose screening factor exceeds `mu_s` and where the feed trend reverses.
pub fn find_breakpoints(scatter: &FeedrateScatter, mu_s: f64) -> Result<Vec<usize>> {
    let pts = &scatter.points;
    if pts.len() < 2 {
        return Err(Error::MalformedScatter("fewer than two points".into()));
    }
    let mut out = vec![0];
    for i in 1..pts.len() - 1 {
        let mu = screening_factor(pts[i - 1], pts[i], pts[i + 1])?;
        if mu > mu_s && is_trend_reversal(pts[i - 1].v, pts[i].v, pts[i + 1].v) {
            out.push(i);
        }
    }
    out.push(pts.len() - 1);
    Ok(out)
}

/// One block per pair of consecutive breaking points.
pub fn build_blocks(
    curve: &Curve,
    scatter: &FeedrateScatter,
    breakpoints: &[usize],
    limits: &Limits,
) -> Result<Vec<Block>> {
    if breakpoints.len() < 2 {
        return Err(Error::MalformedInput(format!(
            "need at least two breaking points, got {}",
            breakpoints.len()
        )));
    }
    if breakpoints.windows(2).any(|w| w[1] <= w[0]) || breakpoints[breakpoints.len() - 1] >= scatter.len() {
        return Err(Error::MalformedInput(
            "breaking point indices must be strictly increasing and inside the scatter".into(),
        ));
    }
    breakpoints
        .windows(2)
        .map(|w| {
            let (a, b) = (scatter.points[w[0]], scatter.points[w[1]]);
            let mut block = Block {
                u_s: a.u,
                u_e: b.u,
                v_s: a.v,
                v_e: b.v,
                length: curve.arc_length(a.u, b.u, DEFAULT_ARC_TOL)?,
                duration: 0.0,
                shape_s: limits.shape_s,
                kind: BlockKind::Constant,
            };
            block.kind = BlockKind::classify(a.v, b.v, limits.v_max);
            Ok(block)
        })
        .collect()
}

/// Threshold selection, breakpoint search and block construction in one call.
pub fn segment(curve: &Curve, scatter: &FeedrateScatter, limits: &Limits) -> Result<Vec<Block>> {
    let mu_s = match limits.mu_s {
        Some(mu) => mu,
        None => default_threshold(scatter)?,
    };
    let breakpoints = find_breakpoints(scatter, mu_s)?;
    build_blocks(curve, scatter, &breakpoints, limits)
}
