//! Whole-path sweep: lowers breakpoint feeds until every block fits the limits.

use log::debug;

use crate::chordscan::{FeedrateScatter, Limits};
use crate::error::{Error, Result};
use crate::geometry::{Curve, DEFAULT_ARC_TOL};
use crate::profile::{ConstraintCoeffs, ProfileFamily};
use crate::segmentation::{Block, BlockKind, CONSTANT_TOL};
use crate::sprofile::block_duration;

use super::junction::{
    adjust_peak_junction, adjust_with_constant_bounded, extend_into_constant, fits, tight_high,
};

/// Relative tolerance of the final peak check.
pub const VALIDATION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleOptions {
    /// Sweeps stop once no feed moves by more than this (mm/s).
    pub feed_tol: f64,
    pub max_sweeps: usize,
}

impl Default for ScheduleOptions {
    fn default() -> Self {
        ScheduleOptions {
            feed_tol: 1e-9,
            max_sweeps: 1000,
        }
    }
}

/// Feeds at the breakpoints and the block lengths between them.
#[derive(Debug, Clone)]
struct Chain {
    v: Vec<f64>,
    len: Vec<f64>,
    v_max: f64,
    /// Largest decrease in the current sweep.
    moved: f64,
    snapped: bool,
}

impl Chain {
    fn blocks(&self) -> usize {
        self.len.len()
    }

    fn lower(&mut self, node: usize, value: f64) {
        if value < self.v[node] {
            self.moved = self.moved.max(self.v[node] - value);
            self.v[node] = value;
        }
    }

    /// Makes nearly level blocks exactly level.
    fn snap_level_blocks(&mut self) {
        let tol = CONSTANT_TOL * self.v_max;
        for k in 0..self.blocks() {
            let (a, b) = (self.v[k], self.v[k + 1]);
            if a != b && (a - b).abs() <= tol {
                let low = a.min(b);
                self.lower(k, low);
                self.lower(k + 1, low);
                self.snapped = true;
            }
        }
    }

    fn fix_block(&mut self, k: usize, c: &ConstraintCoeffs, limits: &Limits) -> Result<()> {
        let (a, b) = (self.v[k], self.v[k + 1]);
        if a == b || fits(c, a, b, self.len[k], limits) {
            return Ok(());
        }
        let rising = b > a;
        let (low, high) = if rising { (k, k + 1) } else { (k + 1, k) };
        let v_low = self.v[low];
        let v_high = self.v[high];
        let one_sided = tight_high(c, v_low, self.len[k], limits);

        // block on the other side of the high end, and the node at its far end
        let across = if rising {
            (k + 1 < self.blocks()).then_some(k + 1)
        } else {
            k.checked_sub(1)
        };
        let Some(j) = across else {
            self.lower(high, one_sided);
            return Ok(());
        };
        let far = if rising { j + 1 } else { j };
        let v_far = self.v[far];

        if v_far == v_high {
            // constant neighbour
            let beyond = if rising {
                (j + 1 < self.blocks()).then_some(j + 1)
            } else {
                j.checked_sub(1)
            };
            if let Some(m) = beyond {
                let beyond_far = if rising { m + 1 } else { m };
                let v3 = self.v[beyond_far];
                if v3 < v_high {
                    let total = self.len[k] + self.len[j] + self.len[m];
                    let mins = [self.len[k], self.len[m]];
                    match adjust_with_constant_bounded(v_low, v3, total, v_high, mins, c, limits) {
                        Ok(o) => {
                            self.lower(high, o.v2);
                            self.lower(far, o.v2);
                            self.len[k] = o.lengths[0];
                            self.len[j] = o.lengths[1];
                            self.len[m] = o.lengths[2];
                            return Ok(());
                        }
                        Err(Error::InfeasibleJunction(_)) => {}
                        Err(e) => return Err(e),
                    }
                }
            }
            let e = extend_into_constant(v_low, self.len[k], v_high, self.len[j], c, limits);
            self.len[k] = e.trans_length;
            self.len[j] = e.const_length;
            self.lower(high, e.v_const);
            self.lower(far, e.v_const);
        } else if v_far < v_high {
            // peak between two transitions
            match adjust_peak_junction(v_low, v_high, v_far, self.len[k], self.len[j], c, limits) {
                Ok(v) => self.lower(high, v),
                Err(Error::InfeasibleJunction(_)) => self.lower(high, one_sided),
                Err(e) => return Err(e),
            }
        } else {
            // the neighbour keeps climbing: only this block constrains the node
            self.lower(high, one_sided);
        }
        Ok(())
    }
}

/// Sigmoid schedule with default options.
pub fn schedule(curve: &Curve, blocks: &[Block], scatter: &FeedrateScatter, limits: &Limits) -> Result<Vec<Block>> {
    schedule_with(curve, blocks, scatter, limits, ProfileFamily::Sigmoid, &ScheduleOptions::default())
}

/// Lowers breakpoint feeds until every block satisfies the acceleration and
/// jerk limits of `family`, then fills in durations and moved boundaries.
pub fn schedule_with(
    curve: &Curve,
    blocks: &[Block],
    scatter: &FeedrateScatter,
    limits: &Limits,
    family: ProfileFamily,
    opts: &ScheduleOptions,
) -> Result<Vec<Block>> {
    limits.validate()?;
    check_tiling(blocks)?;
    let shape_s = blocks[0].shape_s;
    let c = family.coeffs(shape_s)?;

    let mut chain = Chain {
        v: Vec::with_capacity(blocks.len() + 1),
        len: blocks.iter().map(|b| b.length).collect(),
        v_max: limits.v_max,
        moved: 0.0,
        snapped: false,
    };
    chain.v.push(blocks[0].v_s);
    for (k, b) in blocks.iter().enumerate() {
        chain.v.push(b.v_e);
        if k > 0 {
            chain.lower(k, b.v_s);
        }
    }
    for k in 0..chain.blocks() {
        chain.lower(k, limits.v_max);
        chain.lower(k + 1, limits.v_max);
        if blocks[k].kind == BlockKind::Constant {
            // a cruise may not exceed the chord limit anywhere along its span
            if let Some(m) = scatter.min_over(blocks[k].u_s, blocks[k].u_e) {
                chain.lower(k, m);
                chain.lower(k + 1, m);
            }
        }
    }
    if let Some(bad) = chain.v.iter().find(|v| !(**v > 0.0)) {
        return Err(Error::MalformedInput(format!("breakpoint feed {bad} must be positive")));
    }

    let mut sweeps = 0;
    loop {
        sweeps += 1;
        if sweeps > opts.max_sweeps {
            return Err(Error::NonConvergence {
                sweeps: opts.max_sweeps,
                detail: describe_unfit(&chain, &c, limits),
            });
        }
        chain.moved = 0.0;
        chain.snapped = false;
        chain.snap_level_blocks();
        if sweeps % 2 == 1 {
            for k in 0..chain.blocks() {
                chain.fix_block(k, &c, limits)?;
            }
        } else {
            for k in (0..chain.blocks()).rev() {
                chain.fix_block(k, &c, limits)?;
            }
        }
        if chain.moved <= opts.feed_tol && !chain.snapped && all_fit(&chain, &c, limits) {
            break;
        }
    }
    debug!("{} schedule converged after {sweeps} sweeps", family.as_str());

    let out = rebuild_blocks(curve, blocks, &chain, limits)?;
    validate(&out, family, limits)?;
    Ok(out)
}

fn all_fit(chain: &Chain, c: &ConstraintCoeffs, limits: &Limits) -> bool {
    (0..chain.blocks()).all(|k| chain.v[k] == chain.v[k + 1] || fits(c, chain.v[k], chain.v[k + 1], chain.len[k], limits))
}

fn describe_unfit(chain: &Chain, c: &ConstraintCoeffs, limits: &Limits) -> String {
    let bad: Vec<String> = (0..chain.blocks())
        .filter(|&k| !(chain.v[k] == chain.v[k + 1] || fits(c, chain.v[k], chain.v[k + 1], chain.len[k], limits)))
        .take(8)
        .map(|k| format!("block {k}: {} -> {} mm/s over {} mm", chain.v[k], chain.v[k + 1], chain.len[k]))
        .collect();
    if bad.is_empty() {
        format!("last sweep still moved a feed by {} mm/s", chain.moved)
    } else {
        bad.join("; ")
    }
}

fn check_tiling(blocks: &[Block]) -> Result<()> {
    let (Some(first), Some(last)) = (blocks.first(), blocks.last()) else {
        return Err(Error::MalformedInput("no blocks to schedule".into()));
    };
    if first.u_s != 0.0 || last.u_e != 1.0 {
        return Err(Error::MalformedInput("blocks must cover u = 0 to u = 1".into()));
    }
    for (k, w) in blocks.windows(2).enumerate() {
        if w[0].u_e != w[1].u_s {
            return Err(Error::MalformedInput(format!("blocks {k} and {} do not abut", k + 1)));
        }
    }
    if let Some(k) = blocks.iter().position(|b| !(b.u_e >= b.u_s && b.length >= 0.0)) {
        return Err(Error::MalformedInput(format!("block {k} has a negative span")));
    }
    Ok(())
}

/// Turns the converged chain back into blocks, moving the boundaries whose
/// arc-length position changed.
fn rebuild_blocks(curve: &Curve, original: &[Block], chain: &Chain, limits: &Limits) -> Result<Vec<Block>> {
    let n = chain.blocks();
    let mut orig_pos = Vec::with_capacity(n + 1);
    let mut pos = Vec::with_capacity(n + 1);
    let (mut acc_orig, mut acc) = (0.0, 0.0);
    orig_pos.push(0.0);
    pos.push(0.0);
    for k in 0..n {
        acc_orig += original[k].length;
        acc += chain.len[k];
        orig_pos.push(acc_orig);
        pos.push(acc);
    }

    let mut u = Vec::with_capacity(n + 1);
    u.push(0.0);
    for k in 1..n {
        let node_u = if pos[k] == orig_pos[k] {
            original[k].u_s
        } else {
            // walk forward from the nearest original boundary at or before the new position
            let j = orig_pos.partition_point(|&p| p <= pos[k]).saturating_sub(1).min(n - 1);
            let base = if j == 0 { 0.0 } else { original[j].u_s };
            curve.param_at_length(base, pos[k] - orig_pos[j], DEFAULT_ARC_TOL)?
        };
        let prev = u[k - 1];
        u.push(if chain.len[k - 1] == 0.0 { prev } else { f64::max(node_u, prev) });
    }
    u.push(1.0);

    (0..n)
        .map(|k| {
            let (v_s, v_e) = (chain.v[k], chain.v[k + 1]);
            let kind = BlockKind::classify(v_s, v_e, limits.v_max);
            let length = chain.len[k];
            Ok(Block {
                u_s: u[k],
                u_e: if length == 0.0 { u[k] } else { u[k + 1] },
                v_s,
                v_e,
                length,
                duration: block_duration(length, v_s, v_e)?,
                shape_s: original[k].shape_s,
                kind,
            })
        })
        .collect::<Result<Vec<_>>>()
        .map(|mut blocks| {
            // zero-length blocks may sit anywhere; keep the tiling contiguous
            for k in 1..blocks.len() {
                blocks[k].u_s = blocks[k - 1].u_e;
                if blocks[k].length == 0.0 {
                    blocks[k].u_e = blocks[k].u_s;
                }
            }
            if let Some(last) = blocks.last_mut() {
                last.u_e = 1.0;
            }
            blocks
        })
}

/// Checks every block's exact peaks against the limits.
pub fn validate(blocks: &[Block], family: ProfileFamily, limits: &Limits) -> Result<()> {
    for (k, b) in blocks.iter().enumerate() {
        let (a, j) = family.build(b)?.kinematic_peaks();
        if a > limits.a_max * (1.0 + VALIDATION_TOL) || j > limits.j_max * (1.0 + VALIDATION_TOL) {
            return Err(Error::InternalConsistency(format!(
                "block {k} ({} -> {} mm/s over {} mm) peaks at {a} mm/s^2, {j} mm/s^3",
                b.v_s, b.v_e, b.length
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chordscan::ScatterPoint;

    fn line(len: f64) -> Curve {
        Curve::new(1, &[vec![0.0, 0.0], vec![len, 0.0]], vec![1.0; 2], vec![0.0, 0.0, 1.0, 1.0]).unwrap()
    }

    fn blocks_on_line(feeds: &[f64], len: f64) -> (Curve, Vec<Block>, FeedrateScatter) {
        let n = feeds.len() - 1;
        let curve = line(len);
        let pts: Vec<ScatterPoint> = feeds
            .iter()
            .enumerate()
            .map(|(i, &v)| ScatterPoint { u: i as f64 / n as f64, v })
            .collect();
        let blocks = pts
            .windows(2)
            .map(|w| Block {
                u_s: w[0].u,
                u_e: w[1].u,
                v_s: w[0].v,
                v_e: w[1].v,
                length: (w[1].u - w[0].u) * len,
                duration: 0.0,
                shape_s: 3.3,
                kind: BlockKind::classify(w[0].v, w[1].v, 100.0),
            })
            .collect();
        (curve, blocks, FeedrateScatter::new(pts))
    }

    #[test]
    fn feasible_input_only_gains_durations() {
        let (curve, blocks, scatter) = blocks_on_line(&[20.0, 60.0, 60.0, 30.0], 300.0);
        let out = schedule(&curve, &blocks, &scatter, &Limits::standard()).unwrap();
        for (a, b) in blocks.iter().zip(&out) {
            assert_eq!((a.u_s, a.u_e, a.v_s, a.v_e, a.length), (b.u_s, b.u_e, b.v_s, b.v_e, b.length));
            assert_eq!(b.duration, block_duration(b.length, b.v_s, b.v_e).unwrap());
        }
    }

    #[test]
    fn single_peak_is_lowered() {
        let (curve, blocks, scatter) = blocks_on_line(&[10.0, 90.0, 10.0], 6.0);
        let limits = Limits::standard();
        let out = schedule(&curve, &blocks, &scatter, &limits).unwrap();
        assert_eq!(out[0].v_s, 10.0);
        assert_eq!(out[1].v_e, 10.0);
        assert!(out[0].v_e < 90.0);
        let c = ProfileFamily::Sigmoid.coeffs(3.3).unwrap();
        assert_eq!(out[0].v_e, tight_high(&c, 10.0, 3.0, &limits));
    }

    #[test]
    fn cruise_is_shortened_for_transitions() {
        let (curve, blocks, scatter) = blocks_on_line(&[10.0, 100.0, 100.0, 10.0], 18.0);
        let limits = Limits::standard();
        let out = schedule(&curve, &blocks, &scatter, &limits).unwrap();
        let total: f64 = out.iter().map(|b| b.length).sum();
        assert!((total - 18.0).abs() < 1e-9 * 18.0);
        assert_eq!(out[1].kind, BlockKind::Constant);
        assert_eq!(out[1].v_s, 100.0);
        assert!(out[0].length > 8.0 && out[2].length > 8.0);
        assert!((out[0].u_e * 18.0 - out[0].length).abs() < 1e-6);
        validate(&out, ProfileFamily::Sigmoid, &limits).unwrap();
    }

    #[test]
    fn feeds_never_rise() {
        let feeds = [30.0, 95.0, 20.0, 80.0, 80.0, 15.0, 60.0, 100.0, 5.0];
        let (curve, blocks, scatter) = blocks_on_line(&feeds, 8.0);
        for family in [ProfileFamily::Sigmoid, ProfileFamily::Sine] {
            let out = schedule_with(&curve, &blocks, &scatter, &Limits::high_dynamics(), family, &ScheduleOptions::default()).unwrap();
            for (k, b) in out.iter().enumerate() {
                assert!(b.v_s <= feeds[k] && b.v_e <= feeds[k + 1]);
            }
            for w in out.windows(2) {
                assert_eq!(w[0].u_e, w[1].u_s);
                assert_eq!(w[0].v_e, w[1].v_s);
            }
        }
    }
}
