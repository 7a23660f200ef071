//! Replays a schedule through a fixed-period interpolator and measures it.

use serde::Serialize;

use crate::chordscan::{chord_error, taylor_step, Limits};
use crate::error::{Error, Result};
use crate::geometry::{Curve, Vec3};
use crate::profile::{Profile, ProfileFamily};
use crate::segmentation::Block;

/// Target accuracy of the chordal advance per step (mm).
pub const STEP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationSample {
    pub t: f64,
    pub u: f64,
    pub position: Vec3,
    pub v: f64,
    pub accel: f64,
    pub jerk: f64,
    /// Chord error of the segment from the previous sample.
    pub chord_err: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunSummary {
    pub max_feed: f64,
    pub max_accel: f64,
    pub max_jerk: f64,
    pub max_chord_err: f64,
    pub total_time: f64,
    pub n_points: usize,
}

/// Sum of block durations.
pub fn total_time(blocks: &[Block]) -> Result<f64> {
    let mut sum = 0.0;
    for (k, b) in blocks.iter().enumerate() {
        if b.length > 0.0 && b.duration <= 0.0 {
            return Err(Error::MalformedInput(format!("block {k} has no duration; schedule it first")));
        }
        sum += b.duration;
    }
    Ok(sum)
}

/// Commanded motion over the whole schedule as a function of time.
struct Timeline {
    profiles: Vec<Profile>,
    starts: Vec<f64>,
    offsets: Vec<f64>,
    total: f64,
}

impl Timeline {
    fn new(blocks: &[Block], family: ProfileFamily) -> Result<Self> {
        let mut profiles = Vec::with_capacity(blocks.len());
        let mut starts = Vec::with_capacity(blocks.len());
        let mut offsets = Vec::with_capacity(blocks.len());
        let (mut t, mut s) = (0.0, 0.0);
        for b in blocks {
            if b.length == 0.0 {
                continue;
            }
            let p = family.build(b)?;
            starts.push(t);
            offsets.push(s);
            t += p.duration();
            s += b.length;
            profiles.push(p);
        }
        if profiles.is_empty() {
            return Err(Error::MalformedInput("schedule has no length".into()));
        }
        Ok(Timeline {
            profiles,
            starts,
            offsets,
            total: t,
        })
    }

    /// Block index and local time, clamped to the schedule.
    fn locate(&self, t: f64) -> (usize, f64) {
        let t = t.clamp(0.0, self.total);
        let k = self.starts.partition_point(|&s| s <= t).saturating_sub(1);
        let local = (t - self.starts[k]).clamp(0.0, self.profiles[k].duration());
        (k, local)
    }

    fn position(&self, t: f64) -> Result<f64> {
        let (k, local) = self.locate(t);
        Ok(self.offsets[k] + self.profiles[k].position_at(local)?)
    }

    fn kinematics(&self, t: f64) -> Result<(f64, f64, f64)> {
        let (k, local) = self.locate(t);
        let p = &self.profiles[k];
        Ok((p.velocity_at(local)?, p.acceleration_at(local)?, p.jerk_at(local)?))
    }
}

/// Walks the schedule with period `limits.ts`. Each step advances along the
/// curve by the commanded distance, measured as chord length, starting from a
/// Taylor estimate of the parameter and refining it by bisection.
pub fn interpolate(
    curve: &Curve,
    blocks: &[Block],
    family: ProfileFamily,
    limits: &Limits,
) -> Result<Vec<InterpolationSample>> {
    let timeline = Timeline::new(blocks, family)?;
    let ts = limits.ts;
    // guard against 0.1 / 0.001 = 100.00000000000001
    let steps = (timeline.total / ts - 1e-9).ceil().max(1.0) as usize;
    let mut samples = Vec::with_capacity(steps);
    let mut u = 0.0;
    let mut here = curve.evaluate(0.0)?;
    let mut travelled = 0.0;

    for i in 1..=steps {
        let t = i as f64 * ts;
        let target = timeline.position(t)?;
        // measured against the distance actually covered so step errors do not accumulate
        let advance = target - travelled;
        let block_of = |t: f64| timeline.locate(t).0;
        let next = if i == steps {
            1.0
        } else {
            refine_step(curve, u, here, advance, ts).map_err(|detail| Error::Interpolation {
                block: block_of(t),
                t,
                detail,
            })?
        };
        let point = curve.evaluate(next)?;
        travelled += point.distance(here);
        let (v, accel, jerk) = timeline.kinematics(t)?;
        let chord_err = if next > u { chord_error(curve, u, next)? } else { 0.0 };
        samples.push(InterpolationSample {
            t,
            u: next,
            position: point,
            v,
            accel,
            jerk,
            chord_err,
        });
        u = next;
        here = point;
    }
    Ok(samples)
}

/// Parameter whose chord from `u` has length `advance`, or 1 if the curve ends first.
fn refine_step(curve: &Curve, u: f64, here: Vec3, advance: f64, ts: f64) -> std::result::Result<f64, String> {
    if advance <= 0.0 {
        return Ok(u);
    }
    let chord = |x: f64| curve.evaluate(x).map(|p| p.distance(here)).map_err(|e| e.to_string());
    let guess = taylor_step(curve, u, advance / ts, ts).map_err(|e| e.to_string())?;
    let (mut lo, mut hi) = (u, guess.max(u + f64::EPSILON).min(1.0));
    while chord(hi)? < advance {
        if hi >= 1.0 {
            return Ok(1.0);
        }
        lo = hi;
        hi = (u + 2.0 * (hi - u)).min(1.0);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let d = chord(mid)? - advance;
        if d.abs() <= STEP_TOL {
            return Ok(mid);
        }
        if d < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (dl, dh) = (advance - chord(lo)?, chord(hi)? - advance);
    if dl.min(dh) > 1e3 * STEP_TOL {
        return Err(format!("chord bracket [{lo}, {hi}] collapsed {} mm from the target", dl.min(dh)));
    }
    Ok(if dl <= dh { lo } else { hi })
}

/// Maxima over the run plus the scheduled time.
pub fn summarize(samples: &[InterpolationSample], blocks: &[Block]) -> Result<RunSummary> {
    let mut s = RunSummary {
        max_feed: 0.0,
        max_accel: 0.0,
        max_jerk: 0.0,
        max_chord_err: 0.0,
        total_time: total_time(blocks)?,
        n_points: samples.len(),
    };
    for x in samples {
        s.max_feed = s.max_feed.max(x.v.abs());
        s.max_accel = s.max_accel.max(x.accel.abs());
        s.max_jerk = s.max_jerk.max(x.jerk.abs());
        s.max_chord_err = s.max_chord_err.max(x.chord_err);
    }
    Ok(s)
}
