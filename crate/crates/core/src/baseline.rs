//! Sine-curve feed rate profile, the comparison baseline.

use std::f64::consts::PI;

use crate::chordscan::{FeedrateScatter, Limits};
use crate::error::{Error, Result};
use crate::geometry::Curve;
use crate::optimizer::{schedule_with, ScheduleOptions};
use crate::profile::ProfileFamily;
use crate::segmentation::{Block, BlockKind};
use crate::sprofile::block_duration;

/// `v(t) = (v_s + v_e)/2 - (v_e - v_s)/2 * cos(pi t / T)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SineProfile {
    pub v_s: f64,
    pub v_e: f64,
    pub duration: f64,
}

impl SineProfile {
    pub fn new(v_s: f64, v_e: f64, length: f64) -> Result<Self> {
        Ok(SineProfile {
            v_s,
            v_e,
            duration: block_duration(length, v_s, v_e)?,
        })
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if (0.0..=self.duration).contains(&t) {
            Ok(())
        } else {
            Err(Error::domain("t", t, "[0, T]"))
        }
    }

    fn half_rise(&self) -> f64 {
        0.5 * (self.v_e - self.v_s)
    }

    fn omega(&self) -> f64 {
        PI / self.duration
    }

    pub fn velocity_at(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        if self.duration == 0.0 {
            return Ok(self.v_s);
        }
        Ok(0.5 * (self.v_s + self.v_e) - self.half_rise() * (self.omega() * t).cos())
    }

    pub fn acceleration_at(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        if self.duration == 0.0 || self.v_s == self.v_e {
            return Ok(0.0);
        }
        let w = self.omega();
        Ok(self.half_rise() * w * (w * t).sin())
    }

    pub fn jerk_at(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        if self.duration == 0.0 || self.v_s == self.v_e {
            return Ok(0.0);
        }
        let w = self.omega();
        Ok(self.half_rise() * w * w * (w * t).cos())
    }

    pub fn position_at(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        if self.duration == 0.0 {
            return Ok(0.0);
        }
        let w = self.omega();
        Ok(0.5 * (self.v_s + self.v_e) * t - self.half_rise() * (w * t).sin() / w)
    }

    /// Peak |acceleration| (at T/2) and |jerk| (at the block ends).
    pub fn kinematic_peaks(&self) -> (f64, f64) {
        if self.v_s == self.v_e {
            return (0.0, 0.0);
        }
        if self.duration == 0.0 {
            return (f64::INFINITY, f64::INFINITY);
        }
        let w = self.omega();
        let h = self.half_rise().abs();
        (h * w, h * w * w)
    }
}

/// Acceleration and jerk reduction coefficients of the sine profile: pi/4 and pi^2/8.
pub fn sine_mus() -> (f64, f64) {
    (PI / 4.0, PI * PI / 8.0)
}

pub fn build_sine_profile(block: &Block) -> Result<SineProfile> {
    let v_e = if block.kind == BlockKind::Constant { block.v_s } else { block.v_e };
    SineProfile::new(block.v_s, v_e, block.length)
}

/// Same contract as [`crate::optimizer::schedule`] with sine profiles.
pub fn sine_schedule(curve: &Curve, blocks: &[Block], scatter: &FeedrateScatter, limits: &Limits) -> Result<Vec<Block>> {
    let opts = ScheduleOptions::default();
    schedule_with(curve, blocks, scatter, limits, ProfileFamily::Sine, &opts)
}
