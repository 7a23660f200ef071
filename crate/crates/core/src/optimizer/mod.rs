//! Breakpoint feed adjustment under acceleration and jerk limits.

mod junction;
mod mus;
mod schedule;

pub use junction::{
    accel_length, adjust_peak_junction, adjust_with_constant, adjust_with_constant_bounded, extend_into_constant,
    fits, jerk_length, min_length, tight_high, triple_time, AdjustmentOutcome, Extension, LENGTH_SLACK,
};
pub use mus::{classify_regime, compute_mus, MuSet, Regime, BOTH_STRICT_BAND};
pub use schedule::{schedule, schedule_with, validate, ScheduleOptions, VALIDATION_TOL};
