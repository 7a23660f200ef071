//! Sigmoid velocity law for a single block: a compounded Sigmoid on the middle
//! third and cubic caps on the outer thirds that bring the acceleration to
//! zero at both ends.

use crate::error::{Error, Result};
use crate::segmentation::{Block, BlockKind};

/// Largest |f''| of the logistic function, reached where f = 1/2 -+ sqrt(3)/6.
pub const LAMBDA1: f64 = 0.096_225_044_864_937_63;

/// Argument of the |f''| maximum: ln((3 + sqrt 3) / (3 - sqrt 3)).
pub const PEAK_JERK_ARG: f64 = 1.316_957_896_924_816_7;

/// Largest shape parameter for which the caps are monotone. Beyond it the
/// start cap dips below `v_s` and the end cap overshoots `v_e`.
pub const MONOTONE_SHAPE_LIMIT: f64 = 5.111_918_113_261_524;

/// Numerically stable logistic function.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// ln(1 + e^x) without overflow; the antiderivative of [`sigmoid`].
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// Logistic function and its first two derivatives, plus the mirrored family p(x) = f(-x).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValues {
    pub f: f64,
    pub df: f64,
    pub d2f: f64,
    pub p: f64,
    pub dp: f64,
    pub d2p: f64,
}

pub fn kernel(x: f64) -> KernelValues {
    let f = sigmoid(x);
    let p = sigmoid(-x);
    let df = f * p;
    let d2f = df * (1.0 - 2.0 * f);
    KernelValues {
        f,
        df,
        d2f,
        p,
        dp: -df,
        d2p: -d2f,
    }
}

/// Block duration from the symmetric-profile identity T = 2L / (v_s + v_e).
pub fn block_duration(length: f64, v_s: f64, v_e: f64) -> Result<f64> {
    if !(length >= 0.0) {
        return Err(Error::domain("length", length, "[0, inf)"));
    }
    let sum = v_s + v_e;
    if sum <= 0.0 {
        return Err(Error::DwellUnsupported);
    }
    Ok(2.0 * length / sum)
}

/// Piecewise velocity law of one block.
///
/// Caps are `a1 t^3 + a2 t^2 + v_s` on `[0, T/3]` and
/// `b1 (T-t)^3 + b2 (T-t)^2 + v_e` on `[2T/3, T]`, with `b = -a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmoidProfile {
    pub v_s: f64,
    pub v_e: f64,
    pub duration: f64,
    pub shape_s: f64,
    pub kind: BlockKind,
    /// `[a1, a2, a3, a4]` with `a3 = 0` and `a4 = v_s`.
    pub cap_start: [f64; 4],
    /// `[b1, b2, b3, b4]` with `b3 = 0` and `b4 = v_e`.
    pub cap_end: [f64; 4],
}

impl SigmoidProfile {
    pub fn new(v_s: f64, v_e: f64, length: f64, shape_s: f64, kind: BlockKind) -> Result<Self> {
        if !(shape_s > 0.0 && shape_s.is_finite()) {
            return Err(Error::domain("shape_s", shape_s, "(0, inf)"));
        }
        let duration = block_duration(length, v_s, v_e)?;
        let mut profile = SigmoidProfile {
            v_s,
            v_e,
            duration,
            shape_s,
            kind,
            cap_start: [0.0, 0.0, 0.0, v_s],
            cap_end: [0.0, 0.0, 0.0, v_e],
        };
        if kind == BlockKind::Constant || duration == 0.0 {
            return Ok(profile);
        }
        let tau = duration / 3.0;
        let rise = profile.core_velocity(tau) - v_s;
        let acc = profile.core_acceleration(tau);
        let a2 = 3.0 * rise / (tau * tau) - acc / tau;
        let a1 = (acc * tau - 2.0 * rise) / (tau * tau * tau);
        profile.cap_start = [a1, a2, 0.0, v_s];
        profile.cap_end = [-a1, -a2, 0.0, v_e];
        Ok(profile)
    }

    fn gain(&self) -> f64 {
        let s = self.shape_s;
        (self.v_e - self.v_s) / (sigmoid(s) - sigmoid(-s))
    }

    fn arg(&self, t: f64) -> f64 {
        2.0 * self.shape_s * t / self.duration - self.shape_s
    }

    /// Uncapped Sigmoid law; the profile follows it on the middle third.
    pub fn core_velocity(&self, t: f64) -> f64 {
        self.v_s + self.gain() * (sigmoid(self.arg(t)) - sigmoid(-self.shape_s))
    }

    pub fn core_acceleration(&self, t: f64) -> f64 {
        self.gain() * kernel(self.arg(t)).df * 2.0 * self.shape_s / self.duration
    }

    fn core_jerk(&self, t: f64) -> f64 {
        let chain = 2.0 * self.shape_s / self.duration;
        self.gain() * kernel(self.arg(t)).d2f * chain * chain
    }

    fn is_flat(&self) -> bool {
        self.kind == BlockKind::Constant || self.duration == 0.0
    }

    fn check_time(&self, t: f64) -> Result<()> {
        if (0.0..=self.duration).contains(&t) {
            Ok(())
        } else {
            Err(Error::domain("t", t, "[0, T]"))
        }
    }

    pub fn velocity_at(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        if self.is_flat() {
            return Ok(self.v_s);
        }
        let tau = self.duration / 3.0;
        let [a1, a2, _, v_s] = self.cap_start;
        let [b1, b2, _, v_e] = self.cap_end;
        Ok(if t <= tau {
            (a1 * t + a2) * t * t + v_s
        } else if t >= 2.0 * tau {
            let r = self.duration - t;
            (b1 * r + b2) * r * r + v_e
        } else {
            self.core_velocity(t)
        })
    }

    pub fn acceleration_at(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        if self.is_flat() {
            return Ok(0.0);
        }
        let tau = self.duration / 3.0;
        let [a1, a2, _, _] = self.cap_start;
        let [b1, b2, _, _] = self.cap_end;
        Ok(if t <= tau {
            (3.0 * a1 * t + 2.0 * a2) * t
        } else if t >= 2.0 * tau {
            let r = self.duration - t;
            -(3.0 * b1 * r + 2.0 * b2) * r
        } else {
            self.core_acceleration(t)
        })
    }

    pub fn jerk_at(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        if self.is_flat() {
            return Ok(0.0);
        }
        let tau = self.duration / 3.0;
        let [a1, a2, _, _] = self.cap_start;
        let [b1, b2, _, _] = self.cap_end;
        Ok(if t <= tau {
            6.0 * a1 * t + 2.0 * a2
        } else if t >= 2.0 * tau {
            let r = self.duration - t;
            6.0 * b1 * r + 2.0 * b2
        } else {
            self.core_jerk(t)
        })
    }

    /// Distance travelled since the start of the block.
    pub fn position_at(&self, t: f64) -> Result<f64> {
        self.check_time(t)?;
        if self.is_flat() {
            return Ok(self.v_s * t);
        }
        let total = 0.5 * (self.v_s + self.v_e) * self.duration;
        if t > 0.5 * self.duration {
            // v(t) + v(T - t) = v_s + v_e
            let r = self.duration - t;
            return Ok(total - (self.v_s + self.v_e) * r + self.position_before_half(r));
        }
        Ok(self.position_before_half(t))
    }

    fn position_before_half(&self, t: f64) -> f64 {
        let tau = self.duration / 3.0;
        let [a1, a2, _, v_s] = self.cap_start;
        if t <= tau {
            return ((0.25 * a1 * t + a2 / 3.0) * t * t + v_s) * t;
        }
        let cap = (0.25 * a1 * tau + a2 / 3.0) * tau * tau * tau + v_s * tau;
        let s = self.shape_s;
        let scale = self.duration / (2.0 * s);
        let integral = scale * (softplus(self.arg(t)) - softplus(self.arg(tau)));
        cap + v_s * (t - tau) + self.gain() * (integral - sigmoid(-s) * (t - tau))
    }

    /// Exact peak |acceleration| and |jerk| over the whole block.
    pub fn kinematic_peaks(&self) -> (f64, f64) {
        if self.kind == BlockKind::Constant {
            return (0.0, 0.0);
        }
        if self.duration == 0.0 {
            return (f64::INFINITY, f64::INFINITY);
        }
        let tau = self.duration / 3.0;
        let s = self.shape_s;
        let [a1, a2, _, _] = self.cap_start;
        let chain = 2.0 * s / self.duration;
        let gain = self.gain().abs();

        let mid_acc = gain * 0.25 * chain;
        let mut cap_acc = ((3.0 * a1 * tau + 2.0 * a2) * tau).abs();
        if a1 != 0.0 {
            let t_star = -a2 / (3.0 * a1);
            if t_star > 0.0 && t_star < tau {
                cap_acc = cap_acc.max((a2 * a2 / (3.0 * a1)).abs());
            }
        }

        let mid_jerk = gain * chain * chain * kernel((s / 3.0).min(PEAK_JERK_ARG)).d2f.abs();
        let cap_jerk = (2.0 * a2).abs().max((6.0 * a1 * tau + 2.0 * a2).abs());

        (mid_acc.max(cap_acc), mid_jerk.max(cap_jerk))
    }
}

/// Profile of a block, using its current end feeds and length.
pub fn build_profile(block: &Block) -> Result<SigmoidProfile> {
    SigmoidProfile::new(block.v_s, block.v_e, block.length, block.shape_s, block.kind)
}
