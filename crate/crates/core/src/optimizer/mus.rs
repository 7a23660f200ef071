//! Constraint-reduction coefficients and regime classification.

use serde::Serialize;

use crate::chordscan::Limits;
use crate::error::{Error, Result};
use crate::profile::{ConstraintCoeffs, ProfileFamily};
use crate::sprofile::{sigmoid, LAMBDA1};

/// Relative band around `j_max` inside which both limits count as binding.
pub const BOTH_STRICT_BAND: f64 = 0.05;

/// Reduction coefficients for a given shape parameter.
///
/// `mu1`..`mu5`, `mu_n` and `mu_m` follow the closed-form bounds term by term.
/// `accel_coeff` and `jerk_coeff` are the exact peak coefficients of the
/// capped profile, which is what the scheduler enforces.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MuSet {
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub mu4: f64,
    pub mu5: f64,
    pub mu_n: f64,
    pub mu_m: f64,
    pub q: f64,
    pub p_aux: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub accel_coeff: f64,
    pub jerk_coeff: f64,
}

impl MuSet {
    pub fn coeffs(&self) -> ConstraintCoeffs {
        ConstraintCoeffs {
            accel: self.accel_coeff,
            jerk: self.jerk_coeff,
        }
    }
}

pub fn compute_mus(s: f64) -> Result<MuSet> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::domain("s", s, "(0, inf)"));
    }
    let span = sigmoid(s) - sigmoid(-s);
    let third = sigmoid(-s / 3.0);
    let q = third - sigmoid(-s);
    let p = third * (1.0 - third);

    let mu1 = s / (4.0 * span);
    let mu2 = ((81.0 * q * q + 4.0 * s * s * p * p - 36.0 * s * p * q) / (6.0 * s * p - 54.0 * q)).abs() / (2.0 * span);
    let mu3 = s * s * LAMBDA1 / (4.0 * span);
    let mu4 = (54.0 * q - 12.0 * s * p).abs() / (4.0 * span);
    let mu5 = (24.0 * s * p - 54.0 * q).abs() / (4.0 * span);
    let exact = ProfileFamily::Sigmoid.coeffs(s)?;

    Ok(MuSet {
        mu1,
        mu2,
        mu3,
        mu4,
        mu5,
        mu_n: mu1.max(mu2),
        mu_m: mu3.max(mu4).max(mu5),
        q,
        p_aux: p,
        lambda1: LAMBDA1,
        lambda2: -LAMBDA1,
        accel_coeff: exact.accel,
        jerk_coeff: exact.jerk,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    AccelStrict,
    JerkStrict,
    BothStrict,
}

impl Regime {
    pub fn as_str(self) -> &'static str {
        match self {
            Regime::AccelStrict => "accel-strict",
            Regime::JerkStrict => "jerk-strict",
            Regime::BothStrict => "both-strict",
        }
    }
}

/// Which limit dominates a full `0 -> v_max` transition.
///
/// The transition length is chosen so the acceleration limit is exactly met;
/// the jerk of that transition is then compared with `j_max`.
pub fn classify_regime(limits: &Limits) -> Result<Regime> {
    limits.validate()?;
    if limits.j_max.is_infinite() {
        return Ok(Regime::AccelStrict);
    }
    let c = ProfileFamily::Sigmoid.coeffs(limits.shape_s)?;
    let v = limits.v_max;
    let length = c.accel * v * v / limits.a_max;
    if length == 0.0 {
        return Ok(Regime::JerkStrict);
    }
    let jerk = c.jerk * v * v * v / (length * length);
    let ratio = jerk / limits.j_max;
    Ok(if ratio < 1.0 - BOTH_STRICT_BAND {
        Regime::AccelStrict
    } else if ratio > 1.0 + BOTH_STRICT_BAND {
        Regime::JerkStrict
    } else {
        Regime::BothStrict
    })
}
