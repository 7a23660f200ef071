//! Common interface over the Sigmoid and sine velocity laws.

use serde::{Deserialize, Serialize};

use crate::baseline::{build_sine_profile, sine_mus, SineProfile};
use crate::error::Result;
use crate::segmentation::{Block, BlockKind};
use crate::sprofile::{build_profile, SigmoidProfile};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileFamily {
    Sigmoid,
    Sine,
}

impl ProfileFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            ProfileFamily::Sigmoid => "sigmoid",
            ProfileFamily::Sine => "sine",
        }
    }

    pub fn build(self, block: &Block) -> Result<Profile> {
        Ok(match self {
            ProfileFamily::Sigmoid => Profile::Sigmoid(build_profile(block)?),
            ProfileFamily::Sine => Profile::Sine(build_sine_profile(block)?),
        })
    }

    /// Exact peak coefficients: a transition from `v_a` to `v_b` over length `L`
    /// peaks at `accel * |v_b^2 - v_a^2| / L` and
    /// `jerk * |v_b - v_a| (v_a + v_b)^2 / L^2`.
    pub fn coeffs(self, shape_s: f64) -> Result<ConstraintCoeffs> {
        match self {
            ProfileFamily::Sigmoid => {
                let unit = SigmoidProfile::new(0.0, 1.0, 1.0, shape_s, BlockKind::Accel)?;
                let (accel, jerk) = unit.kinematic_peaks();
                Ok(ConstraintCoeffs { accel, jerk })
            }
            ProfileFamily::Sine => {
                let (accel, jerk) = sine_mus();
                Ok(ConstraintCoeffs { accel, jerk })
            }
        }
    }
}

impl std::str::FromStr for ProfileFamily {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "sigmoid" => Ok(ProfileFamily::Sigmoid),
            "sine" => Ok(ProfileFamily::Sine),
            other => Err(format!("unknown profile `{other}` (expected sigmoid or sine)")),
        }
    }
}

/// Peak scaling coefficients of a profile family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintCoeffs {
    pub accel: f64,
    pub jerk: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    Sigmoid(SigmoidProfile),
    Sine(SineProfile),
}

impl Profile {
    pub fn duration(&self) -> f64 {
        match self {
            Profile::Sigmoid(p) => p.duration,
            Profile::Sine(p) => p.duration,
        }
    }

    pub fn velocity_at(&self, t: f64) -> Result<f64> {
        match self {
            Profile::Sigmoid(p) => p.velocity_at(t),
            Profile::Sine(p) => p.velocity_at(t),
        }
    }

    pub fn acceleration_at(&self, t: f64) -> Result<f64> {
        match self {
            Profile::Sigmoid(p) => p.acceleration_at(t),
            Profile::Sine(p) => p.acceleration_at(t),
        }
    }

    pub fn jerk_at(&self, t: f64) -> Result<f64> {
        match self {
            Profile::Sigmoid(p) => p.jerk_at(t),
            Profile::Sine(p) => p.jerk_at(t),
        }
    }

    pub fn position_at(&self, t: f64) -> Result<f64> {
        match self {
            Profile::Sigmoid(p) => p.position_at(t),
            Profile::Sine(p) => p.position_at(t),
        }
    }

    pub fn kinematic_peaks(&self) -> (f64, f64) {
        match self {
            Profile::Sigmoid(p) => p.kinematic_peaks(),
            Profile::Sine(p) => p.kinematic_peaks(),
        }
    }
}
