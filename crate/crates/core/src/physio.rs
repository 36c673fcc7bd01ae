//! Vessel parameters, the two tube laws and the characteristic speeds.
//!
//! The vessel is split at the catheter tip. On the catheterized side the wall
//! responds to the gross area `A + A_c`, on the free side to `A` alone:
//!
//! ```text
//! p1(A) = beta * (sqrt(A + A_c) - sqrt(A0))
//! p2(A) = beta * (sqrt(A)       - sqrt(A0))
//! ```
//!
//! All pressures returned here are gauge pressures: `P_ext` is stored on
//! [`VesselParams`] but never added, since only pressure differences enter
//! the momentum flux. Units are CGS throughout.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhysioError {
    #[error("cross-section area must be positive, got {0}")]
    NonPositiveArea(f64),
    #[error(
        "pressure {pressure} is outside the range of the tube law (must exceed {lower_bound})"
    )]
    PressureOutOfRange { pressure: f64, lower_bound: f64 },
    #[error("invalid vessel parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
}

/// Physical and mechanical constants of the vessel wall and the blood.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VesselParams {
    /// Reference cross-section area (cm²).
    pub a0: f64,
    /// Wall stiffness (dyne/cm³).
    pub beta: f64,
    /// Blood density (g/cm³).
    pub rho: f64,
    /// Young modulus (dyne/cm²).
    pub young_modulus: f64,
    /// Wall thickness (cm).
    pub wall_thickness: f64,
    /// External pressure (dyne/cm²), uniform.
    pub p_ext: f64,
}

impl VesselParams {
    /// Builds the parameters from wall mechanics, with
    /// `beta = E * h0 * sqrt(pi) / A0`.
    pub fn from_mechanics(
        a0: f64,
        young_modulus: f64,
        wall_thickness: f64,
        rho: f64,
    ) -> Result<Self, PhysioError> {
        let params = Self {
            a0,
            beta: young_modulus * wall_thickness * PI.sqrt() / a0,
            rho,
            young_modulus,
            wall_thickness,
            p_ext: 0.0,
        };
        params.validate()?;
        Ok(params)
    }

    /// Same as [`from_mechanics`](Self::from_mechanics) with `A0 = pi * r0²`.
    pub fn from_radius(
        r0: f64,
        young_modulus: f64,
        wall_thickness: f64,
        rho: f64,
    ) -> Result<Self, PhysioError> {
        Self::from_mechanics(PI * r0 * r0, young_modulus, wall_thickness, rho)
    }

    pub fn with_external_pressure(mut self, p_ext: f64) -> Self {
        self.p_ext = p_ext;
        self
    }

    pub fn validate(&self) -> Result<(), PhysioError> {
        let positive = [
            ("a0", self.a0),
            ("beta", self.beta),
            ("rho", self.rho),
            ("young_modulus", self.young_modulus),
            ("wall_thickness", self.wall_thickness),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(PhysioError::InvalidParameter { name, value });
            }
        }
        if !self.p_ext.is_finite() {
            return Err(PhysioError::InvalidParameter {
                name: "p_ext",
                value: self.p_ext,
            });
        }
        Ok(())
    }

    /// `sqrt(beta / (2 rho))`, the prefactor shared by both wave speeds.
    #[inline]
    pub fn speed_scale(&self) -> f64 {
        (self.beta / (2.0 * self.rho)).sqrt()
    }
}

/// The aspiration device: footprint, tip location and suction velocity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CatheterConfig {
    /// Device cross-section area `A_c` (cm²).
    pub area: f64,
    /// Axial coordinate of the tip (cm).
    pub tip_position: f64,
    /// Device velocity `w` (cm/s), non-positive for aspiration.
    pub suction_velocity: f64,
}

impl CatheterConfig {
    pub fn new(area: f64, suction_velocity: f64) -> Self {
        Self {
            area,
            tip_position: 0.0,
            suction_velocity,
        }
    }

    pub fn from_radius(rc: f64, suction_velocity: f64) -> Self {
        Self::new(PI * rc * rc, suction_velocity)
    }

    /// No device: the interface becomes transparent.
    pub fn absent() -> Self {
        Self::new(0.0, 0.0)
    }

    pub fn validate(&self, params: &VesselParams) -> Result<(), PhysioError> {
        if !(self.area >= 0.0 && self.area < params.a0) {
            return Err(PhysioError::InvalidParameter {
                name: "catheter area",
                value: self.area,
            });
        }
        if !self.tip_position.is_finite() {
            return Err(PhysioError::InvalidParameter {
                name: "tip_position",
                value: self.tip_position,
            });
        }
        if !self.suction_velocity.is_finite() {
            return Err(PhysioError::InvalidParameter {
                name: "suction_velocity",
                value: self.suction_velocity,
            });
        }
        Ok(())
    }
}

/// Which half of the vessel a cell belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `x < tip`: the device occupies `A_c` of the lumen.
    Catheterized,
    /// `x > tip`: blood fills the whole lumen.
    Free,
}

impl Side {
    pub fn as_str(self) -> &'static str {
        match self {
            Side::Catheterized => "catheterized",
            Side::Free => "free",
        }
    }

    /// Device footprint seen by the tube law on this side.
    #[inline]
    pub fn device_area(self, cath: &CatheterConfig) -> f64 {
        match self {
            Side::Catheterized => cath.area,
            Side::Free => 0.0,
        }
    }
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Side {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "catheterized" => Ok(Side::Catheterized),
            "free" => Ok(Side::Free),
            other => Err(format!("unknown side '{other}'")),
        }
    }
}

fn check_area(a: f64) -> Result<(), PhysioError> {
    if a > 0.0 && a.is_finite() {
        Ok(())
    } else {
        Err(PhysioError::NonPositiveArea(a))
    }
}

/// Gauge pressure from the tube law of `side`.
pub fn pressure(
    a: f64,
    side: Side,
    params: &VesselParams,
    cath: &CatheterConfig,
) -> Result<f64, PhysioError> {
    check_area(a)?;
    Ok(pressure_unchecked(a, side.device_area(cath), params))
}

/// Tube law for a lumen with `device_area` occupied; `a > 0` is assumed.
#[inline]
pub fn pressure_unchecked(a: f64, device_area: f64, params: &VesselParams) -> f64 {
    params.beta * ((a + device_area).sqrt() - params.a0.sqrt())
}

/// Closed-form inverse of [`pressure`].
pub fn inverse_pressure(
    p: f64,
    side: Side,
    params: &VesselParams,
    cath: &CatheterConfig,
) -> Result<f64, PhysioError> {
    let device_area = side.device_area(cath);
    // sqrt(A + A_c) = p / beta + sqrt(A0) must exceed sqrt(A_c)
    let lower_bound = params.beta * (device_area.sqrt() - params.a0.sqrt());
    if !(p > lower_bound) || !p.is_finite() {
        return Err(PhysioError::PressureOutOfRange {
            pressure: p,
            lower_bound,
        });
    }
    let root = p / params.beta + params.a0.sqrt();
    let a = root * root - device_area;
    if a > 0.0 {
        Ok(a)
    } else {
        Err(PhysioError::PressureOutOfRange {
            pressure: p,
            lower_bound,
        })
    }
}

/// Characteristic speed `c` so that the eigenvalues of the flow system
/// are `u ± c`.
pub fn wave_speed(
    a: f64,
    side: Side,
    params: &VesselParams,
    cath: &CatheterConfig,
) -> Result<f64, PhysioError> {
    check_area(a)?;
    Ok(wave_speed_unchecked(a, side.device_area(cath), params))
}

#[inline]
pub fn wave_speed_unchecked(a: f64, device_area: f64, params: &VesselParams) -> f64 {
    if device_area == 0.0 {
        params.speed_scale() * a.sqrt().sqrt()
    } else {
        params.speed_scale() * a.sqrt() / (a + device_area).sqrt().sqrt()
    }
}
