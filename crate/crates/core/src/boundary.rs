//! Outer boundary conditions, expressed as ghost states next to the first
//! and last cells.
//!
//! The scheme evaluates the physical flux of each ghost state on the
//! corresponding boundary face, so a ghost is the boundary state itself:
//!
//! * `Neumann` copies the adjacent cell.
//! * `InletPressure` (left end, catheterized law) takes the area that
//!   reproduces the prescribed gauge pressure and copies the velocity.
//! * `Reflection` (right end, free law) keeps the outgoing Riemann invariant
//!   `W1 = u + 4c` and sets the incoming one to
//!   `W2 - W2_ref = -R_T (W1 - W1_ref)` about the rest state `(A0, 0)`.

use crate::physio::{self, CatheterConfig, PhysioError, Side, VesselParams};
use crate::scheme::SimState;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Time-dependent gauge pressure at the inlet (dyne/cm²).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PressureWaveform {
    Constant {
        pressure: f64,
    },
    /// `amplitude * sin(2 pi frequency t)`
    Sine {
        amplitude: f64,
        frequency: f64,
    },
}

impl PressureWaveform {
    /// The heartbeat pulse used for the occlusion runs, `8e4 sin(2 pi t)`.
    pub fn heartbeat() -> Self {
        PressureWaveform::Sine {
            amplitude: 8.0e4,
            frequency: 1.0,
        }
    }

    pub fn at(&self, t: f64) -> f64 {
        match *self {
            PressureWaveform::Constant { pressure } => pressure,
            PressureWaveform::Sine {
                amplitude,
                frequency,
            } => amplitude * (2.0 * PI * frequency * t).sin(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LeftBoundary {
    Neumann,
    InletPressure(PressureWaveform),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum RightBoundary {
    Neumann,
    /// Terminal reflection with coefficient `R_T` in `[0, 1]`.
    Reflection(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum DeviceBoundary {
    Neumann,
    FixedVelocity(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundarySpec {
    pub left: LeftBoundary,
    pub right: RightBoundary,
    pub device: DeviceBoundary,
}

impl Default for BoundarySpec {
    fn default() -> Self {
        Self::neumann()
    }
}

impl BoundarySpec {
    pub fn neumann() -> Self {
        Self {
            left: LeftBoundary::Neumann,
            right: RightBoundary::Neumann,
            device: DeviceBoundary::Neumann,
        }
    }

    pub fn validate(&self) -> Result<(), PhysioError> {
        if let RightBoundary::Reflection(r) = self.right {
            if !(0.0..=1.0).contains(&r) {
                return Err(PhysioError::InvalidParameter {
                    name: "reflection coefficient",
                    value: r,
                });
            }
        }
        if let DeviceBoundary::FixedVelocity(w) = self.device {
            if !w.is_finite() {
                return Err(PhysioError::InvalidParameter {
                    name: "device velocity",
                    value: w,
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellState {
    pub a: f64,
    pub u: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ghosts {
    pub left: CellState,
    pub right: CellState,
    pub device: f64,
}

pub fn ghost_states(
    state: &SimState,
    spec: &BoundarySpec,
    t: f64,
    params: &VesselParams,
    cath: &CatheterConfig,
) -> Result<Ghosts, PhysioError> {
    let n = state.cells_per_side();
    let first = CellState {
        a: state.a[0],
        u: state.u[0],
    };
    let last = CellState {
        a: state.a[2 * n - 1],
        u: state.u[2 * n - 1],
    };

    let left = match spec.left {
        LeftBoundary::Neumann => first,
        LeftBoundary::InletPressure(waveform) => CellState {
            a: physio::inverse_pressure(waveform.at(t), Side::Catheterized, params, cath)?,
            u: first.u,
        },
    };

    let right = match spec.right {
        RightBoundary::Neumann => last,
        RightBoundary::Reflection(coefficient) => reflection_state(last, coefficient, params)?,
    };

    let device = match spec.device {
        DeviceBoundary::Neumann => state.w[0],
        DeviceBoundary::FixedVelocity(w) => w,
    };

    Ok(Ghosts {
        left,
        right,
        device,
    })
}

/// Boundary state at the free end for a reflection coefficient.
pub fn reflection_state(
    interior: CellState,
    coefficient: f64,
    params: &VesselParams,
) -> Result<CellState, PhysioError> {
    let k = params.speed_scale();
    let c_ref = physio::wave_speed_unchecked(params.a0, 0.0, params);
    let c_int = physio::wave_speed(interior.a, Side::Free, params, &CatheterConfig::absent())?;

    let outgoing = interior.u + 4.0 * c_int;
    let incoming = -4.0 * c_ref - coefficient * (outgoing - 4.0 * c_ref);

    let c = (outgoing - incoming) / 8.0;
    if !(c > 0.0) {
        return Err(PhysioError::NonPositiveArea(c));
    }
    let ratio = c / k;
    Ok(CellState {
        a: ratio * ratio * ratio * ratio,
        u: 0.5 * (outgoing + incoming),
    })
}

/// Riemann invariants `(u + 4c, u - 4c)` of the free-side law.
pub fn free_invariants(cell: CellState, params: &VesselParams) -> (f64, f64) {
    let c = physio::wave_speed_unchecked(cell.a, 0.0, params);
    (cell.u + 4.0 * c, cell.u - 4.0 * c)
}
