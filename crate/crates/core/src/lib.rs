//! One-dimensional blood flow in a vessel with an inserted aspiration
//! catheter.
//!
//! The vessel is split at the catheter tip into a catheterized segment,
//! where the device occupies part of the lumen and carries its own flow
//! `w`, and a free segment. Each segment solves
//!
//! ```text
//! A_t + (A u)_x = 0
//! u_t + (u²/2 + p(A)/rho)_x = 0
//! ```
//!
//! and the device flow solves the inviscid Burgers equation. The two
//! segments are glued at the tip by a relaxation-based Riemann solver
//! ([`coupling`]) inside a conservative central finite-volume scheme
//! ([`scheme`]).

pub mod boundary;
pub mod coupling;
pub mod experiment;
pub mod physio;
pub mod scheme;
pub mod snapshot;

pub use boundary::{BoundarySpec, DeviceBoundary, LeftBoundary, PressureWaveform, RightBoundary};
pub use coupling::{riemann_solve, CouplingData, CouplingError, DiscriminantPolicy, TraceData};
pub use experiment::{
    build_experiment, run_experiment, ExperimentConfig, ExperimentKind, InitialArea, RunSummary,
};
pub use physio::{CatheterConfig, PhysioError, Side, VesselParams};
pub use scheme::{Grid, SimState, Solver, StepError, StepInfo};
pub use snapshot::Snapshot;
