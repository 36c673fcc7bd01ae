//! Conservative central scheme on the split vessel `[-5, 0] ∪ [0, 5]`.
//!
//! Away from the tip every face carries the relaxation (Rusanov-type) flux
//! with one global speed `lambda`:
//!
//! ```text
//! F = (f(U_l) + f(U_r)) / 2 - lambda / 2 (U_r - U_l)
//! ```
//!
//! At the tip the catheterized and the free segment each see their own
//! coupling state from the interface Riemann solver, and the device flow
//! sees the solver's inflow velocity `w_R`. Outer faces use the physical
//! flux of the ghost state from [`crate::boundary`].
//!
//! Cell storage: `a` and `u` hold `2N` values, catheterized cells `0..N`
//! (left to right) then free cells `N..2N`. `w` holds the `N` device cells.

use crate::boundary::{self, BoundarySpec, Ghosts};
use crate::coupling::{self, CouplingData, CouplingError, DiscriminantPolicy, TraceData};
use crate::physio::{self, CatheterConfig, PhysioError, Side, VesselParams};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Length of each half of the vessel (cm).
pub const HALF_LENGTH: f64 = 5.0;
/// Courant number: `dt * lambda = CFL * dx`.
pub const CFL: f64 = 0.9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    dx: f64,
    tip: f64,
}

impl Grid {
    pub fn new(n: usize) -> Result<Self, StepError> {
        if n < 2 {
            return Err(StepError::Shape(format!(
                "need at least 2 cells per side, got {n}"
            )));
        }
        Ok(Self {
            n,
            dx: HALF_LENGTH / n as f64,
            tip: 0.0,
        })
    }

    pub fn with_tip(mut self, tip: f64) -> Self {
        self.tip = tip;
        self
    }

    pub fn cells_per_side(&self) -> usize {
        self.n
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn tip(&self) -> f64 {
        self.tip
    }

    /// Side and center of storage cell `j` in `0..2N`.
    pub fn cell(&self, j: usize) -> (Side, f64) {
        if j < self.n {
            let x = self.tip - HALF_LENGTH + (j as f64 + 0.5) * self.dx;
            (Side::Catheterized, x)
        } else {
            let x = self.tip + ((j - self.n) as f64 + 0.5) * self.dx;
            (Side::Free, x)
        }
    }

    pub fn centers(&self) -> impl Iterator<Item = (Side, f64)> + '_ {
        (0..2 * self.n).map(|j| self.cell(j))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub t: f64,
    pub a: Vec<f64>,
    pub u: Vec<f64>,
    pub w: Vec<f64>,
}

impl SimState {
    pub fn uniform(n: usize, a: f64, u: f64, w: f64) -> Self {
        Self {
            t: 0.0,
            a: vec![a; 2 * n],
            u: vec![u; 2 * n],
            w: vec![w; n],
        }
    }

    pub fn cells_per_side(&self) -> usize {
        self.w.len()
    }

    pub fn check_shape(&self, grid: &Grid) -> Result<(), StepError> {
        let n = grid.cells_per_side();
        if self.a.len() != 2 * n || self.u.len() != 2 * n || self.w.len() != n {
            return Err(StepError::Shape(format!(
                "grid has {n} cells per side, state has |A| = {}, |u| = {}, |w| = {}",
                self.a.len(),
                self.u.len(),
                self.w.len()
            )));
        }
        Ok(())
    }

    pub fn side(&self, j: usize) -> Side {
        if j < self.cells_per_side() {
            Side::Catheterized
        } else {
            Side::Free
        }
    }

    /// Total net lumen volume `sum A dx`.
    pub fn net_volume(&self, dx: f64) -> f64 {
        self.a.iter().sum::<f64>() * dx
    }
}

/// Face fluxes of one step. Each segment has `N + 1` faces; face 0 of the
/// catheterized segment is the left end, face `N` of the free segment the
/// right end, and the tip owns two values: `f_left[N]` and `f_right[0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxSet {
    pub f_left: Vec<f64>,
    pub g_left: Vec<f64>,
    pub f_right: Vec<f64>,
    pub g_right: Vec<f64>,
    pub h: Vec<f64>,
}

impl FluxSet {
    fn unset(n: usize) -> Self {
        Self {
            f_left: vec![f64::NAN; n + 1],
            g_left: vec![f64::NAN; n + 1],
            f_right: vec![f64::NAN; n + 1],
            g_right: vec![f64::NAN; n + 1],
            h: vec![f64::NAN; n + 1],
        }
    }

    pub fn cells_per_side(&self) -> usize {
        self.h.len() - 1
    }

    /// Area fluxes at the tip as seen from the catheterized and free side.
    pub fn tip_area_fluxes(&self) -> (f64, f64) {
        (self.f_left[self.cells_per_side()], self.f_right[0])
    }

    /// Area fluxes through the outer ends.
    pub fn end_area_fluxes(&self) -> (f64, f64) {
        (self.f_left[0], self.f_right[self.cells_per_side()])
    }

    /// Rate of change of the net lumen volume implied by these fluxes.
    pub fn net_volume_rate(&self) -> f64 {
        let (inflow, outflow) = self.end_area_fluxes();
        let (tip_left, tip_right) = self.tip_area_fluxes();
        inflow - tip_left + tip_right - outflow
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceFluxes {
    pub f_left: f64,
    pub f_right: f64,
    pub g_left: f64,
    pub g_right: f64,
    pub h: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StepError {
    #[error("t = {t}: area lost positivity in {side} cell {cell} (A = {value})")]
    PositivityLoss {
        t: f64,
        side: Side,
        cell: usize,
        value: f64,
    },
    #[error("t = {t}: non-finite {field} in {side} cell {cell}")]
    NonFinite {
        t: f64,
        field: &'static str,
        side: Side,
        cell: usize,
    },
    #[error("t = {t}: interface coupling failed: {source}")]
    Coupling {
        t: f64,
        #[source]
        source: CouplingError,
    },
    #[error("t = {t}: boundary condition failed: {source}")]
    Boundary {
        t: f64,
        #[source]
        source: PhysioError,
    },
    #[error("invalid state layout: {0}")]
    Shape(String),
}

#[inline]
fn central(flux_l: f64, flux_r: f64, state_l: f64, state_r: f64, lambda: f64) -> f64 {
    0.5 * (flux_l + flux_r) - 0.5 * lambda * (state_r - state_l)
}

/// Burgers flux between two device cells.
#[inline]
pub fn device_flux(w_l: f64, w_r: f64, lambda: f64) -> f64 {
    0.25 * (w_l * w_l + w_r * w_r) - 0.5 * lambda * (w_r - w_l)
}

/// Physical fluxes `(A u, u²/2 + p/rho)` of one cell.
#[inline]
pub fn physical_flux(a: f64, u: f64, device_area: f64, params: &VesselParams) -> (f64, f64) {
    (
        a * u,
        0.5 * u * u + physio::pressure_unchecked(a, device_area, params) / params.rho,
    )
}

/// Fluxes on all faces that touch two cells of the same segment. Tip and
/// outer faces are left as NaN.
pub fn interior_fluxes(
    state: &SimState,
    params: &VesselParams,
    cath: &CatheterConfig,
    lambda: f64,
) -> FluxSet {
    let n = state.cells_per_side();
    let mut fluxes = FluxSet::unset(n);
    let phys: Vec<(f64, f64)> = (0..2 * n)
        .map(|j| {
            physical_flux(
                state.a[j],
                state.u[j],
                state.side(j).device_area(cath),
                params,
            )
        })
        .collect();

    for i in 1..n {
        let (l, r) = (i - 1, i);
        fluxes.f_left[i] = central(phys[l].0, phys[r].0, state.a[l], state.a[r], lambda);
        fluxes.g_left[i] = central(phys[l].1, phys[r].1, state.u[l], state.u[r], lambda);
        let (l, r) = (n + i - 1, n + i);
        fluxes.f_right[i] = central(phys[l].0, phys[r].0, state.a[l], state.a[r], lambda);
        fluxes.g_right[i] = central(phys[l].1, phys[r].1, state.u[l], state.u[r], lambda);
        fluxes.h[i] = device_flux(state.w[i - 1], state.w[i], lambda);
    }
    fluxes
}

/// Trace data for the tip solver: the last catheterized cell, the first
/// free cell, with their physical fluxes as relaxation variables.
pub fn interface_traces(
    state: &SimState,
    params: &VesselParams,
    cath: &CatheterConfig,
) -> TraceData {
    let n = state.cells_per_side();
    let (al, ul) = (state.a[n - 1], state.u[n - 1]);
    let (ar, ur) = (state.a[n], state.u[n]);
    let (va_minus, vu_minus) = physical_flux(al, ul, cath.area, params);
    let (va_plus, vu_plus) = physical_flux(ar, ur, 0.0, params);
    TraceData {
        a_minus: al,
        u_minus: ul,
        va_minus,
        vu_minus,
        w_minus: state.w[n - 1],
        a_plus: ar,
        u_plus: ur,
        va_plus,
        vu_plus,
    }
}

/// Tip fluxes for both segments and the device, given coupling data
/// computed from [`interface_traces`].
pub fn interface_fluxes(trace: &TraceData, cpl: &CouplingData, lambda: f64) -> InterfaceFluxes {
    InterfaceFluxes {
        f_left: central(trace.va_minus, cpl.va_r, trace.a_minus, cpl.a_r, lambda),
        f_right: central(cpl.va_l, trace.va_plus, cpl.a_l, trace.a_plus, lambda),
        g_left: central(trace.vu_minus, cpl.vu_r, trace.u_minus, cpl.u_r, lambda),
        g_right: central(cpl.vu_l, trace.vu_plus, cpl.u_l, trace.u_plus, lambda),
        h: device_flux(trace.w_minus, cpl.w_r, lambda),
    }
}

/// Global relaxation speed: the largest `|u| + c` over both segments and
/// `|w|` over the device.
pub fn compute_lambda(state: &SimState, params: &VesselParams, cath: &CatheterConfig) -> f64 {
    let n = state.cells_per_side();
    let flow = state
        .a
        .iter()
        .zip(&state.u)
        .enumerate()
        .map(|(j, (&a, &u))| {
            let device_area = if j < n { cath.area } else { 0.0 };
            u.abs() + physio::wave_speed_unchecked(a, device_area, params)
        });
    let device = state.w.iter().map(|w| w.abs());
    flow.chain(device).fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeOptions {
    pub discriminant: DiscriminantPolicy,
}

#[derive(Debug, Clone)]
pub struct StepInfo {
    /// Time at the end of the step.
    pub t: f64,
    pub dt: f64,
    pub lambda: f64,
    /// Whether `dt` was shortened to land on a target time.
    pub truncated: bool,
    pub coupling: CouplingData,
    pub fluxes: FluxSet,
}

#[derive(Debug, Clone)]
pub struct StepOutput {
    pub state: SimState,
    pub info: StepInfo,
}

/// Receives every accepted step.
pub trait Observer {
    fn observe(&mut self, info: &StepInfo, state: &SimState);
}

impl<F: FnMut(&StepInfo, &SimState)> Observer for F {
    fn observe(&mut self, info: &StepInfo, state: &SimState) {
        self(info, state)
    }
}

/// Observer that ignores everything.
pub struct NoObserver;

impl Observer for NoObserver {
    fn observe(&mut self, _: &StepInfo, _: &SimState) {}
}

/// Keeps a copy of the first state at or after each requested time.
#[derive(Debug, Clone, Default)]
pub struct SnapshotRecorder {
    times: Vec<f64>,
    next: usize,
    pub records: Vec<(f64, SimState)>,
}

impl SnapshotRecorder {
    pub fn new(mut times: Vec<f64>) -> Self {
        times.sort_by(f64::total_cmp);
        Self {
            times,
            next: 0,
            records: Vec::new(),
        }
    }

    /// Records `state` for any requested time it has already reached.
    pub fn offer(&mut self, state: &SimState) {
        while self.next < self.times.len() && state.t >= self.times[self.next] {
            self.records.push((self.times[self.next], state.clone()));
            self.next += 1;
        }
    }
}

impl Observer for SnapshotRecorder {
    fn observe(&mut self, _: &StepInfo, state: &SimState) {
        self.offer(state);
    }
}

/// A fully specified catheterized-vessel problem.
#[derive(Debug, Clone)]
pub struct Solver {
    pub grid: Grid,
    pub params: VesselParams,
    pub catheter: CatheterConfig,
    pub boundary: BoundarySpec,
    pub options: SchemeOptions,
}

impl Solver {
    pub fn new(
        grid: Grid,
        params: VesselParams,
        catheter: CatheterConfig,
        boundary: BoundarySpec,
    ) -> Self {
        Self {
            grid,
            params,
            catheter,
            boundary,
            options: SchemeOptions::default(),
        }
    }

    pub fn with_options(mut self, options: SchemeOptions) -> Self {
        self.options = options;
        self
    }

    pub fn lambda(&self, state: &SimState) -> f64 {
        compute_lambda(state, &self.params, &self.catheter)
    }

    /// All face fluxes for the current state and the tip coupling data.
    pub fn fluxes(
        &self,
        state: &SimState,
        lambda: f64,
    ) -> Result<(FluxSet, CouplingData), StepError> {
        let n = self.grid.cells_per_side();
        let mut fluxes = interior_fluxes(state, &self.params, &self.catheter, lambda);

        let trace = interface_traces(state, &self.params, &self.catheter);
        let cpl = coupling::riemann_solve_with(
            &trace,
            lambda,
            self.catheter.area,
            self.options.discriminant,
        )
        .map_err(|source| StepError::Coupling { t: state.t, source })?;
        let tip = interface_fluxes(&trace, &cpl, lambda);
        fluxes.f_left[n] = tip.f_left;
        fluxes.g_left[n] = tip.g_left;
        fluxes.f_right[0] = tip.f_right;
        fluxes.g_right[0] = tip.g_right;
        fluxes.h[n] = tip.h;

        let ghosts =
            boundary::ghost_states(state, &self.boundary, state.t, &self.params, &self.catheter)
                .map_err(|source| StepError::Boundary { t: state.t, source })?;
        self.apply_ends(&mut fluxes, &ghosts);
        Ok((fluxes, cpl))
    }

    fn apply_ends(&self, fluxes: &mut FluxSet, ghosts: &Ghosts) {
        let n = self.grid.cells_per_side();
        let (f, g) = physical_flux(
            ghosts.left.a,
            ghosts.left.u,
            self.catheter.area,
            &self.params,
        );
        fluxes.f_left[0] = f;
        fluxes.g_left[0] = g;
        let (f, g) = physical_flux(ghosts.right.a, ghosts.right.u, 0.0, &self.params);
        fluxes.f_right[n] = f;
        fluxes.g_right[n] = g;
        fluxes.h[0] = 0.5 * ghosts.device * ghosts.device;
    }

    /// One CFL step.
    pub fn step(&self, state: &SimState) -> Result<StepOutput, StepError> {
        self.step_until(state, f64::INFINITY)
    }

    /// One step, shortened if needed so that the new time does not pass
    /// `t_max`.
    pub fn step_until(&self, state: &SimState, t_max: f64) -> Result<StepOutput, StepError> {
        state.check_shape(&self.grid)?;
        let n = self.grid.cells_per_side();
        let dx = self.grid.dx();
        let lambda = self.lambda(state);
        let cfl_dt = CFL * dx / lambda;
        let (dt, t_new, truncated) = if state.t + cfl_dt >= t_max {
            (t_max - state.t, t_max, true)
        } else {
            (cfl_dt, state.t + cfl_dt, false)
        };

        let (fluxes, coupling) = self.fluxes(state, lambda)?;
        let ratio = dt / dx;

        let mut next = SimState {
            t: t_new,
            a: state.a.clone(),
            u: state.u.clone(),
            w: state.w.clone(),
        };
        for i in 0..n {
            next.a[i] -= ratio * (fluxes.f_left[i + 1] - fluxes.f_left[i]);
            next.u[i] -= ratio * (fluxes.g_left[i + 1] - fluxes.g_left[i]);
            next.a[n + i] -= ratio * (fluxes.f_right[i + 1] - fluxes.f_right[i]);
            next.u[n + i] -= ratio * (fluxes.g_right[i + 1] - fluxes.g_right[i]);
            next.w[i] -= ratio * (fluxes.h[i + 1] - fluxes.h[i]);
        }
        check_admissible(&next, state.t)?;

        Ok(StepOutput {
            state: next,
            info: StepInfo {
                t: t_new,
                dt,
                lambda,
                truncated,
                coupling,
                fluxes,
            },
        })
    }

    /// Steps until `t_end`, landing on it exactly.
    pub fn run<O: Observer + ?Sized>(
        &self,
        mut state: SimState,
        t_end: f64,
        observer: &mut O,
    ) -> Result<SimState, StepError> {
        while state.t < t_end {
            let out = self.step_until(&state, t_end)?;
            observer.observe(&out.info, &out.state);
            state = out.state;
        }
        Ok(state)
    }
}

fn check_admissible(state: &SimState, t: f64) -> Result<(), StepError> {
    let n = state.cells_per_side();
    let locate = |j: usize| {
        if j < n {
            (Side::Catheterized, j)
        } else {
            (Side::Free, j - n)
        }
    };
    for (j, (&a, &u)) in state.a.iter().zip(&state.u).enumerate() {
        let (side, cell) = locate(j);
        if a.is_nan() || a <= 0.0 {
            return Err(StepError::PositivityLoss {
                t,
                side,
                cell,
                value: a,
            });
        }
        if !a.is_finite() {
            return Err(StepError::NonFinite {
                t,
                field: "A",
                side,
                cell,
            });
        }
        if !u.is_finite() {
            return Err(StepError::NonFinite {
                t,
                field: "u",
                side,
                cell,
            });
        }
    }
    if let Some(cell) = state.w.iter().position(|w| !w.is_finite()) {
        return Err(StepError::NonFinite {
            t,
            field: "w",
            side: Side::Catheterized,
            cell,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params() -> VesselParams {
        VesselParams::from_radius(0.5, 3e6, 0.05, 1.0).unwrap()
    }

    fn transparent_solver(n: usize) -> Solver {
        Solver::new(
            Grid::new(n).unwrap(),
            params(),
            CatheterConfig::absent(),
            BoundarySpec::neumann(),
        )
    }

    #[test]
    fn grid_layout() {
        let grid = Grid::new(400).unwrap();
        assert_eq!(grid.dx() * 400.0, HALF_LENGTH);
        assert_relative_eq!(grid.cell(0).1, -5.0 + 0.00625, max_relative = 1e-14);
        assert_eq!(grid.cell(399).0, Side::Catheterized);
        assert_relative_eq!(grid.cell(399).1, -0.00625, max_relative = 1e-12);
        assert_eq!(grid.cell(400), (Side::Free, 0.00625));
        assert!(Grid::new(1).is_err());
        for n in [2, 25, 100, 200, 400, 800, 1600] {
            assert_eq!(Grid::new(n).unwrap().dx() * n as f64, HALF_LENGTH);
        }
    }

    #[test]
    fn uniform_state_has_physical_fluxes() {
        let p = params();
        let state = SimState::uniform(5, 0.8, 250.0, -5000.0);
        let fluxes = interior_fluxes(&state, &p, &CatheterConfig::absent(), 700.0);
        let pressure = physio::pressure_unchecked(0.8, 0.0, &p);
        for i in 1..5 {
            assert_eq!(fluxes.f_left[i], 200.0);
            assert_eq!(fluxes.f_right[i], 200.0);
            assert_eq!(fluxes.g_right[i], 0.5 * 250.0 * 250.0 + pressure);
            assert_eq!(fluxes.h[i], 1.25e7);
        }
        assert!(fluxes.f_left[0].is_nan() && fluxes.f_right[5].is_nan());
    }

    #[test]
    fn two_cell_riemann_flux() {
        let p = params();
        let mut state = SimState::uniform(4, 0.8, 250.0, 0.0);
        state.a[5] = 0.8;
        state.a[6] = 0.7;
        let fluxes = interior_fluxes(&state, &p, &CatheterConfig::absent(), 600.0);
        assert_relative_eq!(fluxes.f_right[2], 217.5, max_relative = 1e-14);
        let pa = 338513.7501286537 * (0.8_f64.sqrt() - (std::f64::consts::PI * 0.25).sqrt());
        let pb = 338513.7501286537 * (0.7_f64.sqrt() - (std::f64::consts::PI * 0.25).sqrt());
        let expected = 0.25 * 2.0 * 250.0 * 250.0 + 0.5 * (pa + pb);
        assert_relative_eq!(fluxes.g_right[2], expected, max_relative = 1e-12);
        assert_relative_eq!(fluxes.g_right[2], 24248.41290360407, max_relative = 1e-10);
    }

    #[test]
    fn transparent_tip_matches_interior_flux() {
        let p = params();
        let state = SimState::uniform(4, p.a0, 254.65, 0.0);
        let trace = interface_traces(&state, &p, &CatheterConfig::absent());
        let cpl = coupling::riemann_solve(&trace, 650.0, 0.0).unwrap();
        let tip = interface_fluxes(&trace, &cpl, 650.0);
        let interior = interior_fluxes(&state, &p, &CatheterConfig::absent(), 650.0);
        assert_eq!(tip.f_left, interior.f_left[2]);
        assert_eq!(tip.f_right, interior.f_left[2]);
        assert_eq!(tip.g_left, interior.g_left[2]);
        assert_eq!(tip.g_right, interior.g_right[2]);
        assert_eq!(tip.h, 0.0);
    }

    #[test]
    fn tip_mass_exchange_is_device_flux() {
        // coupling data equal to the traces: F2 - F1 reduces to A_c w_R
        let area_c = 0.03;
        let trace = TraceData {
            a_minus: 0.7,
            u_minus: 250.0,
            va_minus: 175.0,
            vu_minus: 40000.0,
            w_minus: -5000.0,
            a_plus: 0.73,
            u_plus: 250.0 * 0.7 / 0.73 - 150.0 / 0.73,
            va_plus: 175.0 - 150.0,
            vu_plus: 41000.0,
        };
        let cpl = CouplingData {
            a_r: trace.a_minus,
            u_r: trace.u_minus,
            va_r: trace.va_minus,
            vu_r: trace.vu_minus,
            w_r: -5000.0,
            a_l: trace.a_plus,
            u_l: trace.u_plus,
            va_l: trace.va_plus,
            vu_l: trace.vu_plus,
        };
        let tip = interface_fluxes(&trace, &cpl, 5000.0);
        assert_relative_eq!(
            tip.f_right - tip.f_left,
            area_c * cpl.w_r,
            max_relative = 1e-12
        );
    }

    #[test]
    fn tip_fluxes_equal_relaxation_states() {
        // on the Lax curves the tip flux collapses to the coupled v-state
        let p = params();
        let cath = CatheterConfig::from_radius(0.1, -5000.0);
        let mut state = SimState::uniform(4, p.a0, 254.65, -5000.0);
        state.a[3] = 0.76;
        state.u[4] = 240.0;
        let lambda = compute_lambda(&state, &p, &cath);
        let trace = interface_traces(&state, &p, &cath);
        let cpl = coupling::riemann_solve(&trace, lambda, cath.area).unwrap();
        let tip = interface_fluxes(&trace, &cpl, lambda);
        assert_relative_eq!(tip.f_left, cpl.va_r, max_relative = 1e-12);
        assert_relative_eq!(tip.f_right, cpl.va_l, max_relative = 1e-12);
        assert_relative_eq!(tip.g_left, cpl.vu_r, max_relative = 1e-12);
        assert_relative_eq!(tip.g_right, cpl.vu_l, max_relative = 1e-12);
        assert_relative_eq!(
            tip.f_right - tip.f_left,
            cath.area * -5000.0,
            max_relative = 1e-9
        );
    }

    #[test]
    fn lambda_examples() {
        let p = params();
        let state = SimState::uniform(4, p.a0, 254.65, 0.0);
        let lambda = compute_lambda(&state, &p, &CatheterConfig::from_radius(0.1, 0.0));
        assert_relative_eq!(lambda, 641.9483346207417, max_relative = 1e-13);
        assert_relative_eq!(lambda, 642.0, max_relative = 1e-4);

        let state = SimState::uniform(4, p.a0, 254.65, -10000.0);
        assert_eq!(
            compute_lambda(&state, &p, &CatheterConfig::absent()),
            10000.0
        );

        let state = SimState::uniform(4, p.a0, 0.0, 0.0);
        let c = physio::wave_speed(p.a0, Side::Free, &p, &CatheterConfig::absent()).unwrap();
        assert_eq!(compute_lambda(&state, &p, &CatheterConfig::absent()), c);
    }

    #[test]
    fn cfl_time_step() {
        let solver = transparent_solver(400);
        let state = SimState::uniform(400, solver.params.a0, 254.65, 0.0);
        let out = solver.step(&state).unwrap();
        assert_relative_eq!(out.info.dt, 1.7524774803951192e-05, max_relative = 1e-13);
        assert_relative_eq!(
            out.info.dt * out.info.lambda,
            CFL * solver.grid.dx(),
            max_relative = 1e-15
        );
        assert!(!out.info.truncated);
    }

    #[test]
    fn transparent_steady_state_is_exact() {
        let solver = transparent_solver(50);
        let state = SimState::uniform(50, solver.params.a0, 254.65, 0.0);
        let out = solver.step(&state).unwrap();
        assert_eq!(out.state.a, state.a);
        assert_eq!(out.state.u, state.u);
        assert_eq!(out.state.w, state.w);
    }

    #[test]
    fn run_lands_on_end_time() {
        let solver = transparent_solver(20);
        let state = SimState::uniform(20, solver.params.a0, 254.65, 0.0);
        let mut infos = Vec::new();
        let mut obs = |info: &StepInfo, _: &SimState| infos.push((info.dt, info.truncated));
        let end = solver.run(state.clone(), 1.234e-3, &mut obs).unwrap();
        assert_eq!(end.t, 1.234e-3);
        assert!(infos.last().unwrap().1);
        assert!(infos[..infos.len() - 1].iter().all(|(_, trunc)| !trunc));

        let same = solver.run(state.clone(), 0.0, &mut NoObserver).unwrap();
        assert_eq!(same, state);
    }

    #[test]
    fn recorder_takes_first_state_past_each_time() {
        let solver = transparent_solver(20);
        let state = SimState::uniform(20, solver.params.a0, 254.65, 0.0);
        let mut recorder = SnapshotRecorder::new(vec![5e-4, 1e-4]);
        let dt_max = CFL * solver.grid.dx() / solver.lambda(&state);
        solver.run(state, 1e-3, &mut recorder).unwrap();
        assert_eq!(recorder.records.len(), 2);
        for (target, snap) in &recorder.records {
            assert!(snap.t >= *target && snap.t - target <= dt_max);
        }
    }

    #[test]
    fn positivity_loss_is_reported() {
        let mut state = SimState::uniform(4, 0.7, 0.0, 0.0);
        state.a[5] = -0.1;
        assert_eq!(
            check_admissible(&state, 0.5),
            Err(StepError::PositivityLoss {
                t: 0.5,
                side: Side::Free,
                cell: 1,
                value: -0.1
            })
        );
        state.a[5] = 0.7;
        state.w[2] = f64::INFINITY;
        assert!(matches!(
            check_admissible(&state, 0.5),
            Err(StepError::NonFinite {
                field: "w",
                cell: 2,
                ..
            })
        ));
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let solver = transparent_solver(10);
        let state = SimState::uniform(8, 0.7, 0.0, 0.0);
        assert!(matches!(solver.step(&state), Err(StepError::Shape(_))));
    }
}
