//! Interface Riemann solver at the catheter tip.
//!
//! The flow equations are relaxed with a single speed `lambda`, so the
//! area/flux pair `(A, v^A)` and the velocity/flux pair `(u, v^u)` each
//! travel along straight Lax curves:
//!
//! ```text
//! left  (catheterized) trace:  (z1 - s, z2 + lambda s)
//! right (free) trace:          (z1 + s, z2 + lambda s)
//! ```
//!
//! The coupling data picked on these curves must satisfy
//!
//! ```text
//! A_L = A_R + A_c
//! u_L = (A_R u_R + A_c w_R) / (A_R + A_c)
//! v^A_L = v^A_R + A_c w_R
//! v^u_L = v^u_R + (u_L² - u_R²) / 2
//! ```
//!
//! The area pair is linear and solved in closed form. The velocity pair
//! leads to a quadratic in the right-side curve parameter, of which the
//! root with smaller magnitude is taken.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Below this device area the velocity quadratic is treated as linear.
pub const DEGENERATE_DEVICE_AREA: f64 = 1e-14;

/// Trace states on both sides of the tip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceData {
    pub a_minus: f64,
    pub u_minus: f64,
    pub va_minus: f64,
    pub vu_minus: f64,
    pub w_minus: f64,
    pub a_plus: f64,
    pub u_plus: f64,
    pub va_plus: f64,
    pub vu_plus: f64,
}

impl TraceData {
    pub fn validate(&self) -> Result<(), CouplingError> {
        let values = [
            self.a_minus,
            self.u_minus,
            self.va_minus,
            self.vu_minus,
            self.w_minus,
            self.a_plus,
            self.u_plus,
            self.va_plus,
            self.vu_plus,
        ];
        if values.iter().all(|v| v.is_finite()) && self.a_minus > 0.0 && self.a_plus > 0.0 {
            Ok(())
        } else {
            Err(CouplingError::InvalidTrace(Box::new(*self)))
        }
    }
}

/// Coupling data handed to each side. `_r` states feed the catheterized
/// segment (they sit right of its last cell), `_l` states feed the free
/// segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingData {
    pub a_r: f64,
    pub u_r: f64,
    pub va_r: f64,
    pub vu_r: f64,
    pub w_r: f64,
    pub a_l: f64,
    pub u_l: f64,
    pub va_l: f64,
    pub vu_l: f64,
}

/// How far a [`CouplingData`] is from satisfying the coupling conditions
/// and the Lax-curve connection to its traces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingResiduals {
    /// `|A_L - A_R - A_c|`, absolute.
    pub gross_area: f64,
    /// Gross flow continuity, relative to the flow magnitude.
    pub velocity: f64,
    /// `|v^A_L - v^A_R - A_c w_R|`, relative to the flux magnitude.
    pub area_flux: f64,
    /// Momentum-flux jump condition, relative to the flux magnitude.
    pub velocity_flux: f64,
    /// Largest Lax-curve violation over the four output pairs, relative to
    /// `lambda` times the state magnitude.
    pub lax_curves: f64,
}

impl CouplingResiduals {
    pub fn max_condition(&self) -> f64 {
        self.gross_area
            .max(self.velocity)
            .max(self.area_flux)
            .max(self.velocity_flux)
    }
}

fn relative(diff: f64, scale: f64) -> f64 {
    if scale > 0.0 {
        diff.abs() / scale
    } else {
        diff.abs()
    }
}

impl CouplingData {
    pub fn residuals(&self, trace: &TraceData, lambda: f64, area_c: f64) -> CouplingResiduals {
        let gross_area = (self.a_l - self.a_r - area_c).abs();

        let gross_flow = self.a_r * self.u_r + area_c * self.w_r;
        let net_flow = self.a_l * self.u_l;
        let velocity = relative(
            gross_flow / (self.a_r + area_c) - self.u_l,
            self.u_l.abs().max(gross_flow.abs() / (self.a_r + area_c)),
        );

        let area_flux = relative(
            self.va_l - self.va_r - area_c * self.w_r,
            self.va_l.abs().max(self.va_r.abs()).max(net_flow.abs()),
        );

        let jump = 0.5 * (self.u_l * self.u_l - self.u_r * self.u_r);
        let velocity_flux = relative(
            self.vu_r + jump - self.vu_l,
            self.vu_l.abs().max(self.vu_r.abs()).max(jump.abs()),
        );

        let lax = |z1: f64, z2: f64, c1: f64, c2: f64, sign: f64| {
            // left: c2 - z2 = lambda (z1 - c1); right: c2 - z2 = lambda (c1 - z1)
            let diff = (c2 - z2) - sign * lambda * (z1 - c1);
            relative(
                diff,
                lambda * z1.abs().max(c1.abs()) + z2.abs().max(c2.abs()),
            )
        };
        let lax_curves = lax(trace.a_minus, trace.va_minus, self.a_r, self.va_r, 1.0)
            .max(lax(trace.u_minus, trace.vu_minus, self.u_r, self.vu_r, 1.0))
            .max(lax(trace.a_plus, trace.va_plus, self.a_l, self.va_l, -1.0))
            .max(lax(trace.u_plus, trace.vu_plus, self.u_l, self.vu_l, -1.0));

        CouplingResiduals {
            gross_area,
            velocity,
            area_flux,
            velocity_flux,
            lax_curves,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CouplingError {
    #[error("invalid trace data {0:?}")]
    InvalidTrace(Box<TraceData>),
    #[error("relaxation speed must be positive, got {0}")]
    NonPositiveSpeed(f64),
    #[error("vessel collapsed at the tip: A_R = {a_r} from traces {trace:?}")]
    CollapsedArea { a_r: f64, trace: Box<TraceData> },
    #[error(
        "velocity coupling has no real root: discriminant = {discriminant}, s0 = {s0}, s1 = {s1}"
    )]
    NegativeDiscriminant { discriminant: f64, s0: f64, s1: f64 },
}

/// What to do when the velocity quadratic has no real root.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscriminantPolicy {
    /// Abort with [`CouplingError::NegativeDiscriminant`].
    #[default]
    Fail,
    /// Replace the discriminant by zero and take the double root.
    Clamp,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AreaCoupling {
    pub a_r: f64,
    pub a_l: f64,
    pub va_r: f64,
    pub va_l: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityCoupling {
    pub u_r: f64,
    pub u_l: f64,
    pub vu_r: f64,
    pub vu_l: f64,
    /// Parameter on the left Lax curve.
    pub sigma_minus: f64,
    /// Parameter on the right Lax curve.
    pub sigma_plus: f64,
}

/// Boundary datum for the device flow: always points into the catheter.
#[inline]
pub fn device_boundary_velocity(w_minus: f64) -> f64 {
    -w_minus.abs()
}

/// Closed-form area and area-flux coupling data.
pub fn solve_area_coupling(
    trace: &TraceData,
    lambda: f64,
    area_c: f64,
    w_r: f64,
) -> Result<AreaCoupling, CouplingError> {
    if !(lambda > 0.0) {
        return Err(CouplingError::NonPositiveSpeed(lambda));
    }
    let device_flux = area_c * w_r;
    let a_r = 0.5 * (trace.a_minus + trace.a_plus - area_c)
        + (trace.va_minus - trace.va_plus + device_flux) / (2.0 * lambda);
    let va_r = 0.5 * (trace.va_minus + trace.va_plus - device_flux)
        + 0.5 * lambda * (trace.a_minus - trace.a_plus + area_c);
    if !(a_r > 0.0) {
        return Err(CouplingError::CollapsedArea {
            a_r,
            trace: Box::new(*trace),
        });
    }
    Ok(AreaCoupling {
        a_r,
        a_l: a_r + area_c,
        va_r,
        va_l: va_r + device_flux,
    })
}

/// Coefficients of `a s² + b s + c = 0` for the right-side Lax parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityQuadratic {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub s0: f64,
    pub s1: f64,
}

impl VelocityQuadratic {
    pub fn new(trace: &TraceData, a_r: f64, a_l: f64, w_r: f64, lambda: f64) -> Self {
        let area_c = a_l - a_r;
        let s0 = a_r * trace.u_minus + area_c * w_r - a_l * trace.u_plus;
        let s1 = trace.vu_minus
            + 0.5 * (trace.u_plus * trace.u_plus - trace.u_minus * trace.u_minus)
            - trace.vu_plus;
        let ratio = a_l / a_r;
        let shift = s0 / a_r;
        Self {
            a: 0.5 * (ratio * ratio - 1.0),
            b: lambda * (1.0 + ratio) + trace.u_minus * ratio - trace.u_plus - shift * ratio,
            c: (0.5 * shift - lambda - trace.u_minus) * shift - s1,
            s0,
            s1,
        }
    }

    pub fn eval(&self, sigma: f64) -> f64 {
        (self.a * sigma + self.b) * sigma + self.c
    }
}

/// Real root of `a s² + b s + c` with the smallest magnitude; on a
/// magnitude tie the non-negative root wins. `a == 0` falls back to the
/// linear equation, and to zero when that is degenerate as well.
///
/// Returns `Err(discriminant)` when there is no real root and the policy is
/// [`DiscriminantPolicy::Fail`].
pub fn select_min_abs_root(a: f64, b: f64, c: f64, policy: DiscriminantPolicy) -> Result<f64, f64> {
    if a == 0.0 {
        return Ok(if b == 0.0 { 0.0 } else { -c / b });
    }
    let mut disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        match policy {
            DiscriminantPolicy::Fail => return Err(disc),
            DiscriminantPolicy::Clamp => disc = 0.0,
        }
    }
    let q = -0.5 * (b + disc.sqrt().copysign(b));
    if q == 0.0 {
        // b == 0 and disc == 0, hence c == 0
        return Ok(0.0);
    }
    let r1 = q / a;
    let r2 = c / q;
    Ok(if r1.abs() < r2.abs() {
        r1
    } else if r2.abs() < r1.abs() {
        r2
    } else {
        r1.max(r2)
    })
}

/// Velocity and velocity-flux coupling data given the area coupling.
pub fn solve_velocity_coupling(
    trace: &TraceData,
    a_r: f64,
    a_l: f64,
    w_r: f64,
    lambda: f64,
    policy: DiscriminantPolicy,
) -> Result<VelocityCoupling, CouplingError> {
    if !(lambda > 0.0) {
        return Err(CouplingError::NonPositiveSpeed(lambda));
    }
    if !(a_r > 0.0) {
        return Err(CouplingError::CollapsedArea {
            a_r,
            trace: Box::new(*trace),
        });
    }
    let quad = VelocityQuadratic::new(trace, a_r, a_l, w_r, lambda);
    let leading = if a_l - a_r < DEGENERATE_DEVICE_AREA {
        0.0
    } else {
        quad.a
    };
    let sigma_plus =
        select_min_abs_root(leading, quad.b, quad.c, policy).map_err(|discriminant| {
            CouplingError::NegativeDiscriminant {
                discriminant,
                s0: quad.s0,
                s1: quad.s1,
            }
        })?;
    let sigma_minus = quad.s0 / a_r - (a_l / a_r) * sigma_plus;
    Ok(VelocityCoupling {
        u_r: trace.u_minus - sigma_minus,
        u_l: trace.u_plus + sigma_plus,
        vu_r: trace.vu_minus + lambda * sigma_minus,
        vu_l: trace.vu_plus + lambda * sigma_plus,
        sigma_minus,
        sigma_plus,
    })
}

/// The full interface solver with the default (failing) discriminant policy.
pub fn riemann_solve(
    trace: &TraceData,
    lambda: f64,
    area_c: f64,
) -> Result<CouplingData, CouplingError> {
    riemann_solve_with(trace, lambda, area_c, DiscriminantPolicy::Fail)
}

pub fn riemann_solve_with(
    trace: &TraceData,
    lambda: f64,
    area_c: f64,
    policy: DiscriminantPolicy,
) -> Result<CouplingData, CouplingError> {
    trace.validate()?;
    let w_r = device_boundary_velocity(trace.w_minus);
    let area = solve_area_coupling(trace, lambda, area_c, w_r)?;
    let vel = solve_velocity_coupling(trace, area.a_r, area.a_l, w_r, lambda, policy)?;
    Ok(CouplingData {
        a_r: area.a_r,
        u_r: vel.u_r,
        va_r: area.va_r,
        vu_r: vel.vu_r,
        w_r,
        a_l: area.a_l,
        u_l: vel.u_l,
        va_l: area.va_l,
        vu_l: vel.vu_l,
    })
}
