//! Exact pointwise evaluation of the model: force function, equations of
//! motion, Lagrangian, Hamiltonian, and the velocity/momentum charts.
//!
//! The frame rotates with the primaries at mean motion n; the origin is the
//! barycenter, the larger (radiating) primary sits at (-mu, 0) and the
//! smaller (oblate) one at (1-mu, 0). The velocity chart is primary
//! throughout: drag makes the flow dissipative, so the canonical chart is a
//! derived view rather than the native one.

use serde::Serialize;
use thiserror::Error;

use crate::params::SystemParams;

/// Squared-distance floor below which evaluation refuses to proceed.
const SINGULARITY_SQ: f64 = 1e-24;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum DynamicsError {
    #[error("state at a primary: r1 = {r1:.3e}, r2 = {r2:.3e}")]
    Singularity { r1: f64, r2: f64 },
}

/// Planar rotating-frame state in the velocity chart.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhaseState {
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
}

impl PhaseState {
    pub fn new(x: f64, y: f64, vx: f64, vy: f64) -> Self {
        Self { x, y, vx, vy }
    }

    pub fn at_rest(x: f64, y: f64) -> Self {
        Self::new(x, y, 0.0, 0.0)
    }
}

/// Planar state in the canonical chart; momenta follow the Legendre map of
/// the Lagrangian, whose drag part is velocity-independent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CanonicalState {
    pub x: f64,
    pub y: f64,
    pub px: f64,
    pub py: f64,
}

/// Squared distances to the primaries, guarded against the singularities.
fn radii_sq(mu: f64, x: f64, y: f64) -> Result<(f64, f64), DynamicsError> {
    let r1s = (x + mu) * (x + mu) + y * y;
    let r2s = (x + mu - 1.0) * (x + mu - 1.0) + y * y;
    if r1s < SINGULARITY_SQ || r2s < SINGULARITY_SQ {
        return Err(DynamicsError::Singularity {
            r1: r1s.sqrt(),
            r2: r2s.sqrt(),
        });
    }
    Ok((r1s, r2s))
}

/// Force function: rotational potential, photogravitational pull of the
/// larger primary, pull and oblateness of the smaller one, and the drag
/// brace with its quadrant-aware arctan term.
pub fn force_function(p: &SystemParams, s: &PhaseState) -> Result<f64, DynamicsError> {
    let (mu, n) = (p.mu(), p.n());
    let (r1s, r2s) = radii_sq(mu, s.x, s.y)?;
    let r1 = r1s.sqrt();
    let r2 = r2s.sqrt();
    let radial = ((s.x + mu) * s.vx + s.y * s.vy) / (2.0 * r1s);
    Ok(0.5 * n * n * (s.x * s.x + s.y * s.y)
        + (1.0 - mu) * p.q1() / r1
        + mu / r2
        + 0.5 * mu * p.a2() / (r2s * r2)
        + p.w1() * (radial - n * s.y.atan2(s.x + mu)))
}

/// Right-hand side accelerations (xddot, yddot) of the equations of motion,
/// Coriolis terms included.
pub fn eom_rhs(p: &SystemParams, s: &PhaseState) -> Result<(f64, f64), DynamicsError> {
    let (mu, n, q1, a2, w1) = (p.mu(), p.n(), p.q1(), p.a2(), p.w1());
    let (r1s, r2s) = radii_sq(mu, s.x, s.y)?;
    let r1_3 = r1s * r1s.sqrt();
    let r2_3 = r2s * r2s.sqrt();
    let r2_5 = r2_3 * r2s;
    let xm = s.x + mu;
    let radial = (xm * s.vx + s.y * s.vy) / r1s;
    let ax = 2.0 * n * s.vy + n * n * s.x
        - (1.0 - mu) * q1 * xm / r1_3
        - mu * (xm - 1.0) / r2_3
        - 1.5 * mu * a2 * (xm - 1.0) / r2_5
        - (w1 / r1s) * (xm * radial + s.vx - n * s.y);
    let ay = -2.0 * n * s.vx + n * n * s.y
        - (1.0 - mu) * q1 * s.y / r1_3
        - mu * s.y / r2_3
        - 1.5 * mu * a2 * s.y / r2_5
        - (w1 / r1s) * (s.y * radial + s.vy + n * xm);
    Ok((ax, ay))
}

/// Lagrangian: kinetic and gyroscopic terms plus the force function.
pub fn lagrangian(p: &SystemParams, s: &PhaseState) -> Result<f64, DynamicsError> {
    let kinetic = 0.5 * (s.vx * s.vx + s.vy * s.vy);
    let gyro = p.n() * (s.x * s.vy - s.vx * s.y);
    Ok(kinetic + gyro + force_function(p, s)?)
}

/// Hamiltonian in its mixed form: written in velocities, with the drag
/// velocity brace cancelled against the momentum map, leaving only the
/// arctan term of the drag.
pub fn hamiltonian(p: &SystemParams, s: &PhaseState) -> Result<f64, DynamicsError> {
    let (mu, n) = (p.mu(), p.n());
    let (r1s, r2s) = radii_sq(mu, s.x, s.y)?;
    let r1 = r1s.sqrt();
    let r2 = r2s.sqrt();
    Ok(0.5 * (s.vx * s.vx + s.vy * s.vy)
        - 0.5 * n * n * (s.x * s.x + s.y * s.y)
        - (1.0 - mu) * p.q1() / r1
        - mu / r2
        - 0.5 * mu * p.a2() / (r2s * r2)
        + n * p.w1() * s.y.atan2(s.x + mu))
}

/// Hamiltonian evaluated on the canonical chart (converts charts first).
pub fn hamiltonian_canonical(
    p: &SystemParams,
    c: &CanonicalState,
) -> Result<f64, DynamicsError> {
    hamiltonian(p, &from_momenta(p, c)?)
}

/// Velocity chart to canonical chart. The drag contribution to the momenta
/// depends only on position, so the map is an explicit shift.
pub fn to_momenta(p: &SystemParams, s: &PhaseState) -> Result<CanonicalState, DynamicsError> {
    let (mu, n, w1) = (p.mu(), p.n(), p.w1());
    let (r1s, _) = radii_sq(mu, s.x, s.y)?;
    Ok(CanonicalState {
        x: s.x,
        y: s.y,
        px: s.vx - n * s.y + 0.5 * w1 * (s.x + mu) / r1s,
        py: s.vy + n * s.x + 0.5 * w1 * s.y / r1s,
    })
}

/// Canonical chart back to the velocity chart; exact inverse of
/// [`to_momenta`].
pub fn from_momenta(p: &SystemParams, c: &CanonicalState) -> Result<PhaseState, DynamicsError> {
    let (mu, n, w1) = (p.mu(), p.n(), p.w1());
    let (r1s, _) = radii_sq(mu, c.x, c.y)?;
    Ok(PhaseState {
        x: c.x,
        y: c.y,
        vx: c.px + n * c.y - 0.5 * w1 * (c.x + mu) / r1s,
        vy: c.py - n * c.x - 0.5 * w1 * c.y / r1s,
    })
}
