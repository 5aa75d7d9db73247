//! Triangular equilibrium points: the first-order closed form and a
//! Newton-refined exact root of the rest-state equations of motion.

use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{self, DynamicsError, PhaseState};
use crate::params::SystemParams;

/// Which triangular point: L4 sits above the primaries' axis (y > 0),
/// L5 below.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    L4,
    L5,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::L4 => 1.0,
            Branch::L5 => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    ClosedForm,
    Refined,
}

/// A located triangular point with its rest-state residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EquilibriumPoint {
    pub x_star: f64,
    pub y_star: f64,
    pub branch: Branch,
    /// Max-norm of the accelerations at the point at rest.
    pub residual_norm: f64,
    pub method: Method,
}

impl EquilibriumPoint {
    /// The point as a zero-velocity state.
    pub fn state(&self) -> PhaseState {
        PhaseState::at_rest(self.x_star, self.y_star)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EquilibriaError {
    #[error("closed form invalid at this parameter (degenerate correction denominator)")]
    ClosedFormDegenerate,
    #[error(
        "Newton iteration did not converge: residual {residual:.3e} at ({x:.6}, {y:.6}) \
         after {iterations} iterations"
    )]
    NoConvergence {
        x: f64,
        y: f64,
        residual: f64,
        iterations: u32,
    },
    #[error("singular Jacobian in Newton iteration at ({x:.6}, {y:.6})")]
    SingularJacobian { x: f64, y: f64 },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// Rest-state residual of the equations of motion at (x, y).
pub fn equilibrium_residual(
    p: &SystemParams,
    x: f64,
    y: f64,
) -> Result<(f64, f64), DynamicsError> {
    dynamics::eom_rhs(p, &PhaseState::at_rest(x, y))
}

fn residual_norm(p: &SystemParams, x: f64, y: f64) -> Result<f64, DynamicsError> {
    let (r1, r2) = equilibrium_residual(p, x, y)?;
    Ok(r1.abs().max(r2.abs()))
}

/// First-order closed form of the triangular point: the classical
/// equilateral configuration shrunk by the radiation factor, with first-order
/// drag and oblateness corrections.
///
/// The x correction is evaluated with the leading factor distributed into
/// the fraction, which removes the spurious 0/0 at mass ratio 1/2 where the
/// leading displacement crosses zero; the two forms are algebraically
/// identical.
pub fn triangular_closed_form(
    p: &SystemParams,
    branch: Branch,
) -> Result<EquilibriumPoint, EquilibriaError> {
    let (mu, a2, w1, n, delta) = (p.mu(), p.a2(), p.w1(), p.n(), p.delta());
    let d2 = delta * delta;
    let x0 = 0.5 * d2 - mu;
    let y0_sq = d2 * (1.0 - 0.25 * d2);
    if y0_sq <= 0.0 {
        return Err(EquilibriaError::ClosedFormDegenerate);
    }
    let y0 = branch.sign() * y0_sq.sqrt();

    let denom = 3.0 * mu * (1.0 - mu) * y0;
    if w1 != 0.0 && denom.abs() < 1e-13 {
        return Err(EquilibriaError::ClosedFormDegenerate);
    }

    let x_num = n * w1 * ((1.0 - mu) * (1.0 - 2.5 * a2) + mu * (1.0 - 0.5 * a2) * 0.5 * d2);
    let x_star = x0 - x_num / denom - 0.5 * d2 * a2;

    let y_num =
        n * w1 * d2 * (2.0 * mu - 1.0 - mu * (1.0 - 1.5 * a2) * 0.5 * d2 + 3.5 * (1.0 - mu) * a2);
    let brace = 1.0 - y_num / (denom * y0 * y0) - d2 * (1.0 - 0.5 * d2) * a2 / (y0 * y0);
    if !brace.is_finite() || brace <= 0.0 || !x_star.is_finite() {
        return Err(EquilibriaError::ClosedFormDegenerate);
    }
    let y_star = y0 * brace.sqrt();

    Ok(EquilibriumPoint {
        x_star,
        y_star,
        branch,
        residual_norm: residual_norm(p, x_star, y_star)?,
        method: Method::ClosedForm,
    })
}

/// Damped Newton refinement of the rest-state root, starting from `initial`.
///
/// Jacobian by central differences (step 1e-7); the step is halved while it
/// fails to reduce the residual. Converges to max-norm 1e-12 or errors with
/// the last iterate.
pub fn refine_equilibrium(
    p: &SystemParams,
    initial: &EquilibriumPoint,
) -> Result<EquilibriumPoint, EquilibriaError> {
    const TOL: f64 = 1e-12;
    const FD_STEP: f64 = 1e-7;
    const MAX_ITER: u32 = 50;

    let (mut x, mut y) = (initial.x_star, initial.y_star);
    let mut res = equilibrium_residual(p, x, y)?;
    let mut norm = res.0.abs().max(res.1.abs());

    for iter in 0..MAX_ITER {
        if norm <= TOL {
            return Ok(EquilibriumPoint {
                x_star: x,
                y_star: y,
                branch: if y >= 0.0 { Branch::L4 } else { Branch::L5 },
                residual_norm: norm,
                method: Method::Refined,
            });
        }
        let h = FD_STEP;
        let rxp = equilibrium_residual(p, x + h, y)?;
        let rxm = equilibrium_residual(p, x - h, y)?;
        let ryp = equilibrium_residual(p, x, y + h)?;
        let rym = equilibrium_residual(p, x, y - h)?;
        let j11 = (rxp.0 - rxm.0) / (2.0 * h);
        let j12 = (ryp.0 - rym.0) / (2.0 * h);
        let j21 = (rxp.1 - rxm.1) / (2.0 * h);
        let j22 = (ryp.1 - rym.1) / (2.0 * h);
        let det = j11 * j22 - j12 * j21;
        if det.abs() < 1e-300 {
            return Err(EquilibriaError::SingularJacobian { x, y });
        }
        let dx = -(j22 * res.0 - j12 * res.1) / det;
        let dy = -(-j21 * res.0 + j11 * res.1) / det;

        // Damping: halve until the residual actually drops.
        let mut lambda = 1.0;
        let mut advanced = false;
        for _ in 0..30 {
            let (xn, yn) = (x + lambda * dx, y + lambda * dy);
            // Err means the step landed on a primary; shorten and retry.
            if let Ok(rn) = equilibrium_residual(p, xn, yn) {
                let nn = rn.0.abs().max(rn.1.abs());
                if nn < norm {
                    x = xn;
                    y = yn;
                    res = rn;
                    norm = nn;
                    advanced = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !advanced {
            return Err(EquilibriaError::NoConvergence {
                x,
                y,
                residual: norm,
                iterations: iter,
            });
        }
    }
    if norm <= TOL {
        return Ok(EquilibriumPoint {
            x_star: x,
            y_star: y,
            branch: if y >= 0.0 { Branch::L4 } else { Branch::L5 },
            residual_norm: norm,
            method: Method::Refined,
        });
    }
    Err(EquilibriaError::NoConvergence {
        x,
        y,
        residual: norm,
        iterations: MAX_ITER,
    })
}

/// Closed form followed by refinement; the common entry point.
pub fn refined_triangular_point(
    p: &SystemParams,
    branch: Branch,
) -> Result<EquilibriumPoint, EquilibriaError> {
    let seed = triangular_closed_form(p, branch)?;
    refine_equilibrium(p, &seed)
}
