//! Dimensionless problem parameters and their derived constants.
//!
//! Four numbers control the model: the mass ratio `mu` of the smaller
//! primary, the radiation factor `q1` of the larger primary (1 is pure
//! gravity; values below 1 mean radiation pressure cancels part of its
//! pull), the oblateness coefficient `a2` of the smaller primary, and the
//! Poynting-Robertson drag strength `w1`. Everything downstream uses the
//! derived mean motion n, with n^2 = 1 + (3/2) a2, and delta = q1^(1/3),
//! which sets the scale of the triangular-point displacement.

use serde::Serialize;
use thiserror::Error;

/// Parameter validation failure, naming the offending field and its bound.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParamError {
    #[error("mu out of range: {0} (expected 0 < mu <= 0.5)")]
    MuOutOfRange(f64),
    #[error("q1 out of range: {0} (expected 0 < q1 <= 1)")]
    Q1OutOfRange(f64),
    #[error("a2 out of range: {0} (expected a2 >= 0)")]
    A2OutOfRange(f64),
    #[error("w1 out of range: {0} (expected w1 >= 0)")]
    W1OutOfRange(f64),
    #[error("cd out of range: {0} (expected cd > 0)")]
    CdOutOfRange(f64),
    #[error("grain parameters give nonpositive q1: {0}")]
    NonpositiveQ1(f64),
}

/// How the drag strength is supplied.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DragSpec {
    /// Direct value of the drag parameter.
    W1(f64),
    /// Speed-of-light constant; the drag parameter is derived from it as
    /// w1 = (1 - mu)(1 - q1)/cd.
    Cd(f64),
}

/// Validated, immutable parameter bundle.
///
/// Construction is the only place invariants are checked; a value of this
/// type always satisfies 0 < mu <= 1/2, 0 < q1 <= 1, a2 >= 0, w1 >= 0,
/// n = sqrt(1 + 1.5 a2), delta = q1^(1/3).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SystemParams {
    mu: f64,
    q1: f64,
    a2: f64,
    w1: f64,
    n: f64,
    delta: f64,
}

impl SystemParams {
    /// Builds a parameter bundle, deriving n, delta, and (for the `Cd`
    /// route) the drag parameter eagerly.
    pub fn new(mu: f64, q1: f64, a2: f64, drag: DragSpec) -> Result<Self, ParamError> {
        if !(mu > 0.0 && mu <= 0.5) {
            return Err(ParamError::MuOutOfRange(mu));
        }
        if !(q1 > 0.0 && q1 <= 1.0) {
            return Err(ParamError::Q1OutOfRange(q1));
        }
        if !(a2 >= 0.0 && a2.is_finite()) {
            return Err(ParamError::A2OutOfRange(a2));
        }
        let w1 = match drag {
            DragSpec::W1(w1) => {
                if !(w1 >= 0.0 && w1.is_finite()) {
                    return Err(ParamError::W1OutOfRange(w1));
                }
                w1
            }
            DragSpec::Cd(cd) => {
                if !(cd > 0.0 && cd.is_finite()) {
                    return Err(ParamError::CdOutOfRange(cd));
                }
                (1.0 - mu) * (1.0 - q1) / cd
            }
        };
        Ok(Self {
            mu,
            q1,
            a2,
            w1,
            n: mean_motion(a2),
            delta: q1.cbrt(),
        })
    }

    /// Shorthand for the direct-drag route.
    pub fn with_w1(mu: f64, q1: f64, a2: f64, w1: f64) -> Result<Self, ParamError> {
        Self::new(mu, q1, a2, DragSpec::W1(w1))
    }

    /// Classical circular problem: gravity only.
    pub fn classical(mu: f64) -> Result<Self, ParamError> {
        Self::with_w1(mu, 1.0, 0.0, 0.0)
    }

    #[inline]
    pub fn mu(&self) -> f64 {
        self.mu
    }

    #[inline]
    pub fn q1(&self) -> f64 {
        self.q1
    }

    #[inline]
    pub fn a2(&self) -> f64 {
        self.a2
    }

    #[inline]
    pub fn w1(&self) -> f64 {
        self.w1
    }

    /// Perturbed mean motion of the primaries.
    #[inline]
    pub fn n(&self) -> f64 {
        self.n
    }

    /// delta = q1^(1/3).
    #[inline]
    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// Mean motion of the primary orbit under oblateness: sqrt(1 + (3/2) a2).
///
/// Strictly increasing in `a2`; equals 1 in the spherical case.
#[inline]
pub fn mean_motion(a2: f64) -> f64 {
    debug_assert!(a2 >= 0.0);
    (1.0 + 1.5 * a2).sqrt()
}

/// Radiation factor of a spherical grain: q1 = 1 - 5.6e-5 * efficiency /
/// (radius * density), with radius in cm and density in g/cm^3.
///
/// The grouping of the grain constants is an adopted convention; radius and
/// density enter only through their product. Errors when the result is not
/// positive (radiation pressure exceeding gravity is outside the model).
pub fn radiation_factor(
    grain_radius: f64,
    grain_density: f64,
    efficiency: f64,
) -> Result<f64, ParamError> {
    assert!(
        grain_radius > 0.0 && grain_density > 0.0 && efficiency >= 0.0,
        "grain parameters must be positive (efficiency may be zero)"
    );
    let q1 = 1.0 - 5.6e-5 * efficiency / (grain_radius * grain_density);
    if q1 <= 0.0 {
        return Err(ParamError::NonpositiveQ1(q1));
    }
    Ok(q1)
}
