//! Linear stability analysis at the triangular points: the quadratic part
//! of the Hamiltonian, its characteristic quartic and frequencies, the
//! symplectic normal-form transformation, resonance scanning, and the
//! exact linearization of the dissipative equations of motion.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{self, DynamicsError, PhaseState};
use crate::equilibria::{self, Branch, EquilibriaError, EquilibriumPoint};
use crate::jets::{self, JetsError};
use crate::params::SystemParams;

/// |D| below this is treated as sitting on the stability boundary.
pub const MARGINAL_D_TOL: f64 = 1e-12;
/// |Re lambda| below this counts as neutral for the dissipative verdict.
pub const DRAG_RE_TOL: f64 = 1e-12;
pub const EXACT_RESONANCE_TOL: f64 = 1e-9;
pub const NEAR_RESONANCE_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NormalizationError {
    #[error("frequencies too close for the normal form: omega1 = {omega1}, omega2 = {omega2}")]
    DegenerateFrequencies { omega1: f64, omega2: f64 },
    #[error("normal form requires a linearly stable point (verdict {verdict:?}, D = {discriminant:.3e})")]
    UnstableInput {
        verdict: Verdict,
        discriminant: f64,
    },
    #[error(transparent)]
    Jets(#[from] JetsError),
    #[error(transparent)]
    Equilibria(#[from] EquilibriaError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Stable,
    Unstable,
    Marginal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CVal {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for CVal {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ResonanceKind {
    Exact,
    Near,
}

/// A small-integer combination k1*omega1 + k2*omega2 close to zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Resonance {
    pub k1: i32,
    pub k2: i32,
    pub value: f64,
    pub kind: ResonanceKind,
}

/// Quadratic part of the Hamiltonian about an equilibrium:
/// H2 = (px^2 + py^2)/2 + n (y px - x py) + e x^2 + f y^2 + g xy + drag
/// cross terms, with the full Hessian alongside the named coefficients.
#[derive(Debug, Clone, Serialize)]
pub struct QuadraticHamiltonian {
    pub n: f64,
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub full_matrix: [[f64; 4]; 4],
}

impl QuadraticHamiltonian {
    pub fn hessian(&self) -> Matrix4<f64> {
        Matrix4::from_fn(|i, j| self.full_matrix[i][j])
    }

    /// H2 evaluated at phase displacements (x, y, px, py).
    pub fn value(&self, z: [f64; 4]) -> f64 {
        let v = Vector4::from_column_slice(&z);
        0.5 * (v.transpose() * self.hessian() * v)[(0, 0)]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QuarticSpectrum {
    pub quartic: [f64; 5],
    pub roots: [CVal; 4],
    pub discriminant: f64,
    pub omega1: Option<f64>,
    pub omega2: Option<f64>,
    pub verdict: Verdict,
}

/// Exact linearization of the dissipative equations of motion.
#[derive(Debug, Clone, Serialize)]
pub struct DragExact {
    pub matrix: [[f64; 4]; 4],
    pub eigenvalues: [CVal; 4],
    pub max_re: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    pub params: SystemParams,
    pub equilibrium: EquilibriumPoint,
    pub quartic: [f64; 5],
    pub roots: [CVal; 4],
    pub omega1: Option<f64>,
    pub omega2: Option<f64>,
    #[serde(rename = "D")]
    pub discriminant: f64,
    pub resonances: Vec<Resonance>,
    pub verdict: Verdict,
    pub drag_exact: Option<DragExact>,
}

/// Symplectic basis in which H2 reduces to omega1 I1 - omega2 I2.
#[derive(Debug, Clone)]
pub struct NormalFormTransform {
    pub t: [[f64; 4]; 4],
    pub omega1: f64,
    pub omega2: f64,
}

impl NormalFormTransform {
    pub fn matrix(&self) -> Matrix4<f64> {
        Matrix4::from_fn(|i, j| self.t[i][j])
    }

    pub fn apply(&self, z: [f64; 4]) -> [f64; 4] {
        let out = self.matrix() * Vector4::from_column_slice(&z);
        [out[0], out[1], out[2], out[3]]
    }
}

/// Quadratic part of the Hamiltonian read off the degree-2 slice of the
/// jet expansion.
pub fn h2_from_hessian(
    p: &SystemParams,
    eq: &EquilibriumPoint,
) -> Result<QuadraticHamiltonian, JetsError> {
    let jet = jets::expand_hamiltonian(p, eq)?;
    let mut s = [[0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let mut e = [0u8; 4];
            e[i] += 1;
            e[j] += 1;
            let c = jet.coeff(e);
            s[i][j] = if i == j { 2.0 * c } else { c };
        }
    }
    Ok(QuadraticHamiltonian {
        n: p.n(),
        e: jet.coeff([2, 0, 0, 0]),
        f: jet.coeff([0, 2, 0, 0]),
        g: jet.coeff([1, 1, 0, 0]),
        full_matrix: s,
    })
}

/// Same coefficients from closed-form second derivatives, kept as an
/// independent route for cross-checks against the jet slice.
pub fn efg_hessian(p: &SystemParams, eq: &EquilibriumPoint) -> (f64, f64, f64) {
    let (mu, n, q1, a2, w1) = (p.mu(), p.n(), p.q1(), p.a2(), p.w1());
    let a = eq.x_star + mu;
    let b = eq.y_star;
    let am1 = a - 1.0;
    let f1 = (a * a + b * b).powf(-0.5);
    let f2 = (am1 * am1 + b * b).powf(-0.5);
    let f3 = f1 * f1;
    let oxx = (1.0 - mu) * q1 * (3.0 * a * a * f1.powi(5) - f1.powi(3))
        + mu * (3.0 * am1 * am1 * f2.powi(5) - f2.powi(3))
        + 0.5 * mu * a2 * (15.0 * am1 * am1 * f2.powi(7) - 3.0 * f2.powi(5));
    let oyy = (1.0 - mu) * q1 * (3.0 * b * b * f1.powi(5) - f1.powi(3))
        + mu * (3.0 * b * b * f2.powi(5) - f2.powi(3))
        + 0.5 * mu * a2 * (15.0 * b * b * f2.powi(7) - 3.0 * f2.powi(5));
    let oxy = (1.0 - mu) * q1 * 3.0 * a * b * f1.powi(5)
        + mu * 3.0 * am1 * b * f2.powi(5)
        + 0.5 * mu * a2 * 15.0 * am1 * b * f2.powi(7);
    // Second derivatives of atan2(y + b, x + a) at the center.
    let gxx = 2.0 * a * b * f3 * f3;
    let gyy = -gxx;
    let gxy = (b * b - a * a) * f3 * f3;
    // Velocity-map gradients at rest; their squares are the kinetic part
    // of the position Hessian.
    let f3x = -2.0 * a * f3 * f3;
    let f3y = -2.0 * b * f3 * f3;
    let vx_x = -(w1 / 2.0) * (f3 + a * f3x);
    let vx_y = n - (w1 / 2.0) * a * f3y;
    let vy_x = -n - (w1 / 2.0) * b * f3x;
    let vy_y = -(w1 / 2.0) * (f3 + b * f3y);
    let hxx = vx_x * vx_x + vy_x * vy_x - n * n - oxx + n * w1 * gxx;
    let hyy = vx_y * vx_y + vy_y * vy_y - n * n - oyy + n * w1 * gyy;
    let hxy = vx_x * vx_y + vy_x * vy_y - oxy + n * w1 * gxy;
    (0.5 * hxx, 0.5 * hyy, hxy)
}

/// Coefficients of lambda^4 + p lambda^2 + r built from the quadratic form,
/// returned as the dense [1, 0, p, 0, r].
pub fn characteristic_quartic(q: &QuadraticHamiltonian) -> [f64; 5] {
    let (n, e, f, g) = (q.n, q.e, q.f, q.g);
    let pc = 2.0 * (e + f + n * n);
    let rc = 4.0 * e * f - g * g + n.powi(4) - 2.0 * n * n * (e + f);
    [1.0, 0.0, pc, 0.0, rc]
}

/// Roots, discriminant, frequencies, and verdict of the even quartic.
pub fn spectrum(q: &QuadraticHamiltonian) -> QuarticSpectrum {
    let quartic = characteristic_quartic(q);
    let (pc, rc) = (quartic[2], quartic[4]);
    let d = pc * pc - 4.0 * rc;
    let mut roots: Vec<Complex64>;
    let mut omega = None;
    if d >= 0.0 {
        // lambda^2 real: each branch is a real or imaginary pair.
        let s1 = (-pc + d.sqrt()) / 2.0;
        let s2 = (-pc - d.sqrt()) / 2.0;
        roots = Vec::with_capacity(4);
        for s in [s1, s2] {
            if s <= 0.0 {
                let w = (-s).sqrt();
                roots.push(Complex64::new(0.0, w));
                roots.push(Complex64::new(0.0, -w));
            } else {
                let r = s.sqrt();
                roots.push(Complex64::new(r, 0.0));
                roots.push(Complex64::new(-r, 0.0));
            }
        }
        if s1 < 0.0 && s2 < 0.0 {
            // s2 <= s1 < 0, so s2 carries the larger frequency.
            omega = Some(((-s2).sqrt(), (-s1).sqrt()));
        }
    } else {
        // Complex lambda^2: a genuine quartet with nonzero real parts.
        let s = Complex64::new(-pc / 2.0, (-d).sqrt() / 2.0);
        let l = s.sqrt();
        roots = vec![l, l.conj(), -l, -l.conj()];
    }
    roots.sort_by(|a, b| {
        b.re.partial_cmp(&a.re)
            .unwrap()
            .then(b.im.partial_cmp(&a.im).unwrap())
    });
    let verdict = if d.abs() < MARGINAL_D_TOL {
        Verdict::Marginal
    } else if d > 0.0 && omega.is_some() {
        Verdict::Stable
    } else {
        Verdict::Unstable
    };
    QuarticSpectrum {
        quartic,
        roots: [
            roots[0].into(),
            roots[1].into(),
            roots[2].into(),
            roots[3].into(),
        ],
        discriminant: d,
        omega1: omega.map(|o| o.0),
        omega2: omega.map(|o| o.1),
        verdict,
    }
}

/// Jacobian of the first-order equations of motion (x, y, vx, vy) at the
/// equilibrium, by central differences on the exact right-hand side.
pub fn linearize_eom(
    p: &SystemParams,
    eq: &EquilibriumPoint,
) -> Result<[[f64; 4]; 4], DynamicsError> {
    const H: f64 = 1e-7;
    let base = eq.state();
    let rhs = |s: &PhaseState| -> Result<[f64; 4], DynamicsError> {
        let (ax, ay) = dynamics::eom_rhs(p, s)?;
        Ok([s.vx, s.vy, ax, ay])
    };
    let bumps: [fn(&mut PhaseState, f64); 4] = [
        |s, h| s.x += h,
        |s, h| s.y += h,
        |s, h| s.vx += h,
        |s, h| s.vy += h,
    ];
    let mut m = [[0.0; 4]; 4];
    for (j, bump) in bumps.iter().enumerate() {
        let mut plus = base;
        let mut minus = base;
        bump(&mut plus, H);
        bump(&mut minus, -H);
        let fp = rhs(&plus)?;
        let fm = rhs(&minus)?;
        for (row, (p, q)) in m.iter_mut().zip(fp.iter().zip(fm.iter())) {
            row[j] = (p - q) / (2.0 * H);
        }
    }
    Ok(m)
}

/// Monic characteristic polynomial of a 4x4 matrix by the trace recurrence;
/// returns [1, a3, a2, a1, a0].
pub fn characteristic_polynomial(m: &[[f64; 4]; 4]) -> [f64; 5] {
    let a = Matrix4::from_fn(|i, j| m[i][j]);
    let mut coeffs = [1.0, 0.0, 0.0, 0.0, 0.0];
    let mut b = Matrix4::identity();
    for (k, slot) in coeffs.iter_mut().enumerate().skip(1) {
        b = a * b;
        let c = -b.trace() / k as f64;
        *slot = c;
        b += Matrix4::identity() * c;
    }
    coeffs
}

/// All roots of a monic real polynomial by simultaneous iteration, with a
/// short Newton polish.
pub fn polynomial_roots(coeffs: &[f64; 5]) -> [Complex64; 4] {
    let eval = |z: Complex64| -> Complex64 {
        coeffs
            .iter()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    };
    let deriv = |z: Complex64| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, &c) in coeffs.iter().enumerate().take(4) {
            acc = acc * z + c * (4 - k) as f64;
        }
        acc
    };
    let seed = Complex64::new(0.4, 0.9);
    let mut z = [seed, seed * seed, seed * seed * seed, seed * seed * seed * seed];
    for _ in 0..100 {
        let mut max_step = 0.0f64;
        for k in 0..4 {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..4 {
                if j != k {
                    denom *= z[k] - z[j];
                }
            }
            let step = eval(z[k]) / denom;
            z[k] -= step;
            max_step = max_step.max(step.norm());
        }
        if max_step < 1e-14 {
            break;
        }
    }
    for zk in z.iter_mut() {
        for _ in 0..3 {
            let d = deriv(*zk);
            if d.norm() > 1e-300 {
                *zk -= eval(*zk) / d;
            }
        }
    }
    z.sort_by(|a, b| {
        b.re.partial_cmp(&a.re)
            .unwrap()
            .then(b.im.partial_cmp(&a.im).unwrap())
    });
    z
}

/// Dissipative stability route: eigenvalues of the exact linearization.
pub fn drag_exact(
    p: &SystemParams,
    eq: &EquilibriumPoint,
) -> Result<DragExact, DynamicsError> {
    let matrix = linearize_eom(p, eq)?;
    let eigenvalues = polynomial_roots(&characteristic_polynomial(&matrix));
    let max_re = eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let verdict = if max_re > DRAG_RE_TOL {
        Verdict::Unstable
    } else if max_re < -DRAG_RE_TOL {
        Verdict::Stable
    } else {
        Verdict::Marginal
    };
    Ok(DragExact {
        matrix,
        eigenvalues: [
            eigenvalues[0].into(),
            eigenvalues[1].into(),
            eigenvalues[2].into(),
            eigenvalues[3].into(),
        ],
        max_re,
        verdict,
    })
}

/// Small-integer resonances among the frequencies: all |k1| + |k2| <= 4
/// with k1 omega1 + k2 omega2 inside the near tolerance, one combination
/// per sign class.
pub fn detect_resonances(
    omega1: f64,
    omega2: f64,
    exact_tol: f64,
    near_tol: f64,
) -> Vec<Resonance> {
    let mut out = Vec::new();
    for k1 in -4i32..=4 {
        for k2 in -4i32..=4 {
            let order = k1.abs() + k2.abs();
            if order == 0 || order > 4 {
                continue;
            }
            // Keep one representative of each (k1, k2) ~ (-k1, -k2) pair.
            if !(k1 > 0 || (k1 == 0 && k2 > 0)) {
                continue;
            }
            let value = k1 as f64 * omega1 + k2 as f64 * omega2;
            if value.abs() < near_tol {
                let kind = if value.abs() < exact_tol {
                    ResonanceKind::Exact
                } else {
                    ResonanceKind::Near
                };
                out.push(Resonance { k1, k2, value, kind });
            }
        }
    }
    out.sort_by_key(|r| (r.k1.abs() + r.k2.abs(), r.k1, r.k2));
    out
}

/// Symplectic congruence taking the quadratic Hamiltonian to
/// omega1 I1 - omega2 I2. Requires a stable spectrum with separated
/// frequencies.
pub fn normal_form_transform(
    p: &SystemParams,
    eq: &EquilibriumPoint,
) -> Result<NormalFormTransform, NormalizationError> {
    let q = h2_from_hessian(p, eq)?;
    let spec = spectrum(&q);
    let (omega1, omega2) = match (spec.omega1, spec.omega2) {
        (Some(o1), Some(o2)) if spec.verdict == Verdict::Stable => (o1, o2),
        _ => {
            return Err(NormalizationError::UnstableInput {
                verdict: spec.verdict,
                discriminant: spec.discriminant,
            })
        }
    };
    if (omega1 - omega2).abs() < 1e-9 {
        return Err(NormalizationError::DegenerateFrequencies { omega1, omega2 });
    }
    let s = q.hessian();
    let j = symplectic_form();
    let m = j * s;
    let mut t = Matrix4::<f64>::zeros();
    for (slot, &omega) in [omega1, omega2].iter().enumerate() {
        // Kernel direction of M^2 + omega^2 I spans the invariant plane.
        let b = m * m + Matrix4::identity() * (omega * omega);
        let svd = b.svd(false, true);
        let v_t = svd.v_t.as_ref().expect("requested right singular vectors");
        let u = Vector4::from_fn(|i, _| v_t[(3, i)]);
        let w = -(m * u) / omega;
        let mut c = (u.transpose() * j * w)[(0, 0)];
        let mut w = w;
        if c < 0.0 {
            w = -w;
            c = -c;
        }
        let scale = 1.0 / c.sqrt();
        for i in 0..4 {
            t[(i, slot)] = u[i] * scale;
            t[(i, slot + 2)] = w[i] * scale;
        }
    }
    let mut t_arr = [[0.0; 4]; 4];
    for i in 0..4 {
        for k in 0..4 {
            t_arr[i][k] = t[(i, k)];
        }
    }
    Ok(NormalFormTransform {
        t: t_arr,
        omega1,
        omega2,
    })
}

pub fn symplectic_form() -> Matrix4<f64> {
    let mut j = Matrix4::zeros();
    j[(0, 2)] = 1.0;
    j[(1, 3)] = 1.0;
    j[(2, 0)] = -1.0;
    j[(3, 1)] = -1.0;
    j
}

/// Full stability report for one branch: quartic route always, exact
/// dissipative route whenever drag is present (and then the dissipative
/// verdict wins).
pub fn stability_verdict(
    p: &SystemParams,
    branch: Branch,
) -> Result<StabilityReport, NormalizationError> {
    let eq = equilibria::refined_triangular_point(p, branch)?;
    let q = h2_from_hessian(p, &eq)?;
    let spec = spectrum(&q);
    let resonances = match (spec.omega1, spec.omega2) {
        (Some(o1), Some(o2)) => {
            detect_resonances(o1, o2, EXACT_RESONANCE_TOL, NEAR_RESONANCE_TOL)
        }
        _ => Vec::new(),
    };
    let drag = if p.w1() > 0.0 {
        Some(drag_exact(p, &eq)?)
    } else {
        None
    };
    let verdict = drag.as_ref().map_or(spec.verdict, |d| d.verdict);
    Ok(StabilityReport {
        params: *p,
        equilibrium: eq,
        quartic: spec.quartic,
        roots: spec.roots,
        omega1: spec.omega1,
        omega2: spec.omega2,
        discriminant: spec.discriminant,
        resonances,
        verdict,
        drag_exact: drag,
    })
}
