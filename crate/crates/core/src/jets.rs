//! Truncated multivariate Taylor ("jet") arithmetic to total degree 4 in
//! four variables, plus the series expansions of the Lagrangian and
//! Hamiltonian about a triangular equilibrium and the audit of the
//! hand-derived printed coefficient tables against that oracle.
//!
//! The four jet variables are displacements from the expansion point. For
//! the Lagrangian they read (x, y, vx, vy); for the Hamiltonian the last
//! two slots hold momentum displacements (px, py) instead. Velocities and
//! momenta count toward total degree, which is what makes the degree-k
//! slice of the jet the k-th series term.

mod audit;
mod tables;

pub use audit::{audit_series, AuditEntry, SeriesAudit, AUDIT_ABS_TOL, AUDIT_REL_TOL};
pub use tables::{efg_printed, printed_series, PrintedSeries};

use thiserror::Error;

use crate::equilibria::EquilibriumPoint;
use crate::params::SystemParams;

pub const N_VARS: usize = 4;
pub const MAX_DEGREE: usize = 4;
/// Number of monomials of total degree <= 4 in 4 variables: C(8, 4).
pub const N_COEFFS: usize = 70;

/// Exponent tuples in graded lexicographic order.
const fn monomial_table() -> [[u8; N_VARS]; N_COEFFS] {
    let mut mons = [[0u8; N_VARS]; N_COEFFS];
    let mut pos = 0;
    let mut total = 0;
    while total <= MAX_DEGREE {
        let mut i = 0;
        while i <= total {
            let mut j = 0;
            while j <= total - i {
                let mut k = 0;
                while k <= total - i - j {
                    let l = total - i - j - k;
                    mons[pos] = [i as u8, j as u8, k as u8, l as u8];
                    pos += 1;
                    k += 1;
                }
                j += 1;
            }
            i += 1;
        }
        total += 1;
    }
    mons
}

const MONS: [[u8; N_VARS]; N_COEFFS] = monomial_table();

/// Base-5 key of an exponent tuple into the inverse lookup table.
const fn key(e: [u8; N_VARS]) -> usize {
    ((e[0] as usize * 5 + e[1] as usize) * 5 + e[2] as usize) * 5 + e[3] as usize
}

const fn index_table() -> [i8; 625] {
    let mut idx = [-1i8; 625];
    let mut i = 0;
    while i < N_COEFFS {
        idx[key(MONS[i])] = i as i8;
        i += 1;
    }
    idx
}

const IDX: [i8; 625] = index_table();

const fn degree_table() -> [u8; N_COEFFS] {
    let mut deg = [0u8; N_COEFFS];
    let mut i = 0;
    while i < N_COEFFS {
        deg[i] = MONS[i][0] + MONS[i][1] + MONS[i][2] + MONS[i][3];
        i += 1;
    }
    deg
}

const DEG: [u8; N_COEFFS] = degree_table();

/// Product slot of two monomials, or -1 when the product exceeds degree 4.
const fn product_table() -> [[i8; N_COEFFS]; N_COEFFS] {
    let mut prod = [[-1i8; N_COEFFS]; N_COEFFS];
    let mut i = 0;
    while i < N_COEFFS {
        let mut j = 0;
        while j < N_COEFFS {
            if DEG[i] + DEG[j] <= MAX_DEGREE as u8 {
                let e = [
                    MONS[i][0] + MONS[j][0],
                    MONS[i][1] + MONS[j][1],
                    MONS[i][2] + MONS[j][2],
                    MONS[i][3] + MONS[j][3],
                ];
                prod[i][j] = IDX[key(e)];
            }
            j += 1;
        }
        i += 1;
    }
    prod
}

static PROD: [[i8; N_COEFFS]; N_COEFFS] = product_table();

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetsError {
    #[error("power of a jet with zero constant term")]
    PowerOfZeroConstant,
    #[error("expansion center at a primary: r1 = {r1:.3e}, r2 = {r2:.3e}")]
    SingularCenter { r1: f64, r2: f64 },
    #[error("arctan expansion center on the singular axis (x + mu = 0)")]
    ArctanCenterOnAxis,
}

/// Truncated Taylor polynomial: 4 variables, total degree <= 4, dense
/// coefficient storage in graded lexicographic slot order.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet4 {
    c: [f64; N_COEFFS],
}

impl Jet4 {
    pub fn zero() -> Self {
        Self { c: [0.0; N_COEFFS] }
    }

    pub fn constant(v: f64) -> Self {
        let mut j = Self::zero();
        j.c[0] = v;
        j
    }

    /// The jet of the `k`-th variable itself (k in 0..4).
    pub fn variable(k: usize) -> Self {
        assert!(k < N_VARS);
        let mut e = [0u8; N_VARS];
        e[k] = 1;
        let mut j = Self::zero();
        j.c[IDX[key(e)] as usize] = 1.0;
        j
    }

    /// Coefficient of the monomial with the given exponents; zero for
    /// anything outside the degree-4 truncation.
    pub fn coeff(&self, e: [u8; N_VARS]) -> f64 {
        if e[0] > 4 || e[1] > 4 || e[2] > 4 || e[3] > 4 {
            return 0.0;
        }
        match IDX[key(e)] {
            -1 => 0.0,
            i => self.c[i as usize],
        }
    }

    pub fn set_coeff(&mut self, e: [u8; N_VARS], v: f64) {
        let i = IDX[key(e)];
        assert!(i >= 0, "monomial exceeds the degree-4 truncation");
        self.c[i as usize] = v;
    }

    pub fn add_coeff(&mut self, e: [u8; N_VARS], v: f64) {
        let i = IDX[key(e)];
        assert!(i >= 0, "monomial exceeds the degree-4 truncation");
        self.c[i as usize] += v;
    }

    /// Iterator over (exponents, coefficient) pairs in slot order.
    pub fn terms(&self) -> impl Iterator<Item = ([u8; N_VARS], f64)> + '_ {
        MONS.iter().zip(self.c.iter()).map(|(&m, &c)| (m, c))
    }

    /// The part of the jet with total degree exactly `d`.
    pub fn degree_slice(&self, d: usize) -> Self {
        let mut out = Self::zero();
        for ((o, &c), &deg) in out.c.iter_mut().zip(self.c.iter()).zip(DEG.iter()) {
            if deg as usize == d {
                *o = c;
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut out = self.clone();
        for c in out.c.iter_mut() {
            *c *= s;
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero();
        for (a, row) in self.c.iter().zip(PROD.iter()) {
            if *a == 0.0 {
                continue;
            }
            for (t, b) in row.iter().zip(other.c.iter()) {
                if *t >= 0 {
                    out.c[*t as usize] += a * b;
                }
            }
        }
        out
    }

    /// Real power of a jet via the binomial series on c0(1 + u); requires a
    /// nonzero constant term.
    pub fn powf(&self, alpha: f64) -> Result<Self, JetsError> {
        let c0 = self.c[0];
        if c0 == 0.0 {
            return Err(JetsError::PowerOfZeroConstant);
        }
        let u = {
            let mut u = self.scale(1.0 / c0);
            u.c[0] = 0.0;
            u
        };
        let mut acc = Jet4::constant(1.0);
        let mut upow = Jet4::constant(1.0);
        let mut binom = 1.0;
        for k in 1..=MAX_DEGREE {
            binom *= (alpha - (k as f64 - 1.0)) / k as f64;
            upow = upow.mul(&u);
            acc = &acc + &upow.scale(binom);
        }
        Ok(acc.scale(c0.powf(alpha)))
    }

    /// Small integer power by repeated multiplication.
    pub fn powi(&self, k: usize) -> Self {
        let mut out = Jet4::constant(1.0);
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    /// Largest absolute coefficient.
    pub fn max_abs(&self) -> f64 {
        self.c.iter().fold(0.0, |m, c| m.max(c.abs()))
    }
}

impl std::ops::Add for &Jet4 {
    type Output = Jet4;
    fn add(self, rhs: &Jet4) -> Jet4 {
        let mut out = self.clone();
        for (o, r) in out.c.iter_mut().zip(rhs.c.iter()) {
            *o += r;
        }
        out
    }
}

impl std::ops::Sub for &Jet4 {
    type Output = Jet4;
    fn sub(self, rhs: &Jet4) -> Jet4 {
        let mut out = self.clone();
        for (o, r) in out.c.iter_mut().zip(rhs.c.iter()) {
            *o -= r;
        }
        out
    }
}

impl std::ops::Neg for &Jet4 {
    type Output = Jet4;
    fn neg(self) -> Jet4 {
        self.scale(-1.0)
    }
}

/// Human-readable monomial label in the velocity chart, e.g. "x^2*vy".
pub fn monomial_label(e: [u8; N_VARS]) -> String {
    const NAMES: [&str; N_VARS] = ["x", "y", "vx", "vy"];
    let mut parts = Vec::new();
    for (name, &p) in NAMES.iter().zip(e.iter()) {
        match p {
            0 => {}
            1 => parts.push(name.to_string()),
            _ => parts.push(format!("{name}^{p}")),
        }
    }
    if parts.is_empty() {
        "1".to_string()
    } else {
        parts.join("*")
    }
}

/// Distances from the expansion center to the primaries, guarded.
fn center_radii(p: &SystemParams, eq: &EquilibriumPoint) -> Result<(f64, f64), JetsError> {
    let a = eq.x_star + p.mu();
    let b = eq.y_star;
    let r1s = a * a + b * b;
    let r2s = (a - 1.0) * (a - 1.0) + b * b;
    if r1s < 1e-24 || r2s < 1e-24 {
        return Err(JetsError::SingularCenter {
            r1: r1s.sqrt(),
            r2: r2s.sqrt(),
        });
    }
    Ok((r1s, r2s))
}

/// Jets of the five helper functions about the equilibrium, in the order
/// (1/r1, 1/r2, 1/r1^2, 1/r2^3, arctan((y+b)/(x+a))).
pub fn f_functions(
    p: &SystemParams,
    eq: &EquilibriumPoint,
) -> Result<[Jet4; 5], JetsError> {
    center_radii(p, eq)?;
    let a = eq.x_star + p.mu();
    let b = eq.y_star;
    let xa = &Jet4::variable(0) + &Jet4::constant(a);
    let yb = &Jet4::variable(1) + &Jet4::constant(b);
    let r1s = &xa.mul(&xa) + &yb.mul(&yb);
    let xa1 = &xa - &Jet4::constant(1.0);
    let r2s = &xa1.mul(&xa1) + &yb.mul(&yb);
    let f1 = r1s.powf(-0.5)?;
    let f2 = r2s.powf(-0.5)?;
    let f3 = r1s.powf(-1.0)?;
    let f4 = r2s.powf(-1.5)?;
    let f5 = arctan_ratio(&yb, &xa, b, a)?;
    Ok([f1, f2, f3, f4, f5])
}

/// Jet of arctan(num/den) where num, den are jets with constant terms b, a;
/// composed from the univariate arctan Taylor series about b/a, with the
/// quadrant-aware constant term.
fn arctan_ratio(num: &Jet4, den: &Jet4, b: f64, a: f64) -> Result<Jet4, JetsError> {
    if a == 0.0 {
        return Err(JetsError::ArctanCenterOnAxis);
    }
    let v0 = b / a;
    let dv = {
        let mut v = num.mul(&den.powf(-1.0)?);
        v.c[0] = 0.0;
        v
    };
    let w = 1.0 + v0 * v0;
    let g = [
        b.atan2(a),
        1.0 / w,
        -2.0 * v0 / (w * w),
        (6.0 * v0 * v0 - 2.0) / (w * w * w),
        24.0 * v0 * (1.0 - v0 * v0) / (w * w * w * w),
    ];
    let mut acc = Jet4::constant(g[0]);
    let mut dpow = Jet4::constant(1.0);
    let mut fact = 1.0;
    for (k, &gk) in g.iter().enumerate().skip(1) {
        fact *= k as f64;
        dpow = dpow.mul(&dv);
        acc = &acc + &dpow.scale(gk / fact);
    }
    Ok(acc)
}

/// Degree-4 jet of the Lagrangian about the equilibrium, in displacement
/// variables (x, y, vx, vy).
pub fn expand_lagrangian(
    p: &SystemParams,
    eq: &EquilibriumPoint,
) -> Result<Jet4, JetsError> {
    let (mu, n, q1, a2, w1) = (p.mu(), p.n(), p.q1(), p.a2(), p.w1());
    let a = eq.x_star + mu;
    let b = eq.y_star;
    let [f1, f2, f3, f4, f5] = f_functions(p, eq)?;

    let x = Jet4::variable(0);
    let y = Jet4::variable(1);
    let vx = Jet4::variable(2);
    let vy = Jet4::variable(3);
    let xa = &x + &Jet4::constant(a);
    let yb = &y + &Jet4::constant(b);
    // Barycentric coordinates of the shifted frame.
    let xfull = &x + &Jet4::constant(eq.x_star);
    let yfull = yb.clone();

    let kinetic = (&vx.mul(&vx) + &vy.mul(&vy)).scale(0.5);
    let gyro = (&xfull.mul(&vy) - &vx.mul(&yfull)).scale(n);
    let centrifugal = (&xfull.mul(&xfull) + &yfull.mul(&yfull)).scale(0.5 * n * n);
    let gravity = &(&f1.scale((1.0 - mu) * q1) + &f2.scale(mu)) + &f4.scale(0.5 * mu * a2);
    let radial = (&xa.mul(&vx) + &yb.mul(&vy)).mul(&f3).scale(0.5);
    let drag = (&radial - &f5.scale(n)).scale(w1);

    Ok(&(&(&kinetic + &gyro) + &centrifugal) + &(&gravity + &drag))
}

/// Rest-point momenta (px, py) of the equilibrium; the constant offsets of
/// the canonical chart about which the Hamiltonian jet is taken.
pub fn rest_momenta(p: &SystemParams, eq: &EquilibriumPoint) -> (f64, f64) {
    let a = eq.x_star + p.mu();
    let b = eq.y_star;
    let f30 = 1.0 / (a * a + b * b);
    (
        -p.n() * b + 0.5 * p.w1() * a * f30,
        p.n() * eq.x_star + 0.5 * p.w1() * b * f30,
    )
}

/// Degree-4 jet of the Hamiltonian about the equilibrium, in displacement
/// variables (x, y, px, py): the Legendre transform of the Lagrangian jet,
/// carried out inside jet arithmetic. The momentum map is affine in the
/// velocities, so the inversion is exact.
pub fn expand_hamiltonian(
    p: &SystemParams,
    eq: &EquilibriumPoint,
) -> Result<Jet4, JetsError> {
    let (mu, n, w1) = (p.mu(), p.n(), p.w1());
    let a = eq.x_star + mu;
    let b = eq.y_star;
    let lag = expand_lagrangian(p, eq)?;
    let [_, _, f3, _, _] = f_functions(p, eq)?;
    let f30 = 1.0 / (a * a + b * b);
    let (px_star, py_star) = rest_momenta(p, eq);

    let x = Jet4::variable(0);
    let y = Jet4::variable(1);
    let px = Jet4::variable(2);
    let py = Jet4::variable(3);
    let xa = &x + &Jet4::constant(a);
    let yb = &y + &Jet4::constant(b);

    // Velocity jets in terms of momentum displacements; constant parts
    // vanish because the expansion point is at rest.
    let cx = (&Jet4::constant(a * f30) - &f3.mul(&xa)).scale(0.5 * w1);
    let cy = (&Jet4::constant(b * f30) - &f3.mul(&yb)).scale(0.5 * w1);
    let vx_sub = &(&px + &y.scale(n)) + &cx;
    let vy_sub = &(&py - &x.scale(n)) + &cy;

    // Substitute the velocity variables of the Lagrangian jet by grouping
    // its coefficients over velocity exponents (total velocity degree <= 2).
    let mut groups: [[Jet4; 3]; 3] = Default::default();
    for (e, c) in lag.terms() {
        if c != 0.0 {
            groups[e[2] as usize][e[3] as usize].add_coeff([e[0], e[1], 0, 0], c);
        }
    }
    let mut l_sub = Jet4::zero();
    for (k, row) in groups.iter().enumerate() {
        for (l, g) in row.iter().enumerate() {
            if g.max_abs() == 0.0 {
                continue;
            }
            let factor = vx_sub.powi(k).mul(&vy_sub.powi(l));
            l_sub = &l_sub + &g.mul(&factor);
        }
    }

    let px_full = &px + &Jet4::constant(px_star);
    let py_full = &py + &Jet4::constant(py_star);
    Ok(&(&px_full.mul(&vx_sub) + &py_full.mul(&vy_sub)) - &l_sub)
}

impl Default for Jet4 {
    fn default() -> Self {
        Self::zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics;
    use crate::equilibria::{self, Branch};
    use approx::assert_abs_diff_eq;

    fn refined(p: &SystemParams) -> EquilibriumPoint {
        equilibria::refined_triangular_point(p, Branch::L4).unwrap()
    }

    #[test]
    fn slot_tables_are_consistent() {
        assert_eq!(MONS.len(), N_COEFFS);
        for (i, m) in MONS.iter().enumerate() {
            assert!(DEG[i] as usize <= MAX_DEGREE);
            assert_eq!(IDX[key(*m)] as usize, i);
        }
    }

    #[test]
    fn product_of_binomials() {
        let x = Jet4::variable(0);
        let y = Jet4::variable(1);
        let a = &Jet4::constant(1.0) + &x;
        let b = &Jet4::constant(1.0) + &y;
        let ab = a.mul(&b);
        assert_eq!(ab.coeff([0, 0, 0, 0]), 1.0);
        assert_eq!(ab.coeff([1, 0, 0, 0]), 1.0);
        assert_eq!(ab.coeff([0, 1, 0, 0]), 1.0);
        assert_eq!(ab.coeff([1, 1, 0, 0]), 1.0);
        assert_eq!(ab.coeff([2, 0, 0, 0]), 0.0);
    }

    #[test]
    fn binomial_series_of_inverse_sqrt() {
        let u = &Jet4::constant(1.0) + &Jet4::variable(0);
        let j = u.powf(-0.5).unwrap();
        let expect = [1.0, -0.5, 3.0 / 8.0, -5.0 / 16.0, 35.0 / 128.0];
        for (k, &c) in expect.iter().enumerate() {
            assert_abs_diff_eq!(j.coeff([k as u8, 0, 0, 0]), c, epsilon = 1e-15);
        }
    }

    #[test]
    fn power_of_constant_jet() {
        let j = Jet4::constant(2.0).powf(-1.5).unwrap();
        assert_abs_diff_eq!(j.coeff([0, 0, 0, 0]), 2.0f64.powf(-1.5), epsilon = 1e-16);
        assert_eq!(j.coeff([1, 0, 0, 0]), 0.0);
    }

    #[test]
    fn power_requires_nonzero_constant() {
        assert!(matches!(
            Jet4::variable(2).powf(0.5),
            Err(JetsError::PowerOfZeroConstant)
        ));
    }

    #[test]
    fn power_round_trip() {
        // A jet with all coefficients populated.
        let mut base = Jet4::constant(1.7);
        for k in 0..N_VARS {
            base = &base + &Jet4::variable(k).scale(0.3 + 0.1 * k as f64);
        }
        let base = base.mul(&base).scale(0.5);
        for alpha in [2.0, 3.0, -1.0, -0.5] {
            let rt = base.powf(alpha).unwrap().powf(1.0 / alpha).unwrap();
            let diff = (&rt - &base).max_abs();
            assert!(diff < 1e-12, "alpha {alpha}: round trip off by {diff}");
        }
    }

    #[test]
    fn f_constants_at_the_classical_point() {
        let p = SystemParams::classical(0.2).unwrap();
        let eq = refined(&p);
        let [f1, f2, f3, f4, f5] = f_functions(&p, &eq).unwrap();
        assert_abs_diff_eq!(f1.coeff([0, 0, 0, 0]), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f2.coeff([0, 0, 0, 0]), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f3.coeff([0, 0, 0, 0]), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f4.coeff([0, 0, 0, 0]), 1.0, epsilon = 1e-12);
        // Linear part of the arctan jet at (a, b) = (1/2, sqrt(3)/2).
        assert_abs_diff_eq!(
            f5.coeff([1, 0, 0, 0]),
            -0.8660254037844386,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(f5.coeff([0, 1, 0, 0]), 0.5, epsilon = 1e-12);
    }

    #[test]
    fn lagrangian_constant_term_is_the_rest_value() {
        let p = SystemParams::with_w1(0.17, 0.993, 3e-4, 2e-5).unwrap();
        let eq = refined(&p);
        let jet = expand_lagrangian(&p, &eq).unwrap();
        let rest = dynamics::lagrangian(&p, &eq.state()).unwrap();
        assert_abs_diff_eq!(jet.coeff([0, 0, 0, 0]), rest, epsilon = 1e-13);
    }

    #[test]
    fn lagrangian_linear_position_part_vanishes_at_refined_points() {
        let p = SystemParams::with_w1(0.17, 0.993, 3e-4, 2e-5).unwrap();
        let eq = refined(&p);
        let jet = expand_lagrangian(&p, &eq).unwrap();
        // Static parts of the linear coefficients are killed by the
        // equilibrium condition; the gyroscopic velocity rows remain.
        assert_abs_diff_eq!(jet.coeff([1, 0, 0, 0]), 0.0, epsilon = 1e-10);
        assert_abs_diff_eq!(jet.coeff([0, 1, 0, 0]), 0.0, epsilon = 1e-10);
    }

    #[test]
    fn lagrangian_velocity_degree_stops_at_two() {
        let p = SystemParams::with_w1(0.17, 0.993, 3e-4, 2e-5).unwrap();
        let eq = refined(&p);
        let jet = expand_lagrangian(&p, &eq).unwrap();
        for (e, c) in jet.terms() {
            if e[2] + e[3] > 2 {
                assert_eq!(c, 0.0, "velocity degree 3+ at {:?}", e);
            }
        }
    }

    #[test]
    fn hamiltonian_constant_and_linear_terms() {
        let p = SystemParams::with_w1(0.17, 0.993, 3e-4, 2e-5).unwrap();
        let eq = refined(&p);
        let jet = expand_hamiltonian(&p, &eq).unwrap();
        let rest = dynamics::hamiltonian(&p, &eq.state()).unwrap();
        assert_abs_diff_eq!(jet.coeff([0, 0, 0, 0]), rest, epsilon = 1e-13);
        // The rest point is a critical point of H even with drag on.
        for e in [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]] {
            assert_abs_diff_eq!(jet.coeff(e), 0.0, epsilon = 1e-10);
        }
    }

    #[test]
    fn classical_hamiltonian_quadratic_slice() {
        let p = SystemParams::classical(0.1).unwrap();
        let eq = refined(&p);
        let jet = expand_hamiltonian(&p, &eq).unwrap();
        assert_abs_diff_eq!(jet.coeff([0, 0, 2, 0]), 0.5, epsilon = 1e-11);
        assert_abs_diff_eq!(jet.coeff([0, 0, 0, 2]), 0.5, epsilon = 1e-11);
        assert_abs_diff_eq!(jet.coeff([0, 1, 1, 0]), 1.0, epsilon = 1e-11);
        assert_abs_diff_eq!(jet.coeff([1, 0, 0, 1]), -1.0, epsilon = 1e-11);
        assert_abs_diff_eq!(jet.coeff([2, 0, 0, 0]), 0.125, epsilon = 1e-11);
        assert_abs_diff_eq!(jet.coeff([0, 2, 0, 0]), -0.625, epsilon = 1e-11);
    }

    #[test]
    fn legendre_identity_coefficientwise_without_drag() {
        let p = SystemParams::with_w1(0.23, 0.996, 1e-4, 0.0).unwrap();
        let eq = refined(&p);
        let lag = expand_lagrangian(&p, &eq).unwrap();
        let ham = expand_hamiltonian(&p, &eq).unwrap();
        // Without drag the charts share variables up to the linear momentum
        // map; check H = -L + px*vx + py*vy by resubstituting momenta
        // for velocities in H and comparing against the Lagrangian route.
        let n = p.n();
        let x = Jet4::variable(0);
        let y = Jet4::variable(1);
        let vx = Jet4::variable(2);
        let vy = Jet4::variable(3);
        let (px_star, py_star) = rest_momenta(&p, &eq);
        // px = vx - n(y + b) - px_star shifted to displacement form.
        let px_of_v = &vx - &y.scale(n);
        let py_of_v = &vy + &x.scale(n);
        let mut groups: [[Jet4; 3]; 3] = Default::default();
        for (e, c) in ham.terms() {
            if c != 0.0 {
                groups[e[2] as usize][e[3] as usize].add_coeff([e[0], e[1], 0, 0], c);
            }
        }
        let mut h_in_v = Jet4::zero();
        for (k, row) in groups.iter().enumerate() {
            for (l, g) in row.iter().enumerate() {
                if g.max_abs() > 0.0 {
                    let factor = px_of_v.powi(k).mul(&py_of_v.powi(l));
                    h_in_v = &h_in_v + &g.mul(&factor);
                }
            }
        }
        let px_full = &px_of_v + &Jet4::constant(px_star);
        let py_full = &py_of_v + &Jet4::constant(py_star);
        let rhs = &(&px_full.mul(&vx) + &py_full.mul(&vy)) - &lag;
        let diff = (&h_in_v - &rhs).max_abs();
        assert!(diff < 1e-12, "Legendre identity violated by {diff}");
    }

    #[test]
    fn monomial_labels() {
        assert_eq!(monomial_label([0, 0, 0, 0]), "1");
        assert_eq!(monomial_label([2, 1, 0, 0]), "x^2*y");
        assert_eq!(monomial_label([1, 0, 0, 1]), "x*vy");
    }
}
