//! Adaptive fifth-order Runge-Kutta integration of the planar equations of
//! motion, with dense output for uniform sampling, an energy-drift probe,
//! and an empirical growth-rate estimator for perturbed equilibria.
//!
//! The stepper is the Dormand-Prince 5(4) pair with the first-same-as-last
//! optimization, a PI step controller, and the quartic interpolant for
//! in-step sampling. It is deliberately hand-rolled: trajectory audits are
//! part of the toolkit's evidence chain, so the stepping order, controller
//! constants, and interpolant are pinned here rather than delegated.

use serde::Serialize;
use thiserror::Error;

use crate::dynamics::{self, DynamicsError, PhaseState};
use crate::equilibria::EquilibriumPoint;
use crate::normalization::{characteristic_polynomial, linearize_eom, polynomial_roots};
use crate::params::SystemParams;

/// Number of dense samples per trajectory, endpoints included.
pub const N_SAMPLES: usize = 1001;
/// Abort radius around either primary.
pub const CLOSE_APPROACH_RADIUS: f64 = 1e-6;
/// Offset norm, as a multiple of the seed perturbation, above which the
/// growth probe considers the linear term dominant over the seed noise.
pub const GROWTH_ONSET_FACTOR: f64 = 50.0;
/// Offset norm beyond which the fit window ends (nonlinear regime).
pub const GROWTH_CEILING: f64 = 1e-2;

#[derive(Debug, Clone, Error)]
pub enum IntegrateError {
    #[error("tolerances must be positive and finite and the time span nonzero: atol = {atol}, rtol = {rtol}")]
    InvalidTolerance { atol: f64, rtol: f64 },
    #[error("close approach to a primary at t = {t:.6e}: r1 = {r1:.3e}, r2 = {r2:.3e}")]
    CloseApproach {
        t: f64,
        r1: f64,
        r2: f64,
        partial: Box<Trajectory>,
    },
    #[error("step size underflow at t = {t:.6e}")]
    StepUnderflow { t: f64, partial: Box<Trajectory> },
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// Uniformly sampled solution of the equations of motion.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub params: SystemParams,
    pub times: Vec<f64>,
    pub states: Vec<PhaseState>,
    pub atol: f64,
    pub rtol: f64,
    pub n_steps: usize,
    pub n_rejected: usize,
}

impl Trajectory {
    /// Hamiltonian along the samples.
    pub fn energies(&self) -> Result<Vec<f64>, DynamicsError> {
        self.states
            .iter()
            .map(|s| dynamics::hamiltonian(&self.params, s))
            .collect()
    }
}

/// H(t) - H(0) along the samples.
pub fn energy_drift(traj: &Trajectory) -> Result<Vec<f64>, DynamicsError> {
    let e = traj.energies()?;
    let e0 = e[0];
    Ok(e.iter().map(|v| v - e0).collect())
}

/// Empirical exponential growth fit for a perturbed equilibrium.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthReport {
    /// Slope of ln |offset| over the fit window.
    pub rate: f64,
    /// True when the offset cleared the onset threshold at some sample.
    pub growth_detected: bool,
    pub n_fit_points: usize,
    pub window: [f64; 2],
    pub direction: [f64; 4],
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

type V4 = [f64; 4];

fn axpy(y: &V4, h: f64, terms: &[(f64, &V4)]) -> V4 {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..4 {
            out[i] += h * c * k[i];
        }
    }
    out
}

fn to_state(y: &V4) -> PhaseState {
    PhaseState::new(y[0], y[1], y[2], y[3])
}

fn rhs(p: &SystemParams, y: &V4) -> Result<V4, DynamicsError> {
    let s = to_state(y);
    let (ax, ay) = dynamics::eom_rhs(p, &s)?;
    Ok([y[2], y[3], ax, ay])
}

fn radii(p: &SystemParams, y: &V4) -> (f64, f64) {
    let a = y[0] + p.mu();
    let r1 = (a * a + y[1] * y[1]).sqrt();
    let am1 = a - 1.0;
    let r2 = (am1 * am1 + y[1] * y[1]).sqrt();
    (r1, r2)
}

struct Dense {
    rcont: [V4; 5],
    t0: f64,
    h: f64,
}

impl Dense {
    fn new(t0: f64, h: f64, y0: &V4, y1: &V4, k1: &V4, ks: &[V4; 7]) -> Self {
        let mut rcont = [[0.0; 4]; 5];
        for i in 0..4 {
            let dy = y1[i] - y0[i];
            let bspl = h * k1[i] - dy;
            rcont[0][i] = y0[i];
            rcont[1][i] = dy;
            rcont[2][i] = bspl;
            rcont[3][i] = dy - h * ks[6][i] - bspl;
            rcont[4][i] = h
                * (D1 * ks[0][i] + D3 * ks[2][i] + D4 * ks[3][i] + D5 * ks[4][i]
                    + D6 * ks[5][i]
                    + D7 * ks[6][i]);
        }
        Self { rcont, t0, h }
    }

    fn eval(&self, t: f64) -> V4 {
        let theta = (t - self.t0) / self.h;
        let theta1 = 1.0 - theta;
        let mut out = [0.0; 4];
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.rcont[0][i]
                + theta
                    * (self.rcont[1][i]
                        + theta1
                            * (self.rcont[2][i]
                                + theta * (self.rcont[3][i] + theta1 * self.rcont[4][i])));
        }
        out
    }
}

/// Integrates from `s0` to `t_end` (either sign) and returns the solution
/// at 1001 uniform sample times. Aborts with the partial trajectory if the
/// motion reaches either primary or the controller underflows.
pub fn integrate(
    p: &SystemParams,
    s0: &PhaseState,
    t_end: f64,
    atol: f64,
    rtol: f64,
) -> Result<Trajectory, IntegrateError> {
    if !(atol > 0.0 && rtol > 0.0 && atol.is_finite() && rtol.is_finite() && t_end.is_finite())
        || t_end == 0.0
    {
        return Err(IntegrateError::InvalidTolerance { atol, rtol });
    }
    let dir = t_end.signum();
    let stride = t_end / (N_SAMPLES - 1) as f64;

    let mut traj = Trajectory {
        params: *p,
        times: Vec::with_capacity(N_SAMPLES),
        states: Vec::with_capacity(N_SAMPLES),
        atol,
        rtol,
        n_steps: 0,
        n_rejected: 0,
    };

    let mut y: V4 = [s0.x, s0.y, s0.vx, s0.vy];
    let mut t = 0.0f64;

    let guard = |t: f64, y: &V4, traj: &Trajectory| -> Result<(), IntegrateError> {
        let (r1, r2) = radii(p, y);
        if r1 < CLOSE_APPROACH_RADIUS || r2 < CLOSE_APPROACH_RADIUS {
            return Err(IntegrateError::CloseApproach {
                t,
                r1,
                r2,
                partial: Box::new(traj.clone()),
            });
        }
        Ok(())
    };

    guard(t, &y, &traj)?;
    traj.times.push(0.0);
    traj.states.push(to_state(&y));
    let mut next_sample = 1usize;

    let mut k1 = rhs(p, &y)?;
    let mut h = dir * (t_end.abs() * 1e-4).clamp(1e-8, 1e-2);
    let mut facold = 1e-4f64;

    while (t_end - t) * dir > 1e-14 * t_end.abs().max(1.0) {
        if (t + h - t_end) * dir > 0.0 {
            h = t_end - t;
        }
        if h.abs() < 1e-14 * t.abs().max(1.0) {
            return Err(IntegrateError::StepUnderflow {
                t,
                partial: Box::new(traj),
            });
        }

        let k2 = rhs(p, &axpy(&y, h, &[(A21, &k1)]))?;
        let k3 = rhs(p, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]))?;
        let k4 = rhs(p, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]))?;
        let k5 = rhs(
            p,
            &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        )?;
        let k6 = rhs(
            p,
            &axpy(
                &y,
                h,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        )?;
        let y1 = axpy(
            &y,
            h,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
        );
        let k7 = rhs(p, &y1)?;

        let mut err_sq = 0.0;
        for i in 0..4 {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = atol + rtol * y[i].abs().max(y1[i].abs());
            err_sq += (e / sc) * (e / sc);
        }
        let mut err = (err_sq / 4.0).sqrt();
        if !err.is_finite() {
            err = 1e10;
        }
        let fac11 = err.powf(0.17);

        if err <= 1.0 {
            let ks = [k1, k2, k3, k4, k5, k6, k7];
            let dense = Dense::new(t, h, &y, &y1, &k1, &ks);
            let t_new = t + h;
            while next_sample < N_SAMPLES {
                let ts = if next_sample == N_SAMPLES - 1 {
                    t_end
                } else {
                    stride * next_sample as f64
                };
                if (ts - t_new) * dir > 1e-12 * t_end.abs() {
                    break;
                }
                let ys = dense.eval(ts);
                guard(ts, &ys, &traj)?;
                traj.times.push(ts);
                traj.states.push(to_state(&ys));
                next_sample += 1;
            }
            t = t_new;
            y = y1;
            k1 = k7;
            traj.n_steps += 1;
            guard(t, &y, &traj)?;
            let fac = (fac11 / facold.powf(0.04) / 0.9).clamp(0.2, 5.0);
            h /= fac;
            facold = err.max(1e-4);
        } else {
            traj.n_rejected += 1;
            h /= (fac11 / 0.9).clamp(1.0, 10.0);
        }
    }

    // Roundoff in the loop bound can leave the final sample pending.
    if next_sample == N_SAMPLES - 1 {
        traj.times.push(t_end);
        traj.states.push(to_state(&y));
    }
    debug_assert_eq!(traj.times.len(), N_SAMPLES);
    Ok(traj)
}

/// Least-squares slope of ln(offset) over the window where the offset is
/// clear of seed noise but still in the linear regime.
fn fit_log_slope(times: &[f64], dist: &[f64], start: usize, end: usize) -> (f64, usize) {
    let mut n = 0.0;
    let (mut st, mut sl, mut stt, mut stl) = (0.0, 0.0, 0.0, 0.0);
    for k in start..=end {
        if dist[k] > 0.0 {
            let (tk, lk) = (times[k], dist[k].ln());
            n += 1.0;
            st += tk;
            sl += lk;
            stt += tk * tk;
            stl += tk * lk;
        }
    }
    if n < 2.0 {
        return (0.0, n as usize);
    }
    let denom = n * stt - st * st;
    ((n * stl - st * sl) / denom, n as usize)
}

/// Growth probe along an explicit phase-space direction: integrates the
/// equilibrium state offset by `offset * dir` and fits the exponential
/// rate of the offset norm.
pub fn growth_rate_along(
    p: &SystemParams,
    eq: &EquilibriumPoint,
    dir: [f64; 4],
    offset: f64,
    t_end: f64,
) -> Result<GrowthReport, IntegrateError> {
    let norm = dir.iter().map(|d| d * d).sum::<f64>().sqrt();
    let dir = [
        dir[0] / norm,
        dir[1] / norm,
        dir[2] / norm,
        dir[3] / norm,
    ];
    let s0 = PhaseState::new(
        eq.x_star + offset * dir[0],
        eq.y_star + offset * dir[1],
        offset * dir[2],
        offset * dir[3],
    );
    let traj = integrate(p, &s0, t_end, 1e-12, 1e-12)?;
    let dist: Vec<f64> = traj
        .states
        .iter()
        .map(|s| {
            let dx = s.x - eq.x_star;
            let dy = s.y - eq.y_star;
            (dx * dx + dy * dy + s.vx * s.vx + s.vy * s.vy).sqrt()
        })
        .collect();

    let onset = GROWTH_ONSET_FACTOR * offset;
    let start = dist.iter().position(|&d| d >= onset);
    let growth_detected = start.is_some();
    let start = start.unwrap_or(0);
    let mut end = dist
        .iter()
        .rposition(|&d| d <= GROWTH_CEILING)
        .unwrap_or(dist.len() - 1);
    if end <= start {
        end = dist.len() - 1;
    }

    // Close the window on a whole number of rotation periods so the
    // oscillating part of the offset does not bias the slope.
    if growth_detected {
        let eig = polynomial_roots(&characteristic_polynomial(&linearize_eom(p, eq)?));
        let lead = eig
            .iter()
            .max_by(|a, b| a.re.partial_cmp(&b.re).unwrap())
            .unwrap();
        if lead.im.abs() > 1e-9 {
            let period = 2.0 * std::f64::consts::PI / lead.im.abs();
            let span = traj.times[end] - traj.times[start];
            let whole = (span / period).floor() * period;
            if whole > 0.0 {
                let target = traj.times[start] + whole;
                while end > start && traj.times[end] > target + 1e-12 {
                    end -= 1;
                }
            }
        }
    }

    let (rate, n_fit_points) = fit_log_slope(&traj.times, &dist, start, end);
    Ok(GrowthReport {
        rate,
        growth_detected,
        n_fit_points,
        window: [traj.times[start], traj.times[end]],
        direction: dir,
    })
}

/// Growth probe seeded along the most unstable direction of the linearized
/// flow (the invariant-plane direction of the leading eigenvalue).
pub fn growth_rate(
    p: &SystemParams,
    eq: &EquilibriumPoint,
    offset: f64,
    t_end: f64,
) -> Result<GrowthReport, IntegrateError> {
    let a = linearize_eom(p, eq)?;
    let eig = polynomial_roots(&characteristic_polynomial(&a));
    let lead = eig
        .iter()
        .max_by(|x, y| x.re.partial_cmp(&y.re).unwrap())
        .unwrap();
    // Real 2D invariant subspace of the leading pair: kernel direction of
    // A^2 - 2 Re(l) A + |l|^2 I.
    let m = nalgebra::Matrix4::from_fn(|i, j| a[i][j]);
    let b = m * m - m * (2.0 * lead.re) + nalgebra::Matrix4::identity() * lead.norm_sqr();
    let svd = b.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("requested right singular vectors");
    let dir = [v_t[(3, 0)], v_t[(3, 1)], v_t[(3, 2)], v_t[(3, 3)]];
    growth_rate_along(p, eq, dir, offset, t_end)
}

/// Writes the sampled trajectory as CSV: t,x,y,vx,vy,H with full float
/// precision, one row per sample.
pub fn write_trajectory_csv<W: std::io::Write>(
    traj: &Trajectory,
    out: &mut W,
) -> std::io::Result<()> {
    writeln!(out, "t,x,y,vx,vy,H")?;
    for (t, s) in traj.times.iter().zip(traj.states.iter()) {
        let h = dynamics::hamiltonian(&traj.params, s)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string()))?;
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
            t, s.x, s.y, s.vx, s.vy, h
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::{self, Branch};

    fn l4(p: &SystemParams) -> EquilibriumPoint {
        equilibria::refined_triangular_point(p, Branch::L4).unwrap()
    }

    #[test]
    fn tolerances_are_validated() {
        let p = SystemParams::classical(0.01).unwrap();
        let s = PhaseState::at_rest(0.3, 0.8);
        assert!(matches!(
            integrate(&p, &s, 10.0, -1.0, 1e-9),
            Err(IntegrateError::InvalidTolerance { .. })
        ));
        assert!(matches!(
            integrate(&p, &s, 0.0, 1e-9, 1e-9),
            Err(IntegrateError::InvalidTolerance { .. })
        ));
    }

    #[test]
    fn sampling_is_uniform_with_both_endpoints() {
        let p = SystemParams::classical(0.01).unwrap();
        let eq = l4(&p);
        let s0 = PhaseState::at_rest(eq.x_star + 1e-4, eq.y_star);
        let traj = integrate(&p, &s0, 10.0, 1e-10, 1e-10).unwrap();
        assert_eq!(traj.times.len(), N_SAMPLES);
        assert_eq!(traj.states.len(), N_SAMPLES);
        assert_eq!(traj.times[0], 0.0);
        assert_eq!(traj.times[N_SAMPLES - 1], 10.0);
        for k in 1..N_SAMPLES {
            assert!((traj.times[k] - traj.times[k - 1] - 0.01).abs() < 1e-12);
        }
        assert!(traj.n_steps > 0);
    }

    #[test]
    fn equilibrium_initial_state_stays_put() {
        let p = SystemParams::classical(0.02).unwrap();
        let eq = l4(&p);
        let traj = integrate(&p, &eq.state(), 50.0, 1e-12, 1e-12).unwrap();
        let last = traj.states.last().unwrap();
        assert!((last.x - eq.x_star).abs() < 1e-8);
        assert!((last.y - eq.y_star).abs() < 1e-8);
        assert!(last.vx.abs() < 1e-8);
        assert!(last.vy.abs() < 1e-8);
    }

    #[test]
    fn energy_is_conserved_without_drag() {
        let p = SystemParams::classical(0.01).unwrap();
        let eq = l4(&p);
        let s0 = PhaseState::at_rest(eq.x_star + 1e-4, eq.y_star);
        let traj = integrate(&p, &s0, 100.0, 1e-12, 1e-12).unwrap();
        let drift = energy_drift(&traj).unwrap();
        let max = drift.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        assert!(max < 1e-9, "max |H(t) - H(0)| = {max:.3e}");
    }

    #[test]
    fn tighter_tolerances_shrink_the_drift() {
        let p = SystemParams::classical(0.01).unwrap();
        let eq = l4(&p);
        let s0 = PhaseState::at_rest(eq.x_star + 1e-3, eq.y_star);
        let loose = integrate(&p, &s0, 50.0, 1e-8, 1e-8).unwrap();
        let tight = integrate(&p, &s0, 50.0, 1e-12, 1e-12).unwrap();
        let worst = |t: &Trajectory| {
            energy_drift(t)
                .unwrap()
                .iter()
                .fold(0.0f64, |m, d| m.max(d.abs()))
        };
        assert!(worst(&tight) < worst(&loose));
    }

    #[test]
    fn drag_produces_a_measurable_drift() {
        let p = SystemParams::with_w1(0.01, 1.0, 0.0, 1e-4).unwrap();
        let eq = l4(&p);
        let s0 = PhaseState::at_rest(eq.x_star + 1e-4, eq.y_star);
        let traj = integrate(&p, &s0, 100.0, 1e-12, 1e-12).unwrap();
        let drift = energy_drift(&traj).unwrap();
        assert!(drift.last().unwrap().abs() > 1e-10);
    }

    #[test]
    fn backward_integration_retraces_the_orbit() {
        let p = SystemParams::classical(0.01).unwrap();
        let eq = l4(&p);
        let s0 = PhaseState::at_rest(eq.x_star + 1e-3, eq.y_star);
        let fwd = integrate(&p, &s0, 20.0, 1e-12, 1e-12).unwrap();
        let back = integrate(&p, fwd.states.last().unwrap(), -20.0, 1e-12, 1e-12).unwrap();
        let s1 = back.states.last().unwrap();
        assert!((s1.x - s0.x).abs() < 1e-8);
        assert!((s1.y - s0.y).abs() < 1e-8);
        assert!((s1.vx - s0.vx).abs() < 1e-8);
        assert!((s1.vy - s0.vy).abs() < 1e-8);
        assert_eq!(back.times.last().copied().unwrap(), -20.0);
    }

    #[test]
    fn infall_aborts_as_a_close_approach() {
        let p = SystemParams::classical(0.5).unwrap();
        let s0 = PhaseState::at_rest(-0.5 + 1e-3, 0.0);
        match integrate(&p, &s0, 5.0, 1e-9, 1e-9) {
            Err(IntegrateError::CloseApproach { r1, partial, .. }) => {
                assert!(r1 <= CLOSE_APPROACH_RADIUS);
                assert!(!partial.times.is_empty());
            }
            other => panic!("expected close approach, got {other:?}"),
        }
    }

    #[test]
    fn growth_rate_recovers_the_unstable_eigenvalue() {
        let p = SystemParams::classical(0.05).unwrap();
        let eq = l4(&p);
        let rep = growth_rate(&p, &eq, 1e-8, 120.0).unwrap();
        assert!(rep.growth_detected);
        let expect = 0.18198568988426883;
        assert!(
            (rep.rate - expect).abs() / expect < 0.05,
            "rate {} vs {}",
            rep.rate,
            expect
        );
        assert!(rep.n_fit_points > 10);
    }

    #[test]
    fn stable_mass_shows_no_growth() {
        let p = SystemParams::classical(0.01).unwrap();
        let eq = l4(&p);
        let rep = growth_rate(&p, &eq, 1e-7, 300.0).unwrap();
        assert!(!rep.growth_detected);
        assert!(rep.rate.abs() < 1e-3, "rate {}", rep.rate);
    }

    #[test]
    fn csv_round_trips_full_precision() {
        let p = SystemParams::classical(0.01).unwrap();
        let eq = l4(&p);
        let s0 = PhaseState::at_rest(eq.x_star + 1e-4, eq.y_star);
        let traj = integrate(&p, &s0, 1.0, 1e-10, 1e-10).unwrap();
        let mut buf = Vec::new();
        write_trajectory_csv(&traj, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,x,y,vx,vy,H");
        assert_eq!(text.lines().count(), N_SAMPLES + 1);
        let row: Vec<&str> = text.lines().nth(500).unwrap().split(',').collect();
        let x: f64 = row[1].parse().unwrap();
        assert_eq!(x, traj.states[499].x);
    }
}
