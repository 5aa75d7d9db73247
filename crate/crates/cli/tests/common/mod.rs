//! Shared helpers for the integration tests: an independent
//! finite-difference Taylor oracle and small spectra utilities.

use std::f64::consts::SQRT_2;

/// Central-difference weights by derivative order, all O(h^2), as
/// (offset, weight) pairs in units of the step.
const STENCILS: [&[(i32, f64)]; 5] = [
    &[(0, 1.0)],
    &[(-1, -0.5), (1, 0.5)],
    &[(-1, 1.0), (0, -2.0), (1, 1.0)],
    &[(-2, -0.5), (-1, 1.0), (1, -1.0), (2, 0.5)],
    &[(-2, 1.0), (-1, -4.0), (0, 6.0), (1, -4.0), (2, 1.0)],
];

fn factorial(n: u8) -> f64 {
    (1..=n as u64).product::<u64>() as f64
}

/// Mixed partial at the origin: tensor product of one stencil per axis.
fn mixed_partial<F: FnMut([f64; 4]) -> f64>(f: &mut F, exps: [u8; 4], steps: [f64; 4]) -> f64 {
    let mut acc = 0.0;
    for &(o0, w0) in STENCILS[exps[0] as usize] {
        for &(o1, w1) in STENCILS[exps[1] as usize] {
            for &(o2, w2) in STENCILS[exps[2] as usize] {
                for &(o3, w3) in STENCILS[exps[3] as usize] {
                    let z = [
                        o0 as f64 * steps[0],
                        o1 as f64 * steps[1],
                        o2 as f64 * steps[2],
                        o3 as f64 * steps[3],
                    ];
                    acc += w0 * w1 * w2 * w3 * f(z);
                }
            }
        }
    }
    let scale: f64 = exps
        .iter()
        .zip(steps.iter())
        .map(|(&e, &h)| h.powi(e as i32))
        .product();
    acc / scale
}

/// Taylor coefficient of the monomial `exps` of a function around the
/// origin. Position steps start at 0.08 and shrink by 1/sqrt(2) over four
/// nodes; Lagrange extrapolation to step zero removes the h^2, h^4, and
/// h^6 error terms. Velocity steps stay at 1: both generating functions
/// are quadratic in the velocity-like variables, so those differences are
/// already exact.
pub fn taylor_coeff_fd<F: FnMut([f64; 4]) -> f64>(f: &mut F, exps: [u8; 4]) -> f64 {
    const NODES: usize = 4;
    let mut h = 0.08;
    let mut u = [0.0; NODES];
    let mut t = [0.0; NODES];
    for k in 0..NODES {
        t[k] = mixed_partial(f, exps, [h, h, 1.0, 1.0]);
        u[k] = h * h;
        h /= SQRT_2;
    }
    let mut d0 = 0.0;
    for k in 0..NODES {
        let mut w = 1.0;
        for j in 0..NODES {
            if j != k {
                w *= u[j] / (u[j] - u[k]);
            }
        }
        d0 += w * t[k];
    }
    let fact: f64 = exps.iter().map(|&e| factorial(e)).product();
    d0 / fact
}

/// Exponent tuples with total degree in [lo, hi] and velocity degree at
/// most max_vel, in scan order.
pub fn monomials(lo: u8, hi: u8, max_vel: u8) -> Vec<[u8; 4]> {
    let mut out = Vec::new();
    for i0 in 0..=hi {
        for i1 in 0..=hi - i0 {
            for i2 in 0..=hi - i0 - i1 {
                for i3 in 0..=hi - i0 - i1 - i2 {
                    let deg = i0 + i1 + i2 + i3;
                    if deg >= lo && i2 + i3 <= max_vel {
                        out.push([i0, i1, i2, i3]);
                    }
                }
            }
        }
    }
    out
}

/// Largest distance produced by greedily pairing each left value with its
/// nearest unused right value. Both spectra as (re, im).
pub fn max_pairing_distance(left: &[(f64, f64)], right: &[(f64, f64)]) -> f64 {
    assert_eq!(left.len(), right.len());
    let mut used = vec![false; right.len()];
    let mut worst = 0.0f64;
    for a in left {
        let (j, d) = right
            .iter()
            .enumerate()
            .filter(|(j, _)| !used[*j])
            .map(|(j, b)| (j, (a.0 - b.0).hypot(a.1 - b.1)))
            .min_by(|x, y| x.1.partial_cmp(&y.1).unwrap())
            .unwrap();
        used[j] = true;
        worst = worst.max(d);
    }
    worst
}

/// Max-norm of A^T J A - J for the 4x4 symplectic form J.
pub fn symplectic_residual(a: &[[f64; 4]; 4]) -> f64 {
    let j = [
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
        [-1.0, 0.0, 0.0, 0.0],
        [0.0, -1.0, 0.0, 0.0],
    ];
    let mut worst = 0.0f64;
    for r in 0..4 {
        for c in 0..4 {
            let mut v = 0.0;
            for k in 0..4 {
                for l in 0..4 {
                    v += a[k][r] * j[k][l] * a[l][c];
                }
            }
            worst = worst.max((v - j[r][c]).abs());
        }
    }
    worst
}
