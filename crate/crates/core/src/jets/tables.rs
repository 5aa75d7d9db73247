//! Transcription of the hand-derived series tables for the Lagrangian about
//! a triangular point, and of the quadratic-form coefficients E, F, G built
//! from them. These are the tables under audit: they are kept verbatim,
//! internal inconsistencies included, so that the diff against the jet
//! expansion reports exactly what the tables get wrong.
//!
//! The only departures from the source text are mechanical restorations
//! where a symbol was visibly mangled in reproduction rather than derived:
//!   - two "(1 + mu)" that contradict every neighbouring row read "(1 - mu)";
//!   - "sf_3" in the cubic velocity block reads "8 f_3" (its row partner);
//!   - dropped overdots in the quadratic velocity block are restored
//!     ("x y a b + y x a b" is read as the mixed x*vy + y*vx pair);
//!   - a dropped "y^3" in the quartic velocity block ("... + 24] b^3");
//!   - bracket nesting is repaired where braces do not balance (the drag
//!     summands that would otherwise be swallowed by an oblateness factor,
//!     and the prefactor groupings of the cubic and quartic blocks).
//!
//! Everything else, including coefficients that disagree with the Taylor
//! expansion, is reproduced as printed.


use super::{Jet4, JetsError};
use crate::equilibria::EquilibriumPoint;
use crate::params::SystemParams;

/// The printed series terms, indexed by total degree 0..=4. Velocities
/// count one toward the degree, so each part is a degree slice.
#[derive(Debug, Clone)]
pub struct PrintedSeries {
    pub orders: [Jet4; 5],
}

impl PrintedSeries {
    /// Sum of all five parts.
    pub fn total(&self) -> Jet4 {
        let mut acc = Jet4::zero();
        for part in &self.orders {
            acc = &acc + part;
        }
        acc
    }
}

/// Builds the printed series terms at the given equilibrium by direct
/// coefficient transcription. Deliberately independent of the jet
/// expansion routines: the scalars below are the only shared inputs.
pub fn printed_series(
    p: &SystemParams,
    eq: &EquilibriumPoint,
) -> Result<PrintedSeries, JetsError> {
    let (mu, n, q1, a2, w1) = (p.mu(), p.n(), p.q1(), p.a2(), p.w1());
    let a = eq.x_star + mu;
    let b = eq.y_star;
    let am1 = a - 1.0;
    let r1s = a * a + b * b;
    let r2s = am1 * am1 + b * b;
    if r1s < 1e-24 || r2s < 1e-24 {
        return Err(JetsError::SingularCenter {
            r1: r1s.sqrt(),
            r2: r2s.sqrt(),
        });
    }
    let f1 = r1s.powf(-0.5);
    let f2 = r2s.powf(-0.5);
    let f3 = 1.0 / r1s;
    let gm1 = (1.0 - mu) * q1;
    let ao = 0.5 * mu * a2;
    let nw = n * w1;

    // Degree 0.
    let mut l0 = Jet4::zero();
    l0.set_coeff(
        [0, 0, 0, 0],
        0.5 * n * n * r1s + gm1 * f1 + mu * f2 + ao * f2.powi(3) - nw * (b / a).atan(),
    );

    // Degree 1.
    let mut l1 = Jet4::zero();
    l1.set_coeff(
        [1, 0, 0, 0],
        n * n * a - gm1 * f1.powi(3) * a + mu * am1 * f2.powi(3)
            - 3.0 * ao * f2.powi(5) * am1
            + nw * b * f3,
    );
    l1.set_coeff(
        [0, 1, 0, 0],
        n * n * b - gm1 * f1.powi(3) * b - mu * f2.powi(3) * b - 3.0 * ao * f2.powi(5) * b
            + nw * f3 * a,
    );
    l1.set_coeff([0, 0, 1, 0], -n * b + w1 * a * f3);
    l1.set_coeff([0, 0, 0, 1], n * a + w1 * b * f3);

    // Degree 2. The three static rows carry the printed overall 1/2; the
    // cross row keeps its printed extra factor 2.
    let mut l2 = Jet4::zero();
    l2.set_coeff([0, 0, 2, 0], 0.5);
    l2.set_coeff([0, 0, 0, 2], 0.5);
    let row_x2 = gm1 * (3.0 * f1 * f1 * a * a - 1.0) * f1.powi(3)
        + mu * (3.0 * f2.powi(3) * am1 * am1 - 1.0) * f2.powi(3)
        + ao * (15.0 * f2.powi(7) * am1 * am1 - 45.0 * f2.powi(5))
        - nw * 2.0 * f3 * f3 * a * b;
    let row_xy = gm1 * 6.0 * f1.powi(5) * a * b
        + mu * 6.0 * f2.powi(5) * am1 * b
        + ao * 15.0 * f2.powi(7) * am1 * b
        - 0.5 * nw * (2.0 * f3 * f3 * b * b - 2.0 * f3 * f3 * a * a);
    let row_y2 = gm1 * (3.0 * f1.powi(5) * b * b - f1.powi(3))
        + mu * (3.0 * f2.powi(5) * b * b - f2.powi(3))
        + ao * (15.0 * f2.powi(7) * b * b - 45.0 * f2.powi(5))
        + nw * 2.0 * f3 * f3 * a * b;
    l2.set_coeff([2, 0, 0, 0], 0.5 * n * n + 0.5 * row_x2);
    l2.set_coeff([1, 1, 0, 0], row_xy);
    l2.set_coeff([0, 2, 0, 0], 0.5 * n * n + 0.5 * row_y2);
    l2.set_coeff([1, 0, 0, 1], n - w1 * a * b * f3 * f3);
    l2.set_coeff([0, 1, 1, 0], -n - w1 * a * b * f3 * f3);
    l2.set_coeff([1, 0, 1, 0], w1 * (0.5 * f3 - a * a * f3.powi(3)));
    l2.set_coeff([0, 1, 0, 1], w1 * (0.5 * f3 - b * b * f3.powi(3)));

    // Degree 3, overall 1/3! across both the static rows and the velocity
    // block; the printed row multiplicities 3 are folded in.
    let mut l3 = Jet4::zero();
    let row_x3 = gm1 * (-15.0 * f1.powi(7) * a.powi(3) + 9.0 * f1.powi(5) * a)
        + mu * (-15.0 * f2.powi(7) * am1.powi(3) + 9.0 * f2.powi(5) * am1)
        + ao * (-105.0 * f2.powi(9) * am1.powi(3) + 45.0 * am1 * f2.powi(7))
        - nw * (-8.0 * f3.powi(3) * a * a * b * b + 2.0 * f3 * f3 * b);
    let row_x2y = gm1 * (-15.0 * f1.powi(7) * a * a * b + 3.0 * f1.powi(5) * b)
        + mu * (-15.0 * f2.powi(7) * am1 * am1 + 3.0 * f2.powi(5) * b)
        + ao * (-105.0 * f2.powi(9) * am1 * am1 * b + 15.0 * b * f2.powi(7))
        - (nw / 3.0) * (-8.0 * f3.powi(3) * a * b * b - 2.0 * f3 * f3 * a);
    let row_xy2 = gm1 * (-15.0 * f1.powi(7) * a * b * b + 3.0 * f1.powi(5) * a)
        + mu * (-15.0 * f2.powi(7) * b * b + f2.powi(5)) * am1
        + ao * (-105.0 * f2.powi(9) * am1 * b * b + 15.0 * am1 * f2.powi(7))
        - (nw / 3.0) * (-8.0 * f3.powi(3) * b * b + 16.0 * f3.powi(3) * a * a * b + 2.0 * f3 * f3 * b);
    let row_y3 = gm1 * (-15.0 * f1.powi(7) * b.powi(3) + 9.0 * f1.powi(5) * b)
        + mu * (-15.0 * f2.powi(7) * b * b + 9.0 * f2.powi(5)) * b
        + ao * (-105.0 * f2.powi(9) * b.powi(3) + 45.0 * f2.powi(7) * b)
        - nw * (8.0 * f3.powi(3) * a * b * b - 2.0 * f3 * f3 * a);
    l3.set_coeff([3, 0, 0, 0], row_x3 / 6.0);
    l3.set_coeff([2, 1, 0, 0], row_x2y / 2.0);
    l3.set_coeff([1, 2, 0, 0], row_xy2 / 2.0);
    l3.set_coeff([0, 3, 0, 0], row_y3 / 6.0);
    let q_x2 = 0.5 * (8.0 * f3 * a * a - 2.0) * f3 * f3;
    let q_xy = 0.5 * 16.0 * f3 * a * b * f3 * f3;
    let q_y2 = 0.5 * (8.0 * f3 * b * b - 2.0) * f3 * f3;
    l3.set_coeff([2, 0, 1, 0], 0.5 * w1 * a * q_x2 / 6.0);
    l3.set_coeff([1, 1, 1, 0], 0.5 * w1 * a * q_xy / 6.0);
    l3.set_coeff([0, 2, 1, 0], 0.5 * w1 * a * q_y2 / 6.0);
    l3.set_coeff([2, 0, 0, 1], 0.5 * w1 * b * q_x2 / 6.0);
    l3.set_coeff([1, 1, 0, 1], 0.5 * w1 * b * q_xy / 6.0);
    l3.set_coeff([0, 2, 0, 1], 0.5 * w1 * b * q_y2 / 6.0);

    // Degree 4, overall 1/4! on the static rows; the velocity block stands
    // apart with its own printed 1/(2*3).
    let mut l4 = Jet4::zero();
    let row_x4 = gm1 * (105.0 * f1.powi(9) * a.powi(4) - 90.0 * f1.powi(7) * a * a + 9.0 * f1.powi(5))
        + mu * (105.0 * f2.powi(9) * am1.powi(4) - 90.0 * f2.powi(7) * am1 * am1 + 9.0 * f2.powi(5))
        + ao * (945.0 * f2.powi(11) * am1 * am1 - 630.0 * f2.powi(9) * am1 * am1 + 45.0 * f2.powi(7))
        - nw * (48.0 * f3.powi(4) * a.powi(3) * b - 24.0 * f3.powi(3) * a * b);
    let row_x3y = gm1 * (105.0 * f1.powi(9) * a.powi(3) * b - 45.0 * f1.powi(7) * a * b)
        + mu * (105.0 * f2.powi(9) * am1.powi(3) * b - 45.0 * f2.powi(7) * am1 * b)
        + ao * (945.0 * f2.powi(11) * am1.powi(3) * b - 315.0 * f2.powi(9) * am1 * b)
        - 0.25 * nw
            * (-48.0 * f3.powi(4) * a.powi(4) + 144.0 * f3.powi(4) * a * a * b * b
                + 48.0 * f3.powi(3) * a * a
                - 24.0 * f3 * f3);
    let row_x2y2 = gm1 * (105.0 * f1.powi(9) * a * a * b * b - 12.0 * f1.powi(5))
        + mu * (105.0 * f2.powi(9) * am1 * am1 * b * b - 12.0 * f2.powi(5))
        + ao * (945.0 * f2.powi(11) * am1 * am1 * b * b - 105.0 * f2.powi(9) * am1 * am1 * b * b
            + 15.0 * f2.powi(7))
        - 0.25 * nw
            * (144.0 * f3.powi(4) * a * b.powi(3) - 144.0 * f3.powi(4) * a.powi(3) * b
                - 48.0 * f3.powi(3) * a * b);
    let row_xy3 = gm1 * (105.0 * f1.powi(9) * a * b.powi(3) - 45.0 * f1.powi(7) * a * b)
        + mu * (105.0 * f2.powi(9) * am1 * b.powi(3) - 45.0 * f2.powi(7) * am1 * b)
        + ao * (945.0 * f2.powi(11) * am1 * b.powi(3) - 315.0 * f2.powi(9) * am1 * b)
        - 0.25 * nw
            * (48.0 * f3.powi(4) * b.powi(4) - 48.0 * f3.powi(3) * b * b
                - 144.0 * f3.powi(4) * a * a * b * b
                + 24.0 * f3 * f3);
    let row_y4 = gm1 * (105.0 * f1.powi(9) * b.powi(4) - 90.0 * f1.powi(7) * b * b + 9.0 * f1.powi(5))
        + mu * (105.0 * f2.powi(9) * b.powi(4) - 90.0 * f2.powi(7) * b * b + 9.0 * f2.powi(5))
        + ao * (945.0 * f2.powi(11) * b.powi(4) - 630.0 * f2.powi(9) * b * b + 45.0 * f2.powi(7))
        - 0.25 * nw * (-48.0 * f3.powi(4) * a * b.powi(3) + 24.0 * f3.powi(3) * a * b);
    l4.set_coeff([4, 0, 0, 0], row_x4 / 24.0);
    l4.set_coeff([3, 1, 0, 0], row_x3y / 6.0);
    l4.set_coeff([2, 2, 0, 0], row_x2y2 / 4.0);
    l4.set_coeff([1, 3, 0, 0], row_xy3 / 6.0);
    l4.set_coeff([0, 4, 0, 0], row_y4 / 24.0);
    let g_x3 = (-48.0 * f3 * a * a + 24.0) * a * f3.powi(3);
    let g_x2y = 3.0 * (-48.0 * f3 * a * b + 8.0) * b * f3.powi(3);
    let g_xy2 = 3.0 * (-48.0 * f3 * a + 8.0) * a * f3.powi(3);
    let g_y3 = (-48.0 * f3 * b * b + 24.0) * b * f3.powi(3);
    l4.set_coeff([3, 0, 1, 0], w1 * a / 6.0 * g_x3);
    l4.set_coeff([2, 1, 1, 0], w1 * a / 6.0 * g_x2y);
    l4.set_coeff([1, 2, 1, 0], w1 * a / 6.0 * g_xy2);
    l4.set_coeff([0, 3, 1, 0], w1 * a / 6.0 * g_y3);
    l4.set_coeff([3, 0, 0, 1], w1 * b / 6.0 * g_x3);
    l4.set_coeff([2, 1, 0, 1], w1 * b / 6.0 * g_x2y);
    l4.set_coeff([1, 2, 0, 1], w1 * b / 6.0 * g_xy2);
    l4.set_coeff([0, 3, 0, 1], w1 * b / 6.0 * g_y3);

    Ok(PrintedSeries {
        orders: [l0, l1, l2, l3, l4],
    })
}

/// The printed quadratic-form coefficients (E, F, G) of
/// H2 = (px^2 + py^2)/2 + n (y px - x py) + E x^2 + F y^2 + G x y,
/// transcribed verbatim from the same tables.
pub fn efg_printed(p: &SystemParams, eq: &EquilibriumPoint) -> (f64, f64, f64) {
    let (mu, n, q1, a2, w1) = (p.mu(), p.n(), p.q1(), p.a2(), p.w1());
    let a = eq.x_star + mu;
    let b = eq.y_star;
    let am1 = a - 1.0;
    let f1 = (a * a + b * b).powf(-0.5);
    let f2 = (am1 * am1 + b * b).powf(-0.5);
    let f3 = 1.0 / (a * a + b * b);
    let gm1 = (1.0 - mu) * q1;
    let nw = n * w1;
    let e = -0.5
        * (gm1 * (2.0 * a * a - b * b) * f1.powi(5) + mu * (2.0 * am1 * am1 - b * b) * f2.powi(5)
            - 7.5 * mu * a2 * (2.0 * am1 * am1 + 3.0 * b * b) * f2.powi(7)
            + 2.0 * nw * f3 * f3 * a * b);
    let f = -0.5
        * (gm1 * (2.0 * b * b - a * a) * f1.powi(5) + mu * (2.0 * b * b - am1 * am1) * f2.powi(5)
            - 7.5 * mu * a2 * 2.0 * (b * b + am1 * am1) * f2.powi(7)
            + 2.0 * nw * f3 * f3 * a * b);
    let g = -(6.0 * gm1 * f1.powi(5) * a * b + 6.0 * mu * f2.powi(5) * am1 * b
        + 15.0 * mu * a2 * am1 * b * f2.powi(7)
        - nw * (b * b - a * a) * f3 * f3);
    (e, f, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics;
    use crate::equilibria::{self, Branch};
    use crate::jets::expand_lagrangian;
    use approx::assert_abs_diff_eq;

    #[test]
    fn rest_value_of_the_printed_series_at_equal_masses() {
        let p = SystemParams::classical(0.5).unwrap();
        let eq = equilibria::refined_triangular_point(&p, Branch::L4).unwrap();
        let series = printed_series(&p, &eq).unwrap();
        let printed = series.orders[0].coeff([0, 0, 0, 0]);
        let actual = dynamics::lagrangian(&p, &eq.state()).unwrap();
        // The tables evaluate the centrifugal rest term at the shifted
        // abscissa, overshooting the true rest value.
        assert_abs_diff_eq!(printed, 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(actual, 1.375, epsilon = 1e-12);
    }

    #[test]
    fn classical_quadratic_rows_match_the_expansion_except_the_cross_term() {
        let p = SystemParams::classical(0.2).unwrap();
        let eq = equilibria::refined_triangular_point(&p, Branch::L4).unwrap();
        let series = printed_series(&p, &eq).unwrap();
        let oracle = expand_lagrangian(&p, &eq).unwrap();
        for e in [
            [2, 0, 0, 0],
            [0, 2, 0, 0],
            [1, 0, 0, 1],
            [0, 1, 1, 0],
            [0, 0, 2, 0],
            [0, 0, 0, 2],
        ] {
            assert_abs_diff_eq!(
                series.orders[2].coeff(e),
                oracle.coeff(e),
                epsilon = 1e-12
            );
        }
        // The cross row is printed at twice the expansion value.
        assert_abs_diff_eq!(
            series.orders[2].coeff([1, 1, 0, 0]),
            2.0 * oracle.coeff([1, 1, 0, 0]),
            epsilon = 1e-12
        );
    }

    #[test]
    fn classical_cubic_and_quartic_diagonal_rows_match_the_expansion() {
        let p = SystemParams::classical(0.13).unwrap();
        let eq = equilibria::refined_triangular_point(&p, Branch::L4).unwrap();
        let series = printed_series(&p, &eq).unwrap();
        let oracle = expand_lagrangian(&p, &eq).unwrap();
        for e in [[3, 0, 0, 0], [0, 3, 0, 0]] {
            assert_abs_diff_eq!(series.orders[3].coeff(e), oracle.coeff(e), epsilon = 1e-12);
        }
        for e in [
            [4, 0, 0, 0],
            [3, 1, 0, 0],
            [2, 2, 0, 0],
            [1, 3, 0, 0],
            [0, 4, 0, 0],
        ] {
            assert_abs_diff_eq!(series.orders[4].coeff(e), oracle.coeff(e), epsilon = 1e-12);
        }
    }

    #[test]
    fn printed_quadratic_form_at_classical_points() {
        let p = SystemParams::classical(0.1).unwrap();
        let eq = equilibria::refined_triangular_point(&p, Branch::L4).unwrap();
        let (e, f, g) = efg_printed(&p, &eq);
        assert_abs_diff_eq!(e, 0.125, epsilon = 1e-12);
        assert_abs_diff_eq!(f, -0.625, epsilon = 1e-12);
        assert_abs_diff_eq!(g, -1.5 * 3.0f64.sqrt() * (1.0 - 0.2), epsilon = 1e-12);
    }

    #[test]
    fn series_total_sums_the_parts() {
        let p = SystemParams::with_w1(0.1, 0.9995, 1e-4, 1e-5).unwrap();
        let eq = equilibria::refined_triangular_point(&p, Branch::L4).unwrap();
        let series = printed_series(&p, &eq).unwrap();
        let total = series.total();
        let mut acc = 0.0;
        for part in &series.orders {
            acc += part.coeff([1, 1, 0, 0]);
        }
        assert_eq!(total.coeff([1, 1, 0, 0]), acc);
    }
}
