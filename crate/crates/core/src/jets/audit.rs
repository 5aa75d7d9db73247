//! Coefficient-by-coefficient comparison of the printed series tables
//! against the jet expansion of the same Lagrangian.

use serde::Serialize;

use super::tables::printed_series;
use super::{expand_lagrangian, monomial_label, Jet4, JetsError};
use crate::equilibria::EquilibriumPoint;
use crate::params::SystemParams;

/// Default relative tolerance for declaring a coefficient matched.
pub const AUDIT_REL_TOL: f64 = 1e-9;
/// Default absolute floor below which differences are noise.
pub const AUDIT_ABS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Serialize)]
pub struct AuditEntry {
    pub monomial: String,
    pub degree: u8,
    pub printed: f64,
    pub oracle: f64,
    pub abs_diff: f64,
    pub rel_diff: f64,
    pub matches: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SeriesAudit {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub entries: Vec<AuditEntry>,
    pub n_mismatches: usize,
    pub max_abs_diff: f64,
    pub max_rel_diff: f64,
}

impl SeriesAudit {
    pub fn is_clean(&self) -> bool {
        self.n_mismatches == 0
    }

    pub fn mismatches(&self) -> impl Iterator<Item = &AuditEntry> {
        self.entries.iter().filter(|e| !e.matches)
    }
}

/// Diffs the printed series total against the jet expansion at the same
/// point. Rows where both sides are exactly zero are omitted. A row
/// matches when |printed - oracle| <= max(abs_tol, rel_tol * scale) with
/// scale the larger magnitude of the two sides.
pub fn audit_series(
    p: &SystemParams,
    eq: &EquilibriumPoint,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<SeriesAudit, JetsError> {
    let printed: Jet4 = printed_series(p, eq)?.total();
    let oracle = expand_lagrangian(p, eq)?;
    let mut entries = Vec::new();
    let mut n_mismatches = 0;
    let mut max_abs_diff = 0.0f64;
    let mut max_rel_diff = 0.0f64;
    for ((e, pc), (_, oc)) in printed.terms().zip(oracle.terms()) {
        if pc == 0.0 && oc == 0.0 {
            continue;
        }
        let abs_diff = (pc - oc).abs();
        let scale = pc.abs().max(oc.abs());
        let rel_diff = abs_diff / scale;
        let matches = abs_diff <= abs_tol.max(rel_tol * scale);
        if !matches {
            n_mismatches += 1;
        }
        max_abs_diff = max_abs_diff.max(abs_diff);
        max_rel_diff = max_rel_diff.max(rel_diff);
        entries.push(AuditEntry {
            monomial: monomial_label(e),
            degree: e.iter().sum(),
            printed: pc,
            oracle: oc,
            abs_diff,
            rel_diff,
            matches,
        });
    }
    Ok(SeriesAudit {
        rel_tol,
        abs_tol,
        entries,
        n_mismatches,
        max_abs_diff,
        max_rel_diff,
    })
}
