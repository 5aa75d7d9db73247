//! Parameter-grid stability maps and the critical-mass bisection.

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::equilibria::Branch;
use crate::normalization::{self, NormalizationError, StabilityReport, Verdict};
use crate::params::{ParamError, SystemParams};

pub const CRITICAL_MASS_TOL: f64 = 1e-10;
pub const CRITICAL_MASS_MAX_ITERS: usize = 60;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SweepError {
    #[error("axis {name:?} is invalid: min = {min}, max = {max}, count = {count}")]
    InvalidAxis {
        name: AxisName,
        min: f64,
        max: f64,
        count: usize,
    },
    #[error("grid has no axes")]
    EmptyGrid,
    #[error("no stability transition inside the bracket [{lo}, {hi}]")]
    NoTransition { lo: f64, hi: f64 },
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Normalization(#[from] NormalizationError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisName {
    Mu,
    Q1,
    A2,
    W1,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Axis {
    pub name: AxisName,
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl Axis {
    /// Uniformly spaced axis values, min and max inclusive.
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.count - 1) as f64;
        (0..self.count).map(|k| self.min + step * k as f64).collect()
    }

    fn validate(&self) -> Result<(), SweepError> {
        let bad = self.count == 0
            || !self.min.is_finite()
            || !self.max.is_finite()
            || (self.count > 1 && self.max <= self.min);
        if bad {
            return Err(SweepError::InvalidAxis {
                name: self.name,
                min: self.min,
                max: self.max,
                count: self.count,
            });
        }
        Ok(())
    }
}

/// Grid of parameter combinations: fixed base values plus one entry per
/// swept axis. The first axis varies slowest.
#[derive(Debug, Clone, Serialize)]
pub struct GridSpec {
    pub mu: f64,
    pub q1: f64,
    pub a2: f64,
    pub w1: f64,
    pub axes: Vec<Axis>,
}

impl GridSpec {
    pub fn total_points(&self) -> usize {
        self.axes.iter().map(|a| a.count).product()
    }

    /// Parameter tuple (mu, q1, a2, w1) of the flat row index.
    fn cell(&self, flat: usize, points: &[Vec<f64>]) -> (f64, f64, f64, f64) {
        let (mut mu, mut q1, mut a2, mut w1) = (self.mu, self.q1, self.a2, self.w1);
        let mut rem = flat;
        for (axis, vals) in self.axes.iter().zip(points.iter()).rev() {
            let idx = rem % axis.count;
            rem /= axis.count;
            match axis.name {
                AxisName::Mu => mu = vals[idx],
                AxisName::Q1 => q1 = vals[idx],
                AxisName::A2 => a2 = vals[idx],
                AxisName::W1 => w1 = vals[idx],
            }
        }
        (mu, q1, a2, w1)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub mu: f64,
    pub q1: f64,
    pub a2: f64,
    pub w1: f64,
    pub report: Option<StabilityReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub branch: Branch,
    pub rows: Vec<SweepRow>,
}

/// Evaluates the stability report over the whole grid. Rows are produced
/// in row-major axis order regardless of how the work is scheduled; cell
/// failures are recorded in the row rather than aborting the sweep.
pub fn run_sweep(spec: &GridSpec, branch: Branch) -> Result<SweepResult, SweepError> {
    if spec.axes.is_empty() {
        return Err(SweepError::EmptyGrid);
    }
    for axis in &spec.axes {
        axis.validate()?;
    }
    let points: Vec<Vec<f64>> = spec.axes.iter().map(Axis::points).collect();
    let rows: Vec<SweepRow> = (0..spec.total_points())
        .into_par_iter()
        .map(|flat| {
            let (mu, q1, a2, w1) = spec.cell(flat, &points);
            let outcome = SystemParams::with_w1(mu, q1, a2, w1)
                .map_err(|e| e.to_string())
                .and_then(|p| {
                    normalization::stability_verdict(&p, branch).map_err(|e| e.to_string())
                });
            match outcome {
                Ok(report) => SweepRow {
                    mu,
                    q1,
                    a2,
                    w1,
                    report: Some(report),
                    error: None,
                },
                Err(e) => SweepRow {
                    mu,
                    q1,
                    a2,
                    w1,
                    report: None,
                    error: Some(e),
                },
            }
        })
        .collect();
    Ok(SweepResult { branch, rows })
}

fn float_field(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x:.16e}"),
        _ => "nan".to_string(),
    }
}

fn verdict_field(v: Verdict) -> &'static str {
    match v {
        Verdict::Stable => "stable",
        Verdict::Unstable => "unstable",
        Verdict::Marginal => "marginal",
    }
}

impl SweepResult {
    /// CSV rows in grid order: parameters, verdict, discriminant,
    /// frequencies, and the resonance count. Failed cells carry the
    /// verdict "error" and nan numerics.
    pub fn write_csv<W: std::io::Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "mu,q1,a2,w1,verdict,D,omega1,omega2,n_resonances")?;
        for row in &self.rows {
            let (verdict, d, o1, o2, nres) = match &row.report {
                Some(rep) => (
                    verdict_field(rep.verdict),
                    Some(rep.discriminant),
                    rep.omega1,
                    rep.omega2,
                    rep.resonances.len(),
                ),
                None => ("error", None, None, None, 0),
            };
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{},{},{},{},{}",
                row.mu,
                row.q1,
                row.a2,
                row.w1,
                verdict,
                float_field(d),
                float_field(o1),
                float_field(o2),
                nres
            )?;
        }
        Ok(())
    }
}

/// Result of the critical-mass bisection: the stability boundary in mu at
/// fixed remaining parameters.
#[derive(Debug, Clone, Serialize)]
pub struct CriticalMass {
    pub mu_c: f64,
    pub bracket: [f64; 2],
    pub iterations: usize,
    pub q1: f64,
    pub a2: f64,
    pub w1: f64,
    pub branch: Branch,
}

/// Bisects the verdict transition in mu inside [lo, hi]. Errs when both
/// ends share a verdict class.
pub fn critical_mass(
    q1: f64,
    a2: f64,
    w1: f64,
    branch: Branch,
    lo: f64,
    hi: f64,
) -> Result<CriticalMass, SweepError> {
    let stable_at = |mu: f64| -> Result<bool, SweepError> {
        let p = SystemParams::with_w1(mu, q1, a2, w1)?;
        Ok(normalization::stability_verdict(&p, branch)?.verdict == Verdict::Stable)
    };
    let (mut lo, mut hi) = (lo, hi);
    let stable_lo = stable_at(lo)?;
    if stable_at(hi)? == stable_lo {
        return Err(SweepError::NoTransition { lo, hi });
    }
    let bracket = [lo, hi];
    let mut iterations = 0;
    while (hi - lo).abs() > CRITICAL_MASS_TOL && iterations < CRITICAL_MASS_MAX_ITERS {
        let mid = 0.5 * (lo + hi);
        if stable_at(mid)? == stable_lo {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Ok(CriticalMass {
        mu_c: 0.5 * (lo + hi),
        bracket,
        iterations,
        q1,
        a2,
        w1,
        branch,
    })
}
