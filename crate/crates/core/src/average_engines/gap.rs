//! Distances between the prime, log-weighted prime and von Mangoldt averages.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::engine::{engine_new, EngineState};
use super::scheme::AverageScheme;
use crate::error::{Error, Result};
use crate::grid::validate_grid;
use crate::mod_sequences::{make_von_mangoldt, VonMangoldtKind};
use crate::operator_zoo::{Operator, PowerBound, Vector};
use crate::prime_kernel::PrimeTable;

/// Relative slack allowed between a measured gap and its certificate.
pub const CERT_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub n: u64,
    /// `‖prime average − Λ'-modulated average‖`
    pub prime_vs_log: f64,
    /// `M‖x‖ Σ_{p ≤ N} |1/π(N) − log p / N|`
    pub prime_vs_log_bound: f64,
    /// `‖Λ'-modulated − Λ-modulated‖`
    pub log_vs_full: f64,
    /// `M‖x‖ (1/N) Σ (Λ − Λ')`
    pub log_vs_full_bound: f64,
}

impl GapRow {
    pub fn within_bounds(&self) -> bool {
        let ok = |m: f64, b: f64| m <= b * (1.0 + CERT_SLACK) + f64::EPSILON;
        ok(self.prime_vs_log, self.prime_vs_log_bound) && ok(self.log_vs_full, self.log_vs_full_bound)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThreeAverageGap {
    pub power_bound: PowerBound,
    pub rows: Vec<GapRow>,
}

impl ThreeAverageGap {
    pub fn last(&self) -> &GapRow {
        self.rows.last().expect("at least one checkpoint")
    }

    pub fn all_within_bounds(&self) -> bool {
        self.rows.iter().all(GapRow::within_bounds)
    }
}

/// The three engines evaluated side by side on `grid` (ending at `N`).
pub struct ThreeAverages {
    pub prime: EngineState,
    pub prime_log: EngineState,
    pub lambda_prime: EngineState,
    pub lambda: EngineState,
}

pub fn run_three_averages(op: &Arc<Operator>, x: &Vector, table: &Arc<PrimeTable>, grid: &[u64]) -> Result<ThreeAverages> {
    let n = *grid.last().ok_or_else(|| Error::Invalid("empty grid".into()))?;
    validate_grid(grid, table.horizon())?;
    let make = |scheme| -> Result<EngineState> {
        let mut e = engine_new(scheme, op.clone(), x.clone(), Some(table.clone()))?;
        e.set_grid(grid.to_vec())?;
        e.run_to(n)?;
        Ok(e)
    };
    let lp = make_von_mangoldt(table.clone(), VonMangoldtKind::PrimeOnly);
    let l = make_von_mangoldt(table.clone(), VonMangoldtKind::Full);
    let (prime, (prime_log, (lambda_prime, lambda))) = rayon::join(
        || make(AverageScheme::Prime),
        || {
            rayon::join(
                || make(AverageScheme::PrimeLog),
                || rayon::join(|| make(AverageScheme::Modulated(lp)), || make(AverageScheme::Modulated(l))),
            )
        },
    );
    Ok(ThreeAverages { prime: prime?, prime_log: prime_log?, lambda_prime: lambda_prime?, lambda: lambda? })
}

/// Measured gaps and their certificates at every checkpoint of `grid`.
pub fn three_average_gap(op: &Arc<Operator>, x: &Vector, table: &Arc<PrimeTable>, grid: &[u64]) -> Result<ThreeAverageGap> {
    let runs = run_three_averages(op, x, table, grid)?;
    three_average_gap_from(op, x, table, &runs)
}

pub fn three_average_gap_from(
    op: &Operator,
    x: &Vector,
    table: &PrimeTable,
    runs: &ThreeAverages,
) -> Result<ThreeAverageGap> {
    let power_bound = op.power_bound()?;
    let scale = power_bound.value * op.norm(x)?;
    let cps = |e: &EngineState| e.trace().checkpoints.clone();
    let (p, lp, l) = (cps(&runs.prime), cps(&runs.lambda_prime), cps(&runs.lambda));
    let mut rows = Vec::with_capacity(p.len());
    for ((a, b), c) in p.iter().zip(&lp).zip(&l) {
        let n = a.index;
        if n < 2 {
            continue;
        }
        let diff = |u: &[num_complex::Complex64], v: &[num_complex::Complex64]| -> Result<f64> {
            op.norm(&Vector::from_iterator(u.len(), u.iter().zip(v).map(|(s, t)| s - t)))
        };
        rows.push(GapRow {
            n,
            prime_vs_log: diff(&a.average, &b.average)?,
            prime_vs_log_bound: scale * table.lambda_prime_uniform_gap(n)?,
            log_vs_full: diff(&b.average, &c.average)?,
            log_vs_full_bound: scale * table.mean_lambda_gap(n)?,
        });
    }
    if rows.is_empty() {
        return Err(Error::Invalid("no checkpoint at N >= 2".into()));
    }
    Ok(ThreeAverageGap { power_bound, rows })
}
