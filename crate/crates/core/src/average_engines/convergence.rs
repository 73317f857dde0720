//! Classifies a checkpoint trace as converged, oscillating or inconclusive.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::engine::{Checkpoint, Trace};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceParams {
    pub tol: f64,
    /// Minimum distance between the two clusters of an oscillation.
    pub separation: f64,
    pub window: usize,
    pub revisits: usize,
}

impl Default for ConvergenceParams {
    fn default() -> Self {
        ConvergenceParams::with_tol(1e-3)
    }
}

impl ConvergenceParams {
    /// `Δ = 10·tol`, `w = 6`, `r = 3`.
    pub fn with_tol(tol: f64) -> Self {
        ConvergenceParams { tol, separation: 10.0 * tol, window: 6, revisits: 3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ConvergenceStatus {
    Converged {
        limit: Vec<Complex64>,
        /// Largest pairwise distance among the last `w` checkpoints.
        radius: f64,
    },
    Oscillating {
        /// Checkpoint indices `N` of the two cluster centers.
        centers: (u64, u64),
        separation: f64,
        visits: (usize, usize),
    },
    Inconclusive {
        reason: String,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    #[serde(flatten)]
    pub status: ConvergenceStatus,
    pub params: ConvergenceParams,
}

impl ConvergenceReport {
    pub fn is_definitive(&self) -> bool {
        !matches!(self.status, ConvergenceStatus::Inconclusive { .. })
    }
}

fn dist(a: &Checkpoint, b: &Checkpoint) -> f64 {
    a.average.iter().zip(&b.average).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// Converged if the last `w` checkpoints are pairwise within `tol`.
/// Oscillating if, among the later half of the checkpoints, two of them at
/// least `Δ` apart each have `r` checkpoints within `Δ/2`.
pub fn detect_convergence(trace: &Trace, params: &ConvergenceParams) -> ConvergenceReport {
    let report = |status| ConvergenceReport { status, params: params.clone() };
    let cps = &trace.checkpoints;
    if params.window == 0 || cps.len() < params.window {
        return report(ConvergenceStatus::Inconclusive {
            reason: format!("{} checkpoints, need at least {}", cps.len(), params.window.max(1)),
        });
    }
    let last = &cps[cps.len() - params.window..];
    let mut radius = 0.0f64;
    for (i, a) in last.iter().enumerate() {
        for b in &last[i + 1..] {
            radius = radius.max(dist(a, b));
        }
    }
    if radius <= params.tol {
        return report(ConvergenceStatus::Converged {
            limit: cps.last().expect("non-empty").average.clone(),
            radius,
        });
    }

    let tail = &cps[(cps.len() / 2).min(cps.len() - params.window)..];
    let r = params.separation / 2.0;
    let visits: Vec<usize> = tail.iter().map(|c| tail.iter().filter(|d| dist(c, d) <= r).count()).collect();
    let mut best: Option<(usize, usize, f64)> = None;
    for i in 0..tail.len() {
        if visits[i] < params.revisits {
            continue;
        }
        for j in i + 1..tail.len() {
            let d = dist(&tail[i], &tail[j]);
            if visits[j] < params.revisits || d < params.separation {
                continue;
            }
            let score = visits[i].min(visits[j]);
            let better = match best {
                None => true,
                Some((bi, bj, bd)) => {
                    let bs = visits[bi].min(visits[bj]);
                    score > bs || (score == bs && d > bd)
                }
            };
            if better {
                best = Some((i, j, d));
            }
        }
    }
    match best {
        Some((i, j, d)) => report(ConvergenceStatus::Oscillating {
            centers: (tail[i].index, tail[j].index),
            separation: d,
            visits: (visits[i], visits[j]),
        }),
        None => report(ConvergenceStatus::Inconclusive {
            reason: format!("last {} checkpoints spread over {radius:.3e} > tol, no oscillation witness", params.window),
        }),
    }
}
