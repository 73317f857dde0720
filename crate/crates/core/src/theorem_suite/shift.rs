//! Products with vanishing sequences, and modulation of the bilateral shift.

use std::sync::Arc;

use num_complex::Complex64;

use super::report::{trend_down, CheckReport};
use crate::average_engines::{engine_new, AverageScheme};
use crate::error::{Error, Result};
use crate::grid::{default_grid, limsup_tail, tail_start, validate_grid};
use crate::mod_sequences::{adversarial_slow_decay, stats_scan, ModSeq, SeqStats};
use crate::operator_zoo::{make_truncated_shift, shift_basis};
use crate::sum::{ComplexKahanSum, KahanSum};

/// Largest tail-to-head ratio of `(1/n) Σ |a_k|` still read as bounded.
pub const BOUNDED_GROWTH: f64 = 1.5;

/// Level below which a tail limsup counts as "tends to zero".
pub const ZERO_LEVEL: f64 = 0.05;

/// Finite-horizon boundedness of the absolute means: the maximum over the
/// last third of the grid is at most [`BOUNDED_GROWTH`] times the maximum
/// before it.
pub fn abs_mean_bounded(stats: &SeqStats) -> bool {
    let means: Vec<f64> = stats.rows.iter().map(|r| r.abs_mean).collect();
    let t = tail_start(means.len());
    let tail = means[t..].iter().copied().fold(0.0, f64::max);
    let head = if t == 0 { means[0] } else { means[..t].iter().copied().fold(0.0, f64::max) };
    tail <= BOUNDED_GROWTH * head || tail == 0.0
}

/// Test sequences tending to zero used in the bounded branch.
pub fn vanishing_catalog() -> Vec<ModSeq> {
    vec![ModSeq::reciprocal(), ModSeq::inverse_log(), ModSeq::power(-0.5)]
}

/// Bounded absolute means: `(1/n) Σ |a_k b_k|` trends to zero for each `b`
/// of the catalog. Unbounded: on blocks where the mean first exceeds `j`, the
/// aligned slowly decaying `b` keeps the modulated average above `√j`.
pub fn check_vanishing_products(a: &ModSeq, h: u64) -> Result<CheckReport> {
    let mut r = CheckReport::new(format!("vanishing_products/{}", a.name()));
    r.horizon(h);
    let grid = default_grid(h);
    let stats = stats_scan(a, h, &grid)?;
    let bounded = abs_mean_bounded(&stats);
    r.measure("abs_mean_at_H", stats.last().abs_mean);
    r.measure("abs_mean_bounded", f64::from(u8::from(bounded)));
    r.note("boundedness of the absolute means is the necessary condition exercised here");

    if bounded {
        for b in vanishing_catalog() {
            let mut acc = KahanSum::new();
            let mut means = Vec::with_capacity(grid.len());
            let mut next = 0;
            for k in 1..=h {
                if !a.known_zero(k) {
                    acc.add((a.value_unchecked(k) * b.value_unchecked(k)).norm());
                }
                if grid[next] == k {
                    means.push(acc.value() / k as f64);
                    next += 1;
                }
            }
            let tail = &means[tail_start(means.len())..];
            r.measure(format!("product_mean[{}]", b.name()), *means.last().expect("grid ends at h"));
            r.assert(format!("product mean with {} trends to 0", b.name()), trend_down(tail, 0.01));
        }
        return Ok(r.conclude());
    }

    // first index past the previous block where the mean exceeds j
    let mut blocks = Vec::new();
    let mut acc = KahanSum::new();
    for k in 1..=h {
        if !a.known_zero(k) {
            acc.add(a.value_unchecked(k).norm());
        }
        if acc.value() / k as f64 > (blocks.len() + 1) as f64 {
            blocks.push(k);
        }
    }
    r.measure("blocks", blocks.len() as f64);
    if blocks.len() < 3 {
        return Ok(r.refuse(format!("only {} blocks below H", blocks.len())));
    }
    let b = adversarial_slow_decay(a, &blocks)?;
    let mut sum = ComplexKahanSum::new();
    let mut j = 0;
    let mut worst = f64::INFINITY;
    for k in 1..=*blocks.last().expect("non-empty") {
        if !a.known_zero(k) {
            sum.add(a.value_unchecked(k) * b.value_unchecked(k));
        }
        if blocks[j] == k {
            j += 1;
            let avg = sum.value().norm() / k as f64;
            worst = worst.min(avg / (j as f64).sqrt());
            r.assert("|average at n_j| > √j", avg > (j as f64).sqrt());
        }
    }
    r.measure("min_ratio_to_sqrt_j", worst);
    Ok(r.conclude())
}

/// On the truncated shift with `x = e_1`, `‖(1/n) Σ a_k U^k e_1‖² = (1/n²) Σ |a_k|²`
/// at every checkpoint, and the three "tends to zero" readings (shift average,
/// square mean, `max |a_k| / n`) agree.
pub fn check_shift_modulation(a: &ModSeq, window: u64, h: u64, grid: &[u64]) -> Result<CheckReport> {
    if window == 0 || h > window - 1 {
        return Err(Error::WindowExceeded { exponent: h as u128, slack: window.saturating_sub(1) as u128 });
    }
    validate_grid(grid, h)?;
    if grid.last() != Some(&h) {
        return Err(Error::Invalid("grid must end at the horizon".into()));
    }
    let mut r = CheckReport::new(format!("shift_modulation/{}", a.name()));
    r.horizon(h);
    let stats = stats_scan(a, h, grid)?;
    if !abs_mean_bounded(&stats) {
        return Ok(r.refuse("absolute means are not bounded"));
    }
    let op = Arc::new(make_truncated_shift(window)?);
    let mut engine = engine_new(AverageScheme::Modulated(a.clone()), op, shift_basis(window, 1)?, None)?;
    engine.set_grid(grid.to_vec())?;
    let trace = engine.run_to(h)?;
    let mut worst = 0.0f64;
    for (cp, row) in trace.checkpoints.iter().zip(&stats.rows) {
        let lhs = cp.norm * cp.norm;
        let rel = (lhs - row.sq_mean).abs() / row.sq_mean.max(f64::MIN_POSITIVE);
        worst = worst.max(if row.sq_mean == 0.0 { lhs } else { rel });
    }
    r.measure("identity_rel_error", worst).bound("identity_rel_error", 1e-9);
    r.assert("‖average‖² = square mean", worst <= 1e-9);

    let norms2: Vec<f64> = trace.checkpoints.iter().map(|c| c.norm * c.norm).collect();
    let sq: Vec<f64> = stats.rows.iter().map(|r| r.sq_mean).collect();
    let mx: Vec<f64> = stats.rows.iter().map(|r| r.max_over_n).collect();
    let flags = [limsup_tail(&norms2), limsup_tail(&sq), limsup_tail(&mx)];
    for (name, v) in ["shift_norm_sq", "sq_mean", "max_over_n"].iter().zip(flags) {
        r.measure(format!("tail_{name}"), v);
    }
    let zero = flags.map(|v| v <= ZERO_LEVEL);
    r.bound("zero_level", ZERO_LEVEL);
    r.measure("modulates", f64::from(u8::from(zero[0])));
    r.assert("shift → 0 ⇔ square mean → 0 ⇔ max/n → 0", zero[0] == zero[1] && zero[1] == zero[2]);
    r.note("covers the necessity of bounded absolute means and of square means tending to 0");
    Ok(r.conclude())
}

/// Sorted union of two checkpoint grids.
pub(crate) fn merge_grids(a: &[u64], b: &[u64]) -> Vec<u64> {
    let mut g: Vec<u64> = a.iter().chain(b).copied().collect();
    g.sort_unstable();
    g.dedup();
    g
}

/// The dyadic spike fails the square-mean condition: along `2^ℓ` it stays
/// near 1/3 while its absolute means stay bounded.
pub fn check_spike_control(levels: u32) -> Result<CheckReport> {
    let h = 1u64 << levels;
    let mut r = CheckReport::new(format!("shift_modulation/dyadic_spike_control/2^{levels}")).control();
    r.horizon(h);
    let spike = crate::mod_sequences::make_dyadic_spike();
    let powers: Vec<u64> = (1..=levels).map(|l| 1u64 << l).collect();
    let grid = merge_grids(&powers, &default_grid(h));
    let stats = stats_scan(&spike, h, &grid)?;
    let max_abs = stats.rows.iter().map(|s| s.abs_mean).fold(0.0, f64::max);
    r.measure("max_abs_mean", max_abs).measure("sq_mean_at_H", stats.last().sq_mean);
    r.assert("absolute means < 1", max_abs < 1.0);
    r.assert("square mean at 2^ℓ within 1e-3 of 1/3", (stats.last().sq_mean - 1.0 / 3.0).abs() <= 1e-3);
    r.assert("square mean does not tend to 0", limsup_tail(&stats.rows.iter().map(|s| s.sq_mean).collect::<Vec<_>>()) > ZERO_LEVEL);
    // the exact identity at H on the shift
    let window = h + 2;
    let op = Arc::new(make_truncated_shift(window)?);
    let mut engine = engine_new(AverageScheme::Modulated(spike), op, shift_basis(window, 1)?, None)?;
    engine.set_grid(vec![h])?;
    let norm = engine.run_to(h)?.last().expect("checkpoint at H").norm;
    let rel = (norm * norm - stats.last().sq_mean).abs() / stats.last().sq_mean;
    r.measure("identity_rel_error", rel);
    r.assert("‖average‖² = square mean", rel <= 1e-9);
    Ok(r.conclude())
}

/// Seeded bounded sequences `|a_k| <= 1` with uniformly random phases.
pub fn seeded_bounded_sequence(len: usize, seed: u64) -> ModSeq {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let values = (0..len)
        .map(|_| Complex64::from_polar(rng.random::<f64>(), rng.random::<f64>() * std::f64::consts::TAU))
        .collect();
    ModSeq::explicit(values)
}
