//! Sign-switched sequences whose averages against a rigid measure diverge.

use std::sync::Arc;

use super::report::{trend_down, CheckReport};
use super::shift::{merge_grids, ZERO_LEVEL};
use crate::average_engines::{engine_new, AverageScheme};
use crate::error::Result;
use crate::grid::{default_grid, limsup_tail, tail_start};
use crate::mod_sequences::{make_rigidity_counterexample, stats_scan, RigidityScheme};
use crate::operator_zoo::{make_multiplication_operator, measure_fourier_coefficient, Measure};

/// Fewest k-sequence terms for which an oscillation witness is sought.
pub const MIN_TERMS: usize = 12;
/// Levels the averages must reach on both sides.
pub const SWING: f64 = 0.8;
/// Checkpoints required on each side.
pub const VISITS: usize = 3;
/// Tail ratio `k_{l+1}/k_l` below which the sequence counts as slowly growing.
pub const SLOW_RATIO: f64 = 1.5;

/// Builds the counterexample against `μ̂(k_l)` and runs the modulated average
/// of the multiplication operator on `𝟙`, reading `(1/N) Σ a_k μ̂(k)` at every
/// `k_l`. Passes when the averages visit both `≥ 0.8` and `≤ −0.8` at least
/// three times while `(1/N) Σ |a_k| <= 1` throughout.
pub fn check_rigidity_example(scheme: &RigidityScheme, mu: &Measure, h: u64) -> Result<CheckReport> {
    let mut r = CheckReport::new(format!("rigidity/{}", scheme_label(scheme)));
    r.horizon(h);
    let ks = scheme.ks_up_to(h)?;
    r.measure("terms", ks.len() as f64);
    if ks.len() < MIN_TERMS {
        return Ok(r.refuse(format!("{} terms below H, need {MIN_TERMS}", ks.len())));
    }
    let coeffs: Vec<_> = ks.iter().map(|&k| measure_fourier_coefficient(mu, k as i128)).collect();
    let worst = coeffs.iter().map(|c| (c - 1.0).norm()).fold(0.0, f64::max);
    r.measure("max_coefficient_deviation", worst);
    if worst > 1e-12 {
        return Ok(r.refuse("the measure's Fourier coefficients are not 1 along the k-sequence"));
    }
    let mu_hat: Vec<f64> = coeffs.iter().map(|c| c.re.clamp(0.0, 1.0)).collect();
    let a = make_rigidity_counterexample(scheme, h, &mu_hat)?;
    let h_used = *ks.last().expect("non-empty");

    let op = Arc::new(make_multiplication_operator(mu.clone()));
    let one = op.constant_one().expect("multiplication operators have 𝟙");
    let mut engine = engine_new(AverageScheme::Modulated(a.clone()), op, one.clone(), None)?;
    engine.set_grid(ks.clone())?;
    engine.set_functionals(vec![one])?;
    let values: Vec<f64> = engine.run_to(h_used)?.checkpoints.iter().map(|c| c.functionals[0].re).collect();

    let schedule = a.rigidity_schedule().expect("rigidity sequence");
    let drift = values.iter().zip(&schedule.averages).map(|(v, s)| (v - s).abs()).fold(0.0, f64::max);
    r.measure("engine_vs_schedule", drift);
    r.assert("engine matches the construction", drift <= 1e-9);

    let high = values.iter().filter(|&&v| v >= SWING).count();
    let low = values.iter().filter(|&&v| v <= -SWING).count();
    r.measure("visits_high", high as f64).measure("visits_low", low as f64);
    r.measure("max_average", values.iter().copied().fold(f64::NEG_INFINITY, f64::max));
    r.measure("min_average", values.iter().copied().fold(f64::INFINITY, f64::min));
    r.assert("averages reach ≥ 0.8 three times", high >= VISITS);
    r.assert("averages reach ≤ −0.8 three times", low >= VISITS);

    let stats = stats_scan(&a, h_used, &merge_grids(&ks, &default_grid(h_used)))?;
    let max_abs = stats.rows.iter().map(|s| s.abs_mean).fold(0.0, f64::max);
    r.measure("max_abs_mean", max_abs).bound("abs_mean", 1.0);
    r.assert("(1/N) Σ |a_k| <= 1", max_abs <= 1.0 + 1e-12);

    let ratios: Vec<f64> = ks.windows(2).map(|w| w[1] as f64 / w[0] as f64).collect();
    let tail_ratio = limsup_tail(&ratios);
    r.measure("tail_growth_ratio", tail_ratio);
    if tail_ratio <= SLOW_RATIO {
        // slowly growing k-sequence: the jumps (k_l − k_{l−1})/k_l vanish
        let at_ks: Vec<f64> =
            stats.rows.iter().filter(|s| ks.binary_search(&s.n).is_ok()).map(|s| s.max_over_n).collect();
        let tail = &at_ks[tail_start(at_ks.len())..];
        r.measure("max_over_n_at_H", *at_ks.last().expect("non-empty"));
        r.assert("max |a_k| / n trends to 0", trend_down(tail, 0.0) && limsup_tail(&at_ks) <= ZERO_LEVEL);
    }
    Ok(r.conclude())
}

fn scheme_label(s: &RigidityScheme) -> String {
    use crate::mod_sequences::KSequence;
    let k = match &s.k_sequence {
        KSequence::Geometric { base } => format!("{base}^n"),
        KSequence::Polynomial { degree } => format!("n^{degree}"),
        KSequence::Explicit { values } => format!("explicit[{}]", values.len()),
    };
    if s.sign_policy {
        k
    } else {
        format!("{k}/all_plus")
    }
}
