//! Averages along the primes: limits, polynomial orbits, distance from the
//! von Mangoldt weight and the maximal inequalities between prime means.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::report::{trend_down, CheckReport};
use crate::angle::Angle;
use crate::average_engines::{engine_new, predict_for, run_three_averages, three_average_gap_from, AverageScheme};
use crate::error::{Error, Result};
use crate::grid::{default_grid, tail_start};
use crate::mod_sequences::{make_von_mangoldt, w1_distance, wphi_supremum, ModSeq, VonMangoldtKind};
use crate::operator_zoo::{make_diagonal_unitary, Vector};
use crate::prime_kernel::{fourier_bohr_exact, PolyNN, PrimeTable};
use crate::sum::KahanSum;

/// Coordinatewise distance allowed between a measured average and its limit.
pub const LIMIT_TOL: f64 = 0.05;
/// Bound on the average at an angle that is not a root of unity.
pub const NON_ROOT_LEVEL: f64 = 0.2;
/// Grid tolerance added to the finite-horizon slack of the distance bound.
pub const GRID_TOL: f64 = 0.01;

fn ensure_within(table: &PrimeTable, n: u64) -> Result<()> {
    if n > table.horizon() {
        return Err(Error::HorizonExceeded { requested: n, horizon: table.horizon() });
    }
    Ok(())
}

/// Prime, log-weighted prime and `Λ'`-modulated averages of a diagonal
/// unitary: gaps within their certificates at every checkpoint and each
/// average within [`LIMIT_TOL`] of the predicted limit at `N`.
pub fn check_limit_identification(angles: &[Angle], x: &Vector, table: &Arc<PrimeTable>, n: u64) -> Result<CheckReport> {
    ensure_within(table, n)?;
    let mut r = CheckReport::new(format!("prime_limits/{}", angles.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(",")));
    r.horizon(n);
    let op = Arc::new(make_diagonal_unitary(angles.to_vec()));
    let runs = run_three_averages(&op, x, table, &default_grid(n))?;
    let gap = three_average_gap_from(&op, x, table, &runs)?;
    let last = gap.last();
    r.measure("prime_vs_log", last.prime_vs_log).bound("prime_vs_log", last.prime_vs_log_bound);
    r.measure("log_vs_full", last.log_vs_full).bound("log_vs_full", last.log_vs_full_bound);
    r.assert("gaps within certificates at every checkpoint", gap.all_within_bounds());

    let identical = runs
        .prime_log
        .trace()
        .checkpoints
        .iter()
        .zip(&runs.lambda_prime.trace().checkpoints)
        .flat_map(|(a, b)| a.average.iter().zip(&b.average).map(|(u, v)| (u - v).norm()))
        .fold(0.0, f64::max);
    r.measure("prime_log_vs_lambda_prime", identical);
    r.assert("log-weighted prime average equals the Λ'-modulated one", identical <= 1e-12);

    let Some(limit) = predict_for(&op, &AverageScheme::Prime, x)? else {
        return Ok(r.refuse("no closed-form limit"));
    };
    for (i, c) in limit.iter().enumerate() {
        r.measure_complex(&format!("limit[{i}]"), *c);
    }
    r.bound("limit_tol", LIMIT_TOL);
    for (name, engine) in [("prime", &runs.prime), ("prime_log", &runs.prime_log), ("lambda_prime", &runs.lambda_prime)] {
        let avg = engine.average();
        let dev = avg.iter().zip(limit.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        r.measure(format!("deviation[{name}]"), dev);
        r.assert(format!("{name} average within tolerance of the limit"), dev <= LIMIT_TOL);
    }
    let dev_full = runs.lambda.average().iter().zip(limit.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    r.measure("deviation[lambda]", dev_full);
    Ok(r.conclude())
}

/// `(1/n) Σ_{j ≤ n} λ^{Q(p_j)}` at `n = π(N)` against the exact residue
/// average, plus decay at the angle `√2 − 1`.
pub fn check_polynomial_primes(q: u64, b: u64, poly: &PolyNN, table: &Arc<PrimeTable>, n: u64) -> Result<CheckReport> {
    ensure_within(table, n)?;
    let exact = fourier_bohr_exact(q, b, poly)?;
    let mut r = CheckReport::new(format!("polynomial_primes/{b}/{q}/{}", poly_label(poly)));
    r.horizon(n);
    let count = table.prime_count(n)? as u64;
    if count == 0 {
        return Err(Error::Invalid(format!("no primes up to {n}")));
    }
    let run = |angle: Angle, grid: Vec<u64>| -> Result<Vec<Complex64>> {
        let op = Arc::new(make_diagonal_unitary(vec![angle]));
        let one = Vector::from_element(1, Complex64::new(1.0, 0.0));
        let mut e = engine_new(AverageScheme::PrimePoly(poly.clone()), op, one, Some(table.clone()))?;
        e.set_grid(grid)?;
        Ok(e.run_to(count)?.checkpoints.iter().map(|c| c.average[0]).collect())
    };
    let got = *run(Angle::rational(b as i64, q)?, vec![count])?.last().expect("checkpoint");
    r.measure_complex("average", got).measure_complex("exact", exact);
    r.measure("deviation", (got - exact).norm()).bound("deviation", LIMIT_TOL);
    r.assert("average within tolerance of the residue average", (got - exact).norm() <= LIMIT_TOL);

    let mut js: Vec<u64> = [n / 100, n / 10].iter().map(|&m| table.prime_count(m).map(|c| c as u64)).collect::<Result<_>>()?;
    js.retain(|&j| j > 0 && j < count);
    js.dedup();
    js.push(count);
    let decay: Vec<f64> = run(Angle::frac_sqrt(2), js.clone())?.iter().map(|z| z.norm()).collect();
    r.measure("non_root_at_N", *decay.last().expect("checkpoint")).bound("non_root", NON_ROOT_LEVEL);
    r.assert("non-root average small at N", *decay.last().expect("checkpoint") <= NON_ROOT_LEVEL);
    if js.len() == 3 {
        r.assert("non-root average decreasing", trend_down(&decay, 0.0));
    } else {
        r.note("horizon too small for the non-root trend");
    }
    Ok(r.conclude())
}

fn poly_label(p: &PolyNN) -> String {
    let terms: Vec<String> = p
        .coefficients()
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != 0)
        .map(|(d, c)| match (d, *c) {
            (0, c) => c.to_string(),
            (1, 1) => "t".into(),
            (1, c) => format!("{c}t"),
            (d, 1) => format!("t^{d}"),
            (d, c) => format!("{c}t^{d}"),
        })
        .collect();
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join("+")
    }
}

/// `‖a − Λ'‖_{W_1} >= 1/2 − slack` for every candidate with a verified
/// `W_φ` witness; `slack = |1 − (1/H) Σ Λ'| + GRID_TOL`.
pub fn check_w1_separation(candidates: &[ModSeq], table: &Arc<PrimeTable>, h: u64) -> Result<CheckReport> {
    ensure_within(table, h)?;
    let mut r = CheckReport::new("w1_separation".to_string());
    r.horizon(h);
    let lp = make_von_mangoldt(table.clone(), VonMangoldtKind::PrimeOnly);
    let slack = (1.0 - table.mean_von_mangoldt_prime(h)?).abs() + GRID_TOL;
    r.bound("distance_floor", 0.5 - slack);
    let grid = default_grid(h);
    let mut tested = 0;
    for c in candidates {
        let Some(phi) = c.claims().w_phi.as_ref() else {
            r.note(format!("skipped {}: no W_φ witness", c.name()));
            continue;
        };
        let s = wphi_supremum(c, phi, h)?;
        if !s.is_finite() {
            r.note(format!("skipped {}: W_φ supremum not finite", c.name()));
            continue;
        }
        tested += 1;
        let d = w1_distance(c, &lp, h, &grid)?.value;
        r.measure(format!("distance[{}]", c.name()), d);
        r.measure(format!("margin[{}]", c.name()), d - (0.5 - slack));
        r.assert(format!("{} stays 1/2 away from Λ'", c.name()), d >= 0.5 - slack);
    }
    if tested == 0 {
        return Ok(r.refuse("no candidate carries a verifiable witness"));
    }
    Ok(r.conclude())
}

/// Real test sequence `t_1, …, t_H` for the maximal inequalities.
#[derive(Clone, Debug)]
pub struct TransferSeq {
    pub name: String,
    pub values: Vec<f64>,
}

/// The constants `c₁ = max π(N) log N / N`, `c = 2 max N / (π(N) log N)` and
/// `c₂ = max √N / π(N)` over `2 <= N <= H`.
pub fn maximal_constants(table: &PrimeTable, h: u64) -> Result<(f64, f64, f64)> {
    ensure_within(table, h)?;
    let (mut c1, mut c, mut c2) = (0.0f64, 0.0f64, 0.0f64);
    let mut pi = 0u64;
    for n in 2..=h {
        if table.is_prime_unchecked(n) {
            pi += 1;
        }
        let (nf, pf) = (n as f64, pi as f64);
        c1 = c1.max(pf * nf.ln() / nf);
        c = c.max(2.0 * nf / (pf * nf.ln()));
        c2 = c2.max(nf.sqrt() / pf);
    }
    Ok((c1, c, c2))
}

/// Member `i` of the seeded family of sequences with `|t_k| <= 1`, cycling
/// through uniform, sparse, primes-only, off-primes and block-constant shapes.
pub fn seeded_transfer_sequence(i: usize, seed: u64, table: &PrimeTable, h: u64) -> TransferSeq {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let prime = |k: u64| table.is_prime_unchecked(k);
    let (name, values): (&str, Vec<f64>) = match i % 5 {
        0 => ("uniform", (1..=h).map(|_| rng.random_range(-1.0..=1.0)).collect()),
        1 => ("sparse", (1..=h).map(|_| if rng.random_bool(0.05) { rng.random_range(-1.0..=1.0) } else { 0.0 }).collect()),
        2 => ("primes_only", (1..=h).map(|k| if prime(k) { rng.random_range(-1.0..=1.0) } else { 0.0 }).collect()),
        3 => ("off_primes", (1..=h).map(|k| if prime(k) { 0.0 } else { rng.random_range(-1.0..=1.0) }).collect()),
        _ => {
            let len = rng.random_range(1..=4096u64);
            let mut level = 1.0;
            let values = (0..h)
                .map(|k| {
                    if k % len == 0 {
                        level = rng.random_range(-1.0..=1.0);
                    }
                    level
                })
                .collect();
            ("blocks", values)
        }
    };
    TransferSeq { name: format!("{name}#{i}"), values }
}

#[derive(Clone, Copy, Debug, Default)]
struct MaximalScan {
    /// Counts of `N` where the log-weighted and the prime inequality failed.
    violations: (usize, usize),
    /// Largest `L*/(c₁P*)` and `P*/(c₂t* + cL*)`.
    worst: (f64, f64),
}

/// Running sups of `(1/n) Σ |t_{p_j}|`, `(1/N) Σ |t_p| log p` and
/// `(1/n) Σ |t_k|`, with both inequalities tested at every `N`.
fn maximal_scan(t: &TransferSeq, table: &PrimeTable, (c1, c, c2): (f64, f64, f64)) -> MaximalScan {
    let mut out = MaximalScan::default();
    let (mut abs, mut prime, mut log) = (KahanSum::new(), KahanSum::new(), KahanSum::new());
    let (mut t_star, mut p_star, mut l_star) = (0.0f64, 0.0f64, 0.0f64);
    let mut count = 0u64;
    for (k, v) in (1u64..).zip(&t.values) {
        abs.add(v.abs());
        t_star = t_star.max(abs.value() / k as f64);
        if table.is_prime_unchecked(k) {
            count += 1;
            prime.add(v.abs());
            log.add(v.abs() * (k as f64).ln());
            p_star = p_star.max(prime.value() / count as f64);
        }
        if count == 0 {
            continue;
        }
        l_star = l_star.max(log.value() / k as f64);
        let rhs = c2 * t_star + c * l_star;
        if l_star > c1 * p_star * (1.0 + 1e-12) {
            out.violations.0 += 1;
        }
        if p_star > rhs * (1.0 + 1e-12) {
            out.violations.1 += 1;
        }
        if p_star > 0.0 {
            out.worst.0 = out.worst.0.max(l_star / (c1 * p_star));
        }
        if rhs > 0.0 {
            out.worst.1 = out.worst.1.max(p_star / rhs);
        }
    }
    out
}

/// Signed prime mean and log-weighted prime mean at each `N` of `grid`.
fn signed_means(t: &[f64], table: &PrimeTable, grid: &[u64]) -> Vec<(f64, f64)> {
    let (mut s, mut sl) = (KahanSum::new(), KahanSum::new());
    let mut count = 0u64;
    let mut out = Vec::with_capacity(grid.len());
    let mut next = 0;
    for (k, v) in (1u64..).zip(t) {
        if table.is_prime_unchecked(k) {
            count += 1;
            s.add(*v);
            sl.add(v * (k as f64).ln());
        }
        if grid.get(next) == Some(&k) {
            out.push((if count == 0 { 0.0 } else { s.value() / count as f64 }, sl.value() / k as f64));
            next += 1;
        }
    }
    out
}

/// Tail spread at or below which a mean reads as convergent.
pub const CONVERGENT_SPREAD: f64 = 0.05;
/// Tail spread at or above which a mean reads as divergent.
pub const DIVERGENT_SPREAD: f64 = 0.1;

/// The two maximal inequalities at every `N <= H` for `count` seeded
/// sequences, and joint convergence of the prime and log-weighted prime means
/// on a convergent and a divergent designed example.
pub fn check_maximal_transfer(count: usize, seed: u64, table: &Arc<PrimeTable>, h: u64) -> Result<CheckReport> {
    ensure_within(table, h)?;
    if h < 2 {
        return Err(Error::Invalid("maximal inequalities need H >= 2".into()));
    }
    let mut r = CheckReport::new(format!("maximal_transfer/{count}"));
    r.horizon(h);
    let consts = maximal_constants(table, h)?;
    r.measure("c1", consts.0).measure("c", consts.1).measure("c2", consts.2);
    let scans: Vec<MaximalScan> = (0..count)
        .into_par_iter()
        .map(|i| maximal_scan(&seeded_transfer_sequence(i, seed, table, h), table, consts))
        .collect();
    let v2: usize = scans.iter().map(|s| s.violations.0).sum();
    let v3: usize = scans.iter().map(|s| s.violations.1).sum();
    r.measure("sequences", count as f64);
    r.measure("log_mean_violations", v2 as f64).measure("prime_mean_violations", v3 as f64);
    r.measure("max_ratio_log_mean", scans.iter().map(|s| s.worst.0).fold(0.0, f64::max));
    r.measure("max_ratio_prime_mean", scans.iter().map(|s| s.worst.1).fold(0.0, f64::max));
    r.assert("sup log-weighted mean <= c1 · sup prime mean", v2 == 0);
    r.assert("sup prime mean <= c2 t* + c · sup log-weighted mean", v3 == 0);

    // signs on the primes: alternating (convergent) and constant on dyadic
    // ranges of the prime index (divergent)
    let on_primes = |f: &dyn Fn(u64) -> f64| -> Vec<f64> {
        let mut j = 0u64;
        (1..=h)
            .map(|k| {
                if table.is_prime_unchecked(k) {
                    j += 1;
                    f(j)
                } else {
                    0.0
                }
            })
            .collect()
    };
    let alternating = on_primes(&|j| if j % 2 == 0 { 1.0 } else { -1.0 });
    let blocks = on_primes(&|j| if (u64::BITS - j.leading_zeros()) % 2 == 0 { 1.0 } else { -1.0 });
    let grid = default_grid(h);
    let tail_grid = &grid[tail_start(grid.len())..];
    for (name, t, convergent) in [("alternating", alternating, true), ("dyadic_blocks", blocks, false)] {
        let means = signed_means(&t, table, tail_grid);
        let spread = |f: fn(&(f64, f64)) -> f64| {
            let v: Vec<f64> = means.iter().map(f).collect();
            v.iter().copied().fold(f64::NEG_INFINITY, f64::max) - v.iter().copied().fold(f64::INFINITY, f64::min)
        };
        let (sp, sl) = (spread(|m| m.0), spread(|m| m.1));
        r.measure(format!("tail_spread_prime[{name}]"), sp);
        r.measure(format!("tail_spread_log[{name}]"), sl);
        let reads = |s: f64| {
            if s <= CONVERGENT_SPREAD {
                Some(true)
            } else if s >= DIVERGENT_SPREAD {
                Some(false)
            } else {
                None
            }
        };
        r.assert(format!("{name} means agree on convergence"), reads(sp).is_some() && reads(sp) == reads(sl));
        r.assert(format!("{name} reads as designed"), reads(sp) == Some(convergent));
    }
    Ok(r.conclude())
}
