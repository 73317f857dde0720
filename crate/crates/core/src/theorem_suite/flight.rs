//! Products of `W_φ` sequences with sequences of vanishing mean, and
//! modulated averages of stable vectors.

use std::sync::Arc;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::report::{CheckReport, TestSeq};
use crate::average_engines::{engine_new, AverageScheme};
use crate::error::{Error, Result};
use crate::grid::{default_grid, tail_start};
use crate::mod_sequences::{wphi_supremum, ModSeq, Phi};
use crate::operator_zoo::{Operator, Vector};
use crate::sum::KahanSum;

/// Split of `(1/n) Σ |a_k b_k|` at the level `C` where `φ(C) >= s‖b‖∞/ε`,
/// `s = sup_n (1/n) Σ |a_k| φ(|a_k|)`. Refuses when no witness `φ` is known
/// or when `(1/H) Σ |b_k| > ε/C`.
pub fn check_product_split(a: &ModSeq, phi: Option<&Phi>, b: &TestSeq, eps: f64, h: u64) -> Result<CheckReport> {
    let mut r = CheckReport::new(format!("product_split/{}*{}", a.name(), b.seq.name()));
    r.horizon(h);
    if !(eps > 0.0) {
        return Err(Error::Invalid(format!("ε = {eps} must be positive")));
    }
    let Some(phi) = phi.or(a.claims().w_phi.as_ref()) else {
        return Ok(r.refuse("no W_φ witness for a"));
    };
    if !b.verify(h)? {
        return Ok(r.refuse(format!("|b_k| exceeds the declared bound {}", b.bound)));
    }
    let s = wphi_supremum(a, phi, h)?;
    let c = phi.inverse(s * b.bound / eps);
    let phi_c = phi.eval(c);
    r.measure("s", s).measure("C", c).measure("phi(C)", phi_c).bound("two_eps", 2.0 * eps);

    let grid = default_grid(h);
    let (mut small, mut large, mut mean_b) = (KahanSum::new(), KahanSum::new(), KahanSum::new());
    let mut rows = Vec::with_capacity(grid.len());
    let mut next = 0;
    for k in 1..=h {
        let bk = b.seq.value_unchecked(k).norm();
        mean_b.add(bk);
        if !a.known_zero(k) {
            let ak = a.value_unchecked(k).norm();
            if ak <= c {
                small.add(ak * bk);
            } else {
                large.add(ak * bk);
            }
        }
        if grid[next] == k {
            let n = k as f64;
            rows.push((k, small.value() / n, large.value() / n, mean_b.value() / n));
            next += 1;
        }
    }
    let (_, small_h, large_h, mean_b_h) = *rows.last().expect("grid ends at h");
    r.measure("mean_abs_b", mean_b_h).measure("small_part", small_h).measure("large_part", large_h);
    r.measure("total", small_h + large_h);
    r.bound("eps_over_C", eps / c);
    if mean_b_h > eps / c {
        return Ok(r.refuse(format!("(1/H) Σ|b_k| = {mean_b_h:.4e} exceeds ε/C = {:.4e}", eps / c)));
    }
    let large_bound = if phi_c > 0.0 { s * b.bound / phi_c } else { f64::INFINITY };
    r.bound("large_part_bound", large_bound);
    for &(_, sm, lg, mb) in &rows {
        r.assert("small_part <= C·mean|b|", sm <= c * mb * (1.0 + 1e-12) + 1e-300);
        r.assert("large_part <= s‖b‖∞/φ(C)", lg <= large_bound * (1.0 + 1e-12));
    }
    r.assert("total <= 2ε", small_h + large_h <= 2.0 * eps);
    Ok(r.conclude())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlightIndex {
    /// `max_y (1/n) Σ |⟨T^k x, y⟩|` over the sampled unit functionals.
    pub lower: f64,
    /// `(1/n) Σ ‖T^k x‖`.
    pub upper: f64,
    pub n: u64,
    pub functionals: usize,
}

/// Bounds on `sup_{‖y‖ ≤ 1} (1/n) Σ_{k ≤ n} |⟨T^k x, y⟩|` from `m` seeded
/// unit functionals together with `x/‖x‖` (lower) and the orbit norms (upper).
pub fn estimate_flight_index(op: &Operator, x: &Vector, n: u64, m: usize, seed: u64) -> Result<FlightIndex> {
    if m == 0 || n == 0 {
        return Err(Error::Invalid("flight index needs n >= 1 and m >= 1".into()));
    }
    if x.len() != op.dim() {
        return Err(Error::DimMismatch { expected: op.dim(), got: x.len() });
    }
    let dim = x.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut ys: Vec<Vector> = (0..m)
        .map(|_| {
            let v = Vector::from_fn(dim, |_, _| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im)
            });
            let norm = v.norm();
            v.unscale(norm)
        })
        .collect();
    if x.norm() > 0.0 {
        ys.push(x.unscale(x.norm()));
    }
    let diagonal = op.diagonal_angles().is_some();
    let mut sums = vec![KahanSum::new(); ys.len()];
    let mut norms = KahanSum::new();
    let mut v = x.clone();
    for k in 1..=n {
        v = if diagonal { op.apply_power(k as u128, x)? } else { op.apply(&v)? };
        norms.add(v.norm());
        for (s, y) in sums.iter_mut().zip(&ys) {
            s.add(y.dotc(&v).norm());
        }
    }
    let nf = n as f64;
    Ok(FlightIndex {
        lower: sums.iter().map(|s| s.value() / nf).fold(0.0, f64::max),
        upper: norms.value() / nf,
        n,
        functionals: ys.len(),
    })
}

/// `‖(1/n) Σ a_k T^k x‖` for a strict contraction: non-increasing over the
/// last third of the grid and at most `tol` at `H`.
pub fn check_flight_modulation(
    a: &ModSeq,
    phi: Option<&Phi>,
    op: &Arc<Operator>,
    x: &Vector,
    h: u64,
    tol: f64,
) -> Result<CheckReport> {
    let mut r = CheckReport::new(format!("flight_modulation/{}", a.name()));
    r.horizon(h);
    let Some(phi) = phi.or(a.claims().w_phi.as_ref()) else {
        return Ok(r.refuse("no W_φ witness for a"));
    };
    let rho = match &**op {
        Operator::Dense(d) => d.spectral_radius,
        _ => return Ok(r.refuse(format!("{} operator is not a strict contraction", op.kind_name()))),
    };
    r.measure("spectral_radius", rho);
    if rho >= 1.0 {
        return Ok(r.refuse(format!("spectral radius {rho} is not below 1")));
    }
    let s = wphi_supremum(a, phi, h)?;
    r.measure("wphi_sup", s);
    if !s.is_finite() {
        return Ok(r.refuse("W_φ supremum is not finite"));
    }
    let mut engine = engine_new(AverageScheme::Modulated(a.clone()), op.clone(), x.clone(), None)?;
    engine.set_grid(default_grid(h))?;
    let norms: Vec<f64> = engine.run_to(h)?.checkpoints.iter().map(|c| c.norm).collect();
    let tail = &norms[tail_start(norms.len())..];
    let last = *norms.last().expect("checkpoint at h");
    r.measure("norm_at_H", last).bound("tol", tol);
    r.assert("norm non-increasing on the tail", tail.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9)));
    r.assert("norm <= tol at H", last <= tol);
    let fi = estimate_flight_index(op, x, h.min(100_000), 8, 1)?;
    r.measure("flight_index_upper", fi.upper).measure("flight_index_lower", fi.lower);
    r.note("finite dimension: flight vectors of a contraction with spectral radius < 1 are stable");
    Ok(r.conclude())
}
