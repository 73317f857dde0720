use num_complex::Complex64;
use num_integer::Integer;

use super::poly::PolyNN;
use crate::angle::Angle;
use crate::error::{Error, Result};
use crate::sum::ComplexKahanSum;

pub fn euler_phi(q: u64) -> u64 {
    (0..q).filter(|a| a.gcd(&q) == 1).count() as u64
}

/// Limit of `(1/n) Σ_{j ≤ n} λ^{Q(p_j)}` for `λ = e(b/q)`:
/// `(1/φ(q)) Σ_{0 ≤ a < q, (a,q)=1} e(Q(a) b / q)`.
///
/// `b/q` must already be in lowest terms; a non-reduced representation is
/// refused rather than silently reduced.
pub fn fourier_bohr_exact(q: u64, b: u64, poly: &PolyNN) -> Result<Complex64> {
    if q == 0 {
        return Err(Error::InvalidModulus);
    }
    let g = b.gcd(&q);
    if g != 1 {
        return Err(Error::NonPrimitive { b, q, gcd: g });
    }
    let mut acc = ComplexKahanSum::new();
    let mut count = 0u64;
    for a in (0..q).filter(|a| a.gcd(&q) == 1) {
        let qa = poly.eval_mod(a, q);
        let phase = ((qa as u128 * b as u128) % q as u128) as i64;
        acc.add(Angle::rational(phase, q)?.unit());
        count += 1;
    }
    Ok(acc.value() / count as f64)
}

/// Exact limit for a unimodular point given as an [`Angle`]: the residue
/// average when the angle is a root of unity of order at most `max_order`
/// (within `tol` turns), zero otherwise.
pub fn fourier_bohr_limit(angle: &Angle, poly: &PolyNN, max_order: u64, tol: f64) -> Result<Complex64> {
    match angle.root_of_unity(max_order, tol) {
        Some((b, q)) => fourier_bohr_exact(q, b, poly),
        None => Ok(Complex64::new(0.0, 0.0)),
    }
}
