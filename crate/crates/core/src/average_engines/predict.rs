//! Limits predicted from the spectral decomposition.

use num_complex::Complex64;

use super::scheme::AverageScheme;
use crate::angle::Angle;
use crate::error::{Error, Result};
use crate::operator_zoo::{spectral_decompose, Operator, SpectralDecomp, Vector, DEFAULT_SPECTRAL_TOL};
use crate::prime_kernel::{fourier_bohr_limit, PolyNN};

/// Eigenvalues are treated as roots of unity up to this order.
pub const ROOT_ORDER_BOUND: u64 = 1000;
/// Tolerance, in turns, for recognizing a root of unity.
pub const ROOT_TOL: f64 = 1e-9;

/// Limit weight `c(λ)` the scheme attaches to an eigenvalue; `None` if the
/// scheme has no closed form.
pub fn limit_coefficient(scheme: &AverageScheme, angle: &Angle) -> Result<Option<Complex64>> {
    let id = PolyNN::identity();
    Ok(match scheme {
        AverageScheme::Cesaro => {
            let one = angle.root_of_unity(1, ROOT_TOL).is_some();
            Some(Complex64::new(if one { 1.0 } else { 0.0 }, 0.0))
        }
        AverageScheme::Prime | AverageScheme::PrimeLog => {
            Some(fourier_bohr_limit(angle, &id, ROOT_ORDER_BOUND, ROOT_TOL)?)
        }
        AverageScheme::Modulated(a) if a.von_mangoldt_kind().is_some() => {
            Some(fourier_bohr_limit(angle, &id, ROOT_ORDER_BOUND, ROOT_TOL)?)
        }
        AverageScheme::Modulated(_) => None,
        AverageScheme::PrimePoly(q) => Some(fourier_bohr_limit(angle, q, ROOT_ORDER_BOUND, ROOT_TOL)?),
    })
}

/// `Σ_i c(λ_i) P_i x`; the part of `x` off the unimodular eigenspaces
/// contributes nothing. `None` when the scheme has no closed form.
pub fn predict_limit(decomp: &SpectralDecomp, scheme: &AverageScheme, x: &Vector) -> Result<Option<Vector>> {
    let mut out = Vector::zeros(x.len());
    for pair in &decomp.pairs {
        let Some(c) = limit_coefficient(scheme, &pair.angle)? else { return Ok(None) };
        if c != Complex64::new(0.0, 0.0) {
            out += pair.projection.apply(x) * c;
        }
    }
    Ok(Some(out))
}

/// Decomposes `op` and predicts; unsupported operators yield `None`.
pub fn predict_for(op: &Operator, scheme: &AverageScheme, x: &Vector) -> Result<Option<Vector>> {
    match spectral_decompose(op, DEFAULT_SPECTRAL_TOL) {
        Ok(d) => predict_limit(&d, scheme, x),
        Err(Error::UnsupportedDecomposition(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator_zoo::{make_diagonal_unitary, make_normal_matrix, make_random_contraction};

    fn one() -> Vector {
        Vector::from_element(1, Complex64::new(1.0, 0.0))
    }

    fn predict(angle: Angle, scheme: &AverageScheme) -> Complex64 {
        predict_for(&make_diagonal_unitary(vec![angle]), scheme, &one()).unwrap().unwrap()[0]
    }

    #[test]
    fn named_predictions() {
        assert!((predict(Angle::ZERO, &AverageScheme::Prime) - 1.0).norm() < 1e-15);
        assert!((predict(Angle::rational(1, 2).unwrap(), &AverageScheme::Prime) + 1.0).norm() < 1e-15);
        assert_eq!(predict(Angle::frac_sqrt(2), &AverageScheme::PrimeLog), Complex64::new(0.0, 0.0));
        let sq = AverageScheme::PrimePoly(PolyNN::monomial(2).unwrap());
        assert!((predict(Angle::rational(1, 4).unwrap(), &sq) - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert_eq!(predict(Angle::rational(1, 3).unwrap(), &AverageScheme::Cesaro), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn decaying_part_contributes_nothing() {
        let op = make_normal_matrix(&[Complex64::new(1.0, 0.0), Complex64::new(0.5, 0.0)], 4).unwrap();
        let x = Vector::from_vec(vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]);
        let p = predict_for(&op, &AverageScheme::Prime, &x).unwrap().unwrap();
        let Operator::Dense(d) = &op else { panic!() };
        // the fixed part of x is preserved by T
        assert!((&d.matrix * &p - &p).norm() < 1e-10);
        assert!(p.norm() < x.norm());
    }

    #[test]
    fn unsupported_means_no_prediction() {
        let op = make_random_contraction(3, 2, None).unwrap();
        let x = Vector::from_element(3, Complex64::new(1.0, 0.0));
        assert!(predict_for(&op, &AverageScheme::Prime, &x).unwrap().is_none());
        let a = crate::mod_sequences::ModSeq::reciprocal();
        let diag = make_diagonal_unitary(vec![Angle::ZERO]);
        assert!(predict_for(&diag, &AverageScheme::Modulated(a), &one()).unwrap().is_none());
    }
}
