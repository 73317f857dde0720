//! Decomposition into unimodular eigenspaces plus the remaining part.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::operator::{Operator, Vector};
use crate::angle::Angle;
use crate::error::{Error, Result};

/// Default grouping tolerance, in turns.
pub const DEFAULT_SPECTRAL_TOL: f64 = 1e-8;

#[derive(Clone, Debug)]
pub enum Projection {
    /// Orthogonal projection onto a set of coordinate axes.
    Coordinates { dim: usize, indices: Vec<usize> },
    Matrix(DMatrix<Complex64>),
}

impl Projection {
    pub fn apply(&self, x: &Vector) -> Vector {
        match self {
            Projection::Coordinates { dim, indices } => {
                let mut out = Vector::zeros(*dim);
                for &i in indices {
                    out[i] = x[i];
                }
                out
            }
            Projection::Matrix(m) => m * x,
        }
    }

    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        match self {
            Projection::Coordinates { dim, indices } => {
                let mut m = DMatrix::zeros(*dim, *dim);
                for &i in indices {
                    m[(i, i)] = Complex64::new(1.0, 0.0);
                }
                m
            }
            Projection::Matrix(m) => m.clone(),
        }
    }

    pub fn rank(&self) -> usize {
        match self {
            Projection::Coordinates { indices, .. } => indices.len(),
            Projection::Matrix(m) => m.trace().re.round() as usize,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SpectralPair {
    pub angle: Angle,
    pub projection: Projection,
}

#[derive(Clone, Debug)]
pub struct SpectralDecomp {
    pub pairs: Vec<SpectralPair>,
    /// Projection onto the complement of the unimodular eigenspaces.
    pub residual: Projection,
    /// The operator restricted to the residual subspace.
    pub residual_action: DMatrix<Complex64>,
}

impl SpectralDecomp {
    /// `Σ λ_i P_i + residual_action`, which should reproduce the operator.
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let mut m = self.residual_action.clone();
        for p in &self.pairs {
            m += p.projection.to_matrix() * p.angle.unit();
        }
        m
    }
}

/// Single-linkage clusters of `items` (index, angle) by circular distance.
fn group_angles(items: &[(usize, Angle)], tol: f64) -> Vec<Vec<usize>> {
    let mut order: Vec<&(usize, Angle)> = items.iter().collect();
    order.sort_by(|a, b| a.1.turns().total_cmp(&b.1.turns()).then(a.0.cmp(&b.0)));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for (i, a) in order {
        let t = a.turns();
        match groups.last_mut() {
            Some(g) if t - last <= tol => g.push(*i),
            _ => groups.push(vec![*i]),
        }
        last = t;
    }
    if groups.len() > 1 {
        let first = items.iter().find(|(i, _)| *i == groups[0][0]).map(|x| x.1.turns()).unwrap_or(0.0);
        if first + 1.0 - last <= tol {
            let tail = groups.pop().expect("len > 1");
            groups[0].extend(tail);
        }
    }
    for g in &mut groups {
        g.sort_unstable();
    }
    groups
}

/// Unimodular eigenvalues grouped within `tol` turns, each with its orthogonal
/// eigenprojection. Diagonal and multiplication operators decompose exactly;
/// dense matrices must be normal within `tol`.
pub fn spectral_decompose(op: &Operator, tol: f64) -> Result<SpectralDecomp> {
    if !(tol > 0.0) {
        return Err(Error::Invalid(format!("tolerance {tol} must be positive")));
    }
    let dim = op.dim();
    match op {
        Operator::Diagonal { .. } | Operator::Multiplication { .. } => {
            let angles = op.diagonal_angles().expect("diagonal kind");
            let items: Vec<(usize, Angle)> = angles.into_iter().enumerate().collect();
            let pairs = group_angles(&items, tol)
                .into_iter()
                .map(|g| SpectralPair {
                    angle: items[g[0]].1,
                    projection: Projection::Coordinates { dim, indices: g },
                })
                .collect();
            Ok(SpectralDecomp {
                pairs,
                residual: Projection::Coordinates { dim, indices: vec![] },
                residual_action: DMatrix::zeros(dim, dim),
            })
        }
        Operator::Dense(d) => decompose_normal(&d.matrix, tol),
        _ => Err(Error::UnsupportedDecomposition(format!("{} operator", op.kind_name()))),
    }
}

fn decompose_normal(m: &DMatrix<Complex64>, tol: f64) -> Result<SpectralDecomp> {
    let dim = m.nrows();
    let adj = m.adjoint();
    let commutator = (m * &adj - &adj * m).norm();
    if commutator > tol * m.norm_squared().max(1.0) {
        return Err(Error::UnsupportedDecomposition(format!(
            "matrix is not normal (‖TT* − T*T‖_F = {commutator:.3e})"
        )));
    }
    let (q, t) = m.clone().schur().unpack();
    let eig: Vec<Complex64> = t.diagonal().iter().copied().collect();
    let mut unimodular = Vec::new();
    let mut rest = Vec::new();
    for (i, z) in eig.iter().enumerate() {
        if (z.norm() - 1.0).abs() <= tol {
            unimodular.push((i, Angle::from_unit(z / z.norm())?));
        } else {
            rest.push(i);
        }
    }
    let span = |cols: &[usize]| {
        let mut p = DMatrix::zeros(dim, dim);
        for &i in cols {
            let v = q.column(i);
            p += v * v.adjoint();
        }
        p
    };
    let pairs = group_angles(&unimodular, tol)
        .into_iter()
        .map(|g| {
            let angle = unimodular.iter().find(|(i, _)| *i == g[0]).expect("member").1;
            SpectralPair { angle, projection: Projection::Matrix(span(&g)) }
        })
        .collect();
    let mut residual_action = DMatrix::zeros(dim, dim);
    for &i in &rest {
        let v = q.column(i);
        residual_action += v * v.adjoint() * eig[i];
    }
    Ok(SpectralDecomp { pairs, residual: Projection::Matrix(span(&rest)), residual_action })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator_zoo::measure::Measure;
    use crate::operator_zoo::operator::{
        make_diagonal_unitary, make_multiplication_operator, make_normal_matrix, make_random_contraction,
        make_truncated_shift,
    };

    fn op_norm(m: &DMatrix<Complex64>) -> f64 {
        m.singular_values().max()
    }

    fn check_projections(d: &SpectralDecomp, tol: f64) {
        let mats: Vec<_> = d.pairs.iter().map(|p| p.projection.to_matrix()).collect();
        for (i, a) in mats.iter().enumerate() {
            assert!(op_norm(&(a * a - a)) <= tol);
            for b in &mats[i + 1..] {
                assert!(op_norm(&(a * b)) <= tol);
            }
        }
    }

    #[test]
    fn diagonal_groups() {
        let op = make_diagonal_unitary(vec![Angle::ZERO, Angle::ZERO, Angle::rational(1, 3).unwrap()]);
        let d = spectral_decompose(&op, DEFAULT_SPECTRAL_TOL).unwrap();
        assert_eq!(d.pairs.len(), 2);
        assert_eq!(d.pairs[0].angle, Angle::ZERO);
        assert_eq!(d.pairs[0].projection.rank(), 2);
        assert_eq!(d.pairs[1].projection.rank(), 1);
        check_projections(&d, 1e-8);
        let sum: DMatrix<Complex64> = d.pairs.iter().map(|p| p.projection.to_matrix()).sum();
        assert_eq!(sum + d.residual.to_matrix(), DMatrix::identity(3, 3));
    }

    #[test]
    fn grouping_wraps_around_zero() {
        let near_one = Angle::from_turns(1.0 - 1e-10).unwrap();
        let op = make_diagonal_unitary(vec![Angle::ZERO, Angle::rational(1, 2).unwrap(), near_one]);
        let d = spectral_decompose(&op, 1e-8).unwrap();
        assert_eq!(d.pairs.len(), 2);
        assert_eq!(d.pairs.iter().map(|p| p.projection.rank()).max(), Some(2));
    }

    #[test]
    fn multiplication_atoms_are_rank_one() {
        let mu = Measure::new((0..4).map(|k| (Angle::rational(k, 4).unwrap(), 0.25)).collect()).unwrap();
        let d = spectral_decompose(&make_multiplication_operator(mu), DEFAULT_SPECTRAL_TOL).unwrap();
        assert_eq!(d.pairs.len(), 4);
        assert!(d.pairs.iter().all(|p| p.projection.rank() == 1));
        let sum: DMatrix<Complex64> = d.pairs.iter().map(|p| p.projection.to_matrix()).sum();
        assert_eq!(sum, DMatrix::identity(4, 4));
    }

    #[test]
    fn recovers_angles_of_conjugated_diagonal() {
        let angles = [0.0, 0.125, 0.3, 2f64.sqrt() - 1.0, 0.75];
        let eig: Vec<Complex64> = angles.iter().map(|t| Angle::from_turns(*t).unwrap().unit()).collect();
        let op = make_normal_matrix(&eig, 17).unwrap();
        let d = spectral_decompose(&op, DEFAULT_SPECTRAL_TOL).unwrap();
        let mut got: Vec<f64> = d.pairs.iter().map(|p| p.angle.turns()).collect();
        got.sort_by(f64::total_cmp);
        assert_eq!(got.len(), angles.len());
        for (g, a) in got.iter().zip(angles) {
            assert!((g - a).abs() < 1e-8);
        }
        check_projections(&d, 1e-8);
        let Operator::Dense(dense) = &op else { panic!() };
        assert!(op_norm(&(d.reconstruct() - &dense.matrix)) <= 1e-8);
    }

    #[test]
    fn normal_matrix_with_decaying_part() {
        let eig = [Complex64::new(1.0, 0.0), Complex64::new(0.4, 0.3), Complex64::new(-1.0, 0.0)];
        let op = make_normal_matrix(&eig, 3).unwrap();
        let d = spectral_decompose(&op, DEFAULT_SPECTRAL_TOL).unwrap();
        assert_eq!(d.pairs.len(), 2);
        assert_eq!(d.residual.rank(), 1);
        let Operator::Dense(dense) = &op else { panic!() };
        assert!(op_norm(&(d.reconstruct() - &dense.matrix)) <= 1e-8);
    }

    #[test]
    fn unsupported_kinds() {
        let op = make_random_contraction(5, 1, None).unwrap();
        assert!(matches!(spectral_decompose(&op, 1e-8), Err(Error::UnsupportedDecomposition(_))));
        let shift = make_truncated_shift(3).unwrap();
        assert!(matches!(spectral_decompose(&shift, 1e-8), Err(Error::UnsupportedDecomposition(_))));
    }
}
