//! Finite-dimensional operators used as test beds for the averages.

use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::gillespie::{make_gillespie_multiplier, GillespieMultiplier, NormSearch};
use super::measure::Measure;
use crate::angle::Angle;
use crate::error::{Error, Result};

pub type Vector = DVector<Complex64>;

/// Slack on the largest singular value of a contraction.
pub const NORM_TOL: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Clone, Debug)]
pub struct DenseContraction {
    pub matrix: DMatrix<Complex64>,
    /// Condition number of the eigenvector matrix, so `‖T^n‖ <= κ ρ^n`.
    pub kappa: f64,
    pub spectral_radius: f64,
}

#[derive(Clone, Debug)]
pub enum Operator {
    /// Acts coordinatewise by `e^{2πi t_i}`.
    Diagonal { angles: Vec<Angle> },
    Dense(DenseContraction),
    /// Shift `e_m -> e_{m+1}` on indices `-W..=W`, stored at position `m + W`;
    /// `e_W` is sent to zero.
    TruncatedShift { window: u64 },
    /// Multiplication by `z` on `L²(μ)`, in the orthonormal coordinates
    /// `f(z_i) √w_i`.
    Multiplication { measure: Measure },
    Gillespie(GillespieMultiplier),
}

/// Bound `M` on `sup_k ‖T^k‖`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PowerBound {
    pub value: f64,
    /// False when `value` is a numerical lower-bound estimate.
    pub certified: bool,
}

pub fn make_diagonal_unitary(angles: Vec<Angle>) -> Operator {
    Operator::Diagonal { angles }
}

pub fn make_truncated_shift(window: u64) -> Result<Operator> {
    if window == 0 {
        return Err(Error::Invalid("truncated shift window must be >= 1".into()));
    }
    Ok(Operator::TruncatedShift { window })
}

pub fn make_multiplication_operator(measure: Measure) -> Operator {
    Operator::Multiplication { measure }
}

fn gaussian_matrix(dim: usize, rng: &mut ChaCha8Rng) -> DMatrix<Complex64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    DMatrix::from_fn(dim, dim, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re * s, im * s)
    })
}

/// Seeded Gaussian matrix with singular values clipped to 1, rescaled so the
/// spectral radius is at most `cap` when one is given.
pub fn make_random_contraction(dim: usize, seed: u64, cap: Option<f64>) -> Result<Operator> {
    if dim == 0 {
        return Err(Error::Invalid("dimension must be >= 1".into()));
    }
    if let Some(r) = cap {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Invalid(format!("spectral radius cap {r} must be positive")));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut svd = gaussian_matrix(dim, &mut rng).svd(true, true);
    svd.singular_values.iter_mut().for_each(|s| *s = s.min(1.0));
    let mut m = svd.recompose().expect("u and v were computed");
    if let Some(r) = cap {
        let rho = spectral_radius(&m);
        if rho > r {
            m *= Complex64::new(r / rho, 0.0);
        }
    }
    Operator::dense(m)
}

/// Haar-like random unitary from the QR factorization of a seeded Gaussian matrix.
pub fn random_unitary(dim: usize, seed: u64) -> DMatrix<Complex64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    gaussian_matrix(dim, &mut rng).qr().q()
}

/// `V diag(eigenvalues) V*` with a seeded random unitary `V`.
pub fn make_normal_matrix(eigenvalues: &[Complex64], seed: u64) -> Result<Operator> {
    if eigenvalues.is_empty() {
        return Err(Error::Invalid("need at least one eigenvalue".into()));
    }
    let v = random_unitary(eigenvalues.len(), seed);
    let d = DMatrix::from_diagonal(&DVector::from_column_slice(eigenvalues));
    Operator::dense(&v * d * v.adjoint())
}

fn spectral_radius(m: &DMatrix<Complex64>) -> f64 {
    let (_, t) = m.clone().schur().unpack();
    t.diagonal().iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Eigenvectors of an upper-triangular matrix by back substitution, one column each.
fn triangular_eigenvectors(t: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = t.nrows();
    let mut v = DMatrix::from_element(n, n, ZERO);
    for i in 0..n {
        let lambda = t[(i, i)];
        v[(i, i)] = Complex64::new(1.0, 0.0);
        for j in (0..i).rev() {
            let mut s = ZERO;
            for l in j + 1..=i {
                s += t[(j, l)] * v[(l, i)];
            }
            let mut d = t[(j, j)] - lambda;
            if d.norm() < f64::EPSILON {
                // repeated eigenvalue: perturb so the column stays finite
                d = Complex64::new(f64::EPSILON, 0.0);
            }
            v[(j, i)] = -s / d;
        }
        let norm = v.column(i).norm();
        v.column_mut(i).unscale_mut(norm);
    }
    v
}

fn condition_number(m: &DMatrix<Complex64>) -> f64 {
    let s = m.singular_values();
    let max = s.max();
    let min = s.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

impl Operator {
    /// Dense matrix checked to be a contraction.
    pub fn dense(matrix: DMatrix<Complex64>) -> Result<Operator> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::Invalid(format!("matrix is {}x{}", matrix.nrows(), matrix.ncols())));
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Invalid("matrix has non-finite entries".into()));
        }
        let top = matrix.singular_values().max();
        if top > 1.0 + NORM_TOL {
            return Err(Error::Invalid(format!("largest singular value {top} exceeds 1")));
        }
        let (q, t) = matrix.clone().schur().unpack();
        let spectral_radius = t.diagonal().iter().map(|z| z.norm()).fold(0.0, f64::max);
        let kappa = condition_number(&(q * triangular_eigenvectors(&t)));
        Ok(Operator::Dense(DenseContraction { matrix, kappa, spectral_radius }))
    }

    pub fn dim(&self) -> usize {
        match self {
            Operator::Diagonal { angles } => angles.len(),
            Operator::Dense(d) => d.matrix.nrows(),
            Operator::TruncatedShift { window } => 2 * *window as usize + 1,
            Operator::Multiplication { measure } => measure.len(),
            Operator::Gillespie(g) => g.dim(),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Operator::Diagonal { .. } => "diagonal_unitary",
            Operator::Dense(_) => "dense_contraction",
            Operator::TruncatedShift { .. } => "truncated_shift",
            Operator::Multiplication { .. } => "multiplication",
            Operator::Gillespie(_) => "gillespie",
        }
    }

    /// Eigen-angles of the kinds that are diagonal in their stored coordinates.
    pub fn diagonal_angles(&self) -> Option<Vec<Angle>> {
        match self {
            Operator::Diagonal { angles } => Some(angles.clone()),
            Operator::Multiplication { measure } => Some(measure.atoms().iter().map(|(a, _)| *a).collect()),
            Operator::Gillespie(g) => Some(g.angles().to_vec()),
            _ => None,
        }
    }

    /// The constant function `1` of a multiplication operator.
    pub fn constant_one(&self) -> Option<Vector> {
        match self {
            Operator::Multiplication { measure } => Some(Vector::from_iterator(
                measure.len(),
                measure.atoms().iter().map(|(_, w)| Complex64::new(w.sqrt(), 0.0)),
            )),
            _ => None,
        }
    }

    fn check_dim(&self, x: &Vector) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(())
    }

    /// Norm of the space the operator acts on: `L^p` for the Gillespie
    /// multiplier, Euclidean otherwise.
    pub fn norm(&self, x: &Vector) -> Result<f64> {
        self.check_dim(x)?;
        match self {
            Operator::Gillespie(g) => g.lp_norm(x),
            _ => Ok(x.norm()),
        }
    }

    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        self.apply_power(1, x)
    }

    /// `T^k x`. Diagonal kinds reduce `k·t_i` exactly before exponentiating.
    pub fn apply_power(&self, k: u128, x: &Vector) -> Result<Vector> {
        self.check_dim(x)?;
        if let Some(angles) = self.diagonal_angles() {
            return Ok(Vector::from_iterator(
                x.len(),
                angles.iter().zip(x.iter()).map(|(a, c)| a.times(k).unit() * c),
            ));
        }
        match self {
            Operator::Dense(d) => {
                let mut v = x.clone();
                for _ in 0..k {
                    v = &d.matrix * v;
                }
                Ok(v)
            }
            Operator::TruncatedShift { .. } => Ok(shift_by(x, k)),
            _ => unreachable!("diagonal kinds handled above"),
        }
    }

    /// Number of applications that act isometrically on `x`; `None` when
    /// every power is exact (all kinds but the truncated shift).
    pub fn exact_slack(&self, x: &Vector) -> Option<u128> {
        match self {
            Operator::TruncatedShift { .. } => {
                let last = x.iter().rposition(|c| *c != ZERO);
                Some(match last {
                    Some(pos) => (x.len() - 1 - pos) as u128,
                    None => u128::MAX,
                })
            }
            _ => None,
        }
    }

    /// Fails with `WindowExceeded` if `T^k x` would leak out of the shift window.
    pub fn check_exact(&self, k: u128, x: &Vector) -> Result<()> {
        match self.exact_slack(x) {
            Some(slack) if k > slack => Err(Error::WindowExceeded { exponent: k, slack }),
            _ => Ok(()),
        }
    }

    /// `M >= sup_k ‖T^k‖`: exactly 1 for contractions and unitaries, a
    /// numerical lower-bound estimate for the Gillespie multiplier with `p != 2`.
    pub fn power_bound(&self) -> Result<PowerBound> {
        match self {
            Operator::Gillespie(g) if g.p() != 2.0 => {
                let est = g.power_norm_profile(60, &NormSearch::default())?;
                let value = est.iter().map(|e| e.value).fold(1.0, f64::max);
                Ok(PowerBound { value, certified: false })
            }
            _ => Ok(PowerBound { value: 1.0, certified: true }),
        }
    }
}

/// Index shift by `k` positions toward the top; anything past the end is dropped.
fn shift_by(x: &Vector, k: u128) -> Vector {
    let n = x.len();
    let mut out = Vector::from_element(n, ZERO);
    if k < n as u128 {
        let k = k as usize;
        out.rows_mut(k, n - k).copy_from(&x.rows(0, n - k));
    }
    out
}

/// Basis vector `e_m` of the truncated shift on `-W..=W`.
pub fn shift_basis(window: u64, m: i64) -> Result<Vector> {
    if m.unsigned_abs() > window {
        return Err(Error::Invalid(format!("index {m} outside -{window}..={window}")));
    }
    let mut v = Vector::from_element(2 * window as usize + 1, ZERO);
    v[(m + window as i64) as usize] = Complex64::new(1.0, 0.0);
    Ok(v)
}

/// Where the atoms of a multiplication operator come from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeasureSource {
    /// Uniform on `{k / 2^m}`.
    DyadicUniform { m: u32 },
    Atoms { atoms: Measure },
    /// CSV file, relative paths resolved against the spec's directory.
    Csv { path: PathBuf },
}

impl MeasureSource {
    pub fn load(&self, base: &Path) -> Result<Measure> {
        match self {
            MeasureSource::DyadicUniform { m } => Measure::dyadic_uniform(*m),
            MeasureSource::Atoms { atoms } => Ok(atoms.clone()),
            MeasureSource::Csv { path } => Measure::read_csv(&base.join(path)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum OperatorKind {
    DiagonalUnitary {
        angles: Vec<Angle>,
    },
    RandomContraction {
        dim: usize,
        #[serde(default)]
        spectral_radius_cap: Option<f64>,
    },
    /// `V diag(λ) V*` with a seeded random unitary.
    NormalMatrix {
        eigenvalues: Vec<Complex64>,
    },
    TruncatedShift {
        window: u64,
    },
    Multiplication {
        measure: MeasureSource,
    },
    Gillespie {
        alpha: Angle,
        window: u64,
        p: f64,
        grid: usize,
    },
}

/// JSON form `{"kind": …, "params": {…}, "seed": …}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorSpec {
    #[serde(flatten)]
    pub kind: OperatorKind,
    #[serde(default)]
    pub seed: u64,
}

impl OperatorSpec {
    pub fn build(&self, base: &Path) -> Result<Operator> {
        match &self.kind {
            OperatorKind::DiagonalUnitary { angles } => Ok(make_diagonal_unitary(angles.clone())),
            OperatorKind::RandomContraction { dim, spectral_radius_cap } => {
                make_random_contraction(*dim, self.seed, *spectral_radius_cap)
            }
            OperatorKind::NormalMatrix { eigenvalues } => make_normal_matrix(eigenvalues, self.seed),
            OperatorKind::TruncatedShift { window } => make_truncated_shift(*window),
            OperatorKind::Multiplication { measure } => Ok(make_multiplication_operator(measure.load(base)?)),
            OperatorKind::Gillespie { alpha, window, p, grid } => make_gillespie_multiplier(*alpha, *window, *p, *grid),
        }
    }
}
