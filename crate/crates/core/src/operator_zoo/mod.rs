//! Concrete operators on finite-dimensional spaces: diagonal unitaries,
//! random contractions, the truncated shift, multiplication operators on
//! atomic measures and the Gillespie multiplier.

mod gillespie;
mod measure;
mod operator;
mod spectral;
mod trig;

pub use gillespie::{make_gillespie_multiplier, GillespieMultiplier, NormEstimate, NormSearch};
pub use measure::{measure_fourier_coefficient, Measure};
pub use operator::{
    make_diagonal_unitary, make_multiplication_operator, make_normal_matrix, make_random_contraction,
    make_truncated_shift, random_unitary, shift_basis, DenseContraction, MeasureSource, Operator, OperatorKind,
    OperatorSpec, PowerBound, Vector, NORM_TOL,
};
pub use spectral::{spectral_decompose, Projection, SpectralDecomp, SpectralPair, DEFAULT_SPECTRAL_TOL};
pub use trig::{lp_norm_trig, min_grid, TrigPoly};
