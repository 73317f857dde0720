//! Prime enumeration, von Mangoldt weights, and exact Fourier–Bohr limits of
//! averages along primes.

mod fourier_bohr;
mod li;
mod poly;
mod table;

pub use fourier_bohr::{euler_phi, fourier_bohr_exact, fourier_bohr_limit};
pub use li::log_integral;
pub use poly::PolyNN;
pub use table::{PrimeTable, MAX_HORIZON};
