use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mod_sequences::{ModSeq, SeqSpec};
use crate::prime_kernel::{PolyNN, PrimeTable};

/// The five averages:
///
/// * `Cesaro`: `(1/N) Σ_{k ≤ N} T^k x`
/// * `Modulated(a)`: `(1/N) Σ_{k ≤ N} a_k T^k x`
/// * `Prime`: `(1/π(N)) Σ_{p ≤ N} T^p x`
/// * `PrimeLog`: `(1/N) Σ_{p ≤ N} log p · T^p x`
/// * `PrimePoly(Q)`: `(1/n) Σ_{j ≤ n} T^{Q(p_j)} x`, indexed by `n`
#[derive(Clone, Debug)]
pub enum AverageScheme {
    Cesaro,
    Modulated(ModSeq),
    Prime,
    PrimeLog,
    PrimePoly(PolyNN),
}

impl AverageScheme {
    pub fn name(&self) -> String {
        match self {
            AverageScheme::Cesaro => "cesaro".into(),
            AverageScheme::Modulated(a) => format!("modulated({})", a.name()),
            AverageScheme::Prime => "prime".into(),
            AverageScheme::PrimeLog => "prime_log".into(),
            AverageScheme::PrimePoly(q) => format!("prime_poly({:?})", q.coefficients()),
        }
    }

    pub fn needs_table(&self) -> bool {
        matches!(self, AverageScheme::Prime | AverageScheme::PrimeLog | AverageScheme::PrimePoly(_))
    }

    /// Largest index the scheme can reach with the given table.
    pub fn max_index(&self, table: Option<&PrimeTable>) -> Option<u64> {
        match self {
            AverageScheme::Cesaro => None,
            AverageScheme::Modulated(a) => a.horizon(),
            AverageScheme::Prime | AverageScheme::PrimeLog => table.map(|t| t.horizon()),
            AverageScheme::PrimePoly(_) => table.map(|t| t.primes().len() as u64),
        }
    }
}

/// JSON form of a scheme.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SchemeSpec {
    Cesaro,
    Modulated { sequence: SeqSpec },
    Prime,
    PrimeLog,
    PrimePoly { poly: PolyNN },
}

impl SchemeSpec {
    pub fn build(&self, table: Option<&Arc<PrimeTable>>) -> Result<AverageScheme> {
        Ok(match self {
            SchemeSpec::Cesaro => AverageScheme::Cesaro,
            SchemeSpec::Modulated { sequence } => AverageScheme::Modulated(ModSeq::from_spec(sequence, table)?),
            SchemeSpec::Prime => AverageScheme::Prime,
            SchemeSpec::PrimeLog => AverageScheme::PrimeLog,
            SchemeSpec::PrimePoly { poly } => AverageScheme::PrimePoly(poly.clone()),
        })
    }

    /// Whether building or running this scheme reads the prime table.
    pub fn needs_table(&self) -> bool {
        match self {
            SchemeSpec::Cesaro => false,
            SchemeSpec::Modulated { sequence } => seq_needs_table(sequence),
            _ => true,
        }
    }
}

fn seq_needs_table(s: &SeqSpec) -> bool {
    match s {
        SeqSpec::VonMangoldt { .. } => true,
        SeqSpec::Clipped { inner, .. } | SeqSpec::SlowDecay { base: inner, .. } => seq_needs_table(inner),
        _ => false,
    }
}

pub(crate) fn missing_table(scheme: &AverageScheme) -> Error {
    Error::MissingTable(match scheme {
        AverageScheme::Prime => "prime",
        AverageScheme::PrimeLog => "prime_log",
        _ => "prime_poly",
    })
}
