//! Declarative experiment description.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::{geometric_grid, validate_grid};
use crate::operator_zoo::{shift_basis, Operator, OperatorSpec, Vector};
use crate::average_engines::SchemeSpec;

/// A coordinate written either as a real number or as `[re, im]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coord {
    Real(f64),
    Complex([f64; 2]),
}

impl Coord {
    fn value(self) -> Complex64 {
        match self {
            Coord::Real(re) => Complex64::new(re, 0.0),
            Coord::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    /// All coordinates 1.
    Ones,
    /// All coordinates `1/√dim`.
    UnitOnes,
    /// The constant function `𝟙` of a multiplication or multiplier operator.
    ConstantOne,
    /// Seeded Gaussian vector of norm 1.
    Random,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VectorSpec {
    Coords { coords: Vec<Coord> },
    /// `e_index`; on the truncated shift the index runs over `-W..=W`.
    Basis { basis: i64 },
    Preset { preset: Preset },
}

impl VectorSpec {
    pub fn build(&self, op: &Operator, seed: u64) -> Result<Vector> {
        let dim = op.dim();
        let v = match self {
            VectorSpec::Coords { coords } => Vector::from_iterator(coords.len(), coords.iter().map(|c| c.value())),
            VectorSpec::Basis { basis } => match op {
                Operator::TruncatedShift { window } => shift_basis(*window, *basis)?,
                _ => {
                    let i = usize::try_from(*basis)
                        .ok()
                        .filter(|&i| i < dim)
                        .ok_or_else(|| Error::Invalid(format!("basis index {basis} outside 0..{dim}")))?;
                    let mut v = Vector::zeros(dim);
                    v[i] = Complex64::new(1.0, 0.0);
                    v
                }
            },
            VectorSpec::Preset { preset } => match preset {
                Preset::Ones => Vector::from_element(dim, Complex64::new(1.0, 0.0)),
                Preset::UnitOnes => Vector::from_element(dim, Complex64::new((dim as f64).sqrt().recip(), 0.0)),
                Preset::ConstantOne => op
                    .constant_one()
                    .ok_or_else(|| Error::Invalid(format!("{} operator has no constant function", op.kind_name())))?,
                Preset::Random => {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    let v = Vector::from_fn(dim, |_, _| {
                        let re: f64 = StandardNormal.sample(&mut rng);
                        let im: f64 = StandardNormal.sample(&mut rng);
                        Complex64::new(re, im)
                    });
                    let n = v.norm();
                    v.unscale(n)
                }
            },
        };
        if v.len() != dim {
            return Err(Error::DimMismatch { expected: dim, got: v.len() });
        }
        Ok(v)
    }
}

fn default_ratio() -> f64 {
    1.3
}

fn default_start() -> u64 {
    10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CheckpointSpec {
    Explicit { at: Vec<u64> },
    Geometric {
        #[serde(default = "default_start")]
        start: u64,
        #[serde(default = "default_ratio")]
        ratio: f64,
    },
}

impl Default for CheckpointSpec {
    fn default() -> Self {
        CheckpointSpec::Geometric { start: default_start(), ratio: default_ratio() }
    }
}

impl CheckpointSpec {
    /// Checkpoints up to and including `horizon`.
    pub fn grid(&self, horizon: u64) -> Result<Vec<u64>> {
        match self {
            CheckpointSpec::Explicit { at } => {
                let mut g = at.clone();
                if g.last() != Some(&horizon) {
                    g.push(horizon);
                }
                validate_grid(&g, horizon)?;
                Ok(g)
            }
            CheckpointSpec::Geometric { start, ratio } => geometric_grid((*start).min(horizon), *ratio, horizon),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    /// Trace CSV path, relative to the output directory.
    #[serde(default)]
    pub trace: Option<PathBuf>,
    /// Report JSON path, relative to the output directory.
    #[serde(default)]
    pub report: Option<PathBuf>,
    /// Coordinates written to the trace; default all when the dimension is at most 64.
    #[serde(default)]
    pub coords: Option<Vec<usize>>,
}

/// Largest dimension whose coordinates are written by default.
pub const DEFAULT_TRACE_DIM: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub operator: OperatorSpec,
    pub vector: VectorSpec,
    pub scheme: SchemeSpec,
    /// Last index `N` of the average (for `prime_poly`, the prime count `n`).
    pub horizon: u64,
    /// Prime-table horizon; defaults to what the scheme needs to reach `horizon`.
    #[serde(default)]
    pub table_horizon: Option<u64>,
    #[serde(default)]
    pub checkpoints: CheckpointSpec,
    #[serde(default)]
    pub outputs: OutputSpec,
    /// Overrides the operator seed and seeds the random vector preset.
    #[serde(default)]
    pub seed: Option<u64>,
    /// Convergence tolerance.
    #[serde(default)]
    pub tol: Option<f64>,
}

impl ExperimentSpec {
    /// Parses JSON, reporting schema violations with their field path.
    pub fn from_json(text: &str, origin: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| Error::Spec {
            path: format!("{origin}: {}", e.path()),
            message: e.inner().to_string(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text, &path.display().to_string())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("spec serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn effective_seed(&self) -> u64 {
        self.seed.unwrap_or(self.operator.seed)
    }

    /// Table horizon: explicit, or enough primes for `prime_poly`, or `horizon`.
    pub fn needed_table_horizon(&self) -> Option<u64> {
        if !self.scheme.needs_table() {
            return None;
        }
        Some(self.table_horizon.unwrap_or(match self.scheme {
            SchemeSpec::PrimePoly { .. } => nth_prime_upper_bound(self.horizon),
            _ => self.horizon.max(2),
        }))
    }
}

/// `p_n < n (ln n + ln ln n)` for `n >= 6`.
pub fn nth_prime_upper_bound(n: u64) -> u64 {
    if n < 6 {
        return 13;
    }
    let x = n as f64;
    (x * (x.ln() + x.ln().ln())).ceil() as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator_zoo::{make_diagonal_unitary, make_multiplication_operator, make_truncated_shift, Measure};

    const SPEC: &str = r#"{
        "operator": {"kind": "diagonal_unitary", "params": {"angles": ["1/2"]}},
        "vector": {"coords": [1]},
        "scheme": {"kind": "prime"},
        "horizon": 100000
    }"#;

    #[test]
    fn parse_defaults() {
        let s = ExperimentSpec::from_json(SPEC, "x").unwrap();
        assert_eq!(s.checkpoints, CheckpointSpec::default());
        assert_eq!(s.needed_table_horizon(), Some(100_000));
        assert_eq!(s.effective_seed(), 0);
        assert_eq!(s.hash().len(), 64);
        let again = ExperimentSpec::from_json(&serde_json::to_string(&s).unwrap(), "y").unwrap();
        assert_eq!(again.hash(), s.hash());
    }

    #[test]
    fn errors_carry_field_paths() {
        let bad = SPEC.replace("100000", "\"many\"");
        let Err(Error::Spec { path, .. }) = ExperimentSpec::from_json(&bad, "f.json") else { panic!() };
        assert_eq!(path, "f.json: horizon");
        let bad = SPEC.replace(r#""angles": ["1/2"]"#, r#""angles": ["one half"]"#);
        let Err(Error::Spec { path, .. }) = ExperimentSpec::from_json(&bad, "f.json") else { panic!() };
        assert!(path.contains("operator"), "{path}");
        assert!(ExperimentSpec::from_json(&SPEC.replace("\"horizon\"", "\"horizn\""), "f").is_err());
    }

    #[test]
    fn vectors() {
        let op = make_diagonal_unitary(vec![crate::Angle::ZERO; 3]);
        let v = VectorSpec::Preset { preset: Preset::Random }.build(&op, 5).unwrap();
        assert!((v.norm() - 1.0).abs() < 1e-12);
        assert_eq!(v, VectorSpec::Preset { preset: Preset::Random }.build(&op, 5).unwrap());
        let v: VectorSpec = serde_json::from_str(r#"{"coords": [1, [0, 2], 0.5]}"#).unwrap();
        assert_eq!(v.build(&op, 0).unwrap()[1], Complex64::new(0.0, 2.0));
        assert!(VectorSpec::Basis { basis: 3 }.build(&op, 0).is_err());
        let shift = make_truncated_shift(4).unwrap();
        let e1 = VectorSpec::Basis { basis: 1 }.build(&shift, 0).unwrap();
        assert_eq!(e1[5], Complex64::new(1.0, 0.0));
        let m = make_multiplication_operator(Measure::dyadic_uniform(2).unwrap());
        let one = VectorSpec::Preset { preset: Preset::ConstantOne }.build(&m, 0).unwrap();
        assert!((one.norm() - 1.0).abs() < 1e-12);
        assert!(VectorSpec::Preset { preset: Preset::ConstantOne }.build(&op, 0).is_err());
    }

    #[test]
    fn checkpoint_grids() {
        assert_eq!(CheckpointSpec::Explicit { at: vec![5, 50] }.grid(100).unwrap(), vec![5, 50, 100]);
        assert!(CheckpointSpec::Explicit { at: vec![50, 5] }.grid(100).is_err());
        let g = CheckpointSpec::default().grid(1000).unwrap();
        assert_eq!((g[0], *g.last().unwrap()), (10, 1000));
        assert!(nth_prime_upper_bound(78_498) >= 1_000_000);
        assert!(nth_prime_upper_bound(5) >= 11);
    }
}
