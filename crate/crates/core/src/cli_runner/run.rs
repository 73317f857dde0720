//! Executes an [`ExperimentSpec`] and writes its trace and report.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::spec::{ExperimentSpec, DEFAULT_TRACE_DIM};
use super::tables::TableSource;
use crate::average_engines::{
    detect_convergence, engine_new, predict_for, ConvergenceParams, ConvergenceReport, Trace,
};
use crate::error::{Error, Result};
use crate::operator_zoo::PowerBound;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinalState {
    pub index: u64,
    pub denominator: u64,
    pub norm: f64,
    /// Present when the dimension is at most 64.
    pub average: Option<Vec<Complex64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub limit: Option<Vec<Complex64>>,
    /// `max_i |average_i − limit_i|` at the final checkpoint.
    pub deviation: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub spec_sha256: String,
    pub seed: u64,
    pub table_horizon: Option<u64>,
    pub operator: String,
    pub dim: usize,
    pub scheme: String,
    pub horizon: u64,
    pub checkpoints: usize,
    pub power_bound: PowerBound,
    pub orbit_applies: u128,
    #[serde(rename = "final")]
    pub final_state: FinalState,
    pub convergence: ConvergenceReport,
    pub prediction: Prediction,
}

pub struct RunOutput {
    pub report: RunReport,
    pub trace: Trace,
    pub coords: Vec<usize>,
}

impl RunOutput {
    pub fn trace_csv(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        self.trace.write_csv(&mut buf, &self.coords)?;
        Ok(buf)
    }

    pub fn report_json(&self) -> Result<Vec<u8>> {
        let mut buf = serde_json::to_vec_pretty(&self.report)?;
        buf.push(b'\n');
        Ok(buf)
    }

    /// Exit status: 0 for a definitive classification, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.report.convergence.is_definitive() {
            0
        } else {
            2
        }
    }
}

/// Runs the experiment; `base` resolves relative paths inside the spec.
pub fn run_experiment(spec: &ExperimentSpec, base: &Path, tables: &TableSource) -> Result<RunOutput> {
    let seed = spec.effective_seed();
    let mut op_spec = spec.operator.clone();
    op_spec.seed = seed;
    let op = Arc::new(op_spec.build(base)?);
    let x = spec.vector.build(&op, seed)?;
    let table = match spec.needed_table_horizon() {
        Some(h) => Some(tables.get(h)?),
        None => None,
    };
    let scheme = spec.scheme.build(table.as_ref())?;
    let grid = spec.checkpoints.grid(spec.horizon)?;
    let tol = spec.tol.unwrap_or(ConvergenceParams::default().tol);
    if !(tol > 0.0) {
        return Err(Error::Invalid(format!("tolerance {tol} must be positive")));
    }
    let power_bound = op.power_bound()?;

    let mut engine = engine_new(scheme.clone(), op.clone(), x.clone(), table.clone())?;
    engine.set_grid(grid)?;
    engine.run_to(spec.horizon)?;
    let avg = engine.average();
    let convergence = detect_convergence(engine.trace(), &ConvergenceParams::with_tol(tol));
    let limit = predict_for(&op, &scheme, &x)?;
    let deviation = limit.as_ref().map(|l| avg.iter().zip(l.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max));

    let dim = op.dim();
    let coords = match &spec.outputs.coords {
        Some(c) => {
            if let Some(&bad) = c.iter().find(|&&i| i >= dim) {
                return Err(Error::Invalid(format!("trace coordinate {bad} outside 0..{dim}")));
            }
            c.clone()
        }
        None if dim <= DEFAULT_TRACE_DIM => (0..dim).collect(),
        None => Vec::new(),
    };
    let last = engine.trace().last().expect("run_to records a checkpoint");
    let report = RunReport {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        spec_sha256: spec.hash(),
        seed,
        table_horizon: table.as_ref().map(|t| t.horizon()),
        operator: op.kind_name().into(),
        dim,
        scheme: scheme.name(),
        horizon: spec.horizon,
        checkpoints: engine.trace().checkpoints.len(),
        power_bound,
        orbit_applies: engine.orbit_applies(),
        final_state: FinalState {
            index: last.index,
            denominator: last.denominator,
            norm: last.norm,
            average: (dim <= DEFAULT_TRACE_DIM).then(|| last.average.clone()),
        },
        convergence,
        prediction: Prediction {
            limit: limit.filter(|_| dim <= DEFAULT_TRACE_DIM).map(|l| l.iter().copied().collect()),
            deviation,
        },
    };
    Ok(RunOutput { report, trace: engine.into_trace(), coords })
}

/// Writes `bytes` to `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir)?;
    let name = path.file_name().ok_or_else(|| Error::Invalid(format!("{} is not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.{}.tmp", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    Ok(result?)
}

/// Output paths: the spec's, else `<stem>.trace.csv` / `<stem>.report.json`, under `out_dir`.
pub fn output_paths(spec: &ExperimentSpec, stem: &str, out_dir: &Path) -> (PathBuf, PathBuf) {
    let trace = spec.outputs.trace.clone().unwrap_or_else(|| format!("{stem}.trace.csv").into());
    let report = spec.outputs.report.clone().unwrap_or_else(|| format!("{stem}.report.json").into());
    (out_dir.join(trace), out_dir.join(report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::average_engines::ConvergenceStatus;

    fn spec(text: &str) -> ExperimentSpec {
        ExperimentSpec::from_json(text, "test").unwrap()
    }

    #[test]
    fn prime_average_of_half_turn() {
        let s = spec(
            r#"{"operator": {"kind": "diagonal_unitary", "params": {"angles": ["1/2"]}},
                "vector": {"coords": [1]}, "scheme": {"kind": "prime"}, "horizon": 100000}"#,
        );
        let out = run_experiment(&s, Path::new("."), &TableSource::in_memory()).unwrap();
        let ConvergenceStatus::Converged { limit, .. } = &out.report.convergence.status else { panic!() };
        assert!((limit[0].re + 1.0).abs() < 1e-3);
        assert_eq!(out.report.prediction.limit.as_ref().unwrap()[0], Complex64::new(-1.0, 0.0));
        assert_eq!(out.report.table_horizon, Some(100_000));
        assert_eq!(out.exit_code(), 0);
        let csv = String::from_utf8(out.trace_csv().unwrap()).unwrap();
        assert!(csv.starts_with("N,re_0,im_0,norm\n"));
    }

    #[test]
    fn horizon_beyond_table_is_an_error() {
        let s = spec(
            r#"{"operator": {"kind": "diagonal_unitary", "params": {"angles": ["1/2"]}},
                "vector": {"coords": [1]}, "scheme": {"kind": "prime"}, "horizon": 2000, "table_horizon": 1000}"#,
        );
        let err = run_experiment(&s, Path::new("."), &TableSource::in_memory()).err().unwrap();
        assert!(matches!(err, Error::HorizonExceeded { .. }), "{err}");
    }

    #[test]
    fn rotation_cesaro_converges_to_zero_and_reruns_identically() {
        let text = r#"{"operator": {"kind": "random_contraction", "params": {"dim": 4, "spectral_radius_cap": 0.9}},
                "vector": {"preset": "random"}, "scheme": {"kind": "cesaro"}, "horizon": 5000, "seed": 11}"#;
        let a = run_experiment(&spec(text), Path::new("."), &TableSource::in_memory()).unwrap();
        let b = run_experiment(&spec(text), Path::new("."), &TableSource::in_memory()).unwrap();
        assert_eq!(a.trace_csv().unwrap(), b.trace_csv().unwrap());
        assert_eq!(a.report_json().unwrap(), b.report_json().unwrap());
        assert!(a.report.final_state.norm < 0.01);
        assert_eq!(a.report.seed, 11);
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("sub/out.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
