//! The `modavg` command line.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};

use super::run::{output_paths, run_experiment, write_atomic};
use super::spec::{CheckpointSpec, ExperimentSpec};
use super::tables::{TableSource, TABLE_CACHE_ENV};
use crate::error::{Error, Result};
use crate::grid::geometric_grid;
use crate::mod_sequences::{stats_scan, ModSeq, SeqSpec};
use crate::theorem_suite::{all_pass, failing_ids, run_all_with_table, summary_table, SuiteConfig};

/// Exit status for a run that did not reach a definitive classification.
pub const EXIT_INCONCLUSIVE: i32 = 2;
/// Exit status when some suite checks fail.
pub const EXIT_SUITE_FAILURE: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "modavg", version, about = "Modulated and prime-indexed ergodic averages")]
struct Cli {
    /// Directory for cached prime tables.
    #[arg(long, global = true, env = TABLE_CACHE_ENV)]
    table_cache: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Sieve up to H and print π(H) and θ(H)/H.
    Sieve {
        #[arg(long)]
        horizon: u64,
    },
    /// Run an experiment spec, writing a trace CSV and a report JSON.
    Run {
        spec: PathBuf,
        /// Output directory (default: the current directory).
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Run the check suite and print its pass/fail matrix.
    Verify {
        /// Suite config JSON; defaults apply when omitted.
        config: Option<PathBuf>,
        #[arg(long)]
        horizon: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        /// Also write every check report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summability statistics of a sequence, as CSV.
    SeqStats {
        /// Sequence JSON (`{"generator": ..., "params": ...}`), inline or as a file path.
        sequence: String,
        #[arg(long)]
        horizon: u64,
        #[arg(long, default_value_t = 1.3)]
        checkpoint_ratio: f64,
        /// CSV destination (default: stdout).
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct Overrides {
    #[arg(long)]
    horizon: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    checkpoint_ratio: Option<f64>,
    #[arg(long)]
    tol: Option<f64>,
}

impl Overrides {
    fn apply(&self, spec: &mut ExperimentSpec) {
        if let Some(h) = self.horizon {
            spec.horizon = h;
        }
        if self.seed.is_some() {
            spec.seed = self.seed;
        }
        if let Some(ratio) = self.checkpoint_ratio {
            let start = match spec.checkpoints {
                CheckpointSpec::Geometric { start, .. } => start,
                CheckpointSpec::Explicit { .. } => 10,
            };
            spec.checkpoints = CheckpointSpec::Geometric { start, ratio };
        }
        if self.tol.is_some() {
            spec.tol = self.tol;
        }
    }
}

/// Runs the CLI on `args` (program name first) against the process streams.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    main_with_io(args, &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}

/// Like [`main_with_args`] with explicit output streams.
pub fn main_with_io<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let tables = TableSource::with_cache_dir(cli.table_cache);
    match dispatch(cli.command, &tables, out) {
        Ok((code, message)) => {
            if let Some(m) = message {
                let _ = writeln!(err, "{m}");
            }
            code
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

type Outcome = (i32, Option<String>);

fn dispatch(command: Command, tables: &TableSource, out: &mut dyn Write) -> Result<Outcome> {
    match command {
        Command::Sieve { horizon } => {
            let t = tables.get(horizon)?;
            writeln!(out, "H = {horizon}")?;
            writeln!(out, "pi(H) = {}", t.prime_count(horizon)?)?;
            writeln!(out, "theta(H)/H = {:.6}", t.theta(horizon)? / horizon as f64)?;
            Ok((0, None))
        }
        Command::Run { spec, out: dir, overrides } => {
            let mut s = ExperimentSpec::load(&spec)?;
            overrides.apply(&mut s);
            let base = spec.parent().unwrap_or(Path::new("."));
            let result = run_experiment(&s, base, tables)?;
            let stem = spec.file_stem().map(|x| x.to_string_lossy().into_owned()).unwrap_or_else(|| "run".into());
            let (trace_path, report_path) = output_paths(&s, &stem, dir.as_deref().unwrap_or(Path::new(".")));
            write_atomic(&trace_path, &result.trace_csv()?)?;
            write_atomic(&report_path, &result.report_json()?)?;
            let c = &result.report.convergence;
            writeln!(out, "status: {}", serde_json::to_string(&c.status)?)?;
            writeln!(out, "trace: {}", trace_path.display())?;
            writeln!(out, "report: {}", report_path.display())?;
            let code = result.exit_code();
            Ok((code, (code != 0).then(|| "inconclusive: no definitive classification at this horizon".into())))
        }
        Command::Verify { config, horizon, seed, out: report_out } => {
            let mut cfg = match &config {
                Some(p) => parse_config(p)?,
                None => SuiteConfig::default(),
            };
            if let Some(h) = horizon {
                cfg.horizon = h;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let table = if cfg.prime_checks { Some(tables.get(cfg.horizon.max(2))?) } else { None };
            let reports = run_all_with_table(&cfg, table)?;
            write!(out, "{}", summary_table(&reports))?;
            if let Some(p) = report_out {
                let mut buf = serde_json::to_vec_pretty(&reports)?;
                buf.push(b'\n');
                write_atomic(&p, &buf)?;
            }
            if all_pass(&reports) {
                Ok((0, None))
            } else {
                Ok((EXIT_SUITE_FAILURE, Some(format!("failing checks: {}", failing_ids(&reports).join(", ")))))
            }
        }
        Command::SeqStats { sequence, horizon, checkpoint_ratio, out: csv_out } => {
            let text = if sequence.trim_start().starts_with('{') {
                sequence.clone()
            } else {
                std::fs::read_to_string(&sequence)?
            };
            let de = &mut serde_json::Deserializer::from_str(&text);
            let spec: SeqSpec = serde_path_to_error::deserialize(de)
                .map_err(|e| Error::Spec { path: format!("sequence: {}", e.path()), message: e.inner().to_string() })?;
            let table = if needs_table(&spec) { Some(tables.get(horizon.max(2))?) } else { None };
            let seq = ModSeq::from_spec(&spec, table.as_ref().map(Arc::clone).as_ref())?;
            let grid = geometric_grid(10.min(horizon), checkpoint_ratio, horizon)?;
            let stats = stats_scan(&seq, horizon, &grid)?;
            match csv_out {
                Some(p) => {
                    let mut buf = Vec::new();
                    stats.write_csv(&mut buf)?;
                    write_atomic(&p, &buf)?;
                }
                None => stats.write_csv(&mut *out)?,
            }
            Ok((0, None))
        }
    }
}

fn needs_table(s: &SeqSpec) -> bool {
    match s {
        SeqSpec::VonMangoldt { .. } => true,
        SeqSpec::Clipped { inner, .. } | SeqSpec::SlowDecay { base: inner, .. } => needs_table(inner),
        _ => false,
    }
}

fn parse_config(path: &Path) -> Result<SuiteConfig> {
    let text = std::fs::read_to_string(path)?;
    let de = &mut serde_json::Deserializer::from_str(&text);
    serde_path_to_error::deserialize(de).map_err(|e| Error::Spec {
        path: format!("{}: {}", path.display(), e.path()),
        message: e.inner().to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, String, String) {
        let (mut o, mut e) = (Vec::new(), Vec::new());
        let code = main_with_io(std::iter::once("modavg").chain(args.iter().copied()), &mut o, &mut e);
        (code, String::from_utf8(o).unwrap(), String::from_utf8(e).unwrap())
    }

    #[test]
    fn sieve_prints_counts() {
        let (code, out, _) = run(&["sieve", "--horizon", "100"]);
        assert_eq!(code, 0);
        assert!(out.contains("pi(H) = 25"), "{out}");
        let (code, _, err) = run(&["sieve", "--horizon", "1"]);
        assert_eq!(code, 1);
        assert!(err.starts_with("error:"));
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(&["frobnicate"]).0, 1);
        assert_eq!(run(&["--help"]).0, 0);
    }

    #[test]
    fn seq_stats_inline() {
        let (code, out, err) = run(&["seq-stats", r#"{"generator": "dyadic_spike"}"#, "--horizon", "1024"]);
        assert_eq!(code, 0, "{err}");
        assert!(out.starts_with("n,abs_mean,sq_mean,max_over_n\n"));
        assert!(out.lines().last().unwrap().starts_with("1024,"));
        let (code, _, err) = run(&["seq-stats", r#"{"generator": "nope"}"#, "--horizon", "10"]);
        assert_eq!(code, 1);
        assert!(err.contains("sequence"), "{err}");
    }

    #[test]
    fn verify_reduced_and_corrupt_configs() {
        let dir = tempfile::tempdir().unwrap();
        let good = dir.path().join("suite.json");
        std::fs::write(&good, r#"{"horizon": 1000, "prime_checks": false}"#).unwrap();
        let (code, out, err) = run(&["verify", good.to_str().unwrap()]);
        assert_eq!(code, 0, "{out}{err}");
        assert!(out.contains("passed"));
        let bad = dir.path().join("bad.json");
        std::fs::write(&bad, r#"{"horizon": "lots"}"#).unwrap();
        let (code, _, err) = run(&["verify", bad.to_str().unwrap()]);
        assert_eq!(code, 1);
        assert!(err.contains("horizon"), "{err}");
    }

    #[test]
    fn run_writes_outputs_and_honours_overrides() {
        let dir = tempfile::tempdir().unwrap();
        let spec = dir.path().join("half.json");
        std::fs::write(
            &spec,
            r#"{"operator": {"kind": "diagonal_unitary", "params": {"angles": ["1/2"]}},
                "vector": {"coords": [1]}, "scheme": {"kind": "cesaro"}, "horizon": 100000}"#,
        )
        .unwrap();
        let out_dir = dir.path().join("out");
        let (code, _, err) = run(&["run", spec.to_str().unwrap(), "--out", out_dir.to_str().unwrap(), "--horizon", "5000"]);
        assert_eq!(code, 0, "{err}");
        let report: serde_json::Value =
            serde_json::from_slice(&std::fs::read(out_dir.join("half.report.json")).unwrap()).unwrap();
        assert_eq!(report["horizon"], 5000);
        assert!(out_dir.join("half.trace.csv").exists());
    }
}
