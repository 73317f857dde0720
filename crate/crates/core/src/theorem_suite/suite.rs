//! The full battery of checks with their negative controls.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dirichlet::check_dirichlet_norm_growth;
use super::flight::{check_flight_modulation, check_product_split};
use super::primes::{check_limit_identification, check_maximal_transfer, check_polynomial_primes, check_w1_separation};
use super::report::{CheckReport, TestSeq, Verdict};
use super::rigidity::check_rigidity_example;
use super::shift::{check_shift_modulation, check_vanishing_products, check_spike_control, seeded_bounded_sequence};
use crate::angle::Angle;
use crate::error::{Error, Result};
use crate::grid::default_grid;
use crate::mod_sequences::{make_dyadic_spike, make_von_mangoldt, Claims, KSequence, ModSeq, Phi, RigidityScheme, VonMangoldtKind};
use crate::operator_zoo::{make_random_contraction, Measure, Vector};
use crate::prime_kernel::{PolyNN, PrimeTable};

/// Smallest table horizon at which the prime checks are meaningful.
pub const MIN_PRIME_HORIZON: u64 = 100_000;

fn default_horizon() -> u64 {
    1_000_000
}

fn default_true() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    /// Prime-table horizon used by the prime checks.
    #[serde(default = "default_horizon")]
    pub horizon: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_true")]
    pub prime_checks: bool,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig { horizon: default_horizon(), seed: 0, prime_checks: true }
    }
}

type Job = Box<dyn Fn() -> Result<CheckReport> + Send + Sync>;

fn job(id: &str, f: impl Fn() -> Result<CheckReport> + Send + Sync + 'static) -> (String, Job) {
    (id.to_string(), Box::new(f))
}

/// Control report: passes when `detected` recognises the intended violation.
fn control(id: &str, outcome: Result<CheckReport>, detected: impl Fn(&Result<CheckReport>) -> bool) -> CheckReport {
    let mut r = CheckReport::new(id).control();
    match &outcome {
        Ok(inner) => {
            r.note(format!("inner verdict: {}", inner.verdict));
            r.notes.extend(inner.notes.iter().cloned());
            r.measured.extend(inner.measured.iter().map(|(k, v)| (k.clone(), *v)));
        }
        Err(e) => {
            r.note(format!("inner error: {e}"));
        }
    }
    r.assert("violation detected", detected(&outcome));
    r.conclude()
}

fn refused(o: &Result<CheckReport>) -> bool {
    matches!(o, Ok(r) if r.refused())
}

fn failed(o: &Result<CheckReport>) -> bool {
    matches!(o, Ok(r) if r.verdict == Verdict::Fail)
}

fn one() -> ModSeq {
    ModSeq::constant(Complex64::new(1.0, 0.0))
}

fn checks_without_primes(seed: u64) -> Vec<(String, Job)> {
    let mut jobs = vec![
        job("product_split/bounded", || {
            check_product_split(&one(), None, &TestSeq::new(ModSeq::reciprocal(), 1.0)?, 0.5, 100_000)
        }),
        job("product_split/k^0.125", || {
            let b = TestSeq::new(ModSeq::inverse_log(), 1.0 / 2f64.ln())?;
            check_product_split(&ModSeq::power(0.125), Some(&Phi::Power { p: 8.0 }), &b, 1.0, 1_000_000)
        }),
        job("product_split/control/non_vanishing_b", || {
            let b = TestSeq::new(one(), 1.0)?;
            Ok(control("product_split/control/non_vanishing_b", check_product_split(&one(), None, &b, 0.1, 10_000), refused))
        }),
        job("vanishing_products/bounded", || check_vanishing_products(&one(), 100_000)),
        job("vanishing_products/unbounded", || check_vanishing_products(&ModSeq::power(1.0), 10_000)),
        job("shift_modulation/constant", || check_shift_modulation(&one(), 10_002, 10_000, &default_grid(10_000))),
        job("shift_modulation/seeded", move || {
            check_shift_modulation(&seeded_bounded_sequence(10_000, seed), 10_002, 10_000, &default_grid(10_000))
        }),
        job("shift_modulation/control/dyadic_spike", || check_spike_control(16)),
        job("rigidity/2^n", || {
            let scheme = RigidityScheme::new(KSequence::Geometric { base: 2 });
            check_rigidity_example(&scheme, &Measure::dyadic_uniform(1)?, 1 << 20)
        }),
        job("rigidity/n^2", || {
            let scheme = RigidityScheme::new(KSequence::Polynomial { degree: 2 });
            check_rigidity_example(&scheme, &Measure::new(vec![(Angle::ZERO, 1.0)])?, 1_000_000)
        }),
        job("rigidity/control/all_plus", || {
            let scheme = RigidityScheme::all_plus(KSequence::Geometric { base: 2 });
            let out = check_rigidity_example(&scheme, &Measure::dyadic_uniform(1)?, 1 << 20);
            Ok(control("rigidity/control/all_plus", out, failed))
        }),
        job("dirichlet_norms/p=4", || check_dirichlet_norm_growth(4.0, 128)),
        job("dirichlet_norms/p=4/3", || check_dirichlet_norm_growth(4.0 / 3.0, 128)),
        job("dirichlet_norms/control/p=2", || {
            let out = check_dirichlet_norm_growth(2.0, 128);
            Ok(control("dirichlet_norms/control/p=2", out, |o| matches!(o, Err(Error::Domain(_)))))
        }),
    ];
    for (name, a, phi) in [("constant", one(), None), ("k^0.125", ModSeq::power(0.125), Some(Phi::Power { p: 8.0 }))] {
        jobs.push(job(&format!("flight_modulation/{name}"), move || {
            let op = Arc::new(make_random_contraction(8, seed, Some(0.9))?);
            let x = Vector::from_element(8, Complex64::new(8f64.sqrt().recip(), 0.0));
            check_flight_modulation(&a, phi.as_ref(), &op, &x, 10_000, 0.01)
        }));
    }
    jobs.push(job("flight_modulation/control/dyadic_spike", move || {
        let op = Arc::new(make_random_contraction(8, seed, Some(0.9))?);
        let x = Vector::from_element(8, Complex64::new(8f64.sqrt().recip(), 0.0));
        let out = check_flight_modulation(&make_dyadic_spike(), None, &op, &x, 10_000, 0.01);
        Ok(control("flight_modulation/control/dyadic_spike", out, refused))
    }));
    jobs
}

fn prime_checks(table: Arc<PrimeTable>, h: u64, seed: u64) -> Vec<(String, Job)> {
    let t = move || table.clone();
    let lp = {
        let t = t.clone();
        move || make_von_mangoldt(t(), VonMangoldtKind::PrimeOnly)
    };
    let r = |b, q| Angle::rational(b, q);
    let mut jobs = vec![
        job("prime_limits/five_angles", {
            let t = t.clone();
            move || {
                let angles = vec![Angle::ZERO, r(1, 2)?, r(1, 3)?, r(1, 4)?, Angle::frac_sqrt(2)];
                check_limit_identification(&angles, &Vector::from_element(5, Complex64::new(1.0, 0.0)), &t(), h)
            }
        }),
        job("prime_limits/zero_vector", {
            let t = t.clone();
            move || check_limit_identification(&[r(1, 3)?], &Vector::zeros(1), &t(), h)
        }),
        job("w1_separation/catalog", {
            let (t, lp) = (t.clone(), lp.clone());
            move || {
                let cands = vec![
                    ModSeq::constant(Complex64::new(0.0, 0.0)),
                    one(),
                    lp().clipped(2.0)?,
                    lp().clipped(3.0)?,
                ];
                check_w1_separation(&cands, &t(), h)
            }
        }),
        job("w1_separation/control/von_mangoldt", {
            let (t, lp) = (t.clone(), lp.clone());
            move || {
                let forced = lp().with_claims(Claims { w_phi: Some(Phi::Identity), ..Claims::default() });
                Ok(control("w1_separation/control/von_mangoldt", check_w1_separation(&[forced], &t(), h), failed))
            }
        }),
        job("maximal_transfer/seeded", {
            let t = t.clone();
            move || check_maximal_transfer(100, seed, &t(), h)
        }),
        job("vanishing_products/von_mangoldt", {
            let lp = lp.clone();
            move || check_vanishing_products(&lp(), h)
        }),
        job("shift_modulation/von_mangoldt", {
            let lp = lp.clone();
            move || check_shift_modulation(&lp(), 10_002, 10_000, &default_grid(10_000))
        }),
    ];
    for (q, b, deg) in [(4u64, 1u64, 2usize), (3, 1, 1), (1, 0, 1), (5, 2, 2)] {
        let t = t.clone();
        jobs.push(job(&format!("polynomial_primes/{b}/{q}/t^{deg}"), move || {
            check_polynomial_primes(q, b, &PolyNN::monomial(deg)?, &t(), h)
        }));
    }
    jobs
}

/// Names of the prime checks, reported inconclusive below [`MIN_PRIME_HORIZON`].
const PRIME_CHECK_IDS: [&str; 11] = [
    "prime_limits/five_angles",
    "prime_limits/zero_vector",
    "w1_separation/catalog",
    "w1_separation/control/von_mangoldt",
    "maximal_transfer/seeded",
    "vanishing_products/von_mangoldt",
    "shift_modulation/von_mangoldt",
    "polynomial_primes/1/4/t^2",
    "polynomial_primes/1/3/t^1",
    "polynomial_primes/0/1/t^1",
    "polynomial_primes/2/5/t^2",
];

/// Runs every check; builds the prime table when prime checks are enabled.
pub fn run_all(config: &SuiteConfig) -> Result<Vec<CheckReport>> {
    let table = if config.prime_checks && config.horizon >= MIN_PRIME_HORIZON {
        Some(Arc::new(PrimeTable::new(config.horizon)?))
    } else {
        None
    };
    run_all_with_table(config, table)
}

/// As [`run_all`], with a prebuilt table (its horizon must cover `config.horizon`).
pub fn run_all_with_table(config: &SuiteConfig, table: Option<Arc<PrimeTable>>) -> Result<Vec<CheckReport>> {
    let mut jobs = checks_without_primes(config.seed);
    let mut reports = Vec::new();
    if config.prime_checks {
        if config.horizon < MIN_PRIME_HORIZON {
            for id in PRIME_CHECK_IDS {
                let mut r = CheckReport::new(id);
                r.horizon(config.horizon);
                reports.push(r.refuse(format!("horizon {} below the minimum {MIN_PRIME_HORIZON}", config.horizon)));
            }
        } else {
            let table = match table {
                Some(t) if t.horizon() >= config.horizon => t,
                Some(t) => {
                    return Err(Error::HorizonExceeded { requested: config.horizon, horizon: t.horizon() });
                }
                None => Arc::new(PrimeTable::new(config.horizon)?),
            };
            jobs.extend(prime_checks(table, config.horizon, config.seed));
        }
    }
    reports.extend(jobs.par_iter().map(|(id, f)| {
        let mut r = f().unwrap_or_else(|e| CheckReport::from_error(id.clone(), &e));
        r.id = id.clone();
        r
    }).collect::<Vec<_>>());
    reports.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(reports)
}

/// True when every report passed; inconclusive counts as not passed.
pub fn all_pass(reports: &[CheckReport]) -> bool {
    reports.iter().all(|r| r.verdict == Verdict::Pass)
}

pub fn failing_ids(reports: &[CheckReport]) -> Vec<&str> {
    reports.iter().filter(|r| r.verdict != Verdict::Pass).map(|r| r.id.as_str()).collect()
}

/// Fixed-width pass/fail matrix.
pub fn summary_table(reports: &[CheckReport]) -> String {
    let width = reports.iter().map(|r| r.id.chars().count()).max().unwrap_or(5).max(5);
    let mut out = format!("{:<width$}  {:<12}  control\n", "check", "verdict");
    for r in reports {
        let pad = width - r.id.chars().count();
        out.push_str(&format!("{}{}  {:<12}  {}\n", r.id, " ".repeat(pad), r.verdict.to_string(), if r.control { "yes" } else { "" }));
    }
    let passed = reports.iter().filter(|r| r.verdict == Verdict::Pass).count();
    out.push_str(&format!("{passed}/{} passed\n", reports.len()));
    out
}
