use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mod_sequences::ModSeq;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Outcome of one check. `verdict` is `Pass` exactly when every inequality
/// recorded in `conditions` held.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub id: String,
    pub horizons: Vec<u64>,
    pub measured: BTreeMap<String, f64>,
    pub bounds: BTreeMap<String, f64>,
    /// Named assertions and whether each held.
    pub conditions: BTreeMap<String, bool>,
    pub verdict: Verdict,
    /// Negative controls pass when the violation they were built to trigger is detected.
    pub control: bool,
    pub notes: Vec<String>,
}

impl CheckReport {
    pub fn new(id: impl Into<String>) -> Self {
        CheckReport {
            id: id.into(),
            horizons: Vec::new(),
            measured: BTreeMap::new(),
            bounds: BTreeMap::new(),
            conditions: BTreeMap::new(),
            verdict: Verdict::Inconclusive,
            control: false,
            notes: Vec::new(),
        }
    }

    pub fn control(mut self) -> Self {
        self.control = true;
        self
    }

    pub fn horizon(&mut self, h: u64) -> &mut Self {
        if !self.horizons.contains(&h) {
            self.horizons.push(h);
        }
        self
    }

    pub fn measure(&mut self, name: impl Into<String>, value: f64) -> &mut Self {
        self.measured.insert(name.into(), value);
        self
    }

    pub fn measure_complex(&mut self, name: &str, z: Complex64) -> &mut Self {
        self.measured.insert(format!("{name}.re"), z.re);
        self.measured.insert(format!("{name}.im"), z.im);
        self
    }

    pub fn bound(&mut self, name: impl Into<String>, value: f64) -> &mut Self {
        self.bounds.insert(name.into(), value);
        self
    }

    pub fn assert(&mut self, name: impl Into<String>, held: bool) -> &mut Self {
        let name = name.into();
        let prev = self.conditions.get(&name).copied().unwrap_or(true);
        self.conditions.insert(name, prev && held);
        self
    }

    pub fn note(&mut self, text: impl Into<String>) -> &mut Self {
        self.notes.push(text.into());
        self
    }

    /// Verdict from the recorded conditions.
    pub fn conclude(mut self) -> Self {
        self.verdict = if self.conditions.is_empty() {
            Verdict::Inconclusive
        } else if self.conditions.values().all(|&ok| ok) {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        self
    }

    /// Verdict `Inconclusive` with the reason recorded.
    pub fn refuse(mut self, reason: impl Into<String>) -> Self {
        self.notes.push(format!("refused: {}", reason.into()));
        self.verdict = Verdict::Inconclusive;
        self
    }

    pub fn refused(&self) -> bool {
        self.verdict == Verdict::Inconclusive && self.notes.iter().any(|n| n.starts_with("refused"))
    }

    /// Report for a check that could not run.
    pub fn from_error(id: impl Into<String>, err: &Error) -> Self {
        let mut r = CheckReport::new(id);
        r.note(format!("error: {err}"));
        r.verdict = Verdict::Fail;
        r
    }

    pub fn failing_conditions(&self) -> Vec<&str> {
        self.conditions.iter().filter(|(_, ok)| !**ok).map(|(k, _)| k.as_str()).collect()
    }
}

/// Bounded test sequence `(b_k)` with `|b_k| <= bound`.
#[derive(Clone, Debug)]
pub struct TestSeq {
    pub seq: ModSeq,
    pub bound: f64,
}

impl TestSeq {
    pub fn new(seq: ModSeq, bound: f64) -> Result<Self> {
        if !(bound >= 0.0 && bound.is_finite()) {
            return Err(Error::Invalid(format!("bound {bound} must be finite and non-negative")));
        }
        Ok(TestSeq { seq, bound })
    }

    /// Checks `|b_k| <= bound` for `k <= horizon`.
    pub fn verify(&self, horizon: u64) -> Result<bool> {
        self.seq.check_horizon(horizon)?;
        Ok((1..=horizon).all(|k| self.seq.value_unchecked(k).norm() <= self.bound * (1.0 + 1e-12)))
    }
}

/// Monotone-trend test used for asymptotic statements: each value is at most
/// `(1 + wobble)` times the previous one and the last is below the first.
pub fn trend_down(values: &[f64], wobble: f64) -> bool {
    values.len() >= 2
        && values.windows(2).all(|w| w[1] <= w[0] * (1.0 + wobble) + f64::MIN_POSITIVE)
        && values[values.len() - 1] < values[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn verdict_follows_conditions() {
        let mut r = CheckReport::new("x");
        r.assert("a", true).assert("b", true);
        assert_eq!(r.clone().conclude().verdict, Verdict::Pass);
        r.assert("a", false).assert("a", true);
        let r = r.conclude();
        assert_eq!(r.verdict, Verdict::Fail);
        assert_eq!(r.failing_conditions(), vec!["a"]);
        assert_eq!(CheckReport::new("y").conclude().verdict, Verdict::Inconclusive);
        assert!(CheckReport::new("z").refuse("no witness").refused());
    }

    #[test]
    fn trend() {
        assert!(trend_down(&[3.0, 2.0, 2.01, 1.0], 0.01));
        assert!(!trend_down(&[3.0, 2.0, 2.5, 1.0], 0.01));
        assert!(!trend_down(&[1.0, 1.0], 0.01));
        assert!(!trend_down(&[1.0], 0.01));
    }

    #[test]
    fn test_seq_bound() {
        let b = TestSeq::new(ModSeq::inverse_log(), 1.0 / 2f64.ln()).unwrap();
        assert!(b.verify(1000).unwrap());
        let b = TestSeq::new(ModSeq::power(0.5), 10.0).unwrap();
        assert!(!b.verify(1000).unwrap());
    }
}
