//! The two counterexample constructions: sign-switched rigidity sequences and
//! slowly decaying sequences aligned against a given one.

use serde::{Deserialize, Serialize};

use super::seq::{rigidity_seq, slow_decay_seq, ModSeq};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KSequence {
    /// `k_n = base^n`
    Geometric { base: u64 },
    /// `k_n = n^degree`; consecutive ratios tend to 1.
    Polynomial { degree: u32 },
    Explicit { values: Vec<u64> },
}

fn default_delta() -> f64 {
    0.1
}

fn default_policy() -> bool {
    true
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RigidityScheme {
    pub k_sequence: KSequence,
    /// Half-width of the target band around ±1.
    #[serde(default = "default_delta")]
    pub delta: f64,
    /// When false every sign is +1.
    #[serde(default = "default_policy")]
    pub sign_policy: bool,
}

impl RigidityScheme {
    pub fn new(k_sequence: KSequence) -> Self {
        RigidityScheme { k_sequence, delta: default_delta(), sign_policy: true }
    }

    pub fn all_plus(k_sequence: KSequence) -> Self {
        RigidityScheme { k_sequence, delta: default_delta(), sign_policy: false }
    }

    /// `k_1 < k_2 < …` up to `horizon` (with `k_0 = 0` implied).
    pub fn ks_up_to(&self, horizon: u64) -> Result<Vec<u64>> {
        let ks: Vec<u64> = match &self.k_sequence {
            KSequence::Geometric { base } => {
                if *base < 2 {
                    return Err(Error::InvalidScheme(format!("geometric base {base} < 2")));
                }
                std::iter::successors(Some(*base), |k| k.checked_mul(*base))
                    .take_while(|&k| k <= horizon)
                    .collect()
            }
            KSequence::Polynomial { degree } => {
                if *degree < 1 {
                    return Err(Error::InvalidScheme("polynomial degree must be >= 1".into()));
                }
                (1u64..)
                    .map_while(|n| n.checked_pow(*degree))
                    .take_while(|&k| k <= horizon)
                    .collect()
            }
            KSequence::Explicit { values } => {
                values.iter().copied().take_while(|&k| k <= horizon).collect()
            }
        };
        if ks.first() == Some(&0) || ks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidScheme(
                "k-sequence must be strictly increasing positive integers".into(),
            ));
        }
        Ok(ks)
    }
}

/// Signs chosen by the greedy policy together with the trace that drove them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RigiditySchedule {
    pub ks: Vec<u64>,
    pub signs: Vec<i8>,
    /// `μ̂`-weighted Cesàro average `(1/k_l) Σ_{m ≤ l} (k_m − k_{m−1}) s_m μ̂(k_m)`.
    pub averages: Vec<f64>,
    /// Indices `l` at which the average was inside the target band and the target flipped.
    pub band_entries: Vec<usize>,
    pub delta: f64,
}

impl RigiditySchedule {
    pub fn value(&self, k: u64) -> f64 {
        match self.ks.binary_search(&k) {
            Ok(l) => {
                let prev = if l == 0 { 0 } else { self.ks[l - 1] };
                (k - prev) as f64 * self.signs[l] as f64
            }
            Err(_) => 0.0,
        }
    }
}

/// `|a_{k_l}| = k_l − k_{l−1}`, zero off the k-sequence. Signs hold the
/// current target until the `μ̂`-weighted average of the sign-expanded step
/// sequence enters `[target − δ, target + δ]`, then the target flips.
pub fn make_rigidity_counterexample(scheme: &RigidityScheme, horizon: u64, mu_hat: &[f64]) -> Result<ModSeq> {
    if !(scheme.delta > 0.0 && scheme.delta < 1.0) {
        return Err(Error::InvalidScheme(format!("band δ = {} must lie in (0, 1)", scheme.delta)));
    }
    let ks = scheme.ks_up_to(horizon)?;
    if mu_hat.len() < ks.len() {
        return Err(Error::Invalid(format!(
            "μ̂ supplied for {} terms, the scheme has {} up to {horizon}",
            mu_hat.len(),
            ks.len()
        )));
    }
    if mu_hat.iter().any(|m| !(0.0..=1.0).contains(m)) {
        return Err(Error::Invalid("μ̂ proxies must lie in [0, 1]".into()));
    }
    let mut signs = Vec::with_capacity(ks.len());
    let mut averages = Vec::with_capacity(ks.len());
    let mut band_entries = Vec::new();
    let mut target = 1i8;
    let mut weighted = 0.0;
    let mut prev = 0u64;
    for (l, &k) in ks.iter().enumerate() {
        let s = if scheme.sign_policy { target } else { 1 };
        weighted += (k - prev) as f64 * s as f64 * mu_hat[l];
        let avg = weighted / k as f64;
        signs.push(s);
        averages.push(avg);
        if scheme.sign_policy && (avg - target as f64).abs() <= scheme.delta {
            band_entries.push(l);
            target = -target;
        }
        prev = k;
    }
    Ok(rigidity_seq(RigiditySchedule { ks, signs, averages, band_entries, delta: scheme.delta }))
}

/// `|b_n| = 1/√j` on `[n_j, n_{j+1})` (and `1` before `n_1`) with
/// `arg b_n = −arg a_n`, so that `a_n b_n = |a_n b_n|`.
pub fn adversarial_slow_decay(a: &ModSeq, blocks: &[u64]) -> Result<ModSeq> {
    if blocks.is_empty() {
        return Err(Error::Invalid("slow decay needs at least one block".into()));
    }
    if blocks[0] == 0 || blocks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Invalid("blocks must be strictly increasing positive integers".into()));
    }
    Ok(slow_decay_seq(a, blocks.to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;
    use proptest::prelude::*;

    fn cesaro_at_ks(seq: &ModSeq, ks: &[u64]) -> Vec<f64> {
        let mut s = 0.0;
        let mut out = Vec::new();
        let mut next = 0;
        for k in 1..=*ks.last().unwrap() {
            s += seq.value(k).unwrap().re;
            if k == ks[next] {
                out.push(s / k as f64);
                next += 1;
            }
        }
        out
    }

    #[test]
    fn dyadic_oscillation_to_two_pow_twenty() {
        let scheme = RigidityScheme::new(KSequence::Geometric { base: 2 });
        let h = 1 << 20;
        let seq = make_rigidity_counterexample(&scheme, h, &[1.0; 20]).unwrap();
        let sched = seq.rigidity_schedule().unwrap();
        assert_eq!(sched.ks.len(), 20);
        let avgs = cesaro_at_ks(&seq, &sched.ks);
        for (a, b) in avgs.iter().zip(&sched.averages) {
            assert!((a - b).abs() < 1e-12);
        }
        // hand simulation of the greedy rule: (A_{n-1} + s_n)/2
        let mut a: f64 = 0.0;
        let mut target = 1.0;
        for (n, &avg) in avgs.iter().enumerate() {
            a = if n == 0 { target } else { (a + target) / 2.0 };
            assert!((a - avg).abs() < 1e-12);
            if (a - target).abs() <= 0.1 {
                target = -target;
            }
        }
        assert!(avgs.iter().filter(|&&v| v >= 0.8).count() >= 3);
        assert!(avgs.iter().filter(|&&v| v <= -0.8).count() >= 3);
    }

    #[test]
    fn abs_averages_equal_one_at_ks() {
        let scheme = RigidityScheme::new(KSequence::Geometric { base: 3 });
        let seq = make_rigidity_counterexample(&scheme, 3u64.pow(12), &[1.0; 12]).unwrap();
        let ks = seq.rigidity_schedule().unwrap().ks.clone();
        let mut s = 0.0;
        for k in 1..=*ks.last().unwrap() {
            s += seq.value(k).unwrap().norm();
            assert!(s / k as f64 <= 1.0 + 1e-12);
            if ks.contains(&k) {
                assert!((s / k as f64 - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn all_plus_is_constant_one() {
        let scheme = RigidityScheme::all_plus(KSequence::Geometric { base: 2 });
        let seq = make_rigidity_counterexample(&scheme, 1 << 12, &[1.0; 12]).unwrap();
        let sched = seq.rigidity_schedule().unwrap();
        assert!(sched.signs.iter().all(|&s| s == 1));
        assert!(sched.averages.iter().all(|&a| (a - 1.0).abs() < 1e-15));
        assert!(sched.band_entries.is_empty());
    }

    #[test]
    fn scheme_errors() {
        let bad = RigidityScheme::new(KSequence::Explicit { values: vec![1, 3, 3] });
        assert!(matches!(bad.ks_up_to(10), Err(Error::InvalidScheme(_))));
        let ok = RigidityScheme::new(KSequence::Polynomial { degree: 2 });
        assert_eq!(ok.ks_up_to(30).unwrap(), vec![1, 4, 9, 16, 25]);
        assert!(make_rigidity_counterexample(&ok, 30, &[1.0; 3]).is_err());
    }

    #[test]
    fn slow_decay_opposes_phase() {
        let a = ModSeq::constant(Complex64::new(2.0, 0.0));
        let b = adversarial_slow_decay(&a, &[1, 4, 9]).unwrap();
        assert_eq!(b.value(1).unwrap(), Complex64::new(1.0, 0.0));
        assert!((b.value(5).unwrap().re - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        let rot = ModSeq::constant(Complex64::new(0.0, 3.0));
        let c = adversarial_slow_decay(&rot, &[1]).unwrap();
        let prod = rot.value(7).unwrap() * c.value(7).unwrap();
        assert!(prod.im.abs() < 1e-15 && prod.re > 0.0);
        assert!(adversarial_slow_decay(&a, &[]).is_err());
        assert!(adversarial_slow_decay(&a, &[3, 2]).is_err());
    }

    #[test]
    fn slow_decay_exceeds_root_j() {
        // a_k = k has (1/n) Σ a_k = (n+1)/2 > j once n >= 2j
        let a = ModSeq::power(1.0);
        let blocks: Vec<u64> = (1..=30).map(|j| 2 * j).collect();
        let b = adversarial_slow_decay(&a, &blocks).unwrap();
        let mut s = Complex64::new(0.0, 0.0);
        let mut abs = 0.0;
        let mut next = 0;
        for k in 1..=60u64 {
            let t = a.value(k).unwrap() * b.value(k).unwrap();
            s += t;
            abs += t.norm();
            if k == blocks[next] {
                let j = (next + 1) as f64;
                assert!((s.norm() - abs).abs() < 1e-9);
                assert!(s.norm() / k as f64 > j.sqrt());
                next += 1;
                if next == blocks.len() {
                    break;
                }
            }
        }
        let mut last = f64::INFINITY;
        for k in 1..=100 {
            let m = b.value(k).unwrap().norm();
            assert!(m <= last * (1.0 + 1e-15));
            last = m;
        }
    }

    proptest! {
        #[test]
        fn greedy_flips_only_inside_band(base in 2u64..5, delta in 0.05f64..0.5) {
            let mut scheme = RigidityScheme::new(KSequence::Geometric { base });
            scheme.delta = delta;
            let h = 1u64 << 40;
            let n = scheme.ks_up_to(h).unwrap().len();
            let seq = make_rigidity_counterexample(&scheme, h, &vec![1.0; n]).unwrap();
            let s = seq.rigidity_schedule().unwrap();
            // sign changes happen right after a band entry and nowhere else
            for l in 1..s.signs.len() {
                if s.signs[l] != s.signs[l - 1] {
                    prop_assert!(s.band_entries.contains(&(l - 1)));
                    let target = s.signs[l - 1] as f64;
                    prop_assert!((s.averages[l - 1] - target).abs() <= delta);
                }
            }
            prop_assert!(s.band_entries.len() <= s.ks.len());
        }
    }
}
