use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::phi::Phi;
use super::rigidity::{RigiditySchedule, RigidityScheme};
use crate::angle::Angle;
use crate::error::{Error, Result};
use crate::prime_kernel::PrimeTable;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VonMangoldtKind {
    /// `Λ`
    Full,
    /// `Λ'`
    PrimeOnly,
}

/// Properties a generator claims. Consumers test them; they never trust them.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Claims {
    pub hartman: bool,
    pub bounded_w1: bool,
    pub o_of_n: bool,
    pub w_phi: Option<Phi>,
}

/// Declarative form of a sequence, serialised as `{generator, params}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", content = "params", rename_all = "snake_case")]
pub enum SeqSpec {
    Zero,
    Constant { re: f64, im: f64 },
    Exponential { angle: Angle },
    VonMangoldt { kind: VonMangoldtKind },
    DyadicSpike,
    /// `k^exponent`
    Power { exponent: f64 },
    /// `1/k`
    Reciprocal,
    /// `1/log(k+1)`
    InverseLog,
    /// Modulus clipped at `cap`, phase kept.
    Clipped { inner: Box<SeqSpec>, cap: f64 },
    Explicit { values: Vec<(f64, f64)> },
    /// Rigidity counterexample built against `μ̂ ≡ mu_hat` on the scheme.
    Rigidity { scheme: RigidityScheme, horizon: u64, mu_hat: f64 },
    SlowDecay { base: Box<SeqSpec>, blocks: Vec<u64> },
}

#[derive(Clone, Debug)]
enum Gen {
    Constant(Complex64),
    Exponential(Angle),
    VonMangoldt(Arc<PrimeTable>, VonMangoldtKind),
    DyadicSpike,
    Power(f64),
    Reciprocal,
    InverseLog,
    Clipped(Box<ModSeq>, f64),
    Explicit(Vec<Complex64>),
    Rigidity(RigiditySchedule),
    SlowDecay(Box<ModSeq>, Vec<u64>),
}

/// A deterministic complex sequence `a_1, a_2, …`.
#[derive(Clone, Debug)]
pub struct ModSeq {
    gen: Gen,
    name: String,
    claims: Claims,
}

impl ModSeq {
    pub fn from_spec(spec: &SeqSpec, table: Option<&Arc<PrimeTable>>) -> Result<ModSeq> {
        Ok(match spec {
            SeqSpec::Zero => ModSeq::constant(Complex64::new(0.0, 0.0)),
            SeqSpec::Constant { re, im } => ModSeq::constant(Complex64::new(*re, *im)),
            SeqSpec::Exponential { angle } => make_exponential(*angle),
            SeqSpec::VonMangoldt { kind } => {
                let table = table.ok_or(Error::MissingTable("von_mangoldt"))?;
                make_von_mangoldt(table.clone(), *kind)
            }
            SeqSpec::DyadicSpike => make_dyadic_spike(),
            SeqSpec::Power { exponent } => ModSeq::power(*exponent),
            SeqSpec::Reciprocal => ModSeq::reciprocal(),
            SeqSpec::InverseLog => ModSeq::inverse_log(),
            SeqSpec::Clipped { inner, cap } => ModSeq::from_spec(inner, table)?.clipped(*cap)?,
            SeqSpec::Explicit { values } => {
                ModSeq::explicit(values.iter().map(|&(re, im)| Complex64::new(re, im)).collect())
            }
            SeqSpec::Rigidity { scheme, horizon, mu_hat } => {
                let ks = scheme.ks_up_to(*horizon)?;
                super::rigidity::make_rigidity_counterexample(scheme, *horizon, &vec![*mu_hat; ks.len()])?
            }
            SeqSpec::SlowDecay { base, blocks } => {
                super::rigidity::adversarial_slow_decay(&ModSeq::from_spec(base, table)?, blocks)?
            }
        })
    }

    fn with(gen: Gen, name: impl Into<String>, claims: Claims) -> Self {
        ModSeq { gen, name: name.into(), claims }
    }

    pub fn constant(c: Complex64) -> Self {
        let claims = Claims { hartman: true, bounded_w1: true, o_of_n: true, w_phi: Some(Phi::Identity) };
        ModSeq::with(Gen::Constant(c), format!("constant({c})"), claims)
    }

    pub fn power(exponent: f64) -> Self {
        let bounded = exponent <= 0.0;
        let claims = Claims {
            hartman: false,
            bounded_w1: bounded,
            o_of_n: exponent < 1.0,
            w_phi: bounded.then_some(Phi::Identity),
        };
        ModSeq::with(Gen::Power(exponent), format!("k^{exponent}"), claims)
    }

    pub fn reciprocal() -> Self {
        let claims = Claims { hartman: true, bounded_w1: true, o_of_n: true, w_phi: Some(Phi::Identity) };
        ModSeq::with(Gen::Reciprocal, "1/k", claims)
    }

    pub fn inverse_log() -> Self {
        let claims = Claims { hartman: true, bounded_w1: true, o_of_n: true, w_phi: Some(Phi::Identity) };
        ModSeq::with(Gen::InverseLog, "1/log(k+1)", claims)
    }

    pub fn explicit(values: Vec<Complex64>) -> Self {
        ModSeq::with(Gen::Explicit(values), "explicit", Claims::default())
    }

    /// Same phase, modulus `min(|a_k|, cap)`. Bounded, hence in `𝒜`.
    pub fn clipped(self, cap: f64) -> Result<Self> {
        if !(cap > 0.0) {
            return Err(Error::Invalid(format!("clip level {cap} must be positive")));
        }
        let claims = Claims {
            hartman: false,
            bounded_w1: true,
            o_of_n: true,
            w_phi: Some(Phi::Identity),
        };
        let name = format!("min({}, {cap})", self.name);
        Ok(ModSeq::with(Gen::Clipped(Box::new(self), cap), name, claims))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn claims(&self) -> &Claims {
        &self.claims
    }

    pub fn with_claims(mut self, claims: Claims) -> Self {
        self.claims = claims;
        self
    }

    /// Last index for which the sequence is defined, if finite.
    pub fn horizon(&self) -> Option<u64> {
        match &self.gen {
            Gen::VonMangoldt(t, _) => Some(t.horizon()),
            Gen::Explicit(v) => Some(v.len() as u64),
            Gen::Clipped(inner, _) | Gen::SlowDecay(inner, _) => inner.horizon(),
            _ => None,
        }
    }

    pub fn check_horizon(&self, n: u64) -> Result<()> {
        match self.horizon() {
            Some(h) if n > h => Err(Error::HorizonExceeded { requested: n, horizon: h }),
            _ => Ok(()),
        }
    }

    /// Which von Mangoldt weight this is, if any.
    pub fn von_mangoldt_kind(&self) -> Option<VonMangoldtKind> {
        match &self.gen {
            Gen::VonMangoldt(_, kind) => Some(*kind),
            _ => None,
        }
    }

    pub fn rigidity_schedule(&self) -> Option<&RigiditySchedule> {
        match &self.gen {
            Gen::Rigidity(s) => Some(s),
            _ => None,
        }
    }

    /// `a_k` for `k >= 1`.
    pub fn value(&self, k: u64) -> Result<Complex64> {
        if k == 0 {
            return Err(Error::Domain("sequences are indexed from 1".into()));
        }
        self.check_horizon(k)?;
        Ok(self.value_unchecked(k))
    }

    /// `a_k` without the horizon check; callers validate the range once.
    pub(crate) fn value_unchecked(&self, k: u64) -> Complex64 {
        let re = |x: f64| Complex64::new(x, 0.0);
        match &self.gen {
            Gen::Constant(c) => *c,
            Gen::Exponential(a) => a.times(k as u128).unit(),
            Gen::VonMangoldt(t, VonMangoldtKind::PrimeOnly) => {
                re(if t.is_prime_unchecked(k) { (k as f64).ln() } else { 0.0 })
            }
            Gen::VonMangoldt(t, VonMangoldtKind::Full) => re(t.von_mangoldt_unchecked(k)),
            Gen::DyadicSpike => {
                if k >= 2 && k.is_power_of_two() {
                    re((k / 2) as f64)
                } else {
                    re(0.0)
                }
            }
            Gen::Power(e) => re((k as f64).powf(*e)),
            Gen::Reciprocal => re(1.0 / k as f64),
            Gen::InverseLog => re(1.0 / ((k + 1) as f64).ln()),
            Gen::Clipped(inner, cap) => {
                let a = inner.value_unchecked(k);
                let m = a.norm();
                if m > *cap {
                    a * (*cap / m)
                } else {
                    a
                }
            }
            Gen::Explicit(v) => v[(k - 1) as usize],
            Gen::Rigidity(s) => re(s.value(k)),
            Gen::SlowDecay(base, blocks) => {
                let a = base.value_unchecked(k);
                let j = blocks.partition_point(|&b| b <= k).max(1);
                let modulus = 1.0 / (j as f64).sqrt();
                let m = a.norm();
                if m == 0.0 {
                    re(modulus)
                } else {
                    a.conj() * (modulus / m)
                }
            }
        }
    }

    /// Cheap test used by streaming code to skip zero terms.
    pub(crate) fn known_zero(&self, k: u64) -> bool {
        match &self.gen {
            Gen::VonMangoldt(t, VonMangoldtKind::PrimeOnly) => !t.is_prime_unchecked(k),
            Gen::DyadicSpike => !(k >= 2 && k.is_power_of_two()),
            Gen::Rigidity(s) => s.value(k) == 0.0,
            _ => false,
        }
    }
}

/// `a_k = λ^k` for `λ = e(angle)`.
pub fn make_exponential(angle: Angle) -> ModSeq {
    let claims = Claims { hartman: true, bounded_w1: true, o_of_n: true, w_phi: Some(Phi::Identity) };
    ModSeq::with(Gen::Exponential(angle), format!("e({:.6}·k)", angle.turns()), claims)
}

/// `λ^k` from a complex number; rejects non-unimodular input.
pub fn make_exponential_from_unit(z: Complex64) -> Result<ModSeq> {
    Ok(make_exponential(Angle::from_unit(z)?))
}

pub fn make_von_mangoldt(table: Arc<PrimeTable>, kind: VonMangoldtKind) -> ModSeq {
    let claims = Claims { hartman: true, bounded_w1: true, o_of_n: true, w_phi: None };
    let name = match kind {
        VonMangoldtKind::Full => "Λ",
        VonMangoldtKind::PrimeOnly => "Λ'",
    };
    ModSeq::with(Gen::VonMangoldt(table, kind), name, claims)
}

/// `a_{2^j} = 2^{j-1}`, zero elsewhere: bounded averages but not `o(n)`.
pub fn make_dyadic_spike() -> ModSeq {
    let claims = Claims { hartman: false, bounded_w1: true, o_of_n: false, w_phi: None };
    ModSeq::with(Gen::DyadicSpike, "dyadic spike", claims)
}

pub(crate) fn rigidity_seq(schedule: RigiditySchedule) -> ModSeq {
    let claims = Claims { hartman: false, bounded_w1: true, o_of_n: false, w_phi: None };
    ModSeq::with(Gen::Rigidity(schedule), "rigidity counterexample", claims)
}

pub(crate) fn slow_decay_seq(base: &ModSeq, blocks: Vec<u64>) -> ModSeq {
    let claims = Claims { hartman: false, bounded_w1: true, o_of_n: true, w_phi: Some(Phi::Identity) };
    let name = format!("slow decay against {}", base.name);
    ModSeq::with(Gen::SlowDecay(Box::new(base.clone()), blocks), name, claims)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_values() {
        let one = make_exponential(Angle::ZERO);
        assert_eq!(one.value(17).unwrap(), Complex64::new(1.0, 0.0));
        let q = make_exponential(Angle::from_turns(0.25).unwrap());
        assert!((q.value(3).unwrap() - Complex64::new(0.0, -1.0)).norm() < 1e-15);
        let minus = make_exponential(Angle::rational(1, 2).unwrap());
        let mut s = Complex64::new(0.0, 0.0);
        for n in 1..=50u64 {
            s += minus.value(n).unwrap();
            let avg = s / n as f64;
            let expect = if n % 2 == 0 { 0.0 } else { -1.0 / n as f64 };
            assert!((avg.re - expect).abs() < 1e-15 && avg.im == 0.0);
        }
        assert!(make_exponential_from_unit(Complex64::new(0.5, 0.0)).is_err());
    }

    #[test]
    fn von_mangoldt_seq() {
        let t = Arc::new(PrimeTable::new(100).unwrap());
        let lp = make_von_mangoldt(t.clone(), VonMangoldtKind::PrimeOnly);
        let l = make_von_mangoldt(t, VonMangoldtKind::Full);
        assert_eq!(lp.value(9).unwrap().re, 0.0);
        assert_eq!(l.value(9).unwrap().re, 3f64.ln());
        assert!(matches!(lp.value(101), Err(Error::HorizonExceeded { .. })));
        assert!(lp.value(0).is_err());
    }

    #[test]
    fn dyadic_spike_values() {
        let d = make_dyadic_spike();
        assert_eq!(d.value(1).unwrap().re, 0.0);
        assert_eq!(d.value(2).unwrap().re, 1.0);
        assert_eq!(d.value(3).unwrap().re, 0.0);
        for j in 1..40u32 {
            let k = 1u64 << j;
            assert_eq!(d.value(k).unwrap().re / k as f64, 0.5);
        }
        let mut s = 0.0;
        for n in 1..=(1u64 << 16) {
            s += d.value(n).unwrap().re;
            assert!(s / (n as f64) < 1.0);
        }
    }

    #[test]
    fn clipping_keeps_phase() {
        let c = ModSeq::constant(Complex64::new(0.0, 20.0)).clipped(10.0).unwrap();
        assert_eq!(c.value(1).unwrap(), Complex64::new(0.0, 10.0));
        assert!(ModSeq::reciprocal().clipped(0.0).is_err());
    }

    #[test]
    fn spec_json_shape() {
        let spec = SeqSpec::VonMangoldt { kind: VonMangoldtKind::PrimeOnly };
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(json, r#"{"generator":"von_mangoldt","params":{"kind":"prime_only"}}"#);
        let back: SeqSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
        assert!(matches!(ModSeq::from_spec(&spec, None), Err(Error::MissingTable(_))));
        let d: SeqSpec = serde_json::from_str(r#"{"generator":"dyadic_spike"}"#).unwrap();
        assert_eq!(d, SeqSpec::DyadicSpike);
    }
}
