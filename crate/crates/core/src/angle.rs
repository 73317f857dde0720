//! Points of the unit circle stored as fractions of a turn.
//!
//! An [`Angle`] is either an exact rational `num/den` or a 128-bit fixed-point
//! fraction. Integer multiples are reduced exactly (modular arithmetic for
//! rationals, wrapping multiplication for fixed point), so `λ^k` never drifts
//! off the circle no matter how large `k` gets.

use std::f64::consts::TAU;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_complex::Complex64;
use num_integer::Integer;
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

const TWO_POW_128: f64 = 340_282_366_920_938_463_463_374_607_431_768_211_456.0;

/// Tolerance on `| |z| - 1 |` accepted when converting a complex number to an angle.
pub const UNIMODULAR_TOL: f64 = 1e-12;

/// Text form: `b/q` for rationals, `0x` followed by 32 hex digits for fixed
/// point. Parsing also accepts `sqrt(n)` (fractional part of `√n`) and plain
/// decimal turns.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Angle {
    /// `num/den` turns with `0 <= num < den` and `gcd(num, den) = 1`.
    Rational { num: u64, den: u64 },
    /// `x / 2^128` turns.
    Fixed(u128),
}

impl Angle {
    pub const ZERO: Angle = Angle::Rational { num: 0, den: 1 };

    /// Reduced rational angle `num/den` taken modulo one turn.
    pub fn rational(num: i64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::InvalidModulus);
        }
        let r = (num as i128).rem_euclid(den as i128) as u64;
        let g = r.gcd(&den);
        Ok(Angle::Rational { num: r / g, den: den / g })
    }

    /// Angle from a float number of turns. Only the fractional part is kept.
    pub fn from_turns(t: f64) -> Result<Self> {
        if !t.is_finite() {
            return Err(Error::Domain(format!("angle {t} is not finite")));
        }
        let frac = t - t.floor();
        let scaled = frac * TWO_POW_128;
        if scaled >= TWO_POW_128 {
            return Ok(Angle::ZERO);
        }
        Ok(Angle::Fixed(scaled as u128))
    }

    /// Fractional part of `sqrt(n)` to full 128-bit precision.
    pub fn frac_sqrt(n: u64) -> Self {
        let root = (BigUint::from(n) << 256u32).sqrt();
        let mask = (BigUint::from(1u8) << 128u32) - BigUint::from(1u8);
        let low = root & mask;
        let digits = low.to_u64_digits();
        let mut x: u128 = 0;
        for (i, d) in digits.iter().enumerate().take(2) {
            x |= (*d as u128) << (64 * i);
        }
        let r = (n as f64).sqrt().round() as u64;
        if r * r == n {
            return Angle::ZERO;
        }
        Angle::Fixed(x)
    }

    /// Angle of a unimodular complex number; rejects `| |z| - 1 | > 1e-12`.
    pub fn from_unit(z: Complex64) -> Result<Self> {
        if (z.norm() - 1.0).abs() > UNIMODULAR_TOL {
            return Err(Error::Domain(format!("|{z}| = {} is not 1", z.norm())));
        }
        Angle::from_turns(z.arg() / TAU)
    }

    /// Position in `[0, 1)` turns.
    pub fn turns(&self) -> f64 {
        match *self {
            Angle::Rational { num, den } => num as f64 / den as f64,
            Angle::Fixed(x) => x as f64 / TWO_POW_128,
        }
    }

    /// `e^{2πit}`.
    pub fn unit(&self) -> Complex64 {
        let mut t = self.turns();
        if t > 0.5 {
            t -= 1.0;
        }
        // exact axis points
        if let Angle::Rational { num, den } = *self {
            if (4 * num as u128).is_multiple_of(den as u128) {
                return match (4 * num as u128) / den as u128 {
                    0 => Complex64::new(1.0, 0.0),
                    1 => Complex64::new(0.0, 1.0),
                    2 => Complex64::new(-1.0, 0.0),
                    _ => Complex64::new(0.0, -1.0),
                };
            }
        }
        let (s, c) = (TAU * t).sin_cos();
        Complex64::new(c, s)
    }

    /// `k·t mod 1`, exact.
    pub fn times(&self, k: u128) -> Angle {
        match *self {
            Angle::Rational { num, den } => {
                let r = (num as u128 * (k % den as u128)) % den as u128;
                Angle::rational(r as i64, den).expect("den > 0")
            }
            Angle::Fixed(x) => Angle::Fixed(x.wrapping_mul(k)),
        }
    }

    /// `k·t mod 1` for a signed multiple.
    pub fn times_signed(&self, k: i128) -> Angle {
        let a = self.times(k.unsigned_abs());
        if k < 0 {
            a.neg()
        } else {
            a
        }
    }

    pub fn neg(&self) -> Angle {
        match *self {
            Angle::Rational { num, den } => {
                Angle::rational(-(num as i64), den).expect("den > 0")
            }
            Angle::Fixed(x) => Angle::Fixed(x.wrapping_neg()),
        }
    }

    /// `t / d` where `t ∈ [0, 1)` is the canonical representative.
    pub fn divide(&self, d: u64) -> Result<Angle> {
        if d == 0 {
            return Err(Error::InvalidModulus);
        }
        Ok(match *self {
            Angle::Rational { num, den } => {
                let den = den
                    .checked_mul(d)
                    .ok_or_else(|| Error::Overflow(format!("{num}/{den} divided by {d}")))?;
                Angle::rational(num as i64, den)?
            }
            Angle::Fixed(x) => Angle::Fixed(x / d as u128),
        })
    }

    pub fn add(&self, other: &Angle) -> Angle {
        match (*self, *other) {
            (Angle::Rational { num: a, den: p }, Angle::Rational { num: b, den: q })
                if p.checked_mul(q).is_some() =>
            {
                let den = p * q;
                let num = (a as u128 * q as u128 + b as u128 * p as u128) % den as u128;
                Angle::rational(num as i64, den).expect("den > 0")
            }
            _ => Angle::Fixed(self.fixed().wrapping_add(other.fixed())),
        }
    }

    /// 128-bit fixed-point representative (rounded for rationals).
    pub fn fixed(&self) -> u128 {
        match *self {
            Angle::Fixed(x) => x,
            Angle::Rational { num, den } => {
                // floor(num * 2^128 / den) by long division in two 64-bit halves
                let (num, den) = (num as u128, den as u128);
                let hi = (num << 64) / den;
                let rem = (num << 64) % den;
                let lo = (rem << 64) / den;
                (hi << 64) | lo
            }
        }
    }

    pub fn as_rational(&self) -> Option<(u64, u64)> {
        match *self {
            Angle::Rational { num, den } => Some((num, den)),
            Angle::Fixed(_) => None,
        }
    }

    /// Smallest-order `b/q` (with `q <= max_order`) within `tol` turns of this angle.
    pub fn root_of_unity(&self, max_order: u64, tol: f64) -> Option<(u64, u64)> {
        if let Angle::Rational { num, den } = *self {
            return (den <= max_order).then_some((num, den));
        }
        let t = self.turns();
        (1..=max_order).find_map(|q| {
            let b = (t * q as f64).round();
            ((t - b / q as f64).abs() <= tol).then(|| match Angle::rational(b as i64, q) {
                Ok(Angle::Rational { num, den }) => (num, den),
                _ => unreachable!("rational constructor"),
            })
        })
    }

    /// Circular distance in turns, in `[0, 1/2]`.
    pub fn distance(&self, other: &Angle) -> f64 {
        let d = (self.turns() - other.turns()).abs();
        d.min(1.0 - d)
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Angle::Rational { num, den } => write!(f, "{num}/{den}"),
            Angle::Fixed(x) => write!(f, "0x{x:032x}"),
        }
    }
}

impl FromStr for Angle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Domain(format!("cannot parse angle {s:?}"));
        if let Some((n, d)) = s.split_once('/') {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: u64 = d.trim().parse().map_err(|_| bad())?;
            return Angle::rational(n, d);
        }
        if let Some(hex) = s.strip_prefix("0x") {
            return u128::from_str_radix(hex, 16).map(Angle::Fixed).map_err(|_| bad());
        }
        if let Some(inner) = s.strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')')) {
            let n: u64 = inner.trim().parse().map_err(|_| bad())?;
            return Ok(Angle::frac_sqrt(n));
        }
        let t: f64 = s.parse().map_err(|_| bad())?;
        Angle::from_turns(t)
    }
}

impl Serialize for Angle {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Angle {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Turns(f64),
        }
        match Raw::deserialize(de)? {
            Raw::Text(s) => s.parse().map_err(de::Error::custom),
            Raw::Turns(t) => Angle::from_turns(t).map_err(de::Error::custom),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn quarter_cubed_is_minus_i() {
        let a = Angle::rational(1, 4).unwrap();
        let z = a.times(3).unit();
        assert!((z - Complex64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn frac_sqrt2_matches_float() {
        let a = Angle::frac_sqrt(2);
        assert!((a.turns() - (2f64.sqrt() - 1.0)).abs() < 1e-15);
        assert_eq!(Angle::frac_sqrt(9), Angle::ZERO);
    }

    #[test]
    fn fixed_multiples_stay_on_circle() {
        let a = Angle::frac_sqrt(2);
        let z = a.times(1_000_000_000_000).unit();
        assert!((z.norm() - 1.0).abs() < 1e-15);
        // compare with exact rational arithmetic on the 128-bit numerator
        let k: u128 = 123_456_789;
        let direct = Angle::Fixed(a.fixed().wrapping_mul(k));
        assert_eq!(a.times(k), direct);
    }

    #[test]
    fn rejects_non_unimodular() {
        assert!(Angle::from_unit(Complex64::new(1.1, 0.0)).is_err());
        let a = Angle::from_unit(Complex64::new(0.0, 1.0)).unwrap();
        assert!((a.turns() - 0.25).abs() < 1e-15);
    }

    #[test]
    fn detects_roots_of_unity() {
        let a = Angle::from_turns(2.0 / 7.0).unwrap();
        assert_eq!(a.root_of_unity(12, 1e-12), Some((2, 7)));
        assert_eq!(Angle::frac_sqrt(2).root_of_unity(1000, 1e-8), None);
        assert_eq!(Angle::rational(6, 8).unwrap().as_rational(), Some((3, 4)));
    }

    #[test]
    fn divide_then_multiply_returns() {
        let a = Angle::frac_sqrt(3);
        let b = a.divide(3).unwrap().times(3);
        assert!(a.distance(&b) < 1e-30);
        let r = Angle::rational(2, 5).unwrap().divide(3).unwrap();
        assert_eq!(r, Angle::Rational { num: 2, den: 15 });
    }

    #[test]
    fn text_round_trip() {
        for a in [Angle::rational(2, 7).unwrap(), Angle::frac_sqrt(5), Angle::ZERO] {
            let back: Angle = a.to_string().parse().unwrap();
            assert_eq!(a, back);
            let json = serde_json::to_string(&a).unwrap();
            assert_eq!(serde_json::from_str::<Angle>(&json).unwrap(), a);
        }
        assert_eq!("sqrt(2)".parse::<Angle>().unwrap(), Angle::frac_sqrt(2));
        assert_eq!("-1/4".parse::<Angle>().unwrap(), Angle::rational(3, 4).unwrap());
        let t: Angle = serde_json::from_str("0.25").unwrap();
        assert!((t.turns() - 0.25).abs() < 1e-16);
        assert!("1/0".parse::<Angle>().is_err());
        assert!("pi".parse::<Angle>().is_err());
    }

    proptest! {
        #[test]
        fn rational_times_is_exact(num in 0i64..1000, den in 1u64..1000, k in 0u64..1_000_000) {
            let a = Angle::rational(num, den).unwrap();
            let (n, d) = a.times(k as u128).as_rational().unwrap();
            let expect = Angle::rational((num as i128 * k as i128 % den as i128) as i64, den).unwrap();
            prop_assert_eq!((n, d), expect.as_rational().unwrap());
        }

        #[test]
        fn fixed_matches_rational(num in 0i64..1000, den in 1u64..1000, k in 0u64..10_000) {
            let r = Angle::rational(num, den).unwrap();
            let f = Angle::Fixed(r.fixed());
            prop_assert!(r.times(k as u128).distance(&f.times(k as u128)) < 1e-12);
        }
    }
}
