use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Polynomial with non-negative integer coefficients and degree at least one,
/// stored constant term first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct PolyNN {
    coefficients: Vec<u64>,
}

impl PolyNN {
    pub fn new(mut coefficients: Vec<u64>) -> Result<Self> {
        while coefficients.len() > 1 && coefficients.last() == Some(&0) {
            coefficients.pop();
        }
        if coefficients.len() < 2 {
            return Err(Error::Invalid("polynomial must have degree >= 1".into()));
        }
        Ok(PolyNN { coefficients })
    }

    /// `Q(t) = t`.
    pub fn identity() -> Self {
        PolyNN { coefficients: vec![0, 1] }
    }

    /// `Q(t) = t^d`.
    pub fn monomial(d: usize) -> Result<Self> {
        let mut c = vec![0; d + 1];
        c[d] = 1;
        PolyNN::new(c)
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn coefficients(&self) -> &[u64] {
        &self.coefficients
    }

    /// Exact value, erroring on `u128` overflow.
    pub fn eval(&self, t: u64) -> Result<u128> {
        let overflow = || Error::Overflow(format!("Q({t})"));
        self.coefficients.iter().rev().try_fold(0u128, |acc, &c| {
            acc.checked_mul(t as u128)
                .and_then(|v| v.checked_add(c as u128))
                .ok_or_else(overflow)
        })
    }

    /// `Q(t) mod m`.
    pub fn eval_mod(&self, t: u64, m: u64) -> u64 {
        let m = m as u128;
        let t = t as u128 % m;
        self.coefficients
            .iter()
            .rev()
            .fold(0u128, |acc, &c| (acc * t + c as u128 % m) % m) as u64
    }
}

impl TryFrom<Vec<u64>> for PolyNN {
    type Error = Error;
    fn try_from(v: Vec<u64>) -> Result<Self> {
        PolyNN::new(v)
    }
}

impl From<PolyNN> for Vec<u64> {
    fn from(p: PolyNN) -> Vec<u64> {
        p.coefficients
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_constants() {
        assert!(PolyNN::new(vec![3]).is_err());
        assert!(PolyNN::new(vec![3, 0]).is_err());
        assert_eq!(PolyNN::new(vec![1, 2, 0]).unwrap().degree(), 1);
    }

    #[test]
    fn evaluates() {
        let q = PolyNN::new(vec![1, 0, 2]).unwrap();
        assert_eq!(q.eval(3).unwrap(), 19);
        assert_eq!(q.eval_mod(3, 5), 4);
        assert!(PolyNN::monomial(9).unwrap().eval(u64::MAX).is_err());
    }

    proptest! {
        #[test]
        fn strictly_increasing(c in proptest::collection::vec(0u64..50, 1..4), lead in 1u64..5, t in 1u64..10_000) {
            let mut coeffs = c;
            coeffs.push(lead);
            let q = PolyNN::new(coeffs).unwrap();
            prop_assert!(q.eval(t + 1).unwrap() > q.eval(t).unwrap());
        }

        #[test]
        fn mod_agrees(c in proptest::collection::vec(0u64..1000, 2..5), t in 0u64..100_000, m in 1u64..500) {
            let mut coeffs = c;
            *coeffs.last_mut().unwrap() += 1;
            let q = PolyNN::new(coeffs).unwrap();
            prop_assert_eq!(q.eval_mod(t, m) as u128, q.eval(t).unwrap() % m as u128);
        }
    }
}
