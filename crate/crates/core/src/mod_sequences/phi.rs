use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Strictly increasing `φ: [0, ∞) → [0, ∞)` with `φ(x) → ∞`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Phi {
    Identity,
    /// `x^{p-1}`, `p > 1`.
    Power { p: f64 },
    /// `log(1 + x)`.
    Log1p,
    /// Piecewise-linear through the given points, extrapolated linearly.
    Table { points: Vec<(f64, f64)> },
}

impl Phi {
    pub fn validate(&self) -> Result<()> {
        match self {
            Phi::Power { p } if !(*p > 1.0) => {
                Err(Error::InvalidPhi(format!("power φ needs p > 1, got {p}")))
            }
            Phi::Table { points } => {
                if points.len() < 2 {
                    return Err(Error::InvalidPhi("table needs at least two points".into()));
                }
                if points.iter().any(|&(x, y)| !(x >= 0.0) || !(y >= 0.0)) {
                    return Err(Error::InvalidPhi("table points must be non-negative".into()));
                }
                if points.windows(2).any(|w| !(w[1].0 > w[0].0) || !(w[1].1 > w[0].1)) {
                    return Err(Error::InvalidPhi("table is not strictly increasing".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Phi::Identity => x,
            Phi::Power { p } => x.powf(p - 1.0),
            Phi::Log1p => x.ln_1p(),
            Phi::Table { points } => {
                let seg = points
                    .windows(2)
                    .position(|w| x <= w[1].0)
                    .unwrap_or(points.len() - 2);
                let (x0, y0) = points[seg];
                let (x1, y1) = points[seg + 1];
                (y0 + (x - x0) * (y1 - y0) / (x1 - x0)).max(0.0)
            }
        }
    }

    /// Smallest `C` (found by bisection) with `φ(C) >= target`.
    pub fn inverse(&self, target: f64) -> f64 {
        if self.eval(0.0) >= target {
            return 0.0;
        }
        let mut hi = 1.0;
        while self.eval(hi) < target {
            hi *= 2.0;
            if !hi.is_finite() {
                return f64::INFINITY;
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.eval(mid) >= target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalog() {
        assert_eq!(Phi::Identity.eval(3.0), 3.0);
        assert_eq!(Phi::Power { p: 3.0 }.eval(3.0), 9.0);
        assert!((Phi::Log1p.eval(1.0) - 2f64.ln()).abs() < 1e-15);
        assert!(Phi::Power { p: 1.0 }.validate().is_err());
    }

    #[test]
    fn table() {
        let t = Phi::Table { points: vec![(0.0, 0.0), (1.0, 2.0), (3.0, 3.0)] };
        t.validate().unwrap();
        assert_eq!(t.eval(0.5), 1.0);
        assert_eq!(t.eval(5.0), 4.0);
        let bad = Phi::Table { points: vec![(0.0, 1.0), (1.0, 0.5)] };
        assert!(matches!(bad.validate(), Err(Error::InvalidPhi(_))));
    }

    #[test]
    fn inverse_brackets() {
        let c = Phi::Power { p: 8.0 }.inverse(1e6);
        assert!(Phi::Power { p: 8.0 }.eval(c) >= 1e6);
        assert!((c - 1e6f64.powf(1.0 / 7.0)).abs() < 1e-9);
    }
}
