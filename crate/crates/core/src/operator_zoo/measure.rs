//! Finitely supported probability measures on the circle.

use std::io::{BufRead, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::angle::Angle;
use crate::error::{Error, Result};
use crate::sum::ComplexKahanSum;

const MASS_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<(Angle, f64)>", into = "Vec<(Angle, f64)>")]
pub struct Measure {
    atoms: Vec<(Angle, f64)>,
}

impl TryFrom<Vec<(Angle, f64)>> for Measure {
    type Error = Error;

    fn try_from(atoms: Vec<(Angle, f64)>) -> Result<Self> {
        Measure::new(atoms)
    }
}

impl From<Measure> for Vec<(Angle, f64)> {
    fn from(m: Measure) -> Self {
        m.atoms
    }
}

impl Measure {
    /// Atoms with non-negative weights summing to one within `1e-12`.
    pub fn new(atoms: Vec<(Angle, f64)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidMeasure("no atoms".into()));
        }
        if let Some((a, w)) = atoms.iter().find(|(_, w)| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidMeasure(format!("weight {w} at {a}")));
        }
        let mass: f64 = atoms.iter().map(|(_, w)| *w).collect::<crate::sum::KahanSum>().value();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidMeasure(format!("total mass {mass} is not 1")));
        }
        Ok(Measure { atoms })
    }

    /// Uniform measure on `{k / 2^m : 0 <= k < 2^m}`.
    pub fn dyadic_uniform(m: u32) -> Result<Self> {
        if m > 24 {
            return Err(Error::Resource { requested: 1 << m.min(63), bound: 1 << 24 });
        }
        let n = 1u64 << m;
        let w = 1.0 / n as f64;
        let atoms = (0..n).map(|k| (Angle::rational(k as i64, n).expect("n > 0"), w)).collect();
        Measure::new(atoms)
    }

    pub fn atoms(&self) -> &[(Angle, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// CSV with header `angle,weight`; angles in any form [`Angle`] parses.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let file = std::io::BufReader::new(std::fs::File::open(path)?);
        let mut atoms = Vec::new();
        for (i, line) in file.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() || (i == 0 && line.starts_with("angle")) {
                continue;
            }
            let spec_err = |message: String| Error::Spec { path: format!("{}:{}", path.display(), i + 1), message };
            let (a, w) = line.split_once(',').ok_or_else(|| spec_err("expected angle,weight".into()))?;
            let angle: Angle = a.parse().map_err(|e: Error| spec_err(e.to_string()))?;
            let weight: f64 = w.trim().parse().map_err(|_| spec_err(format!("bad weight {w:?}")))?;
            atoms.push((angle, weight));
        }
        Measure::new(atoms)
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "angle,weight")?;
        for (a, w) in &self.atoms {
            writeln!(out, "{a},{}", crate::csvfmt::fmt17(*w))?;
        }
        Ok(())
    }
}

/// `μ̂(n) = Σ w_i e^{2πi n t_i}`.
pub fn measure_fourier_coefficient(mu: &Measure, n: i128) -> Complex64 {
    let mut s = ComplexKahanSum::new();
    for (a, w) in &mu.atoms {
        if *w != 0.0 {
            s.add(a.times_signed(n).unit() * *w);
        }
    }
    s.value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_coefficient_is_mass() {
        let mu = Measure::new(vec![(Angle::frac_sqrt(2), 0.25), (Angle::rational(1, 3).unwrap(), 0.75)]).unwrap();
        assert!((measure_fourier_coefficient(&mu, 0) - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        for n in -20..20 {
            assert!(measure_fourier_coefficient(&mu, n).norm() <= 1.0 + 1e-15);
        }
    }

    #[test]
    fn two_point_measure() {
        let half = Measure::new(vec![(Angle::ZERO, 0.5), (Angle::rational(1, 2).unwrap(), 0.5)]).unwrap();
        assert!(measure_fourier_coefficient(&half, 1).norm() < 1e-15);
        assert!((measure_fourier_coefficient(&half, 2).re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dyadic_character_sums() {
        let mu = Measure::dyadic_uniform(10).unwrap();
        assert_eq!(mu.len(), 1024);
        assert!((measure_fourier_coefficient(&mu, 1 << 10) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        assert!((measure_fourier_coefficient(&mu, 1 << 15) - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        for j in [1, 3, 512, 1023, 1025] {
            assert!(measure_fourier_coefficient(&mu, j).norm() < 1e-12, "j = {j}");
        }
    }

    #[test]
    fn rejects_bad_mass() {
        assert!(matches!(Measure::new(vec![(Angle::ZERO, 0.9)]), Err(Error::InvalidMeasure(_))));
        assert!(Measure::new(vec![(Angle::ZERO, 1.5), (Angle::ZERO, -0.5)]).is_err());
        assert!(Measure::new(vec![]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let mu = Measure::new(vec![(Angle::frac_sqrt(3), 0.5), (Angle::rational(2, 5).unwrap(), 0.5)]).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("mu.csv");
        mu.write_csv(std::fs::File::create(&path).unwrap()).unwrap();
        assert_eq!(Measure::read_csv(&path).unwrap(), mu);
        std::fs::write(&path, "angle,weight\n1/3,0.5\n").unwrap();
        assert!(matches!(Measure::read_csv(&path), Err(Error::InvalidMeasure(_))));
    }
}
