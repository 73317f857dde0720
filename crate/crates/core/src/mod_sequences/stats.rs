use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::phi::Phi;
use super::seq::ModSeq;
use crate::angle::Angle;
use crate::csvfmt::fmt17;
use crate::error::{Error, Result};
use crate::grid::{limsup_tail, validate_grid};
use crate::sum::{ComplexKahanSum, KahanSum};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatsRow {
    pub n: u64,
    /// `(1/n) Σ |a_k|`
    pub abs_mean: f64,
    /// `(1/n²) Σ |a_k|²`
    pub sq_mean: f64,
    /// `max_{k ≤ n} |a_k| / n`
    pub max_over_n: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeqStats {
    pub horizon: u64,
    pub rows: Vec<StatsRow>,
}

impl SeqStats {
    pub fn row_at(&self, n: u64) -> Option<&StatsRow> {
        self.rows.iter().find(|r| r.n == n)
    }

    pub fn last(&self) -> &StatsRow {
        self.rows.last().expect("stats always have a row")
    }

    /// CSV with header `n,abs_mean,sq_mean,max_over_n`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "n,abs_mean,sq_mean,max_over_n")?;
        for r in &self.rows {
            writeln!(w, "{},{},{},{}", r.n, fmt17(r.abs_mean), fmt17(r.sq_mean), fmt17(r.max_over_n))?;
        }
        Ok(())
    }
}

/// One pass over `a_1..a_H` recording the summability statistics at `grid`.
pub fn stats_scan(seq: &ModSeq, horizon: u64, grid: &[u64]) -> Result<SeqStats> {
    if horizon == 0 {
        return Err(Error::Invalid("stats need H >= 1".into()));
    }
    validate_grid(grid, horizon)?;
    seq.check_horizon(horizon)?;
    let mut abs = KahanSum::new();
    let mut sq = KahanSum::new();
    let mut max_abs = 0.0f64;
    let mut rows = Vec::with_capacity(grid.len());
    let mut next = 0;
    for k in 1..=horizon {
        if !seq.known_zero(k) {
            let m = seq.value_unchecked(k).norm();
            abs.add(m);
            sq.add(m * m);
            max_abs = max_abs.max(m);
        }
        if next < grid.len() && grid[next] == k {
            let n = k as f64;
            rows.push(StatsRow {
                n: k,
                abs_mean: abs.value() / n,
                sq_mean: sq.value() / (n * n),
                max_over_n: max_abs / n,
            });
            next += 1;
        }
    }
    Ok(SeqStats { horizon, rows })
}

/// `sup_{n ≤ H} (1/n) Σ_{k ≤ n} |a_k| φ(|a_k|)`.
pub fn wphi_supremum(seq: &ModSeq, phi: &Phi, horizon: u64) -> Result<f64> {
    phi.validate()?;
    if horizon == 0 {
        return Err(Error::Invalid("φ-supremum needs H >= 1".into()));
    }
    seq.check_horizon(horizon)?;
    let mut acc = KahanSum::new();
    let mut sup = 0.0f64;
    for k in 1..=horizon {
        if !seq.known_zero(k) {
            let m = seq.value_unchecked(k).norm();
            acc.add(m * phi.eval(m));
        }
        sup = sup.max(acc.value() / k as f64);
    }
    Ok(sup)
}

/// `(1/N) Σ_{k ≤ N} a_k λ̄^k`.
pub fn fourier_bohr_estimate(seq: &ModSeq, lambda: &Angle, n: u64) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::Invalid("Fourier–Bohr estimate needs N >= 1".into()));
    }
    seq.check_horizon(n)?;
    let conj = lambda.neg();
    let mut acc = ComplexKahanSum::new();
    for k in 1..=n {
        if !seq.known_zero(k) {
            acc.add(seq.value_unchecked(k) * conj.times(k as u128).unit());
        }
    }
    Ok(acc.value() / n as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct W1Distance {
    /// Max over the last third of the grid of `(1/n) Σ |a_k − b_k|`.
    pub value: f64,
    pub profile: Vec<(u64, f64)>,
}

/// Finite-horizon proxy for `limsup_n (1/n) Σ_{k ≤ n} |a_k − b_k|`.
pub fn w1_distance(a: &ModSeq, b: &ModSeq, horizon: u64, grid: &[u64]) -> Result<W1Distance> {
    validate_grid(grid, horizon)?;
    a.check_horizon(horizon)?;
    b.check_horizon(horizon)?;
    let mut acc = KahanSum::new();
    let mut profile = Vec::with_capacity(grid.len());
    let mut next = 0;
    for k in 1..=horizon {
        if !(a.known_zero(k) && b.known_zero(k)) {
            acc.add((a.value_unchecked(k) - b.value_unchecked(k)).norm());
        }
        if next < grid.len() && grid[next] == k {
            profile.push((k, acc.value() / k as f64));
            next += 1;
        }
    }
    let values: Vec<f64> = profile.iter().map(|p| p.1).collect();
    Ok(W1Distance { value: limsup_tail(&values), profile })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::default_grid;
    use crate::mod_sequences::{make_dyadic_spike, make_exponential};

    #[test]
    fn constant_one() {
        let one = ModSeq::constant(Complex64::new(1.0, 0.0));
        let s = stats_scan(&one, 1000, &default_grid(1000)).unwrap();
        for r in &s.rows {
            assert!((r.abs_mean - 1.0).abs() < 1e-15);
            assert!((r.sq_mean - 1.0 / r.n as f64).abs() < 1e-15);
        }
        assert!(stats_scan(&one, 10, &[5, 3]).is_err());
        assert!(stats_scan(&one, 10, &[11]).is_err());
    }

    #[test]
    fn dyadic_sq_mean_closed_form() {
        let d = make_dyadic_spike();
        let grid: Vec<u64> = (1..=12).map(|l| 1u64 << l).collect();
        let s = stats_scan(&d, 1 << 12, &grid).unwrap();
        for (l, r) in (1..=12).zip(&s.rows) {
            let four_l = 4f64.powi(l);
            let expect = (four_l - 1.0) / (3.0 * four_l);
            assert!((r.sq_mean - expect).abs() < 1e-12, "l = {l}");
            assert_eq!(r.max_over_n, 0.5);
            assert!(r.abs_mean < 1.0);
        }
    }

    #[test]
    fn recomputable_from_scratch() {
        let seq = ModSeq::power(0.3);
        let grid = default_grid(5000);
        let s = stats_scan(&seq, 5000, &grid).unwrap();
        for r in &s.rows {
            let vals: Vec<f64> = (1..=r.n).map(|k| (k as f64).powf(0.3)).collect();
            let n = r.n as f64;
            let abs: f64 = vals.iter().sum::<f64>() / n;
            let sq: f64 = vals.iter().map(|v| v * v).sum::<f64>() / (n * n);
            let mx = vals.iter().cloned().fold(0.0, f64::max) / n;
            assert!((abs - r.abs_mean).abs() < 1e-10 * abs.max(1.0));
            assert!((sq - r.sq_mean).abs() < 1e-10);
            assert!((mx - r.max_over_n).abs() < 1e-15);
        }
    }

    #[test]
    fn wphi() {
        let bounded = make_exponential(Angle::frac_sqrt(2));
        assert!(wphi_supremum(&bounded, &Phi::Identity, 1000).unwrap() <= 1.0 + 1e-12);
        // k^{1/4} with φ = id: (1/n) Σ k^{1/2} ≈ (2/3) n^{1/2}
        let quarter = ModSeq::power(0.25);
        let s = wphi_supremum(&quarter, &Phi::Identity, 10_000).unwrap();
        assert!((s / (2.0 / 3.0 * 100.0) - 1.0).abs() < 0.01);
        let bad = Phi::Table { points: vec![(0.0, 2.0), (1.0, 1.0)] };
        assert!(matches!(wphi_supremum(&quarter, &bad, 10), Err(Error::InvalidPhi(_))));
    }

    #[test]
    fn fourier_bohr_of_itself() {
        let a = Angle::frac_sqrt(3);
        let v = fourier_bohr_estimate(&make_exponential(a), &a, 100_000).unwrap();
        assert!((v - 1.0).norm() < 1e-9);
    }

    #[test]
    fn w1_identical_is_zero() {
        let a = ModSeq::power(0.5);
        let d = w1_distance(&a, &a, 100, &default_grid(100)).unwrap();
        assert_eq!(d.value, 0.0);
    }

    #[test]
    fn csv_header_and_rows() {
        let one = ModSeq::constant(Complex64::new(1.0, 0.0));
        let s = stats_scan(&one, 20, &[10, 20]).unwrap();
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "n,abs_mean,sq_mean,max_over_n");
        assert!(lines[1].starts_with("10,1.0000000000000000e0,"));
        assert_eq!(lines.len(), 3);
    }
}
