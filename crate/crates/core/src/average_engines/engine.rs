//! Streaming accumulation of the averages along a checkpoint grid.

use std::collections::HashMap;
use std::io::Write;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::scheme::{missing_table, AverageScheme};
use crate::angle::Angle;
use crate::csvfmt::fmt17;
use crate::error::{Error, Result};
use crate::grid::geometric_grid;
use crate::operator_zoo::{Operator, Vector};
use crate::prime_kernel::PrimeTable;
use crate::sum::ComplexKahanSum;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Rational eigen-angles with denominators up to this size use a lookup table.
const UNIT_TABLE_MAX: u64 = 1 << 16;

/// Budget of explicit matrix applications for operators without a fast path.
pub const MAX_ORBIT_APPLIES: u128 = 200_000_000;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub index: u64,
    pub denominator: u64,
    pub average: Vec<Complex64>,
    pub norm: f64,
    /// `⟨average, y⟩` for each registered functional `y`.
    pub functionals: Vec<Complex64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub checkpoints: Vec<Checkpoint>,
}

impl Trace {
    pub fn last(&self) -> Option<&Checkpoint> {
        self.checkpoints.last()
    }

    pub fn at(&self, index: u64) -> Option<&Checkpoint> {
        self.checkpoints.iter().find(|c| c.index == index)
    }

    /// Columns `N`, then `re_i,im_i` for each selected coordinate, then `norm`.
    pub fn write_csv<W: Write>(&self, mut out: W, coords: &[usize]) -> Result<()> {
        let mut header = vec!["N".to_string()];
        for i in coords {
            header.push(format!("re_{i}"));
            header.push(format!("im_{i}"));
        }
        header.push("norm".into());
        writeln!(out, "{}", header.join(","))?;
        for c in &self.checkpoints {
            let mut row = vec![c.index.to_string()];
            for &i in coords {
                let z = c.average.get(i).copied().ok_or(Error::DimMismatch { expected: i + 1, got: c.average.len() })?;
                row.push(fmt17(z.re));
                row.push(fmt17(z.im));
            }
            row.push(fmt17(c.norm));
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Exact `e(k t_i)` for the diagonal kinds.
#[derive(Clone, Debug)]
struct DiagonalTerms {
    coords: Vec<(usize, Complex64, Phase)>,
    tables: HashMap<u64, Vec<Complex64>>,
}

#[derive(Clone, Debug)]
enum Phase {
    Table { num: u64, den: u64 },
    Rational { num: u64, den: u64 },
    Fixed(u128),
}

impl DiagonalTerms {
    fn new(angles: &[Angle], x: &Vector) -> Self {
        let mut tables = HashMap::new();
        let mut coords = Vec::new();
        for (i, (a, c)) in angles.iter().zip(x.iter()).enumerate() {
            if *c == ZERO {
                continue;
            }
            let phase = match *a {
                Angle::Rational { num, den } if den <= UNIT_TABLE_MAX => {
                    tables.entry(den).or_insert_with(|| {
                        (0..den).map(|r| Angle::rational(r as i64, den).expect("den > 0").unit()).collect()
                    });
                    Phase::Table { num, den }
                }
                Angle::Rational { num, den } => Phase::Rational { num, den },
                Angle::Fixed(f) => Phase::Fixed(f),
            };
            coords.push((i, *c, phase));
        }
        DiagonalTerms { coords, tables }
    }

    fn add_term(&self, k: u128, w: Complex64, acc: &mut [ComplexKahanSum]) {
        for (i, c, phase) in &self.coords {
            let u = match *phase {
                Phase::Table { num, den } => {
                    let r = (num as u128 * (k % den as u128)) % den as u128;
                    self.tables[&den][r as usize]
                }
                Phase::Rational { num, den } => Angle::Rational { num, den }.times(k).unit(),
                Phase::Fixed(f) => Angle::Fixed(f.wrapping_mul(k)).unit(),
            };
            acc[*i].add(w * c * u);
        }
    }
}

#[derive(Clone, Debug)]
enum Terms {
    Diagonal(DiagonalTerms),
    /// Nonzero coordinates of `x`; `T^k x` is them moved up by `k`.
    Shift { support: Vec<(usize, Complex64)>, slack: u128 },
    /// `v = T^exponent x`, advanced by explicit applications.
    Orbit { v: Vector, exponent: u128, applies: u128 },
}

/// Single-writer state of one streaming average.
#[derive(Clone, Debug)]
pub struct EngineState {
    scheme: AverageScheme,
    op: Arc<Operator>,
    x: Vector,
    table: Option<Arc<PrimeTable>>,
    terms: Terms,
    /// `N` for the integer-indexed schemes, `j` for the polynomial one.
    index: u64,
    primes_seen: u64,
    acc: Vec<ComplexKahanSum>,
    grid: Vec<u64>,
    next_checkpoint: usize,
    functionals: Vec<Vector>,
    trace: Trace,
}

/// Default checkpoints: ratio 1.3 from 10.
fn open_grid() -> Vec<u64> {
    geometric_grid(10, 1.3, 1 << 62).expect("valid parameters")
}

pub fn engine_new(
    scheme: AverageScheme,
    op: Arc<Operator>,
    x: Vector,
    table: Option<Arc<PrimeTable>>,
) -> Result<EngineState> {
    if x.len() != op.dim() {
        return Err(Error::DimMismatch { expected: op.dim(), got: x.len() });
    }
    if scheme.needs_table() && table.is_none() {
        return Err(missing_table(&scheme));
    }
    let terms = if let Some(angles) = op.diagonal_angles() {
        Terms::Diagonal(DiagonalTerms::new(&angles, &x))
    } else if let Operator::TruncatedShift { .. } = *op {
        Terms::Shift {
            support: x.iter().enumerate().filter(|(_, c)| **c != ZERO).map(|(i, c)| (i, *c)).collect(),
            slack: op.exact_slack(&x).expect("shift has a slack"),
        }
    } else {
        Terms::Orbit { v: x.clone(), exponent: 0, applies: 0 }
    };
    let dim = x.len();
    Ok(EngineState {
        scheme,
        op,
        x,
        table,
        terms,
        index: 0,
        primes_seen: 0,
        acc: vec![ComplexKahanSum::new(); dim],
        grid: open_grid(),
        next_checkpoint: 0,
        functionals: Vec::new(),
        trace: Trace::default(),
    })
}

impl EngineState {
    /// Replaces the checkpoint grid; entries at or below the current index are ignored.
    pub fn set_grid(&mut self, grid: Vec<u64>) -> Result<()> {
        if grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid("checkpoints must be strictly increasing".into()));
        }
        self.next_checkpoint = grid.partition_point(|&g| g <= self.index);
        self.grid = grid;
        Ok(())
    }

    pub fn set_functionals(&mut self, functionals: Vec<Vector>) -> Result<()> {
        if let Some(y) = functionals.iter().find(|y| y.len() != self.x.len()) {
            return Err(Error::DimMismatch { expected: self.x.len(), got: y.len() });
        }
        self.functionals = functionals;
        Ok(())
    }

    pub fn scheme(&self) -> &AverageScheme {
        &self.scheme
    }

    pub fn operator(&self) -> &Operator {
        &self.op
    }

    pub fn vector(&self) -> &Vector {
        &self.x
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    /// `π(N)` for the prime average, the index otherwise.
    pub fn denominator(&self) -> u64 {
        match self.scheme {
            AverageScheme::Prime => self.primes_seen,
            _ => self.index,
        }
    }

    /// Explicit matrix applications performed so far.
    pub fn orbit_applies(&self) -> u128 {
        match &self.terms {
            Terms::Orbit { applies, .. } => *applies,
            _ => 0,
        }
    }

    /// The partial sum, before division.
    pub fn sum(&self) -> Vector {
        Vector::from_iterator(self.acc.len(), self.acc.iter().map(|s| s.value()))
    }

    /// Current average; zero while the denominator is zero.
    pub fn average(&self) -> Vector {
        let d = self.denominator();
        if d == 0 {
            return Vector::zeros(self.acc.len());
        }
        self.sum().unscale(d as f64)
    }

    pub fn trace(&self) -> &Trace {
        &self.trace
    }

    pub fn into_trace(self) -> Trace {
        self.trace
    }

    /// Processes `steps` more indices, recording checkpoints on the grid.
    pub fn advance(&mut self, steps: u64) -> Result<()> {
        if steps == 0 {
            return Err(Error::Invalid("advance needs steps >= 1".into()));
        }
        let target = self.index.checked_add(steps).ok_or_else(|| Error::Overflow("engine index".into()))?;
        if let Some(max) = self.scheme.max_index(self.table.as_deref()) {
            if target > max {
                return Err(Error::HorizonExceeded { requested: target, horizon: max });
            }
        }
        while self.index < target {
            let k = self.index + 1;
            self.step(k)?;
            self.index = k;
            if self.grid.get(self.next_checkpoint) == Some(&k) {
                self.record();
                self.next_checkpoint += 1;
            }
        }
        Ok(())
    }

    /// Advances to index `n` and makes sure a checkpoint sits at `n`.
    pub fn run_to(&mut self, n: u64) -> Result<&Trace> {
        if n > self.index {
            self.advance(n - self.index)?;
        }
        if self.trace.last().map(|c| c.index) != Some(self.index) {
            self.record();
        }
        Ok(&self.trace)
    }

    fn record(&mut self) {
        let avg = self.average();
        let norm = self.op.norm(&avg).unwrap_or(f64::NAN);
        let functionals = self.functionals.iter().map(|y| y.dotc(&avg)).collect();
        self.trace.checkpoints.push(Checkpoint {
            index: self.index,
            denominator: self.denominator(),
            average: avg.iter().copied().collect(),
            norm,
            functionals,
        });
    }

    /// Weight and exponent of the term at index `k`, if nonzero.
    fn term_at(&mut self, k: u64) -> Result<Option<(Complex64, u128)>> {
        let one = Complex64::new(1.0, 0.0);
        Ok(match &self.scheme {
            AverageScheme::Cesaro => Some((one, k as u128)),
            AverageScheme::Modulated(a) => {
                if a.known_zero(k) {
                    None
                } else {
                    let w = a.value_unchecked(k);
                    (w != ZERO).then_some((w, k as u128))
                }
            }
            AverageScheme::Prime | AverageScheme::PrimeLog => {
                let table = self.table.as_ref().expect("checked at construction");
                if !table.is_prime_unchecked(k) {
                    None
                } else {
                    self.primes_seen += 1;
                    let w = match self.scheme {
                        AverageScheme::PrimeLog => Complex64::new((k as f64).ln(), 0.0),
                        _ => one,
                    };
                    Some((w, k as u128))
                }
            }
            AverageScheme::PrimePoly(q) => {
                let table = self.table.as_ref().expect("checked at construction");
                let p = table.primes()[(k - 1) as usize];
                Some((one, q.eval(p)?))
            }
        })
    }

    fn step(&mut self, k: u64) -> Result<()> {
        let Some((w, e)) = self.term_at(k)? else { return Ok(()) };
        match &mut self.terms {
            Terms::Diagonal(d) => d.add_term(e, w, &mut self.acc),
            Terms::Shift { support, slack } => {
                if e > *slack {
                    return Err(Error::WindowExceeded { exponent: e, slack: *slack });
                }
                for (i, c) in support.iter() {
                    self.acc[i + e as usize].add(w * c);
                }
            }
            Terms::Orbit { v, exponent, applies } => {
                let Operator::Dense(d) = &*self.op else { unreachable!("only dense operators stream an orbit") };
                if e < *exponent {
                    return Err(Error::Invalid("exponents must be non-decreasing".into()));
                }
                let jump = e - *exponent;
                if *applies + jump > MAX_ORBIT_APPLIES {
                    return Err(Error::Resource {
                        requested: (*applies + jump).min(u64::MAX as u128) as u64,
                        bound: MAX_ORBIT_APPLIES as u64,
                    });
                }
                for _ in 0..jump {
                    if v.iter().all(|c| *c == ZERO) {
                        break;
                    }
                    *v = &d.matrix * &*v;
                }
                *applies += jump;
                *exponent = e;
                for (s, c) in self.acc.iter_mut().zip(v.iter()) {
                    s.add(w * c);
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mod_sequences::{make_von_mangoldt, ModSeq, VonMangoldtKind};
    use crate::operator_zoo::{make_diagonal_unitary, make_random_contraction, make_truncated_shift, shift_basis};
    use crate::prime_kernel::PolyNN;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn diag(angles: &[Angle]) -> Arc<Operator> {
        Arc::new(make_diagonal_unitary(angles.to_vec()))
    }

    fn ones(n: usize) -> Vector {
        Vector::from_element(n, c(1.0, 0.0))
    }

    fn table(n: u64) -> Arc<PrimeTable> {
        Arc::new(PrimeTable::new(n).unwrap())
    }

    #[test]
    fn cesaro_of_identity_is_x() {
        let x = Vector::from_vec(vec![c(2.0, -1.0)]);
        let mut e = engine_new(AverageScheme::Cesaro, diag(&[Angle::ZERO]), x.clone(), None).unwrap();
        e.advance(1).unwrap();
        assert_eq!(e.average(), x);
    }

    #[test]
    fn cesaro_of_minus_one() {
        let op = diag(&[Angle::rational(1, 2).unwrap()]);
        let mut e = engine_new(AverageScheme::Cesaro, op, ones(1), None).unwrap();
        for n in 1..=20u64 {
            e.advance(1).unwrap();
            let expect = if n % 2 == 0 { 0.0 } else { -1.0 / n as f64 };
            assert!((e.average()[0] - c(expect, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn prime_schemes_need_a_table() {
        let op = diag(&[Angle::ZERO]);
        assert!(matches!(
            engine_new(AverageScheme::Prime, op.clone(), ones(1), None),
            Err(Error::MissingTable(_))
        ));
        assert!(PrimeTable::new(1).is_err());
        assert!(matches!(
            engine_new(AverageScheme::Cesaro, op, ones(2), None),
            Err(Error::DimMismatch { expected: 1, got: 2 })
        ));
    }

    #[test]
    fn modulated_by_lambda_prime_starts_at_two() {
        let t = table(100);
        let a = make_von_mangoldt(t.clone(), VonMangoldtKind::PrimeOnly);
        let mut e = engine_new(AverageScheme::Modulated(a), diag(&[Angle::ZERO]), ones(1), Some(t)).unwrap();
        e.advance(1).unwrap();
        assert_eq!(e.sum()[0], ZERO);
        e.advance(1).unwrap();
        assert!((e.sum()[0].re - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn denominators_on_a_tiny_range() {
        // primes up to 10 are 2, 3, 5, 7
        let t = table(10);
        let op = diag(&[Angle::ZERO]);
        let mut prime = engine_new(AverageScheme::Prime, op.clone(), ones(1), Some(t.clone())).unwrap();
        prime.run_to(10).unwrap();
        assert_eq!(prime.denominator(), 4);
        assert!((prime.average()[0].re - 1.0).abs() < 1e-15);
        let mut log = engine_new(AverageScheme::PrimeLog, op.clone(), ones(1), Some(t.clone())).unwrap();
        log.run_to(10).unwrap();
        assert_eq!(log.denominator(), 10);
        assert!((log.average()[0].re - 210f64.ln() / 10.0).abs() < 1e-15);
        let mut poly = engine_new(AverageScheme::PrimePoly(PolyNN::identity()), op, ones(1), Some(t)).unwrap();
        poly.run_to(4).unwrap();
        assert_eq!(poly.denominator(), 4);
        assert!(poly.advance(1).is_err());
    }

    #[test]
    fn prime_average_of_minus_one() {
        let t = table(100_000);
        let op = diag(&[Angle::rational(1, 2).unwrap()]);
        let mut e = engine_new(AverageScheme::Prime, op, ones(1), Some(t)).unwrap();
        e.run_to(100_000).unwrap();
        // only p = 2 contributes +1
        let n = e.denominator() as f64;
        assert!((e.average()[0].re - (2.0 - n) / n).abs() < 1e-12);
    }

    #[test]
    fn squares_of_primes_at_quarter_turn() {
        let t = table(1_000_000);
        let op = diag(&[Angle::rational(1, 4).unwrap()]);
        let q = PolyNN::monomial(2).unwrap();
        let n = t.primes().len() as u64;
        let mut e = engine_new(AverageScheme::PrimePoly(q), op, ones(1), Some(t)).unwrap();
        e.run_to(n).unwrap();
        assert!((e.average()[0] - c(0.0, 1.0)).norm() < 0.05);
    }

    fn naive_average(op: &Operator, x: &Vector, weights: &[(Complex64, u128)], denom: f64) -> Vector {
        let mut s = Vector::zeros(x.len());
        for (w, e) in weights {
            s += op.apply_power(*e, x).unwrap() * *w;
        }
        s.unscale(denom)
    }

    #[test]
    fn streaming_matches_batch() {
        let t = table(2000);
        let ops: Vec<Arc<Operator>> = vec![
            diag(&[Angle::frac_sqrt(2), Angle::rational(2, 7).unwrap(), Angle::rational(3, 1_000_003).unwrap()]),
            Arc::new(make_random_contraction(3, 9, None).unwrap()),
        ];
        let a = make_von_mangoldt(t.clone(), VonMangoldtKind::Full);
        for op in ops {
            let x = Vector::from_vec(vec![c(1.0, 0.5), c(-0.3, 2.0), c(0.7, 0.0)]);
            let n = 300u64;
            let schemes = [
                (AverageScheme::Cesaro, (1..=n).map(|k| (c(1.0, 0.0), k as u128)).collect::<Vec<_>>(), n as f64),
                (
                    AverageScheme::Modulated(a.clone()),
                    (1..=n).map(|k| (a.value(k).unwrap(), k as u128)).collect(),
                    n as f64,
                ),
                (
                    AverageScheme::PrimeLog,
                    t.primes().iter().filter(|&&p| p <= n).map(|&p| (c((p as f64).ln(), 0.0), p as u128)).collect(),
                    n as f64,
                ),
            ];
            for (scheme, weights, denom) in schemes {
                let mut e = engine_new(scheme, op.clone(), x.clone(), Some(t.clone())).unwrap();
                e.run_to(n).unwrap();
                let batch = naive_average(&op, &x, &weights, denom);
                assert!((e.average() - &batch).norm() <= 1e-9 * batch.norm().max(1e-300));
            }
        }
    }

    #[test]
    fn shift_window_is_enforced() {
        let w = 10;
        let op = Arc::new(make_truncated_shift(w).unwrap());
        let e1 = shift_basis(w, 1).unwrap();
        let mut e = engine_new(AverageScheme::Cesaro, op.clone(), e1.clone(), None).unwrap();
        e.advance(9).unwrap();
        assert!(matches!(e.advance(1), Err(Error::WindowExceeded { exponent: 10, slack: 9 })));
        let mut e = engine_new(AverageScheme::Cesaro, op.clone(), e1.clone(), None).unwrap();
        e.run_to(9).unwrap();
        let batch = naive_average(&op, &e1, &(1..=9).map(|k| (c(1.0, 0.0), k)).collect::<Vec<_>>(), 9.0);
        assert_eq!(e.average(), batch);
    }

    #[test]
    fn checkpoints_follow_grid() {
        let mut e = engine_new(AverageScheme::Cesaro, diag(&[Angle::ZERO]), ones(1), None).unwrap();
        e.run_to(100).unwrap();
        let idx: Vec<u64> = e.trace().checkpoints.iter().map(|c| c.index).collect();
        assert_eq!(idx, geometric_grid(10, 1.3, 100).unwrap());
        e.set_grid(vec![150, 200]).unwrap();
        e.run_to(200).unwrap();
        assert_eq!(e.trace().checkpoints.len(), idx.len() + 2);
        let mut csv = Vec::new();
        e.trace().write_csv(&mut csv, &[0]).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("N,re_0,im_0,norm\n10,1.0000000000000000e0,0.0000000000000000e0,1.0000000000000000e0\n"));
    }

    #[test]
    fn functionals_are_recorded() {
        let mut e = engine_new(AverageScheme::Cesaro, diag(&[Angle::ZERO, Angle::ZERO]), ones(2), None).unwrap();
        e.set_functionals(vec![Vector::from_vec(vec![c(0.0, 1.0), c(0.0, 0.0)])]).unwrap();
        e.run_to(3).unwrap();
        assert_eq!(e.trace().last().unwrap().functionals, vec![c(0.0, -1.0)]);
    }

    #[test]
    fn explicit_sequences_respect_their_length() {
        let a = ModSeq::explicit(vec![c(1.0, 0.0); 5]);
        let mut e = engine_new(AverageScheme::Modulated(a), diag(&[Angle::ZERO]), ones(1), None).unwrap();
        assert!(matches!(e.advance(6), Err(Error::HorizonExceeded { requested: 6, horizon: 5 })));
        e.advance(5).unwrap();
    }
}
