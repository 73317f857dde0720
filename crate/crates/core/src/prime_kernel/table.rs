use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::sum::KahanSum;

/// Largest horizon a table may be built for. At this size the bitset takes
/// about 6 MB and the prime list with its cumulative theta about 90 MB.
pub const MAX_HORIZON: u64 = 100_000_000;

const CACHE_MAGIC: &[u8; 8] = b"MODAVGPT";
const CACHE_VERSION: u32 = 1;

/// Sieve-backed prime oracle on `[1, horizon]`.
///
/// Odd numbers only are stored: bit `i` of the packed bitset is set iff
/// `2i + 1` is prime. A per-word popcount prefix gives `π(n)` in O(1), and
/// `theta[j]` holds `Σ_{i<j} log p_i` so that `θ(n) = theta[π(n)]`.
#[derive(Clone, Debug)]
pub struct PrimeTable {
    horizon: u64,
    odd_bits: Vec<u64>,
    rank: Vec<u32>,
    primes: Vec<u64>,
    theta: Vec<f64>,
}

impl PrimeTable {
    pub fn new(horizon: u64) -> Result<Self> {
        if horizon < 2 {
            return Err(Error::InvalidHorizon(horizon));
        }
        if horizon > MAX_HORIZON {
            return Err(Error::Resource { requested: horizon, bound: MAX_HORIZON });
        }
        let n_odd = (horizon as usize - 1) / 2 + 1; // odds 1, 3, ..., <= horizon
        let words = n_odd.div_ceil(64);
        let mut bits = vec![u64::MAX; words];
        // trim bits past the horizon and clear 1
        let extra = words * 64 - n_odd;
        if extra > 0 {
            bits[words - 1] &= u64::MAX >> extra;
        }
        bits[0] &= !1;

        let mut i = 1usize;
        loop {
            let p = 2 * i + 1;
            if (p as u64) * (p as u64) > horizon {
                break;
            }
            if bits[i / 64] >> (i % 64) & 1 == 1 {
                let mut j = (p * p - 1) / 2;
                while j < n_odd {
                    bits[j / 64] &= !(1u64 << (j % 64));
                    j += p;
                }
            }
            i += 1;
        }
        Ok(Self::from_bits(horizon, bits))
    }

    fn from_bits(horizon: u64, odd_bits: Vec<u64>) -> Self {
        let mut rank = Vec::with_capacity(odd_bits.len() + 1);
        let mut running = 0u32;
        for w in &odd_bits {
            rank.push(running);
            running += w.count_ones();
        }
        rank.push(running);

        let mut primes = Vec::with_capacity(running as usize + 1);
        primes.push(2);
        for (wi, &w) in odd_bits.iter().enumerate() {
            let mut w = w;
            while w != 0 {
                let b = w.trailing_zeros() as u64;
                primes.push(2 * (wi as u64 * 64 + b) + 1);
                w &= w - 1;
            }
        }

        let mut theta = Vec::with_capacity(primes.len() + 1);
        let mut acc = KahanSum::new();
        theta.push(0.0);
        for &p in &primes {
            acc.add((p as f64).ln());
            theta.push(acc.value());
        }
        PrimeTable { horizon, odd_bits, rank, primes, theta }
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn primes(&self) -> &[u64] {
        &self.primes
    }

    fn check(&self, n: u64) -> Result<()> {
        if n > self.horizon {
            Err(Error::HorizonExceeded { requested: n, horizon: self.horizon })
        } else {
            Ok(())
        }
    }

    /// Unchecked membership; `n` must not exceed the horizon.
    #[inline]
    pub(crate) fn is_prime_unchecked(&self, n: u64) -> bool {
        if n < 3 {
            return n == 2;
        }
        if n.is_multiple_of(2) {
            return false;
        }
        let i = (n / 2) as usize;
        self.odd_bits[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn is_prime(&self, n: u64) -> Result<bool> {
        self.check(n)?;
        Ok(self.is_prime_unchecked(n))
    }

    #[inline]
    pub(crate) fn prime_count_unchecked(&self, n: u64) -> usize {
        if n < 2 {
            return 0;
        }
        // odd indices 0..=i_max, bit 0 (the number 1) is never set
        let i_max = ((n - 1) / 2) as usize;
        let w = i_max / 64;
        let b = i_max % 64;
        let mask = if b == 63 { u64::MAX } else { (1u64 << (b + 1)) - 1 };
        1 + self.rank[w] as usize + (self.odd_bits[w] & mask).count_ones() as usize
    }

    /// `π(n)`.
    pub fn prime_count(&self, n: u64) -> Result<usize> {
        self.check(n)?;
        Ok(self.prime_count_unchecked(n))
    }

    /// `p_j`, one-based.
    pub fn nth_prime(&self, j: usize) -> Result<u64> {
        if j == 0 || j > self.primes.len() {
            return Err(Error::HorizonExceeded {
                requested: j as u64,
                horizon: self.primes.len() as u64,
            });
        }
        Ok(self.primes[j - 1])
    }

    /// `θ(n) = Σ_{p ≤ n} log p`.
    pub fn theta(&self, n: u64) -> Result<f64> {
        Ok(self.theta[self.prime_count(n)?])
    }

    /// `Σ_{j ≤ count} log p_j`.
    pub fn theta_by_count(&self, count: usize) -> f64 {
        self.theta[count.min(self.primes.len())]
    }

    /// `Λ'(n) = 1_P(n) log n`.
    pub fn von_mangoldt_prime(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::Domain("Λ' is defined for n >= 1".into()));
        }
        self.check(n)?;
        Ok(if self.is_prime_unchecked(n) { (n as f64).ln() } else { 0.0 })
    }

    /// `Λ(n)`: `log p` when `n = p^k`, else 0. Prime powers are recognised
    /// by extracting integer roots at query time.
    pub fn von_mangoldt(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::Domain("Λ is defined for n >= 1".into()));
        }
        self.check(n)?;
        Ok(self.von_mangoldt_unchecked(n))
    }

    pub(crate) fn von_mangoldt_unchecked(&self, n: u64) -> f64 {
        if n < 2 {
            return 0.0;
        }
        if self.is_prime_unchecked(n) {
            return (n as f64).ln();
        }
        let max_k = 63 - n.leading_zeros();
        for k in 2..=max_k {
            if let Some(r) = exact_root(n, k) {
                if self.is_prime_unchecked(r) {
                    return (r as f64).ln();
                }
            }
        }
        0.0
    }

    /// `π(x; q, a) = #{p ≤ x : p ≡ a mod q}`.
    pub fn prime_count_progression(&self, x: u64, q: u64, a: u64) -> Result<usize> {
        if q == 0 {
            return Err(Error::InvalidModulus);
        }
        if a >= q {
            return Err(Error::Invalid(format!("residue {a} must lie in [0, {q})")));
        }
        let count = self.prime_count(x)?;
        Ok(self.primes[..count].iter().filter(|&&p| p % q == a).count())
    }

    /// `Σ_{j ≤ π(N)} |1/π(N) − log p_j / N|`: the supremum over sequences
    /// bounded by 1 of the gap between the prime average and the
    /// `Λ'`-weighted average at `N`.
    pub fn lambda_prime_uniform_gap(&self, n: u64) -> Result<f64> {
        if n < 2 {
            return Err(Error::Domain(format!("uniform gap needs N >= 2, got {n}")));
        }
        let count = self.prime_count(n)?;
        let inv = 1.0 / count as f64;
        let nf = n as f64;
        Ok(self.primes[..count]
            .iter()
            .map(|&p| (inv - (p as f64).ln() / nf).abs())
            .collect::<KahanSum>()
            .value())
    }

    /// `(1/N) Σ_{k ≤ N} Λ'(k) = θ(N)/N`.
    pub fn mean_von_mangoldt_prime(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::Domain("mean over an empty range".into()));
        }
        Ok(self.theta(n)? / n as f64)
    }

    /// `ψ(N) − θ(N) = Σ_{p^k ≤ N, k ≥ 2} log p`.
    pub fn psi_minus_theta(&self, n: u64) -> Result<f64> {
        self.check(n)?;
        let mut acc = KahanSum::new();
        for &p in &self.primes {
            let Some(mut pk) = p.checked_mul(p) else { break };
            if pk > n {
                break;
            }
            let lp = (p as f64).ln();
            while pk <= n {
                acc.add(lp);
                match pk.checked_mul(p) {
                    Some(next) => pk = next,
                    None => break,
                }
            }
        }
        Ok(acc.value())
    }

    /// `(1/N) Σ_{k ≤ N} (Λ(k) − Λ'(k))`.
    pub fn mean_lambda_gap(&self, n: u64) -> Result<f64> {
        if n == 0 {
            return Err(Error::Domain("mean over an empty range".into()));
        }
        Ok(self.psi_minus_theta(n)? / n as f64)
    }

    /// Versioned header followed by the packed odd bitset, little endian.
    pub fn write_cache<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(CACHE_MAGIC)?;
        w.write_all(&CACHE_VERSION.to_le_bytes())?;
        w.write_all(&self.horizon.to_le_bytes())?;
        w.write_all(&(self.odd_bits.len() as u64).to_le_bytes())?;
        for word in &self.odd_bits {
            w.write_all(&word.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_cache<R: Read>(mut r: R) -> Result<Self> {
        let bad = |m: &str| Error::Invalid(format!("prime table cache: {m}"));
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != CACHE_MAGIC {
            return Err(bad("bad magic"));
        }
        let mut b4 = [0u8; 4];
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b4)?;
        if u32::from_le_bytes(b4) != CACHE_VERSION {
            return Err(bad("unsupported version"));
        }
        r.read_exact(&mut b8)?;
        let horizon = u64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let words = u64::from_le_bytes(b8) as usize;
        if !(2..=MAX_HORIZON).contains(&horizon) || words != ((horizon as usize - 1) / 2 + 1).div_ceil(64)
        {
            return Err(bad("inconsistent header"));
        }
        let mut bits = Vec::with_capacity(words);
        for _ in 0..words {
            r.read_exact(&mut b8)?;
            bits.push(u64::from_le_bytes(b8));
        }
        Ok(Self::from_bits(horizon, bits))
    }
}

/// `r` with `r^k = n`, if any.
fn exact_root(n: u64, k: u32) -> Option<u64> {
    let guess = (n as f64).powf(1.0 / k as f64).round() as u64;
    (guess.saturating_sub(1)..=guess + 1).find(|&r| r >= 2 && r.checked_pow(k) == Some(n))
}
