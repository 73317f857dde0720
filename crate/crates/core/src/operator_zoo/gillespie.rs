//! The multiplier `c_n ↦ e^{2πi α_n / 3} c_n`, `α_n = nα − ⌊nα⌋`, on
//! trigonometric polynomials of degree at most `W`, measured in `L^p`.
//! Its cube is the rotation by `α`.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::operator::{Operator, Vector};
use super::trig::{lp_norm_samples, TrigPoly};
use crate::angle::Angle;
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct GillespieMultiplier {
    alpha: Angle,
    window: u64,
    p: f64,
    grid: usize,
    /// `α_n / 3` for `n = -W..=W`.
    angles: Vec<Angle>,
}

/// Coefficient vectors are indexed by frequency `n ∈ [-W, W]` at position `n + W`.
pub fn make_gillespie_multiplier(alpha: Angle, window: u64, p: f64, grid: usize) -> Result<Operator> {
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::Domain(format!("exponent p = {p} must be a finite real > 1")));
    }
    if alpha == Angle::ZERO {
        return Err(Error::Domain("α must lie in (0, 1)".into()));
    }
    if window == 0 {
        return Err(Error::Invalid("Fourier window must be >= 1".into()));
    }
    let needed = 8 * window as usize;
    if grid < needed {
        return Err(Error::Aliasing { grid, needed });
    }
    let w = window as i128;
    let angles = (-w..=w).map(|n| alpha.times_signed(n).divide(3).expect("3 > 0")).collect();
    Ok(Operator::Gillespie(GillespieMultiplier { alpha, window, p, grid, angles }))
}

/// Settings of the randomized `‖T^k‖_{p→p}` search.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormSearch {
    /// Random unit polynomials tried per power.
    pub samples: usize,
    /// Best samples refined by dual-map ascent.
    pub ascent_starts: usize,
    pub ascent_steps: usize,
    pub seed: u64,
}

impl Default for NormSearch {
    fn default() -> Self {
        NormSearch { samples: 200, ascent_starts: 3, ascent_steps: 25, seed: 0x5eed }
    }
}

/// Lower-bound estimate of `‖T^k‖` with the polynomial that attains it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormEstimate {
    pub power: i64,
    pub value: f64,
    pub method: String,
}

impl GillespieMultiplier {
    pub fn alpha(&self) -> Angle {
        self.alpha
    }

    pub fn window(&self) -> u64 {
        self.window
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn dim(&self) -> usize {
        self.angles.len()
    }

    pub fn angles(&self) -> &[Angle] {
        &self.angles
    }

    /// Multiplier angles `nα mod 1` of the rotation.
    pub fn rotation_angles(&self) -> Vec<Angle> {
        let w = self.window as i128;
        (-w..=w).map(|n| self.alpha.times_signed(n)).collect()
    }

    fn poly(&self, c: &[Complex64]) -> TrigPoly {
        TrigPoly::new(-(self.window as i64), c.to_vec())
    }

    /// `L^p` norm of `Σ c_n e_n` on the configured grid.
    pub fn lp_norm(&self, c: &Vector) -> Result<f64> {
        if c.len() != self.dim() {
            return Err(Error::DimMismatch { expected: self.dim(), got: c.len() });
        }
        Ok(lp_norm_samples(&self.poly(c.as_slice()).sample(self.grid), self.p))
    }

    fn multipliers(&self, k: i64) -> Vec<Complex64> {
        self.angles.iter().map(|a| a.times_signed(k as i128).unit()).collect()
    }

    fn norm_of(&self, c: &[Complex64]) -> f64 {
        lp_norm_samples(&self.poly(c).sample(self.grid), self.p)
    }

    fn ratio(&self, m: &[Complex64], c: &[Complex64]) -> f64 {
        let image: Vec<Complex64> = m.iter().zip(c).map(|(a, b)| a * b).collect();
        self.norm_of(&image) / self.norm_of(c)
    }

    /// `|g|^{r-1} sgn g` on the grid, projected back onto the window.
    fn dual_map(&self, c: &[Complex64], r: f64) -> Vec<Complex64> {
        let w = self.window as i64;
        let samples: Vec<Complex64> = self
            .poly(c)
            .sample(self.grid)
            .into_iter()
            .map(|z| {
                let a = z.norm();
                if a == 0.0 {
                    z
                } else {
                    z * a.powf(r - 2.0)
                }
            })
            .collect();
        TrigPoly::from_samples(&samples, -w, w).coeffs
    }

    /// `f ↦ J_{p'}(T^{k*} J_p(T^k f))`: one step of Boyd's power method for
    /// the `p → p` norm, restricted to the window.
    fn ascent_step(&self, m: &[Complex64], c: &[Complex64]) -> Vec<Complex64> {
        let q = self.p / (self.p - 1.0);
        let image: Vec<Complex64> = m.iter().zip(c).map(|(a, b)| a * b).collect();
        let dual = self.dual_map(&image, self.p);
        let back: Vec<Complex64> = m.iter().zip(&dual).map(|(a, b)| a.conj() * b).collect();
        let next = self.dual_map(&back, q);
        let n = self.norm_of(&next);
        if n > 0.0 && n.is_finite() {
            next.iter().map(|z| z / n).collect()
        } else {
            c.to_vec()
        }
    }

    fn random_start(&self, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
        (0..self.dim())
            .map(|_| {
                let re: f64 = StandardNormal.sample(rng);
                let im: f64 = StandardNormal.sample(rng);
                Complex64::new(re, im)
            })
            .collect()
    }

    /// Largest ratio `‖T^k f‖_p / ‖f‖_p` found over seeded random starts plus
    /// the Dirichlet kernel, refined by dual-map ascent. Always a lower bound.
    pub fn power_norm_estimate(&self, k: i64, search: &NormSearch) -> Result<NormEstimate> {
        if search.samples == 0 {
            return Err(Error::Invalid("norm search needs at least one sample".into()));
        }
        let m = self.multipliers(k);
        let mut rng = ChaCha8Rng::seed_from_u64(search.seed);
        let mut starts: Vec<Vec<Complex64>> = (0..search.samples).map(|_| self.random_start(&mut rng)).collect();
        starts.push(vec![Complex64::new(1.0, 0.0); self.dim()]);
        let mut scored: Vec<(f64, usize)> = starts.iter().enumerate().map(|(i, c)| (self.ratio(&m, c), i)).collect();
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        let mut best = scored[0].0;
        for &(_, i) in scored.iter().take(search.ascent_starts) {
            let mut c = starts[i].clone();
            for _ in 0..search.ascent_steps {
                c = self.ascent_step(&m, &c);
                best = best.max(self.ratio(&m, &c));
            }
        }
        Ok(NormEstimate {
            power: k,
            value: best,
            method: format!(
                "max ratio over {} seeded random polynomials and the Dirichlet kernel, {} dual-map ascent steps from the best {} (lower bound)",
                search.samples, search.ascent_steps, search.ascent_starts
            ),
        })
    }

    /// Estimates for every power `|k| <= max_power`.
    pub fn power_norm_profile(&self, max_power: u64, search: &NormSearch) -> Result<Vec<NormEstimate>> {
        use rayon::prelude::*;
        let m = max_power as i64;
        (-m..=m).into_par_iter().map(|k| self.power_norm_estimate(k, search)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gillespie(p: f64, window: u64) -> GillespieMultiplier {
        match make_gillespie_multiplier(Angle::frac_sqrt(2), window, p, 8 * window as usize).unwrap() {
            Operator::Gillespie(g) => g,
            _ => unreachable!(),
        }
    }

    #[test]
    fn cube_is_rotation() {
        let g = gillespie(4.0, 64);
        for (a, r) in g.angles().iter().zip(g.rotation_angles()) {
            let cube = a.times(3).unit();
            assert!((cube - r.unit()).norm() < 1e-12);
        }
        let op = Operator::Gillespie(g.clone());
        let x = Vector::from_fn(g.dim(), |i, _| Complex64::new(i as f64, 1.0));
        let y = op.apply_power(3, &x).unwrap();
        for (i, r) in g.rotation_angles().iter().enumerate() {
            assert!((y[i] - r.unit() * x[i]).norm() < 1e-12 * x[i].norm().max(1.0));
        }
    }

    #[test]
    fn multiplier_uses_fractional_part() {
        let g = gillespie(3.0, 4);
        let alpha = 2f64.sqrt() - 1.0;
        for (i, a) in g.angles().iter().enumerate() {
            let n = i as f64 - 4.0;
            let frac = n * alpha - (n * alpha).floor();
            assert!((a.turns() - frac / 3.0).abs() < 1e-14);
        }
    }

    #[test]
    fn isometric_in_l2() {
        let g = gillespie(2.0, 16);
        let op = Operator::Gillespie(g.clone());
        let x = Vector::from_fn(g.dim(), |i, _| Complex64::new((i as f64).cos(), 0.5));
        let y = op.apply(&x).unwrap();
        assert!((g.lp_norm(&y).unwrap() - g.lp_norm(&x).unwrap()).abs() < 1e-9);
        assert_eq!(op.power_bound().unwrap().value, 1.0);
    }

    #[test]
    fn domain_and_grid_errors() {
        assert!(matches!(make_gillespie_multiplier(Angle::frac_sqrt(2), 8, 1.0, 64), Err(Error::Domain(_))));
        assert!(matches!(make_gillespie_multiplier(Angle::frac_sqrt(2), 8, 0.5, 64), Err(Error::Domain(_))));
        assert!(matches!(
            make_gillespie_multiplier(Angle::frac_sqrt(2), 8, 4.0, 63),
            Err(Error::Aliasing { grid: 63, needed: 64 })
        ));
    }

    #[test]
    fn powers_bounded_by_first_two() {
        let g = gillespie(4.0, 64);
        let search = NormSearch { samples: 40, ..NormSearch::default() };
        let profile = g.power_norm_profile(60, &search).unwrap();
        let at = |k: i64| profile.iter().find(|e| e.power == k).unwrap().value;
        let cap = 1f64.max(at(1)).max(at(2));
        assert!(at(1) >= 1.0);
        for e in &profile {
            assert!(e.value.is_finite());
            assert!(e.value <= cap * (1.0 + 1e-9), "k = {}: {} > {cap}", e.power, e.value);
        }
    }
}
