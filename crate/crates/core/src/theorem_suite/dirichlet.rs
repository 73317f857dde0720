//! `L^p` norms of Dirichlet sums `e_1 + … + e_n` against `√n`.

use super::report::CheckReport;
use crate::error::{Error, Result};
use crate::operator_zoo::{lp_norm_trig, TrigPoly};

/// Quadrature points; enough for every `n <= MAX_TERMS`.
pub const DIRICHLET_GRID: usize = 1 << 16;
pub const MAX_TERMS: usize = 128;
/// Relative quadrature tolerance on the comparison with `√n`.
pub const QUAD_TOL: f64 = 1e-6;

/// Number of `(a, b, c, d) ∈ [1, n]^4` with `a + b = c + d`.
pub fn additive_quadruples(n: u64) -> u64 {
    // r(s) = #{a + b = s} for s in 2..=2n
    (2..=2 * n).map(|s| (s - 1).min(2 * n + 1 - s)).map(|r| r * r).sum()
}

/// For `n = 1..=n_max`: `‖e_1 + … + e_n‖_p >= √n` when `p > 2` and `<= √n`
/// when `p < 2`; for `p = 4` the fourth power is the additive-quadruple count.
pub fn check_dirichlet_norm_growth(p: f64, n_max: usize) -> Result<CheckReport> {
    if !(p > 1.0 && p.is_finite()) || p == 2.0 {
        return Err(Error::Domain(format!("p = {p} must lie in (1, ∞) and differ from 2")));
    }
    if n_max == 0 || n_max > MAX_TERMS {
        return Err(Error::Invalid(format!("n_max = {n_max} must lie in 1..={MAX_TERMS}")));
    }
    let mut r = CheckReport::new(format!("dirichlet_norms/p={p}"));
    r.horizon(n_max as u64).bound("quadrature_tol", QUAD_TOL);
    let mut worst = f64::INFINITY;
    for n in 1..=n_max {
        let norm = lp_norm_trig(&TrigPoly::dirichlet(n), p, DIRICHLET_GRID)?;
        let root = (n as f64).sqrt();
        // positive margin means the expected side of √n
        let margin = if p > 2.0 { norm / root - 1.0 } else { 1.0 - norm / root };
        worst = worst.min(margin);
        r.assert(if p > 2.0 { "norm >= √n" } else { "norm <= √n" }, margin >= -QUAD_TOL);
        if p == 4.0 {
            let fourth = norm.powi(4).round() as u64;
            r.assert("fourth power equals the quadruple count", fourth == additive_quadruples(n as u64));
        }
        if n == n_max {
            r.measure("norm_at_n_max", norm).measure("sqrt_n_max", root);
        }
    }
    r.measure("min_margin", worst);
    Ok(r.conclude())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theorem_suite::report::Verdict;

    #[test]
    fn quadruples_brute_force() {
        for n in 1..=12u64 {
            let mut count = 0;
            for a in 1..=n {
                for b in 1..=n {
                    for c in 1..=n {
                        for d in 1..=n {
                            count += u64::from(a + b == c + d);
                        }
                    }
                }
            }
            assert_eq!(additive_quadruples(n), count);
        }
        // (2n³ + n)/3
        assert_eq!(additive_quadruples(16), (2 * 16u64.pow(3) + 16) / 3);
    }

    #[test]
    fn both_sides_of_two() {
        let r = check_dirichlet_norm_growth(4.0, 128).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
        let r = check_dirichlet_norm_growth(4.0 / 3.0, 128).unwrap();
        assert_eq!(r.verdict, Verdict::Pass, "{r:?}");
        assert!(r.measured["norm_at_n_max"] <= 128f64.sqrt());
        let r = check_dirichlet_norm_growth(3.0, 1).unwrap();
        assert!((r.measured["norm_at_n_max"] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn excluded_exponents() {
        assert!(matches!(check_dirichlet_norm_growth(2.0, 8), Err(Error::Domain(_))));
        assert!(matches!(check_dirichlet_norm_growth(1.0, 8), Err(Error::Domain(_))));
        assert!(check_dirichlet_norm_growth(4.0, 129).is_err());
    }
}
