//! Distribution of the on-off cascaded gain `|H|² = |Σ_{m=1}^{Q} b_m* a_m|²`
//! and of its order statistics across `K` users.

use crate::error::{Error, Result};
use crate::special_math::{binomial, compensated_sum, ScaledBesselKernel};

/// Excursion outside `[0, 1]` tolerated before a probability is clamped.
pub const CLAMP_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CascadeParams {
    pub q: u32,
    /// First-hop variance, e.g. `N_br`.
    pub var_a: f64,
    /// Second-hop variance, e.g. `N_rk` or `N_re`.
    pub var_b: f64,
}

impl CascadeParams {
    pub fn new(q: u32, var_a: f64, var_b: f64) -> Result<Self> {
        let p = Self { q, var_a, var_b };
        p.check()?;
        Ok(p)
    }

    fn check(&self) -> Result<()> {
        if self.q == 0 {
            return Err(Error::domain("cascade_params", "q must be at least 1"));
        }
        if !(self.var_a > 0.0 && self.var_a.is_finite() && self.var_b > 0.0 && self.var_b.is_finite()) {
            return Err(Error::domain("cascade_params", "variances must be positive and finite"));
        }
        Ok(())
    }

    /// `var_a * var_b`, the scale of the normalized kernel argument.
    pub fn scale(&self) -> f64 {
        self.var_a * self.var_b
    }

    pub fn kernel(&self) -> Result<ScaledBesselKernel> {
        self.check()?;
        ScaledBesselKernel::new(self.q)
    }
}

fn check_z(op: &'static str, z: f64) -> Result<()> {
    if z < 0.0 || z.is_nan() {
        return Err(Error::domain(op, format!("argument must be non-negative, got {z}")));
    }
    Ok(())
}

pub fn cascade_pdf(z: f64, params: CascadeParams) -> Result<f64> {
    check_z("cascade_pdf", z)?;
    let kernel = params.kernel()?;
    let s = params.scale();
    Ok(kernel.density(z / s) / s)
}

pub fn cascade_cdf(z: f64, params: CascadeParams) -> Result<f64> {
    check_z("cascade_cdf", z)?;
    let kernel = params.kernel()?;
    Ok(kernel.cdf(z / params.scale()))
}

/// `κ = K! / ((K-k)! (k-1)!)`.
pub fn kappa(k: usize, user_count: usize) -> f64 {
    k as f64 * binomial(user_count as u32, k as u32)
}

fn check_rank(k: usize, user_count: usize) -> Result<()> {
    if k == 0 || k > user_count {
        return Err(Error::InvalidQuery(format!(
            "rank {k} outside 1..={user_count}"
        )));
    }
    Ok(())
}

/// Maps a parent CDF value `u` to the CDF of the `k`-th smallest of
/// `user_count` i.i.d. draws, by the alternating sum, without clamping.
pub fn ordered_from_parent_raw(u: f64, k: usize, user_count: usize) -> Result<f64> {
    check_rank(k, user_count)?;
    let m = user_count - k;
    let terms = (0..=m).map(|l| {
        let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
        sign * binomial(m as u32, l as u32) / (k + l) as f64 * u.powi((k + l) as i32)
    });
    Ok(kappa(k, user_count) * compensated_sum(terms))
}

/// The ordered CDF clamped to `[0, 1]`.
///
/// Above `u = 1/2` the alternating sum cancels to within a few ulps of 1, so
/// the complement `1 - Σ_{j<k} C(K,j) u^j (1-u)^{K-j}` is used instead.
pub fn ordered_from_parent(u: f64, k: usize, user_count: usize) -> Result<f64> {
    if u <= 0.5 {
        return Ok(clamp_probability(ordered_from_parent_raw(u, k, user_count)?));
    }
    check_rank(k, user_count)?;
    let v = 1.0 - u;
    let below = compensated_sum((0..k).map(|j| {
        binomial(user_count as u32, j as u32) * u.powi(j as i32) * v.powi((user_count - j) as i32)
    }));
    Ok(clamp_probability(1.0 - below))
}

/// Derivative of the ordered CDF with respect to the parent CDF value:
/// `κ u^{k-1} (1-u)^{K-k}`.
pub fn ordered_density_factor(u: f64, k: usize, user_count: usize) -> Result<f64> {
    check_rank(k, user_count)?;
    Ok(kappa(k, user_count) * u.powi(k as i32 - 1) * (1.0 - u).powi((user_count - k) as i32))
}

/// Alternating-sum ordered CDF before clamping.
pub fn cascade_cdf_ordered_raw(z: f64, k: usize, user_count: usize, params: CascadeParams) -> Result<f64> {
    let u = cascade_cdf(z, params)?;
    ordered_from_parent_raw(u, k, user_count)
}

/// CDF of the `k`-th smallest of `user_count` i.i.d. cascaded gains.
pub fn cascade_cdf_ordered(z: f64, k: usize, user_count: usize, params: CascadeParams) -> Result<f64> {
    ordered_from_parent(cascade_cdf(z, params)?, k, user_count)
}

/// `E|H|² = Q var_a var_b`.
pub fn mean_cascade_power(params: CascadeParams) -> f64 {
    params.q as f64 * params.scale()
}

pub(crate) fn clamp_probability(p: f64) -> f64 {
    p.clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special_math::integrate::{integrate, Tolerance};

    fn table_params(q: u32) -> CascadeParams {
        CascadeParams::new(q, 1.0 / 9.0, 1.0 / 16.0).unwrap()
    }

    #[test]
    fn pdf_normalizes_and_has_the_right_mean() {
        for q in [1, 4, 8] {
            for scale in [1.0, 1.0 / 9.0] {
                let p = CascadeParams::new(q, scale, if scale == 1.0 { 1.0 } else { 1.0 / 16.0 }).unwrap();
                let mean = mean_cascade_power(p);
                // z = mean * t/(1-t) maps [0,1) onto [0,∞).
                let mass = integrate(
                    |t| {
                        if t >= 1.0 {
                            return 0.0;
                        }
                        let z = mean * t / (1.0 - t);
                        cascade_pdf(z, p).unwrap() * mean / ((1.0 - t) * (1.0 - t))
                    },
                    0.0,
                    1.0,
                    Tolerance::default(),
                )
                .unwrap()
                .value;
                assert!((mass - 1.0).abs() < 1e-6, "q={q} mass={mass}");
                let first = integrate(
                    |t| {
                        if t >= 1.0 {
                            return 0.0;
                        }
                        let z = mean * t / (1.0 - t);
                        z * cascade_pdf(z, p).unwrap() * mean / ((1.0 - t) * (1.0 - t))
                    },
                    0.0,
                    1.0,
                    Tolerance::default(),
                )
                .unwrap()
                .value;
                assert!((first / mean - 1.0).abs() < 1e-6, "q={q} first={first}");
            }
        }
    }

    #[test]
    fn cdf_matches_integrated_pdf() {
        let p = table_params(8);
        let z = 8.0 / 144.0;
        let oracle = integrate(|x| cascade_pdf(x, p).unwrap(), 0.0, z, Tolerance::default())
            .unwrap()
            .value;
        assert!((cascade_cdf(z, p).unwrap() - oracle).abs() < 1e-8);
    }

    #[test]
    fn cdf_derivative_is_pdf() {
        for q in [1, 3, 8] {
            let p = table_params(q);
            let mean = mean_cascade_power(p);
            for factor in [0.01, 0.1, 0.5, 1.0, 3.0, 10.0] {
                let z = factor * mean;
                let h = 1e-5 * z;
                let fd = (cascade_cdf(z + h, p).unwrap() - cascade_cdf(z - h, p).unwrap()) / (2.0 * h);
                let pdf = cascade_pdf(z, p).unwrap();
                assert!((fd / pdf - 1.0).abs() < 1e-5, "q={q} z={z} fd={fd} pdf={pdf}");
            }
        }
    }

    #[test]
    fn boundary_values_and_domain() {
        let p = table_params(8);
        assert_eq!(cascade_cdf(0.0, p).unwrap(), 0.0);
        assert_eq!(cascade_cdf(1e6, p).unwrap(), 1.0);
        assert!(cascade_cdf(-1.0, p).is_err());
        assert!(cascade_pdf(-1e-9, p).is_err());
        assert!(CascadeParams::new(0, 1.0, 1.0).is_err());
        assert!(CascadeParams::new(2, 0.0, 1.0).is_err());
    }

    #[test]
    fn order_statistic_identities() {
        let p = table_params(8);
        let z = 0.03;
        let u = cascade_cdf(z, p).unwrap();
        assert_eq!(cascade_cdf_ordered(z, 1, 1, p).unwrap(), u);
        assert!((cascade_cdf_ordered(z, 3, 3, p).unwrap() - u.powi(3)).abs() < 1e-15);
        assert!((ordered_from_parent(0.5, 1, 3).unwrap() - 0.875).abs() < 1e-15);
        assert!(cascade_cdf_ordered(z, 0, 3, p).is_err());
        assert!(cascade_cdf_ordered(z, 4, 3, p).is_err());
    }

    #[test]
    fn mean_power_examples() {
        let p = CascadeParams::new(8, 1.0 / 9.0, 1.0 / 64.0).unwrap();
        assert!((mean_cascade_power(p) - 1.0 / 72.0).abs() < 1e-17);
        assert_eq!(mean_cascade_power(CascadeParams::new(1, 1.0, 1.0).unwrap()), 1.0);
    }

    #[test]
    fn kappa_values() {
        assert_eq!(kappa(1, 3), 3.0);
        assert_eq!(kappa(2, 3), 6.0);
        assert_eq!(kappa(3, 3), 3.0);
    }
}
