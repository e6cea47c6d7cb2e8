//! The scaled Bessel kernel shared by every cascade-channel expression.
//!
//! For a sum of `q` products of independent unit-variance complex Gaussians,
//! the squared magnitude `u` has
//!
//! ```text
//! survival  S(u) = (2 / Γ(q)) u^{q/2}     K_q(2√u)
//! density   f(u) = (2 / Γ(q)) u^{(q-1)/2} K_{q-1}(2√u)
//! ```
//!
//! Both are evaluated in log-domain. The CDF `1 - S(u)` is taken from an
//! ascending series for `u <= 1` so that small outage probabilities keep full
//! relative precision instead of cancelling against 1.

use super::bessel::{ln_bessel_k_unchecked, MAX_BESSEL_ORDER};
use super::gamma::{digamma_int, ln_factorial};
use crate::error::{Error, Result};

const SERIES_LIMIT: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledBesselKernel {
    q: u32,
    /// ln 2 - ln Γ(q)
    ln_norm: f64,
    /// ln (q-1)!
    ln_fact_qm1: f64,
    ln_fact_q: f64,
}

impl ScaledBesselKernel {
    pub fn new(q: u32) -> Result<Self> {
        if q == 0 || q > MAX_BESSEL_ORDER {
            return Err(Error::domain(
                "scaled_bessel_kernel",
                format!("group size must lie in 1..={MAX_BESSEL_ORDER}, got {q}"),
            ));
        }
        let ln_fact_qm1 = ln_factorial(q - 1);
        Ok(Self {
            q,
            ln_norm: std::f64::consts::LN_2 - ln_fact_qm1,
            ln_fact_qm1,
            ln_fact_q: ln_fact_qm1 + (q as f64).ln(),
        })
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    /// `ln S(u)`; zero at `u = 0`.
    pub fn ln_survival(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        if u.is_infinite() {
            return f64::NEG_INFINITY;
        }
        let ln = self.ln_norm
            + 0.5 * self.q as f64 * u.ln()
            + ln_bessel_k_unchecked(self.q, 2.0 * u.sqrt());
        ln.min(0.0)
    }

    /// `S(u) = 1 - F(u)`.
    pub fn survival(&self, u: f64) -> f64 {
        if u <= SERIES_LIMIT {
            1.0 - self.cdf_series(u.max(0.0))
        } else {
            self.ln_survival(u).exp()
        }
    }

    /// `F(u) = 1 - S(u)`, with full relative accuracy as `u -> 0`.
    pub fn cdf(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        if u <= SERIES_LIMIT {
            self.cdf_series(u).clamp(0.0, 1.0)
        } else {
            (1.0 - self.ln_survival(u).exp()).clamp(0.0, 1.0)
        }
    }

    /// `f(u) = dF/du`.
    pub fn density(&self, u: f64) -> f64 {
        self.ln_density(u).exp()
    }

    pub fn ln_density(&self, u: f64) -> f64 {
        if u < 0.0 || u.is_infinite() {
            return f64::NEG_INFINITY;
        }
        if u == 0.0 {
            // (2/Γ(q)) lim u^{(q-1)/2} K_{q-1}(2√u) = 1/(q-1) for q >= 2
            return if self.q == 1 {
                f64::INFINITY
            } else {
                -((self.q - 1) as f64).ln()
            };
        }
        self.ln_norm
            + 0.5 * (self.q - 1) as f64 * u.ln()
            + ln_bessel_k_unchecked(self.q - 1, 2.0 * u.sqrt())
    }

    /// Ascending series of `1 - S(u)` from the integer-order expansion of `K_q`:
    ///
    /// ```text
    /// F(u) = Σ_{j=1}^{q-1} (-1)^{j+1} (q-j-1)! / (j! (q-1)!) u^j
    ///      + (-1)^q u^q / (q-1)! Σ_{j>=0} [ln u - ψ(j+1) - ψ(q+j+1)] u^j / (j! (q+j)!)
    /// ```
    fn cdf_series(&self, u: f64) -> f64 {
        if u == 0.0 {
            return 0.0;
        }
        let q = self.q;
        let mut poly = 0.0;
        if q >= 2 {
            let mut term = u / (q - 1) as f64;
            poly = term;
            for j in 1..(q - 1) {
                term *= -u / ((j + 1) as f64 * (q - j - 1) as f64);
                poly += term;
                if term.abs() < 1e-18 * poly.abs() {
                    break;
                }
            }
        }

        let ln_u = u.ln();
        let ln_pref = q as f64 * ln_u - self.ln_fact_qm1 - self.ln_fact_q;
        if ln_pref < -745.0 {
            return poly;
        }
        let pref = ln_pref.exp();
        let mut psi_a = digamma_int(1);
        let mut psi_b = digamma_int(q + 1);
        let mut weight = 1.0; // u^j / (j! (q+j)!) relative to j = 0
        let mut sum = ln_u - psi_a - psi_b;
        for j in 0..200u32 {
            let jf = j as f64;
            weight *= u / ((jf + 1.0) * (q as f64 + jf + 1.0));
            psi_a += 1.0 / (jf + 1.0);
            psi_b += 1.0 / (q as f64 + jf + 1.0);
            let t = weight * (ln_u - psi_a - psi_b);
            sum += t;
            if t.abs() < 1e-18 * sum.abs() {
                break;
            }
        }
        let sign = if q % 2 == 0 { 1.0 } else { -1.0 };
        poly + sign * pref * sum
    }
}
