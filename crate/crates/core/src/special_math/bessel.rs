//! Modified Bessel function of the second kind, integer order.
//!
//! `K_0` and `K_1` come from the ascending series for `x <= BESSEL_SEAM` and
//! from Steed's continued fraction (exponentially scaled) above it. Higher
//! orders follow the upward recurrence, which is stable for `K`; it is run
//! on the ratio `K_{n}/K_{n-1}` so that orders up to 512 stay in log-domain.

use std::f64::consts::PI;

use super::gamma::EULER_GAMMA;
use crate::error::{Error, Result};

/// Largest order accepted by [`bessel_k`] and [`ln_bessel_k`].
pub const MAX_BESSEL_ORDER: u32 = 512;

/// Crossover between the ascending series and the continued fraction.
pub const BESSEL_SEAM: f64 = 2.0;

const CF_MAX_ITER: usize = 10_000;

/// `K_order(x)`.
///
/// Returns `+inf` when the true value exceeds `f64::MAX` (tiny `x`, large
/// order) and `0.0` when it underflows (large `x`).
pub fn bessel_k(order: u32, x: f64) -> Result<f64> {
    ln_bessel_k(order, x).map(f64::exp)
}

/// `ln K_order(x)`, finite for every `x > 0` and order `<= 512`.
pub fn ln_bessel_k(order: u32, x: f64) -> Result<f64> {
    check_args(order, x)?;
    Ok(ln_bessel_k_unchecked(order, x))
}

pub(crate) fn ln_bessel_k_unchecked(order: u32, x: f64) -> f64 {
    let (k0s, k1s) = k0_k1_scaled(x);
    let ln_k0 = k0s.ln() - x;
    if order == 0 {
        return ln_k0;
    }
    // r_n = K_n / K_{n-1};  r_{n+1} = 1 / r_n + 2n / x
    let mut ratio = k1s / k0s;
    let mut prod = ratio;
    let mut ln_acc = ln_k0;
    for n in 1..order {
        ratio = 1.0 / ratio + 2.0 * n as f64 / x;
        prod *= ratio;
        if !(1e-250..=1e250).contains(&prod) {
            ln_acc += prod.ln();
            prod = 1.0;
        }
    }
    ln_acc + prod.ln()
}

/// `(e^x K_0(x), e^x K_1(x))`, dispatching on [`BESSEL_SEAM`].
pub(crate) fn k0_k1_scaled(x: f64) -> (f64, f64) {
    if x <= BESSEL_SEAM {
        let (k0, k1) = k0_k1_series(x);
        let e = x.exp();
        (k0 * e, k1 * e)
    } else {
        k0_k1_continued_fraction(x)
    }
}

/// Ascending series for `K_0`, `K_1` (unscaled). Accurate for `x <~ 2`.
pub(crate) fn k0_k1_series(x: f64) -> (f64, f64) {
    let t = 0.25 * x * x;
    let ln_half = (0.5 * x).ln();

    // K_0 = -(ln(x/2) + γ) I_0 + Σ_{k>=1} H_k t^k / (k!)^2
    let mut term = 1.0; // t^k / (k!)^2
    let mut i0 = 1.0;
    let mut harmonic = 0.0;
    let mut tail0 = 0.0;
    // K_1 = 1/x + ln(x/2) I_1 - (x/4) Σ_{j>=0} (ψ(j+1) + ψ(j+2)) t^j / (j! (j+1)!)
    let mut term1 = 1.0; // t^j / (j! (j+1)!)
    let mut i1_sum = 1.0;
    let mut psi_a = -EULER_GAMMA; // ψ(j+1)
    let mut psi_b = 1.0 - EULER_GAMMA; // ψ(j+2)
    let mut tail1 = psi_a + psi_b;

    for k in 1..200 {
        let kf = k as f64;
        term *= t / (kf * kf);
        harmonic += 1.0 / kf;
        i0 += term;
        tail0 += harmonic * term;

        term1 *= t / (kf * (kf + 1.0));
        psi_a += 1.0 / kf;
        psi_b += 1.0 / (kf + 1.0);
        i1_sum += term1;
        tail1 += (psi_a + psi_b) * term1;

        if term < 1e-18 * i0 && term1 < 1e-18 * i1_sum {
            break;
        }
    }
    let k0 = -(ln_half + EULER_GAMMA) * i0 + tail0;
    let i1 = 0.5 * x * i1_sum;
    let k1 = 1.0 / x + ln_half * i1 - 0.25 * x * tail1;
    (k0, k1)
}

/// Steed's continued fraction for the scaled pair `(e^x K_0, e^x K_1)`.
/// Converges quickly for `x >= 2`.
pub(crate) fn k0_k1_continued_fraction(x: f64) -> (f64, f64) {
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 1..CF_MAX_ITER {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    h *= a1;
    let k0s = (PI / (2.0 * x)).sqrt() / s;
    let k1s = k0s * (x + 0.5 - h) / x;
    (k0s, k1s)
}

fn check_args(order: u32, x: f64) -> Result<()> {
    if !(x > 0.0) {
        return Err(Error::domain(
            "bessel_k",
            format!("argument must be positive, got {x}"),
        ));
    }
    if order > MAX_BESSEL_ORDER {
        return Err(Error::domain(
            "bessel_k",
            format!("order {order} exceeds supported maximum {MAX_BESSEL_ORDER}"),
        ));
    }
    Ok(())
}
