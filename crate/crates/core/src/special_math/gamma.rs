//! Gamma function at positive integer arguments.
//!
//! Only integer arguments appear in the cascade-channel formulas, so the
//! factorial table is exact up to `Γ(171) = 170!` and the log-value is a
//! running sum of `ln i` beyond that.

use crate::error::{Error, Result};

/// Largest argument accepted by [`gamma_int`] / [`ln_gamma_int`].
pub const MAX_GAMMA_ARG: u32 = 512;

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `Γ(q) = (q-1)!` as a double. Overflows to `+inf` for `q > 171`.
pub fn gamma_int(q: u32) -> Result<f64> {
    check_arg(q)?;
    let mut acc = 1.0_f64;
    for i in 2..q {
        acc *= i as f64;
    }
    Ok(acc)
}

/// `ln Γ(q)`, finite for every accepted `q`.
pub fn ln_gamma_int(q: u32) -> Result<f64> {
    check_arg(q)?;
    Ok(ln_factorial(q - 1))
}

/// `ln n!` without argument checks.
pub(crate) fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|i| (i as f64).ln()).sum()
}

/// Digamma at a positive integer: `ψ(n) = -γ + H_{n-1}`.
pub(crate) fn digamma_int(n: u32) -> f64 {
    debug_assert!(n >= 1);
    let harmonic: f64 = (1..n).map(|i| 1.0 / i as f64).sum();
    harmonic - EULER_GAMMA
}

/// Binomial coefficient as a double.
pub(crate) fn binomial(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    let mut acc = 1.0_f64;
    for i in 0..k {
        acc = acc * (n - i) as f64 / (i + 1) as f64;
    }
    acc.round()
}

fn check_arg(q: u32) -> Result<()> {
    if q == 0 {
        return Err(Error::domain("gamma_int", "argument must be a positive integer"));
    }
    if q > MAX_GAMMA_ARG {
        return Err(Error::domain(
            "gamma_int",
            format!("argument {q} exceeds supported maximum {MAX_GAMMA_ARG}"),
        ));
    }
    Ok(())
}
