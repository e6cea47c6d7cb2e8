//! Laguerre polynomials and Gauss-Laguerre rules for `∫₀^∞ e^{-t} f(t) dt`.

use crate::error::{Error, Result};

use super::sum::CompensatedSum;

/// Largest rule order accepted by [`gauss_laguerre`].
pub const MAX_RULE_ORDER: usize = 512;

const NEWTON_MAX_ITER: usize = 100;
const NEWTON_STEP_TOL: f64 = 1e-14;

/// `(L_n(x), L_n'(x))` by the three-term recurrence.
///
/// The derivative uses `L_n' = L_{n-1}' - L_{n-1}`, which stays finite at
/// `x = 0` where the usual `n (L_n - L_{n-1}) / x` form does not.
pub fn laguerre_eval(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 0.0; // L_{-1}
    let mut p = 1.0; // L_0
    let mut d = 0.0;
    for k in 0..n {
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0 - x) * p - kf * p_prev) / (kf + 1.0);
        let d_next = d - p;
        p_prev = p;
        p = p_next;
        d = d_next;
    }
    (p, d)
}

/// `L_n(x)` and `L_n'(x)` sharing an undisclosed positive scale, plus
/// `ln|L_{n+1}(x)|`. Large intermediate values are rescaled so nothing overflows.
fn laguerre_scaled(n: usize, x: f64) -> (f64, f64, f64) {
    let mut p_prev = 0.0;
    let mut p = 1.0;
    let mut d = 0.0;
    let mut ln_scale = 0.0;
    let mut at_n = (1.0, 0.0);
    for k in 0..=n {
        if k == n {
            at_n = (p, d);
        }
        let kf = k as f64;
        let p_next = ((2.0 * kf + 1.0 - x) * p - kf * p_prev) / (kf + 1.0);
        let d_next = d - p;
        p_prev = p;
        p = p_next;
        d = d_next;
        let mag = p.abs().max(p_prev.abs());
        if mag > 1e150 {
            p /= mag;
            p_prev /= mag;
            d /= mag;
            ln_scale += mag.ln();
        }
    }
    (at_n.0, at_n.1, p.abs().ln() + ln_scale)
}

/// A Gauss-Laguerre rule: `Σ w_d f(τ_d) ≈ ∫₀^∞ e^{-t} f(t) dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    order: usize,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    log_weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Ascending roots of `L_D`.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights as doubles. Weights of the outermost nodes of high-order rules
    /// lie below the smallest subnormal and read as `0.0`; see [`Self::log_weights`].
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Natural logarithms of the weights, finite for every node.
    pub fn log_weights(&self) -> &[f64] {
        &self.log_weights
    }

    /// `index,node,weight` rows, 1-based, in shortest round-trip notation.
    /// Weights below the double range are written from their logarithm with
    /// 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (i, (&t, (&w, &lw))) in self
            .nodes
            .iter()
            .zip(self.weights.iter().zip(&self.log_weights))
            .enumerate()
        {
            let weight = if w.is_normal() { format!("{w:?}") } else { decimal_from_ln(lw) };
            out.push_str(&format!("{},{t:?},{weight}\n", i + 1));
        }
        out
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.nodes.iter().copied().zip(self.weights.iter().copied())
    }

    /// `Σ_d w_d f(τ_d)` with compensated summation; nodes whose weight
    /// underflows are skipped.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> f64 {
        let mut acc = CompensatedSum::default();
        for (t, w) in self.iter() {
            if w > 0.0 {
                acc.add(w * f(t));
            }
        }
        acc.value()
    }
}

fn decimal_from_ln(ln_value: f64) -> String {
    let e10 = ln_value / std::f64::consts::LN_10;
    let mut exponent = e10.floor();
    let mut mantissa = 10f64.powf(e10 - exponent);
    if mantissa >= 10.0 - 5e-16 {
        mantissa /= 10.0;
        exponent += 1.0;
    }
    format!("{mantissa:.16}e{exponent}")
}

/// Builds the `order`-point Gauss-Laguerre rule.
///
/// Each root is bracketed by a sign-change scan from the previous root and
/// then polished by safeguarded Newton steps.
/// Weights use `w = τ / ((D+1)^2 L_{D+1}(τ)^2)`, which equals
/// `(D!)^2 / (τ L_D'(τ)^2)` without forming factorials.
pub fn gauss_laguerre(order: usize) -> Result<QuadratureRule> {
    if order == 0 || order > MAX_RULE_ORDER {
        return Err(Error::domain(
            "gauss_laguerre",
            format!("order must lie in 1..={MAX_RULE_ORDER}, got {order}"),
        ));
    }
    let n = order;
    let nf = n as f64;
    let mut nodes: Vec<f64> = Vec::with_capacity(n);
    let mut log_weights = Vec::with_capacity(n);
    let ln_np1 = (nf + 1.0).ln();

    for i in 0..n {
        // Zero spacing of L_n grows monotonically, so stepping a quarter of the
        // previous gap can never jump over a root.
        let (left, step) = match i {
            0 => (0.0, 0.25 / (4.0 * nf + 2.0)),
            1 => (nodes[0], 0.25 * nodes[0]),
            _ => (nodes[i - 1], 0.25 * (nodes[i - 1] - nodes[i - 2])),
        };
        // Sign of L_n just past root i.
        let past = if i % 2 == 0 { -1.0 } else { 1.0 };
        let mut lo = left;
        let mut hi = left + step;
        let mut steps = 0;
        while laguerre_scaled(n, hi).0 * past <= 0.0 {
            lo = hi;
            hi += step;
            steps += 1;
            if steps > 4 * NEWTON_MAX_ITER || !hi.is_finite() {
                return Err(Error::QuadratureConvergence { order, index: i + 1 });
            }
        }
        let mut z = 0.5 * (lo + hi);
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITER {
            let (p, d, _) = laguerre_scaled(n, z);
            if p == 0.0 {
                converged = true;
                break;
            }
            if p * past > 0.0 {
                hi = z;
            } else {
                lo = z;
            }
            let mut z_new = z - p / d;
            if !(z_new > lo && z_new < hi) {
                z_new = 0.5 * (lo + hi);
            }
            let delta = (z_new - z).abs();
            z = z_new;
            if delta <= NEWTON_STEP_TOL * z.abs().max(1.0) || hi - lo <= NEWTON_STEP_TOL * z.abs() {
                converged = true;
                break;
            }
        }
        let below_previous = i > 0 && z <= nodes[i - 1];
        if !converged || below_previous || z <= 0.0 {
            return Err(Error::QuadratureConvergence { order, index: i + 1 });
        }
        let (_, _, ln_next) = laguerre_scaled(n, z);
        nodes.push(z);
        log_weights.push(z.ln() - 2.0 * ln_np1 - 2.0 * ln_next);
    }
    let weights = log_weights.iter().map(|lw| lw.exp()).collect();
    Ok(QuadratureRule {
        order,
        nodes,
        weights,
        log_weights,
    })
}
