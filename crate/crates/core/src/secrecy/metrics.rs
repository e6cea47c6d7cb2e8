use crate::error::{Error, Result};

fn check_probabilities(op: &'static str, ps: &[f64]) -> Result<()> {
    if let Some(p) = ps.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::domain(op, format!("probability {p} outside [0, 1]")));
    }
    Ok(())
}

/// `1 - Π (1 - p_k)`.
pub fn system_sop(per_user_sop: &[f64]) -> Result<f64> {
    check_probabilities("system_sop", per_user_sop)?;
    let survive: f64 = per_user_sop.iter().map(|p| 1.0 - p).product();
    Ok(1.0 - survive)
}

/// Delay-limited secrecy throughput `Σ (1 - p_k) R_k` in BPCU.
pub fn throughput_delay_limited(per_user_sop: &[f64], target_rates: &[f64]) -> Result<f64> {
    if per_user_sop.len() != target_rates.len() {
        return Err(Error::InvalidQuery(format!(
            "{} outage probabilities for {} rates",
            per_user_sop.len(),
            target_rates.len()
        )));
    }
    check_probabilities("throughput_delay_limited", per_user_sop)?;
    if target_rates.iter().any(|r| !(*r >= 0.0)) {
        return Err(Error::domain("throughput_delay_limited", "rates must be non-negative"));
    }
    Ok(per_user_sop
        .iter()
        .zip(target_rates)
        .map(|(p, r)| (1.0 - p) * r)
        .sum())
}

/// `[log2(1 + γ_legit) - log2(1 + γ_eve)]⁺`.
pub fn secrecy_rate(gamma_legit: f64, gamma_eve: f64) -> f64 {
    (gamma_legit.ln_1p() - gamma_eve.ln_1p()).max(0.0) / std::f64::consts::LN_2
}
