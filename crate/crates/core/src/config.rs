//! Scenario parameters and the channel statistics derived from them.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Eavesdropper placement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// A separate node overhears the broadcast.
    External,
    /// The weakest paired user (rank 1) eavesdrops on the others.
    Internal,
}

/// Successive interference cancellation quality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SicMode {
    Perfect,
    Imperfect { residual_level: f64 },
}

impl SicMode {
    /// Residual interference level ϖ (0 for perfect SIC).
    pub fn residual_level(&self) -> f64 {
        match *self {
            SicMode::Perfect => 0.0,
            SicMode::Imperfect { residual_level } => residual_level,
        }
    }

    pub fn is_perfect(&self) -> bool {
        self.residual_level() == 0.0
    }

    pub fn label(&self) -> &'static str {
        if self.is_perfect() {
            "psic"
        } else {
            "ipsic"
        }
    }
}

/// Which form of the external-Eve interference term the closed forms use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EveInterferenceVariant {
    /// Threshold without the `ρ_e Q N_br N_re ν_k` term and pSIC Eve kernel
    /// without the `N_br N_re` scale.
    AsPrinted,
    /// Interference term kept, consistent with the Eve SINR definition.
    WithNuTerm,
}

/// Every parameter of one scenario. Field names are the JSON keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    pub user_count: usize,
    pub ris_elements: usize,
    pub partition_p: usize,
    pub group_size: usize,
    /// 1-based index of the active reflecting group.
    pub active_column: usize,
    pub power_alloc: Vec<f64>,
    /// Parsed for the AN baseline; unused by the analysis.
    pub an_power_alloc: Option<f64>,
    pub snr_legit_db: f64,
    pub snr_eve_db: f64,
    pub residual_user_db: f64,
    pub residual_eve_db: f64,
    pub sic_mode: SicMode,
    pub path_loss_exponent: f64,
    pub dist_bs_ris: f64,
    pub dist_ris_user: Vec<f64>,
    pub dist_ris_eve: f64,
    pub target_rates: Vec<f64>,
    pub scenario: Scenario,
    pub eve_interference_variant: EveInterferenceVariant,
}

impl Default for SystemConfig {
    /// Three users, 16 elements split into two groups of eight, allocation
    /// {0.6, 0.3, 0.1}, ρ_e = 10 dB, residual interference at -20 dB,
    /// d_br = 3 m, d_rk = {6, 4, 2} m, d_re = 8 m, α = 2, 0.04 BPCU targets.
    fn default() -> Self {
        Self {
            user_count: 3,
            ris_elements: 16,
            partition_p: 2,
            group_size: 8,
            active_column: 1,
            power_alloc: vec![0.6, 0.3, 0.1],
            an_power_alloc: None,
            snr_legit_db: 20.0,
            snr_eve_db: 10.0,
            residual_user_db: -20.0,
            residual_eve_db: -20.0,
            sic_mode: SicMode::Imperfect {
                residual_level: 1.0,
            },
            path_loss_exponent: 2.0,
            dist_bs_ris: 3.0,
            dist_ris_user: vec![6.0, 4.0, 2.0],
            dist_ris_eve: 8.0,
            target_rates: vec![0.04, 0.04, 0.04],
            scenario: Scenario::External,
            eve_interference_variant: EveInterferenceVariant::WithNuTerm,
        }
    }
}

/// Relaxations accepted by [`SystemConfig::validate_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidationPolicy {
    /// Enforce `a_1 >= a_2 >= ... >= a_K`. Power-offset sweeps turn this off.
    pub require_descending_power: bool,
}

impl Default for ValidationPolicy {
    fn default() -> Self {
        Self {
            require_descending_power: true,
        }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

impl SystemConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: SystemConfig =
            serde_json::from_str(s).map_err(|e| Error::config("<document>", e.to_string()))?;
        Ok(cfg)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path.as_ref())?;
        Self::from_json_str(&text)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_with(ValidationPolicy::default())
    }

    pub fn validate_with(&self, policy: ValidationPolicy) -> Result<()> {
        let k = self.user_count;
        if k == 0 {
            return Err(Error::config("user_count", "must be at least 1"));
        }
        if self.partition_p == 0 {
            return Err(Error::config("partition_p", "must be at least 1"));
        }
        if self.group_size == 0 {
            return Err(Error::config("group_size", "must be at least 1"));
        }
        if self.ris_elements != self.partition_p * self.group_size {
            return Err(Error::config(
                "ris_elements",
                format!(
                    "must equal partition_p * group_size = {}",
                    self.partition_p * self.group_size
                ),
            ));
        }
        if self.group_size > crate::special_math::MAX_BESSEL_ORDER as usize - 1 {
            return Err(Error::config("group_size", "exceeds supported Bessel order"));
        }
        if self.active_column == 0 || self.active_column > self.partition_p {
            return Err(Error::config(
                "active_column",
                format!("must lie in 1..={}", self.partition_p),
            ));
        }
        for (name, len) in [
            ("power_alloc", self.power_alloc.len()),
            ("dist_ris_user", self.dist_ris_user.len()),
            ("target_rates", self.target_rates.len()),
        ] {
            if len != k {
                return Err(Error::config(
                    name,
                    format!("expected {k} entries (user_count), got {len}"),
                ));
            }
        }
        if self.power_alloc.iter().any(|a| !(*a > 0.0) || !a.is_finite()) {
            return Err(Error::config("power_alloc", "every allocation must be positive"));
        }
        let total: f64 = self.power_alloc.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::config(
                "power_alloc",
                format!("allocations must sum to 1, got {total}"),
            ));
        }
        if policy.require_descending_power
            && self.power_alloc.windows(2).any(|w| w[0] < w[1])
        {
            return Err(Error::config(
                "power_alloc",
                "allocations must be non-increasing in user index",
            ));
        }
        if let Some(a) = self.an_power_alloc {
            if !(0.0..=1.0).contains(&a) {
                return Err(Error::config("an_power_alloc", "must lie in [0, 1]"));
            }
        }
        for (name, v) in [
            ("snr_legit_db", self.snr_legit_db),
            ("snr_eve_db", self.snr_eve_db),
            ("residual_user_db", self.residual_user_db),
            ("residual_eve_db", self.residual_eve_db),
        ] {
            if !v.is_finite() {
                return Err(Error::config(name, "must be finite"));
            }
        }
        let varpi = self.sic_mode.residual_level();
        if !(0.0..=1.0).contains(&varpi) {
            return Err(Error::config("sic_mode", "residual level must lie in [0, 1]"));
        }
        if !(self.path_loss_exponent > 0.0) || !self.path_loss_exponent.is_finite() {
            return Err(Error::config("path_loss_exponent", "must be positive"));
        }
        if !(self.dist_bs_ris > 0.0) || !self.dist_bs_ris.is_finite() {
            return Err(Error::config("dist_bs_ris", "must be positive"));
        }
        if !(self.dist_ris_eve > 0.0) || !self.dist_ris_eve.is_finite() {
            return Err(Error::config("dist_ris_eve", "must be positive"));
        }
        if self.dist_ris_user.iter().any(|d| !(*d > 0.0) || !d.is_finite()) {
            return Err(Error::config("dist_ris_user", "every distance must be positive"));
        }
        if self.target_rates.iter().any(|r| !(*r >= 0.0) || !r.is_finite()) {
            return Err(Error::config("target_rates", "rates must be non-negative"));
        }
        if self.scenario == Scenario::Internal && k < 2 {
            return Err(Error::config(
                "user_count",
                "internal eavesdropping needs at least two users",
            ));
        }
        Ok(())
    }

    /// `ν_g = Σ_{i=g+1}^{K} a_i` for a 1-based user index.
    pub fn nu(&self, g: usize) -> Result<f64> {
        if g == 0 || g > self.power_alloc.len() {
            return Err(Error::InvalidQuery(format!(
                "user index {g} outside 1..={}",
                self.power_alloc.len()
            )));
        }
        Ok(self.power_alloc[g..].iter().sum())
    }

    /// Users whose secrecy is evaluated: all of them for an external Eve,
    /// ranks `2..=K` when rank 1 is the eavesdropper.
    pub fn legitimate_users(&self, scenario: Scenario) -> Vec<usize> {
        match scenario {
            Scenario::External => (1..=self.user_count).collect(),
            Scenario::Internal => (2..=self.user_count).collect(),
        }
    }

    /// Two-user allocation `{a_T, 1 - a_T}`.
    pub fn with_power_offset(&self, a_t: f64) -> Result<Self> {
        if self.user_count != 2 {
            return Err(Error::config(
                "user_count",
                "power-offset sweeps are defined for two users",
            ));
        }
        if !(a_t > 0.0 && a_t < 1.0) {
            return Err(Error::config("power_alloc", "a_T must lie in (0, 1)"));
        }
        let mut cfg = self.clone();
        cfg.power_alloc = vec![a_t, 1.0 - a_t];
        Ok(cfg)
    }
}

/// Distribution parameters derived from a [`SystemConfig`].
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelStats {
    pub n_br: f64,
    pub n_rk: Vec<f64>,
    pub n_re: f64,
    pub n_ipu: f64,
    pub n_ipe: f64,
    pub rho: f64,
    pub rho_e: f64,
    /// ζ2(k) = ρ N_br N_rk
    pub zeta2_per_user: Vec<f64>,
    nu: Vec<f64>,
}

impl ChannelStats {
    /// Derives the statistics of a strictly validated configuration.
    pub fn derive(config: &SystemConfig) -> Result<Self> {
        Self::derive_with(config, ValidationPolicy::default())
    }

    pub fn derive_with(config: &SystemConfig, policy: ValidationPolicy) -> Result<Self> {
        config.validate_with(policy)?;
        let alpha = config.path_loss_exponent;
        let var = |d: f64| d.powf(-alpha);
        let n_br = var(config.dist_bs_ris);
        let n_rk: Vec<f64> = config.dist_ris_user.iter().map(|&d| var(d)).collect();
        let rho = db_to_linear(config.snr_legit_db);
        let zeta2_per_user = n_rk.iter().map(|n| rho * n_br * n).collect();
        let nu = (1..=config.user_count)
            .map(|g| config.power_alloc[g..].iter().sum())
            .collect();
        Ok(Self {
            n_br,
            n_re: var(config.dist_ris_eve),
            n_ipu: db_to_linear(config.residual_user_db),
            n_ipe: db_to_linear(config.residual_eve_db),
            rho,
            rho_e: db_to_linear(config.snr_eve_db),
            zeta2_per_user,
            n_rk,
            nu,
        })
    }

    /// `ν_g` for a 1-based user index (0 for the strongest user).
    pub fn nu(&self, g: usize) -> f64 {
        self.nu[g - 1]
    }

    pub fn n_rk(&self, k: usize) -> f64 {
        self.n_rk[k - 1]
    }
}

/// [`ChannelStats::derive`] as a free function.
pub fn derive_stats(config: &SystemConfig) -> Result<ChannelStats> {
    ChannelStats::derive(config)
}
