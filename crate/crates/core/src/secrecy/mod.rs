//! SINR distributions and secrecy outage probability (SOP) for the legitimate
//! users and for an external or internal eavesdropper.
//!
//! Residual interference from imperfect SIC is averaged with Gauss-Laguerre
//! rules: order `D` over the users' residual, order `S` over Eve's.

mod metrics;

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::Serialize;

pub use metrics::{secrecy_rate, system_sop, throughput_delay_limited};

use crate::channel_dist::{kappa, ordered_density_factor, ordered_from_parent};
use crate::config::{
    ChannelStats, EveInterferenceVariant, Scenario, SicMode, SystemConfig,
    ValidationPolicy,
};
use crate::error::{Error, Result};
use crate::special_math::integrate::{integrate, Tolerance};
use crate::special_math::{
    gauss_laguerre, CompensatedSum, QuadratureRule, ScaledBesselKernel, MAX_RULE_ORDER,
};

pub const DEFAULT_QUADRATURE_ORDER: usize = 300;

/// Closed-form SOP values below this are treated as underflowed when
/// estimating diversity order.
pub const UNDERFLOW_FLOOR: f64 = 1e-14;

/// Gauss-Laguerre rules are pure functions of their order; build each once.
pub fn cached_rule(order: usize) -> Result<Arc<QuadratureRule>> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<QuadratureRule>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(rule) = cache.lock().expect("rule cache poisoned").get(&order) {
        return Ok(Arc::clone(rule));
    }
    let rule = Arc::new(gauss_laguerre(order)?);
    cache
        .lock()
        .expect("rule cache poisoned")
        .insert(order, Arc::clone(&rule));
    Ok(rule)
}

/// Which user, which message, which eavesdropper and which SIC quality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SecrecyQuery {
    /// Rank of the receiving user (1 = weakest cascade).
    pub user_k: usize,
    /// Rank of the user whose message is decoded, `decode_g <= user_k`.
    pub decode_g: usize,
    pub scenario: Scenario,
    pub sic_mode: SicMode,
    pub quad_order_d: usize,
    pub quad_order_s: usize,
}

impl SecrecyQuery {
    pub fn new(user_k: usize, scenario: Scenario, sic_mode: SicMode) -> Self {
        Self {
            user_k,
            decode_g: user_k,
            scenario,
            sic_mode,
            quad_order_d: DEFAULT_QUADRATURE_ORDER,
            quad_order_s: DEFAULT_QUADRATURE_ORDER,
        }
    }

    pub fn decoding(mut self, g: usize) -> Self {
        self.decode_g = g;
        self
    }

    pub fn with_orders(mut self, d: usize, s: usize) -> Self {
        self.quad_order_d = d;
        self.quad_order_s = s;
        self
    }
}

/// Per-user entry of a [`SecrecyReport`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UserSop {
    pub user_k: usize,
    pub analytic: f64,
    /// High-SNR approximation clamped to `[0, 1]`.
    pub asymptotic: f64,
    pub asymptotic_raw: f64,
    pub empirical: Option<f64>,
    pub empirical_stderr: Option<f64>,
    pub diversity_estimate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SecrecyReport {
    pub scenario: Scenario,
    pub sic_mode: SicMode,
    pub per_user_sop: Vec<UserSop>,
    pub system_sop: f64,
    pub throughput_bpcu: f64,
}

/// Evaluates every analytic quantity for one validated configuration.
#[derive(Debug, Clone)]
pub struct SecrecyAnalyzer {
    config: SystemConfig,
    stats: ChannelStats,
    kernel: ScaledBesselKernel,
    policy: ValidationPolicy,
}

impl SecrecyAnalyzer {
    pub fn new(config: &SystemConfig) -> Result<Self> {
        Self::with_policy(config, ValidationPolicy::default())
    }

    pub fn with_policy(config: &SystemConfig, policy: ValidationPolicy) -> Result<Self> {
        let stats = ChannelStats::derive_with(config, policy)?;
        let kernel = ScaledBesselKernel::new(config.group_size as u32)?;
        Ok(Self {
            config: config.clone(),
            stats,
            kernel,
            policy,
        })
    }

    pub fn config(&self) -> &SystemConfig {
        &self.config
    }

    pub fn stats(&self) -> &ChannelStats {
        &self.stats
    }

    /// Same scenario at a different transmit SNR ρ.
    pub fn with_snr_db(&self, snr_db: f64) -> Result<Self> {
        let mut config = self.config.clone();
        config.snr_legit_db = snr_db;
        Self::with_policy(&config, self.policy)
    }

    fn check(&self, q: &SecrecyQuery) -> Result<()> {
        let users = self.config.user_count;
        if q.user_k == 0 || q.user_k > users {
            return Err(Error::InvalidQuery(format!(
                "user rank {} outside 1..={users}",
                q.user_k
            )));
        }
        if q.decode_g == 0 || q.decode_g > q.user_k {
            return Err(Error::InvalidQuery(format!(
                "decoded rank {} must lie in 1..={}",
                q.decode_g, q.user_k
            )));
        }
        if q.scenario == Scenario::Internal && q.user_k < 2 {
            return Err(Error::InvalidQuery(
                "internal eavesdropping is defined for ranks 2..=K".into(),
            ));
        }
        for order in [q.quad_order_d, q.quad_order_s] {
            if order == 0 || order > MAX_RULE_ORDER {
                return Err(Error::InvalidQuery(format!(
                    "quadrature order {order} outside 1..={MAX_RULE_ORDER}"
                )));
            }
        }
        let varpi = q.sic_mode.residual_level();
        if !(0.0..=1.0).contains(&varpi) {
            return Err(Error::InvalidQuery("residual level must lie in [0, 1]".into()));
        }
        Ok(())
    }

    fn check_x(op: &'static str, x: f64) -> Result<()> {
        if !(x >= 0.0) {
            return Err(Error::domain(op, format!("SINR argument must be non-negative, got {x}")));
        }
        Ok(())
    }

    fn alloc(&self, g: usize) -> (f64, f64) {
        (self.config.power_alloc[g - 1], self.stats.nu(g))
    }

    /// True when `x` reaches the SINR supremum `a/ν`.
    fn saturated(x: f64, a: f64, nu: f64) -> bool {
        nu > 0.0 && x >= a / nu
    }

    /// `Σ_d G_d F_ord(c0 + c1 τ_d)`, or `F_ord(c0)` without a rule, where
    /// `F_ord` is the CDF of rank `rank` of `count` parent cascades in
    /// normalized units.
    fn ordered_mix(
        &self,
        rank: usize,
        count: usize,
        c0: f64,
        c1: f64,
        rule: Option<&QuadratureRule>,
    ) -> Result<f64> {
        let ord = |u: f64| ordered_from_parent(self.kernel.cdf(u), rank, count);
        match rule {
            None => ord(c0),
            Some(rule) => {
                let mut acc = CompensatedSum::default();
                for (t, w) in rule.iter() {
                    if w > 0.0 {
                        acc.add(w * ord(c0 + c1 * t)?);
                    }
                }
                Ok(acc.value().clamp(0.0, 1.0))
            }
        }
    }

    /// CDF of the SINR at rank `user_k` when decoding rank `decode_g`.
    pub fn cdf_sinr_legit(&self, q: &SecrecyQuery, x: f64) -> Result<f64> {
        self.check(q)?;
        Self::check_x("cdf_sinr_legit", x)?;
        let (a_g, nu_g) = self.alloc(q.decode_g);
        if Self::saturated(x, a_g, nu_g) {
            return Ok(1.0);
        }
        let base = x / ((a_g - nu_g * x) * self.stats.zeta2_per_user[q.user_k - 1]);
        let varpi = q.sic_mode.residual_level();
        let users = self.config.user_count;
        if varpi == 0.0 {
            return self.ordered_mix(q.user_k, users, base, 0.0, None);
        }
        let b = varpi * self.stats.rho * self.stats.n_ipu;
        let rule = cached_rule(q.quad_order_d)?;
        self.ordered_mix(q.user_k, users, base, base * b, Some(&rule))
    }

    /// `(scale, rank, count)` of Eve's cascade: the normalized argument is
    /// `x (1 + ϖ ρ_e N_ipe τ) / ((a_k - ν_k x) scale)`.
    fn eve_channel(&self, q: &SecrecyQuery) -> (f64, usize, usize) {
        let s = &self.stats;
        match q.scenario {
            Scenario::External => {
                let printed = self.config.eve_interference_variant == EveInterferenceVariant::AsPrinted;
                let scale = if printed && q.sic_mode.is_perfect() {
                    s.rho_e
                } else {
                    s.rho_e * s.n_br * s.n_re
                };
                (scale, 1, 1)
            }
            Scenario::Internal => (s.rho_e * s.n_br * s.n_rk(1), 1, self.config.user_count),
        }
    }

    fn eve_residual(&self, q: &SecrecyQuery) -> f64 {
        q.sic_mode.residual_level() * self.stats.rho_e * self.stats.n_ipe
    }

    /// CDF of Eve's SINR when decoding rank `user_k`.
    pub fn cdf_sinr_eve(&self, q: &SecrecyQuery, x: f64) -> Result<f64> {
        self.check(q)?;
        Self::check_x("cdf_sinr_eve", x)?;
        let (a_k, nu_k) = self.alloc(q.user_k);
        if Self::saturated(x, a_k, nu_k) {
            return Ok(1.0);
        }
        let (scale, rank, count) = self.eve_channel(q);
        let base = x / ((a_k - nu_k * x) * scale);
        let b = self.eve_residual(q);
        if b == 0.0 {
            return self.ordered_mix(rank, count, base, 0.0, None);
        }
        let rule = cached_rule(q.quad_order_s)?;
        self.ordered_mix(rank, count, base, base * b, Some(&rule))
    }

    /// Density of Eve's SINR, the exact derivative of [`Self::cdf_sinr_eve`].
    /// Zero outside the open support.
    pub fn pdf_sinr_eve(&self, q: &SecrecyQuery, x: f64) -> Result<f64> {
        self.check(q)?;
        let (a_k, nu_k) = self.alloc(q.user_k);
        if !(x > 0.0) || Self::saturated(x, a_k, nu_k) || x.is_infinite() {
            return Ok(0.0);
        }
        let (scale, rank, count) = self.eve_channel(q);
        let denom = a_k - nu_k * x;
        let base = x / (denom * scale);
        let dbase = a_k / (denom * denom * scale);
        let density = |c: f64| -> Result<f64> {
            let u = base * c;
            let parent = self.kernel.density(u);
            if parent == 0.0 {
                return Ok(0.0);
            }
            let factor = ordered_density_factor(self.kernel.cdf(u), rank, count)?;
            Ok(factor * parent * dbase * c)
        };
        let b = self.eve_residual(q);
        if b == 0.0 {
            return density(1.0);
        }
        let rule = cached_rule(q.quad_order_s)?;
        let mut acc = CompensatedSum::default();
        for (t, w) in rule.iter() {
            if w > 0.0 {
                acc.add(w * density(1.0 + b * t)?);
            }
        }
        Ok(acc.value().max(0.0))
    }

    /// Mean of Eve's cascaded gain as used in the mean-field thresholds.
    fn eve_mean_gain(&self, scenario: Scenario) -> f64 {
        let s = &self.stats;
        let q = self.config.group_size as f64;
        match scenario {
            Scenario::External => q * s.n_br * s.n_re,
            Scenario::Internal => q * s.n_br * s.n_rk(1),
        }
    }

    /// Legitimate-SINR threshold `2^R (1 + γ̄_e) - 1` with Eve's cascade
    /// replaced by its mean and her residual at node `tau`.
    pub fn outage_threshold(&self, q: &SecrecyQuery, tau: f64) -> Result<f64> {
        self.check(q)?;
        let (a_k, nu_k) = self.alloc(q.user_k);
        let rho_e = self.stats.rho_e;
        let hbar = self.eve_mean_gain(q.scenario);
        let residual = self.eve_residual(q) * tau;
        let drop_nu = q.scenario == Scenario::External
            && !q.sic_mode.is_perfect()
            && self.config.eve_interference_variant == EveInterferenceVariant::AsPrinted;
        let interference = if drop_nu { 0.0 } else { rho_e * hbar * nu_k };
        let rate = self.config.target_rates[q.user_k - 1];
        Ok(rate.exp2() * (1.0 + hbar * a_k * rho_e / (interference + residual + 1.0)) - 1.0)
    }

    fn legit_query(q: &SecrecyQuery) -> SecrecyQuery {
        SecrecyQuery {
            decode_g: q.user_k,
            ..*q
        }
    }

    /// SOP with Eve's cascade at its mean and her residual averaged over the
    /// `S`-point rule; the legitimate CDF averages over the `D`-point rule.
    pub fn sop_closed_form(&self, q: &SecrecyQuery) -> Result<f64> {
        self.check(q)?;
        let lq = Self::legit_query(q);
        if q.sic_mode.is_perfect() {
            let psi = self.outage_threshold(q, 0.0)?;
            return self.cdf_sinr_legit(&lq, psi);
        }
        let rule = cached_rule(q.quad_order_s)?;
        let mut acc = CompensatedSum::default();
        for (t, w) in rule.iter() {
            if w > 0.0 {
                let eta = self.outage_threshold(q, t)?;
                acc.add(w * self.cdf_sinr_legit(&lq, eta)?);
            }
        }
        Ok(acc.value().clamp(0.0, 1.0))
    }

    /// `∫ f_eve(x) F_legit(2^R (1 + x) - 1) dx` by adaptive quadrature.
    ///
    /// The integral is taken in Eve's normalized cascade variable `u`, one
    /// integral per residual node, which is the same integral after the
    /// monotone substitution `x = a_k u / (c + ν_k u)` with
    /// `c = (1 + ϖ ρ_e N_ipe τ) / scale`.
    pub fn sop_exact_numeric(&self, q: &SecrecyQuery) -> Result<f64> {
        self.check(q)?;
        let lq = Self::legit_query(q);
        let (a_k, nu_k) = self.alloc(q.user_k);
        let (scale, rank, count) = self.eve_channel(q);
        let two_r = self.config.target_rates[q.user_k - 1].exp2();
        let mean = self.config.group_size as f64;
        let tol = Tolerance {
            abs: 1e-15,
            rel: 1e-9,
            max_intervals: 4000,
        };
        let node_integral = |c: f64| -> Result<f64> {
            let mut failure = None;
            let value = integrate(
                |t| {
                    if t >= 1.0 || failure.is_some() {
                        return 0.0;
                    }
                    let u = mean * t / (1.0 - t);
                    let jac = mean / ((1.0 - t) * (1.0 - t));
                    let parent = self.kernel.density(u);
                    if parent == 0.0 || !jac.is_finite() {
                        return 0.0;
                    }
                    let x = a_k * u / (c + nu_k * u);
                    let weight = match ordered_density_factor(self.kernel.cdf(u), rank, count) {
                        Ok(f) => f * parent * jac,
                        Err(e) => {
                            failure = Some(e);
                            return 0.0;
                        }
                    };
                    match self.cdf_sinr_legit(&lq, two_r * (1.0 + x) - 1.0) {
                        Ok(p) => weight * p,
                        Err(e) => {
                            failure = Some(e);
                            0.0
                        }
                    }
                },
                0.0,
                1.0,
                tol,
            )?;
            match failure {
                Some(e) => Err(e),
                None => Ok(value.value),
            }
        };
        let b = self.eve_residual(q);
        let value = if b == 0.0 {
            node_integral(1.0 / scale)?
        } else {
            let rule = cached_rule(q.quad_order_s)?;
            let mut acc = CompensatedSum::default();
            for (t, w) in rule.iter() {
                if w > 0.0 {
                    acc.add(w * node_integral((1.0 + b * t) / scale)?);
                }
            }
            acc.value()
        };
        Ok(value.clamp(0.0, 1.0))
    }

    /// High-SNR SOP, unclamped. Under imperfect SIC it is independent of ρ;
    /// under perfect SIC it keeps only the leading small-argument term.
    pub fn sop_asymptotic(&self, q: &SecrecyQuery) -> Result<f64> {
        self.check(q)?;
        let (a_k, nu_k) = self.alloc(q.user_k);
        let s = &self.stats;
        let users = self.config.user_count;
        if q.sic_mode.is_perfect() {
            let psi = self.outage_threshold(q, 0.0)?;
            if Self::saturated(psi, a_k, nu_k) {
                return Ok(1.0);
            }
            let arg = psi / ((a_k - psi * nu_k) * s.zeta2_per_user[q.user_k - 1]);
            let qf = self.config.group_size as f64;
            let parent = if self.config.group_size == 1 {
                -arg * arg.ln()
            } else {
                arg / (qf - 1.0)
            };
            let k = q.user_k;
            return Ok(kappa(k, users) / k as f64 * parent.powi(k as i32));
        }
        let varpi = q.sic_mode.residual_level();
        let rule_d = cached_rule(q.quad_order_d)?;
        let rule_s = cached_rule(q.quad_order_s)?;
        let mut acc = CompensatedSum::default();
        for (t, w) in rule_s.iter() {
            if w == 0.0 {
                continue;
            }
            let eta = self.outage_threshold(q, t)?;
            let inner = if Self::saturated(eta, a_k, nu_k) {
                1.0
            } else {
                let c1 = varpi * s.n_ipu * eta / ((a_k - eta * nu_k) * s.n_br * s.n_rk(q.user_k));
                self.ordered_mix(q.user_k, users, 0.0, c1, Some(&rule_d))?
            };
            acc.add(w * inner);
        }
        Ok(acc.value())
    }

    /// Negative least-squares slope of `log10 SOP` against `log10 ρ`.
    ///
    /// Uses the closed form unless it drops below [`UNDERFLOW_FLOOR`] somewhere
    /// on the grid, in which case the asymptotic curve is fitted instead.
    pub fn diversity_order_estimate(&self, q: &SecrecyQuery, rho_grid_db: &[f64]) -> Result<f64> {
        self.check(q)?;
        if rho_grid_db.len() < 2 {
            return Err(Error::InvalidQuery("diversity fit needs at least two SNR points".into()));
        }
        let mut closed = Vec::with_capacity(rho_grid_db.len());
        for &db in rho_grid_db {
            closed.push(self.with_snr_db(db)?.sop_closed_form(q)?);
        }
        let values = if closed.iter().all(|p| *p >= UNDERFLOW_FLOOR) {
            closed
        } else {
            let mut asy = Vec::with_capacity(rho_grid_db.len());
            for &db in rho_grid_db {
                asy.push(self.with_snr_db(db)?.sop_asymptotic(q)?);
            }
            if asy.iter().any(|p| !(*p > f64::MIN_POSITIVE) || !p.is_finite()) {
                return Err(Error::Underflow(format!(
                    "user {} has SOP below {UNDERFLOW_FLOOR:e} on the grid and no usable asymptote",
                    q.user_k
                )));
            }
            asy
        };
        let xs: Vec<f64> = rho_grid_db.iter().map(|db| db / 10.0).collect();
        let ys: Vec<f64> = values.iter().map(|p| p.log10()).collect();
        Ok(-least_squares_slope(&xs, &ys))
    }

    /// Analytic SOP of every evaluated user plus the derived system metrics.
    pub fn report(
        &self,
        scenario: Scenario,
        sic_mode: SicMode,
        diversity_grid_db: Option<&[f64]>,
    ) -> Result<SecrecyReport> {
        let users = self.config.legitimate_users(scenario);
        let mut per_user_sop = Vec::with_capacity(users.len());
        for k in users {
            let q = SecrecyQuery::new(k, scenario, sic_mode);
            let analytic = self.sop_closed_form(&q)?;
            let asymptotic_raw = self.sop_asymptotic(&q)?;
            let diversity_estimate = match diversity_grid_db {
                Some(grid) => match self.diversity_order_estimate(&q, grid) {
                    Ok(d) => Some(d),
                    Err(Error::Underflow(_)) => None,
                    Err(e) => return Err(e),
                },
                None => None,
            };
            per_user_sop.push(UserSop {
                user_k: k,
                analytic,
                asymptotic: asymptotic_raw.clamp(0.0, 1.0),
                asymptotic_raw,
                empirical: None,
                empirical_stderr: None,
                diversity_estimate,
            });
        }
        let sops: Vec<f64> = per_user_sop.iter().map(|u| u.analytic).collect();
        let rates: Vec<f64> = per_user_sop
            .iter()
            .map(|u| self.config.target_rates[u.user_k - 1])
            .collect();
        Ok(SecrecyReport {
            scenario,
            sic_mode,
            system_sop: system_sop(&sops)?,
            throughput_bpcu: throughput_delay_limited(&sops, &rates)?,
            per_user_sop,
        })
    }
}

pub(crate) fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
