//! Seeded Monte Carlo oracle for the SINR and secrecy-outage models.
//!
//! Trial `i` draws from a ChaCha8 stream keyed by the master seed and
//! selected by `i`, so results do not depend on how trials are split across
//! workers.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{ChannelStats, Scenario, SicMode, SystemConfig};
use crate::error::{Error, Result};
use crate::secrecy::{secrecy_rate, throughput_delay_limited};

/// Trials handled by one unit of parallel work.
const CHUNK: u64 = 8192;

/// How Eve's cascaded gain enters the outage event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EveTreatment {
    /// Drawn every trial.
    Sampled,
    /// Replaced by its mean `Q N_br N_re` (or `Q N_br N_r1` internally).
    MeanField,
}

/// How cascaded gains are assigned to ranks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderingMode {
    /// Rank `k` is the `k`-th smallest of `K` i.i.d. draws at user `k`'s
    /// distance.
    CommonVariance,
    /// Every user draws at its own distance; gains are sorted and rank `k`
    /// takes the `k`-th smallest.
    PerUserDistance,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimOptions {
    pub eve: EveTreatment,
    pub ordering: OrderingMode,
    pub trials: u64,
    pub seed: u64,
    /// Worker threads; `None` uses the machine's parallelism.
    pub workers: Option<usize>,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            eve: EveTreatment::Sampled,
            ordering: OrderingMode::CommonVariance,
            trials: 1_000_000,
            seed: 0x5eed,
            workers: None,
        }
    }
}

/// One draw of every fading coefficient of the active reflecting group.
///
/// Each link (the `K` users, then Eve) has its own first-hop vector so that
/// the users' cascaded gains are independent.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h_br: Vec<Vec<Complex64>>,
    pub h_rk: Vec<Vec<Complex64>>,
    pub h_re: Vec<Complex64>,
    pub h_ipu: Complex64,
    pub h_ipe: Complex64,
    /// `|H_k|²` by rank, ascending.
    pub cascades: Vec<f64>,
    pub cascade_eve: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimResult {
    pub trials: u64,
    pub seed: u64,
    /// Ranks the entries below refer to.
    pub users: Vec<usize>,
    pub outage_count: Vec<u64>,
    pub empirical_sop: Vec<f64>,
    pub standard_error: Vec<f64>,
}

impl SimResult {
    fn from_counts(trials: u64, seed: u64, users: Vec<usize>, outage_count: Vec<u64>) -> Self {
        let n = trials as f64;
        let empirical_sop: Vec<f64> = outage_count.iter().map(|c| *c as f64 / n).collect();
        let standard_error = empirical_sop
            .iter()
            .map(|p| (p * (1.0 - p) / n).sqrt())
            .collect();
        Self {
            trials,
            seed,
            users,
            outage_count,
            empirical_sop,
            standard_error,
        }
    }

    pub fn sop_for(&self, user_k: usize) -> Option<f64> {
        self.users
            .iter()
            .position(|u| *u == user_k)
            .map(|i| self.empirical_sop[i])
    }
}

/// Independent generator for trial `trial_index`.
pub fn trial_rng(master_seed: u64, trial_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial_index);
    rng
}

/// Circularly-symmetric complex Gaussian with `E|h|² = variance`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let sd = (0.5 * variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(sd * re, sd * im)
}

fn complex_vec<R: Rng + ?Sized>(rng: &mut R, len: usize, variance: f64) -> Vec<Complex64> {
    (0..len).map(|_| complex_normal(rng, variance)).collect()
}

/// `|Σ_m conj(b_m) a_m|²`.
pub fn cascade_gain(first_hop: &[Complex64], second_hop: &[Complex64]) -> f64 {
    first_hop
        .iter()
        .zip(second_hop)
        .map(|(a, b)| b.conj() * a)
        .sum::<Complex64>()
        .norm_sqr()
}

fn rank_cascades(
    stats: &ChannelStats,
    h_br: &[Vec<Complex64>],
    h_rk: &[Vec<Complex64>],
    ordering: OrderingMode,
) -> Vec<f64> {
    let mut gains: Vec<f64> = h_br
        .iter()
        .zip(h_rk)
        .map(|(a, b)| cascade_gain(a, b))
        .collect();
    match ordering {
        OrderingMode::PerUserDistance => {
            gains.sort_by(f64::total_cmp);
            gains
        }
        OrderingMode::CommonVariance => {
            // Strip each link's own scale, order the unit gains, then give
            // rank k the scale of user k.
            for (j, g) in gains.iter_mut().enumerate() {
                *g /= stats.n_br * stats.n_rk[j];
            }
            gains.sort_by(f64::total_cmp);
            gains
                .iter()
                .enumerate()
                .map(|(k, g)| g * stats.n_br * stats.n_rk[k])
                .collect()
        }
    }
}

/// Draws trial `trial_index` of the experiment seeded by `master_seed`.
pub fn sample_realization(
    config: &SystemConfig,
    stats: &ChannelStats,
    ordering: OrderingMode,
    trial_index: u64,
    master_seed: u64,
) -> ChannelRealization {
    let mut rng = trial_rng(master_seed, trial_index);
    let q = config.group_size;
    let users = config.user_count;
    let h_br: Vec<Vec<Complex64>> = (0..=users)
        .map(|_| complex_vec(&mut rng, q, stats.n_br))
        .collect();
    let h_rk: Vec<Vec<Complex64>> = (0..users)
        .map(|k| complex_vec(&mut rng, q, stats.n_rk[k]))
        .collect();
    let h_re = complex_vec(&mut rng, q, stats.n_re);
    let h_ipu = complex_normal(&mut rng, stats.n_ipu);
    let h_ipe = complex_normal(&mut rng, stats.n_ipe);
    let cascades = rank_cascades(stats, &h_br[..users], &h_rk, ordering);
    let cascade_eve = cascade_gain(&h_br[users], &h_re);
    ChannelRealization {
        h_br,
        h_rk,
        h_re,
        h_ipu,
        h_ipe,
        cascades,
        cascade_eve,
    }
}

/// Legitimate and eavesdropper SINRs for rank `k` in one realization.
fn sinr_pair(
    config: &SystemConfig,
    stats: &ChannelStats,
    scenario: Scenario,
    varpi: f64,
    eve: EveTreatment,
    r: &ChannelRealization,
    k: usize,
) -> (f64, f64) {
    let a_k = config.power_alloc[k - 1];
    let nu_k = stats.nu(k);
    let h = r.cascades[k - 1];
    let rho = stats.rho;
    let legit = rho * h * a_k / (rho * h * nu_k + varpi * rho * r.h_ipu.norm_sqr() + 1.0);
    let q = config.group_size as f64;
    let h_e = match (scenario, eve) {
        (Scenario::External, EveTreatment::Sampled) => r.cascade_eve,
        (Scenario::External, EveTreatment::MeanField) => q * stats.n_br * stats.n_re,
        (Scenario::Internal, EveTreatment::Sampled) => r.cascades[0],
        (Scenario::Internal, EveTreatment::MeanField) => q * stats.n_br * stats.n_rk[0],
    };
    let rho_e = stats.rho_e;
    let eve_sinr = rho_e * h_e * a_k / (rho_e * h_e * nu_k + varpi * rho_e * r.h_ipe.norm_sqr() + 1.0);
    (legit, eve_sinr)
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidQuery("trials must be at least 1".into()));
    }
    Ok(())
}

/// Runs `per_trial` over every trial index and adds up the per-user counts.
fn count_outages<F>(options: &SimOptions, width: usize, per_trial: F) -> Result<Vec<u64>>
where
    F: Fn(u64, &mut [u64]) + Sync,
{
    check_trials(options.trials)?;
    let trials = options.trials;
    let chunks = trials.div_ceil(CHUNK);
    let work = || {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut counts = vec![0u64; width];
                let end = ((c + 1) * CHUNK).min(trials);
                for i in c * CHUNK..end {
                    per_trial(i, &mut counts);
                }
                counts
            })
            .reduce(
                || vec![0u64; width],
                |mut a, b| {
                    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                    a
                },
            )
    };
    match options.workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::InvalidQuery(format!("worker pool: {e}")))?;
            Ok(pool.install(work))
        }
        None => Ok(work()),
    }
}

/// Fraction of trials whose secrecy rate falls below `R_k`, per evaluated rank.
pub fn empirical_sop(
    config: &SystemConfig,
    stats: &ChannelStats,
    scenario: Scenario,
    sic_mode: SicMode,
    options: &SimOptions,
) -> Result<SimResult> {
    let users = config.legitimate_users(scenario);
    if users.is_empty() {
        return Err(Error::InvalidQuery("no users to evaluate".into()));
    }
    let varpi = sic_mode.residual_level();
    let counts = count_outages(options, users.len(), |i, counts| {
        let r = sample_realization(config, stats, options.ordering, i, options.seed);
        for (slot, &k) in users.iter().enumerate() {
            let (legit, eve) = sinr_pair(config, stats, scenario, varpi, options.eve, &r, k);
            if secrecy_rate(legit, eve) < config.target_rates[k - 1] {
                counts[slot] += 1;
            }
        }
    })?;
    Ok(SimResult::from_counts(options.trials, options.seed, users, counts))
}

/// Delay-limited throughput from empirical outage probabilities.
pub fn empirical_throughput(
    config: &SystemConfig,
    stats: &ChannelStats,
    scenario: Scenario,
    sic_mode: SicMode,
    options: &SimOptions,
) -> Result<f64> {
    let sim = empirical_sop(config, stats, scenario, sic_mode, options)?;
    let rates: Vec<f64> = sim.users.iter().map(|k| config.target_rates[k - 1]).collect();
    throughput_delay_limited(&sim.empirical_sop, &rates)
}

/// Sum rate `R_OMA = Σ R_k` shared by the time slots of the OMA baseline.
pub fn oma_sum_rate(config: &SystemConfig) -> f64 {
    config.target_rates.iter().sum()
}

/// TDMA baseline: each user owns a `1/K` slot at full power; outage when
/// `(1/K)[log2(1 + ρ|H_k|²) - log2(1 + ρ_e|H_e|²)]⁺ < R_OMA / K`.
pub fn oma_baseline_sop(config: &SystemConfig, stats: &ChannelStats, options: &SimOptions) -> Result<SimResult> {
    let users: Vec<usize> = (1..=config.user_count).collect();
    let k_users = config.user_count as f64;
    let threshold = oma_sum_rate(config) / k_users;
    let q = config.group_size as f64;
    let counts = count_outages(options, users.len(), |i, counts| {
        let r = sample_realization(config, stats, options.ordering, i, options.seed);
        let h_e = match options.eve {
            EveTreatment::Sampled => r.cascade_eve,
            EveTreatment::MeanField => q * stats.n_br * stats.n_re,
        };
        let eve = stats.rho_e * h_e;
        for (slot, &k) in users.iter().enumerate() {
            let legit = stats.rho * r.cascades[k - 1];
            if secrecy_rate(legit, eve) / k_users < threshold {
                counts[slot] += 1;
            }
        }
    })?;
    Ok(SimResult::from_counts(options.trials, options.seed, users, counts))
}

/// `Σ (1 - p_k) R_OMA / K` for an OMA baseline result.
pub fn oma_throughput(config: &SystemConfig, sim: &SimResult) -> Result<f64> {
    let share = oma_sum_rate(config) / config.user_count as f64;
    let rates = vec![share; sim.empirical_sop.len()];
    throughput_delay_limited(&sim.empirical_sop, &rates)
}

/// `n` cascaded gains `|Σ_{m=1}^{q} conj(b_m) a_m|²` with `a ~ CN(0, var_a)`,
/// `b ~ CN(0, var_b)`, one trial stream per sample.
pub fn sample_cascade_gains(q: usize, var_a: f64, var_b: f64, n: u64, seed: u64) -> Vec<f64> {
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let a = complex_vec(&mut rng, q, var_a);
            let b = complex_vec(&mut rng, q, var_b);
            cascade_gain(&a, &b)
        })
        .collect()
}

/// `n` draws of the `k`-th smallest of `user_count` i.i.d. cascaded gains.
pub fn sample_ordered_gains(
    q: usize,
    var_a: f64,
    var_b: f64,
    k: usize,
    user_count: usize,
    n: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    if k == 0 || k > user_count {
        return Err(Error::InvalidQuery(format!("rank {k} outside 1..={user_count}")));
    }
    Ok((0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(seed, i);
            let mut gains: Vec<f64> = (0..user_count)
                .map(|_| {
                    let a = complex_vec(&mut rng, q, var_a);
                    let b = complex_vec(&mut rng, q, var_b);
                    cascade_gain(&a, &b)
                })
                .collect();
            gains.sort_by(f64::total_cmp);
            gains[k - 1]
        })
        .collect())
}

/// Kolmogorov-Smirnov distance between a sample and a continuous CDF.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Two-sample Kolmogorov-Smirnov distance.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_by(f64::total_cmp);
    ys.sort_by(f64::total_cmp);
    let (n, m) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < xs.len() && j < ys.len() {
        let v = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= v {
            i += 1;
        }
        while j < ys.len() && ys[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    fn stats(cfg: &SystemConfig) -> ChannelStats {
        ChannelStats::derive(cfg).unwrap()
    }

    #[test]
    fn realization_is_a_function_of_seed_and_index() {
        let cfg = SystemConfig::default();
        let s = stats(&cfg);
        let a = sample_realization(&cfg, &s, OrderingMode::CommonVariance, 17, 42);
        let b = sample_realization(&cfg, &s, OrderingMode::CommonVariance, 17, 42);
        assert_eq!(a, b);
        let c = sample_realization(&cfg, &s, OrderingMode::CommonVariance, 18, 42);
        assert_ne!(a.cascades, c.cascades);
        let p = sample_realization(&cfg, &s, OrderingMode::PerUserDistance, 17, 42);
        assert!(p.cascades.windows(2).all(|w| w[0] <= w[1]));
        assert!(p.cascades.iter().all(|g| *g >= 0.0));
    }

    #[test]
    fn unreachable_rate_is_certain_outage() {
        let mut cfg = SystemConfig::default();
        cfg.target_rates = vec![10.0; 3];
        let s = stats(&cfg);
        let opts = SimOptions {
            trials: 2000,
            ..SimOptions::default()
        };
        let r = empirical_sop(&cfg, &s, Scenario::External, SicMode::Perfect, &opts).unwrap();
        assert_eq!(r.empirical_sop, vec![1.0; 3]);
        assert_eq!(
            empirical_throughput(&cfg, &s, Scenario::External, SicMode::Perfect, &opts).unwrap(),
            0.0
        );
    }

    #[test]
    fn zero_rate_silent_eve_never_outages() {
        let mut cfg = SystemConfig::default();
        cfg.target_rates = vec![0.0; 3];
        cfg.snr_eve_db = -120.0;
        let s = stats(&cfg);
        let opts = SimOptions {
            trials: 2000,
            ..SimOptions::default()
        };
        let r = empirical_sop(&cfg, &s, Scenario::External, SicMode::Perfect, &opts).unwrap();
        assert_eq!(r.empirical_sop, vec![0.0; 3]);
        let o = oma_baseline_sop(&cfg, &s, &opts).unwrap();
        assert_eq!(o.empirical_sop, vec![0.0; 3]);
    }

    #[test]
    fn zero_trials_rejected() {
        let cfg = SystemConfig::default();
        let s = stats(&cfg);
        let opts = SimOptions {
            trials: 0,
            ..SimOptions::default()
        };
        assert!(empirical_sop(&cfg, &s, Scenario::External, SicMode::Perfect, &opts).is_err());
        assert!(oma_baseline_sop(&cfg, &s, &opts).is_err());
    }

    #[test]
    fn worker_count_does_not_change_counts() {
        let cfg = SystemConfig::default();
        let s = stats(&cfg);
        let mut opts = SimOptions {
            trials: 30_000,
            workers: Some(1),
            ..SimOptions::default()
        };
        let a = empirical_sop(&cfg, &s, Scenario::Internal, SicMode::Perfect, &opts).unwrap();
        opts.workers = Some(4);
        let b = empirical_sop(&cfg, &s, Scenario::Internal, SicMode::Perfect, &opts).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.users, vec![2, 3]);
    }

    #[test]
    fn wald_error_matches_definition() {
        let r = SimResult::from_counts(100, 1, vec![1, 2], vec![25, 0]);
        assert_eq!(r.empirical_sop, vec![0.25, 0.0]);
        assert!((r.standard_error[0] - (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
        assert_eq!(r.standard_error[1], 0.0);
    }

    #[test]
    fn ks_helpers() {
        let xs: Vec<f64> = (0..1000).map(|i| (i as f64 + 0.5) / 1000.0).collect();
        assert!(ks_distance(&xs, |x| x) <= 0.0005 + 1e-12);
        assert_eq!(ks_two_sample(&xs, &xs), 0.0);
        let shifted: Vec<f64> = xs.iter().map(|x| x + 0.5).collect();
        assert!((ks_two_sample(&xs, &shifted) - 0.5).abs() <= 1e-3 + 1e-12);
    }
}
