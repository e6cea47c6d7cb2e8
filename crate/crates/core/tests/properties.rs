use proptest::prelude::*;
use risnoma::channel_dist::{
    cascade_cdf, cascade_cdf_ordered, cascade_cdf_ordered_raw, cascade_pdf, ordered_from_parent_raw, CascadeParams,
};
use risnoma::config::{db_to_linear, derive_stats, linear_to_db, Scenario, SicMode, SystemConfig};
use risnoma::secrecy::{system_sop, throughput_delay_limited, secrecy_rate, SecrecyAnalyzer, SecrecyQuery};
use risnoma::special_math::{bessel_k, gauss_laguerre, laguerre_eval, ScaledBesselKernel};
use risnoma::sweep::SweepRange;

const IPSIC: SicMode = SicMode::Imperfect { residual_level: 1.0 };

fn factorial(m: u32) -> f64 {
    (1..=m).map(f64::from).product()
}

#[test]
fn quadrature_weights_and_moments() {
    for d in [1usize, 2, 4, 8, 16, 32, 64, 128, 300] {
        let rule = gauss_laguerre(d).unwrap();
        let total: f64 = rule.weights().iter().sum();
        let tol = if d <= 64 { 1e-12 } else { 1e-9 };
        assert!((total - 1.0).abs() < tol, "D={d} sum={total}");
        for m in 0..=((2 * d - 1).min(20) as u32) {
            let moment: f64 = rule.iter().map(|(t, w)| w * t.powi(m as i32)).sum();
            assert!((moment / factorial(m) - 1.0).abs() < 1e-8, "D={d} m={m}");
        }
        assert!(rule.nodes().windows(2).all(|w| w[0] < w[1]));
        assert!(rule.weights().iter().all(|w| *w >= 0.0));
    }
}

#[test]
fn bessel_monotone_in_argument_and_order() {
    for q in 0..=16 {
        let xs: Vec<f64> = (0..200).map(|i| 1e-3 * 1.05f64.powi(i)).collect();
        for w in xs.windows(2) {
            assert!(bessel_k(q, w[1]).unwrap() < bessel_k(q, w[0]).unwrap(), "q={q} x={}", w[1]);
        }
    }
    for x in [0.5, 1.0, 5.0] {
        for q in 0..40 {
            assert!(bessel_k(q + 1, x).unwrap() > bessel_k(q, x).unwrap(), "q={q} x={x}");
        }
    }
}

#[test]
fn product_limit_at_small_argument() {
    for q in 1..=8 {
        let s = ScaledBesselKernel::new(q).unwrap().survival(1e-12);
        assert!((1.0 - 1e-4..=1.0).contains(&s), "q={q} s={s}");
    }
}

#[test]
fn laguerre_derivative_matches_central_difference() {
    for n in [1usize, 2, 5, 10, 20, 40, 64] {
        for i in 0..=50 {
            let x = 0.1 * (500f64).powf(i as f64 / 50.0);
            let (_, d) = laguerre_eval(n, x);
            let h = 1e-5 * x;
            let fd = (laguerre_eval(n, x + h).0 - laguerre_eval(n, x - h).0) / (2.0 * h);
            // Near an extremum the derivative itself vanishes, so compare
            // against the local size of the derivative as well.
            let scale = d.abs().max(laguerre_eval(n, x).0.abs() / x.max(1.0));
            assert!((fd - d).abs() <= 1e-6 * scale, "n={n} x={x} d={d} fd={fd}");
        }
    }
}

#[test]
fn doubling_distances_quarters_variances() {
    let cfg = SystemConfig::default();
    let mut far = cfg.clone();
    far.dist_bs_ris *= 2.0;
    far.dist_ris_eve *= 2.0;
    far.dist_ris_user.iter_mut().for_each(|d| *d *= 2.0);
    let (a, b) = (derive_stats(&cfg).unwrap(), derive_stats(&far).unwrap());
    assert_eq!(b.n_br, a.n_br / 4.0);
    assert_eq!(b.n_re, a.n_re / 4.0);
    for (x, y) in a.n_rk.iter().zip(&b.n_rk) {
        assert_eq!(*y, x / 4.0);
    }
    assert_eq!(derive_stats(&cfg).unwrap(), a);
}

#[test]
fn order_statistics_average_to_the_parent() {
    let params = CascadeParams::new(8, 1.0 / 9.0, 1.0 / 16.0).unwrap();
    for users in 1..=8 {
        for i in 0..60 {
            let z = 1e-4 * 1.15f64.powi(i);
            let mean: f64 = (1..=users)
                .map(|k| cascade_cdf_ordered(z, k, users, params).unwrap())
                .sum::<f64>()
                / users as f64;
            assert!((mean - cascade_cdf(z, params).unwrap()).abs() < 1e-10, "K={users} z={z}");
        }
    }
}

#[test]
fn secrecy_invariants_on_grids() {
    let fig2 = SystemConfig {
        snr_eve_db: 0.0,
        ..SystemConfig::default()
    };
    let base = SecrecyAnalyzer::new(&fig2).unwrap();
    for k in 1..=3 {
        let q = SecrecyQuery::new(k, Scenario::External, SicMode::Perfect);
        let mut prev = f64::INFINITY;
        for i in 0..=10 {
            let p = base.with_snr_db(5.0 * i as f64).unwrap().sop_closed_form(&q).unwrap();
            assert!((0.0..=1.0).contains(&p));
            assert!(p <= prev, "k={k} not nonincreasing at {} dB", 5 * i);
            prev = p;
        }
    }
    for rho in [30.0, 40.0, 50.0] {
        let a = base.with_snr_db(rho).unwrap();
        let p: Vec<f64> = (1..=3)
            .map(|k| a.sop_closed_form(&SecrecyQuery::new(k, Scenario::External, SicMode::Perfect)).unwrap())
            .collect();
        assert!(p[2] <= p[1] && p[1] <= p[0], "rho={rho}: {p:?}");
    }
    for sic in [SicMode::Perfect, IPSIC] {
        for k in 1..=3 {
            let q = SecrecyQuery::new(k, Scenario::External, sic);
            let mut prev = 0.0;
            for e in 0..=6 {
                let cfg = SystemConfig {
                    snr_eve_db: -10.0 + 5.0 * e as f64,
                    ..fig2.clone()
                };
                let p = SecrecyAnalyzer::new(&cfg).unwrap().sop_closed_form(&q).unwrap();
                assert!(p >= prev - 1e-15, "{} k={k} rho_e step {e}", sic.label());
                prev = p;
            }
            let mut prev = 0.0;
            for r in 0..=8 {
                let mut cfg = fig2.clone();
                cfg.target_rates[k - 1] = 0.02 * r as f64;
                let p = SecrecyAnalyzer::new(&cfg).unwrap().sop_closed_form(&q).unwrap();
                assert!(p >= prev - 1e-15, "{} k={k} rate step {r}", sic.label());
                prev = p;
            }
        }
    }
}

#[test]
fn saturated_threshold_gives_certain_outage() {
    // A rate high enough that 2^R (1 + γ̄_e) - 1 exceeds a_k / ν_k for k < K.
    let mut cfg = SystemConfig::default();
    cfg.target_rates = vec![2.0; 3];
    let a = SecrecyAnalyzer::new(&cfg).unwrap();
    for sic in [SicMode::Perfect, IPSIC] {
        for k in 1..3 {
            let q = SecrecyQuery::new(k, Scenario::External, sic);
            let (alloc, nu) = (cfg.power_alloc[k - 1], cfg.nu(k).unwrap());
            assert!(a.outage_threshold(&q, 0.0).unwrap() >= alloc / nu);
            if sic.is_perfect() {
                assert_eq!(a.sop_closed_form(&q).unwrap(), 1.0);
            }
        }
    }
}

#[test]
fn asymptote_scales_as_rho_to_minus_k() {
    let cfg = SystemConfig::default();
    for k in 1..=3 {
        let q = SecrecyQuery::new(k, Scenario::External, SicMode::Perfect);
        let db = 10.0 * 2f64.log10();
        let lo = SecrecyAnalyzer::new(&cfg).unwrap().with_snr_db(40.0).unwrap();
        let hi = lo.with_snr_db(40.0 + db).unwrap();
        let ratio = hi.sop_asymptotic(&q).unwrap() / lo.sop_asymptotic(&q).unwrap();
        assert!((ratio / 2f64.powi(-(k as i32)) - 1.0).abs() < 1e-9, "k={k} ratio={ratio}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn db_round_trip(db in -80.0f64..80.0) {
        prop_assert!((linear_to_db(db_to_linear(db)) - db).abs() < 1e-12);
    }

    #[test]
    fn cascade_cdf_is_a_distribution(q in 1u32..=32, va in 1e-3f64..10.0, vb in 1e-3f64..10.0, z1 in 0.0f64..50.0, dz in 0.0f64..50.0) {
        let p = CascadeParams::new(q, va, vb).unwrap();
        let (f1, f2) = (cascade_cdf(z1, p).unwrap(), cascade_cdf(z1 + dz, p).unwrap());
        prop_assert!((0.0..=1.0).contains(&f1));
        prop_assert!(f2 >= f1);
        prop_assert!(cascade_pdf(z1, p).unwrap() >= 0.0);
    }

    #[test]
    fn ordered_cdf_decreases_with_rank(users in 1usize..=8, z in 1e-5f64..1.0) {
        let p = CascadeParams::new(6, 1.0 / 9.0, 1.0 / 36.0).unwrap();
        for k in 1..users {
            prop_assert!(
                cascade_cdf_ordered(z, k + 1, users, p).unwrap() <= cascade_cdf_ordered(z, k, users, p).unwrap() + 1e-15
            );
        }
    }

    #[test]
    fn alternating_sum_stays_in_range(users in 1usize..=8, u in 0.0f64..=1.0) {
        for k in 1..=users {
            let raw = ordered_from_parent_raw(u, k, users).unwrap();
            prop_assert!((-1e-12..=1.0 + 1e-12).contains(&raw), "k={} K={} u={} raw={}", k, users, u, raw);
        }
        let p = CascadeParams::new(4, 1.0, 1.0).unwrap();
        let raw = cascade_cdf_ordered_raw(u * 10.0, 1, users, p).unwrap();
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&raw));
    }

    #[test]
    fn legit_cdf_monotone_in_x(k in 1usize..=3, x1 in 0.0f64..2.0, dx in 0.0f64..2.0, imperfect in any::<bool>()) {
        let a = SecrecyAnalyzer::new(&SystemConfig::default()).unwrap();
        let sic = if imperfect { IPSIC } else { SicMode::Perfect };
        let q = SecrecyQuery::new(k, Scenario::External, sic);
        let (f1, f2) = (a.cdf_sinr_legit(&q, x1).unwrap(), a.cdf_sinr_legit(&q, x1 + dx).unwrap());
        prop_assert!((0.0..=1.0).contains(&f1));
        prop_assert!(f2 >= f1 - 1e-12);
        let (e1, e2) = (a.cdf_sinr_eve(&q, x1).unwrap(), a.cdf_sinr_eve(&q, x1 + dx).unwrap());
        prop_assert!(e2 >= e1 - 1e-12);
    }

    #[test]
    fn sop_is_a_probability(snr in -10.0f64..60.0, snr_e in -10.0f64..30.0, rate in 0.0f64..1.0, k in 1usize..=3, internal in any::<bool>()) {
        let cfg = SystemConfig {
            snr_legit_db: snr,
            snr_eve_db: snr_e,
            target_rates: vec![rate; 3],
            ..SystemConfig::default()
        };
        let scenario = if internal { Scenario::Internal } else { Scenario::External };
        let k = if internal { k.max(2) } else { k };
        let a = SecrecyAnalyzer::new(&cfg).unwrap();
        for sic in [SicMode::Perfect, IPSIC] {
            let p = a.sop_closed_form(&SecrecyQuery::new(k, scenario, sic).with_orders(64, 64)).unwrap();
            prop_assert!((0.0..=1.0).contains(&p));
        }
    }

    #[test]
    fn system_metrics_bounds(ps in prop::collection::vec(0.0f64..=1.0, 1..6), rate in 0.0f64..1.0) {
        let s = system_sop(&ps).unwrap();
        prop_assert!(s <= 1.0 + 1e-15);
        prop_assert!(ps.iter().all(|p| s >= p - 1e-15));
        let rates = vec![rate; ps.len()];
        let t = throughput_delay_limited(&ps, &rates).unwrap();
        prop_assert!(t >= 0.0 && t <= rate * ps.len() as f64 + 1e-12);
    }

    #[test]
    fn secrecy_rate_nonnegative(gl in 0.0f64..1e6, ge in 0.0f64..1e6) {
        let r = secrecy_rate(gl, ge);
        prop_assert!(r >= 0.0);
        prop_assert_eq!(r == 0.0, gl <= ge);
    }

    #[test]
    fn config_json_round_trip(snr in -20.0f64..60.0, rates in prop::collection::vec(0.0f64..1.0, 3)) {
        let cfg = SystemConfig { snr_legit_db: snr, target_rates: rates, ..SystemConfig::default() };
        let back = SystemConfig::from_json_str(&cfg.to_json_string()).unwrap();
        prop_assert_eq!(back, cfg);
    }

    #[test]
    fn sweep_range_values_stay_in_bounds(start in -50.0f64..50.0, len in 0.0f64..100.0, step in 0.01f64..10.0) {
        let r = SweepRange::new(start, start + len, step);
        let v = r.values().unwrap();
        prop_assert_eq!(v[0], start);
        prop_assert!(v.iter().all(|x| *x <= start + len + 1e-9 * step));
        prop_assert!(v.windows(2).all(|w| w[1] > w[0]));
        prop_assert!(*v.last().unwrap() + step > start + len - 1e-9 * step);
    }
}
