//! Comparisons against values computed independently with mpmath (30
//! digits) and scipy; `reference/generate.py` regenerates the tables.

use risnoma::channel_dist::{cascade_cdf, cascade_cdf_ordered, CascadeParams};
use risnoma::config::{Scenario, SicMode, SystemConfig};
use risnoma::secrecy::{SecrecyAnalyzer, SecrecyQuery};
use risnoma::special_math::{bessel_k, ScaledBesselKernel};

const BESSEL: [(u32, f64, f64); 54] = [
    (0, 1e-6, 1.3931442073626419413e+1),
    (0, 0.01, 4.7212447301610949651),
    (0, 0.5, 9.2441907122766586178e-1),
    (0, 1.0, 4.2102443824070833334e-1),
    (0, 2.0, 1.1389387274953343565e-1),
    (0, 7.5, 2.4917761635611438901e-4),
    (0, 30.0, 2.1324774964630563712e-14),
    (0, 120.0, 8.7635680998255777221e-54),
    (0, 500.0, 3.9923216091177928774e-219),
    (1, 1e-6, 9.9999999999278427896e+5),
    (1, 0.01, 9.9973894118296247643e+1),
    (1, 0.5, 1.6564411200033008937),
    (1, 1.0, 6.0190723019723457474e-1),
    (1, 2.0, 1.3986588181652242728e-1),
    (1, 7.5, 2.6529739012528952599e-4),
    (1, 30.0, 2.1677320018915494249e-14),
    (1, 120.0, 8.8000075200927613541e-54),
    (1, 500.0, 3.9963119385460033495e-219),
    (2, 1e-6, 1.9999999999995e+12),
    (2, 0.01, 1.9999500068389410624e+4),
    (2, 0.5, 7.5501835512408694366),
    (2, 1.0, 1.6248388986351774828),
    (2, 2.0, 2.5375975456605586294e-1),
    (2, 7.5, 3.1992358705619159594e-4),
    (2, 30.0, 2.2769929632558263328e-14),
    (2, 120.0, 8.9102348918271237447e-54),
    (2, 500.0, 4.0083068568719768908e-219),
    (5, 1e-6, 3.83999999999976e+32),
    (5, 0.01, 3.8399760000999995833e+12),
    (5, 0.5, 1.2097979476096393394e+4),
    (5, 1.0, 3.6096058960124070066e+2),
    (5, 2.0, 9.4310491005964674428),
    (5, 7.5, 1.1491630148312387836e-3),
    (5, 30.0, 3.2103335105890262479e-14),
    (5, 120.0, 9.7213543937748748357e-54),
    (5, 500.0, 4.0932847517624637829e-219),
    (8, 1e-6, 6.4511999999997696e+53),
    (8, 0.01, 6.45117696004799992e+21),
    (8, 0.5, 1.6368380812448185595e+8),
    (8, 1.0, 6.2255212295866777464e+5),
    (8, 2.0, 2.1881172852111299802e+3),
    (8, 7.5, 1.0919277564216618432e-2),
    (8, 30.0, 6.0565817824131864255e-14),
    (8, 120.0, 1.1428067187536885863e-53),
    (8, 500.0, 4.2559061464756329438e-219),
    (16, 1e-6, 4.2849873690623285835e+112),
    (16, 0.01, 4.2849802274231613612e+48),
    (16, 0.5, 2.7965345262298369873e+21),
    (16, 1.0, 4.2142044935535536062e+16),
    (16, 2.0, 6.1176569352806152418e+11),
    (16, 7.5, 1.7230597602155406752e+2),
    (16, 30.0, 1.3028044515285287395e-12),
    (16, 120.0, 2.5313331902502751618e-53),
    (16, 500.0, 5.1556632108954209613e-219),
];

const PARENT_CDF: [(u32, f64, f64); 30] = [
    (1, 0.001, 6.7574513684422573025e-3),
    (1, 0.1, 2.3343313884643195363e-1),
    (1, 1.0, 7.2026823636695514543e-1),
    (1, 4.0, 9.5006600445092627412e-1),
    (1, 16.0, 9.9875704630555999093e-1),
    (1, 60.0, 9.9999905541161710627e-1),
    (2, 0.001, 9.9637190672133597663e-4),
    (2, 0.1, 8.6085719284212621627e-2),
    (2, 1.0, 4.9248049086788827413e-1),
    (2, 4.0, 8.6078859576410207996e-1),
    (2, 16.0, 9.9406998373842989854e-1),
    (2, 60.0, 9.9999196405765768512e-1),
    (4, 0.001, 3.3325002772334399461e-4),
    (4, 0.1, 3.2525471547937763002e-2),
    (4, 1.0, 2.6802802419601389253e-1),
    (4, 4.0, 6.681130018420226815e-1),
    (4, 16.0, 9.6831297748538955542e-1),
    (4, 60.0, 9.9988326698274772458e-1),
    (8, 0.001, 1.4284523888883928902e-4),
    (8, 0.1, 1.4167455389939810798e-2),
    (8, 1.0, 1.316994899955833412e-1),
    (8, 4.0, 4.2164535505355711049e-1),
    (8, 16.0, 8.638197788941744993e-1),
    (8, 60.0, 9.9782714079168554086e-1),
    (16, 0.001, 6.6664285775334503483e-5),
    (16, 0.1, 6.6429180659614311556e-3),
    (16, 1.0, 6.4345515216122177327e-2),
    (16, 4.0, 2.3217522784983007706e-1),
    (16, 16.0, 6.4294660198948506523e-1),
    (16, 60.0, 9.7210098724400119175e-1),
];

/// `(scenario, snr_db, k, residual level, SOP)` with `ρ_e = 0 dB`.
const FIG2_SOP: [(Scenario, f64, usize, f64, f64); 30] = [
    (Scenario::External, 10.0, 1, 0.0, 0.5723732083699582),
    (Scenario::External, 10.0, 1, 1.0, 0.604246425012491),
    (Scenario::External, 10.0, 2, 0.0, 0.10202602845424373),
    (Scenario::External, 10.0, 2, 1.0, 0.11890543900535752),
    (Scenario::External, 10.0, 3, 0.0, 0.00270651954949525),
    (Scenario::External, 10.0, 3, 1.0, 0.003573810774232808),
    (Scenario::External, 20.0, 1, 0.0, 0.0830442307062958),
    (Scenario::External, 20.0, 1, 1.0, 0.15542615692650857),
    (Scenario::External, 20.0, 2, 0.0, 0.0014518013603930147),
    (Scenario::External, 20.0, 2, 1.0, 0.006642753794397535),
    (Scenario::External, 20.0, 3, 0.0, 3.4151228319797927e-06),
    (Scenario::External, 20.0, 3, 1.0, 5.043157358986414e-05),
    (Scenario::External, 30.0, 1, 0.0, 0.008650692275434036),
    (Scenario::External, 30.0, 1, 1.0, 0.08737600692487212),
    (Scenario::External, 30.0, 2, 0.0, 1.5063202367186825e-05),
    (Scenario::External, 30.0, 2, 1.0, 0.0029603311364481614),
    (Scenario::External, 30.0, 3, 0.0, 3.497584479327496e-09),
    (Scenario::External, 30.0, 3, 1.0, 2.0935869292563593e-05),
    (Scenario::Internal, 10.0, 2, 0.0, 0.11954557241248612),
    (Scenario::Internal, 10.0, 2, 1.0, 0.13860889775201757),
    (Scenario::Internal, 10.0, 3, 0.0, 0.0029948547098330425),
    (Scenario::Internal, 10.0, 3, 1.0, 0.003946451657300892),
    (Scenario::Internal, 20.0, 2, 0.0, 0.0017610550387691314),
    (Scenario::Internal, 20.0, 2, 1.0, 0.00797789313171462),
    (Scenario::Internal, 20.0, 3, 0.0, 3.8111665709771763e-06),
    (Scenario::Internal, 20.0, 3, 1.0, 5.6064197518113394e-05),
    (Scenario::Internal, 30.0, 2, 0.0, 1.834147149119033e-05),
    (Scenario::Internal, 30.0, 2, 1.0, 0.003558346266484223),
    (Scenario::Internal, 30.0, 3, 0.0, 3.906683172576867e-09),
    (Scenario::Internal, 30.0, 3, 1.0, 2.3275637045921443e-05),
];

#[test]
fn bessel_matches_reference() {
    for (nu, x, expected) in BESSEL {
        let got = bessel_k(nu, x).unwrap();
        let rel = (got / expected - 1.0).abs();
        assert!(rel < 1e-13, "K_{nu}({x}) = {got:e}, expected {expected:e}, rel {rel:e}");
    }
}

#[test]
fn parent_cdf_matches_reference() {
    for (q, u, expected) in PARENT_CDF {
        let kernel = ScaledBesselKernel::new(q).unwrap();
        let got = kernel.cdf(u);
        assert!((got / expected - 1.0).abs() < 1e-13, "q={q} u={u} got {got} expected {expected}");
        // The same value through unscaled variances.
        let params = CascadeParams::new(q, 0.25, 0.5).unwrap();
        let via_params = cascade_cdf(u * 0.125, params).unwrap();
        assert!((via_params / expected - 1.0).abs() < 1e-13);
    }
}

/// `P(at least k of n below)`, the textbook form of the order-statistic CDF.
fn binomial_tail(p: f64, k: usize, n: usize) -> f64 {
    let choose = |n: usize, j: usize| (0..j).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64);
    (k..=n)
        .map(|j| choose(n, j) * p.powi(j as i32) * (1.0 - p).powi((n - j) as i32))
        .sum()
}

#[test]
fn ordered_cdf_matches_binomial_tail() {
    let params = CascadeParams::new(8, 1.0 / 9.0, 1.0 / 16.0).unwrap();
    for n in 1..=6 {
        for k in 1..=n {
            for z in [1e-4, 1e-3, 0.01, 0.05, 0.1, 0.3] {
                let p = cascade_cdf(z, params).unwrap();
                let got = cascade_cdf_ordered(z, k, n, params).unwrap();
                let expected = binomial_tail(p, k, n);
                assert!(
                    (got - expected).abs() < 1e-13 + 1e-11 * expected,
                    "n={n} k={k} z={z}: {got} vs {expected}"
                );
            }
        }
    }
}

#[test]
fn closed_form_sop_matches_reference() {
    let cfg = SystemConfig {
        snr_eve_db: 0.0,
        ..SystemConfig::default()
    };
    let base = SecrecyAnalyzer::new(&cfg).unwrap();
    for (scenario, snr, k, varpi, expected) in FIG2_SOP {
        let a = base.with_snr_db(snr).unwrap();
        let sic = if varpi == 0.0 {
            SicMode::Perfect
        } else {
            SicMode::Imperfect { residual_level: varpi }
        };
        let got = a.sop_closed_form(&SecrecyQuery::new(k, scenario, sic)).unwrap();
        let rel = (got / expected - 1.0).abs();
        let tol = if varpi == 0.0 { 1e-11 } else { 1e-6 };
        assert!(rel < tol, "{scenario:?} snr={snr} k={k} varpi={varpi}: {got:e} vs {expected:e} (rel {rel:e})");
    }
}
