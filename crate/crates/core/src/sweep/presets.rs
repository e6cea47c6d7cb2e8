//! Figure presets: Table I defaults plus each figure's caption overrides.

use std::collections::BTreeSet;

use super::{OutputKind, SweepRange, SweepSpec, SweepVariable};
use crate::config::{Scenario, SicMode, SystemConfig};
use crate::error::{Error, Result};
use crate::monte_carlo::SimOptions;

pub const PRESET_NAMES: [&str; 10] = [
    "table1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "fig9", "fig10",
];

#[derive(Debug, Clone)]
pub struct Preset {
    pub name: &'static str,
    pub figure: &'static str,
    pub title: &'static str,
    /// Human-readable deviations from Table I.
    pub overrides: Vec<String>,
    pub specs: Vec<SweepSpec>,
}

impl Preset {
    pub fn describe(&self) -> String {
        let mut s = format!("{} ({}): {}\n", self.name, self.figure, self.title);
        if self.overrides.is_empty() {
            s.push_str("overrides: none (Table I)\n");
        } else {
            s.push_str("overrides:\n");
            for o in &self.overrides {
                s.push_str(&format!("  {o}\n"));
            }
        }
        s.push_str("series:\n");
        for spec in &self.specs {
            let sics: Vec<&str> = spec.sic_modes.iter().map(|m| m.label()).collect();
            s.push_str(&format!(
                "  {}: {:?} {:?} over {} to {} step {}, sic [{}]{}\n",
                spec.series,
                spec.scenario,
                spec.variable,
                spec.range.start,
                spec.range.end,
                spec.range.step,
                sics.join(", "),
                if spec.include_oma { " + oma" } else { "" },
            ));
        }
        s
    }
}

const IPSIC: SicMode = SicMode::Imperfect { residual_level: 1.0 };

fn both_sic() -> Vec<SicMode> {
    vec![SicMode::Perfect, IPSIC]
}

fn outputs(list: &[OutputKind]) -> BTreeSet<OutputKind> {
    list.iter().copied().collect()
}

fn snr_range() -> SweepRange {
    SweepRange::new(0.0, 50.0, 5.0)
}

fn two_users(mut cfg: SystemConfig) -> SystemConfig {
    cfg.user_count = 2;
    cfg.power_alloc = vec![0.7, 0.3];
    cfg.dist_ris_user = vec![6.0, 4.0];
    cfg.target_rates = vec![0.04, 0.04];
    cfg
}

fn spec(
    series: &str,
    cfg: SystemConfig,
    scenario: Scenario,
    variable: SweepVariable,
    range: SweepRange,
    out: &[OutputKind],
    sim: SimOptions,
) -> SweepSpec {
    let mut s = SweepSpec::new(cfg, variable, range);
    s.series = series.into();
    s.scenario = scenario;
    s.sic_modes = both_sic();
    s.outputs = outputs(out);
    s.sim = sim;
    s
}

/// Builds preset `name` with Monte Carlo settings taken from `sim`.
pub fn preset(name: &str, sim: SimOptions) -> Result<Preset> {
    use OutputKind::*;
    use Scenario::{External, Internal};
    use SweepVariable::*;
    let table = SystemConfig::default();
    let sop_outputs = [Analytic, Asymptotic, Empirical, SystemSop];
    let p = match name {
        "table1" => Preset {
            name: "table1",
            figure: "Table I",
            title: "Table I defaults, SOP versus transmit SNR, external Eve",
            overrides: vec![],
            specs: vec![spec("table1", table, External, SnrDb, snr_range(), &sop_outputs, sim)],
        },
        "fig2" => {
            let mut cfg = table;
            cfg.snr_eve_db = 0.0;
            let s = spec("fig2", cfg, External, SnrDb, snr_range(), &sop_outputs, sim);
            Preset {
                name: "fig2",
                figure: "Fig. 2",
                title: "SOP versus transmit SNR, external Eve",
                overrides: vec!["snr_eve_db = 0 (caption; Table I says 10)".into()],
                specs: vec![s],
            }
        }
        "fig3" => {
            let mut cfg = table;
            cfg.ris_elements = 12;
            cfg.group_size = 6;
            cfg.residual_user_db = -10.0;
            cfg.residual_eve_db = -10.0;
            let specs = [0.04, 0.1, 0.2]
                .iter()
                .map(|&r| {
                    let mut c = cfg.clone();
                    c.target_rates = vec![r; 3];
                    spec(&format!("fig3_rate{r}"), c, External, SnrDb, snr_range(), &sop_outputs, sim)
                })
                .collect();
            Preset {
                name: "fig3",
                figure: "Fig. 3",
                title: "SOP versus transmit SNR for several target secrecy rates, external Eve",
                overrides: vec![
                    "ris_elements = 12, group_size = 6".into(),
                    "residual_user_db = residual_eve_db = -10".into(),
                    "target_rates in {0.04, 0.1, 0.2} (values not given in the caption)".into(),
                ],
                specs,
            }
        }
        "fig4" => {
            let specs = [4usize, 8, 12, 16, 20]
                .iter()
                .map(|&m| {
                    let mut c = table.clone();
                    c.ris_elements = m;
                    c.partition_p = 1;
                    c.group_size = m;
                    spec(&format!("fig4_m{m}"), c, External, SnrDb, snr_range(), &[Analytic, SystemSop], sim)
                })
                .collect();
            Preset {
                name: "fig4",
                figure: "Fig. 4",
                title: "System SOP versus transmit SNR for M = Q in {4, ..., 20}, external Eve",
                overrides: vec!["partition_p = 1, group_size = ris_elements in {4, 8, 12, 16, 20}".into()],
                specs,
            }
        }
        "fig5" => {
            let mut cfg = table;
            cfg.ris_elements = 12;
            cfg.group_size = 6;
            let mut specs = Vec::new();
            for d in [3.0, 6.0] {
                let mut c = cfg.clone();
                c.dist_bs_ris = d;
                specs.push(spec(&format!("fig5a_dbr{d}"), c, External, SnrDb, snr_range(), &sop_outputs, sim));
            }
            for (label, dist) in [("near", vec![6.0, 4.0, 2.0]), ("far", vec![12.0, 8.0, 4.0])] {
                let mut c = cfg.clone();
                c.dist_ris_user = dist;
                specs.push(spec(&format!("fig5b_{label}"), c, External, SnrDb, snr_range(), &sop_outputs, sim));
            }
            Preset {
                name: "fig5",
                figure: "Fig. 5",
                title: "SOP versus transmit SNR for several BS-RIS and RIS-user distances, external Eve",
                overrides: vec![
                    "ris_elements = 12, group_size = 6".into(),
                    "(a) dist_bs_ris in {3, 6}".into(),
                    "(b) dist_ris_user in {[6, 4, 2], [12, 8, 4]} (far values not given in the caption)".into(),
                ],
                specs,
            }
        }
        "fig6" => {
            let mut cfg = two_users(table);
            cfg.snr_legit_db = 10.0;
            let range = SweepRange::new(0.05, 0.95, 0.05);
            let specs = vec![
                spec("fig6a", cfg.clone(), External, PowerOffsetAT, range, &[Analytic, SystemSop], sim),
                spec("fig6b", cfg, Internal, PowerOffsetAT, range, &[Analytic, SystemSop], sim),
            ];
            Preset {
                name: "fig6",
                figure: "Fig. 6",
                title: "System SOP versus power offset a_T (a_1 = a_T, a_2 = 1 - a_T), (a) external, (b) internal",
                overrides: vec![
                    "user_count = 2, dist_ris_user = [6, 4], target_rates = [0.04, 0.04]".into(),
                    "snr_legit_db = 10".into(),
                    "descending power order not enforced".into(),
                ],
                specs,
            }
        }
        "fig7" => {
            let mut cfg = table;
            cfg.partition_p = 1;
            cfg.group_size = 16;
            cfg.target_rates = vec![0.08, 0.17, 0.25];
            let mut s = spec("fig7", cfg, External, SnrDb, SweepRange::new(0.0, 60.0, 5.0), &[Analytic, Throughput], sim);
            s.include_oma = true;
            Preset {
                name: "fig7",
                figure: "Fig. 7",
                title: "Secrecy throughput versus transmit SNR, RIS-NOMA and RIS-OMA, external Eve",
                overrides: vec![
                    "partition_p = 1, group_size = 16".into(),
                    "target_rates = [0.08, 0.17, 0.25]".into(),
                ],
                specs: vec![s],
            }
        }
        "fig8" => {
            let mut c44 = table.clone();
            c44.partition_p = 4;
            c44.group_size = 4;
            let specs = vec![
                spec("fig8_p2q8", table, Internal, SnrDb, snr_range(), &sop_outputs, sim),
                spec("fig8_p4q4", c44, Internal, SnrDb, snr_range(), &sop_outputs, sim),
            ];
            Preset {
                name: "fig8",
                figure: "Fig. 8",
                title: "SOP versus transmit SNR, internal Eve (user 1), two ordering setups",
                overrides: vec!["(partition_p, group_size) in {(2, 8), (4, 4)}".into()],
                specs,
            }
        }
        "fig9" => {
            let mut cfg = table;
            cfg.ris_elements = 12;
            cfg.group_size = 6;
            cfg.snr_eve_db = 5.0;
            let specs = [-30.0, -20.0, -10.0]
                .iter()
                .map(|&db| {
                    let mut c = cfg.clone();
                    c.residual_user_db = db;
                    c.residual_eve_db = db;
                    let mut s = spec(&format!("fig9_res{db}"), c, Internal, SnrDb, snr_range(), &sop_outputs, sim);
                    s.sic_modes = vec![IPSIC];
                    s
                })
                .collect();
            Preset {
                name: "fig9",
                figure: "Fig. 9",
                title: "SOP versus transmit SNR for several residual interference levels, internal Eve",
                overrides: vec![
                    "ris_elements = 12, group_size = 6, snr_eve_db = 5".into(),
                    "residual_user_db = residual_eve_db in {-30, -20, -10} (values not given in the caption)".into(),
                ],
                specs,
            }
        }
        "fig10" => Preset {
            name: "fig10",
            figure: "Fig. 10",
            title: "Secrecy throughput versus transmit SNR, internal Eve",
            overrides: vec![],
            specs: vec![spec("fig10", table, Internal, SnrDb, SweepRange::new(0.0, 60.0, 5.0), &[Analytic, Throughput], sim)],
        },
        other => {
            return Err(Error::InvalidSweep(format!(
                "unknown preset '{other}', expected one of {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_preset_builds_and_validates() {
        for name in PRESET_NAMES {
            let p = preset(name, SimOptions::default()).unwrap();
            assert_eq!(p.name, name);
            for s in &p.specs {
                s.validate().unwrap_or_else(|e| panic!("{name}/{}: {e}", s.series));
            }
            assert!(p.describe().contains(p.figure));
        }
        assert!(preset("fig11", SimOptions::default()).is_err());
    }

    #[test]
    fn fig2_shape_and_override() {
        let p = preset("fig2", SimOptions::default()).unwrap();
        let s = &p.specs[0];
        assert_eq!(s.config.snr_eve_db, 0.0);
        assert_eq!(s.range.values().unwrap().len(), 11);
        assert_eq!(s.sic_modes.len(), 2);
        assert_eq!(s.config.legitimate_users(s.scenario).len(), 3);
        assert!(p.describe().contains("snr_eve_db = 0"));
    }
}
