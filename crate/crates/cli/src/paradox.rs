use pdc_core::ghz::{paradox_gap_numeric, paradox_report, GhzModel, ParadoxGap, ParadoxReport};
use serde::Serialize;

use crate::config::RunConfig;
use crate::output::{json, num, Sink};
use crate::CliError;

#[derive(Debug, Clone, Serialize)]
pub struct Entry {
    #[serde(flatten)]
    pub report: ParadoxReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub numeric: Option<ParadoxGap>,
}

pub fn entries(config: &RunConfig) -> Result<Vec<Entry>, CliError> {
    let model = GhzModel::new()?;
    config
        .g
        .iter()
        .map(|&g| {
            let report = paradox_report(&model, g, &config.phases)?;
            let numeric =
                if config.backend.numeric() { Some(paradox_gap_numeric(g, &config.phases, config.cutoff)?) } else { None };
            Ok(Entry { report, numeric })
        })
        .collect()
}

pub fn run(config: &RunConfig, sink: &Sink) -> Result<(), CliError> {
    let entries = entries(config)?;
    sink.primary("paradox.json", &(json(&entries)? + "\n"))?;
    for e in &entries {
        let r = &e.report;
        let worst = r.implications.iter().filter(|i| i.target_pump_on).map(|i| i.deviation).fold(0.0, f64::max);
        sink.note(&format!(
            "g={}: P(all off) {} vs P(all on) {}, gap {}, budget {}, worst implication deviation {}, survives: {}{}",
            r.g,
            num(r.lhs),
            num(r.rhs),
            num(r.gap),
            num(r.budget),
            num(worst),
            r.survives,
            if r.within_small_g { "" } else { " (outside the small-g regime)" }
        ));
        if let Some(n) = &e.numeric {
            sink.note(&format!("  numeric gap {}", num(n.gap)));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Backend, CommandKind, ConfigFile, Flags};

    #[test]
    fn gap_survives_at_default_coupling() {
        let flags = Flags { g: Some(vec![0.05, 0.1]), backend: Some(Backend::Both), ..Default::default() };
        let c = RunConfig::resolve(CommandKind::Paradox, ConfigFile::default(), &flags).unwrap();
        let e = entries(&c).unwrap();
        assert_eq!(e.len(), 2);
        assert!(e.iter().all(|x| x.report.survives && x.report.gap > 0.0));
        let n = e[1].numeric.unwrap();
        assert!((n.gap - e[1].report.gap).abs() < 100.0 * 0.1f64.powi(10));
    }

    #[test]
    fn zero_coupling_has_no_conditionals() {
        let flags = Flags { g: Some(vec![0.0]), ..Default::default() };
        let c = RunConfig::resolve(CommandKind::Paradox, ConfigFile::default(), &flags).unwrap();
        assert!(matches!(entries(&c), Err(CliError::Runtime(_))));
    }
}
