use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use pdc_core::network::Pump;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Reproduce,
    Bell,
    Lp,
    Paradox,
    DumpState,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    OnOff,
    PhasesOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    Symbolic,
    Numeric,
    Both,
}

impl Backend {
    pub fn numeric(self) -> bool {
        matches!(self, Backend::Numeric | Backend::Both)
    }

    pub fn symbolic(self) -> bool {
        matches!(self, Backend::Symbolic | Backend::Both)
    }
}

/// Flags shared by every subcommand. Angles accept radians or a multiple of
/// pi written with a `pi` suffix, e.g. `0.1pi`, `pi`, `1/3pi`.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// JSON file with any of the fields below; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of parties in the ring [default: 3].
    #[arg(long)]
    pub parties: Option<usize>,
    /// Comma-separated couplings [default: 0.1].
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub g: Option<Vec<f64>>,
    /// Comma-separated phase per party [default: the sum pi split evenly].
    #[arg(long, value_delimiter = ',', value_parser = parse_angle, allow_hyphen_values = true)]
    pub phases: Option<Vec<f64>>,
    /// Phase grid step; must divide 2pi [default: 0.01pi for bell, 0.1pi otherwise].
    #[arg(long, value_parser = parse_angle)]
    pub grid_step: Option<f64>,
    /// Pump scenario for lp [default: on-off].
    #[arg(long, value_enum)]
    pub scenario: Option<Scenario>,
    /// Evaluation backend [default: numeric for lp, symbolic otherwise].
    #[arg(long, value_enum)]
    pub backend: Option<Backend>,
    /// Perturbative order of symbolic states [default: 4 for reproduce and
    /// dump-state, the party count for bell, parties + 2 for exact lp].
    #[arg(long)]
    pub order: Option<u32>,
    /// Interference visibility in [0, 1] [default: 1].
    #[arg(long)]
    pub visibility: Option<f64>,
    /// Photon cutoff per mode for numeric evolution [default: 6].
    #[arg(long)]
    pub cutoff: Option<u8>,
    /// Comma-separated pump settings for dump-state [default: all off].
    #[arg(long, value_delimiter = ',', value_parser = parse_pump)]
    pub pumps: Option<Vec<Pump>>,
    /// Output directory; without it the main table goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads for sweeps [default: all cores].
    #[arg(long, env = "PDC_WORKERS")]
    pub workers: Option<usize>,
}

/// Config file contents: every field optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub command: Option<CommandKind>,
    pub parties: Option<usize>,
    pub g: Option<Vec<f64>>,
    pub phases: Option<Vec<f64>>,
    pub grid_step: Option<f64>,
    pub scenario: Option<Scenario>,
    pub backend: Option<Backend>,
    pub order: Option<u32>,
    pub visibility: Option<f64>,
    pub cutoff: Option<u8>,
    pub pumps: Option<Vec<Pump>>,
    pub out: Option<PathBuf>,
}

/// Fully resolved run parameters. Angles are in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: CommandKind,
    pub parties: usize,
    pub g: Vec<f64>,
    pub phases: Vec<f64>,
    pub grid_step: f64,
    pub scenario: Scenario,
    pub backend: Backend,
    pub order: u32,
    pub visibility: f64,
    pub cutoff: u8,
    pub pumps: Vec<Pump>,
    pub out: Option<PathBuf>,
}

pub fn parse_angle(text: &str) -> Result<f64, String> {
    let text = text.trim();
    let number = |s: &str| -> Result<f64, String> {
        let s = s.trim();
        let v = match s.split_once('/') {
            Some((a, b)) => {
                let a: f64 = a.trim().parse().map_err(|_| format!("bad number {a:?}"))?;
                let b: f64 = b.trim().parse().map_err(|_| format!("bad number {b:?}"))?;
                a / b
            }
            None => s.parse().map_err(|_| format!("bad angle {text:?}"))?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(format!("angle {text:?} is not finite"))
        }
    };
    match text.strip_suffix("pi") {
        Some("") => Ok(PI),
        Some("-") => Ok(-PI),
        Some(prefix) => Ok(number(prefix.trim_end_matches('*'))? * PI),
        None => number(text),
    }
}

fn parse_pump(text: &str) -> Result<Pump, String> {
    match text.trim() {
        "on" => Ok(Pump::On),
        "off" => Ok(Pump::Off),
        other => Err(format!("pump must be on or off, got {other:?}")),
    }
}

pub fn read_config_file(path: &Path) -> Result<ConfigFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("bad config {}: {e}", path.display())))
}

impl RunConfig {
    /// Defaults, then the config file, then flags.
    pub fn resolve(command: CommandKind, file: ConfigFile, flags: &Flags) -> Result<Self, CliError> {
        if let Some(c) = file.command {
            if c != command {
                return Err(CliError::Usage(format!("config file is for {c:?}, not {command:?}")));
            }
        }
        let parties = flags.parties.or(file.parties).unwrap_or(3);
        if parties < 2 {
            return Err(CliError::Usage("the ring needs at least two parties".into()));
        }
        let needs_three = matches!(command, CommandKind::Reproduce | CommandKind::Paradox);
        if needs_three && parties != 3 {
            return Err(CliError::Usage(format!("{command:?} is defined for three parties only")));
        }
        let backend = flags.backend.or(file.backend).unwrap_or(match command {
            CommandKind::Lp => Backend::Numeric,
            _ => Backend::Symbolic,
        });
        let order = flags.order.or(file.order).unwrap_or(match command {
            CommandKind::Bell => parties as u32,
            CommandKind::Lp => parties as u32 + 2,
            _ => 4,
        });
        let grid_step = flags.grid_step.or(file.grid_step).unwrap_or(match command {
            CommandKind::Bell => 0.01 * PI,
            _ => 0.1 * PI,
        });
        let config = RunConfig {
            command,
            parties,
            g: flags.g.clone().or(file.g).unwrap_or_else(|| vec![0.1]),
            phases: flags.phases.clone().or(file.phases).unwrap_or_else(|| vec![PI / parties as f64; parties]),
            grid_step,
            scenario: flags.scenario.or(file.scenario).unwrap_or(Scenario::OnOff),
            backend,
            order,
            visibility: flags.visibility.or(file.visibility).unwrap_or(1.0),
            cutoff: flags.cutoff.or(file.cutoff).unwrap_or(6),
            pumps: flags.pumps.clone().or(file.pumps).unwrap_or_else(|| vec![Pump::Off; parties]),
            out: flags.out.clone().or(file.out),
        };
        config.validate()?;
        Ok(config)
    }

    fn validate(&self) -> Result<(), CliError> {
        let usage = |m: String| Err(CliError::Usage(m));
        if self.g.is_empty() || self.g.iter().any(|g| !g.is_finite()) {
            return usage(format!("couplings must be finite, got {:?}", self.g));
        }
        if self.phases.len() != self.parties {
            return usage(format!("{} phases given for {} parties", self.phases.len(), self.parties));
        }
        if self.pumps.len() != self.parties {
            return usage(format!("{} pumps given for {} parties", self.pumps.len(), self.parties));
        }
        if !(0.0..=1.0).contains(&self.visibility) {
            return usage(format!("visibility must lie in [0, 1], got {}", self.visibility));
        }
        if self.cutoff == 0 {
            return usage("cutoff must be positive".into());
        }
        pdc_core::lhv::grid_points(self.grid_step)?;
        Ok(())
    }

    pub fn canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
