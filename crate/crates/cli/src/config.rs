//! Run configuration: every knob a command accepts, resolved to concrete
//! values and echoed verbatim into report headers so any run can be
//! reproduced from its own output.

use std::path::PathBuf;

use clap::ValueEnum;
use serde::Serialize;

use ledgerlab_core::consensus::{EngineKind, DEFAULT_SEED};
use ledgerlab_core::scenario::{default_rounds, RunOptions, Scenario};

use crate::CliError;

/// Output shape: one JSON object per report, or a fixed-width table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ReportFormat {
    /// A single JSON document per report.
    Structured,
    /// Fixed-width text for terminals.
    SummaryTable,
}

impl ReportFormat {
    pub fn name(&self) -> &'static str {
        match self {
            ReportFormat::Structured => "structured",
            ReportFormat::SummaryTable => "summary-table",
        }
    }
}

/// Parse an `--engine` value; both short and full spellings are accepted.
pub fn parse_engine(s: &str) -> Result<EngineKind, String> {
    EngineKind::parse(s).ok_or_else(|| {
        format!(
            "unknown engine `{s}`; expected permissionless[-chain] or permissioned[-quorum]"
        )
    })
}

/// Parse a `--seed` value: a decimal or `0x`-prefixed integer, or the word
/// `random` to draw one from system entropy (the drawn value is echoed in
/// the report header, so even a random run can be replayed).
pub fn parse_seed(s: &str) -> Result<u64, String> {
    if s == "random" {
        return Ok(rand::random());
    }
    let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => s.parse(),
    };
    parsed.map_err(|_| format!("invalid seed `{s}`; expected an integer or `random`"))
}

/// One resolved run: scenario, engine parameters, and output arrangements.
/// Optional fields left `None` defer to the engine or scenario defaults; the
/// echo records what was actually used.
#[derive(Debug, Clone)]
pub struct RunConfig {
    /// Scenario name or path exactly as given on the command line.
    pub scenario: String,
    pub engine: EngineKind,
    pub maintainers: usize,
    pub adversary_power: Option<f64>,
    pub adversary_script: Option<String>,
    pub confirmation_depth: Option<u64>,
    pub rounds: Option<u64>,
    pub seed: u64,
    pub out: PathBuf,
    pub format: ReportFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            scenario: String::new(),
            engine: EngineKind::PermissionedQuorum,
            maintainers: 7,
            adversary_power: None,
            adversary_script: None,
            confirmation_depth: None,
            rounds: None,
            seed: DEFAULT_SEED,
            out: PathBuf::from("ledgerlab-out"),
            format: ReportFormat::Structured,
        }
    }
}

impl RunConfig {
    pub fn options(&self) -> RunOptions {
        RunOptions {
            engine: self.engine,
            maintainers: self.maintainers,
            adversary_power: self.adversary_power,
            adversary_script: self.adversary_script.clone(),
            confirmation_depth: self.confirmation_depth,
            rounds: self.rounds,
            seed: self.seed,
        }
    }

    /// Load the scenario this config names, resolving bare names through the
    /// scenario search path.
    pub fn load_scenario(&self) -> Result<Scenario, CliError> {
        Ok(Scenario::find(&self.scenario)?)
    }

    /// Every field as a (key, value) pair, resolved against the scenario the
    /// run will actually use: feeding these values back as flags reproduces
    /// the run exactly.
    pub fn echo(&self, scenario: &Scenario) -> Vec<(&'static str, String)> {
        let c = self
            .confirmation_depth
            .unwrap_or_else(|| self.engine.default_confirmation_depth());
        let rounds = self
            .rounds
            .unwrap_or_else(|| default_rounds(scenario.schedule.len()));
        vec![
            ("scenario", self.scenario.clone()),
            ("engine", self.engine.name().to_string()),
            ("maintainers", self.maintainers.to_string()),
            (
                "adversary-power",
                format!("{}", self.adversary_power.unwrap_or(0.0)),
            ),
            (
                "adversary-script",
                self.adversary_script.clone().unwrap_or_else(|| "none".into()),
            ),
            ("c", c.to_string()),
            ("rounds", rounds.to_string()),
            ("seed", self.seed.to_string()),
            ("out", self.out.display().to_string()),
            ("format", self.format.name().to_string()),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_parse_in_decimal_and_hex() {
        assert_eq!(parse_seed("42").unwrap(), 42);
        assert_eq!(parse_seed("0xD15EA5E").unwrap(), 0xD15EA5E);
        assert_eq!(parse_seed("0X10").unwrap(), 16);
        assert!(parse_seed("forty-two").is_err());
    }

    #[test]
    fn random_seed_is_drawn_not_rejected() {
        // Two draws colliding is a 1-in-2^64 event; inequality doubles as a
        // check that the value actually varies.
        let a = parse_seed("random").unwrap();
        let b = parse_seed("random").unwrap();
        assert!(a != b || a != parse_seed("random").unwrap());
    }

    #[test]
    fn engines_accept_both_spellings() {
        assert_eq!(parse_engine("permissionless").unwrap(), EngineKind::PermissionlessChain);
        assert_eq!(parse_engine("permissioned-quorum").unwrap(), EngineKind::PermissionedQuorum);
        assert!(parse_engine("proof-of-vibes").is_err());
    }
}
