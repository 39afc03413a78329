//! `ledgerlab` — run trust-criteria audits, consensus simulations, and
//! attack experiments over declarative scenario files.
//!
//! Exit codes: 0 success (and, for `analyze`, both criteria met); 1 error;
//! 2 criteria violated (`analyze`) or attack inapplicable (`attack`).

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use thiserror::Error;

use ledgerlab_core::consensus::{ConsensusError, EngineKind, DEFAULT_SEED};
use ledgerlab_core::ledger::IdScheme;
use ledgerlab_core::scenario::ScenarioError;

use commands::{attack_default_engine, default_scenario_dir, AttackSpec, EXIT_ERROR, EXIT_VIOLATED};
use config::{parse_engine, parse_seed, ReportFormat, RunConfig};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error(transparent)]
    Consensus(#[from] ConsensusError),
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

impl CliError {
    fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// Inapplicable attacks are a verdict, not a failure: exit 2.
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Scenario(ScenarioError::InapplicableAttack { .. }) => EXIT_VIOLATED,
            _ => EXIT_ERROR,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "ledgerlab",
    version,
    about = "Deterministic ledger simulation and trust-criteria analysis",
    after_help = "Scenario names resolve against $LEDGERLAB_SCENARIO_DIR, then ./scenarios.\n\
                  Every run is deterministic for a given seed; pass --seed random to opt out."
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

/// Identifier scheme for the premature-creation race: `sequential` or
/// `random:<bits>` with 1..=256 bits.
fn parse_id_scheme(s: &str) -> Result<IdScheme, String> {
    if s == "sequential" {
        return Ok(IdScheme::Sequential);
    }
    if let Some(bits) = s.strip_prefix("random:") {
        let width: u16 = bits
            .parse()
            .map_err(|_| format!("invalid bit width `{bits}`"))?;
        if !(1..=256).contains(&width) {
            return Err(format!("bit width {width} out of range 1..=256"));
        }
        return Ok(IdScheme::RandomBits { width });
    }
    Err(format!(
        "unknown id scheme `{s}`; expected `sequential` or `random:<bits>`"
    ))
}

#[derive(Subcommand)]
enum Cmd {
    /// Audit a scenario's two trust criteria on an ideal ledger.
    ///
    /// Exits 0 when both criteria are met, 2 when any is violated, 1 on
    /// error.
    Analyze {
        /// Scenario name or path.
        scenario: String,
        #[arg(long, value_enum, default_value = "summary-table")]
        format: ReportFormat,
    },
    /// Run a scenario through a consensus engine and write the event log
    /// and full report to the output directory.
    Simulate {
        /// Scenario name or path.
        #[arg(long)]
        scenario: String,
        /// Consensus engine: permissionless[-chain] or permissioned[-quorum].
        #[arg(long, value_parser = parse_engine, default_value = "permissioned-quorum")]
        engine: EngineKind,
        /// Total maintainers in the network.
        #[arg(long, default_value_t = 7)]
        maintainers: usize,
        /// Fraction of maintainers running the adversary script (0..1).
        #[arg(long)]
        adversary_power: Option<f64>,
        /// Adversary script: withholder, equivocator, or censor.
        #[arg(long)]
        adversary_script: Option<String>,
        /// Confirmation depth; defaults to the engine's.
        #[arg(long)]
        c: Option<u64>,
        /// Rounds to run; defaults to enough for the scenario's schedule.
        #[arg(long)]
        rounds: Option<u64>,
        /// Integer seed, or `random`.
        #[arg(long, value_parser = parse_seed, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Output directory for the event log and report.
        #[arg(long, default_value = "ledgerlab-out")]
        out: PathBuf,
        #[arg(long, value_enum, default_value = "structured")]
        format: ReportFormat,
    },
    /// Mount an attack against a scenario and report the outcome.
    ///
    /// Exits 2 with an explanation when the attack does not apply.
    Attack {
        /// Attack name: premature-creation, sybil-votes, or lying-oracle.
        attack: String,
        /// Scenario name or path.
        #[arg(long)]
        scenario: String,
        /// Engine for engine-sensitive attacks; defaults per attack.
        #[arg(long, value_parser = parse_engine)]
        engine: Option<EngineKind>,
        /// premature-creation: identifier scheme (`sequential` or `random:<bits>`).
        #[arg(long, value_parser = parse_id_scheme, default_value = "sequential")]
        id_scheme: IdScheme,
        /// premature-creation: rounds of head start the attacker has.
        #[arg(long, default_value_t = 1)]
        advantage: u64,
        /// premature-creation: number of trials.
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        /// sybil-votes: legitimate voters casting rejections.
        #[arg(long, default_value_t = 10)]
        honest: u64,
        /// sybil-votes: forged identities casting approvals.
        #[arg(long, default_value_t = 11)]
        bogus: u64,
        /// lying-oracle: consensus rounds; defaults to the scenario's need.
        #[arg(long)]
        rounds: Option<u64>,
        /// Integer seed, or `random`.
        #[arg(long, value_parser = parse_seed, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, value_enum, default_value = "structured")]
        format: ReportFormat,
    },
    /// Analyze every scenario in a directory and print the verdict matrix.
    Matrix {
        /// Directory of .scn files; defaults to $LEDGERLAB_SCENARIO_DIR,
        /// then ./scenarios.
        directory: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "summary-table")]
        format: ReportFormat,
    },
}

fn dispatch(cli: Cli) -> Result<ExitCode, CliError> {
    match cli.command {
        Cmd::Analyze { scenario, format } => commands::cmd_analyze(&scenario, format),
        Cmd::Simulate {
            scenario,
            engine,
            maintainers,
            adversary_power,
            adversary_script,
            c,
            rounds,
            seed,
            out,
            format,
        } => {
            let config = RunConfig {
                scenario,
                engine,
                maintainers,
                adversary_power,
                adversary_script,
                confirmation_depth: c,
                rounds,
                seed,
                out,
                format,
            };
            commands::cmd_simulate(&config)
        }
        Cmd::Attack {
            attack,
            scenario,
            engine,
            id_scheme,
            advantage,
            trials,
            honest,
            bogus,
            rounds,
            seed,
            format,
        } => {
            let spec = match attack.as_str() {
                "premature-creation" => AttackSpec::PrematureCreation {
                    scheme: id_scheme,
                    advantage,
                    trials,
                },
                "sybil-votes" => AttackSpec::SybilVotes { honest, bogus },
                "lying-oracle" => AttackSpec::LyingOracle,
                other => {
                    return Err(ScenarioError::Unsupported(format!(
                        "unknown attack `{other}`; expected premature-creation, sybil-votes, \
                         or lying-oracle"
                    ))
                    .into())
                }
            };
            let config = RunConfig {
                scenario,
                engine: engine.unwrap_or_else(|| attack_default_engine(&spec)),
                rounds,
                seed,
                format,
                ..RunConfig::default()
            };
            commands::cmd_attack(&config, &spec)
        }
        Cmd::Matrix { directory, format } => {
            let dir = directory.unwrap_or_else(default_scenario_dir);
            commands::cmd_matrix(&dir, format)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
