//! The four verbs: `analyze`, `simulate`, `attack`, `matrix`. Each returns
//! the process exit code; printing goes to standard output, diagnostics to
//! standard error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use ledgerlab_core::consensus::EngineKind;
use ledgerlab_core::ledger::IdScheme;
use ledgerlab_core::scenario::{
    lying_oracle_attack, premature_creation_attack, run_scenario, sybil_vote_attack,
    AttackOutcome, RunOptions, Scenario,
};

use crate::config::{ReportFormat, RunConfig};
use crate::report::{
    render_audit, render_matrix_table, render_scenario_table, to_json, MatrixReport, MatrixRow,
    ScenarioReport,
};
use crate::CliError;

pub const EXIT_OK: u8 = 0;
pub const EXIT_ERROR: u8 = 1;
/// Criteria violated (analyze) or attack inapplicable (attack).
pub const EXIT_VIOLATED: u8 = 2;

/// Audit a scenario's trust criteria on an ideal ledger: instant finality,
/// no adversaries, so the verdict reflects the use case and not the network.
pub fn cmd_analyze(name: &str, format: ReportFormat) -> Result<ExitCode, CliError> {
    let scenario = Scenario::find(name)?;
    let run = run_scenario(&scenario, &RunOptions::analysis())?;

    match format {
        ReportFormat::Structured => {
            let config = RunConfig {
                scenario: name.to_string(),
                ..RunConfig::default()
            };
            print!("{}", to_json(&ScenarioReport::new(&config, &scenario, &run)));
        }
        ReportFormat::SummaryTable => {
            let mut out = String::new();
            out.push_str(&format!("scenario: {}\n", scenario.name));
            out.push_str(&format!("creation mode: {}\n\n", scenario.creation_mode.name()));
            render_audit(&mut out, &run.audit);
            print!("{out}");
        }
    }

    Ok(if run.audit.replaces_trusted_third_party {
        ExitCode::from(EXIT_OK)
    } else {
        ExitCode::from(EXIT_VIOLATED)
    })
}

/// Run a scenario under the configured network and write the event log and
/// the full report into the output directory. Artifacts are byte-identical
/// across invocations with the same configuration.
pub fn cmd_simulate(config: &RunConfig) -> Result<ExitCode, CliError> {
    let scenario = config.load_scenario()?;
    let run = run_scenario(&scenario, &config.options())?;
    let report = ScenarioReport::new(config, &scenario, &run);

    fs::create_dir_all(&config.out).map_err(|e| CliError::io(&config.out, e))?;
    let stem = format!("{}-{}", scenario.name, config.engine.name());

    let log_path = config.out.join(format!("{stem}.log"));
    let mut log_text = String::new();
    if let Some(outcome) = &run.consensus {
        for line in &outcome.log {
            log_text.push_str(line);
            log_text.push('\n');
        }
    }
    fs::write(&log_path, log_text).map_err(|e| CliError::io(&log_path, e))?;

    let (report_path, body) = match config.format {
        ReportFormat::Structured => (config.out.join(format!("{stem}-report.json")), to_json(&report)),
        ReportFormat::SummaryTable => (
            config.out.join(format!("{stem}-report.txt")),
            render_scenario_table(&report),
        ),
    };
    fs::write(&report_path, body).map_err(|e| CliError::io(&report_path, e))?;

    println!("wrote {}", log_path.display());
    println!("wrote {}", report_path.display());
    println!(
        "agreement {} / validity {} / termination {}; replaces trusted third party: {}",
        ok_word(run.consensus.as_ref().map(|c| c.agreement_ok())),
        ok_word(run.consensus.as_ref().map(|c| c.validity_ok())),
        ok_word(run.consensus.as_ref().map(|c| c.termination_ok())),
        if run.audit.replaces_trusted_third_party { "yes" } else { "no" }
    );
    Ok(ExitCode::from(EXIT_OK))
}

fn ok_word(ok: Option<bool>) -> &'static str {
    match ok {
        Some(true) => "ok",
        Some(false) => "VIOLATED",
        None => "skipped",
    }
}

/// Which attack to mount, with its parameters.
#[derive(Debug, Clone)]
pub enum AttackSpec {
    PrematureCreation {
        scheme: IdScheme,
        advantage: u64,
        trials: u64,
    },
    SybilVotes {
        honest: u64,
        bogus: u64,
    },
    LyingOracle,
}

/// Mount an attack against a scenario and report the structured outcome.
/// An attack the scenario gives no purchase for exits with code 2 and an
/// explanation rather than a fabricated zero rate.
pub fn cmd_attack(config: &RunConfig, spec: &AttackSpec) -> Result<ExitCode, CliError> {
    let scenario = config.load_scenario()?;
    let rendered = match spec {
        AttackSpec::PrematureCreation {
            scheme,
            advantage,
            trials,
        } => {
            let outcome =
                premature_creation_attack(&scenario, *scheme, *advantage, *trials, config.seed)?;
            render_attack(config.format, &outcome)
        }
        AttackSpec::SybilVotes { honest, bogus } => {
            let outcome =
                sybil_vote_attack(&scenario, config.engine, *honest, *bogus, config.seed)?;
            render_attack(config.format, &outcome)
        }
        AttackSpec::LyingOracle => {
            // Fact overrides come from the scenario's own attack presets:
            // the facts its author marked as worth lying about.
            let report = lying_oracle_attack(
                &scenario,
                &scenario.attack_presets,
                config.engine,
                config.rounds,
                config.seed,
            )?;
            match config.format {
                ReportFormat::Structured => to_json(&report),
                ReportFormat::SummaryTable => {
                    let mut out = String::new();
                    out.push_str(&format!("attack: {}\n", report.attack));
                    for (object, property, value) in &report.overridden_facts {
                        out.push_str(&format!(
                            "override: {} {property} = {value}\n",
                            object.token()
                        ));
                    }
                    if report.diverged.is_empty() {
                        out.push_str("diverged goals: none\n");
                    } else {
                        out.push_str(&format!("diverged goals: {}\n", report.diverged.join(", ")));
                    }
                    for g in &report.goals {
                        out.push_str(&format!(
                            "  {}  ledger={}  world={}  divergent={}\n",
                            g.name,
                            g.ledger,
                            g.world_truth.map(|w| w.to_string()).unwrap_or_else(|| "-".into()),
                            g.divergent
                        ));
                    }
                    out
                }
            }
        }
    };
    print!("{rendered}");
    Ok(ExitCode::from(EXIT_OK))
}

fn render_attack(format: ReportFormat, outcome: &AttackOutcome) -> String {
    match format {
        ReportFormat::Structured => to_json(outcome),
        ReportFormat::SummaryTable => format!(
            "attack: {}\ntrials: {}\nsuccesses: {}\nsuccess rate: {:.6}\ndetail: {}\n",
            outcome.attack, outcome.trials, outcome.successes, outcome.success_rate, outcome.detail
        ),
    }
}

/// Analyze every scenario file in a directory and print the verdict matrix,
/// one row per scenario, ordered by scenario name. Files that fail to load
/// become error lines and a nonzero exit, without hiding the healthy rows.
pub fn cmd_matrix(directory: &Path, format: ReportFormat) -> Result<ExitCode, CliError> {
    let mut files: Vec<PathBuf> = fs::read_dir(directory)
        .map_err(|e| CliError::io(directory, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "scn"))
        .collect();
    files.sort();

    let mut rows = Vec::new();
    let mut errors = Vec::new();
    for path in &files {
        match analyze_for_matrix(path) {
            Ok(row) => rows.push(row),
            Err(e) => errors.push(format!("{}: {e}", path.display())),
        }
    }
    rows.sort_by(|a, b| a.scenario.cmp(&b.scenario));

    let report = MatrixReport {
        directory: directory.display().to_string(),
        rows,
        errors,
    };
    match format {
        ReportFormat::Structured => print!("{}", to_json(&report)),
        ReportFormat::SummaryTable => print!("{}", render_matrix_table(&report)),
    }
    Ok(ExitCode::from(if report.errors.is_empty() {
        EXIT_OK
    } else {
        EXIT_ERROR
    }))
}

fn analyze_for_matrix(path: &Path) -> Result<MatrixRow, CliError> {
    let scenario = Scenario::load(path)?;
    let run = run_scenario(&scenario, &RunOptions::analysis())?;
    Ok(MatrixRow {
        scenario: scenario.name.clone(),
        creation_mode: scenario.creation_mode.name().to_string(),
        object_creation_met: run.audit.object_creation.met,
        internal_predicate_met: run.audit.internal_predicate.met,
        trusted: run.audit.trusted.len(),
    })
}

/// The default matrix directory: `$LEDGERLAB_SCENARIO_DIR` when set, else
/// `./scenarios`, mirroring how bare scenario names resolve.
pub fn default_scenario_dir() -> PathBuf {
    std::env::var("LEDGERLAB_SCENARIO_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|_| PathBuf::from("scenarios"))
}

/// Default engine when the attack does not take one explicitly: sybil votes
/// only mean anything on open membership; everything else runs on the
/// instant-finality engine so results reflect the attack, not the network.
pub fn attack_default_engine(spec: &AttackSpec) -> EngineKind {
    match spec {
        AttackSpec::SybilVotes { .. } => EngineKind::PermissionlessChain,
        _ => EngineKind::PermissionedQuorum,
    }
}
