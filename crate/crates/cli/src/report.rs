//! Report shapes and rendering. Every command emits either one JSON document
//! (`structured`) or a fixed-width table (`summary-table`); both carry the
//! full configuration echo so a report is enough to reproduce its run.

use std::collections::BTreeMap;

use serde::Serialize;

use ledgerlab_core::consensus::RunOutcome;
use ledgerlab_core::criteria::{CriterionVerdict, TrustAuditReport};
use ledgerlab_core::scenario::{GoalOutcome, Scenario, ScenarioRunReport};
use ledgerlab_core::validation::Dependency;

use crate::config::RunConfig;

/// Consensus-monitor results in serializable form.
#[derive(Debug, Clone, Serialize)]
pub struct ConsensusReport {
    pub engine: String,
    pub seed: u64,
    pub confirmation_depth: u64,
    pub rounds_run: u64,
    pub maintainers: usize,
    pub adversaries: usize,
    pub blocks_produced: usize,
    pub decided_records: u64,
    pub agreement_violations: u64,
    pub first_agreement_violation_round: Option<u64>,
    pub validity_violations: u64,
    pub first_decision_round: Option<u64>,
    pub longest_stall: u64,
    pub stall_events: u64,
    pub max_inclusion_latency: u64,
    pub included: u64,
    pub unincluded_valid: u64,
    pub agreement_ok: bool,
    pub validity_ok: bool,
    pub termination_ok: bool,
}

impl ConsensusReport {
    pub fn from_outcome(outcome: &RunOutcome) -> Self {
        ConsensusReport {
            engine: outcome.engine.name().to_string(),
            seed: outcome.seed,
            confirmation_depth: outcome.confirmation_depth,
            rounds_run: outcome.rounds_run,
            maintainers: outcome.maintainer_count,
            adversaries: outcome.adversary_count,
            blocks_produced: outcome.blocks_produced,
            decided_records: outcome.decided.len() as u64,
            agreement_violations: outcome.agreement.total(),
            first_agreement_violation_round: outcome.agreement.first_violation_round,
            validity_violations: outcome.validity.violations,
            first_decision_round: outcome.termination.first_decision_round,
            longest_stall: outcome.termination.longest_stall,
            stall_events: outcome.termination.stall_events,
            max_inclusion_latency: outcome.termination.max_inclusion_latency,
            included: outcome.termination.included,
            unincluded_valid: outcome.termination.unincluded_valid,
            agreement_ok: outcome.agreement_ok(),
            validity_ok: outcome.validity_ok(),
            termination_ok: outcome.termination_ok(),
        }
    }
}

/// One bound predicate, named with how it is decided.
#[derive(Debug, Clone, Serialize)]
pub struct PredicateSummary {
    pub name: String,
    pub dependency: Dependency,
    pub oracle: Option<String>,
}

/// The full report of one scenario run, ready for serialization.
#[derive(Debug, Clone, Serialize)]
pub struct ScenarioReport {
    /// Configuration echo: every knob, resolved. Feeding these values back
    /// as flags reproduces the run.
    pub config: BTreeMap<String, String>,
    pub scenario: String,
    pub description: String,
    pub creation_mode: String,
    pub consensus: Option<ConsensusReport>,
    pub extended_records: u64,
    pub hook_firings: u64,
    pub validation_violations: u64,
    pub invalid_record_indices: Vec<u64>,
    pub predicates: Vec<PredicateSummary>,
    pub goals: Vec<GoalOutcome>,
    pub oracle_queries: BTreeMap<String, u64>,
    pub audit: TrustAuditReport,
    pub notes: Vec<String>,
}

impl ScenarioReport {
    pub fn new(config: &RunConfig, scenario: &Scenario, run: &ScenarioRunReport) -> Self {
        ScenarioReport {
            config: config
                .echo(scenario)
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect(),
            scenario: run.scenario.clone(),
            description: scenario.description.clone(),
            creation_mode: scenario.creation_mode.name().to_string(),
            consensus: run.consensus.as_ref().map(ConsensusReport::from_outcome),
            extended_records: run.extended.len() as u64,
            hook_firings: run.hook_firings.len() as u64,
            validation_violations: run.validation.violations(),
            invalid_record_indices: run.validation.invalid_indices(),
            predicates: run
                .bound_predicates
                .iter()
                .map(|d| PredicateSummary {
                    name: d.name.clone(),
                    dependency: d.dependency,
                    oracle: d.oracle.clone(),
                })
                .collect(),
            goals: run.goals.clone(),
            oracle_queries: run.consulted.clone(),
            audit: run.audit.clone(),
            notes: run.notes.clone(),
        }
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("report shapes serialize");
    text.push('\n');
    text
}

/// Append `key  value` rows with keys padded to a common width.
fn push_rows(out: &mut String, rows: &[(&str, String)]) {
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    for (key, value) in rows {
        out.push_str(&format!("{key:<width$}  {value}\n"));
    }
}

fn verdict_word(met: bool) -> &'static str {
    if met {
        "met"
    } else {
        "not met"
    }
}

fn render_verdict(out: &mut String, label: &str, verdict: &CriterionVerdict) {
    out.push_str(&format!("{label}: {}\n", verdict_word(verdict.met)));
    for line in &verdict.evidence {
        out.push_str(&format!("  - {line}\n"));
    }
}

/// The audit half of a report: both criteria with evidence, the trusted
/// set, and the headline.
pub fn render_audit(out: &mut String, audit: &TrustAuditReport) {
    render_verdict(out, "object creation", &audit.object_creation);
    render_verdict(out, "internal predicate", &audit.internal_predicate);
    out.push_str(&format!(
        "replaces trusted third party: {}\n",
        if audit.replaces_trusted_third_party { "yes" } else { "no" }
    ));
    if audit.trusted.is_empty() {
        out.push_str("trusted parties: none\n");
    } else {
        out.push_str("trusted parties:\n");
        for t in &audit.trusted {
            out.push_str(&format!("  - {}\n", t.describe()));
        }
    }
}

fn render_goals(out: &mut String, goals: &[GoalOutcome]) {
    if goals.is_empty() {
        return;
    }
    out.push_str("goals:\n");
    let width = goals.iter().map(|g| g.name.len()).max().unwrap_or(0);
    for g in goals {
        let world = match g.world_truth {
            Some(w) => w.to_string(),
            None => "-".to_string(),
        };
        out.push_str(&format!(
            "  {:<width$}  ledger={:<5}  world={:<5}  divergent={:<5}  checked={}\n",
            g.name, g.ledger, world, g.divergent, g.records_checked
        ));
    }
}

/// Fixed-width rendering of a full scenario report.
pub fn render_scenario_table(report: &ScenarioReport) -> String {
    let mut out = String::new();
    let mut rows: Vec<(&str, String)> = report
        .config
        .iter()
        .map(|(k, v)| (k.as_str(), v.clone()))
        .collect();
    rows.insert(0, ("description", report.description.clone()));
    rows.insert(1, ("creation-mode", report.creation_mode.clone()));
    push_rows(&mut out, &rows);
    out.push('\n');

    if let Some(c) = &report.consensus {
        push_rows(
            &mut out,
            &[
                ("blocks produced", c.blocks_produced.to_string()),
                ("decided records", c.decided_records.to_string()),
                ("agreement", format!("{} violations", c.agreement_violations)),
                ("validity", format!("{} violations", c.validity_violations)),
                (
                    "termination",
                    format!(
                        "{} stalls, longest {}, {} included, {} left behind",
                        c.stall_events, c.longest_stall, c.included, c.unincluded_valid
                    ),
                ),
            ],
        );
        out.push('\n');
    }

    push_rows(
        &mut out,
        &[
            ("extended records", report.extended_records.to_string()),
            ("hook firings", report.hook_firings.to_string()),
            (
                "validation",
                if report.validation_violations == 0 {
                    "all records valid".to_string()
                } else {
                    format!(
                        "{} invalid at {:?}",
                        report.validation_violations, report.invalid_record_indices
                    )
                },
            ),
        ],
    );
    render_goals(&mut out, &report.goals);
    if !report.oracle_queries.is_empty() {
        out.push_str("oracle queries:\n");
        for (oracle, count) in &report.oracle_queries {
            out.push_str(&format!("  {oracle}: {count}\n"));
        }
    }
    out.push('\n');
    render_audit(&mut out, &report.audit);
    for note in &report.notes {
        out.push_str(&format!("note: {note}\n"));
    }
    out
}

/// One verdict-matrix row.
#[derive(Debug, Clone, Serialize)]
pub struct MatrixRow {
    pub scenario: String,
    pub creation_mode: String,
    pub object_creation_met: bool,
    pub internal_predicate_met: bool,
    pub trusted: usize,
}

/// The matrix as a document: rows sorted by scenario name, plus any files
/// that failed to load.
#[derive(Debug, Clone, Serialize)]
pub struct MatrixReport {
    pub directory: String,
    pub rows: Vec<MatrixRow>,
    pub errors: Vec<String>,
}

pub fn render_matrix_table(report: &MatrixReport) -> String {
    let mut out = String::new();
    let name_width = report
        .rows
        .iter()
        .map(|r| r.scenario.len())
        .chain(["scenario".len()])
        .max()
        .unwrap();
    out.push_str(&format!(
        "{:<name_width$}  {:<15}  {:<18}  {}\n",
        "scenario", "object-creation", "internal-predicate", "trusted"
    ));
    for row in &report.rows {
        out.push_str(&format!(
            "{:<name_width$}  {:<15}  {:<18}  {}\n",
            row.scenario,
            verdict_word(row.object_creation_met),
            verdict_word(row.internal_predicate_met),
            row.trusted
        ));
    }
    for err in &report.errors {
        out.push_str(&format!("error: {err}\n"));
    }
    out
}
