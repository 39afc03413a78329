//! End-to-end use cases: a small text format that declares parties, a world
//! model, validation predicates, goals, oracles, contract hooks, and a
//! workload; plus the pipeline that runs a declared scenario through a
//! consensus engine, validates the decided ledger, and audits which parties
//! must still be trusted.
//!
//! A scenario file is a tree of `key args... { children }` blocks:
//!
//! ```text
//! scenario virtual-currency {
//!     description "coins minted and spent entirely on the ledger"
//!     creation consensus-based
//!     parties {
//!         group holder count 12 start-id 101
//!     }
//!     predicates {
//!         predicate covered-spending internal balance-sufficiency coin
//!     }
//!     workload coin-transfers {
//!         holders holder
//!         transfers 18
//!     }
//! }
//! ```
//!
//! Scenarios separate *what the ledger can check by itself* (internal
//! predicates over recorded state) from *what needs an oracle's word*
//! (external predicates over world facts). Goals are predicates evaluated
//! after the run, each external goal once against the declared oracles and
//! once against forced-truthful ones; a gap between the two answers means the
//! ledger has certified something the world contradicts.

pub mod parse;
pub mod workload;

#[cfg(test)]
mod tests;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::consensus::{
    run_consensus, ConsensusError, EngineKind, NetworkConfig, RunOutcome, RunSetup,
    ScheduledProposal, DEFAULT_SEED, SCRIPT_CENSOR, SCRIPT_EQUIVOCATOR, SCRIPT_WITHHOLDER,
};
use crate::criteria::{audit_trust, CreationMode, TrustAuditReport, UseCaseAudit};
use crate::ledger::{
    genesis_records, make_record, Honesty, IdScheme, LedgerError, ObjectDescriptor, ObjectId,
    Party, PartyId, Payload, PayloadKind, Record, RecordSequence, Role, Scalar, Wide256,
};
use crate::rng::{component_rng, mix_words};
use crate::validation::{
    bind_predicates, evaluate_predicate, fire_contract_hooks, oracle_for, validate_sequence,
    ContractHook, Dependency, Expect, Fraction, HookAction, HookFiring, LedgerState, Oracle,
    OracleBehavior, OracleHandle, PredicateDecl, RuleSpec, Scope, SequenceReport, ValidationError,
    WorldModel,
};

pub use parse::{parse_document, Node};
pub use workload::{Workload, WorkloadContext, WorkloadPlan};

/// Everything that can go wrong loading or running a scenario.
#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    /// The file is not even shaped like a scenario.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    /// The file parses but declares something inconsistent.
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
    /// A run was asked for with options the scenario cannot satisfy.
    #[error("{0}")]
    Unsupported(String),
    /// The requested attack has no purchase on this scenario. Not a failure
    /// of the attack machinery: the configuration removes the attack surface.
    #[error("attack `{attack}` does not apply: {reason}")]
    InapplicableAttack { attack: String, reason: String },
    #[error(transparent)]
    Consensus(#[from] ConsensusError),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
}

impl ScenarioError {
    pub(crate) fn parse(line: usize, message: String) -> Self {
        ScenarioError::Parse { line, message }
    }

    pub(crate) fn invalid(line: usize, message: String) -> Self {
        ScenarioError::Invalid { line, message }
    }
}

// ---------------------------------------------------------------------------
// Expectations
// ---------------------------------------------------------------------------

/// What the scenario author expects the audit and the goals to say. Purely
/// declarative; runs report against these, they never steer evaluation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Expectations {
    pub object_creation_met: Option<bool>,
    pub internal_predicate_met: Option<bool>,
    pub replaces_trusted_third_party: Option<bool>,
    pub goals: Vec<GoalExpectation>,
}

/// Expected outcome of one goal under the scenario's default configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GoalExpectation {
    pub name: String,
    /// The verdict the ledger itself is expected to reach.
    pub ledger: bool,
    /// Whether the ledger's verdict is expected to contradict world truth.
    pub divergent: Option<bool>,
}

// ---------------------------------------------------------------------------
// Scenario
// ---------------------------------------------------------------------------

/// A fully materialized use case: parties, world, rules, and the record
/// schedule the parties will propose. Built from a scenario file; the raw
/// declaration is kept so the same scenario can be re-materialized under the
/// other creation mode when the file allows it.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub description: String,
    /// The creation mode this materialization uses.
    pub creation_mode: CreationMode,
    /// Whether the file permits re-materializing under the other mode.
    pub creation_configurable: bool,
    /// Declared party groups, keyed by group name.
    pub groups: BTreeMap<String, Vec<PartyId>>,
    /// Proposals in causal order, availability staggered.
    pub schedule: Vec<ScheduledProposal>,
    /// Merged world model: workload facts and balances first, file entries
    /// overriding them; genesis objects file-first.
    pub world: WorldModel,
    /// Predicates maintainers and validators apply to records.
    pub predicates: Vec<PredicateDecl>,
    /// Predicates evaluated after the run as use-case outcomes.
    pub goals: Vec<PredicateDecl>,
    /// Declared oracles, with any fraud-driven lies already merged in.
    pub oracles: Vec<Oracle>,
    pub hooks: Vec<ContractHook>,
    /// Names of the fraud toggles the file enables.
    pub frauds: Vec<String>,
    /// Default fact overrides for the lying-oracle attack, straight from the
    /// file. The attack itself applies whatever overrides it is given.
    pub attack_presets: Vec<(ObjectId, String, Scalar)>,
    /// Scripted consensus adversary the file suggests: (script, power).
    pub consensus_adversary: Option<(String, f64)>,
    pub expected: Expectations,
    pub notes: Vec<String>,
    // Raw declaration, kept for re-materialization under the other mode.
    workload_spec: Option<Workload>,
    workload_line: usize,
    fraud_lines: Vec<(String, usize)>,
    base_world: WorldModel,
    base_oracles: Vec<Oracle>,
}

impl Scenario {
    /// Parse a scenario from file text and materialize it under its declared
    /// creation mode.
    pub fn parse(text: &str) -> Result<Scenario, ScenarioError> {
        let mut roots = parse_document(text)?;
        if roots.len() != 1 {
            let line = roots.get(1).map(|n| n.line).unwrap_or(1);
            return Err(ScenarioError::parse(
                line,
                "expected exactly one top-level `scenario` block".to_string(),
            ));
        }
        let root = roots.remove(0);
        if root.key != "scenario" {
            return Err(ScenarioError::parse(
                root.line,
                format!("expected `scenario <name>`, found `{}`", root.key),
            ));
        }
        if !root.is_block() {
            return Err(ScenarioError::parse(
                root.line,
                "`scenario` must open a block".to_string(),
            ));
        }
        let name = root.arg(0)?.to_string();
        root.expect_keys(&[
            "description",
            "creation",
            "parties",
            "world",
            "predicates",
            "goals",
            "oracles",
            "hooks",
            "workload",
            "adversaries",
            "expected",
            "note",
        ])?;

        let description = root.leaf_str_opt("description")?.unwrap_or("").to_string();

        let creation = root.require_child("creation")?;
        let declared_mode = CreationMode::parse(creation.arg(0)?).ok_or_else(|| {
            ScenarioError::invalid(
                creation.line,
                "creation mode is `consensus-based` or `party-created`".to_string(),
            )
        })?;
        let creation_configurable = match creation.args.get(1).map(String::as_str) {
            None => false,
            Some("configurable") => true,
            Some(other) => {
                return Err(ScenarioError::invalid(
                    creation.line,
                    format!("unexpected `{other}` after the creation mode"),
                ))
            }
        };

        let groups = parse_groups(root.require_child("parties")?)?;

        let mut base_world = WorldModel::default();
        if let Some(node) = root.child("world") {
            parse_world(node, &mut base_world)?;
        }

        let predicates = parse_decl_block(root.child("predicates"), "predicate")?;
        let goals = parse_decl_block(root.child("goals"), "goal")?;
        let base_oracles = parse_oracles(root.child("oracles"), &groups)?;
        let hooks = parse_hooks(root.child("hooks"))?;

        let (workload_spec, workload_line) = match root.child("workload") {
            Some(node) => (Some(Workload::from_node(node)?), node.line),
            None => (None, root.line),
        };

        let mut fraud_lines: Vec<(String, usize)> = Vec::new();
        let mut attack_presets = Vec::new();
        let mut consensus_adversary = None;
        if let Some(node) = root.child("adversaries") {
            parse_adversaries(
                node,
                &mut fraud_lines,
                &mut attack_presets,
                &mut consensus_adversary,
            )?;
        }

        let expected = match root.child("expected") {
            Some(node) => parse_expected(node)?,
            None => Expectations::default(),
        };

        let notes = root
            .children_named("note")
            .map(|n| n.arg(0).map(str::to_string))
            .collect::<Result<Vec<_>, _>>()?;

        // Names must be unambiguous across predicates and goals: the audit
        // and the hook engine both look things up by name.
        let mut seen = BTreeSet::new();
        for (decl, line) in predicates.iter().chain(goals.iter()) {
            if !seen.insert(decl.name.clone()) {
                return Err(ScenarioError::invalid(
                    *line,
                    format!("predicate or goal `{}` declared twice", decl.name),
                ));
            }
        }
        // External predicates must name a declared oracle.
        for (decl, line) in predicates.iter().chain(goals.iter()) {
            if let Some(oracle) = &decl.oracle {
                if !base_oracles.iter().any(|o| &o.name == oracle) {
                    return Err(ScenarioError::invalid(
                        *line,
                        format!("`{}` consults undeclared oracle `{oracle}`", decl.name),
                    ));
                }
            }
        }
        // Hook triggers must name a predicate (goals are post-run only).
        for (hook, line) in &hooks {
            if !predicates.iter().any(|(d, _)| d.name == hook.trigger) {
                return Err(ScenarioError::invalid(
                    *line,
                    format!(
                        "hook `{}` triggers on unknown predicate `{}`",
                        hook.name, hook.trigger
                    ),
                ));
            }
        }

        let mut scenario = Scenario {
            name,
            description,
            creation_mode: declared_mode,
            creation_configurable,
            groups,
            schedule: Vec::new(),
            world: WorldModel::default(),
            predicates: predicates.into_iter().map(|(d, _)| d).collect(),
            goals: goals.into_iter().map(|(d, _)| d).collect(),
            oracles: Vec::new(),
            hooks: hooks.into_iter().map(|(h, _)| h).collect(),
            frauds: fraud_lines.iter().map(|(f, _)| f.clone()).collect(),
            attack_presets,
            consensus_adversary,
            expected,
            notes,
            workload_spec,
            workload_line,
            fraud_lines,
            base_world,
            base_oracles,
        };
        scenario.rematerialize()?;
        Ok(scenario)
    }

    /// Load a scenario from a file.
    pub fn load(path: impl AsRef<Path>) -> Result<Scenario, ScenarioError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ScenarioError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Scenario::parse(&text)
    }

    /// Resolve a scenario by name or path: the literal path, the path with a
    /// `.scn` extension, then the same two under `$LEDGERLAB_SCENARIO_DIR`
    /// and under `./scenarios`.
    pub fn find(name: &str) -> Result<Scenario, ScenarioError> {
        let mut candidates: Vec<PathBuf> = Vec::new();
        let push = |base: PathBuf, candidates: &mut Vec<PathBuf>| {
            if base.extension().is_none() {
                candidates.push(base.with_extension("scn"));
            }
            candidates.push(base);
        };
        push(PathBuf::from(name), &mut candidates);
        if let Ok(dir) = std::env::var("LEDGERLAB_SCENARIO_DIR") {
            push(Path::new(&dir).join(name), &mut candidates);
        }
        push(Path::new("scenarios").join(name), &mut candidates);
        for candidate in &candidates {
            if candidate.is_file() {
                return Scenario::load(candidate);
            }
        }
        Err(ScenarioError::Io {
            path: name.to_string(),
            message: format!(
                "scenario not found; tried {}",
                candidates
                    .iter()
                    .map(|p| p.display().to_string())
                    .collect::<Vec<_>>()
                    .join(", ")
            ),
        })
    }

    /// The same scenario re-materialized under another creation mode, when
    /// the file marks its creation mode `configurable`.
    pub fn with_creation_mode(&self, mode: CreationMode) -> Result<Scenario, ScenarioError> {
        if mode == self.creation_mode {
            return Ok(self.clone());
        }
        if !self.creation_configurable {
            return Err(ScenarioError::Unsupported(format!(
                "scenario `{}` pins its creation mode to {}; it cannot be re-run as {mode}",
                self.name, self.creation_mode
            )));
        }
        let mut other = self.clone();
        other.creation_mode = mode;
        other.rematerialize()?;
        Ok(other)
    }

    /// Build schedule, world, and oracles from the raw declaration under the
    /// current creation mode.
    fn rematerialize(&mut self) -> Result<(), ScenarioError> {
        let plan = match &self.workload_spec {
            Some(workload) => workload.generate(&WorkloadContext {
                groups: &self.groups,
                creation_mode: self.creation_mode,
                frauds: &self.fraud_lines,
                line: self.workload_line,
            })?,
            None => {
                if let Some((fraud, line)) = self.fraud_lines.first() {
                    return Err(ScenarioError::invalid(
                        *line,
                        format!("fraud `{fraud}` declared but the scenario has no workload"),
                    ));
                }
                WorkloadPlan::default()
            }
        };

        // World: workload contributions first, file entries override them;
        // genesis objects keep file entries ahead of workload ones.
        let mut world = WorldModel::default();
        world.genesis = self.base_world.genesis.clone();
        world.genesis.extend(plan.genesis.iter().cloned());
        let mut ids = BTreeSet::new();
        for d in &world.genesis {
            if !ids.insert(d.object_id) {
                return Err(ScenarioError::invalid(
                    self.workload_line,
                    format!("genesis object {} declared twice", d.object_id.token()),
                ));
            }
        }
        for (id, property, value) in &plan.facts {
            world.set_fact(*id, property.clone(), value.clone());
        }
        for (id, props) in &self.base_world.facts {
            for (property, value) in props {
                world.set_fact(*id, property.clone(), value.clone());
            }
        }
        for (property, label, amount) in &plan.balances {
            world
                .initial_balances
                .insert((property.clone(), label.clone()), *amount);
        }
        for (key, amount) in &self.base_world.initial_balances {
            world.initial_balances.insert(key.clone(), *amount);
        }
        world.ledger_binding_properties = self.base_world.ledger_binding_properties.clone();

        // Frauds lie through whatever oracle gets asked, so the overrides go
        // into every declared oracle; only one oracle ever serves a given
        // (object, property) fact.
        let mut oracles = self.base_oracles.clone();
        if !plan.lies.is_empty() {
            for oracle in &mut oracles {
                apply_fact_overrides(oracle, &plan.lies);
            }
        }

        self.schedule = plan.schedule;
        self.world = world;
        self.oracles = oracles;
        Ok(())
    }
}

/// Layer fact overrides onto an oracle. A truthful oracle starts lying about
/// exactly these facts; a lying oracle lies about these too; a noisy oracle
/// keeps flipping coins and ignores the overrides.
fn apply_fact_overrides(oracle: &mut Oracle, facts: &[(ObjectId, String, Scalar)]) {
    let additions: BTreeMap<(ObjectId, String), Scalar> = facts
        .iter()
        .map(|(id, property, value)| ((*id, property.clone()), value.clone()))
        .collect();
    oracle.behavior = match std::mem::replace(&mut oracle.behavior, OracleBehavior::Truthful) {
        OracleBehavior::Truthful => OracleBehavior::Lies {
            overrides: additions,
        },
        OracleBehavior::Lies { mut overrides } => {
            overrides.extend(additions);
            OracleBehavior::Lies { overrides }
        }
        noisy => noisy,
    };
}

// ---------------------------------------------------------------------------
// File-section parsers
// ---------------------------------------------------------------------------

fn expect_args(node: &Node, n: usize) -> Result<(), ScenarioError> {
    if node.args.len() != n {
        return Err(ScenarioError::invalid(
            node.line,
            format!("`{}` takes exactly {n} argument(s)", node.key),
        ));
    }
    Ok(())
}

fn parse_scalar(token: &str, line: usize) -> Result<Scalar, ScenarioError> {
    if let Ok(v) = token.parse::<i64>() {
        return Ok(Scalar::Int(v));
    }
    match token {
        "true" => Ok(Scalar::Bool(true)),
        "false" => Ok(Scalar::Bool(false)),
        other => Scalar::str(other)
            .map_err(|_| ScenarioError::invalid(line, format!("bad attribute value {other:?}"))),
    }
}

fn parse_object(token: &str, line: usize) -> Result<ObjectId, ScenarioError> {
    ObjectId::parse_token(token)
        .ok_or_else(|| ScenarioError::invalid(line, format!("bad object token `{token}`")))
}

fn parse_attr_pairs(
    args: &[String],
    line: usize,
) -> Result<BTreeMap<String, Scalar>, ScenarioError> {
    if args.len() % 2 != 0 {
        return Err(ScenarioError::invalid(
            line,
            "attributes come in key value pairs".to_string(),
        ));
    }
    let mut attrs = BTreeMap::new();
    for pair in args.chunks(2) {
        attrs.insert(pair[0].clone(), parse_scalar(&pair[1], line)?);
    }
    Ok(attrs)
}

fn parse_groups(node: &Node) -> Result<BTreeMap<String, Vec<PartyId>>, ScenarioError> {
    node.expect_keys(&["group"])?;
    let mut groups: BTreeMap<String, Vec<PartyId>> = BTreeMap::new();
    let mut ranges: Vec<(u64, u64)> = Vec::new();
    for g in node.children_named("group") {
        let name = g.arg(0)?.to_string();
        let mut count = None;
        let mut start = None;
        let mut i = 1;
        while i < g.args.len() {
            let key = &g.args[i];
            let value = g.args.get(i + 1).ok_or_else(|| {
                ScenarioError::invalid(g.line, format!("group parameter `{key}` needs a value"))
            })?;
            let parsed = value.parse::<u64>().map_err(|_| {
                ScenarioError::invalid(g.line, format!("group `{key}`: bad number {value:?}"))
            })?;
            match key.as_str() {
                "count" => count = Some(parsed),
                "start-id" => start = Some(parsed),
                other => {
                    return Err(ScenarioError::invalid(
                        g.line,
                        format!("unknown group parameter `{other}`"),
                    ))
                }
            }
            i += 2;
        }
        let count = count.ok_or_else(|| {
            ScenarioError::invalid(g.line, format!("group `{name}` needs `count`"))
        })?;
        let start = start.ok_or_else(|| {
            ScenarioError::invalid(g.line, format!("group `{name}` needs `start-id`"))
        })?;
        if count == 0 {
            return Err(ScenarioError::invalid(
                g.line,
                format!("group `{name}` must have at least one member"),
            ));
        }
        if start < 101 {
            return Err(ScenarioError::invalid(
                g.line,
                "party ids below 101 are reserved for synthesized maintainers".to_string(),
            ));
        }
        if groups.contains_key(&name) {
            return Err(ScenarioError::invalid(
                g.line,
                format!("group `{name}` declared twice"),
            ));
        }
        let end = start + count - 1;
        if ranges.iter().any(|&(a, b)| start <= b && a <= end) {
            return Err(ScenarioError::invalid(
                g.line,
                format!("group `{name}` overlaps another group's id range"),
            ));
        }
        ranges.push((start, end));
        let members = (0..count)
            .map(|k| PartyId::new(start + k, format!("{name}-{}", k + 1)))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| ScenarioError::invalid(g.line, e.to_string()))?;
        groups.insert(name, members);
    }
    if groups.is_empty() {
        return Err(ScenarioError::invalid(
            node.line,
            "`parties` must declare at least one group".to_string(),
        ));
    }
    Ok(groups)
}

fn parse_world(node: &Node, world: &mut WorldModel) -> Result<(), ScenarioError> {
    node.expect_keys(&["balance", "fact", "binding", "genesis-object"])?;
    for c in &node.children {
        match c.key.as_str() {
            "balance" => {
                expect_args(c, 3)?;
                let property = c.arg(0)?.to_string();
                let label = c.arg(1)?.to_string();
                let amount = c.int_arg(2)?;
                world.initial_balances.insert((property, label), amount);
            }
            "fact" => {
                expect_args(c, 3)?;
                let id = parse_object(c.arg(0)?, c.line)?;
                let property = c.arg(1)?.to_string();
                let value = parse_scalar(c.arg(2)?, c.line)?;
                world.set_fact(id, property, value);
            }
            "binding" => {
                expect_args(c, 1)?;
                world.ledger_binding_properties.insert(c.arg(0)?.to_string());
            }
            "genesis-object" => {
                let id = parse_object(c.arg(0)?, c.line)?;
                let attrs = parse_attr_pairs(&c.args[1..], c.line)?;
                world.genesis.push(ObjectDescriptor::genesis(id, attrs));
            }
            _ => unreachable!("expect_keys admits only known keys"),
        }
    }
    Ok(())
}

fn parse_rule(args: &[String], line: usize) -> Result<RuleSpec, ScenarioError> {
    let arg = |i: usize| -> Result<&str, ScenarioError> {
        args.get(i).map(String::as_str).ok_or_else(|| {
            ScenarioError::invalid(line, format!("rule `{}` is missing arguments", args[0]))
        })
    };
    let exactly = |n: usize, rule: RuleSpec| -> Result<RuleSpec, ScenarioError> {
        if args.len() != n {
            return Err(ScenarioError::invalid(
                line,
                format!("rule `{}` takes exactly {} argument(s)", args[0], n - 1),
            ));
        }
        Ok(rule)
    };
    let kind = args.first().map(String::as_str).ok_or_else(|| {
        ScenarioError::invalid(line, "expected a rule after the dependency".to_string())
    })?;
    match kind {
        "balance-sufficiency" => exactly(
            2,
            RuleSpec::BalanceSufficiency {
                property: arg(1)?.to_string(),
            },
        ),
        "no-double-spend" => exactly(1, RuleSpec::NoDoubleSpend),
        "no-duplicate-claim" => exactly(1, RuleSpec::NoDuplicateClaim),
        "ownership-unique" => exactly(1, RuleSpec::OwnershipUnique),
        "object-exists" => exactly(1, RuleSpec::ObjectExists),
        "provenance-chain-intact" => exactly(1, RuleSpec::ProvenanceChainIntact),
        "always" => exactly(1, RuleSpec::Always),
        "property-equals" => {
            let property = arg(1)?.to_string();
            let raw = arg(2)?;
            let expect = match raw.strip_prefix('@') {
                Some(attr) => Expect::FromAttribute(attr.to_string()),
                None => Expect::Literal(parse_scalar(raw, line)?),
            };
            let applies_to = match args.len() {
                3 => None,
                5 if args[3] == "applies-to" => Some(PayloadKind::parse(&args[4]).ok_or_else(
                    || ScenarioError::invalid(line, format!("unknown record kind `{}`", args[4])),
                )?),
                _ => {
                    return Err(ScenarioError::invalid(
                        line,
                        "property-equals takes `<property> <expected> [applies-to <kind>]`"
                            .to_string(),
                    ))
                }
            };
            Ok(RuleSpec::PropertyEquals {
                property,
                expect,
                applies_to,
            })
        }
        "vote-threshold" => {
            if args.len() != 3 {
                return Err(ScenarioError::invalid(
                    line,
                    "vote-threshold takes `<property> <num>/<den>`".to_string(),
                ));
            }
            let property = arg(1)?.to_string();
            let raw = arg(2)?;
            let (num, den) = raw
                .split_once('/')
                .and_then(|(n, d)| Some((n.parse::<u64>().ok()?, d.parse::<u64>().ok()?)))
                .filter(|&(_, d)| d > 0)
                .ok_or_else(|| {
                    ScenarioError::invalid(line, format!("bad threshold fraction {raw:?}"))
                })?;
            Ok(RuleSpec::VoteThreshold {
                property,
                threshold: Fraction::new(num, den),
            })
        }
        other => Err(ScenarioError::invalid(
            line,
            format!("unknown rule `{other}`"),
        )),
    }
}

type DeclsWithLines = Vec<(PredicateDecl, usize)>;

fn parse_decl_block(node: Option<&Node>, entry: &str) -> Result<DeclsWithLines, ScenarioError> {
    let Some(node) = node else {
        return Ok(Vec::new());
    };
    node.expect_keys(&[entry])?;
    let mut decls = Vec::new();
    for c in node.children_named(entry) {
        let name = c.arg(0)?.to_string();
        let decl = match c.arg(1)? {
            "internal" => PredicateDecl::internal(name, parse_rule(&c.args[2..], c.line)?),
            "external" => {
                let oracle = c.arg(2)?.to_string();
                PredicateDecl::external(name, oracle, parse_rule(&c.args[3..], c.line)?)
            }
            other => {
                return Err(ScenarioError::invalid(
                    c.line,
                    format!("dependency is `internal` or `external`, not `{other}`"),
                ))
            }
        };
        decl.check()
            .map_err(|e| ScenarioError::invalid(c.line, e.to_string()))?;
        decls.push((decl, c.line));
    }
    Ok(decls)
}

fn parse_oracles(
    node: Option<&Node>,
    groups: &BTreeMap<String, Vec<PartyId>>,
) -> Result<Vec<Oracle>, ScenarioError> {
    let Some(node) = node else {
        return Ok(Vec::new());
    };
    node.expect_keys(&["oracle"])?;
    let mut oracles: Vec<Oracle> = Vec::new();
    for c in node.children_named("oracle") {
        let name = c.arg(0)?.to_string();
        if oracles.iter().any(|o| o.name == name) {
            return Err(ScenarioError::invalid(
                c.line,
                format!("oracle `{name}` declared twice"),
            ));
        }
        let operator = match c.args.get(1).map(String::as_str) {
            None => None,
            Some("operator") => {
                let label = c.arg(2)?;
                let party = groups
                    .values()
                    .flatten()
                    .find(|p| p.label == label)
                    .cloned()
                    .ok_or_else(|| {
                        ScenarioError::invalid(
                            c.line,
                            format!("oracle operator `{label}` is not a declared party"),
                        )
                    })?;
                if c.args.len() != 3 {
                    return Err(ScenarioError::invalid(
                        c.line,
                        "oracle takes `<name> [operator <party>]`".to_string(),
                    ));
                }
                Some(party)
            }
            Some(other) => {
                return Err(ScenarioError::invalid(
                    c.line,
                    format!("unexpected `{other}` after the oracle name"),
                ))
            }
        };
        oracles.push(Oracle::truthful(name, operator));
    }
    Ok(oracles)
}

type HooksWithLines = Vec<(ContractHook, usize)>;

fn parse_hooks(node: Option<&Node>) -> Result<HooksWithLines, ScenarioError> {
    let Some(node) = node else {
        return Ok(Vec::new());
    };
    node.expect_keys(&["hook"])?;
    let mut hooks = Vec::new();
    for c in node.children_named("hook") {
        let name = c.arg(0)?.to_string();
        if c.arg(1)? != "on" {
            return Err(ScenarioError::invalid(
                c.line,
                "hook syntax is `hook <name> on <predicate> <action>`".to_string(),
            ));
        }
        let trigger = c.arg(2)?.to_string();
        let action = match c.arg(3)? {
            "create-object" => {
                expect_args(c, 4)?;
                c.expect_keys(&["attribute", "owner-from-proposer", "id-width"])?;
                let id_width = match c.child("id-width") {
                    Some(w) => {
                        let width = w.uint_arg(0)?;
                        if width == 0 || width > 256 {
                            return Err(ScenarioError::invalid(
                                w.line,
                                "id-width must be between 1 and 256 bits".to_string(),
                            ));
                        }
                        Some(width as u16)
                    }
                    None => None,
                };
                let owner_from_proposer = match c.child("owner-from-proposer") {
                    Some(b) => b.bool_arg(0)?,
                    None => false,
                };
                HookAction::CreateObject {
                    id_width,
                    attributes: hook_attributes(c)?,
                    owner_from_proposer,
                }
            }
            "append-record" => {
                expect_args(c, 5)?;
                let kind = PayloadKind::parse(c.arg(4)?).ok_or_else(|| {
                    ScenarioError::invalid(
                        c.line,
                        format!("unknown record kind `{}`", c.arg(4).unwrap_or_default()),
                    )
                })?;
                c.expect_keys(&["attribute"])?;
                HookAction::AppendRecord {
                    kind,
                    attributes: hook_attributes(c)?,
                }
            }
            other => {
                return Err(ScenarioError::invalid(
                    c.line,
                    format!("hook action is `create-object` or `append-record`, not `{other}`"),
                ))
            }
        };
        hooks.push((
            ContractHook {
                name,
                trigger,
                action,
            },
            c.line,
        ));
    }
    Ok(hooks)
}

fn hook_attributes(node: &Node) -> Result<BTreeMap<String, Scalar>, ScenarioError> {
    let mut attrs = BTreeMap::new();
    for a in node.children_named("attribute") {
        expect_args(a, 2)?;
        attrs.insert(a.arg(0)?.to_string(), parse_scalar(a.arg(1)?, a.line)?);
    }
    Ok(attrs)
}

fn parse_adversaries(
    node: &Node,
    frauds: &mut Vec<(String, usize)>,
    presets: &mut Vec<(ObjectId, String, Scalar)>,
    consensus: &mut Option<(String, f64)>,
) -> Result<(), ScenarioError> {
    node.expect_keys(&["fraud", "attack-preset", "consensus"])?;
    for c in &node.children {
        match c.key.as_str() {
            "fraud" => {
                expect_args(c, 1)?;
                let name = c.arg(0)?.to_string();
                if frauds.iter().any(|(f, _)| f == &name) {
                    return Err(ScenarioError::invalid(
                        c.line,
                        format!("fraud `{name}` enabled twice"),
                    ));
                }
                frauds.push((name, c.line));
            }
            "attack-preset" => {
                expect_args(c, 3)?;
                let id = parse_object(c.arg(0)?, c.line)?;
                let property = c.arg(1)?.to_string();
                let value = parse_scalar(c.arg(2)?, c.line)?;
                presets.push((id, property, value));
            }
            "consensus" => {
                expect_args(c, 2)?;
                if consensus.is_some() {
                    return Err(ScenarioError::invalid(
                        c.line,
                        "only one `consensus` adversary line is allowed".to_string(),
                    ));
                }
                let script = c.arg(0)?.to_string();
                if ![SCRIPT_WITHHOLDER, SCRIPT_EQUIVOCATOR, SCRIPT_CENSOR]
                    .contains(&script.as_str())
                {
                    return Err(ScenarioError::invalid(
                        c.line,
                        format!("unknown adversary script `{script}`"),
                    ));
                }
                let power = c.arg(1)?.parse::<f64>().map_err(|_| {
                    ScenarioError::invalid(c.line, "adversary power must be a number".to_string())
                })?;
                if !(0.0..1.0).contains(&power) {
                    return Err(ScenarioError::invalid(
                        c.line,
                        "adversary power must be in [0, 1)".to_string(),
                    ));
                }
                *consensus = Some((script, power));
            }
            _ => unreachable!("expect_keys admits only known keys"),
        }
    }
    Ok(())
}

fn parse_expected(node: &Node) -> Result<Expectations, ScenarioError> {
    node.expect_keys(&[
        "object-creation",
        "internal-predicate",
        "replaces-trusted-third-party",
        "goal",
    ])?;
    let met = |c: &Node| -> Result<bool, ScenarioError> {
        match c.arg(0)? {
            "met" => Ok(true),
            "not-met" => Ok(false),
            other => Err(ScenarioError::invalid(
                c.line,
                format!("expected `met` or `not-met`, got `{other}`"),
            )),
        }
    };
    let mut expected = Expectations::default();
    if let Some(c) = node.child("object-creation") {
        expected.object_creation_met = Some(met(c)?);
    }
    if let Some(c) = node.child("internal-predicate") {
        expected.internal_predicate_met = Some(met(c)?);
    }
    if let Some(c) = node.child("replaces-trusted-third-party") {
        expected.replaces_trusted_third_party = Some(c.bool_arg(0)?);
    }
    for c in node.children_named("goal") {
        let name = c.arg(0)?.to_string();
        let ledger = c.bool_arg(1)?;
        let divergent = match c.args.len() {
            2 => None,
            4 if c.args[2] == "divergent" => Some(c.bool_arg(3)?),
            _ => {
                return Err(ScenarioError::invalid(
                    c.line,
                    "goal expectation is `goal <name> <bool> [divergent <bool>]`".to_string(),
                ))
            }
        };
        expected.goals.push(GoalExpectation {
            name,
            ledger,
            divergent,
        });
    }
    Ok(expected)
}

// ---------------------------------------------------------------------------
// Running a scenario
// ---------------------------------------------------------------------------

/// Knobs for one scenario run. `None` means "use the scenario's or the
/// engine's default".
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub engine: EngineKind,
    pub maintainers: usize,
    /// Fraction of maintainers running the adversary script. `None` defers
    /// to the scenario's `consensus` line, or 0.
    pub adversary_power: Option<f64>,
    pub adversary_script: Option<String>,
    /// Confirmation depth; `None` takes the engine default.
    pub confirmation_depth: Option<u64>,
    /// Consensus rounds; `None` scales with the schedule. 0 skips consensus
    /// entirely and evaluates the genesis records alone.
    pub rounds: Option<u64>,
    pub seed: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            engine: EngineKind::PermissionedQuorum,
            maintainers: 7,
            adversary_power: None,
            adversary_script: None,
            confirmation_depth: None,
            rounds: None,
            seed: DEFAULT_SEED,
        }
    }
}

impl RunOptions {
    /// Options for trust analysis: an ideal ledger — instant finality, no
    /// adversaries — so the audit reflects the use case, not the network.
    pub fn analysis() -> Self {
        RunOptions {
            adversary_power: Some(0.0),
            ..RunOptions::default()
        }
    }
}

/// Rounds to run when the caller does not pin a number: enough headroom over
/// one-record-per-round that probabilistic block production exhausts the
/// schedule with margin to spare.
pub fn default_rounds(schedule_len: usize) -> u64 {
    (4 * schedule_len as u64).max(120)
}

/// One goal's outcome after a run.
#[derive(Debug, Clone, Serialize)]
pub struct GoalOutcome {
    pub name: String,
    pub dependency: Dependency,
    /// The verdict reached through the scenario's declared oracles.
    pub ledger: bool,
    /// The verdict a forced-truthful oracle set reaches; `None` for goals
    /// that never consult one.
    pub world_truth: Option<bool>,
    /// True when `ledger` and `world_truth` disagree: the ledger certified
    /// something the world contradicts.
    pub divergent: bool,
    /// Records the goal's rule actually constrained.
    pub records_checked: u64,
}

/// Everything a scenario run produces.
#[derive(Debug, Clone)]
pub struct ScenarioRunReport {
    pub scenario: String,
    pub engine: EngineKind,
    pub seed: u64,
    pub rounds: u64,
    /// Consensus outcome; `None` when the run was asked for zero rounds.
    pub consensus: Option<RunOutcome>,
    /// The decided ledger with hook-emitted records interleaved.
    pub extended: RecordSequence,
    pub hook_firings: Vec<HookFiring>,
    /// Per-record validation of the extended sequence under the declared
    /// predicates and oracles.
    pub validation: SequenceReport,
    pub goals: Vec<GoalOutcome>,
    /// Oracle query counts accumulated across validation and goal checks.
    pub consulted: BTreeMap<String, u64>,
    pub audit: TrustAuditReport,
    /// The predicates after ledger-binding, as actually applied.
    pub bound_predicates: Vec<PredicateDecl>,
    pub notes: Vec<String>,
}

fn synthesize_maintainers(config: &NetworkConfig) -> Result<Vec<Party>, ScenarioError> {
    let n = config.maintainers;
    let scripted = config.adversary_count();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let id = PartyId::new(i as u64 + 1, format!("m{}", i + 1))?;
        let mut party = Party::honest(id, [Role::Maintainer]);
        if i >= n - scripted {
            party.honesty = Honesty::Adversarial {
                script: config.adversary_script.clone(),
            };
        }
        out.push(party);
    }
    Ok(out)
}

/// Run a scenario end to end: consensus over the schedule, contract hooks
/// over the decided prefix, validation of the extended sequence, goal
/// evaluation (each external goal also against forced-truthful oracles), and
/// the trust audit.
pub fn run_scenario(
    scenario: &Scenario,
    options: &RunOptions,
) -> Result<ScenarioRunReport, ScenarioError> {
    if options.maintainers == 0 || options.maintainers > 100 {
        return Err(ScenarioError::Unsupported(format!(
            "maintainer count must be 1..=100 (ids above 100 belong to scenario parties), got {}",
            options.maintainers
        )));
    }

    let bound = bind_predicates(&scenario.predicates, &scenario.world);
    let bound_goals = bind_predicates(&scenario.goals, &scenario.world);
    // Maintainers admit records by what the ledger itself can decide at
    // inclusion time; external and sequence-wide rules apply post hoc.
    let inclusion: Vec<PredicateDecl> = bound
        .iter()
        .filter(|d| d.dependency == Dependency::Internal && d.scope == Scope::Record)
        .cloned()
        .collect();

    let rounds = options
        .rounds
        .unwrap_or_else(|| default_rounds(scenario.schedule.len()));

    let (consensus, decided) = if rounds == 0 {
        let seq = RecordSequence::from_records(genesis_records(&scenario.world.genesis))?;
        (None, seq)
    } else {
        let mut config = NetworkConfig::new(options.engine);
        config.maintainers = options.maintainers;
        config.rounds = rounds;
        config.seed = options.seed;
        let file = scenario.consensus_adversary.as_ref();
        config.adversary_power = options
            .adversary_power
            .or(file.map(|(_, power)| *power))
            .unwrap_or(0.0);
        if let Some(script) = options
            .adversary_script
            .clone()
            .or_else(|| file.map(|(script, _)| script.clone()))
        {
            config.adversary_script = script;
        }
        if let Some(c) = options.confirmation_depth {
            config.confirmation_depth = c;
        }
        let setup = RunSetup {
            maintainers: synthesize_maintainers(&config)?,
            schedule: scenario.schedule.clone(),
            genesis: scenario.world.genesis.clone(),
            world: scenario.world.clone(),
            decls: inclusion,
        };
        let outcome = run_consensus(&config, &setup)?;
        let decided = outcome.decided.clone();
        (Some(outcome), decided)
    };

    let mut handles: BTreeMap<String, OracleHandle> = scenario
        .oracles
        .iter()
        .map(|o| (o.name.clone(), OracleHandle::new(o.clone(), options.seed)))
        .collect();

    let (extended, hook_firings) = if scenario.hooks.is_empty() {
        (decided, Vec::new())
    } else {
        fire_contract_hooks(
            &scenario.hooks,
            &bound,
            &scenario.world,
            &decided,
            &mut handles,
            options.seed,
        )?
    };

    let validation = validate_sequence(&bound, &scenario.world, &extended, &mut handles)?;

    let mut goals = Vec::new();
    for decl in &bound_goals {
        let (ledger, records_checked) =
            evaluate_goal(decl, &scenario.world, &extended, &mut handles)?;
        let world_truth = if decl.dependency == Dependency::External {
            let mut truthful = truthful_handles(&scenario.oracles, options.seed);
            Some(evaluate_goal(decl, &scenario.world, &extended, &mut truthful)?.0)
        } else {
            None
        };
        goals.push(GoalOutcome {
            name: decl.name.clone(),
            dependency: decl.dependency,
            ledger,
            world_truth,
            divergent: world_truth.map(|w| w != ledger).unwrap_or(false),
            records_checked,
        });
    }

    let consulted: BTreeMap<String, u64> = handles
        .iter()
        .map(|(name, h)| (name.clone(), h.queries()))
        .collect();

    let mut audit_decls = bound.clone();
    for g in &bound_goals {
        if !audit_decls.iter().any(|d| d.name == g.name) {
            audit_decls.push(g.clone());
        }
    }
    let audit = audit_trust(&UseCaseAudit {
        name: scenario.name.clone(),
        creation_mode: scenario.creation_mode,
        decls: audit_decls,
        oracles: scenario.oracles.clone(),
        sequence: extended.clone(),
        consulted: consulted.clone(),
    });

    Ok(ScenarioRunReport {
        scenario: scenario.name.clone(),
        engine: options.engine,
        seed: options.seed,
        rounds,
        consensus,
        extended,
        hook_firings,
        validation,
        goals,
        consulted,
        audit,
        bound_predicates: bound,
        notes: scenario.notes.clone(),
    })
}

/// Evaluate one goal over a sequence. Record-scoped goals must hold on every
/// record their rule constrains; sequence-scoped goals take the value after
/// the final record (false over an empty sequence). Returns the verdict and
/// how many records were actually checked.
pub fn evaluate_goal(
    decl: &PredicateDecl,
    world: &WorldModel,
    seq: &RecordSequence,
    oracles: &mut BTreeMap<String, OracleHandle>,
) -> Result<(bool, u64), ScenarioError> {
    let mut state = LedgerState::initial(world);
    let mut checked = 0u64;
    let mut verdict = match decl.scope {
        Scope::Record => true,
        Scope::Sequence => false,
    };
    for r in seq {
        match decl.scope {
            Scope::Record => {
                if decl.rule.constrains(r.payload.kind) {
                    checked += 1;
                    let oracle = oracle_for(decl, oracles)?;
                    if !evaluate_predicate(decl, world, &state, r, oracle)? {
                        verdict = false;
                    }
                }
                state.apply(r);
            }
            Scope::Sequence => {
                state.apply(r);
                checked += 1;
                let oracle = oracle_for(decl, oracles)?;
                verdict = evaluate_predicate(decl, world, &state, r, oracle)?;
            }
        }
    }
    Ok((verdict, checked))
}

fn truthful_handles(oracles: &[Oracle], seed: u64) -> BTreeMap<String, OracleHandle> {
    oracles
        .iter()
        .map(|o| {
            let truthful = Oracle::truthful(o.name.clone(), o.operator.clone());
            (o.name.clone(), OracleHandle::new(truthful, seed))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Attack experiments
// ---------------------------------------------------------------------------

/// Result of a repeated-trial attack experiment.
#[derive(Debug, Clone, Serialize)]
pub struct AttackOutcome {
    pub attack: String,
    pub trials: u64,
    pub successes: u64,
    pub success_rate: f64,
    pub detail: String,
}

impl AttackOutcome {
    fn new(attack: &str, trials: u64, successes: u64, detail: String) -> Self {
        AttackOutcome {
            attack: attack.to_string(),
            trials,
            successes,
            success_rate: if trials == 0 {
                0.0
            } else {
                successes as f64 / trials as f64
            },
            detail,
        }
    }
}

/// Race the legitimate creator to register an object first. Only meaningful
/// when parties create objects: the attacker needs the identifier before the
/// creator's record lands. With sequential identifiers the next id is public
/// knowledge, so any timing advantage wins; with random identifiers the
/// attacker must guess an unrevealed draw.
pub fn premature_creation_attack(
    scenario: &Scenario,
    scheme: IdScheme,
    advantage_rounds: u64,
    trials: u64,
    seed: u64,
) -> Result<AttackOutcome, ScenarioError> {
    const NAME: &str = "premature-creation";
    if scenario.creation_mode == CreationMode::ConsensusBased {
        return Err(ScenarioError::InapplicableAttack {
            attack: NAME.to_string(),
            reason: "objects are consensus-created; there is no party-chosen identifier to race"
                .to_string(),
        });
    }
    let mut successes = 0u64;
    for t in 0..trials {
        let won = match scheme {
            IdScheme::Sequential => advantage_rounds >= 1,
            IdScheme::RandomBits { width } => {
                if advantage_rounds == 0 {
                    false
                } else {
                    let trial_seed = mix_words(&[seed, t]);
                    let guess =
                        Wide256::random_bits(&mut component_rng(trial_seed, "adversary-guess"), width);
                    let draw =
                        Wide256::random_bits(&mut component_rng(trial_seed, "victim-draw"), width);
                    guess == draw
                }
            }
        };
        if won {
            successes += 1;
        }
    }
    let detail = match scheme {
        IdScheme::Sequential => format!(
            "sequential identifiers are public knowledge; a {advantage_rounds}-round head start \
             lands the forged registration first"
        ),
        IdScheme::RandomBits { width } => format!(
            "forging first means guessing the creator's unrevealed {width}-bit identifier"
        ),
    };
    Ok(AttackOutcome::new(NAME, trials, successes, detail))
}

/// Flood a vote-threshold predicate with ballots from forged identities.
/// Only meaningful on the open-membership engine: a closed maintainer set
/// never admits the forged identities in the first place.
pub fn sybil_vote_attack(
    scenario: &Scenario,
    engine: EngineKind,
    honest_voters: u64,
    forged_voters: u64,
    seed: u64,
) -> Result<AttackOutcome, ScenarioError> {
    const NAME: &str = "sybil-votes";
    if engine == EngineKind::PermissionedQuorum {
        return Err(ScenarioError::InapplicableAttack {
            attack: NAME.to_string(),
            reason: "membership is closed; forged identities never join the voter set".to_string(),
        });
    }
    let decl = scenario
        .predicates
        .iter()
        .chain(scenario.goals.iter())
        .find(|d| matches!(d.rule, RuleSpec::VoteThreshold { .. }))
        .cloned()
        .ok_or_else(|| ScenarioError::InapplicableAttack {
            attack: NAME.to_string(),
            reason: "no vote-threshold predicate to out-vote".to_string(),
        })?;
    let (property, threshold) = match &decl.rule {
        RuleSpec::VoteThreshold {
            property,
            threshold,
        } => (property.clone(), *threshold),
        _ => unreachable!("filtered on rule shape"),
    };

    // Honest voters reject, forged identities approve; interleave them in a
    // seed-determined order and let the real tallying machinery decide.
    let mut ballots: Vec<(PartyId, bool)> = Vec::new();
    for i in 0..honest_voters {
        ballots.push((PartyId::new(8_001 + i, format!("voter-{}", i + 1))?, false));
    }
    for i in 0..forged_voters {
        ballots.push((PartyId::new(9_001 + i, format!("sybil-{}", i + 1))?, true));
    }
    ballots.shuffle(&mut component_rng(seed, "sybil-order"));

    let mut records: Vec<Record> = Vec::new();
    for (i, (voter, approve)) in ballots.iter().enumerate() {
        let mut attrs = BTreeMap::new();
        attrs.insert(
            "property".to_string(),
            Scalar::str(property.clone()).map_err(ScenarioError::from)?,
        );
        attrs.insert("value".to_string(), Scalar::Bool(*approve));
        let payload = Payload::new(PayloadKind::Assert, attrs)?;
        records.push(make_record(
            i as u64,
            [voter.clone()],
            [],
            payload,
            voter.clone(),
            i as u64,
        )?);
    }
    let seq = RecordSequence::from_records(records)?;

    let mut state = LedgerState::initial(&scenario.world);
    let mut last: Option<&Record> = None;
    for r in &seq {
        state.apply(r);
        last = Some(r);
    }
    let success = match last {
        Some(record) => evaluate_predicate(&decl, &scenario.world, &state, record, None)?,
        None => false,
    };

    let total = honest_voters + forged_voters;
    let needed = threshold.strictly_above(total);
    let detail = format!(
        "{forged_voters} forged of {total} ballots on `{property}`; passing needs more than \
         {}/{} approvals ({needed} of {total})",
        threshold.num, threshold.den
    );
    Ok(AttackOutcome::new(
        NAME,
        1,
        u64::from(success),
        detail,
    ))
}

/// What a corrupted-oracle run certified against the world's word.
#[derive(Debug, Clone, Serialize)]
pub struct DivergenceReport {
    pub attack: String,
    /// The fact overrides the corrupted oracles answered with.
    pub overridden_facts: Vec<(ObjectId, String, Scalar)>,
    /// Goals whose ledger verdict contradicts world truth.
    pub diverged: Vec<String>,
    pub goals: Vec<GoalOutcome>,
}

/// Corrupt every declared oracle with the given fact overrides, rerun the
/// scenario, and report which goals the ledger now gets wrong. Only
/// meaningful when some predicate still depends on an oracle after
/// ledger-binding; a fully internal rule set leaves nothing to corrupt.
pub fn lying_oracle_attack(
    scenario: &Scenario,
    overrides: &[(ObjectId, String, Scalar)],
    engine: EngineKind,
    rounds: Option<u64>,
    seed: u64,
) -> Result<DivergenceReport, ScenarioError> {
    const NAME: &str = "lying-oracle";
    let mut all = scenario.predicates.clone();
    all.extend(scenario.goals.iter().cloned());
    let bound = bind_predicates(&all, &scenario.world);
    if !bound.iter().any(|d| d.dependency == Dependency::External) {
        return Err(ScenarioError::InapplicableAttack {
            attack: NAME.to_string(),
            reason: "every declared predicate is internally decidable; there is no oracle answer \
                     to corrupt"
                .to_string(),
        });
    }

    let mut patched = scenario.clone();
    if !overrides.is_empty() {
        for oracle in &mut patched.oracles {
            apply_fact_overrides(oracle, overrides);
        }
    }
    let options = RunOptions {
        engine,
        rounds,
        seed,
        ..RunOptions::default()
    };
    let report = run_scenario(&patched, &options)?;
    let diverged = report
        .goals
        .iter()
        .filter(|g| g.divergent)
        .map(|g| g.name.clone())
        .collect();
    Ok(DivergenceReport {
        attack: NAME.to_string(),
        overridden_facts: overrides.to_vec(),
        diverged,
        goals: report.goals,
    })
}
