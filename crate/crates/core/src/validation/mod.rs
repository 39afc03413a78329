//! The validation service: parameterized predicates evaluated over record
//! sequences, the oracles that serve externally dependent predicates, and
//! contract hooks that append protocol records when predicates fire.
//!
//! The dependency classification is load-bearing for the whole analyzer: a
//! predicate is *internal* when its truth is computable from the record
//! sequence alone, and *external* when deciding it requires facts from
//! outside the ledger. The evaluator enforces the classification at the
//! interface: internal predicates must not be handed an oracle, external
//! ones cannot run without one.

mod hooks;
mod oracle;
mod state;

pub use hooks::{
    fire_contract_hooks, is_hook_emitted, ContractHook, HookAction, HookEngine, HookFiring,
};
pub use oracle::{query_oracle, Oracle, OracleBehavior, OracleHandle};
pub use state::{LedgerState, ObjectState, VoteTally};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ledger::{
    LedgerError, ObjectDescriptor, ObjectId, PayloadKind, Record, RecordSequence, Scalar,
};

/// Errors from predicate evaluation and hook firing.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    /// An internal predicate was handed an oracle.
    #[error("predicate `{predicate}` is internal; it must not consult an oracle")]
    UnexpectedOracle { predicate: String },
    /// An external predicate was evaluated without an oracle.
    #[error("predicate `{predicate}` is external; evaluating it requires an oracle")]
    MissingOracle { predicate: String },
    /// A predicate names an oracle the run does not define.
    #[error("predicate `{predicate}` names unknown oracle `{name}`")]
    UnknownOracle { predicate: String, name: String },
    /// A hook trigger names a predicate the run does not define.
    #[error("hook `{hook}` triggers on unknown predicate `{name}`")]
    UnknownPredicate { hook: String, name: String },
    /// The world model has no ground truth for a queried fact.
    #[error("no ground-truth fact for {object} property `{property}`")]
    MissingFact { object: String, property: String },
    /// A predicate declaration is internally inconsistent.
    #[error("bad declaration of `{predicate}`: {detail}")]
    BadDeclaration { predicate: String, detail: String },
    /// A hook synthesized a record that violates ledger constraints.
    #[error(transparent)]
    Ledger(#[from] LedgerError),
}

// ---------------------------------------------------------------------------
// World model
// ---------------------------------------------------------------------------

/// Everything about a run's world that is not the record sequence itself:
/// predetermined objects, ground-truth facts behind oracles, starting
/// balances, and which properties the ledger is the authority for.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct WorldModel {
    /// Objects that exist before the first record. Engines materialize them
    /// as system-proposed records at the head of every chain.
    pub genesis: Vec<ObjectDescriptor>,
    /// Ground truth for (object, property) facts, as oracles see it.
    pub facts: BTreeMap<ObjectId, BTreeMap<String, Scalar>>,
    /// Starting balances keyed by (property, party label).
    pub initial_balances: BTreeMap<(String, String), i64>,
    /// Properties whose authoritative value is *defined* by the ledger
    /// itself. External predicates over these become internal: checking
    /// them needs no view of the world beyond the records.
    pub ledger_binding_properties: BTreeSet<String>,
}

impl WorldModel {
    pub fn fact(&self, object: &ObjectId, property: &str) -> Option<&Scalar> {
        self.facts.get(object).and_then(|m| m.get(property))
    }

    pub fn set_fact(&mut self, object: ObjectId, property: impl Into<String>, value: Scalar) {
        self.facts
            .entry(object)
            .or_default()
            .insert(property.into(), value);
    }
}

// ---------------------------------------------------------------------------
// Predicate declarations
// ---------------------------------------------------------------------------

/// Whether a predicate's truth is computable from the record sequence alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Dependency {
    Internal,
    External,
}

/// What a predicate ranges over: one record against the state before it, or
/// the whole sequence up to and including the record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scope {
    Record,
    Sequence,
}

/// An exact rational threshold, e.g. 2/3.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fraction {
    pub num: u64,
    pub den: u64,
}

impl Fraction {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(den > 0, "fraction denominator must be positive");
        Fraction { num, den }
    }

    /// Smallest integer k with k > self * total.
    pub fn strictly_above(&self, total: u64) -> u64 {
        self.num * total / self.den + 1
    }

    /// Smallest integer k with k >= self * total.
    pub fn at_least(&self, total: u64) -> u64 {
        (self.num * total).div_ceil(self.den)
    }
}

impl std::fmt::Display for Fraction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// What a property-equals rule compares the fact against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Expect {
    /// A fixed value.
    Literal(Scalar),
    /// The value the record itself carries under this attribute key.
    FromAttribute(String),
}

/// The closed set of validation rules. Every predicate a use case declares
/// instantiates one of these with parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum RuleSpec {
    /// Transfers in a balance dimension must be covered by the spender's
    /// balance derived from the prefix.
    BalanceSufficiency { property: String },
    /// No transfer may re-spend a (spender, object) pair.
    NoDoubleSpend,
    /// No object may be claimed twice, by anyone.
    NoDuplicateClaim,
    /// A claim is valid only for a currently unowned object, so the first
    /// claimant becomes the unique owner.
    OwnershipUnique,
    /// Referenced objects must exist; a create's subject must be fresh.
    ObjectExists,
    /// An object's property must equal an expected value. The one rule that
    /// may be externally dependent.
    PropertyEquals {
        property: String,
        expect: Expect,
        /// Restrict the check to records of this kind; others pass vacuously.
        applies_to: Option<PayloadKind>,
    },
    /// A transfer's sender must be the object's current holder.
    ProvenanceChainIntact,
    /// Unconditionally true; used as an unconditional hook trigger.
    Always,
    /// Boolean asserts on a property form a vote; true once yes votes
    /// strictly exceed the threshold fraction of all votes.
    VoteThreshold { property: String, threshold: Fraction },
}

impl RuleSpec {
    /// The property parameter, for rules that have one.
    pub fn property(&self) -> Option<&str> {
        match self {
            RuleSpec::BalanceSufficiency { property }
            | RuleSpec::PropertyEquals { property, .. }
            | RuleSpec::VoteThreshold { property, .. } => Some(property),
            _ => None,
        }
    }

    /// The scope this rule naturally evaluates at.
    pub fn natural_scope(&self) -> Scope {
        match self {
            RuleSpec::VoteThreshold { .. } => Scope::Sequence,
            _ => Scope::Record,
        }
    }

    /// Whether the rule actually constrains records of this kind. Rules pass
    /// vacuously on kinds they do not constrain; hook triggers use this to
    /// fire only on records the rule genuinely approves.
    pub fn constrains(&self, kind: PayloadKind) -> bool {
        match self {
            RuleSpec::BalanceSufficiency { .. }
            | RuleSpec::NoDoubleSpend
            | RuleSpec::ProvenanceChainIntact => kind == PayloadKind::Transfer,
            RuleSpec::NoDuplicateClaim | RuleSpec::OwnershipUnique => kind == PayloadKind::Claim,
            RuleSpec::PropertyEquals { applies_to, .. } => {
                applies_to.map(|k| k == kind).unwrap_or(true)
            }
            RuleSpec::ObjectExists | RuleSpec::Always | RuleSpec::VoteThreshold { .. } => true,
        }
    }
}

/// A named, classified validation predicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredicateDecl {
    pub name: String,
    pub scope: Scope,
    pub dependency: Dependency,
    /// Name of the oracle serving this predicate, for external dependencies.
    pub oracle: Option<String>,
    pub rule: RuleSpec,
}

impl PredicateDecl {
    /// An internal predicate at the rule's natural scope.
    pub fn internal(name: impl Into<String>, rule: RuleSpec) -> Self {
        PredicateDecl {
            name: name.into(),
            scope: rule.natural_scope(),
            dependency: Dependency::Internal,
            oracle: None,
            rule,
        }
    }

    /// An external predicate served by the named oracle.
    pub fn external(name: impl Into<String>, oracle: impl Into<String>, rule: RuleSpec) -> Self {
        PredicateDecl {
            name: name.into(),
            scope: rule.natural_scope(),
            dependency: Dependency::External,
            oracle: Some(oracle.into()),
            rule,
        }
    }

    /// Check internal consistency of the declaration.
    pub fn check(&self) -> Result<(), ValidationError> {
        let bad = |detail: &str| {
            Err(ValidationError::BadDeclaration {
                predicate: self.name.clone(),
                detail: detail.to_string(),
            })
        };
        match self.dependency {
            Dependency::External => {
                if !matches!(self.rule, RuleSpec::PropertyEquals { .. }) {
                    return bad("only property-equals rules can be externally dependent");
                }
                if self.oracle.is_none() {
                    return bad("external predicates must name a serving oracle");
                }
            }
            Dependency::Internal => {
                if self.oracle.is_some() {
                    return bad("internal predicates must not name an oracle");
                }
            }
        }
        if let RuleSpec::VoteThreshold { threshold, .. } = &self.rule {
            if threshold.num >= threshold.den {
                return bad("vote threshold must be a fraction below 1");
            }
        }
        Ok(())
    }
}

/// Reclassify declarations against a world model: an external property check
/// over a ledger-bound property becomes internal, because the ledger itself
/// is the authority for that property's value.
pub fn bind_predicates(decls: &[PredicateDecl], world: &WorldModel) -> Vec<PredicateDecl> {
    decls
        .iter()
        .map(|d| {
            let bound = d.dependency == Dependency::External
                && d.rule
                    .property()
                    .map(|p| world.ledger_binding_properties.contains(p))
                    .unwrap_or(false);
            if bound {
                let mut d = d.clone();
                d.dependency = Dependency::Internal;
                d.oracle = None;
                d
            } else {
                d.clone()
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

/// Evaluate one predicate on one record.
///
/// `state` must be the ledger state *before* the record for record-scoped
/// predicates, and the state *after* it for sequence-scoped ones (the
/// sequence includes the record under evaluation).
pub fn evaluate_predicate(
    decl: &PredicateDecl,
    world: &WorldModel,
    state: &LedgerState,
    record: &Record,
    oracle: Option<&mut OracleHandle>,
) -> Result<bool, ValidationError> {
    match (decl.dependency, &oracle) {
        (Dependency::Internal, Some(_)) => {
            return Err(ValidationError::UnexpectedOracle {
                predicate: decl.name.clone(),
            })
        }
        (Dependency::External, None) => {
            return Err(ValidationError::MissingOracle {
                predicate: decl.name.clone(),
            })
        }
        _ => {}
    }
    evaluate_rule(&decl.rule, world, state, record, oracle)
}

fn evaluate_rule(
    rule: &RuleSpec,
    world: &WorldModel,
    state: &LedgerState,
    r: &Record,
    mut oracle: Option<&mut OracleHandle>,
) -> Result<bool, ValidationError> {
    let kind = r.payload.kind;
    let ok = match rule {
        RuleSpec::BalanceSufficiency { property } => {
            if kind != PayloadKind::Transfer {
                true
            } else {
                let dimension = r
                    .payload
                    .get("property")
                    .and_then(Scalar::as_str)
                    .unwrap_or("balance");
                if dimension != property {
                    true
                } else {
                    let amount = r.payload.get("amount").and_then(Scalar::as_int).unwrap_or(0);
                    let from = r.payload.get("from").and_then(Scalar::as_str).unwrap_or("");
                    state.balance(property, from) >= amount
                }
            }
        }
        RuleSpec::NoDoubleSpend => {
            if kind != PayloadKind::Transfer {
                true
            } else {
                let from = r.payload.get("from").and_then(Scalar::as_str).unwrap_or("");
                !r.objects
                    .iter()
                    .any(|o| state.spent.contains(&(from.to_string(), *o)))
            }
        }
        RuleSpec::NoDuplicateClaim => {
            kind != PayloadKind::Claim || !r.objects.iter().any(|o| state.claimed.contains(o))
        }
        RuleSpec::OwnershipUnique => {
            kind != PayloadKind::Claim || r.objects.iter().all(|o| state.owner(o).is_none())
        }
        RuleSpec::ObjectExists => {
            let subject = r.payload.subject_object();
            r.objects.iter().all(|o| {
                if kind == PayloadKind::Create && Some(*o) == subject {
                    // A create's subject must be fresh.
                    state.object(o).is_none()
                } else {
                    state.object(o).is_some()
                }
            })
        }
        RuleSpec::PropertyEquals {
            property,
            expect,
            applies_to,
        } => {
            if applies_to.map(|k| k != kind).unwrap_or(false) {
                true
            } else {
                let expected = match expect {
                    Expect::Literal(v) => Some(v.clone()),
                    Expect::FromAttribute(key) => r.payload.get(key).cloned(),
                };
                match expected {
                    // An applicable record missing the comparison attribute
                    // fails the check; it asserts nothing checkable.
                    None => false,
                    Some(expected) => match oracle.as_deref_mut() {
                        Some(handle) => {
                            let mut all = true;
                            for obj in &r.objects {
                                let fact = handle.query(world, *obj, property)?;
                                if fact != expected {
                                    all = false;
                                }
                            }
                            all
                        }
                        // Internal reading: the ledger itself holds the
                        // authoritative value, via asserts folded into
                        // object attributes or the global latest assert.
                        // Nothing recorded yet means nothing to contradict.
                        None => {
                            let matches = |recorded: Option<&Scalar>| match recorded {
                                Some(v) => *v == expected,
                                None => true,
                            };
                            if r.objects.is_empty() {
                                matches(state.asserts.get(property).map(|(_, v)| v))
                            } else {
                                r.objects.iter().all(|obj| {
                                    matches(
                                        state
                                            .object(obj)
                                            .and_then(|o| o.attributes.get(property))
                                            .or_else(|| {
                                                state.asserts.get(property).map(|(_, v)| v)
                                            }),
                                    )
                                })
                            }
                        }
                    },
                }
            }
        }
        RuleSpec::ProvenanceChainIntact => {
            if kind != PayloadKind::Transfer {
                true
            } else {
                let from = r.payload.get("from").and_then(Scalar::as_str).unwrap_or("");
                r.objects
                    .iter()
                    .all(|o| state.owner(o).map(|w| w == from).unwrap_or(true))
            }
        }
        RuleSpec::Always => true,
        RuleSpec::VoteThreshold {
            property,
            threshold,
        } => {
            let tally = state.votes(property);
            let total = tally.yes + tally.no;
            total > 0 && tally.yes >= threshold.strictly_above(total)
        }
    };
    Ok(ok)
}

// ---------------------------------------------------------------------------
// Sequence validation
// ---------------------------------------------------------------------------

/// Outcome of one predicate on one record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredicateOutcome {
    pub predicate: String,
    pub ok: bool,
}

/// All predicate outcomes for one record.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordReport {
    pub index: u64,
    pub outcomes: Vec<PredicateOutcome>,
}

impl RecordReport {
    pub fn valid(&self) -> bool {
        self.outcomes.iter().all(|o| o.ok)
    }
}

/// Validation of a whole sequence under a set of predicates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceReport {
    pub records: Vec<RecordReport>,
}

impl SequenceReport {
    pub fn all_valid(&self) -> bool {
        self.records.iter().all(RecordReport::valid)
    }

    pub fn violations(&self) -> u64 {
        self.records
            .iter()
            .flat_map(|r| &r.outcomes)
            .filter(|o| !o.ok)
            .count() as u64
    }

    /// Indices of records that failed at least one predicate.
    pub fn invalid_indices(&self) -> Vec<u64> {
        self.records
            .iter()
            .filter(|r| !r.valid())
            .map(|r| r.index)
            .collect()
    }
}

pub(crate) fn oracle_for<'a>(
    decl: &PredicateDecl,
    oracles: &'a mut BTreeMap<String, OracleHandle>,
) -> Result<Option<&'a mut OracleHandle>, ValidationError> {
    match (decl.dependency, &decl.oracle) {
        (Dependency::External, Some(name)) => {
            let handle = oracles
                .get_mut(name)
                .ok_or_else(|| ValidationError::UnknownOracle {
                    predicate: decl.name.clone(),
                    name: name.clone(),
                })?;
            Ok(Some(handle))
        }
        (Dependency::External, None) => Err(ValidationError::MissingOracle {
            predicate: decl.name.clone(),
        }),
        (Dependency::Internal, _) => Ok(None),
    }
}

/// Evaluate every predicate against one candidate record on top of a prior
/// sequence. The record itself need not be part of the sequence yet.
pub fn validate_record(
    decls: &[PredicateDecl],
    world: &WorldModel,
    prior: &RecordSequence,
    record: &Record,
    oracles: &mut BTreeMap<String, OracleHandle>,
) -> Result<RecordReport, ValidationError> {
    let before = LedgerState::derive(world, prior);
    let mut after = before.clone();
    let mut stamped = record.clone();
    stamped.index = before.applied;
    after.apply(&stamped);
    // Record-scoped predicates first, then sequence-scoped, matching the
    // outcome order of [`validate_sequence`].
    let mut outcomes = Vec::with_capacity(decls.len());
    for scope in [Scope::Record, Scope::Sequence] {
        for decl in decls.iter().filter(|d| d.scope == scope) {
            decl.check()?;
            let state = match scope {
                Scope::Record => &before,
                Scope::Sequence => &after,
            };
            let oracle = oracle_for(decl, oracles)?;
            let ok = evaluate_predicate(decl, world, state, &stamped, oracle)?;
            outcomes.push(PredicateOutcome {
                predicate: decl.name.clone(),
                ok,
            });
        }
    }
    Ok(RecordReport {
        index: record.index,
        outcomes,
    })
}

/// Validate a whole sequence record by record, folding state once.
pub fn validate_sequence(
    decls: &[PredicateDecl],
    world: &WorldModel,
    seq: &RecordSequence,
    oracles: &mut BTreeMap<String, OracleHandle>,
) -> Result<SequenceReport, ValidationError> {
    for decl in decls {
        decl.check()?;
    }
    let mut state = LedgerState::initial(world);
    let mut records = Vec::with_capacity(seq.len());
    for r in seq {
        let mut outcomes = Vec::with_capacity(decls.len());
        for decl in decls.iter().filter(|d| d.scope == Scope::Record) {
            let oracle = oracle_for(decl, oracles)?;
            let ok = evaluate_predicate(decl, world, &state, r, oracle)?;
            outcomes.push(PredicateOutcome {
                predicate: decl.name.clone(),
                ok,
            });
        }
        state.apply(r);
        for decl in decls.iter().filter(|d| d.scope == Scope::Sequence) {
            let oracle = oracle_for(decl, oracles)?;
            let ok = evaluate_predicate(decl, world, &state, r, oracle)?;
            outcomes.push(PredicateOutcome {
                predicate: decl.name.clone(),
                ok,
            });
        }
        records.push(RecordReport {
            index: r.index,
            outcomes,
        });
    }
    Ok(SequenceReport { records })
}
