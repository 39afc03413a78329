//! Ledger state derived by folding a record sequence in index order.
//!
//! The fold is validity-agnostic: every record is applied, whether or not a
//! validation rule would accept it. Rules compare a record against the state
//! *before* it (record scope) or the state *after* it (sequence scope), so
//! the fold itself never filters.

use std::collections::{BTreeMap, BTreeSet};

use crate::ledger::{ObjectId, PayloadKind, Record, RecordSequence, Scalar};

use super::WorldModel;

/// Everything known about one object from the ledger prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ObjectState {
    /// Index of the record that created it.
    pub created_at: u64,
    /// Numeric id of the creating proposer (0 = system/genesis).
    pub creator: u64,
    /// Whether the creating record was emitted by a contract hook.
    pub hook_created: bool,
    /// Attributes from the creating payload, updated by later asserts that
    /// name this object.
    pub attributes: BTreeMap<String, Scalar>,
    /// Current holder's label, if any.
    pub owner: Option<String>,
}

/// Accumulated per-property vote tallies from assert records.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VoteTally {
    pub yes: u64,
    pub no: u64,
}

/// Materialized state after some prefix of records.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LedgerState {
    /// Number of records folded in.
    pub applied: u64,
    pub objects: BTreeMap<ObjectId, ObjectState>,
    /// Account balances keyed by (property, party label).
    pub balances: BTreeMap<(String, String), i64>,
    /// (spender label, object) pairs consumed by transfers.
    pub spent: BTreeSet<(String, ObjectId)>,
    /// Objects that have been claimed at least once.
    pub claimed: BTreeSet<ObjectId>,
    /// Latest asserted value per property, with the asserting record index.
    pub asserts: BTreeMap<String, (u64, Scalar)>,
    /// Boolean-assert tallies per property, for threshold votes.
    pub votes: BTreeMap<String, VoteTally>,
}

impl LedgerState {
    /// State before any record: only the world's starting balances.
    /// Genesis objects enter through their genesis records, never here.
    pub fn initial(world: &WorldModel) -> LedgerState {
        LedgerState {
            balances: world.initial_balances.clone(),
            ..LedgerState::default()
        }
    }

    /// Fold an entire sequence.
    pub fn derive(world: &WorldModel, seq: &RecordSequence) -> LedgerState {
        let mut state = LedgerState::initial(world);
        for r in seq {
            state.apply(r);
        }
        state
    }

    pub fn balance(&self, property: &str, label: &str) -> i64 {
        self.balances
            .get(&(property.to_string(), label.to_string()))
            .copied()
            .unwrap_or(0)
    }

    pub fn object(&self, id: &ObjectId) -> Option<&ObjectState> {
        self.objects.get(id)
    }

    pub fn owner(&self, id: &ObjectId) -> Option<&str> {
        self.objects.get(id).and_then(|o| o.owner.as_deref())
    }

    pub fn votes(&self, property: &str) -> VoteTally {
        self.votes.get(property).copied().unwrap_or_default()
    }

    fn credit(&mut self, property: &str, label: &str, delta: i64) {
        *self
            .balances
            .entry((property.to_string(), label.to_string()))
            .or_insert(0) += delta;
    }

    /// Apply one record. Records must be applied in index order.
    pub fn apply(&mut self, r: &Record) {
        debug_assert_eq!(r.index, self.applied, "records must be folded in order");
        match r.payload.kind {
            PayloadKind::Create => {
                if let Some(id) = r.payload.subject_object() {
                    let mut attributes = r.payload.attributes.clone();
                    attributes.remove("object_id");
                    let owner = attributes
                        .get("owner")
                        .and_then(Scalar::as_str)
                        .map(str::to_string)
                        .or_else(|| (!r.proposer.is_system()).then(|| r.proposer.label.clone()));
                    let hook_created = attributes
                        .get("hook")
                        .and_then(Scalar::as_str)
                        .is_some();
                    // First creation wins; a duplicate create is recorded by
                    // the sequence but does not overwrite the object.
                    self.objects.entry(id).or_insert(ObjectState {
                        created_at: r.index,
                        creator: r.proposer.id,
                        hook_created,
                        attributes,
                        owner,
                    });
                }
            }
            PayloadKind::Transfer => {
                let amount = r.payload.get("amount").and_then(Scalar::as_int).unwrap_or(0);
                let property = r
                    .payload
                    .get("property")
                    .and_then(Scalar::as_str)
                    .unwrap_or("balance")
                    .to_string();
                let from = r.payload.get("from").and_then(Scalar::as_str).unwrap_or("");
                let to = r.payload.get("to").and_then(Scalar::as_str).unwrap_or("");
                self.credit(&property, from, -amount);
                self.credit(&property, to, amount);
                for obj in &r.objects {
                    self.spent.insert((from.to_string(), *obj));
                    if let Some(o) = self.objects.get_mut(obj) {
                        o.owner = Some(to.to_string());
                    }
                }
            }
            PayloadKind::Claim => {
                let claimant = r
                    .payload
                    .get("claimant")
                    .and_then(Scalar::as_str)
                    .unwrap_or("")
                    .to_string();
                for obj in &r.objects {
                    // First claim wins ownership of an unowned object.
                    if let Some(o) = self.objects.get_mut(obj) {
                        if o.owner.is_none() && !self.claimed.contains(obj) {
                            o.owner = Some(claimant.clone());
                        }
                    }
                    self.claimed.insert(*obj);
                    self.spent.insert((claimant.clone(), *obj));
                }
            }
            PayloadKind::Assert => {
                if let (Some(property), Some(value)) = (
                    r.payload.get("property").and_then(Scalar::as_str),
                    r.payload.get("value"),
                ) {
                    self.asserts
                        .insert(property.to_string(), (r.index, value.clone()));
                    if let Some(flag) = value.as_bool() {
                        let tally = self.votes.entry(property.to_string()).or_default();
                        if flag {
                            tally.yes += 1;
                        } else {
                            tally.no += 1;
                        }
                    }
                    // Asserts that name objects update those objects' view
                    // of the property.
                    for obj in &r.objects {
                        if let Some(o) = self.objects.get_mut(obj) {
                            o.attributes.insert(property.to_string(), value.clone());
                        }
                    }
                }
            }
            PayloadKind::ContractInvoke => {
                // Invocations carry no direct state effect; contract hooks
                // react to them when so configured.
            }
        }
        self.applied += 1;
    }
}
