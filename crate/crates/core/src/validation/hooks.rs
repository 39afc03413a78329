//! Contract hooks: protocol-level reactions that append records when a
//! trigger predicate fires.
//!
//! Hooks model "consensus does it" behavior — minting a reward object,
//! executing an agreed payout — as opposed to records proposed by parties.
//! Hook-emitted records are proposed by the system party, carry a `hook`
//! attribute naming their origin, and never themselves trigger hooks, which
//! rules out self-amplifying loops by construction.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ledger::{
    make_record, ObjectId, PartyId, PayloadKind, Payload, Record, RecordSequence, Scalar, Wide256,
};
use crate::rng::{mix_label, mix_words};

use super::{
    evaluate_predicate, oracle_for, LedgerState, OracleHandle, PredicateDecl, Scope,
    ValidationError, WorldModel,
};

/// System-proposed record nonces: genesis records use the low space, hook
/// records start here, so the two never collide.
const HOOK_NONCE_BASE: u64 = 1 << 32;

/// What a hook does when its trigger fires.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum HookAction {
    /// Append a create record for a fresh object.
    CreateObject {
        /// Bit width for a seeded random id; sequential numbering if absent.
        id_width: Option<u16>,
        /// Attributes stamped onto the new object.
        attributes: BTreeMap<String, Scalar>,
        /// Set the new object's owner to the triggering record's proposer.
        owner_from_proposer: bool,
    },
    /// Append a record built from a literal payload template.
    AppendRecord {
        kind: PayloadKind,
        attributes: BTreeMap<String, Scalar>,
    },
}

/// A named hook: fires its action whenever the trigger predicate holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractHook {
    pub name: String,
    /// Name of the predicate that triggers the action. Record-scoped
    /// triggers fire on every record that the predicate's rule constrains
    /// and approves (vacuous passes on unrelated record kinds do not fire);
    /// sequence-scoped triggers fire on the false-to-true transition.
    pub trigger: String,
    pub action: HookAction,
}

/// One hook firing, for audit trails.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HookFiring {
    pub hook: String,
    /// Output index of the record that triggered the firing.
    pub trigger_index: u64,
    /// Output index of the emitted record.
    pub emitted_index: u64,
}

/// Incremental hook executor: feed records one at a time; hook records are
/// interleaved right after their trigger and all indices re-stamped onto the
/// output sequence.
#[derive(Debug, Clone)]
pub struct HookEngine {
    hooks: Vec<ContractHook>,
    decls: Vec<PredicateDecl>,
    world: WorldModel,
    run_seed: u64,
    state: LedgerState,
    out: RecordSequence,
    /// Previous trigger value per sequence-scoped hook, for edge detection.
    armed: BTreeMap<String, bool>,
    /// Next unused sequential object value, tracked across all records seen.
    next_seq: u64,
    firings: Vec<HookFiring>,
}

impl HookEngine {
    pub fn new(
        hooks: Vec<ContractHook>,
        decls: Vec<PredicateDecl>,
        world: WorldModel,
        run_seed: u64,
    ) -> Result<Self, ValidationError> {
        for decl in &decls {
            decl.check()?;
        }
        for hook in &hooks {
            if !decls.iter().any(|d| d.name == hook.trigger) {
                return Err(ValidationError::UnknownPredicate {
                    hook: hook.name.clone(),
                    name: hook.trigger.clone(),
                });
            }
        }
        let state = LedgerState::initial(&world);
        Ok(HookEngine {
            hooks,
            decls,
            world,
            run_seed,
            state,
            out: RecordSequence::new(),
            armed: BTreeMap::new(),
            next_seq: 0,
            firings: Vec::new(),
        })
    }

    pub fn sequence(&self) -> &RecordSequence {
        &self.out
    }

    pub fn state(&self) -> &LedgerState {
        &self.state
    }

    pub fn firings(&self) -> &[HookFiring] {
        &self.firings
    }

    pub fn finish(self) -> (RecordSequence, Vec<HookFiring>) {
        (self.out, self.firings)
    }

    fn note_objects(&mut self, r: &Record) {
        for obj in &r.objects {
            if let (crate::ledger::IdScheme::Sequential, Some(v)) = (obj.scheme, obj.value.as_u64())
            {
                self.next_seq = self.next_seq.max(v + 1);
            }
        }
    }

    fn push(&mut self, record: Record) -> Result<u64, ValidationError> {
        let index = self.out.len() as u64;
        let stamped = record.at_index(index);
        self.note_objects(&stamped);
        self.out.push(stamped.clone())?;
        self.state.apply(&stamped);
        Ok(index)
    }

    /// Whether a record was emitted by a hook (and so must not trigger any).
    fn is_hook_record(r: &Record) -> bool {
        r.payload.attributes.contains_key("hook")
    }

    fn decl(&self, name: &str) -> &PredicateDecl {
        self.decls
            .iter()
            .find(|d| d.name == name)
            .expect("trigger checked at construction")
    }

    /// Feed one record. Returns the records emitted by hooks in response.
    pub fn ingest(
        &mut self,
        record: &Record,
        oracles: &mut BTreeMap<String, OracleHandle>,
    ) -> Result<Vec<Record>, ValidationError> {
        // Decide record-scoped triggers against the state before the record.
        // Protocol records — genesis and hook output — never trigger hooks.
        let mut fired: Vec<String> = Vec::new();
        let evaluate_triggers = !Self::is_hook_record(record) && !record.proposer.is_system();
        if evaluate_triggers {
            for hook in &self.hooks {
                let decl = self.decls.iter().find(|d| d.name == hook.trigger).unwrap();
                // Fire only on records the trigger rule genuinely constrains;
                // a kind-restricted rule passes other kinds vacuously, and a
                // vacuous pass must not release the action.
                if decl.scope != Scope::Record || !decl.rule.constrains(record.payload.kind) {
                    continue;
                }
                let oracle = oracle_for(decl, oracles)?;
                if evaluate_predicate(decl, &self.world, &self.state, record, oracle)? {
                    fired.push(hook.name.clone());
                }
            }
        }

        let trigger_index = self.push(record.clone())?;

        // Sequence-scoped triggers see the state including the new record
        // and fire on the transition to true.
        if evaluate_triggers {
            let hooks = self.hooks.clone();
            for hook in &hooks {
                let decl = self.decl(&hook.trigger).clone();
                if decl.scope != Scope::Sequence {
                    continue;
                }
                let oracle = oracle_for(&decl, oracles)?;
                let now = evaluate_predicate(&decl, &self.world, &self.state, record, oracle)?;
                let was = self.armed.insert(hook.name.clone(), now).unwrap_or(false);
                if now && !was {
                    fired.push(hook.name.clone());
                }
            }
        }

        let mut emitted = Vec::new();
        let hooks = self.hooks.clone();
        for name in fired {
            let hook = hooks.iter().find(|h| h.name == name).unwrap();
            let rec = self.synthesize(hook, record)?;
            let emitted_index = self.push(rec.clone())?;
            self.firings.push(HookFiring {
                hook: hook.name.clone(),
                trigger_index,
                emitted_index,
            });
            emitted.push(self.out.get(emitted_index).unwrap().clone());
        }
        Ok(emitted)
    }

    /// Build the record a hook emits in response to `trigger_record`.
    fn synthesize(
        &mut self,
        hook: &ContractHook,
        trigger_record: &Record,
    ) -> Result<Record, ValidationError> {
        let ordinal = self.firings.len() as u64;
        let nonce = HOOK_NONCE_BASE + ordinal;
        let hook_tag = (
            "hook".to_string(),
            Scalar::str(hook.name.as_str()).map_err(ValidationError::Ledger)?,
        );
        match &hook.action {
            HookAction::CreateObject {
                id_width,
                attributes,
                owner_from_proposer,
            } => {
                let object_id = match id_width {
                    None => {
                        let id = ObjectId::sequential(self.next_seq);
                        self.next_seq += 1;
                        id
                    }
                    Some(width) => {
                        let stream = mix_label(mix_label(self.run_seed, "hook-object"), &hook.name);
                        let limbs =
                            [0u64, 1, 2, 3].map(|i| mix_words(&[stream, ordinal, i]));
                        ObjectId {
                            scheme: crate::ledger::IdScheme::RandomBits { width: *width },
                            value: Wide256(limbs).masked(*width),
                        }
                    }
                };
                let mut attrs = attributes.clone();
                attrs.insert(
                    "object_id".to_string(),
                    Scalar::str(object_id.token()).map_err(ValidationError::Ledger)?,
                );
                if *owner_from_proposer && !trigger_record.proposer.is_system() {
                    attrs.insert(
                        "owner".to_string(),
                        Scalar::str(trigger_record.proposer.label.as_str())
                            .map_err(ValidationError::Ledger)?,
                    );
                }
                attrs.insert(hook_tag.0, hook_tag.1);
                let payload = Payload::new(PayloadKind::Create, attrs)?;
                let parties: Vec<PartyId> = if trigger_record.proposer.is_system() {
                    Vec::new()
                } else {
                    vec![trigger_record.proposer.clone()]
                };
                Ok(make_record(
                    0, // re-stamped on push
                    parties,
                    [object_id],
                    payload,
                    PartyId::system(),
                    nonce,
                )?)
            }
            HookAction::AppendRecord { kind, attributes } => {
                let mut attrs = attributes.clone();
                attrs.insert(hook_tag.0, hook_tag.1);
                let payload = Payload::new(*kind, attrs)?;
                Ok(make_record(
                    0,
                    trigger_record.parties.iter().cloned(),
                    trigger_record.objects.iter().copied(),
                    payload,
                    PartyId::system(),
                    nonce,
                )?)
            }
        }
    }
}

/// Run hooks over a whole sequence at once: the batch form of [`HookEngine`].
pub fn fire_contract_hooks(
    hooks: &[ContractHook],
    decls: &[PredicateDecl],
    world: &WorldModel,
    seq: &RecordSequence,
    oracles: &mut BTreeMap<String, OracleHandle>,
    run_seed: u64,
) -> Result<(RecordSequence, Vec<HookFiring>), ValidationError> {
    let mut engine = HookEngine::new(hooks.to_vec(), decls.to_vec(), world.clone(), run_seed)?;
    for r in seq {
        engine.ingest(r, oracles)?;
    }
    Ok(engine.finish())
}

/// Convenience: does this record carry the hook-origin marker?
pub fn is_hook_emitted(r: &Record) -> bool {
    HookEngine::is_hook_record(r)
}
