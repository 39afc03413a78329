//! Consensus engines and the property monitors that watch them.
//!
//! A run takes a network configuration plus a setup (maintainers, proposal
//! schedule, genesis, validation predicates) and simulates rounds of block
//! production under seeded randomness. Three properties are monitored
//! throughout:
//!
//! * **agreement** — honest maintainers' decided prefixes never conflict,
//!   pairwise and against their own earlier decisions;
//! * **validity** — every decided non-system record traces back to a
//!   scheduled proposal, matched by its (proposer, nonce) signature;
//! * **termination** — the decided prefix keeps growing while proposals are
//!   pending, and no still-valid proposal is left out at the end.
//!
//! The monitors measure; they never steer the engines. Verdicts come out as
//! counts and rounds in [`RunOutcome`], so a caller can decide what "safe"
//! means for its tolerance.

mod chain;
mod monitor;
mod permissioned;
mod permissionless;

pub use chain::{prefixes_agree, Block, BlockId, BlockStore, ChainView};
pub use monitor::{AgreementStats, TerminationStats, ValidityStats};

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ledger::{
    LedgerError, ObjectDescriptor, Party, PartyId, Record, RecordSequence, Role, Scalar,
};
use crate::validation::{Fraction, PredicateDecl, ValidationError, WorldModel};

/// Adversary scripts the engines understand.
pub const SCRIPT_WITHHOLDER: &str = "withholder";
pub const SCRIPT_EQUIVOCATOR: &str = "equivocator";
pub const SCRIPT_CENSOR: &str = "censor";

/// Seed every deterministic run starts from unless the caller picks another.
pub const DEFAULT_SEED: u64 = 0xD15EA5E;

/// Which consensus protocol maintains the ledger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EngineKind {
    /// Open membership, probabilistic block production, longest chain wins.
    PermissionlessChain,
    /// Closed membership, round-robin leaders, quorum votes, instant finality.
    PermissionedQuorum,
}

impl EngineKind {
    pub fn name(&self) -> &'static str {
        match self {
            EngineKind::PermissionlessChain => "permissionless-chain",
            EngineKind::PermissionedQuorum => "permissioned-quorum",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "permissionless-chain" | "permissionless" => Some(EngineKind::PermissionlessChain),
            "permissioned-quorum" | "permissioned" => Some(EngineKind::PermissionedQuorum),
            _ => None,
        }
    }

    /// Confirmation depth appropriate to the engine's finality model.
    pub fn default_confirmation_depth(&self) -> u64 {
        match self {
            EngineKind::PermissionlessChain => 6,
            EngineKind::PermissionedQuorum => 0,
        }
    }
}

impl std::fmt::Display for EngineKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// Errors from configuring or running a consensus simulation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConsensusError {
    #[error("bad network config: {0}")]
    BadConfig(String),
    #[error("bad run setup: {0}")]
    BadSetup(String),
    #[error("unknown adversary script `{0}`")]
    UnknownScript(String),
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
}

/// Parameters of one simulated network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetworkConfig {
    pub engine: EngineKind,
    /// Number of maintainers when the setup synthesizes them.
    pub maintainers: usize,
    /// Fraction of maintainers that run an adversary script; the count is
    /// the floor of `adversary_power * maintainers`, all powers equal.
    pub adversary_power: f64,
    /// Script assigned to synthesized adversarial maintainers.
    pub adversary_script: String,
    /// Records below the last `c` on a chain count as decided.
    pub confirmation_depth: u64,
    pub rounds: u64,
    pub seed: u64,
    /// Expected blocks produced per round across the whole network
    /// (permissionless only); each maintainer produces with this probability
    /// times its power share.
    pub block_probability: f64,
    /// Votes needed to decide, as a fraction of maintainers (permissioned
    /// only); a proposal commits at `ceil(fraction * n)` yes votes.
    pub quorum_fraction: Fraction,
    /// A round with pending proposals but no decided-prefix growth for this
    /// many consecutive rounds counts as a stall.
    pub stall_window: u64,
    /// Keep the per-round event log (byte-stable per seed). Disable for
    /// large parameter sweeps.
    pub record_log: bool,
}

impl NetworkConfig {
    pub fn new(engine: EngineKind) -> Self {
        NetworkConfig {
            engine,
            maintainers: 7,
            adversary_power: 0.0,
            adversary_script: SCRIPT_WITHHOLDER.to_string(),
            confirmation_depth: engine.default_confirmation_depth(),
            rounds: 1_000,
            seed: DEFAULT_SEED,
            block_probability: 0.3,
            quorum_fraction: Fraction::new(2, 3),
            stall_window: 50,
            record_log: true,
        }
    }

    pub fn check(&self) -> Result<(), ConsensusError> {
        let bad = |msg: &str| Err(ConsensusError::BadConfig(msg.to_string()));
        if self.maintainers == 0 {
            return bad("at least one maintainer is required");
        }
        if !(0.0..1.0).contains(&self.adversary_power) {
            return bad("adversary_power must be in [0, 1)");
        }
        if !(self.block_probability > 0.0 && self.block_probability <= 1.0) {
            return bad("block_probability must be in (0, 1]");
        }
        if self.quorum_fraction.num * 2 <= self.quorum_fraction.den {
            return bad("quorum_fraction must exceed 1/2");
        }
        if self.quorum_fraction.num > self.quorum_fraction.den {
            return bad("quorum_fraction must not exceed 1");
        }
        if self.rounds == 0 {
            return bad("rounds must be positive");
        }
        if self.stall_window == 0 {
            return bad("stall_window must be positive");
        }
        Ok(())
    }

    /// Number of synthesized adversarial maintainers.
    pub fn adversary_count(&self) -> usize {
        (self.adversary_power * self.maintainers as f64).floor() as usize
    }

    /// The event-log header pinned by the log format.
    pub fn log_header(&self) -> String {
        format!(
            "seed={} engine={} c={}",
            self.seed,
            self.engine.name(),
            self.confirmation_depth
        )
    }
}

/// A proposal waiting to be included: the record plus the round it becomes
/// visible to maintainers.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduledProposal {
    pub available_from: u64,
    pub record: Record,
}

/// Everything a run needs besides the network parameters.
#[derive(Debug, Clone, Default)]
pub struct RunSetup {
    /// Parties holding the maintainer role, honest or scripted.
    pub maintainers: Vec<Party>,
    /// Proposals ordered by availability.
    pub schedule: Vec<ScheduledProposal>,
    /// Predetermined objects, materialized as system records at chain head.
    pub genesis: Vec<ObjectDescriptor>,
    pub world: WorldModel,
    /// Internal record-scoped predicates honest maintainers apply when
    /// choosing what to include.
    pub decls: Vec<PredicateDecl>,
}

impl RunSetup {
    /// A synthetic setup: `n` equal maintainers (the last `adversary_count`
    /// running the configured script) and a uniform stream of transfer
    /// proposals among them, sized so the chain never runs dry.
    pub fn synthetic(config: &NetworkConfig) -> Result<RunSetup, ConsensusError> {
        let n = config.maintainers;
        let k = config.adversary_count();
        let mut maintainers = Vec::with_capacity(n);
        for i in 0..n {
            let id = PartyId::new((i + 1) as u64, format!("m{}", i + 1))
                .map_err(ConsensusError::Ledger)?;
            let mut party = Party::honest(id, [Role::Maintainer, Role::Participant]);
            if i >= n - k {
                party.honesty = crate::ledger::Honesty::Adversarial {
                    script: config.adversary_script.clone(),
                };
            }
            maintainers.push(party);
        }

        // Fill roughly 60% of the expected block capacity, available over
        // the first 80% of the run, so an honest network comfortably absorbs
        // the whole schedule well before the horizon.
        let target = ((config.rounds as f64 * config.block_probability * 0.6) as usize).max(8);
        let horizon = config.rounds * 4 / 5;
        let mut schedule = Vec::with_capacity(target);
        let mut world = WorldModel::default();
        for party in &maintainers {
            world.initial_balances.insert(
                ("balance".to_string(), party.party_id.label.clone()),
                1_000_000,
            );
        }
        for i in 0..target {
            let from = &maintainers[i % n].party_id;
            let to = &maintainers[(i + 1) % n].party_id;
            let payload = crate::ledger::Payload::new(
                crate::ledger::PayloadKind::Transfer,
                [
                    ("amount".to_string(), Scalar::Int(1)),
                    ("from".to_string(), Scalar::str(from.label.as_str())?),
                    ("to".to_string(), Scalar::str(to.label.as_str())?),
                ],
            )?;
            let record = crate::ledger::make_record(
                0,
                [from.clone(), to.clone()],
                [crate::ledger::ObjectId::sequential(1_000 + i as u64)],
                payload,
                from.clone(),
                i as u64,
            )?;
            schedule.push(ScheduledProposal {
                available_from: (i as u64 * horizon) / target as u64,
                record,
            });
        }
        Ok(RunSetup {
            maintainers,
            schedule,
            genesis: Vec::new(),
            world,
            decls: Vec::new(),
        })
    }

    fn check(&self, config: &NetworkConfig) -> Result<(), ConsensusError> {
        if self.maintainers.is_empty() {
            return Err(ConsensusError::BadSetup(
                "at least one maintainer is required".to_string(),
            ));
        }
        let mut seen = BTreeSet::new();
        for p in &self.maintainers {
            if !p.is_maintainer() {
                return Err(ConsensusError::BadSetup(format!(
                    "party {} lacks the maintainer role",
                    p.party_id.token()
                )));
            }
            if p.party_id.is_system() {
                return Err(ConsensusError::BadSetup(
                    "party id 0 is reserved for the system".to_string(),
                ));
            }
            if !seen.insert(p.party_id.id) {
                return Err(ConsensusError::BadSetup(format!(
                    "duplicate maintainer id {}",
                    p.party_id.id
                )));
            }
            if let crate::ledger::Honesty::Adversarial { script } = &p.honesty {
                if ![SCRIPT_WITHHOLDER, SCRIPT_EQUIVOCATOR, SCRIPT_CENSOR]
                    .contains(&script.as_str())
                {
                    return Err(ConsensusError::UnknownScript(script.clone()));
                }
            }
        }
        let mut sigs = BTreeSet::new();
        let mut prev = 0u64;
        for p in &self.schedule {
            if p.available_from < prev {
                return Err(ConsensusError::BadSetup(
                    "schedule must be sorted by availability".to_string(),
                ));
            }
            prev = p.available_from;
            if p.record.proposer.is_system() {
                return Err(ConsensusError::BadSetup(
                    "proposals cannot be system-proposed".to_string(),
                ));
            }
            if !sigs.insert(p.record.signature()) {
                return Err(ConsensusError::BadSetup(format!(
                    "duplicate proposal signature {:?}",
                    p.record.signature()
                )));
            }
        }
        for d in &self.decls {
            d.check()?;
            if d.dependency != crate::validation::Dependency::Internal
                || d.scope != crate::validation::Scope::Record
            {
                return Err(ConsensusError::BadSetup(format!(
                    "maintainers can only enforce internal record-scoped predicates; `{}` is not",
                    d.name
                )));
            }
        }
        config.check()
    }
}

/// Full result of one consensus run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub engine: EngineKind,
    pub seed: u64,
    pub confirmation_depth: u64,
    pub rounds_run: u64,
    pub maintainer_count: usize,
    pub adversary_count: usize,
    /// Decided prefix of the first honest maintainer at the end of the run.
    pub decided: RecordSequence,
    /// Final decided heights of every maintainer view, honest or not.
    pub decided_heights: Vec<Option<u64>>,
    pub blocks_produced: usize,
    pub agreement: AgreementStats,
    pub validity: ValidityStats,
    pub termination: TerminationStats,
    /// Event log: header line, then one line per event.
    pub log: Vec<String>,
}

impl RunOutcome {
    /// No honest maintainer ever disagreed with another or with itself.
    pub fn agreement_ok(&self) -> bool {
        self.agreement.total() == 0
    }

    /// Every decided record traces to a scheduled proposal.
    pub fn validity_ok(&self) -> bool {
        self.validity.violations == 0
    }

    /// Progress never stalled and nothing includable was left out.
    pub fn termination_ok(&self) -> bool {
        self.termination.stall_events == 0 && self.termination.unincluded_valid == 0
    }
}

/// Run one consensus simulation to completion.
pub fn run_consensus(config: &NetworkConfig, setup: &RunSetup) -> Result<RunOutcome, ConsensusError> {
    setup.check(config)?;
    match config.engine {
        EngineKind::PermissionlessChain => permissionless::run(config, setup),
        EngineKind::PermissionedQuorum => permissioned::run(config, setup),
    }
}

/// Decided prefix of a view under confirmation depth `c`: usable directly by
/// callers holding a finished run's store and views.
pub fn decided_prefix(store: &BlockStore, view: &ChainView, c: u64) -> RecordSequence {
    view.decided_prefix(store, c)
}

/// Do all views pairwise agree on decided prefixes at depth `c`?
pub fn check_agreement(views: &[ChainView], c: u64) -> bool {
    for (i, a) in views.iter().enumerate() {
        for b in views.iter().skip(i + 1) {
            if !prefixes_agree(a, b, c) {
                return false;
            }
        }
    }
    true
}

/// Signatures of decided records that do not trace back to the schedule.
/// System records (genesis, hook output) are part of the protocol, not of
/// any proposal, and are exempt.
pub fn check_validity(decided: &RecordSequence, schedule: &[ScheduledProposal]) -> Vec<(u64, u64)> {
    let known: BTreeSet<(u64, u64)> = schedule.iter().map(|p| p.record.signature()).collect();
    decided
        .iter()
        .filter(|r| !r.proposer.is_system())
        .map(Record::signature)
        .filter(|sig| !known.contains(sig))
        .collect()
}

#[cfg(test)]
mod tests;
