//! Longest-chain engine with open membership.
//!
//! Each round, every maintainer produces a block with probability equal to
//! the network rate times its power share, extending its current tip with
//! the first includable proposal it knows. Blocks propagate with one round
//! of delay; maintainers adopt the longest known chain, breaking height
//! ties toward the lowest block digest. Forks therefore arise naturally
//! from simultaneous production and heal one round later — unless an
//! adversary script works to keep them alive.
//!
//! Scripts:
//! * `withholder` — a colluding cartel mines a private fork seeded with
//!   fabricated records and releases it the moment it overtakes the public
//!   chain, half the network at a time, forcing reorganizations;
//! * `equivocator` — produces two blocks at the same height and shows each
//!   to half the network;
//! * `censor` — mines honestly but never includes a victim's proposals.

use std::collections::{BTreeSet, VecDeque};
use std::sync::Arc;

use crate::ledger::{genesis_records, Honesty, Payload, PayloadKind, PartyId, Record, Scalar};
use crate::rng::{mix_label, mix_words, unit};
use crate::validation::{evaluate_predicate, LedgerState, PredicateDecl, WorldModel};

use super::chain::{Block, BlockId, BlockStore, ChainView};
use super::monitor::{AgreementMonitor, RunLog, TerminationMonitor, ValidityMonitor};
use super::{
    ConsensusError, NetworkConfig, RunOutcome, RunSetup, ScheduledProposal, SCRIPT_CENSOR,
    SCRIPT_EQUIVOCATOR, SCRIPT_WITHHOLDER,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Script {
    Honest,
    Withholder,
    Equivocator,
    Censor,
}

impl Script {
    fn of(honesty: &Honesty) -> Result<Script, ConsensusError> {
        match honesty {
            Honesty::Honest => Ok(Script::Honest),
            Honesty::Adversarial { script } => match script.as_str() {
                SCRIPT_WITHHOLDER => Ok(Script::Withholder),
                SCRIPT_EQUIVOCATOR => Ok(Script::Equivocator),
                SCRIPT_CENSOR => Ok(Script::Censor),
                other => Err(ConsensusError::UnknownScript(other.to_string())),
            },
        }
    }
}

/// Per-view bookkeeping beyond the chain itself: which proposal signatures
/// the chain already carries (by height, for cheap reorg updates), the
/// validation state at the tip when inclusion predicates are in force, and
/// a cursor over the schedule so proposal scans skip the already-included
/// prefix instead of re-probing it every round.
pub(super) struct Tracker {
    pub(super) sig_chain: Vec<(u64, u64)>,
    pub(super) sig_set: BTreeSet<(u64, u64)>,
    pub(super) state: Option<LedgerState>,
    /// Schedule position of each proposal signature, shared across views.
    sched_index: Arc<BTreeMap<(u64, u64), usize>>,
    /// Everything in `schedule[..sched_cursor]` is on this view's chain.
    /// Advances as the included prefix grows; retreats on reorganizations.
    sched_cursor: usize,
}

impl Tracker {
    pub(super) fn new(
        sched_index: Arc<BTreeMap<(u64, u64), usize>>,
        track_state: bool,
        world: &WorldModel,
    ) -> Self {
        Tracker {
            sig_chain: Vec::new(),
            sig_set: BTreeSet::new(),
            state: track_state.then(|| LedgerState::initial(world)),
            sched_index,
            sched_cursor: 0,
        }
    }

    /// Positions of the schedule's proposals, for sharing among trackers.
    pub(super) fn index_schedule(
        schedule: &[ScheduledProposal],
    ) -> Arc<BTreeMap<(u64, u64), usize>> {
        Arc::new(
            schedule
                .iter()
                .enumerate()
                .map(|(i, p)| (p.record.signature(), i))
                .collect(),
        )
    }

    /// Re-sync after the view adopted a new tip forking at `fork_height`.
    pub(super) fn sync(&mut self, view: &ChainView, store: &BlockStore, fork_height: u64, world: &WorldModel) {
        while self.sig_chain.len() as u64 > fork_height {
            let sig = self.sig_chain.pop().expect("non-empty");
            self.sig_set.remove(&sig);
            if self.sched_cursor > 0 {
                if let Some(&idx) = self.sched_index.get(&sig) {
                    if idx < self.sched_cursor {
                        self.sched_cursor = idx;
                    }
                }
            }
        }
        for h in self.sig_chain.len()..view.len() {
            let sig = store.get(view.at_height(h as u64).unwrap()).record.signature();
            self.sig_chain.push(sig);
            self.sig_set.insert(sig);
        }
        if let Some(state) = &mut self.state {
            if fork_height < state.applied {
                // Reorganization below the applied prefix: refold.
                let mut fresh = LedgerState::initial(world);
                for h in 0..view.len() as u64 {
                    let rec = store.get(view.at_height(h).unwrap()).record.at_index(h);
                    fresh.apply(&rec);
                }
                *state = fresh;
            } else {
                for h in state.applied..view.len() as u64 {
                    let rec = store.get(view.at_height(h).unwrap()).record.at_index(h);
                    state.apply(&rec);
                }
            }
        }
    }
}

/// Is candidate `b` better than the view's current tip under longest-chain
/// with lowest-digest tie-break?
pub(super) fn better(store: &BlockStore, view: &ChainView, b: BlockId) -> bool {
    match view.tip() {
        None => true,
        Some(t) => {
            if t == b {
                return false;
            }
            let (bh, bd) = {
                let blk = store.get(b);
                (blk.height, blk.digest)
            };
            let (th, td) = {
                let blk = store.get(t);
                (blk.height, blk.digest)
            };
            bh > th || (bh == th && bd < td)
        }
    }
}

pub(super) fn adopt(
    view: &mut ChainView,
    tracker: &mut Tracker,
    store: &BlockStore,
    tip: BlockId,
    world: &WorldModel,
) -> bool {
    match view.adopt(store, tip) {
        Some(fork) => {
            tracker.sync(view, store, fork, world);
            true
        }
        None => false,
    }
}

/// First includable proposal for a producer: available, not already on its
/// chain, not in the producer's own skip set, passing its inclusion
/// predicates, not censored.
pub(super) fn pick_proposal<'a>(
    schedule: &'a [ScheduledProposal],
    round: u64,
    tracker: &Tracker,
    decls: &[PredicateDecl],
    world: &WorldModel,
    censor_victim: Option<u64>,
    skip: &BTreeSet<(u64, u64)>,
) -> Option<&'a Record> {
    for p in schedule {
        if p.available_from > round {
            break; // schedule is sorted by availability
        }
        let r = &p.record;
        if tracker.sig_set.contains(&r.signature()) || skip.contains(&r.signature()) {
            continue;
        }
        if let Some(victim) = censor_victim {
            if r.proposer.id == victim || r.parties.iter().any(|q| q.id == victim) {
                continue;
            }
        }
        if !decls.is_empty() {
            let state = tracker.state.as_ref().expect("state tracked when decls set");
            let stamped = r.at_index(state.applied);
            let ok = decls.iter().all(|d| {
                evaluate_predicate(d, world, state, &stamped, None).unwrap_or(false)
            });
            if !ok {
                continue;
            }
        }
        return Some(r);
    }
    None
}

/// The withholding cartel's shared state.
struct Cartel {
    members: Vec<usize>,
    private_tip: Option<BlockId>,
    best_public: Option<BlockId>,
    fabricated: u64,
}

/// Nonce space for fabricated (never-proposed) records, disjoint from any
/// schedule the setup check would accept.
const FABRICATED_NONCE_BASE: u64 = 1 << 40;

pub(super) fn run(config: &NetworkConfig, setup: &RunSetup) -> Result<RunOutcome, ConsensusError> {
    let n = setup.maintainers.len();
    let ids: Vec<PartyId> = setup.maintainers.iter().map(|p| p.party_id.clone()).collect();
    let scripts: Vec<Script> = setup
        .maintainers
        .iter()
        .map(|p| Script::of(&p.honesty))
        .collect::<Result<_, _>>()?;
    let honest: Vec<usize> = (0..n).filter(|&i| scripts[i] == Script::Honest).collect();
    if honest.is_empty() {
        return Err(ConsensusError::BadSetup(
            "at least one honest maintainer is required".to_string(),
        ));
    }
    let lead = honest[0];
    let c = config.confirmation_depth;
    let world = &setup.world;
    let track_state = !setup.decls.is_empty();

    let prod_stream = mix_label(config.seed, "production");
    let digest_stream = mix_label(config.seed, "block-digest");
    let per_maintainer_prob = config.block_probability / n as f64;

    // Censor victims target the most frequent proposer outside the cartel of
    // censors themselves; with no schedule there is nobody to censor.
    let censor_victim: Option<u64> = {
        let censors: BTreeSet<u64> = (0..n)
            .filter(|&i| scripts[i] == Script::Censor)
            .map(|i| ids[i].id)
            .collect();
        setup
            .schedule
            .iter()
            .map(|p| p.record.proposer.id)
            .filter(|id| !censors.contains(id))
            .min()
    };

    // Genesis: one block per predetermined object, shared by every view.
    let mut store = BlockStore::new();
    let mut genesis_chain = Vec::new();
    for rec in genesis_records(&setup.genesis) {
        let parent = genesis_chain.last().copied();
        let id = produce_block(&mut store, digest_stream, parent, rec, 0, 0, 0);
        genesis_chain.push(id);
    }

    let mut views: Vec<ChainView> = (0..n)
        .map(|_| ChainView::rooted(genesis_chain.clone()))
        .collect();
    let mut trackers: Vec<Tracker> = (0..n).map(|_| Tracker::new(track_state, world)).collect();
    for (view, tracker) in views.iter_mut().zip(trackers.iter_mut()) {
        tracker.sync(view, &store, 0, world);
    }
    let mut inboxes: Vec<VecDeque<(u64, BlockId)>> = vec![VecDeque::new(); n];

    let mut cartel = {
        let members: Vec<usize> = (0..n).filter(|&i| scripts[i] == Script::Withholder).collect();
        (!members.is_empty()).then(|| Cartel {
            members,
            private_tip: None,
            best_public: genesis_chain.last().copied(),
            fabricated: 0,
        })
    };

    let mut log = RunLog::new(config.log_header(), config.record_log);
    let mut agreement = AgreementMonitor::new(c, honest.clone());
    let mut validity = ValidityMonitor::new(&setup.schedule, honest.clone(), c);
    let mut termination =
        TerminationMonitor::new(&setup.schedule, honest.clone(), c, config.stall_window);
    let mut prev_lead_decided: Option<u64> = None;
    let no_skip: BTreeSet<(u64, u64)> = BTreeSet::new();

    for round in 0..config.rounds {
        let mut changed = vec![false; n];

        // --- Delivery: consume everything due this round. -----------------
        for i in 0..n {
            let is_cartel_member = cartel
                .as_ref()
                .map(|ca| ca.members.contains(&i))
                .unwrap_or(false);
            while inboxes[i].front().map(|(due, _)| *due <= round).unwrap_or(false) {
                let (_, tip) = inboxes[i].pop_front().unwrap();
                if is_cartel_member {
                    // Cartel members track public knowledge; their working
                    // view follows the private fork.
                    let ca = cartel.as_mut().unwrap();
                    let best = ca.best_public;
                    let replace = match best {
                        None => true,
                        Some(b) => {
                            let cur = store.get(b);
                            let new = store.get(tip);
                            new.height > cur.height
                                || (new.height == cur.height && new.digest < cur.digest)
                        }
                    };
                    if replace {
                        ca.best_public = Some(tip);
                    }
                } else if better(&store, &views[i], tip)
                    && adopt(&mut views[i], &mut trackers[i], &store, tip, world)
                {
                    changed[i] = true;
                    let blk = store.get(tip);
                    log.push(
                        round,
                        &ids[i],
                        "adopt",
                        format_args!("height={} digest={:016x}", blk.height, blk.digest),
                    );
                }
            }
        }

        // --- Cartel abandonment: the public chain got ahead. ---------------
        if let Some(ca) = cartel.as_mut() {
            if let (Some(private), Some(public)) = (ca.private_tip, ca.best_public) {
                if store.get(public).height > store.get(private).height {
                    ca.private_tip = None;
                }
            }
            if ca.private_tip.is_none() {
                if let Some(public) = ca.best_public {
                    for &m in &ca.members.clone() {
                        if adopt(&mut views[m], &mut trackers[m], &store, public, world) {
                            changed[m] = true;
                        }
                    }
                }
            }
        }

        // --- Production. ----------------------------------------------------
        for i in 0..n {
            let draw = unit(mix_words(&[prod_stream, round, ids[i].id]));
            if draw >= per_maintainer_prob {
                continue;
            }
            match scripts[i] {
                Script::Honest | Script::Censor => {
                    let victim = (scripts[i] == Script::Censor)
                        .then_some(censor_victim)
                        .flatten();
                    let Some(record) = pick_proposal(
                        &setup.schedule,
                        round,
                        &trackers[i],
                        &setup.decls,
                        world,
                        victim,
                        &no_skip,
                    ) else {
                        continue;
                    };
                    let record = record.clone();
                    let parent = views[i].tip();
                    let id = produce_block(
                        &mut store,
                        digest_stream,
                        parent,
                        record,
                        ids[i].id,
                        round,
                        0,
                    );
                    adopt(&mut views[i], &mut trackers[i], &store, id, world);
                    changed[i] = true;
                    let blk = store.get(id);
                    log.push(
                        round,
                        &ids[i],
                        "produce",
                        format_args!(
                            "height={} digest={:016x} sig={}:{}",
                            blk.height,
                            blk.digest,
                            blk.record.proposer.id,
                            blk.record.nonce
                        ),
                    );
                    broadcast(&mut inboxes, i, round + 1, id);
                }
                Script::Equivocator => {
                    let Some(record) = pick_proposal(
                        &setup.schedule,
                        round,
                        &trackers[i],
                        &setup.decls,
                        world,
                        None,
                        &no_skip,
                    ) else {
                        continue;
                    };
                    let record = record.clone();
                    let parent = views[i].tip();
                    let a = produce_block(
                        &mut store,
                        digest_stream,
                        parent,
                        record.clone(),
                        ids[i].id,
                        round,
                        1,
                    );
                    let b = produce_block(
                        &mut store,
                        digest_stream,
                        parent,
                        record,
                        ids[i].id,
                        round,
                        2,
                    );
                    adopt(&mut views[i], &mut trackers[i], &store, a, world);
                    changed[i] = true;
                    for (variant, id) in [("a", a), ("b", b)] {
                        let blk = store.get(id);
                        log.push(
                            round,
                            &ids[i],
                            "produce",
                            format_args!(
                                "height={} digest={:016x} variant={variant}",
                                blk.height, blk.digest
                            ),
                        );
                    }
                    // Even indices learn one variant, odd the other.
                    for j in 0..n {
                        if j == i {
                            continue;
                        }
                        let id = if j % 2 == 0 { a } else { b };
                        inboxes[j].push_back((round + 1, id));
                    }
                }
                Script::Withholder => {
                    let ca = cartel.as_mut().expect("withholder implies cartel");
                    let parent = ca.private_tip.or(ca.best_public);
                    let ordinal = ca.fabricated;
                    ca.fabricated += 1;
                    let payload = Payload::new(
                        PayloadKind::Assert,
                        [
                            ("property".to_string(), Scalar::str("shadow")?),
                            ("value".to_string(), Scalar::Int(ordinal as i64)),
                        ],
                    )?;
                    let record = crate::ledger::make_record(
                        0,
                        [ids[i].clone()],
                        [],
                        payload,
                        ids[i].clone(),
                        FABRICATED_NONCE_BASE + ordinal,
                    )?;
                    let id = produce_block(
                        &mut store,
                        digest_stream,
                        parent,
                        record,
                        ids[i].id,
                        round,
                        0,
                    );
                    ca.private_tip = Some(id);
                    let blk_height = store.get(id).height;
                    log.push(
                        round,
                        &ids[i],
                        "produce",
                        format_args!("height={blk_height} withheld=true"),
                    );
                    // The whole cartel works on the private tip.
                    for &m in &ca.members.clone() {
                        if adopt(&mut views[m], &mut trackers[m], &store, id, world) {
                            changed[m] = true;
                        }
                    }
                    // Release the moment the private fork is strictly longer.
                    let public_height = ca
                        .best_public
                        .map(|b| store.get(b).height as i64)
                        .unwrap_or(-1);
                    if blk_height as i64 > public_height {
                        let ca_members = ca.members.clone();
                        ca.best_public = Some(id);
                        log.push(
                            round,
                            &ids[i],
                            "release",
                            format_args!("height={blk_height} digest={:016x}", store.get(id).digest),
                        );
                        for j in 0..n {
                            if ca_members.contains(&j) {
                                continue;
                            }
                            // Staggered delivery: half now, half a round later.
                            let due = if j % 2 == 0 { round + 1 } else { round + 2 };
                            inboxes[j].push_back((due, id));
                        }
                    }
                }
            }
        }

        // --- Monitoring. ----------------------------------------------------
        agreement.on_round(round, &views, &changed, &mut log, &ids);
        validity.on_round(round, &store, &views, &changed, &mut log);
        let pending = pick_proposal(
            &setup.schedule,
            round,
            &trackers[lead],
            &setup.decls,
            world,
            None,
            &no_skip,
        )
        .is_some();
        termination.on_round(round, &store, &views, pending, &mut log);
        let lead_decided = views[lead].decided_height(c);
        if lead_decided > prev_lead_decided {
            if let Some(h) = lead_decided {
                log.push(round, &ids[lead], "decide", format_args!("height={h}"));
            }
            prev_lead_decided = lead_decided;
        }
    }

    finalize(
        config,
        setup,
        store,
        views,
        lead,
        agreement,
        validity,
        termination,
        log,
        genesis_chain.len(),
    )
}

pub(super) fn produce_block(
    store: &mut BlockStore,
    digest_stream: u64,
    parent: Option<BlockId>,
    record: Record,
    producer: u64,
    round: u64,
    salt: u64,
) -> BlockId {
    let parent_digest = parent.map(|p| store.get(p).digest).unwrap_or(0);
    let height = parent.map(|p| store.get(p).height + 1).unwrap_or(0);
    let digest = mix_words(&[
        digest_stream,
        parent_digest,
        producer,
        record.proposer.id,
        record.nonce,
        height,
        salt,
    ]);
    store.insert(Block {
        parent,
        height,
        digest,
        record: Arc::new(record),
        producer,
        round,
    })
}

fn broadcast(inboxes: &mut [VecDeque<(u64, BlockId)>], from: usize, due: u64, id: BlockId) {
    for (j, inbox) in inboxes.iter_mut().enumerate() {
        if j != from {
            inbox.push_back((due, id));
        }
    }
}

#[allow(clippy::too_many_arguments)]
pub(super) fn finalize(
    config: &NetworkConfig,
    setup: &RunSetup,
    store: BlockStore,
    views: Vec<ChainView>,
    lead: usize,
    agreement: AgreementMonitor,
    validity: ValidityMonitor,
    mut termination: TerminationMonitor,
    log: RunLog,
    genesis_blocks: usize,
) -> Result<RunOutcome, ConsensusError> {
    let c = config.confirmation_depth;
    let decided = views[lead].decided_prefix(&store, c);

    // Inclusion is judged against the lead honest view's full chain: a
    // record in its undecided tail has been absorbed, it merely awaits
    // depth. Stranded proposals still valid against the final state are
    // liveness failures; invalid or superseded ones were rightly dropped.
    let full_chain = views[lead].decided_prefix(&store, 0);
    let on_chain: BTreeSet<(u64, u64)> = full_chain
        .iter()
        .filter(|r| !r.proposer.is_system())
        .map(Record::signature)
        .collect();
    let final_state = LedgerState::derive(&setup.world, &full_chain);
    let mut included = 0;
    let mut unincluded_valid = 0;
    for proposal in &setup.schedule {
        if on_chain.contains(&proposal.record.signature()) {
            included += 1;
            continue;
        }
        let stamped = proposal.record.at_index(final_state.applied);
        let valid = setup.decls.iter().all(|d| {
            evaluate_predicate(d, &setup.world, &final_state, &stamped, None).unwrap_or(false)
        });
        if valid {
            unincluded_valid += 1;
        }
    }
    termination.stats.included = included;
    termination.stats.unincluded_valid = unincluded_valid;

    Ok(RunOutcome {
        engine: config.engine,
        seed: config.seed,
        confirmation_depth: c,
        rounds_run: config.rounds,
        maintainer_count: setup.maintainers.len(),
        adversary_count: setup
            .maintainers
            .iter()
            .filter(|p| !p.is_honest())
            .count(),
        decided,
        decided_heights: views.iter().map(|v| v.decided_height(c)).collect(),
        blocks_produced: store.len() - genesis_blocks,
        agreement: agreement.stats,
        validity: validity.stats,
        termination: termination.stats,
        log: log.finish(),
    })
}
