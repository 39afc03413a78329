//! Quorum-vote engine with a fixed maintainer committee.
//!
//! Rounds rotate leadership round-robin over the committee. The leader
//! proposes the oldest includable proposal it knows; every maintainer votes,
//! and the record is committed once the yes votes *strictly exceed* the
//! quorum fraction of the committee (the classic more-than-two-thirds
//! quorum). Honest voters approve a proposal only if it passes their
//! inclusion predicates *and* its signature appears in the proposal
//! schedule — an unscheduled record can never gather an honest quorum,
//! which is why fabrication attacks are structurally inert here.
//!
//! Commits are final immediately (the default confirmation depth is zero):
//! there is no fork-choice rule to reverse them. A leader whose proposal
//! fails to gather a quorum stops re-proposing it and moves on, so one
//! starved record cannot wedge the whole ledger.
//!
//! With a committee of `3f + 1`, both adversary scripts below are harmless
//! with `f` members and decisive with `f + 1` — the textbook one-third
//! fault bound:
//! * `withholder` — proposes nothing when leading and abstains from every
//!   vote; past a third of the committee, abstention starves the quorum and
//!   halts the ledger;
//! * `equivocator` — when leading, shows variant A of the block to
//!   even-indexed maintainers and variant B to odd-indexed ones, and as a
//!   voter endorses everything it sees; past a third of the committee the
//!   double votes let both variants reach quorum, splitting the committee
//!   onto two chains;
//! * `censor` — follows the protocol but never proposes or endorses the
//!   victim's records.

use std::collections::{BTreeMap, BTreeSet};

use crate::ledger::{genesis_records, Honesty, PartyId, Record};
use crate::rng::mix_label;
use crate::validation::evaluate_predicate;

use super::chain::{BlockId, BlockStore, ChainView};
use super::monitor::{AgreementMonitor, RunLog, TerminationMonitor, ValidityMonitor};
use super::permissionless::{adopt, finalize, pick_proposal, produce_block, Tracker};
use super::{
    ConsensusError, NetworkConfig, RunOutcome, RunSetup, SCRIPT_CENSOR, SCRIPT_EQUIVOCATOR,
    SCRIPT_WITHHOLDER,
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

/// What the leader put on the wire this round.
enum LeaderAction {
    Nothing,
    Propose(Record),
    /// Same record, two block variants shown to different halves.
    Equivocate(Record),
}

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
    let quorum = config.quorum_fraction.strictly_above(n as u64);
    let digest_stream = mix_label(config.seed, "block-digest");

    let scheduled: BTreeSet<(u64, u64)> = setup
        .schedule
        .iter()
        .map(|p| p.record.signature())
        .collect();
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

    let mut log = RunLog::new(config.log_header(), config.record_log);
    let mut agreement = AgreementMonitor::new(c, honest.clone());
    let mut validity = ValidityMonitor::new(&setup.schedule, honest.clone(), c);
    let mut termination =
        TerminationMonitor::new(&setup.schedule, honest.clone(), c, config.stall_window);
    let mut prev_lead_decided: Option<u64> = None;
    // Proposals each leader has seen rejected and will not re-propose.
    let mut rejected: Vec<BTreeSet<(u64, u64)>> = vec![BTreeSet::new(); n];

    for round in 0..config.rounds {
        let mut changed = vec![false; n];
        let leader = (round % n as u64) as usize;

        let action = match scripts[leader] {
            Script::Withholder => LeaderAction::Nothing,
            Script::Honest | Script::Censor | Script::Equivocator => {
                let victim = (scripts[leader] == Script::Censor)
                    .then_some(censor_victim)
                    .flatten();
                match pick_proposal(
                    &setup.schedule,
                    round,
                    &trackers[leader],
                    &setup.decls,
                    world,
                    victim,
                    &rejected[leader],
                ) {
                    None => LeaderAction::Nothing,
                    Some(record) => {
                        let record = record.clone();
                        if scripts[leader] == Script::Equivocator {
                            LeaderAction::Equivocate(record)
                        } else {
                            LeaderAction::Propose(record)
                        }
                    }
                }
            }
        };

        match action {
            LeaderAction::Nothing => {}
            LeaderAction::Propose(record) => {
                log.push(
                    round,
                    &ids[leader],
                    "propose",
                    format_args!("sig={}:{}", record.proposer.id, record.nonce),
                );
                let yes = tally(
                    &record, n, &scripts, &trackers, &setup.decls, world, &scheduled,
                    censor_victim, None,
                );
                if yes >= quorum {
                    commit(
                        &mut store,
                        &mut views,
                        &mut trackers,
                        &mut changed,
                        (0..n).collect(),
                        &record,
                        digest_stream,
                        ids[leader].id,
                        round,
                        0,
                        world,
                    );
                    let height = views[lead].height().unwrap_or(0);
                    log.push(
                        round,
                        &ids[leader],
                        "commit",
                        format_args!("height={height} yes={yes} quorum={quorum}"),
                    );
                } else {
                    rejected[leader].insert(record.signature());
                    log.push(
                        round,
                        &ids[leader],
                        "reject",
                        format_args!("yes={yes} quorum={quorum}"),
                    );
                }
            }
            LeaderAction::Equivocate(record) => {
                log.push(
                    round,
                    &ids[leader],
                    "propose",
                    format_args!("sig={}:{} equivocal=true", record.proposer.id, record.nonce),
                );
                // Variant A is seen (and voted on) by even indices, variant B
                // by odd ones; equivocating voters endorse both.
                let yes_a = tally(
                    &record, n, &scripts, &trackers, &setup.decls, world, &scheduled,
                    censor_victim, Some(0),
                );
                let yes_b = tally(
                    &record, n, &scripts, &trackers, &setup.decls, world, &scheduled,
                    censor_victim, Some(1),
                );
                let a_q = yes_a >= quorum;
                let b_q = yes_b >= quorum;
                if a_q && b_q {
                    let evens: Vec<usize> = (0..n).filter(|i| i % 2 == 0).collect();
                    let odds: Vec<usize> = (0..n).filter(|i| i % 2 == 1).collect();
                    commit(
                        &mut store, &mut views, &mut trackers, &mut changed, evens, &record,
                        digest_stream, ids[leader].id, round, 1, world,
                    );
                    commit(
                        &mut store, &mut views, &mut trackers, &mut changed, odds, &record,
                        digest_stream, ids[leader].id, round, 2, world,
                    );
                    log.push(
                        round,
                        &ids[leader],
                        "equivocate",
                        format_args!("yes_a={yes_a} yes_b={yes_b} quorum={quorum}"),
                    );
                } else if a_q || b_q {
                    let salt = if a_q { 1 } else { 2 };
                    commit(
                        &mut store,
                        &mut views,
                        &mut trackers,
                        &mut changed,
                        (0..n).collect(),
                        &record,
                        digest_stream,
                        ids[leader].id,
                        round,
                        salt,
                        world,
                    );
                    let height = views[lead].height().unwrap_or(0);
                    log.push(
                        round,
                        &ids[leader],
                        "commit",
                        format_args!("height={height} yes={} quorum={quorum}", yes_a.max(yes_b)),
                    );
                } else {
                    rejected[leader].insert(record.signature());
                    log.push(
                        round,
                        &ids[leader],
                        "reject",
                        format_args!("yes_a={yes_a} yes_b={yes_b} quorum={quorum}"),
                    );
                }
            }
        }

        agreement.on_round(round, &views, &changed, &mut log, &ids);
        validity.on_round(round, &store, &views, &changed, &mut log);
        let no_skip = BTreeSet::new();
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

/// Count yes votes on a proposal. `variant`: `None` when every maintainer
/// sees the same block; `Some(parity)` when only maintainers whose index
/// matches the parity are shown this variant (equivocating voters endorse
/// both variants regardless).
#[allow(clippy::too_many_arguments)]
fn tally(
    record: &Record,
    n: usize,
    scripts: &[Script],
    trackers: &[Tracker],
    decls: &[crate::validation::PredicateDecl],
    world: &crate::validation::WorldModel,
    scheduled: &BTreeSet<(u64, u64)>,
    censor_victim: Option<u64>,
    variant: Option<usize>,
) -> u64 {
    let mut yes = 0;
    for i in 0..n {
        let sees_it = match variant {
            None => true,
            Some(parity) => i % 2 == parity,
        };
        match scripts[i] {
            Script::Withholder => {}
            Script::Equivocator => {
                // Endorses anything, including both equivocal variants.
                yes += 1;
            }
            Script::Honest | Script::Censor => {
                if !sees_it {
                    continue;
                }
                if scripts[i] == Script::Censor {
                    if let Some(victim) = censor_victim {
                        if record.proposer.id == victim
                            || record.parties.iter().any(|q| q.id == victim)
                        {
                            continue;
                        }
                    }
                }
                if approves(record, &trackers[i], decls, world, scheduled) {
                    yes += 1;
                }
            }
        }
    }
    yes
}

/// An honest maintainer's vote: the record must be scheduled, not already
/// on its chain, and pass every inclusion predicate against its state.
fn approves(
    record: &Record,
    tracker: &Tracker,
    decls: &[crate::validation::PredicateDecl],
    world: &crate::validation::WorldModel,
    scheduled: &BTreeSet<(u64, u64)>,
) -> bool {
    if !scheduled.contains(&record.signature()) {
        return false;
    }
    if tracker.sig_set.contains(&record.signature()) {
        return false;
    }
    if decls.is_empty() {
        return true;
    }
    let state = tracker.state.as_ref().expect("state tracked when decls set");
    let stamped = record.at_index(state.applied);
    decls
        .iter()
        .all(|d| evaluate_predicate(d, world, state, &stamped, None).unwrap_or(false))
}

/// Append a committed record to the given views, each extending its own tip.
/// Views that share a tip share the resulting block.
#[allow(clippy::too_many_arguments)]
fn commit(
    store: &mut BlockStore,
    views: &mut [ChainView],
    trackers: &mut [Tracker],
    changed: &mut [bool],
    members: Vec<usize>,
    record: &Record,
    digest_stream: u64,
    producer: u64,
    round: u64,
    salt: u64,
    world: &crate::validation::WorldModel,
) {
    let mut by_parent: BTreeMap<Option<u32>, BlockId> = BTreeMap::new();
    for m in members {
        let parent = views[m].tip();
        let key = parent.map(|b| b.0);
        let id = *by_parent.entry(key).or_insert_with(|| {
            produce_block(
                store,
                digest_stream,
                parent,
                record.clone(),
                producer,
                round,
                salt,
            )
        });
        if adopt(&mut views[m], &mut trackers[m], store, id, world) {
            changed[m] = true;
        }
    }
}
