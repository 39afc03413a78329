//! Property monitors and the per-round event log.
//!
//! Monitors observe the honest maintainer views after every round. They are
//! deliberately engine-agnostic: both engines feed them the same way, so a
//! safety claim means the same thing under either protocol.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::ledger::PartyId;

use super::chain::{prefixes_agree, BlockId, BlockStore, ChainView};
use super::ScheduledProposal;

// ---------------------------------------------------------------------------
// Event log
// ---------------------------------------------------------------------------

/// Byte-stable event log: a header followed by `round|maintainer|event|detail`
/// lines. The maintainer column is the party token; system-level events use
/// the reserved system token.
#[derive(Debug, Clone)]
pub struct RunLog {
    lines: Vec<String>,
    enabled: bool,
}

impl RunLog {
    pub fn new(header: String, enabled: bool) -> Self {
        RunLog {
            lines: vec![header],
            enabled,
        }
    }

    /// Append one event line. Takes pre-built `format_args!` so a disabled
    /// log never formats or allocates — sweeps with logging off stay cheap.
    pub fn push(&mut self, round: u64, who: &PartyId, event: &str, detail: std::fmt::Arguments) {
        if self.enabled {
            self.lines
                .push(format!("{round}|{}|{event}|{detail}", who.token()));
        }
    }

    pub fn push_system(&mut self, round: u64, event: &str, detail: std::fmt::Arguments) {
        if self.enabled {
            self.lines
                .push(format!("{round}|{}|{event}|{detail}", PartyId::system().token()));
        }
    }

    pub fn finish(self) -> Vec<String> {
        self.lines
    }
}

// ---------------------------------------------------------------------------
// Agreement
// ---------------------------------------------------------------------------

/// Counters for decided-prefix agreement among honest views.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgreementStats {
    /// Unordered honest pairs found with conflicting decided prefixes,
    /// counted per round of conflict.
    pub pairwise_violations: u64,
    /// Rounds in which an honest view rewrote or shrank its own decided
    /// prefix (a reorganization deeper than the confirmation depth).
    pub self_violations: u64,
    pub first_violation_round: Option<u64>,
}

impl AgreementStats {
    pub fn total(&self) -> u64 {
        self.pairwise_violations + self.self_violations
    }
}

/// Watches honest views' decided prefixes for conflicts. Checks are O(1)
/// per pair thanks to block identity (see [`super::chain`]), and only pairs
/// involving a view whose decided tip moved this round are examined.
pub struct AgreementMonitor {
    c: u64,
    /// Indices (into the view slice) of honest maintainers.
    honest: Vec<usize>,
    /// Last observed decided (height, tip) per view index.
    prev: BTreeMap<usize, (u64, BlockId)>,
    pub stats: AgreementStats,
}

impl AgreementMonitor {
    pub fn new(c: u64, honest: Vec<usize>) -> Self {
        AgreementMonitor {
            c,
            honest,
            prev: BTreeMap::new(),
            stats: AgreementStats::default(),
        }
    }

    fn note_violation(&mut self, round: u64) {
        if self.stats.first_violation_round.is_none() {
            self.stats.first_violation_round = Some(round);
        }
    }

    /// Inspect the honest views after a round. `changed[i]` flags views
    /// whose tip moved during the round.
    pub fn on_round(
        &mut self,
        round: u64,
        views: &[ChainView],
        changed: &[bool],
        log: &mut RunLog,
        maintainers: &[PartyId],
    ) {
        let honest = self.honest.clone();
        // Self-stability: a view must never retract a block it decided.
        for &i in &honest {
            if !changed[i] {
                continue;
            }
            let current = views[i]
                .decided_height(self.c)
                .and_then(|h| views[i].at_height(h).map(|b| (h, b)));
            if let Some((prev_h, prev_tip)) = self.prev.get(&i).copied() {
                let intact = views[i]
                    .decided_height(self.c)
                    .map(|h| h >= prev_h)
                    .unwrap_or(false)
                    && views[i].at_height(prev_h) == Some(prev_tip);
                if !intact {
                    self.stats.self_violations += 1;
                    self.note_violation(round);
                    log.push(
                        round,
                        &maintainers[i],
                        "violation",
                        format_args!("kind=self decided-height={prev_h}"),
                    );
                }
            }
            if let Some(cur) = current {
                self.prev.insert(i, cur);
            }
        }
        // Pairwise: examine pairs with at least one moved side, each
        // unordered pair at most once per round.
        for &i in &honest {
            if !changed[i] {
                continue;
            }
            for &j in &honest {
                if j == i || (changed[j] && j < i) {
                    continue;
                }
                if !prefixes_agree(&views[i], &views[j], self.c) {
                    self.stats.pairwise_violations += 1;
                    self.note_violation(round);
                    log.push(
                        round,
                        &maintainers[i],
                        "violation",
                        format_args!("kind=agreement peer={}", maintainers[j].token()),
                    );
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Validity
// ---------------------------------------------------------------------------

/// Counters for decided records that trace to no scheduled proposal.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityStats {
    pub violations: u64,
    /// (proposer id, nonce) signatures of offending records, first few only.
    pub examples: Vec<(u64, u64)>,
}

/// Watches decided blocks for records that were never proposed. Each block
/// is checked at most once, no matter how many views decide it.
pub struct ValidityMonitor {
    known: BTreeSet<(u64, u64)>,
    checked: BTreeSet<BlockId>,
    honest: Vec<usize>,
    c: u64,
    pub stats: ValidityStats,
}

const MAX_VALIDITY_EXAMPLES: usize = 8;

impl ValidityMonitor {
    pub fn new(schedule: &[ScheduledProposal], honest: Vec<usize>, c: u64) -> Self {
        ValidityMonitor {
            known: schedule.iter().map(|p| p.record.signature()).collect(),
            checked: BTreeSet::new(),
            honest,
            c,
            stats: ValidityStats::default(),
        }
    }

    pub fn on_round(
        &mut self,
        round: u64,
        store: &BlockStore,
        views: &[ChainView],
        changed: &[bool],
        log: &mut RunLog,
    ) {
        let honest = std::mem::take(&mut self.honest);
        for &i in &honest {
            if !changed[i] {
                continue;
            }
            let Some(mut h) = views[i].decided_height(self.c) else {
                continue;
            };
            // Walk down from the decided tip until we hit checked territory.
            loop {
                let Some(id) = views[i].at_height(h) else { break };
                if !self.checked.insert(id) {
                    break;
                }
                let record = &store.get(id).record;
                if !record.proposer.is_system() && !self.known.contains(&record.signature()) {
                    self.stats.violations += 1;
                    if self.stats.examples.len() < MAX_VALIDITY_EXAMPLES {
                        self.stats.examples.push(record.signature());
                    }
                    log.push_system(
                        round,
                        "violation",
                        format_args!(
                            "kind=validity proposer={} nonce={}",
                            record.proposer.token(),
                            record.nonce
                        ),
                    );
                }
                if h == 0 {
                    break;
                }
                h -= 1;
            }
        }
        self.honest = honest;
    }
}

// ---------------------------------------------------------------------------
// Termination
// ---------------------------------------------------------------------------

/// Liveness counters: chain growth and proposal inclusion.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TerminationStats {
    pub first_decision_round: Option<u64>,
    /// Longest run of consecutive rounds in which includable work was
    /// pending but the lead honest chain did not grow.
    pub longest_stall: u64,
    /// Number of times a stall reached the configured window.
    pub stall_events: u64,
    /// Rounds from availability to first inclusion on the lead honest
    /// chain, worst case over included proposals.
    pub max_inclusion_latency: u64,
    /// Scheduled proposals present on the final lead chain.
    pub included: u64,
    /// Scheduled proposals absent from the final lead chain though still
    /// valid against its final state — filled in by the engine at the end
    /// of the run. Proposals that became invalid (superseded, overdrawn)
    /// were rightly dropped and do not count.
    pub unincluded_valid: u64,
}

/// Watches chain growth on the lead honest view and proposal inclusion
/// latency. A chain that stops because no includable work remains is not
/// stalling, so the engine reports each round whether the lead maintainer
/// actually had an includable proposal in hand.
pub struct TerminationMonitor {
    honest: Vec<usize>,
    c: u64,
    stall_window: u64,
    current_stall: u64,
    prev_lead_height: Option<u64>,
    decided_once: bool,
    /// available_from per schedule signature, removed once included.
    waiting: BTreeMap<(u64, u64), u64>,
    pub stats: TerminationStats,
}

impl TerminationMonitor {
    pub fn new(schedule: &[ScheduledProposal], honest: Vec<usize>, c: u64, stall_window: u64) -> Self {
        TerminationMonitor {
            honest,
            c,
            stall_window,
            current_stall: 0,
            prev_lead_height: None,
            decided_once: false,
            waiting: schedule
                .iter()
                .map(|p| (p.record.signature(), p.available_from))
                .collect(),
            stats: TerminationStats::default(),
        }
    }

    pub fn on_round(
        &mut self,
        round: u64,
        store: &BlockStore,
        views: &[ChainView],
        pending: bool,
        log: &mut RunLog,
    ) {
        if !self.decided_once {
            let decided = self
                .honest
                .iter()
                .filter_map(|&i| views[i].decided_height(self.c))
                .min();
            if decided.is_some() {
                self.stats.first_decision_round = Some(round);
                self.decided_once = true;
            }
        }

        // Record inclusion latency as new blocks land on the lead chain.
        // Reorganizations may swap blocks below the scanned height; the
        // engine recomputes the final inclusion counts from the final chain,
        // so a transiently stale latency entry is harmless.
        let lead = *self.honest.first().expect("at least one honest view");
        let view = &views[lead];
        let lead_height = view.height();
        if let Some(h) = lead_height {
            let from = match self.prev_lead_height {
                Some(p) => p + 1,
                None => 0,
            };
            for height in from..=h {
                let Some(id) = view.at_height(height) else { continue };
                let sig = store.get(id).record.signature();
                if let Some(available) = self.waiting.remove(&sig) {
                    let latency = round.saturating_sub(available);
                    self.stats.max_inclusion_latency =
                        self.stats.max_inclusion_latency.max(latency);
                }
            }
        }

        let grew = match (self.prev_lead_height, lead_height) {
            (None, Some(_)) => true,
            (Some(a), Some(b)) => b > a,
            _ => false,
        };
        if grew || !pending {
            self.current_stall = 0;
        } else {
            self.current_stall += 1;
            self.stats.longest_stall = self.stats.longest_stall.max(self.current_stall);
            if self.current_stall == self.stall_window {
                self.stats.stall_events += 1;
                log.push_system(round, "stall", format_args!("rounds={}", self.stall_window));
            }
        }
        if lead_height.is_some() {
            self.prev_lead_height = lead_height;
        }
    }
}
