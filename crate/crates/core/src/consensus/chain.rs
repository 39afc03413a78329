//! Block tree shared by all maintainer views.
//!
//! Every block ever produced in a run lives in one arena; a maintainer view
//! is a path through the tree identified by its tip. Because a block exists
//! at exactly one position in the tree, two views agree on their decided
//! prefixes iff they hold the *same block* at the lower decided height —
//! an O(1) comparison, which is what lets the agreement monitor run every
//! round of a long simulation.

use std::sync::Arc;

use crate::ledger::{Record, RecordSequence};

/// Index of a block in the run's arena.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlockId(pub u32);

#[derive(Debug, Clone)]
pub struct Block {
    pub parent: Option<BlockId>,
    pub height: u64,
    /// Content-derived pseudo-digest; ties at equal height break toward the
    /// lowest digest so every maintainer resolves forks identically.
    pub digest: u64,
    pub record: Arc<Record>,
    /// Numeric id of the maintainer that produced the block (0 = system).
    pub producer: u64,
    /// Round in which the block was produced.
    pub round: u64,
}

/// Arena of all blocks produced in one run.
#[derive(Debug, Default)]
pub struct BlockStore {
    blocks: Vec<Block>,
}

impl BlockStore {
    pub fn new() -> Self {
        BlockStore::default()
    }

    pub fn get(&self, id: BlockId) -> &Block {
        &self.blocks[id.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn insert(&mut self, block: Block) -> BlockId {
        if let Some(parent) = block.parent {
            debug_assert_eq!(self.get(parent).height + 1, block.height);
        } else {
            debug_assert_eq!(block.height, 0);
        }
        let id = BlockId(self.blocks.len() as u32);
        self.blocks.push(block);
        id
    }

    /// Walk from `tip` down to height `h`.
    pub fn ancestor_at(&self, tip: BlockId, h: u64) -> Option<BlockId> {
        let mut cur = tip;
        loop {
            let b = self.get(cur);
            if b.height == h {
                return Some(cur);
            }
            if b.height < h {
                return None;
            }
            cur = b.parent?;
        }
    }
}

/// One maintainer's view of the ledger: a tip plus the materialized path
/// from genesis, indexed by height for O(1) prefix comparisons.
#[derive(Debug, Clone)]
pub struct ChainView {
    /// chain[h] is the block this view holds at height h.
    chain: Vec<BlockId>,
}

impl ChainView {
    /// A view rooted at a linear prefix of blocks (heights 0..len).
    pub fn rooted(chain: Vec<BlockId>) -> Self {
        ChainView { chain }
    }

    pub fn tip(&self) -> Option<BlockId> {
        self.chain.last().copied()
    }

    pub fn height(&self) -> Option<u64> {
        (self.chain.len() as u64).checked_sub(1)
    }

    pub fn len(&self) -> usize {
        self.chain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.chain.is_empty()
    }

    pub fn at_height(&self, h: u64) -> Option<BlockId> {
        self.chain.get(h as usize).copied()
    }

    /// Extend or reorganize to a new tip. Returns the fork height — the
    /// lowest height whose block changed — when anything changed at all.
    pub fn adopt(&mut self, store: &BlockStore, new_tip: BlockId) -> Option<u64> {
        if self.tip() == Some(new_tip) {
            return None;
        }
        // Collect the new branch down to the first block we already hold.
        let mut branch = Vec::new();
        let mut cur = Some(new_tip);
        while let Some(id) = cur {
            let b = store.get(id);
            if self.at_height(b.height) == Some(id) {
                break;
            }
            branch.push(id);
            cur = b.parent;
        }
        let fork_height = match branch.last() {
            Some(lowest) => store.get(*lowest).height,
            // The new tip is an ancestor we already hold: shrink to it.
            None => {
                let h = store.get(new_tip).height;
                self.chain.truncate(h as usize + 1);
                return Some(h + 1);
            }
        };
        self.chain.truncate(fork_height as usize);
        self.chain.extend(branch.iter().rev());
        Some(fork_height)
    }

    /// The tip of the decided prefix: the block `c` below the tip, if the
    /// chain is long enough for anything to be decided.
    pub fn decided_tip(&self, c: u64) -> Option<BlockId> {
        let h = self.height()?.checked_sub(c)?;
        self.at_height(h)
    }

    pub fn decided_height(&self, c: u64) -> Option<u64> {
        self.height()?.checked_sub(c)
    }

    /// Materialize the decided prefix as a record sequence, records stamped
    /// by height.
    pub fn decided_prefix(&self, store: &BlockStore, c: u64) -> RecordSequence {
        let upto = match self.decided_height(c) {
            Some(h) => h as usize + 1,
            None => 0,
        };
        let mut seq = RecordSequence::new();
        for (h, id) in self.chain[..upto].iter().enumerate() {
            let rec = store.get(*id).record.at_index(h as u64);
            seq.push(rec).expect("heights are dense");
        }
        seq
    }
}

/// Do two views agree on their common decided prefix? O(1): the block at
/// the lower decided height must be the same tree node in both.
pub fn prefixes_agree(a: &ChainView, b: &ChainView, c: u64) -> bool {
    match (a.decided_height(c), b.decided_height(c)) {
        (Some(ha), Some(hb)) => {
            let h = ha.min(hb);
            a.at_height(h) == b.at_height(h)
        }
        // Nothing decided on one side: nothing to disagree about.
        _ => true,
    }
}
