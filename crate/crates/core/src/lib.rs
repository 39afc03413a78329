//! ledgerlab-core: a deterministic distributed-ledger simulator and
//! trust-criteria analyzer.
//!
//! The crate models a use case as parties interacting through a shared
//! append-only record sequence, runs consensus engines over seeded randomness,
//! evaluates validation predicates against a world model, and audits which
//! parties must still be trusted. Everything derives from a single run seed,
//! so any run can be replayed bit-for-bit.

pub mod consensus;
pub mod criteria;
pub mod ledger;
pub mod rng;
pub mod scenario;
pub mod validation;
