//! External information sources for predicates that cannot be decided from
//! the record sequence alone.
//!
//! An oracle answers fact queries about (object, property) pairs. The ground
//! truth lives in the world model; the oracle's behavior decides whether the
//! answer is faithful, deliberately overridden, or randomly corrupted. Every
//! query is counted so a trust audit can see which oracles were actually
//! consulted.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ledger::{ObjectId, PartyId, Scalar};
use crate::rng::{mix_label, mix_words, unit};

use super::{ValidationError, WorldModel};

/// How an oracle answers relative to the world's ground truth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum OracleBehavior {
    /// Always reports the true fact.
    Truthful,
    /// Reports fixed overrides for chosen facts, the truth otherwise.
    Lies {
        overrides: BTreeMap<(ObjectId, String), Scalar>,
    },
    /// Flips boolean facts with the given probability; other scalar types
    /// are reported truthfully.
    Noisy { flip_probability: f64 },
}

/// Declaration of one oracle: name, optional operating party, behavior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Oracle {
    pub name: String,
    /// The party running the oracle. Whoever it is becomes a trusted third
    /// party the moment the oracle is consulted.
    pub operator: Option<PartyId>,
    pub behavior: OracleBehavior,
}

impl Oracle {
    pub fn truthful(name: impl Into<String>, operator: Option<PartyId>) -> Self {
        Oracle {
            name: name.into(),
            operator,
            behavior: OracleBehavior::Truthful,
        }
    }
}

/// A live oracle: the declaration plus query accounting and the seed stream
/// that drives noisy behavior deterministically.
#[derive(Debug, Clone)]
pub struct OracleHandle {
    pub oracle: Oracle,
    seed: u64,
    queries: u64,
}

impl OracleHandle {
    pub fn new(oracle: Oracle, run_seed: u64) -> Self {
        let seed = mix_label(mix_label(run_seed, "oracle"), &oracle.name);
        OracleHandle {
            oracle,
            seed,
            queries: 0,
        }
    }

    /// Number of fact queries served so far.
    pub fn queries(&self) -> u64 {
        self.queries
    }

    pub fn was_consulted(&self) -> bool {
        self.queries > 0
    }

    /// Answer one fact query. Consumes one position in the oracle's noise
    /// stream whether or not the answer is corrupted, so replays with the
    /// same seed reproduce the same answers in the same order.
    pub fn query(
        &mut self,
        world: &WorldModel,
        object: ObjectId,
        property: &str,
    ) -> Result<Scalar, ValidationError> {
        let ordinal = self.queries;
        self.queries += 1;
        let truth = world
            .fact(&object, property)
            .ok_or_else(|| ValidationError::MissingFact {
                object: object.token(),
                property: property.to_string(),
            })?;
        let answer = match &self.oracle.behavior {
            OracleBehavior::Truthful => truth.clone(),
            OracleBehavior::Lies { overrides } => overrides
                .get(&(object, property.to_string()))
                .cloned()
                .unwrap_or_else(|| truth.clone()),
            OracleBehavior::Noisy { flip_probability } => match truth {
                Scalar::Bool(b) => {
                    let draw = unit(mix_words(&[self.seed, ordinal]));
                    Scalar::Bool(if draw < *flip_probability { !b } else { *b })
                }
                other => other.clone(),
            },
        };
        Ok(answer)
    }
}

/// Query an oracle for one fact. Free-function form of [`OracleHandle::query`].
pub fn query_oracle(
    handle: &mut OracleHandle,
    world: &WorldModel,
    object: ObjectId,
    property: &str,
) -> Result<Scalar, ValidationError> {
    handle.query(world, object, property)
}
