//! Core ledger value types and the append/validation primitives shared by
//! every consensus engine.
//!
//! Everything here is an immutable value. Operations are pure functions; a
//! [`RecordSequence`] is never mutated in place except through the checked
//! [`RecordSequence::push`], which preserves the append-only discipline.

mod log;

pub use log::{format_record, format_sequence, parse_record, parse_sequence};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Maximum length for party labels and attribute keys.
const MAX_LABEL_LEN: usize = 32;
/// Maximum length for string attribute values.
const MAX_STRING_LEN: usize = 64;

/// Errors from ledger-core constructors and primitives.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LedgerError {
    /// A payload is missing a required attribute or carries a wrong type.
    #[error("malformed {kind} payload: {detail}")]
    MalformedPayload { kind: PayloadKind, detail: String },
    /// Appending a record whose index does not continue the sequence.
    #[error("index gap: sequence length {expected}, record index {got}")]
    IndexGap { expected: u64, got: u64 },
    /// A label (party, attribute key) violates the charset rules.
    #[error("invalid label {0:?}: labels are 1-32 chars of [a-z A-Z 0-9 - _ .]")]
    InvalidLabel(String),
    /// A string scalar violates the charset rules.
    #[error("invalid string value {0:?}: 1-64 printable ASCII chars, no whitespace or '|' ',' '='")]
    InvalidString(String),
    /// A sequential object id must fit in 64 bits.
    #[error("sequential object value exceeds 64 bits")]
    SequentialTooWide,
    /// RandomBits width must be in 1..=256.
    #[error("random id width {0} out of range 1..=256")]
    BadIdWidth(u16),
    /// Genesis descriptors must be system-created and vice versa.
    #[error("descriptor for {0}: created_at is Genesis iff creator is System")]
    DescriptorInvariant(String),
    /// A textual token (object id, scalar, record line) failed to parse.
    #[error("parse error at line {line}: {detail}")]
    Parse { line: usize, detail: String },
}

impl LedgerError {
    pub(crate) fn parse(line: usize, detail: impl Into<String>) -> Self {
        LedgerError::Parse {
            line,
            detail: detail.into(),
        }
    }
}

fn valid_label(s: &str) -> bool {
    !s.is_empty()
        && s.len() <= MAX_LABEL_LEN
        && s.chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
}

fn check_label(s: &str) -> Result<(), LedgerError> {
    if valid_label(s) {
        Ok(())
    } else {
        Err(LedgerError::InvalidLabel(s.to_string()))
    }
}

// ---------------------------------------------------------------------------
// Parties
// ---------------------------------------------------------------------------

/// Identifier of a party: a run-unique numeric id plus a short label.
///
/// Ordering, equality, and hashing use the id alone; the label is carried for
/// reports and logs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartyId {
    pub id: u64,
    pub label: String,
}

impl PartyId {
    pub fn new(id: u64, label: impl Into<String>) -> Result<Self, LedgerError> {
        let label = label.into();
        check_label(&label)?;
        Ok(PartyId { id, label })
    }

    /// The reserved proposer of genesis records. Never part of a use case's
    /// declared party set.
    pub fn system() -> Self {
        PartyId {
            id: 0,
            label: "_system".to_string(),
        }
    }

    pub fn is_system(&self) -> bool {
        self.id == 0
    }

    /// Canonical log token, `<id>:<label>`.
    pub fn token(&self) -> String {
        format!("{}:{}", self.id, self.label)
    }

    pub(crate) fn parse_token(tok: &str, line: usize) -> Result<Self, LedgerError> {
        let (id, label) = tok
            .split_once(':')
            .ok_or_else(|| LedgerError::parse(line, format!("bad party token {tok:?}")))?;
        let id = id
            .parse::<u64>()
            .map_err(|_| LedgerError::parse(line, format!("bad party id in {tok:?}")))?;
        PartyId::new(id, label).map_err(|e| LedgerError::parse(line, e.to_string()))
    }
}

impl PartialEq for PartyId {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}
impl Eq for PartyId {}
impl PartialOrd for PartyId {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for PartyId {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.id.cmp(&other.id)
    }
}
impl std::hash::Hash for PartyId {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.id.hash(state);
    }
}
impl fmt::Display for PartyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.label)
    }
}

/// Roles a party can hold. The two sets need not be disjoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Role {
    Participant,
    Maintainer,
}

/// Whether a party follows the protocols, and if not, which script it runs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Honesty {
    Honest,
    Adversarial { script: String },
}

/// A declared party of a use case.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Party {
    pub party_id: PartyId,
    pub roles: BTreeSet<Role>,
    pub honesty: Honesty,
}

impl Party {
    pub fn honest(party_id: PartyId, roles: impl IntoIterator<Item = Role>) -> Self {
        Party {
            party_id,
            roles: roles.into_iter().collect(),
            honesty: Honesty::Honest,
        }
    }

    pub fn is_maintainer(&self) -> bool {
        self.roles.contains(&Role::Maintainer)
    }

    pub fn is_participant(&self) -> bool {
        self.roles.contains(&Role::Participant)
    }

    pub fn is_honest(&self) -> bool {
        self.honesty == Honesty::Honest
    }
}

// ---------------------------------------------------------------------------
// Objects
// ---------------------------------------------------------------------------

/// A 256-bit unsigned value, little-endian limbs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Wide256(pub [u64; 4]);

impl Wide256 {
    pub const ZERO: Wide256 = Wide256([0; 4]);

    pub fn from_u64(v: u64) -> Self {
        Wide256([v, 0, 0, 0])
    }

    pub fn as_u64(&self) -> Option<u64> {
        if self.0[1] == 0 && self.0[2] == 0 && self.0[3] == 0 {
            Some(self.0[0])
        } else {
            None
        }
    }

    /// Draw a uniformly random value of the given bit width. Always consumes
    /// four 64-bit draws so stream positions do not depend on the width.
    pub fn random_bits<R: Rng>(rng: &mut R, width: u16) -> Self {
        let limbs = [rng.gen(), rng.gen(), rng.gen(), rng.gen()];
        Wide256(limbs).masked(width)
    }

    /// Clear every bit at or above `width`.
    pub fn masked(self, width: u16) -> Self {
        let mut limbs = self.0;
        for (i, limb) in limbs.iter_mut().enumerate() {
            let lo = i as u32 * 64;
            let bits = (width as u32).saturating_sub(lo).min(64);
            *limb = match bits {
                0 => 0,
                64 => *limb,
                _ => *limb & ((1u64 << bits) - 1),
            };
        }
        Wide256(limbs)
    }

    /// Minimal lowercase hex, no leading zeros ("0" for zero).
    pub fn to_hex(&self) -> String {
        let mut s = String::new();
        let mut started = false;
        for limb in self.0.iter().rev() {
            if started {
                s.push_str(&format!("{limb:016x}"));
            } else if *limb != 0 {
                s.push_str(&format!("{limb:x}"));
                started = true;
            }
        }
        if s.is_empty() {
            s.push('0');
        }
        s
    }

    pub fn from_hex(s: &str) -> Option<Self> {
        if s.is_empty() || s.len() > 64 || !s.chars().all(|c| c.is_ascii_hexdigit()) {
            return None;
        }
        let mut limbs = [0u64; 4];
        let bytes = s.as_bytes();
        let mut nibbles = 0usize;
        for &b in bytes.iter().rev() {
            let v = (b as char).to_digit(16).unwrap() as u64;
            limbs[nibbles / 16] |= v << ((nibbles % 16) * 4);
            nibbles += 1;
        }
        Some(Wide256(limbs))
    }
}

/// How object identifiers are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum IdScheme {
    /// Consecutive per issuing party, starting at 0. Predictable.
    Sequential,
    /// Drawn from the run's seeded generator; `width` bits of randomness.
    RandomBits { width: u16 },
}

/// Identifier of an object: generation scheme plus value (up to 256 bits).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ObjectId {
    pub scheme: IdScheme,
    pub value: Wide256,
}

impl ObjectId {
    pub fn sequential(value: u64) -> Self {
        ObjectId {
            scheme: IdScheme::Sequential,
            value: Wide256::from_u64(value),
        }
    }

    pub fn random<R: Rng>(rng: &mut R, width: u16) -> Result<Self, LedgerError> {
        if width == 0 || width > 256 {
            return Err(LedgerError::BadIdWidth(width));
        }
        Ok(ObjectId {
            scheme: IdScheme::RandomBits { width },
            value: Wide256::random_bits(rng, width),
        })
    }

    /// Canonical token: `seq:<decimal>` or `rnd<width>:<hex>`.
    pub fn token(&self) -> String {
        match self.scheme {
            IdScheme::Sequential => format!("seq:{}", self.value.as_u64().expect("seq id fits u64")),
            IdScheme::RandomBits { width } => format!("rnd{width}:{}", self.value.to_hex()),
        }
    }

    pub fn parse_token(tok: &str) -> Option<Self> {
        if let Some(rest) = tok.strip_prefix("seq:") {
            let v = rest.parse::<u64>().ok()?;
            return Some(ObjectId::sequential(v));
        }
        let rest = tok.strip_prefix("rnd")?;
        let (width, hex) = rest.split_once(':')?;
        let width = width.parse::<u16>().ok()?;
        if width == 0 || width > 256 {
            return None;
        }
        Some(ObjectId {
            scheme: IdScheme::RandomBits { width },
            value: Wide256::from_hex(hex)?,
        })
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.token())
    }
}

/// When an object came into existence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CreationTime {
    /// Predetermined: part of the world before the first record.
    Genesis,
    /// Created by the record at this logical time.
    At(u64),
}

/// Who created an object.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Creator {
    System,
    Party(PartyId),
}

/// Descriptor of one object: identity, origin, and scalar attributes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectDescriptor {
    pub object_id: ObjectId,
    pub created_at: CreationTime,
    pub creator: Creator,
    pub attributes: BTreeMap<String, Scalar>,
}

impl ObjectDescriptor {
    pub fn new(
        object_id: ObjectId,
        created_at: CreationTime,
        creator: Creator,
        attributes: BTreeMap<String, Scalar>,
    ) -> Result<Self, LedgerError> {
        let genesis = matches!(created_at, CreationTime::Genesis);
        let system = matches!(creator, Creator::System);
        if genesis != system {
            return Err(LedgerError::DescriptorInvariant(object_id.token()));
        }
        for key in attributes.keys() {
            check_label(key)?;
        }
        Ok(ObjectDescriptor {
            object_id,
            created_at,
            creator,
            attributes,
        })
    }

    pub fn genesis(object_id: ObjectId, attributes: BTreeMap<String, Scalar>) -> Self {
        ObjectDescriptor::new(object_id, CreationTime::Genesis, Creator::System, attributes)
            .expect("genesis descriptor is system-created")
    }
}

// ---------------------------------------------------------------------------
// Scalars and payloads
// ---------------------------------------------------------------------------

/// Attribute values: integers, booleans, or short strings. No floats, so
/// ledger state compares exactly and logs stay byte-stable.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Scalar {
    Int(i64),
    Bool(bool),
    Str(String),
}

impl Scalar {
    pub fn str(s: impl Into<String>) -> Result<Self, LedgerError> {
        let s = s.into();
        let ok = !s.is_empty()
            && s.len() <= MAX_STRING_LEN
            && s.chars()
                .all(|c| c.is_ascii_graphic() && !matches!(c, '|' | ',' | '='));
        if ok {
            Ok(Scalar::Str(s))
        } else {
            Err(LedgerError::InvalidString(s))
        }
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Scalar::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Scalar::Bool(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Scalar::Str(v) => Some(v),
            _ => None,
        }
    }

    /// Canonical typed encoding: `i:<dec>`, `b:<bool>`, `s:<str>`.
    pub fn encode(&self) -> String {
        match self {
            Scalar::Int(v) => format!("i:{v}"),
            Scalar::Bool(v) => format!("b:{v}"),
            Scalar::Str(v) => format!("s:{v}"),
        }
    }

    pub fn decode(tok: &str) -> Option<Self> {
        let (tag, rest) = tok.split_once(':')?;
        match tag {
            "i" => rest.parse().ok().map(Scalar::Int),
            "b" => rest.parse().ok().map(Scalar::Bool),
            "s" => Scalar::str(rest).ok(),
            _ => None,
        }
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.encode())
    }
}

/// The interaction a record describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum PayloadKind {
    Transfer,
    Create,
    Claim,
    Assert,
    ContractInvoke,
}

impl PayloadKind {
    pub fn name(&self) -> &'static str {
        match self {
            PayloadKind::Transfer => "transfer",
            PayloadKind::Create => "create",
            PayloadKind::Claim => "claim",
            PayloadKind::Assert => "assert",
            PayloadKind::ContractInvoke => "contract-invoke",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "transfer" => PayloadKind::Transfer,
            "create" => PayloadKind::Create,
            "claim" => PayloadKind::Claim,
            "assert" => PayloadKind::Assert,
            "contract-invoke" => PayloadKind::ContractInvoke,
            _ => None?,
        })
    }
}

impl fmt::Display for PayloadKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name())
    }
}

/// Structured record payload: a kind plus scalar attributes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Payload {
    pub kind: PayloadKind,
    pub attributes: BTreeMap<String, Scalar>,
}

impl Payload {
    pub fn new(
        kind: PayloadKind,
        attributes: impl IntoIterator<Item = (String, Scalar)>,
    ) -> Result<Self, LedgerError> {
        let attributes: BTreeMap<String, Scalar> = attributes.into_iter().collect();
        for key in attributes.keys() {
            check_label(key)?;
        }
        let p = Payload { kind, attributes };
        p.validate()?;
        Ok(p)
    }

    fn malformed(&self, detail: impl Into<String>) -> LedgerError {
        LedgerError::MalformedPayload {
            kind: self.kind,
            detail: detail.into(),
        }
    }

    fn require_str(&self, key: &str) -> Result<&str, LedgerError> {
        self.attributes
            .get(key)
            .and_then(Scalar::as_str)
            .ok_or_else(|| self.malformed(format!("missing string attribute `{key}`")))
    }

    fn require_int(&self, key: &str) -> Result<i64, LedgerError> {
        self.attributes
            .get(key)
            .and_then(Scalar::as_int)
            .ok_or_else(|| self.malformed(format!("missing integer attribute `{key}`")))
    }

    /// Check the required attributes for this payload kind.
    pub fn validate(&self) -> Result<(), LedgerError> {
        match self.kind {
            PayloadKind::Transfer => {
                let amount = self.require_int("amount")?;
                if amount < 1 {
                    return Err(self.malformed("`amount` must be >= 1"));
                }
                self.require_str("from")?;
                self.require_str("to")?;
            }
            PayloadKind::Create => {
                let tok = self.require_str("object_id")?;
                if ObjectId::parse_token(tok).is_none() {
                    return Err(self.malformed(format!("bad object token {tok:?}")));
                }
            }
            PayloadKind::Claim => {
                let tok = self.require_str("object_id")?;
                if ObjectId::parse_token(tok).is_none() {
                    return Err(self.malformed(format!("bad object token {tok:?}")));
                }
                self.require_str("claimant")?;
            }
            PayloadKind::Assert => {
                self.require_str("property")?;
                if !self.attributes.contains_key("value") {
                    return Err(self.malformed("missing attribute `value`"));
                }
            }
            PayloadKind::ContractInvoke => {
                self.require_str("contract")?;
            }
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&Scalar> {
        self.attributes.get(key)
    }

    /// The object this payload creates or claims, if any.
    pub fn subject_object(&self) -> Option<ObjectId> {
        match self.kind {
            PayloadKind::Create | PayloadKind::Claim => self
                .attributes
                .get("object_id")
                .and_then(Scalar::as_str)
                .and_then(ObjectId::parse_token),
            _ => None,
        }
    }
}

// ---------------------------------------------------------------------------
// Records and sequences
// ---------------------------------------------------------------------------

/// One ledger entry: logical time, involved parties and objects, payload,
/// and the logical signature `(proposer, nonce)` attributing the proposal.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Record {
    pub index: u64,
    pub parties: BTreeSet<PartyId>,
    pub objects: BTreeSet<ObjectId>,
    pub payload: Payload,
    pub proposer: PartyId,
    pub nonce: u64,
}

impl Record {
    /// Proposal identity: what ties a decided record back to its proposal.
    pub fn signature(&self) -> (u64, u64) {
        (self.proposer.id, self.nonce)
    }

    /// Equality ignoring the index, which is stamped at inclusion time.
    pub fn same_proposal(&self, other: &Record) -> bool {
        self.parties == other.parties
            && self.objects == other.objects
            && self.payload == other.payload
            && self.proposer == other.proposer
            && self.nonce == other.nonce
    }

    /// A copy with the index stamped to its position in a chain.
    pub fn at_index(&self, index: u64) -> Record {
        let mut r = self.clone();
        r.index = index;
        r
    }
}

/// Build a record, validating the payload for its kind.
pub fn make_record(
    index: u64,
    parties: impl IntoIterator<Item = PartyId>,
    objects: impl IntoIterator<Item = ObjectId>,
    payload: Payload,
    proposer: PartyId,
    nonce: u64,
) -> Result<Record, LedgerError> {
    payload.validate()?;
    let objects: BTreeSet<ObjectId> = objects.into_iter().collect();
    if let Some(subject) = payload.subject_object() {
        if !objects.contains(&subject) {
            return Err(LedgerError::MalformedPayload {
                kind: payload.kind,
                detail: format!("payload object {} not in the record's object set", subject),
            });
        }
    }
    Ok(Record {
        index,
        parties: parties.into_iter().collect(),
        objects,
        payload,
        proposer,
        nonce,
    })
}

/// An append-only, densely indexed sequence of records.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RecordSequence {
    records: Vec<Record>,
}

impl RecordSequence {
    pub fn new() -> Self {
        RecordSequence::default()
    }

    /// Build from records, checking index density.
    pub fn from_records(records: Vec<Record>) -> Result<Self, LedgerError> {
        for (i, r) in records.iter().enumerate() {
            if r.index != i as u64 {
                return Err(LedgerError::IndexGap {
                    expected: i as u64,
                    got: r.index,
                });
            }
        }
        Ok(RecordSequence { records })
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn get(&self, index: u64) -> Option<&Record> {
        self.records.get(index as usize)
    }

    pub fn last(&self) -> Option<&Record> {
        self.records.last()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Record> {
        self.records.iter()
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    /// The first `n` records as a new sequence.
    pub fn prefix(&self, n: usize) -> RecordSequence {
        RecordSequence {
            records: self.records[..n.min(self.records.len())].to_vec(),
        }
    }

    /// Persistent append: a new sequence one longer, the original untouched.
    pub fn append(&self, r: Record) -> Result<RecordSequence, LedgerError> {
        let mut next = self.clone();
        next.push(r)?;
        Ok(next)
    }

    /// In-place append with the same index check. The only mutating method.
    pub fn push(&mut self, r: Record) -> Result<(), LedgerError> {
        let expected = self.records.len() as u64;
        if r.index != expected {
            return Err(LedgerError::IndexGap {
                expected,
                got: r.index,
            });
        }
        self.records.push(r);
        Ok(())
    }
}

impl<'a> IntoIterator for &'a RecordSequence {
    type Item = &'a Record;
    type IntoIter = std::slice::Iter<'a, Record>;
    fn into_iter(self) -> Self::IntoIter {
        self.records.iter()
    }
}

// ---------------------------------------------------------------------------
// Duplicate transactions
// ---------------------------------------------------------------------------

/// The (spender, object) pairs a record consumes: a transfer spends each of
/// its objects from `from`; a claim stakes each object for `claimant`.
fn spend_keys(r: &Record) -> Vec<(String, ObjectId)> {
    let spender = match r.payload.kind {
        PayloadKind::Transfer => r.payload.get("from").and_then(Scalar::as_str),
        PayloadKind::Claim => r.payload.get("claimant").and_then(Scalar::as_str),
        _ => None,
    };
    match spender {
        Some(s) => r.objects.iter().map(|o| (s.to_string(), *o)).collect(),
        None => Vec::new(),
    }
}

/// True iff an earlier record in `seq` already spends one of the
/// (spender, object) pairs that `r` re-spends. This is the primitive behind
/// duplicate-transaction ("double spending") rejection.
pub fn is_duplicate_transaction(seq: &RecordSequence, r: &Record) -> bool {
    let keys = spend_keys(r);
    if keys.is_empty() {
        return false;
    }
    let upto = match seq.get(r.index) {
        // When r is already part of seq, only records before it count.
        Some(existing) if existing == r => r.index as usize,
        _ => seq.len(),
    };
    seq.records[..upto]
        .iter()
        .any(|prior| spend_keys(prior).iter().any(|k| keys.contains(k)))
}

// ---------------------------------------------------------------------------
// Genesis
// ---------------------------------------------------------------------------

/// Materialize genesis descriptors as the leading records of a chain.
///
/// Genesis records are proposed by the system party and are exempt from the
/// validity monitor: they are part of the protocol, not of any proposal.
pub fn genesis_records(descriptors: &[ObjectDescriptor]) -> Vec<Record> {
    descriptors
        .iter()
        .enumerate()
        .map(|(i, d)| {
            let mut attrs = d.attributes.clone();
            attrs.insert(
                "object_id".to_string(),
                Scalar::str(d.object_id.token()).expect("object token is a valid string"),
            );
            let payload = Payload::new(PayloadKind::Create, attrs).expect("genesis create payload");
            make_record(
                i as u64,
                [],
                [d.object_id],
                payload,
                PartyId::system(),
                i as u64,
            )
            .expect("genesis record")
        })
        .collect()
}
