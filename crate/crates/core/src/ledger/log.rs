//! Canonical textual form for records: one line per record,
//! `index|proposer|kind|parties|objects|attributes|nonce`.
//!
//! Set-valued fields are comma-joined in their canonical (sorted) order and
//! attributes are `key=value` pairs with typed scalar encodings, so equal
//! sequences serialize to byte-identical text. Parsing is strict: any
//! deviation reports the offending line number.

use super::{
    make_record, LedgerError, ObjectId, PartyId, Payload, PayloadKind, Record, RecordSequence,
    Scalar,
};

/// Render one record as its canonical log line.
pub fn format_record(r: &Record) -> String {
    let parties = r
        .parties
        .iter()
        .map(PartyId::token)
        .collect::<Vec<_>>()
        .join(",");
    let objects = r
        .objects
        .iter()
        .map(|o| o.token())
        .collect::<Vec<_>>()
        .join(",");
    let attributes = r
        .payload
        .attributes
        .iter()
        .map(|(k, v)| format!("{k}={}", v.encode()))
        .collect::<Vec<_>>()
        .join(",");
    format!(
        "{}|{}|{}|{}|{}|{}|{}",
        r.index,
        r.proposer.token(),
        r.payload.kind.name(),
        parties,
        objects,
        attributes,
        r.nonce
    )
}

/// Render a whole sequence, one line per record, trailing newline included.
pub fn format_sequence(seq: &RecordSequence) -> String {
    let mut out = String::new();
    for r in seq {
        out.push_str(&format_record(r));
        out.push('\n');
    }
    out
}

/// Parse one canonical log line back into a record.
pub fn parse_record(line: &str) -> Result<Record, LedgerError> {
    parse_record_at(line, 1)
}

fn parse_record_at(line: &str, line_no: usize) -> Result<Record, LedgerError> {
    let fields: Vec<&str> = line.split('|').collect();
    if fields.len() != 7 {
        return Err(LedgerError::parse(
            line_no,
            format!("expected 7 '|'-separated fields, found {}", fields.len()),
        ));
    }
    let index = fields[0]
        .parse::<u64>()
        .map_err(|_| LedgerError::parse(line_no, format!("bad index {:?}", fields[0])))?;
    let proposer = PartyId::parse_token(fields[1], line_no)?;
    let kind = PayloadKind::parse(fields[2])
        .ok_or_else(|| LedgerError::parse(line_no, format!("unknown kind {:?}", fields[2])))?;

    let mut parties = Vec::new();
    if !fields[3].is_empty() {
        for tok in fields[3].split(',') {
            parties.push(PartyId::parse_token(tok, line_no)?);
        }
    }

    let mut objects = Vec::new();
    if !fields[4].is_empty() {
        for tok in fields[4].split(',') {
            let obj = ObjectId::parse_token(tok).ok_or_else(|| {
                LedgerError::parse(line_no, format!("bad object token {tok:?}"))
            })?;
            objects.push(obj);
        }
    }

    let mut attributes = Vec::new();
    if !fields[5].is_empty() {
        for pair in fields[5].split(',') {
            let (key, value) = pair.split_once('=').ok_or_else(|| {
                LedgerError::parse(line_no, format!("attribute {pair:?} is not key=value"))
            })?;
            let value = Scalar::decode(value).ok_or_else(|| {
                LedgerError::parse(line_no, format!("bad scalar encoding {value:?}"))
            })?;
            attributes.push((key.to_string(), value));
        }
    }

    let nonce = fields[6]
        .parse::<u64>()
        .map_err(|_| LedgerError::parse(line_no, format!("bad nonce {:?}", fields[6])))?;

    let payload = Payload::new(kind, attributes)
        .map_err(|e| LedgerError::parse(line_no, e.to_string()))?;
    make_record(index, parties, objects, payload, proposer, nonce)
        .map_err(|e| LedgerError::parse(line_no, e.to_string()))
}

/// Parse a full log (as produced by [`format_sequence`]) into a sequence.
pub fn parse_sequence(text: &str) -> Result<RecordSequence, LedgerError> {
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        records.push(parse_record_at(line, i + 1)?);
    }
    RecordSequence::from_records(records)
}
