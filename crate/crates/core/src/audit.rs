//! Append-only, hash-chained event log, one per referendum.
//!
//! ```text
//! hash_i = SHA-256( u64_be(index_i) || lp(kind_i) || lp(payload_i) || prev_hash_i )
//! prev_hash_1 = GENESIS_HASH,  prev_hash_i = hash_{i-1}
//! ```
//!
//! `payload` is canonical JSON (sorted keys, no whitespace). The export is
//! JSON lines; each line must be the canonical serialization of its event,
//! so any change to the stored bytes is caught, not only changes that
//! survive re-parsing.

use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest as _, Sha256};
use thiserror::Error;

pub const LOG_SCHEMA: &str = "pvv-audit-log-v1";

/// `prev_hash` of the first event.
pub const GENESIS_HASH: Digest = Digest([0u8; 32]);

/// A 256-bit digest, serialized as lowercase hex.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Digest(pub [u8; 32]);

impl Digest {
    pub fn of(bytes: &[u8]) -> Self {
        Digest(Sha256::digest(bytes).into())
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl fmt::Debug for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Digest({}..)", &self.to_hex()[..12])
    }
}

impl fmt::Display for Digest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl TryFrom<String> for Digest {
    type Error = String;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        if s.len() != 64 || !s.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f')) {
            return Err(format!("not a lowercase hex sha256 digest: {s:?}"));
        }
        let mut out = [0u8; 32];
        hex::decode_to_slice(&s, &mut out).map_err(|e| e.to_string())?;
        Ok(Digest(out))
    }
}

impl From<Digest> for String {
    fn from(d: Digest) -> Self {
        d.to_hex()
    }
}

/// Hex SHA-256 of arbitrary bytes.
pub fn sha256_hex(bytes: &[u8]) -> String {
    Digest::of(bytes).to_hex()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EventKind {
    PhaseChange,
    /// Payload carries the running count only.
    BallotAccepted,
    PromptPublished,
    VerificationRecorded,
    AbsenteeAck,
    DisputeFiled,
    CorrectionApplied,
    /// An interim audit bundle was published; the log stays open.
    BundlePublished,
    /// The final bundle; nothing may follow.
    BundleSealed,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::PhaseChange => "PhaseChange",
            EventKind::BallotAccepted => "BallotAccepted",
            EventKind::PromptPublished => "PromptPublished",
            EventKind::VerificationRecorded => "VerificationRecorded",
            EventKind::AbsenteeAck => "AbsenteeAck",
            EventKind::DisputeFiled => "DisputeFiled",
            EventKind::CorrectionApplied => "CorrectionApplied",
            EventKind::BundlePublished => "BundlePublished",
            EventKind::BundleSealed => "BundleSealed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditEvent {
    /// Always [`LOG_SCHEMA`]; names the hash scheme too.
    pub schema_id: String,
    pub index: u64,
    pub kind: EventKind,
    pub payload: Value,
    pub prev_hash: Digest,
    pub hash: Digest,
}

impl AuditEvent {
    fn compute_hash(index: u64, kind: EventKind, payload: &Value, prev: &Digest) -> Digest {
        let payload = canonical_json(payload);
        let mut h = Sha256::new();
        h.update(index.to_be_bytes());
        for field in [kind.as_str().as_bytes(), payload.as_bytes()] {
            h.update((field.len() as u64).to_be_bytes());
            h.update(field);
        }
        h.update(prev.0);
        Digest(h.finalize().into())
    }

    pub fn recompute_hash(&self) -> Digest {
        Self::compute_hash(self.index, self.kind, &self.payload, &self.prev_hash)
    }

    /// The canonical JSON line for this event, without the newline.
    pub fn to_line(&self) -> String {
        canonical_json(&serde_json::to_value(self).expect("event serializes"))
    }
}

/// Compact JSON with object keys in sorted order.
pub fn canonical_json(value: &Value) -> String {
    // serde_json's default map is ordered by key.
    serde_json::to_string(value).expect("json values serialize")
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AuditError {
    #[error("audit log is sealed")]
    LogSealed,
}

/// Where and why a chain failed verification. `index` is the 1-based
/// position of the first bad event.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("audit chain broken at event {index}: {reason}")]
pub struct ChainBreak {
    pub index: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuditLog {
    events: Vec<AuditEvent>,
}

impl AuditLog {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn events(&self) -> &[AuditEvent] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn head(&self) -> Digest {
        self.events.last().map_or(GENESIS_HASH, |e| e.hash)
    }

    pub fn is_sealed(&self) -> bool {
        self.events
            .last()
            .is_some_and(|e| e.kind == EventKind::BundleSealed)
    }

    pub fn append(&mut self, kind: EventKind, payload: Value) -> Result<AuditEvent, AuditError> {
        if self.is_sealed() {
            return Err(AuditError::LogSealed);
        }
        let index = self.events.len() as u64 + 1;
        let prev_hash = self.head();
        let hash = AuditEvent::compute_hash(index, kind, &payload, &prev_hash);
        let event = AuditEvent {
            schema_id: LOG_SCHEMA.to_owned(),
            index,
            kind,
            payload,
            prev_hash,
            hash,
        };
        self.events.push(event.clone());
        Ok(event)
    }

    pub fn verify(&self) -> Result<(), ChainBreak> {
        verify_events(&self.events)
    }

    pub fn verify_chain(&self) -> bool {
        self.verify().is_ok()
    }

    pub fn of_kind(&self, kind: EventKind) -> impl Iterator<Item = &AuditEvent> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    /// JSON-lines export, one canonical event per line.
    pub fn to_jsonl(&self) -> String {
        let mut out = String::new();
        for e in &self.events {
            out.push_str(&e.to_line());
            out.push('\n');
        }
        out
    }

    /// Parses and verifies an export. Rejects any line that is not the
    /// canonical form of a well-chained event.
    pub fn from_jsonl(text: &str) -> Result<Self, ChainBreak> {
        Self::from_jsonl_bytes(text.as_bytes())
    }

    /// As [`AuditLog::from_jsonl`], over raw stored bytes.
    pub fn from_jsonl_bytes(bytes: &[u8]) -> Result<Self, ChainBreak> {
        if bytes.is_empty() {
            return Ok(Self::new());
        }
        let Some(body) = bytes.strip_suffix(b"\n") else {
            let index = bytes.split(|b| *b == b'\n').count() as u64;
            return Err(ChainBreak {
                index,
                reason: "missing trailing newline".into(),
            });
        };
        let mut events: Vec<AuditEvent> = Vec::new();
        let mut check = ChainCheck::default();
        for (i, raw) in body.split(|b| *b == b'\n').enumerate() {
            let index = i as u64 + 1;
            let fail = |reason: String| ChainBreak { index, reason };
            let line = std::str::from_utf8(raw).map_err(|e| fail(format!("invalid utf-8: {e}")))?;
            let event: AuditEvent =
                serde_json::from_str(line).map_err(|e| fail(format!("unparseable: {e}")))?;
            if event.to_line() != line {
                return Err(fail("not in canonical form".into()));
            }
            check.step(index, &event)?;
            events.push(event);
        }
        Ok(Self { events })
    }
}

#[derive(Default)]
struct ChainCheck {
    prev: Option<Digest>,
    sealed: bool,
}

impl ChainCheck {
    fn step(&mut self, pos: u64, e: &AuditEvent) -> Result<(), ChainBreak> {
        let fail = |reason: &str| ChainBreak {
            index: pos,
            reason: reason.to_owned(),
        };
        if self.sealed {
            return Err(fail("event after seal"));
        }
        if e.schema_id != LOG_SCHEMA {
            return Err(fail("unknown schema"));
        }
        if e.index != pos {
            return Err(fail("index out of sequence"));
        }
        if e.prev_hash != self.prev.unwrap_or(GENESIS_HASH) {
            return Err(fail("prev_hash does not link"));
        }
        if e.recompute_hash() != e.hash {
            return Err(fail("hash does not recompute"));
        }
        self.sealed = e.kind == EventKind::BundleSealed;
        self.prev = Some(e.hash);
        Ok(())
    }
}

fn verify_events(events: &[AuditEvent]) -> Result<(), ChainBreak> {
    let mut check = ChainCheck::default();
    for (i, e) in events.iter().enumerate() {
        check.step(i as u64 + 1, e)?;
    }
    Ok(())
}

/// Verifies a JSON-lines export; `Ok` carries the chain head.
pub fn verify_jsonl(text: &str) -> Result<Digest, ChainBreak> {
    AuditLog::from_jsonl(text).map(|l| l.head())
}
