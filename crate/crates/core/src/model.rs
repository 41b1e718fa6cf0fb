//! Domain types shared by every part of the election: votes, passphrases,
//! referenda, the phase enumeration, ballot entries and the token ledger.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use chrono::{DateTime, Duration, NaiveDate, Utc};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::passphrase::normalize;

/// Maximum passphrase length, in characters.
pub const MAX_PASSPHRASE_CHARS: usize = 128;

/// Maximum referendum descriptor length.
pub const MAX_REFERENDUM_ID_CHARS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("passphrase is empty")]
    EmptyPassphrase,
    #[error("passphrase exceeds {MAX_PASSPHRASE_CHARS} characters")]
    PassphraseTooLong,
    #[error("passphrase contains a control character")]
    PassphraseControlChar,
    #[error("unknown vote {0:?} (expected YES, NO or ABSTAIN)")]
    UnknownVote(String),
    #[error("invalid referendum id {0:?}")]
    InvalidReferendumId(String),
    #[error("invalid voter id {0:?}")]
    InvalidVoterId(String),
    #[error("invalid token {0:?}")]
    InvalidToken(String),
    #[error("absentee voter {0} is not on the eligibility roster")]
    AbsenteeNotEligible(VoterId),
    #[error("absentee cutoff must precede the meeting start")]
    CutoffAfterMeeting,
    #[error("eligibility roster is empty")]
    EmptyRoster,
    #[error("unknown phase {0:?}")]
    UnknownPhase(String),
}

/// A cast vote. `Abstain` is a vote, distinct from not voting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Vote {
    #[serde(rename = "YES")]
    Yes,
    #[serde(rename = "NO")]
    No,
    #[serde(rename = "ABSTAIN")]
    Abstain,
}

impl Vote {
    /// Prompt group order.
    pub const ALL: [Vote; 3] = [Vote::Yes, Vote::No, Vote::Abstain];

    pub fn as_str(self) -> &'static str {
        match self {
            Vote::Yes => "YES",
            Vote::No => "NO",
            Vote::Abstain => "ABSTAIN",
        }
    }
}

impl fmt::Display for Vote {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Vote {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "YES" => Ok(Vote::Yes),
            "NO" => Ok(Vote::No),
            "ABSTAIN" => Ok(Vote::Abstain),
            _ => Err(ModelError::UnknownVote(s.to_owned())),
        }
    }
}

/// A voter-chosen passphrase. Keeps the text as entered and its canonical
/// comparison form.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Passphrase {
    raw: String,
    normalized: String,
}

impl Passphrase {
    pub fn new(raw: impl Into<String>) -> Result<Self, ModelError> {
        let raw = raw.into();
        if raw.trim().is_empty() {
            return Err(ModelError::EmptyPassphrase);
        }
        if raw.chars().count() > MAX_PASSPHRASE_CHARS {
            return Err(ModelError::PassphraseTooLong);
        }
        // Line-oriented artifacts (prompt text, CSV) cannot carry these.
        if raw.chars().any(char::is_control) {
            return Err(ModelError::PassphraseControlChar);
        }
        let normalized = normalize(&raw);
        Ok(Self { raw, normalized })
    }

    pub fn raw(&self) -> &str {
        &self.raw
    }

    pub fn normalized(&self) -> &str {
        &self.normalized
    }

    /// Canonical equality: the comparison voters make when looking for
    /// their line.
    pub fn matches(&self, other: &Passphrase) -> bool {
        self.normalized == other.normalized
    }
}

impl fmt::Display for Passphrase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.raw)
    }
}

impl TryFrom<String> for Passphrase {
    type Error = ModelError;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        Passphrase::new(value)
    }
}

impl From<Passphrase> for String {
    fn from(value: Passphrase) -> Self {
        value.raw
    }
}

impl FromStr for Passphrase {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Passphrase::new(s)
    }
}

/// Short unique descriptor of a referendum, e.g. `SMITH-OVERALL`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct ReferendumId(String);

impl ReferendumId {
    pub fn new(id: impl Into<String>) -> Result<Self, ModelError> {
        let id = id.into();
        let ok = !id.is_empty()
            && id.chars().count() <= MAX_REFERENDUM_ID_CHARS
            && id
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'));
        if ok {
            Ok(Self(id))
        } else {
            Err(ModelError::InvalidReferendumId(id))
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ReferendumId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for ReferendumId {
    type Error = ModelError;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        ReferendumId::new(value)
    }
}

impl From<ReferendumId> for String {
    fn from(value: ReferendumId) -> Self {
        value.0
    }
}

impl FromStr for ReferendumId {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ReferendumId::new(s)
    }
}

/// A voter identity as asserted by the authenticator (e.g. an SSO login).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct VoterId(String);

impl VoterId {
    pub fn new(id: impl Into<String>) -> Result<Self, ModelError> {
        let id = id.into();
        if id.trim().is_empty() || id.trim() != id || id.chars().any(char::is_control) {
            return Err(ModelError::InvalidVoterId(id));
        }
        Ok(Self(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for VoterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl TryFrom<String> for VoterId {
    type Error = ModelError;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        VoterId::new(value)
    }
}

impl From<VoterId> for String {
    fn from(value: VoterId) -> Self {
        value.0
    }
}

impl FromStr for VoterId {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        VoterId::new(s)
    }
}

/// Parties that act on an election.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Role {
    Voter,
    #[serde(rename = "EA")]
    Ea,
    Chair,
    T2,
    Panel,
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Role::Voter => "Voter",
            Role::Ea => "EA",
            Role::Chair => "Chair",
            Role::T2 => "T2",
            Role::Panel => "Panel",
        };
        f.write_str(s)
    }
}

/// Election phases, in canonical order. `AbsenteeOpen` is skipped when no
/// voter is approved to vote absentee. No phase is ever re-entered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ElectionPhase {
    Setup,
    AbsenteeOpen,
    VotingOpen,
    VotingClosed,
    VerificationOpen,
    VerificationClosed,
    Reported,
    DisputeWindow,
    Final,
}

impl ElectionPhase {
    pub const ALL: [ElectionPhase; 9] = [
        ElectionPhase::Setup,
        ElectionPhase::AbsenteeOpen,
        ElectionPhase::VotingOpen,
        ElectionPhase::VotingClosed,
        ElectionPhase::VerificationOpen,
        ElectionPhase::VerificationClosed,
        ElectionPhase::Reported,
        ElectionPhase::DisputeWindow,
        ElectionPhase::Final,
    ];

    /// The next phase in canonical order.
    pub fn next(self) -> Option<ElectionPhase> {
        let i = ElectionPhase::ALL.iter().position(|p| *p == self)?;
        ElectionPhase::ALL.get(i + 1).copied()
    }

    /// Whether `target` immediately follows `self`. `skip_absentee` permits
    /// `Setup -> VotingOpen`.
    pub fn is_successor(self, target: ElectionPhase, skip_absentee: bool) -> bool {
        self.next() == Some(target)
            || (skip_absentee
                && self == ElectionPhase::Setup
                && target == ElectionPhase::VotingOpen)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ElectionPhase::Setup => "Setup",
            ElectionPhase::AbsenteeOpen => "AbsenteeOpen",
            ElectionPhase::VotingOpen => "VotingOpen",
            ElectionPhase::VotingClosed => "VotingClosed",
            ElectionPhase::VerificationOpen => "VerificationOpen",
            ElectionPhase::VerificationClosed => "VerificationClosed",
            ElectionPhase::Reported => "Reported",
            ElectionPhase::DisputeWindow => "DisputeWindow",
            ElectionPhase::Final => "Final",
        }
    }
}

impl fmt::Display for ElectionPhase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ElectionPhase {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ElectionPhase::ALL
            .iter()
            .copied()
            .find(|p| p.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| ModelError::UnknownPhase(s.to_owned()))
    }
}

/// Per-referendum options.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReferendumConfig {
    /// Ballots carry a hash commitment instead of a memorable phrase.
    pub commitment_mode: bool,
    pub dispute_window_hours: u32,
    /// Minutes before the meeting start at which absentee voting closes,
    /// used when no explicit cutoff is given.
    pub absentee_cutoff_minutes: u32,
    /// Embed the rendered prompt in verification notifications.
    pub embed_prompt: bool,
}

impl Default for ReferendumConfig {
    fn default() -> Self {
        Self {
            commitment_mode: false,
            dispute_window_hours: 48,
            absentee_cutoff_minutes: 60,
            embed_prompt: true,
        }
    }
}

/// Input for creating a referendum. `absentee_cutoff` defaults to
/// `meeting_start - config.absentee_cutoff_minutes`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferendumSpec {
    pub referendum_id: ReferendumId,
    pub date: NaiveDate,
    pub question: String,
    pub eligible_voters: BTreeSet<VoterId>,
    #[serde(default)]
    pub absentee_approved: BTreeSet<VoterId>,
    pub meeting_start: DateTime<Utc>,
    #[serde(default)]
    pub absentee_cutoff: Option<DateTime<Utc>>,
    #[serde(default)]
    pub config: ReferendumConfig,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Referendum {
    pub referendum_id: ReferendumId,
    pub date: NaiveDate,
    pub question: String,
    pub eligible_voters: BTreeSet<VoterId>,
    pub absentee_approved: BTreeSet<VoterId>,
    pub meeting_start: DateTime<Utc>,
    pub absentee_cutoff: DateTime<Utc>,
    pub phase: ElectionPhase,
    pub config: ReferendumConfig,
}

impl Referendum {
    pub fn new(spec: ReferendumSpec) -> Result<Self, ModelError> {
        if spec.eligible_voters.is_empty() {
            return Err(ModelError::EmptyRoster);
        }
        if let Some(v) = spec
            .absentee_approved
            .iter()
            .find(|v| !spec.eligible_voters.contains(*v))
        {
            return Err(ModelError::AbsenteeNotEligible(v.clone()));
        }
        let cutoff = spec.absentee_cutoff.unwrap_or_else(|| {
            spec.meeting_start - Duration::minutes(i64::from(spec.config.absentee_cutoff_minutes))
        });
        if cutoff >= spec.meeting_start {
            return Err(ModelError::CutoffAfterMeeting);
        }
        Ok(Self {
            referendum_id: spec.referendum_id,
            date: spec.date,
            question: spec.question,
            eligible_voters: spec.eligible_voters,
            absentee_approved: spec.absentee_approved,
            meeting_start: spec.meeting_start,
            absentee_cutoff: cutoff,
            phase: ElectionPhase::Setup,
            config: spec.config,
        })
    }

    pub fn is_eligible(&self, voter: &VoterId) -> bool {
        self.eligible_voters.contains(voter)
    }

    pub fn dispute_window(&self) -> Duration {
        Duration::hours(i64::from(self.config.dispute_window_hours))
    }
}

/// One anonymous `(P, V)` pair. Holds no voter identity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallotEntry {
    pub passphrase: Passphrase,
    pub vote: Vote,
    pub seq: u64,
    /// Internal only; never published.
    pub submitted_at: DateTime<Utc>,
    /// Internal only; never published.
    pub absentee: bool,
}

/// The raw table of accepted ballots, in submission order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VoteTable {
    pub referendum_id: ReferendumId,
    entries: Vec<BallotEntry>,
    frozen: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("vote table is frozen")]
pub struct TableFrozen;

impl VoteTable {
    pub fn new(referendum_id: ReferendumId) -> Self {
        Self {
            referendum_id,
            entries: Vec::new(),
            frozen: false,
        }
    }

    /// Builds a table from bare pairs, numbering them in order. Used for
    /// spreadsheet imports and offline prompt construction.
    pub fn from_pairs(
        referendum_id: ReferendumId,
        pairs: impl IntoIterator<Item = (Passphrase, Vote)>,
    ) -> Self {
        let epoch = DateTime::<Utc>::UNIX_EPOCH;
        let entries = pairs
            .into_iter()
            .enumerate()
            .map(|(i, (passphrase, vote))| BallotEntry {
                passphrase,
                vote,
                seq: i as u64 + 1,
                submitted_at: epoch,
                absentee: false,
            })
            .collect();
        Self {
            referendum_id,
            entries,
            frozen: true,
        }
    }

    pub fn entries(&self) -> &[BallotEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    pub fn last_seq(&self) -> u64 {
        self.entries.last().map_or(0, |e| e.seq)
    }

    pub fn append(
        &mut self,
        passphrase: Passphrase,
        vote: Vote,
        submitted_at: DateTime<Utc>,
        absentee: bool,
    ) -> Result<&BallotEntry, TableFrozen> {
        if self.frozen {
            return Err(TableFrozen);
        }
        let seq = self.last_seq() + 1;
        self.entries.push(BallotEntry {
            passphrase,
            vote,
            seq,
            submitted_at,
            absentee,
        });
        Ok(self.entries.last().expect("just pushed"))
    }

    pub fn freeze(&mut self) {
        self.frozen = true;
    }

    /// Frozen copy with each entry's vote replaced by `f(entry)`.
    pub fn map_votes(&self, f: impl Fn(&BallotEntry) -> Vote) -> VoteTable {
        let entries = self
            .entries
            .iter()
            .map(|e| BallotEntry {
                vote: f(e),
                ..e.clone()
            })
            .collect();
        VoteTable {
            referendum_id: self.referendum_id.clone(),
            entries,
            frozen: true,
        }
    }

    /// Unchecked access; bypasses sequencing and the freeze. Models an
    /// insider editing the stored table.
    pub fn entries_mut(&mut self) -> &mut Vec<BallotEntry> {
        &mut self.entries
    }

    pub fn pairs(&self) -> impl Iterator<Item = (&Passphrase, Vote)> + '_ {
        self.entries.iter().map(|e| (&e.passphrase, e.vote))
    }
}

/// Verification-form response. The form records identity plus the
/// attestation "I found my pair and the tally is correct".
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Attestation {
    pub attested: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
}

impl Default for Attestation {
    fn default() -> Self {
        Self {
            attested: true,
            comment: None,
        }
    }
}

/// Identified participation: who verified and who acknowledged an
/// absentee vote. Never linked to ballots.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParticipationRecord {
    pub eligible: BTreeSet<VoterId>,
    pub verified: BTreeMap<VoterId, Attestation>,
    pub absentee_acks: BTreeSet<VoterId>,
}

impl ParticipationRecord {
    pub fn new(eligible: BTreeSet<VoterId>) -> Self {
        Self {
            eligible,
            verified: BTreeMap::new(),
            absentee_acks: BTreeSet::new(),
        }
    }

    pub fn verified_set(&self) -> BTreeSet<VoterId> {
        self.verified.keys().cloned().collect()
    }
}

/// Opaque 128-bit one-time voting token.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Token([u8; 16]);

impl Token {
    pub fn random(rng: &mut impl RngCore) -> Self {
        let mut bytes = [0u8; 16];
        rng.fill_bytes(&mut bytes);
        Self(bytes)
    }

    pub fn from_bytes(bytes: [u8; 16]) -> Self {
        Self(bytes)
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl FromStr for Token {
    type Err = ModelError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut bytes = [0u8; 16];
        if s.len() != 32 || s.bytes().any(|b| b.is_ascii_uppercase()) {
            return Err(ModelError::InvalidToken(s.to_owned()));
        }
        hex::decode_to_slice(s, &mut bytes).map_err(|_| ModelError::InvalidToken(s.to_owned()))?;
        Ok(Self(bytes))
    }
}

impl TryFrom<String> for Token {
    type Error = ModelError;
    fn try_from(value: String) -> Result<Self, Self::Error> {
        value.parse()
    }
}

impl From<Token> for String {
    fn from(value: Token) -> Self {
        value.to_hex()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenState {
    pub absentee: bool,
    pub consumed: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum TokenError {
    #[error("token is not valid for this referendum")]
    Invalid,
    #[error("token has already been used")]
    Consumed,
}

/// Tokens keyed by value only. Contains no voter identity.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenLedger {
    tokens: BTreeMap<Token, TokenState>,
}

impl TokenLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, token: Token, absentee: bool) {
        self.tokens.insert(
            token,
            TokenState {
                absentee,
                consumed: false,
            },
        );
    }

    pub fn get(&self, token: &Token) -> Option<TokenState> {
        self.tokens.get(token).copied()
    }

    /// Validates an unconsumed token without consuming it.
    pub fn check(&self, token: &Token) -> Result<TokenState, TokenError> {
        match self.tokens.get(token) {
            None => Err(TokenError::Invalid),
            Some(s) if s.consumed => Err(TokenError::Consumed),
            Some(s) => Ok(*s),
        }
    }

    /// Check-and-set. Returns the state before consumption.
    pub fn consume(&mut self, token: &Token) -> Result<TokenState, TokenError> {
        let state = self.tokens.get_mut(token).ok_or(TokenError::Invalid)?;
        if state.consumed {
            return Err(TokenError::Consumed);
        }
        let before = *state;
        state.consumed = true;
        Ok(before)
    }

    pub fn consumed_count(&self) -> usize {
        self.tokens.values().filter(|s| s.consumed).count()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> impl Iterator<Item = (&Token, &TokenState)> {
        self.tokens.iter()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vote_parses_case_insensitively() {
        assert_eq!("yes".parse::<Vote>().unwrap(), Vote::Yes);
        assert_eq!(" Abstain ".parse::<Vote>().unwrap(), Vote::Abstain);
        assert!("maybe".parse::<Vote>().is_err());
    }

    #[test]
    fn vote_order_matches_prompt_groups() {
        let mut v = vec![Vote::Abstain, Vote::Yes, Vote::No];
        v.sort();
        assert_eq!(v, Vote::ALL);
    }

    #[test]
    fn passphrase_rules() {
        assert_eq!(Passphrase::new("   "), Err(ModelError::EmptyPassphrase));
        assert_eq!(
            Passphrase::new("a".repeat(129)),
            Err(ModelError::PassphraseTooLong)
        );
        assert!(Passphrase::new("a".repeat(128)).is_ok());
        assert_eq!(
            Passphrase::new("two\nlines"),
            Err(ModelError::PassphraseControlChar)
        );
        let p = Passphrase::new("FRANK  99").unwrap();
        assert_eq!(p.raw(), "FRANK  99");
        assert_eq!(p.normalized(), "frank 99");
    }

    #[test]
    fn phase_successors() {
        use ElectionPhase::*;
        assert!(Setup.is_successor(AbsenteeOpen, false));
        assert!(!Setup.is_successor(VotingOpen, false));
        assert!(Setup.is_successor(VotingOpen, true));
        assert!(!VotingOpen.is_successor(VerificationOpen, true));
        assert!(!VotingClosed.is_successor(VotingOpen, true));
        assert_eq!(Final.next(), None);
    }

    #[test]
    fn token_hex_roundtrip_is_strict() {
        let t = Token::from_bytes([0xab; 16]);
        assert_eq!(t.to_hex().parse::<Token>().unwrap(), t);
        assert!(t.to_hex().to_uppercase().parse::<Token>().is_err());
        assert!("abcd".parse::<Token>().is_err());
    }

    #[test]
    fn ledger_consumes_once() {
        let mut ledger = TokenLedger::new();
        let t = Token::from_bytes([1; 16]);
        ledger.insert(t, false);
        assert!(ledger.consume(&t).is_ok());
        assert_eq!(ledger.consume(&t), Err(TokenError::Consumed));
        assert_eq!(
            ledger.consume(&Token::from_bytes([2; 16])),
            Err(TokenError::Invalid)
        );
        assert_eq!(ledger.consumed_count(), 1);
    }

    #[test]
    fn frozen_table_rejects_appends() {
        let mut t = VoteTable::new(ReferendumId::new("R").unwrap());
        let now = Utc::now();
        t.append(Passphrase::new("a b").unwrap(), Vote::Yes, now, false)
            .unwrap();
        t.freeze();
        assert_eq!(
            t.append(Passphrase::new("c d").unwrap(), Vote::No, now, false)
                .unwrap_err(),
            TableFrozen
        );
    }
}
