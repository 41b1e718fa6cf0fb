//! The election aggregate: one referendum's phase machine, ballots,
//! participation, prompt, disputes and audit log.
//!
//! Identity-bearing state (participation) and ballot state (vote table) are
//! separate fields and never reference each other; [`ElectionParts`] keeps
//! them apart for storage.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use thiserror::Error;

use crate::audit::{sha256_hex, AuditError, AuditEvent, AuditLog, ChainBreak, EventKind};
use crate::bundle::{assemble_bundle, looks_like_timestamp, AuditBundle, BundleInputs, PrivacyViolation};
use crate::dispute::{
    adjudicate, dispute_report, AdjudicationOutcome, Classification, ClaimStore, CommitmentProof,
    DisputeClaim, DisputeRecord, DisputeReport,
};
use crate::model::{
    Attestation, BallotEntry, ElectionPhase, ParticipationRecord, Passphrase, Referendum,
    ReferendumId, Role, Token, TokenError, TokenLedger, Vote, VoteTable, VoterId,
};
use crate::prompt::{build_prompt, VerificationPrompt};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ElectionError {
    #[error("cannot move from {from} to {to}")]
    IllegalTransition {
        from: ElectionPhase,
        to: ElectionPhase,
    },
    #[error("{role} may not {action}")]
    UnauthorizedActor { role: Role, action: String },
    #[error("the verification prompt has not been published")]
    PromptNotPublished,
    #[error("the verification prompt is already published")]
    AlreadyPublished,
    #[error("voting is not open")]
    VotingNotOpen,
    #[error("ballot arrived after voting closed")]
    LateVote,
    #[error("token is not valid")]
    InvalidToken,
    #[error("token has already been used")]
    TokenConsumed,
    #[error("commitment mode expects a 64-character lowercase hex digest")]
    NotACommitment,
    #[error("{0} is not approved for absentee voting")]
    NotAbsenteeApproved(VoterId),
    #[error("the absentee cutoff has passed")]
    PastCutoff,
    #[error("{0} is not an eligible voter")]
    IneligibleVoter(VoterId),
    #[error("not available before {0}")]
    NotYetAvailable(ElectionPhase),
    #[error("operation requires phase {expected}, current phase is {actual}")]
    WrongPhase {
        expected: ElectionPhase,
        actual: ElectionPhase,
    },
    #[error("the dispute window is closed")]
    WindowClosed,
    #[error("the dispute window is still open")]
    WindowStillOpen,
    #[error("no claim with id {0}")]
    UnknownClaim(u64),
    #[error("no correctable line for this outcome")]
    NotCorrectable,
    #[error(transparent)]
    Audit(#[from] AuditError),
    #[error(transparent)]
    Privacy(#[from] PrivacyViolation),
    #[error(transparent)]
    Chain(#[from] ChainBreak),
}

impl From<TokenError> for ElectionError {
    fn from(e: TokenError) -> Self {
        match e {
            TokenError::Invalid => ElectionError::InvalidToken,
            TokenError::Consumed => ElectionError::TokenConsumed,
        }
    }
}

/// A correction applied to one ballot, keyed by its sequence number.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppliedCorrection {
    pub claim_id: u64,
    pub seq: u64,
    pub from: Vote,
    pub to: Vote,
}

/// The election's state split by confidentiality.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ElectionParts {
    pub referendum: Referendum,
    pub vote_table: VoteTable,
    pub participation: ParticipationRecord,
    pub audit_log: AuditLog,
    /// The published prompt, current after corrections.
    pub prompt: Option<VerificationPrompt>,
    pub disputes: Vec<DisputeRecord>,
    pub corrections: Vec<AppliedCorrection>,
    pub bundle: Option<AuditBundle>,
    /// Start of the dispute window.
    pub first_published_at: Option<DateTime<Utc>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub from: ElectionPhase,
    pub to: ElectionPhase,
    /// Set when the step published or sealed the bundle.
    pub bundle: Option<AuditBundle>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParticipationReport {
    pub eligible: usize,
    pub verified: Vec<VoterId>,
    pub absentee_acks: Vec<VoterId>,
    pub not_verified: Vec<VoterId>,
    pub ballots: usize,
    /// Ballots differ from the number of voters who verified or
    /// acknowledged an absentee ballot.
    pub count_discrepancy: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Election {
    parts: ElectionParts,
}

/// Chair may run the meeting; everything else is the EA's.
fn may_advance(role: Role, target: ElectionPhase) -> bool {
    use ElectionPhase::*;
    match role {
        Role::Ea => true,
        Role::Chair => matches!(
            target,
            VotingOpen | VotingClosed | VerificationOpen | VerificationClosed
        ),
        _ => false,
    }
}

fn is_commitment_digest(p: &Passphrase) -> bool {
    let r = p.raw();
    r.len() == 64 && r.bytes().all(|b| matches!(b, b'0'..=b'9' | b'a'..=b'f'))
}

impl Election {
    pub fn new(referendum: Referendum) -> Self {
        let rid = referendum.referendum_id.clone();
        let participation = ParticipationRecord::new(referendum.eligible_voters.clone());
        Self {
            parts: ElectionParts {
                referendum,
                vote_table: VoteTable::new(rid),
                participation,
                audit_log: AuditLog::new(),
                prompt: None,
                disputes: Vec::new(),
                corrections: Vec::new(),
                bundle: None,
                first_published_at: None,
            },
        }
    }

    /// Reassembles an election from stored parts. The audit chain must
    /// verify; other parts are taken as stored.
    pub fn from_parts(parts: ElectionParts) -> Result<Self, ElectionError> {
        parts.audit_log.verify()?;
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &ElectionParts {
        &self.parts
    }

    pub fn into_parts(self) -> ElectionParts {
        self.parts
    }

    pub fn referendum(&self) -> &Referendum {
        &self.parts.referendum
    }

    pub fn referendum_id(&self) -> &ReferendumId {
        &self.parts.referendum.referendum_id
    }

    pub fn phase(&self) -> ElectionPhase {
        self.parts.referendum.phase
    }

    pub fn audit_log(&self) -> &AuditLog {
        &self.parts.audit_log
    }

    pub fn vote_table(&self) -> &VoteTable {
        &self.parts.vote_table
    }

    pub fn participation(&self) -> &ParticipationRecord {
        &self.parts.participation
    }

    pub fn prompt(&self) -> Option<&VerificationPrompt> {
        self.parts.prompt.as_ref()
    }

    pub fn bundle(&self) -> Option<&AuditBundle> {
        self.parts.bundle.as_ref()
    }

    pub fn disputes(&self) -> &[DisputeRecord] {
        &self.parts.disputes
    }

    /// Stored table with corrections applied.
    pub fn effective_table(&self) -> VoteTable {
        let fixes: BTreeMap<u64, Vote> = self
            .parts
            .corrections
            .iter()
            .map(|c| (c.seq, c.to))
            .collect();
        self.parts
            .vote_table
            .map_votes(|e| fixes.get(&e.seq).copied().unwrap_or(e.vote))
    }

    fn log(&mut self, kind: EventKind, payload: Value) -> Result<AuditEvent, ElectionError> {
        Ok(self.parts.audit_log.append(kind, payload)?)
    }

    fn require(&self, phase: ElectionPhase) -> Result<(), ElectionError> {
        if self.phase() == phase {
            Ok(())
        } else {
            Err(ElectionError::WrongPhase {
                expected: phase,
                actual: self.phase(),
            })
        }
    }

    fn window_end(&self) -> Option<DateTime<Utc>> {
        self.parts
            .first_published_at
            .map(|t| t + self.parts.referendum.dispute_window())
    }

    pub fn advance_phase(
        &mut self,
        target: ElectionPhase,
        actor: Role,
        now: DateTime<Utc>,
    ) -> Result<Transition, ElectionError> {
        use ElectionPhase::*;
        let from = self.phase();
        if !may_advance(actor, target) {
            return Err(ElectionError::UnauthorizedActor {
                role: actor,
                action: format!("advance to {target}"),
            });
        }
        let skip_absentee = self.parts.referendum.absentee_approved.is_empty();
        if !from.is_successor(target, skip_absentee) {
            return Err(ElectionError::IllegalTransition { from, to: target });
        }
        match target {
            VerificationOpen if self.parts.prompt.is_none() => {
                return Err(ElectionError::PromptNotPublished)
            }
            Final if self.window_end().is_some_and(|end| now <= end) => {
                return Err(ElectionError::WindowStillOpen)
            }
            _ => {}
        }
        if target == VotingClosed {
            self.parts.vote_table.freeze();
        }
        self.log(
            EventKind::PhaseChange,
            json!({"from": from, "to": target, "actor": actor}),
        )?;
        self.parts.referendum.phase = target;
        let bundle = match target {
            Reported | Final => Some(self.publish_bundle(now)?),
            _ => None,
        };
        Ok(Transition {
            from,
            to: target,
            bundle,
        })
    }

    pub fn cast_ballot(
        &mut self,
        ledger: &mut TokenLedger,
        token: &Token,
        passphrase: Passphrase,
        vote: Vote,
        now: DateTime<Utc>,
    ) -> Result<BallotEntry, ElectionError> {
        use ElectionPhase::*;
        let cutoff = self.parts.referendum.absentee_cutoff;
        match self.phase() {
            Setup => return Err(ElectionError::VotingNotOpen),
            AbsenteeOpen | VotingOpen => {}
            _ => return Err(ElectionError::LateVote),
        }
        let state = ledger.check(token)?;
        if state.absentee && now > cutoff {
            return Err(ElectionError::LateVote);
        }
        if self.phase() == AbsenteeOpen && !state.absentee {
            return Err(ElectionError::VotingNotOpen);
        }
        if self.parts.referendum.config.commitment_mode && !is_commitment_digest(&passphrase) {
            return Err(ElectionError::NotACommitment);
        }
        if self.parts.vote_table.is_frozen() {
            return Err(ElectionError::LateVote);
        }
        ledger.consume(token)?;
        let entry = self
            .parts
            .vote_table
            .append(passphrase, vote, now, state.absentee)
            .map_err(|_| ElectionError::LateVote)?
            .clone();
        let ballots = self.parts.vote_table.len();
        self.log(EventKind::BallotAccepted, json!({ "ballots": ballots }))?;
        Ok(entry)
    }

    /// Idempotent; a repeated acknowledgement changes nothing.
    pub fn record_absentee_ack(
        &mut self,
        voter: &VoterId,
        now: DateTime<Utc>,
    ) -> Result<(), ElectionError> {
        if !self.parts.referendum.absentee_approved.contains(voter) {
            return Err(ElectionError::NotAbsenteeApproved(voter.clone()));
        }
        if now > self.parts.referendum.absentee_cutoff || self.phase() >= ElectionPhase::VotingClosed
        {
            return Err(ElectionError::PastCutoff);
        }
        if self.parts.participation.absentee_acks.insert(voter.clone()) {
            let acks = self.parts.participation.absentee_acks.len();
            self.log(EventKind::AbsenteeAck, json!({ "acks": acks }))?;
        }
        Ok(())
    }

    /// Idempotent; the first attestation stands.
    pub fn record_verification(
        &mut self,
        voter: &VoterId,
        attestation: Attestation,
    ) -> Result<(), ElectionError> {
        self.require(ElectionPhase::VerificationOpen)?;
        if !self.parts.referendum.is_eligible(voter) {
            return Err(ElectionError::IneligibleVoter(voter.clone()));
        }
        if self.parts.participation.verified.contains_key(voter) {
            return Ok(());
        }
        if let Some(c) = attestation.comment.as_deref().filter(|c| looks_like_timestamp(c)) {
            return Err(PrivacyViolation::Timestamp {
                section: "verification_table",
                value: c.to_owned(),
            }
            .into());
        }
        self.parts
            .participation
            .verified
            .insert(voter.clone(), attestation);
        let verified = self.parts.participation.verified.len();
        self.log(
            EventKind::VerificationRecorded,
            json!({ "verified": verified }),
        )?;
        Ok(())
    }

    pub fn participation_report(&self) -> Result<ParticipationReport, ElectionError> {
        if self.phase() < ElectionPhase::VerificationClosed {
            return Err(ElectionError::NotYetAvailable(
                ElectionPhase::VerificationClosed,
            ));
        }
        let p = &self.parts.participation;
        let participants: BTreeSet<&VoterId> =
            p.verified.keys().chain(p.absentee_acks.iter()).collect();
        let ballots = self.parts.vote_table.len();
        Ok(ParticipationReport {
            eligible: p.eligible.len(),
            verified: p.verified.keys().cloned().collect(),
            absentee_acks: p.absentee_acks.iter().cloned().collect(),
            not_verified: p
                .eligible
                .iter()
                .filter(|v| !p.verified.contains_key(*v))
                .cloned()
                .collect(),
            ballots,
            count_discrepancy: ballots != participants.len(),
        })
    }

    /// The announced number of accepted ballots.
    pub fn live_count(&self) -> Result<usize, ElectionError> {
        if self.phase() < ElectionPhase::VotingOpen {
            return Err(ElectionError::NotYetAvailable(ElectionPhase::VotingOpen));
        }
        Ok(self.parts.vote_table.len())
    }

    pub fn tally(&self) -> Result<BTreeMap<Vote, u64>, ElectionError> {
        if self.phase() < ElectionPhase::VotingClosed {
            return Err(ElectionError::NotYetAvailable(ElectionPhase::VotingClosed));
        }
        Ok(build_prompt(&self.effective_table()).tally)
    }

    pub fn publish_prompt(&mut self, actor: Role) -> Result<VerificationPrompt, ElectionError> {
        if actor != Role::Ea {
            return Err(ElectionError::UnauthorizedActor {
                role: actor,
                action: "publish the prompt".into(),
            });
        }
        self.require(ElectionPhase::VotingClosed)?;
        if self.parts.prompt.is_some() {
            return Err(ElectionError::AlreadyPublished);
        }
        let prompt = build_prompt(&self.effective_table());
        let text = prompt.render();
        self.log(
            EventKind::PromptPublished,
            json!({
                "entries": prompt.total_listed(),
                "prompt": text,
                "prompt_sha256": sha256_hex(text.as_bytes()),
            }),
        )?;
        self.parts.prompt = Some(prompt.clone());
        Ok(prompt)
    }

    fn publish_bundle(&mut self, now: DateTime<Utc>) -> Result<AuditBundle, ElectionError> {
        let sealed = self.phase() == ElectionPhase::Final;
        let table = self.effective_table();
        let mut bundle = assemble_bundle(BundleInputs {
            referendum: &self.parts.referendum,
            table: &table,
            participation: &self.parts.participation,
            disputes: &self.parts.disputes,
            published_at: now,
            sealed,
        })?;
        let kind = if sealed {
            EventKind::BundleSealed
        } else {
            EventKind::BundlePublished
        };
        let event = self.log(
            kind,
            json!({"bundle_sha256": bundle.body_digest(), "sealed": sealed}),
        )?;
        bundle.chain_head_hash = Some(event.hash);
        self.parts.first_published_at.get_or_insert(now);
        self.parts.bundle = Some(bundle.clone());
        Ok(bundle)
    }

    /// Republishes the bundle during reporting or the dispute window, or
    /// returns the sealed bundle once final.
    pub fn assemble_bundle(&mut self, now: DateTime<Utc>) -> Result<AuditBundle, ElectionError> {
        match self.phase() {
            ElectionPhase::Reported | ElectionPhase::DisputeWindow => self.publish_bundle(now),
            ElectionPhase::Final => Ok(self
                .parts
                .bundle
                .clone()
                .expect("final phase always has a sealed bundle")),
            _ => Err(ElectionError::NotYetAvailable(ElectionPhase::Reported)),
        }
    }

    pub fn file_claim(
        &mut self,
        claims: &mut ClaimStore,
        voter: &VoterId,
        passphrase: Passphrase,
        claimed_vote: Vote,
        commitment_proof: Option<CommitmentProof>,
        now: DateTime<Utc>,
    ) -> Result<DisputeClaim, ElectionError> {
        if self.phase() != ElectionPhase::DisputeWindow {
            return Err(ElectionError::WindowClosed);
        }
        match (self.parts.first_published_at, self.window_end()) {
            (Some(start), Some(end)) if now >= start && now <= end => {}
            _ => return Err(ElectionError::WindowClosed),
        }
        if !self.parts.referendum.is_eligible(voter) {
            return Err(ElectionError::IneligibleVoter(voter.clone()));
        }
        let claim = DisputeClaim {
            claim_id: self.parts.disputes.len() as u64 + 1,
            voter_id: voter.clone(),
            passphrase: passphrase.clone(),
            claimed_vote,
            commitment_proof,
            filed_at: now,
        };
        self.log(
            EventKind::DisputeFiled,
            json!({
                "claim_id": claim.claim_id,
                "passphrase": passphrase.raw(),
                "claimed_vote": claimed_vote,
            }),
        )?;
        self.parts.disputes.push(DisputeRecord {
            claim_id: claim.claim_id,
            passphrase,
            claimed_vote,
            outcome: None,
            corrected: false,
        });
        claims.insert(claim.clone());
        Ok(claim)
    }

    /// Classifies a filed claim against the current prompt and records the
    /// outcome on the anonymized record.
    pub fn adjudicate(
        &mut self,
        claims: &ClaimStore,
        claim_id: u64,
    ) -> Result<AdjudicationOutcome, ElectionError> {
        let claim = claims
            .get(claim_id)
            .ok_or(ElectionError::UnknownClaim(claim_id))?;
        let prompt = self
            .parts
            .prompt
            .as_ref()
            .ok_or(ElectionError::PromptNotPublished)?;
        let commitment = self
            .parts
            .referendum
            .config
            .commitment_mode
            .then_some(&self.parts.referendum.referendum_id);
        let outcome = adjudicate(claim, prompt, commitment);
        let record = self
            .parts
            .disputes
            .iter_mut()
            .find(|r| r.claim_id == claim_id)
            .ok_or(ElectionError::UnknownClaim(claim_id))?;
        record.outcome = Some(outcome.clone());
        Ok(outcome)
    }

    /// Applies the correction carried by a `ValidCorrectable` outcome and
    /// returns the corrected prompt and its log event.
    pub fn apply_correction(
        &mut self,
        claim_id: u64,
        outcome: &AdjudicationOutcome,
    ) -> Result<(VerificationPrompt, AuditEvent), ElectionError> {
        self.require(ElectionPhase::DisputeWindow)?;
        let correction = match (&outcome.classification, &outcome.correction) {
            (Classification::ValidCorrectable, Some(c)) => c,
            _ => return Err(ElectionError::NotCorrectable),
        };
        if !self.parts.disputes.iter().any(|r| r.claim_id == claim_id) {
            return Err(ElectionError::UnknownClaim(claim_id));
        }
        let seq = self
            .effective_table()
            .entries()
            .iter()
            .find(|e| e.passphrase.matches(&correction.passphrase) && e.vote == correction.from)
            .map(|e| e.seq)
            .ok_or(ElectionError::NotCorrectable)?;
        self.parts.corrections.push(AppliedCorrection {
            claim_id,
            seq,
            from: correction.from,
            to: correction.to,
        });
        let prompt = build_prompt(&self.effective_table());
        let text = prompt.render();
        let event = self.log(
            EventKind::CorrectionApplied,
            json!({
                "claim_id": claim_id,
                "passphrase": correction.passphrase.raw(),
                "from": correction.from,
                "to": correction.to,
                "prompt_sha256": sha256_hex(text.as_bytes()),
            }),
        )?;
        self.parts.prompt = Some(prompt.clone());
        if let Some(r) = self.parts.disputes.iter_mut().find(|r| r.claim_id == claim_id) {
            r.corrected = true;
        }
        Ok((prompt, event))
    }

    /// Available once the window has elapsed or the election is final.
    pub fn dispute_report(&self, now: DateTime<Utc>) -> Result<DisputeReport, ElectionError> {
        let done = match self.phase() {
            ElectionPhase::Final => true,
            ElectionPhase::DisputeWindow => self.window_end().is_some_and(|end| now > end),
            _ => false,
        };
        if !done {
            return Err(ElectionError::WindowStillOpen);
        }
        Ok(dispute_report(self.referendum_id(), &self.parts.disputes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ReferendumConfig, ReferendumSpec};
    use chrono::{Duration, NaiveDate};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn t0() -> DateTime<Utc> {
        DateTime::<Utc>::UNIX_EPOCH + Duration::days(20_000)
    }

    fn voters(n: usize) -> Vec<VoterId> {
        (0..n)
            .map(|i| VoterId::new(format!("v{i}@example.org")).unwrap())
            .collect()
    }

    fn election(n: usize, absentee: usize) -> (Election, TokenLedger, Vec<Token>) {
        let vs = voters(n);
        let r = Referendum::new(ReferendumSpec {
            referendum_id: ReferendumId::new("SMITH-OVERALL").unwrap(),
            date: NaiveDate::from_ymd_opt(2020, 10, 1).unwrap(),
            question: "Promote Smith?".into(),
            eligible_voters: vs.iter().cloned().collect(),
            absentee_approved: vs[..absentee].iter().cloned().collect(),
            meeting_start: t0(),
            absentee_cutoff: None,
            config: ReferendumConfig::default(),
        })
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut ledger = TokenLedger::new();
        let tokens: Vec<Token> = (0..n)
            .map(|i| {
                let t = Token::random(&mut rng);
                ledger.insert(t, i < absentee);
                t
            })
            .collect();
        (Election::new(r), ledger, tokens)
    }

    fn pp(s: &str) -> Passphrase {
        Passphrase::new(s).unwrap()
    }

    #[test]
    fn full_lifecycle_with_correction() {
        let (mut e, mut ledger, tokens) = election(3, 0);
        let now = t0();
        e.advance_phase(ElectionPhase::VotingOpen, Role::Chair, now).unwrap();
        let votes = [("frank 99", Vote::No), ("assume jockey", Vote::Yes), ("k b", Vote::Abstain)];
        for (t, (p, v)) in tokens.iter().zip(votes) {
            e.cast_ballot(&mut ledger, t, pp(p), v, now).unwrap();
        }
        assert_eq!(
            e.cast_ballot(&mut ledger, &tokens[0], pp("again"), Vote::Yes, now),
            Err(ElectionError::TokenConsumed)
        );
        assert_eq!(e.live_count().unwrap(), 3);
        assert!(matches!(e.tally(), Err(ElectionError::NotYetAvailable(_))));
        e.advance_phase(ElectionPhase::VotingClosed, Role::Chair, now).unwrap();
        assert_eq!(
            e.advance_phase(ElectionPhase::VerificationOpen, Role::Chair, now),
            Err(ElectionError::PromptNotPublished)
        );
        e.publish_prompt(Role::Ea).unwrap();
        e.advance_phase(ElectionPhase::VerificationOpen, Role::Chair, now).unwrap();
        for v in voters(3) {
            e.record_verification(&v, Attestation::default()).unwrap();
        }
        e.advance_phase(ElectionPhase::VerificationClosed, Role::Chair, now).unwrap();
        assert!(!e.participation_report().unwrap().count_discrepancy);
        let tr = e.advance_phase(ElectionPhase::Reported, Role::Ea, now).unwrap();
        let b1 = tr.bundle.unwrap();
        assert_eq!(b1.chain_head_hash, Some(e.audit_log().head()));
        e.advance_phase(ElectionPhase::DisputeWindow, Role::Ea, now).unwrap();

        let mut claims = ClaimStore::new();
        let later = now + Duration::hours(3);
        let claim = e
            .file_claim(&mut claims, &voters(3)[0], pp("frank 99"), Vote::Yes, None, later)
            .unwrap();
        let outcome = e.adjudicate(&claims, claim.claim_id).unwrap();
        assert_eq!(outcome.classification, Classification::ValidCorrectable);
        let (prompt, event) = e.apply_correction(claim.claim_id, &outcome).unwrap();
        assert_eq!(prompt.stated_tally(Vote::Yes), 2);
        assert_eq!(event.kind, EventKind::CorrectionApplied);
        assert_eq!(
            e.advance_phase(ElectionPhase::Final, Role::Ea, later),
            Err(ElectionError::WindowStillOpen)
        );
        let end = now + Duration::hours(49);
        let report = e.dispute_report(end).unwrap();
        assert_eq!(report.count, 1);
        let tr = e.advance_phase(ElectionPhase::Final, Role::Ea, end).unwrap();
        let b2 = tr.bundle.unwrap();
        assert!(b2.sealed && e.audit_log().is_sealed());
        assert_eq!(b2.tally()[&Vote::Yes], 2);
        assert!(e.audit_log().verify_chain());
        // No identity in any log payload.
        let log = e.audit_log().to_jsonl();
        assert!(!log.contains("@example.org"));
    }

    #[test]
    fn absentee_rules() {
        let (mut e, mut ledger, tokens) = election(3, 1);
        let now = t0() - Duration::hours(3);
        assert_eq!(
            e.cast_ballot(&mut ledger, &tokens[0], pp("a b"), Vote::Yes, now),
            Err(ElectionError::VotingNotOpen)
        );
        assert!(matches!(
            e.advance_phase(ElectionPhase::VotingOpen, Role::Ea, now),
            Err(ElectionError::IllegalTransition { .. })
        ));
        e.advance_phase(ElectionPhase::AbsenteeOpen, Role::Ea, now).unwrap();
        assert_eq!(
            e.cast_ballot(&mut ledger, &tokens[1], pp("early bird"), Vote::Yes, now),
            Err(ElectionError::VotingNotOpen)
        );
        e.cast_ballot(&mut ledger, &tokens[0], pp("absent friend"), Vote::No, now)
            .unwrap();
        e.record_absentee_ack(&voters(3)[0], now).unwrap();
        e.record_absentee_ack(&voters(3)[0], now).unwrap();
        assert_eq!(e.participation().absentee_acks.len(), 1);
        assert!(matches!(
            e.record_absentee_ack(&voters(3)[1], now),
            Err(ElectionError::NotAbsenteeApproved(_))
        ));
        assert_eq!(
            e.record_absentee_ack(&voters(3)[0], t0()),
            Err(ElectionError::PastCutoff)
        );
    }

    #[test]
    fn late_absentee_ballot_rejected() {
        let (mut e, mut ledger, tokens) = election(2, 1);
        e.advance_phase(ElectionPhase::AbsenteeOpen, Role::Ea, t0()).unwrap();
        assert_eq!(
            e.cast_ballot(&mut ledger, &tokens[0], pp("too late"), Vote::Yes, t0()),
            Err(ElectionError::LateVote)
        );
        // The token was not consumed.
        assert!(ledger.check(&tokens[0]).is_ok());
    }

    #[test]
    fn roles_and_illegal_steps() {
        let (mut e, _, _) = election(2, 0);
        assert!(matches!(
            e.advance_phase(ElectionPhase::VotingOpen, Role::Voter, t0()),
            Err(ElectionError::UnauthorizedActor { .. })
        ));
        assert!(matches!(
            e.advance_phase(ElectionPhase::Reported, Role::Chair, t0()),
            Err(ElectionError::UnauthorizedActor { .. })
        ));
        assert!(matches!(
            e.advance_phase(ElectionPhase::VotingClosed, Role::Ea, t0()),
            Err(ElectionError::IllegalTransition { .. })
        ));
        assert!(e.audit_log().is_empty());
    }

    #[test]
    fn from_parts_rejects_tampered_log() {
        let (mut e, _, _) = election(2, 0);
        e.advance_phase(ElectionPhase::VotingOpen, Role::Ea, t0()).unwrap();
        let mut parts = e.clone().into_parts();
        assert!(Election::from_parts(parts.clone()).is_ok());
        let text = parts.audit_log.to_jsonl().replace("VotingOpen", "VotingClosed");
        parts.audit_log = serde_json::from_str(
            &serde_json::to_string(&e.audit_log()).unwrap().replace("VotingOpen", "VotingClosed"),
        )
        .unwrap();
        assert!(Election::from_parts(parts).is_err());
        assert!(AuditLog::from_jsonl(&text).is_err());
    }
}
