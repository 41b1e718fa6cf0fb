//! Dispute intake, classification and anonymized reporting.
//!
//! A claimant reveals their identity and `(P, V)` to the Adjudication Panel.
//! Identities live only in the confidential [`ClaimStore`]; the election
//! keeps anonymized [`DisputeRecord`]s and the audit log names the pair,
//! never the person.

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::model::{Passphrase, ReferendumId, Vote, VoterId};
use crate::passphrase::{verify_commitment, Commitment, COMMITMENT_SCHEME};
use crate::prompt::{find_pair, VerificationPrompt};

pub const REPORT_SCHEMA: &str = "pvv-dispute-report-v1";

/// Reveal of a commitment-mode ballot: the secret and the vote it binds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CommitmentProof {
    pub secret: String,
    pub vote: Vote,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisputeClaim {
    pub claim_id: u64,
    pub voter_id: VoterId,
    pub passphrase: Passphrase,
    pub claimed_vote: Vote,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub commitment_proof: Option<CommitmentProof>,
    pub filed_at: DateTime<Utc>,
}

/// Confidential claim store, readable by the Adjudication Panel only.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClaimStore {
    claims: Vec<DisputeClaim>,
}

impl ClaimStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, claim: DisputeClaim) {
        self.claims.push(claim);
    }

    pub fn get(&self, claim_id: u64) -> Option<&DisputeClaim> {
        self.claims.iter().find(|c| c.claim_id == claim_id)
    }

    pub fn claims(&self) -> &[DisputeClaim] {
        &self.claims
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Classification {
    /// The prompt lists `(P, V')` with `V' != V`; the vote can be fixed.
    ValidCorrectable,
    /// `P` is missing (or ambiguous); the claim can be neither refuted nor
    /// corrected.
    UnresolvableDiscreditation,
    /// The claimed pair is already listed.
    Invalid,
}

impl Classification {
    pub fn nature(self) -> &'static str {
        match self {
            Classification::ValidCorrectable => "changed V",
            Classification::UnresolvableDiscreditation => "pair not listed",
            Classification::Invalid => "pair already listed",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Correction {
    pub passphrase: Passphrase,
    pub from: Vote,
    pub to: Vote,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdjudicationOutcome {
    pub classification: Classification,
    /// Present iff `ValidCorrectable`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub correction: Option<Correction>,
    /// A commitment proof verified against the published line.
    #[serde(default)]
    pub proven: bool,
    pub rationale: String,
}

/// Classifies a claim against a prompt. `commitment_referendum` is the
/// referendum id when the referendum runs in commitment mode.
pub fn adjudicate(
    claim: &DisputeClaim,
    prompt: &VerificationPrompt,
    commitment_referendum: Option<&ReferendumId>,
) -> AdjudicationOutcome {
    let hits = find_pair(prompt, &claim.passphrase);
    let mismatched: Vec<Vote> = hits
        .iter()
        .map(|(v, _)| *v)
        .filter(|v| *v != claim.claimed_vote)
        .collect();
    let p = claim.passphrase.raw();
    let v = claim.claimed_vote;

    let (classification, correction, mut rationale) = match (hits.len(), mismatched.as_slice()) {
        (0, _) => (
            Classification::UnresolvableDiscreditation,
            None,
            format!("passphrase {p:?} does not appear in the prompt"),
        ),
        (1, []) => (
            Classification::Invalid,
            None,
            format!("the prompt already lists ({p}, {v})"),
        ),
        (1, [old]) => (
            Classification::ValidCorrectable,
            Some(Correction {
                passphrase: claim.passphrase.clone(),
                from: *old,
                to: v,
            }),
            format!("the prompt lists ({p}, {old}); claimant states {v}"),
        ),
        (n, [old]) => (
            Classification::ValidCorrectable,
            Some(Correction {
                passphrase: claim.passphrase.clone(),
                from: *old,
                to: v,
            }),
            format!("{n} lines carry {p:?}; exactly one ({old}) differs from {v}"),
        ),
        (n, rest) => (
            Classification::UnresolvableDiscreditation,
            None,
            format!(
                "{n} lines carry {p:?} and {} differ from {v}; no single line can be corrected",
                rest.len()
            ),
        ),
    };

    let mut proven = false;
    if let (Some(rid), Some(proof)) = (commitment_referendum, &claim.commitment_proof) {
        let c = Commitment {
            digest: claim.passphrase.normalized().to_owned(),
            scheme_id: COMMITMENT_SCHEME.to_owned(),
        };
        let ok = proof.vote == claim.claimed_vote
            && verify_commitment(&c, proof.secret.as_bytes(), proof.vote, rid).unwrap_or(false);
        if ok {
            proven = true;
            rationale.push_str("; proven: the revealed secret binds the passphrase to the claimed vote");
        } else {
            rationale.push_str("; the commitment proof did not verify");
        }
    }

    AdjudicationOutcome {
        classification,
        correction,
        proven,
        rationale,
    }
}

/// Anonymized view of a claim kept with the election.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisputeRecord {
    pub claim_id: u64,
    pub passphrase: Passphrase,
    pub claimed_vote: Vote,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcome: Option<AdjudicationOutcome>,
    #[serde(default)]
    pub corrected: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportEntry {
    pub claim_id: u64,
    pub nature: String,
    pub classification: Option<Classification>,
    pub resolved: bool,
    pub resolution: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisputeReport {
    pub schema_id: String,
    pub referendum_id: ReferendumId,
    pub count: usize,
    pub claims: Vec<ReportEntry>,
    pub summary: String,
}

pub fn dispute_report(referendum_id: &ReferendumId, records: &[DisputeRecord]) -> DisputeReport {
    let claims: Vec<ReportEntry> = records
        .iter()
        .map(|r| {
            let class = r.outcome.as_ref().map(|o| o.classification);
            let (resolved, resolution) = match (class, r.outcome.as_ref()) {
                (Some(Classification::ValidCorrectable), Some(o)) if r.corrected => {
                    let c = o.correction.as_ref().expect("valid outcome carries a correction");
                    (true, format!("vote corrected from {} to {}", c.from, c.to))
                }
                (Some(Classification::ValidCorrectable), _) => {
                    (false, "correction pending".to_owned())
                }
                (Some(Classification::Invalid), _) => {
                    (true, "dismissed; pair already listed".to_owned())
                }
                (Some(Classification::UnresolvableDiscreditation), _) => (
                    false,
                    "cannot be corrected; referred to the Adjudication Panel".to_owned(),
                ),
                (None, _) => (false, "not yet adjudicated".to_owned()),
            };
            ReportEntry {
                claim_id: r.claim_id,
                nature: class.map_or("unclassified", Classification::nature).to_owned(),
                classification: class,
                resolved,
                resolution,
            }
        })
        .collect();
    let summary = if claims.is_empty() {
        "There were no uses of the adjudication protocol.".to_owned()
    } else {
        format!(
            "{} claim(s) received, {} resolved.",
            claims.len(),
            claims.iter().filter(|c| c.resolved).count()
        )
    };
    DisputeReport {
        schema_id: REPORT_SCHEMA.to_owned(),
        referendum_id: referendum_id.clone(),
        count: claims.len(),
        claims,
        summary,
    }
}
