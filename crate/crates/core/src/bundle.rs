//! The public audit bundle and tools to check and compare bundles.
//!
//! The bundle's vote table is sorted canonically and carries only
//! `(passphrase, vote)`: no sequence numbers, timestamps or absentee flags,
//! so nothing in it orders ballots against the roster.

use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use similar::{ChangeTag, TextDiff};
use thiserror::Error;

use crate::audit::{canonical_json, Digest};
use crate::dispute::{dispute_report, DisputeRecord, DisputeReport};
use crate::model::{ParticipationRecord, Passphrase, Referendum, ReferendumId, Vote, VoteTable, VoterId};
use crate::prompt::build_prompt;

pub const BUNDLE_SCHEMA: &str = "pvv-audit-bundle-v1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PublishedPair {
    pub passphrase: Passphrase,
    pub vote: Vote,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationRow {
    pub voter_id: VoterId,
    pub attested: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub comment: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AuditBundle {
    pub schema_id: String,
    pub referendum_id: ReferendumId,
    pub date: NaiveDate,
    pub question: String,
    pub eligible_voters: Vec<VoterId>,
    /// Voters who acknowledged casting an absentee ballot.
    pub absentee_voters: Vec<VoterId>,
    /// Eligible voters who neither verified nor acknowledged an absentee
    /// ballot.
    pub non_voters: Vec<VoterId>,
    pub vote_table: Vec<PublishedPair>,
    pub verification_prompt: String,
    pub verification_table: Vec<VerificationRow>,
    pub dispute_summary: DisputeReport,
    pub published_at: DateTime<Utc>,
    pub sealed: bool,
    /// Hash of the log event that published this bundle.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain_head_hash: Option<Digest>,
}

impl AuditBundle {
    /// Sorted-key JSON with a trailing LF.
    pub fn to_canonical_json(&self) -> String {
        let mut s = canonical_json(&serde_json::to_value(self).expect("bundle serializes"));
        s.push('\n');
        s
    }

    /// Digest of the bundle with `chain_head_hash` cleared. This is what the
    /// publishing log event commits to.
    pub fn body_digest(&self) -> Digest {
        let mut body = self.clone();
        body.chain_head_hash = None;
        Digest::of(body.to_canonical_json().as_bytes())
    }

    pub fn tally(&self) -> BTreeMap<Vote, u64> {
        tally_of(&self.vote_table)
    }
}

fn tally_of(pairs: &[PublishedPair]) -> BTreeMap<Vote, u64> {
    let mut t: BTreeMap<Vote, u64> = Vote::ALL.iter().map(|v| (*v, 0)).collect();
    for p in pairs {
        *t.entry(p.vote).or_default() += 1;
    }
    t
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PrivacyViolation {
    #[error("{section} entry {index} has unexpected field {field:?}")]
    ExtraField {
        section: &'static str,
        index: usize,
        field: String,
    },
    #[error("{section} contains a timestamp-like value {value:?}")]
    Timestamp { section: &'static str, value: String },
    #[error("vote table mentions roster identity {0:?}")]
    IdentityInVoteTable(VoterId),
}

/// Everything needed to assemble a bundle.
#[derive(Debug, Clone, Copy)]
pub struct BundleInputs<'a> {
    pub referendum: &'a Referendum,
    /// The effective (post-correction) table.
    pub table: &'a VoteTable,
    pub participation: &'a ParticipationRecord,
    pub disputes: &'a [DisputeRecord],
    pub published_at: DateTime<Utc>,
    pub sealed: bool,
}

/// Builds the bundle and runs the structural privacy check on it. The
/// caller fills in `chain_head_hash` after logging the publication.
pub fn assemble_bundle(inputs: BundleInputs<'_>) -> Result<AuditBundle, PrivacyViolation> {
    let r = inputs.referendum;
    let part = inputs.participation;
    let mut vote_table: Vec<PublishedPair> = inputs
        .table
        .entries()
        .iter()
        .map(|e| PublishedPair {
            passphrase: e.passphrase.clone(),
            vote: e.vote,
        })
        .collect();
    vote_table.sort_by(|a, b| {
        (a.passphrase.normalized(), a.vote, a.passphrase.raw()).cmp(&(
            b.passphrase.normalized(),
            b.vote,
            b.passphrase.raw(),
        ))
    });
    let participated: BTreeSet<&VoterId> =
        part.verified.keys().chain(part.absentee_acks.iter()).collect();
    let bundle = AuditBundle {
        schema_id: BUNDLE_SCHEMA.to_owned(),
        referendum_id: r.referendum_id.clone(),
        date: r.date,
        question: r.question.clone(),
        eligible_voters: r.eligible_voters.iter().cloned().collect(),
        absentee_voters: part.absentee_acks.iter().cloned().collect(),
        non_voters: r
            .eligible_voters
            .iter()
            .filter(|v| !participated.contains(v))
            .cloned()
            .collect(),
        vote_table,
        verification_prompt: build_prompt(inputs.table).render(),
        verification_table: part
            .verified
            .iter()
            .map(|(v, a)| VerificationRow {
                voter_id: v.clone(),
                attested: a.attested,
                comment: a.comment.clone(),
            })
            .collect(),
        dispute_summary: dispute_report(&r.referendum_id, inputs.disputes),
        published_at: inputs.published_at,
        sealed: inputs.sealed,
        chain_head_hash: None,
    };
    privacy_check(&bundle)?;
    Ok(bundle)
}

/// Structural check: ballot rows carry only `(passphrase, vote)`,
/// verification rows only identity and attestation, and neither section
/// holds a timestamp.
pub fn privacy_check(bundle: &AuditBundle) -> Result<(), PrivacyViolation> {
    let v = serde_json::to_value(bundle).expect("bundle serializes");
    check_rows(&v, "vote_table", &["passphrase", "vote"])?;
    check_rows(&v, "verification_table", &["voter_id", "attested", "comment"])?;
    Ok(())
}

/// [`privacy_check`] plus a string scan of the vote table for any roster
/// identity. Returns every finding.
pub fn privacy_scan(bundle: &AuditBundle) -> Vec<PrivacyViolation> {
    let mut out: Vec<PrivacyViolation> = privacy_check(bundle).err().into_iter().collect();
    let section = serde_json::to_string(&bundle.vote_table).expect("vote table serializes");
    let lowered = section.to_lowercase();
    for id in &bundle.eligible_voters {
        if lowered.contains(&id.as_str().to_lowercase()) {
            out.push(PrivacyViolation::IdentityInVoteTable(id.clone()));
        }
    }
    out
}

fn check_rows(v: &Value, section: &'static str, allowed: &[&str]) -> Result<(), PrivacyViolation> {
    let rows = v[section].as_array().map(Vec::as_slice).unwrap_or_default();
    for (index, row) in rows.iter().enumerate() {
        if let Some(obj) = row.as_object() {
            if let Some(field) = obj.keys().find(|k| !allowed.contains(&k.as_str())) {
                return Err(PrivacyViolation::ExtraField {
                    section,
                    index,
                    field: field.clone(),
                });
            }
            for value in obj.values().filter_map(Value::as_str) {
                if looks_like_timestamp(value) {
                    return Err(PrivacyViolation::Timestamp {
                        section,
                        value: value.to_owned(),
                    });
                }
            }
        }
    }
    Ok(())
}

/// `YYYY-MM-DDTHH:MM` anywhere in the string.
pub(crate) fn looks_like_timestamp(s: &str) -> bool {
    const SHAPE: &[u8] = b"dddd-dd-ddTdd:dd";
    let b = s.as_bytes();
    b.windows(SHAPE.len()).any(|w| {
        w.iter().zip(SHAPE).all(|(c, m)| match m {
            b'd' => c.is_ascii_digit(),
            b'T' => *c == b'T' || *c == b' ',
            m => c == m,
        })
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("bundles are for different referenda: {0} vs {1}")]
pub struct ReferendumMismatch(pub ReferendumId, pub ReferendumId);

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "change", rename_all = "snake_case")]
pub enum BundleChange {
    /// Same passphrase, different vote.
    VoteChanged {
        passphrase: Passphrase,
        from: Vote,
        to: Vote,
    },
    EntryAdded(PublishedPair),
    EntryRemoved(PublishedPair),
    Cardinality { before: usize, after: usize },
    TallyChanged { vote: Vote, before: u64, after: u64 },
    PromptLineRemoved(String),
    PromptLineAdded(String),
    Field { name: String, before: Value, after: Value },
}

/// Field-level differences between two bundles of one referendum.
pub fn diff_bundles(
    before: &AuditBundle,
    after: &AuditBundle,
) -> Result<Vec<BundleChange>, ReferendumMismatch> {
    if before.referendum_id != after.referendum_id {
        return Err(ReferendumMismatch(
            before.referendum_id.clone(),
            after.referendum_id.clone(),
        ));
    }
    let mut out = Vec::new();

    // Multiset difference on exact pairs, then pair removed/added lines
    // that share a passphrase into vote changes.
    let mut removed = before.vote_table.clone();
    let mut added = Vec::new();
    for p in &after.vote_table {
        if let Some(i) = removed.iter().position(|q| q == p) {
            removed.remove(i);
        } else {
            added.push(p.clone());
        }
    }
    let mut still_removed = Vec::new();
    for r in removed {
        if let Some(i) = added
            .iter()
            .position(|a| a.passphrase.matches(&r.passphrase))
        {
            let a = added.remove(i);
            out.push(BundleChange::VoteChanged {
                passphrase: r.passphrase,
                from: r.vote,
                to: a.vote,
            });
        } else {
            still_removed.push(r);
        }
    }
    out.extend(still_removed.into_iter().map(BundleChange::EntryRemoved));
    out.extend(added.into_iter().map(BundleChange::EntryAdded));

    if before.vote_table.len() != after.vote_table.len() {
        out.push(BundleChange::Cardinality {
            before: before.vote_table.len(),
            after: after.vote_table.len(),
        });
    }
    let (tb, ta) = (before.tally(), after.tally());
    for v in Vote::ALL {
        if tb[&v] != ta[&v] {
            out.push(BundleChange::TallyChanged {
                vote: v,
                before: tb[&v],
                after: ta[&v],
            });
        }
    }

    let diff = TextDiff::from_lines(&before.verification_prompt, &after.verification_prompt);
    for change in diff.iter_all_changes() {
        let line = change.value().trim_end_matches('\n').to_owned();
        match change.tag() {
            ChangeTag::Delete => out.push(BundleChange::PromptLineRemoved(line)),
            ChangeTag::Insert => out.push(BundleChange::PromptLineAdded(line)),
            ChangeTag::Equal => {}
        }
    }

    let (vb, va) = (
        serde_json::to_value(before).expect("bundle serializes"),
        serde_json::to_value(after).expect("bundle serializes"),
    );
    let skip = ["vote_table", "verification_prompt"];
    let keys: BTreeSet<&String> = vb
        .as_object()
        .into_iter()
        .chain(va.as_object())
        .flat_map(|o| o.keys())
        .collect();
    for k in keys {
        if skip.contains(&k.as_str()) {
            continue;
        }
        let (b, a) = (&vb[k.as_str()], &va[k.as_str()]);
        if b != a {
            out.push(BundleChange::Field {
                name: k.clone(),
                before: b.clone(),
                after: a.clone(),
            });
        }
    }
    Ok(out)
}
