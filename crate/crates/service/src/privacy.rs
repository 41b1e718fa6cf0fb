//! Identity-separation scan over stored state.
//!
//! Reads the election namespace with the EA's access and the registrar
//! namespace as the registrar, then looks for any record that would let a
//! reader tie a voter to a ballot or a token.

use pvv_core::bundle::privacy_scan;
use pvv_core::{AuditBundle, ReferendumId, Role, VoterId};
use serde::Serialize;

use crate::service::{record_key, records};
use crate::store::{Namespace, Principal, Store, StoreError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Finding {
    pub namespace: String,
    pub key: String,
    pub detail: String,
}

/// Election records that must never name a voter.
const BALLOT_RECORDS: [&str; 5] = [
    records::VOTE_TABLE,
    records::PROMPT,
    records::AUDIT_LOG,
    records::DISPUTES,
    records::CORRECTIONS,
];

pub fn scan_identity_separation(
    store: &Store,
    rid: &ReferendumId,
    roster: &[VoterId],
) -> Result<Vec<Finding>, StoreError> {
    let mut out = Vec::new();
    let prefix = format!("{rid}/");
    let election = store.scan(Principal::Role(Role::Ea), Namespace::Election, &prefix)?;
    let registrar = store.scan(Principal::Registrar, Namespace::Registrar, &prefix)?;

    let token_prefix = format!("{rid}/token/");
    let tokens: Vec<String> = registrar
        .iter()
        .filter_map(|(k, _)| k.strip_prefix(&token_prefix).map(str::to_owned))
        .collect();
    let ids: Vec<String> = roster.iter().map(|v| v.as_str().to_lowercase()).collect();
    let mut push = |ns: &str, key: &str, detail: String| {
        out.push(Finding {
            namespace: ns.to_owned(),
            key: key.to_owned(),
            detail,
        })
    };

    for (key, value) in &election {
        let text = String::from_utf8_lossy(value).to_lowercase();
        for t in &tokens {
            if text.contains(t.as_str()) || key.contains(t.as_str()) {
                push("election", key, format!("contains token {t}"));
            }
        }
        let record = key.strip_prefix(&prefix).unwrap_or(key);
        if BALLOT_RECORDS.contains(&record) {
            for id in &ids {
                if text.contains(id.as_str()) {
                    push("election", key, format!("ballot record names {id}"));
                }
            }
        }
        if record == records::BUNDLE {
            match serde_json::from_slice::<AuditBundle>(value) {
                Ok(b) => {
                    for v in privacy_scan(&b) {
                        push("election", key, v.to_string());
                    }
                }
                Err(e) => push("election", key, format!("unreadable bundle: {e}")),
            }
        }
    }

    for (key, value) in &registrar {
        let text = format!("{key}\n{}", String::from_utf8_lossy(value)).to_lowercase();
        let is_token = key.starts_with(&token_prefix);
        if is_token {
            for id in &ids {
                if text.contains(id.as_str()) {
                    push("registrar", key, format!("token record names {id}"));
                }
            }
        } else {
            for t in &tokens {
                if text.contains(t.as_str()) {
                    push("registrar", key, format!("issued flag carries token {t}"));
                }
            }
        }
    }

    // The ballot table must also stay out of the identity record and vice
    // versa: the participation record holds no passphrase.
    if let Some(table) = election
        .iter()
        .find(|(k, _)| *k == record_key(rid, records::VOTE_TABLE))
    {
        if let Ok(t) = serde_json::from_slice::<pvv_core::VoteTable>(&table.1) {
            let part_key = record_key(rid, records::PARTICIPATION);
            if let Some((_, part)) = election.iter().find(|(k, _)| *k == part_key) {
                let part = String::from_utf8_lossy(part);
                for e in t.entries() {
                    let needle = serde_json::to_string(e.passphrase.raw()).expect("string");
                    if part.contains(&needle) {
                        push("election", &part_key, format!("participation names a passphrase {needle}"));
                    }
                }
            }
        }
    }
    Ok(out)
}
