//! Hash commitments binding a voter secret to a vote and a referendum.
//!
//! ```text
//! digest = SHA-256( lp(scheme_id) || lp(referendum_id) || lp(vote) || lp(secret) )
//! lp(x)  = u64_be(len(x)) || x
//! ```
//!
//! In commitment mode the voter submits the lowercase hex digest as their
//! passphrase. Revealing `(secret, vote)` later proves which vote the
//! published line was bound to.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use subtle::ConstantTimeEq;
use thiserror::Error;

use crate::model::{ReferendumId, Vote};

pub const COMMITMENT_SCHEME: &str = "pvv-commit-sha256-v1";
pub const MIN_SECRET_BYTES: usize = 16;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CommitmentError {
    #[error("secret must be at least {MIN_SECRET_BYTES} bytes, got {0}")]
    WeakSecret(usize),
    #[error("unknown commitment scheme {0:?}")]
    UnknownScheme(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Commitment {
    /// Lowercase hex.
    pub digest: String,
    pub scheme_id: String,
}

fn digest_bytes(secret: &[u8], vote: Vote, referendum_id: &ReferendumId) -> [u8; 32] {
    let mut h = Sha256::new();
    for field in [
        COMMITMENT_SCHEME.as_bytes(),
        referendum_id.as_str().as_bytes(),
        vote.as_str().as_bytes(),
        secret,
    ] {
        h.update((field.len() as u64).to_be_bytes());
        h.update(field);
    }
    h.finalize().into()
}

pub fn commit(
    secret: &[u8],
    vote: Vote,
    referendum_id: &ReferendumId,
) -> Result<Commitment, CommitmentError> {
    if secret.len() < MIN_SECRET_BYTES {
        return Err(CommitmentError::WeakSecret(secret.len()));
    }
    Ok(Commitment {
        digest: hex::encode(digest_bytes(secret, vote, referendum_id)),
        scheme_id: COMMITMENT_SCHEME.to_owned(),
    })
}

/// Recomputes the digest and compares in constant time. A malformed digest
/// never verifies.
pub fn verify_commitment(
    commitment: &Commitment,
    secret: &[u8],
    vote: Vote,
    referendum_id: &ReferendumId,
) -> Result<bool, CommitmentError> {
    if commitment.scheme_id != COMMITMENT_SCHEME {
        return Err(CommitmentError::UnknownScheme(commitment.scheme_id.clone()));
    }
    let d = &commitment.digest;
    if d.len() != 64 || d.bytes().any(|b| b.is_ascii_uppercase()) {
        return Ok(false);
    }
    let mut claimed = [0u8; 32];
    if hex::decode_to_slice(d, &mut claimed).is_err() {
        return Ok(false);
    }
    let expected = digest_bytes(secret, vote, referendum_id);
    Ok(bool::from(expected.ct_eq(&claimed)))
}
