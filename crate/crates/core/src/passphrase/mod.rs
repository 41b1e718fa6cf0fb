//! Passphrase handling: canonical normalization, advisory validation,
//! duplicate detection, the birthday collision model, wordlist suggestions
//! and the optional hash-commitment variant.
//!
//! Validation never rejects a phrase that [`Passphrase::new`] accepts; it
//! only reports warnings for the voter to act on.

mod commitment;
mod wordlist;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use unicode_normalization::UnicodeNormalization;

use crate::model::{ModelError, Passphrase, Vote, VoteTable};

pub use commitment::{
    commit, verify_commitment, Commitment, CommitmentError, COMMITMENT_SCHEME, MIN_SECRET_BYTES,
};
pub use wordlist::{suggest, suggestion_indices, Wordlist, WordlistError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PassphraseError {
    #[error("passphrase is empty")]
    EmptyPassphrase,
    #[error("invalid collision model: no phrases to draw from")]
    InvalidModel,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Canonical comparison form: NFC, lowercase, whitespace collapsed to
/// single spaces and trimmed.
pub fn normalize(raw: &str) -> String {
    let lowered: String = raw.nfc().collect::<String>().to_lowercase();
    let collapsed = lowered.split_whitespace().collect::<Vec<_>>().join(" ");
    collapsed.nfc().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Warning {
    /// Not exactly two whitespace-separated tokens, or punctuation present.
    NotTwoWords,
    LowEntropy,
    /// A 2-3 letter token that could be someone's initials.
    PossibleInitials,
    /// Same phrase as one the voter used earlier (client-side check only).
    ReusedPhrase,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub normalized: String,
    pub warnings: Vec<Warning>,
}

impl ValidationReport {
    pub fn has(&self, w: Warning) -> bool {
        self.warnings.contains(&w)
    }
}

const TRIVIAL_PAIRS: &[&str] = &[
    "abc def",
    "dog cat",
    "cat dog",
    "foo bar",
    "yes no",
    "no yes",
    "one two",
    "aaa bbb",
    "xxx yyy",
    "asdf jkl",
    "asdf ghjk",
    "qwerty uiop",
    "hello world",
    "test test",
    "password password",
    "123 456",
    "red blue",
    "black white",
    "up down",
];

/// Checks a phrase against the advisory rules.
pub fn validate(raw: &str) -> Result<ValidationReport, PassphraseError> {
    if raw.trim().is_empty() {
        return Err(PassphraseError::EmptyPassphrase);
    }
    let normalized = normalize(raw);
    let tokens: Vec<&str> = normalized.split(' ').collect();
    let mut warnings = Vec::new();

    let punctuated = normalized
        .chars()
        .any(|c| !c.is_alphanumeric() && !c.is_whitespace());
    if tokens.len() != 2 || punctuated {
        warnings.push(Warning::NotTwoWords);
    }

    let short_token = tokens.iter().any(|t| t.chars().count() <= 2);
    let repeated = tokens.len() == 2 && tokens[0] == tokens[1];
    if short_token || repeated || TRIVIAL_PAIRS.contains(&normalized.as_str()) {
        warnings.push(Warning::LowEntropy);
    }

    if tokens.iter().any(|t| {
        let n = t.chars().count();
        (2..=3).contains(&n) && t.chars().all(char::is_alphabetic)
    }) {
        warnings.push(Warning::PossibleInitials);
    }

    Ok(ValidationReport {
        normalized,
        warnings,
    })
}

/// [`validate`] plus the opt-in reuse check against phrases the voter's own
/// client remembers from earlier referenda the same day.
pub fn validate_against_history<'a>(
    raw: &str,
    earlier: impl IntoIterator<Item = &'a Passphrase>,
) -> Result<ValidationReport, PassphraseError> {
    let mut report = validate(raw)?;
    if earlier
        .into_iter()
        .any(|p| p.normalized() == report.normalized)
    {
        report.warnings.push(Warning::ReusedPhrase);
    }
    Ok(report)
}

/// A normalized passphrase that occurs more than once in a table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Collision {
    pub normalized: String,
    pub count: usize,
    /// Sorted in prompt group order.
    pub votes: Vec<Vote>,
}

pub fn detect_collisions(table: &VoteTable) -> Vec<Collision> {
    let mut by_phrase: BTreeMap<&str, Vec<Vote>> = BTreeMap::new();
    for (p, v) in table.pairs() {
        by_phrase.entry(p.normalized()).or_default().push(v);
    }
    by_phrase
        .into_iter()
        .filter(|(_, votes)| votes.len() > 1)
        .map(|(phrase, mut votes)| {
            votes.sort();
            Collision {
                normalized: phrase.to_owned(),
                count: votes.len(),
                votes,
            }
        })
        .collect()
}

/// Probability that at least two of `n_voters` share a phrase when each
/// draws an ordered pair of words uniformly from `wordlist_size` words,
/// i.e. from `wordlist_size²` equally likely phrases.
pub fn collision_probability(n_voters: u64, wordlist_size: u64) -> Result<f64, PassphraseError> {
    if wordlist_size == 0 {
        return Err(PassphraseError::InvalidModel);
    }
    let space = (wordlist_size as f64) * (wordlist_size as f64);
    if n_voters <= 1 {
        return Ok(0.0);
    }
    if n_voters as f64 > space {
        return Ok(1.0);
    }
    let log_no_collision: f64 = (1..n_voters).map(|k| (-(k as f64) / space).ln_1p()).sum();
    Ok((-log_no_collision.exp_m1()).clamp(0.0, 1.0))
}
