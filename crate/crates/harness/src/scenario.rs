//! Declarative adversary scenarios.
//!
//! A scenario file is one JSON document:
//!
//! ```json
//! {
//!   "name": "flip-one",
//!   "n_voters": 12,
//!   "passphrase_policy": "distinct",
//!   "voter_behaviors": ["verify", "skip-verify"],
//!   "adversary_action": {"FlipVote": 1},
//!   "seed": 7
//! }
//! ```
//!
//! `voter_behaviors` may be shorter than the roster; missing voters verify.

use std::collections::BTreeSet;
use std::sync::LazyLock;

use pvv_core::passphrase::{suggest, Wordlist};
use pvv_core::{Passphrase, Vote};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

static WORDLIST: LazyLock<Wordlist> = LazyLock::new(Wordlist::builtin);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PassphrasePolicy {
    Distinct,
    /// Voters 0 and 1 submit the same phrase and the same vote.
    ForceDuplicate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum VoterBehavior {
    Verify,
    SkipVerify,
}

/// What a corrupt EA does to the stored table between close and publish.
/// Targets are 0-based roster positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AdversaryAction {
    None,
    FlipVote(usize),
    InsertBallot,
    DeleteBallot,
    AlterPassphrase(usize),
}

impl AdversaryAction {
    pub fn label(&self) -> &'static str {
        match self {
            AdversaryAction::None => "None",
            AdversaryAction::FlipVote(_) => "FlipVote",
            AdversaryAction::InsertBallot => "InsertBallot",
            AdversaryAction::DeleteBallot => "DeleteBallot",
            AdversaryAction::AlterPassphrase(_) => "AlterPassphrase",
        }
    }

    pub fn target(&self) -> Option<usize> {
        match *self {
            AdversaryAction::FlipVote(t) | AdversaryAction::AlterPassphrase(t) => Some(t),
            _ => None,
        }
    }

    pub fn with_target(self, t: usize) -> Self {
        match self {
            AdversaryAction::FlipVote(_) => AdversaryAction::FlipVote(t),
            AdversaryAction::AlterPassphrase(_) => AdversaryAction::AlterPassphrase(t),
            other => other,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub n_voters: usize,
    pub passphrase_policy: PassphrasePolicy,
    #[serde(default)]
    pub voter_behaviors: Vec<VoterBehavior>,
    pub adversary_action: AdversaryAction,
    pub seed: u64,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("scenario needs at least {0} voters")]
    TooFewVoters(usize),
    #[error("{0} voter behaviors given for {1} voters")]
    TooManyBehaviors(usize, usize),
    #[error("target {0} is outside the roster of {1}")]
    BadTarget(usize, usize),
    #[error("scenario file: {0}")]
    Parse(#[from] serde_json::Error),
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self, ScenarioError> {
        let s: Scenario = serde_json::from_str(text)?;
        s.validate()?;
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<(), ScenarioError> {
        let min = match self.passphrase_policy {
            PassphrasePolicy::Distinct => 1,
            PassphrasePolicy::ForceDuplicate => 2,
        };
        if self.n_voters < min {
            return Err(ScenarioError::TooFewVoters(min));
        }
        if self.voter_behaviors.len() > self.n_voters {
            return Err(ScenarioError::TooManyBehaviors(
                self.voter_behaviors.len(),
                self.n_voters,
            ));
        }
        if let Some(t) = self.adversary_action.target() {
            if t >= self.n_voters {
                return Err(ScenarioError::BadTarget(t, self.n_voters));
            }
        }
        Ok(())
    }

    pub fn behavior(&self, voter: usize) -> VoterBehavior {
        self.voter_behaviors
            .get(voter)
            .copied()
            .unwrap_or(VoterBehavior::Verify)
    }

    /// Every voter's `(P, V)`, in roster order. A pure function of the
    /// scenario, so detection verdicts can be replayed.
    pub fn ballots(&self) -> Vec<(Passphrase, Vote)> {
        let mut rng = StdRng::seed_from_u64(self.seed);
        let mut seen = BTreeSet::new();
        let mut out: Vec<(Passphrase, Vote)> = Vec::with_capacity(self.n_voters);
        for i in 0..self.n_voters {
            let vote = Vote::ALL[rng.random_range(0..Vote::ALL.len())];
            if i == 1 && self.passphrase_policy == PassphrasePolicy::ForceDuplicate {
                let first = out[0].clone();
                out.push(first);
                continue;
            }
            out.push((fresh_phrase(&mut rng, &mut seen), vote));
        }
        out
    }
}

/// A phrase whose normalized form is not yet in `seen`.
pub(crate) fn fresh_phrase(rng: &mut StdRng, seen: &mut BTreeSet<String>) -> Passphrase {
    loop {
        let p = suggest(rng.random(), &WORDLIST);
        if seen.insert(p.normalized().to_owned()) {
            return p;
        }
    }
}
