//! Whole-election simulation with an adversarial EA, and the three
//! detectors that can catch it.

use std::collections::BTreeSet;

use pvv_core::audit::{sha256_hex, AuditLog};
use pvv_core::prompt::{check_tally, find_pair};
use pvv_core::{
    parse_prompt, Attestation, ElectionPhase, EventKind, Passphrase, Vote, VerificationPrompt,
};
use pvv_service::service::ServiceError;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scenario::{fresh_phrase, AdversaryAction, Scenario, ScenarioError, VoterBehavior};
use crate::sim::{Sim, SimOptions};

/// Checked in this order; the first that fires is reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Detector {
    VoterPairCheck,
    CountCheck,
    ChainCheck,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event")]
pub enum TranscriptEvent {
    Phase {
        to: ElectionPhase,
    },
    BallotCast {
        voter: usize,
    },
    Adversary {
        action: AdversaryAction,
        detail: String,
    },
    PromptPublished {
        entries: usize,
        sha256: String,
    },
    VoterCheck {
        voter: usize,
        found: bool,
        tally_ok: bool,
    },
    VoterSkipped {
        voter: usize,
    },
    CountCheck {
        listed: usize,
        ballots_accepted: usize,
        eligible: usize,
    },
    ChainCheck {
        intact: bool,
        prompt_matches_log: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectionResult {
    pub detected: bool,
    pub detector: Detector,
    /// Every detector that fired, in check order.
    pub triggered: Vec<Detector>,
    /// The prompt text as published.
    pub prompt: String,
    pub transcript: Vec<TranscriptEvent>,
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("service: {0}")]
    Service(#[from] ServiceError),
    #[error("published prompt does not parse: {0}")]
    Prompt(String),
}

/// Separate stream so the mutation does not shift the ballots.
const ADVERSARY_STREAM: u64 = 0x6164_7665_7273_6172;

pub fn run_scenario(scenario: &Scenario) -> Result<DetectionResult, HarnessError> {
    scenario.validate()?;
    let ballots = scenario.ballots();
    let sim = Sim::new(SimOptions {
        referendum_id: "SIMULATION".into(),
        n_voters: scenario.n_voters,
        seed: scenario.seed,
        ..SimOptions::default()
    })?;
    let svc = &sim.svc;
    let rid = &sim.rid;
    let chair = sim.chair()?;
    let ea = sim.ea()?;
    let mut transcript = Vec::new();

    svc.advance_phase(&chair, rid, ElectionPhase::VotingOpen)?;
    transcript.push(TranscriptEvent::Phase {
        to: ElectionPhase::VotingOpen,
    });
    for (i, (p, v)) in ballots.iter().enumerate() {
        let token = svc.issue_token(&sim.voter(i)?, rid)?;
        svc.cast_ballot(rid, &token, p.raw(), *v)?;
        transcript.push(TranscriptEvent::BallotCast { voter: i });
    }
    svc.advance_phase(&chair, rid, ElectionPhase::VotingClosed)?;
    transcript.push(TranscriptEvent::Phase {
        to: ElectionPhase::VotingClosed,
    });

    if scenario.adversary_action != AdversaryAction::None {
        let detail = mutate(scenario, &ballots, &sim)?;
        transcript.push(TranscriptEvent::Adversary {
            action: scenario.adversary_action,
            detail,
        });
    }

    let text = svc.publish_prompt(&ea, rid)?;
    let prompt = parse_prompt(&text).map_err(|e| HarnessError::Prompt(e.to_string()))?;
    transcript.push(TranscriptEvent::PromptPublished {
        entries: prompt.total_listed(),
        sha256: sha256_hex(text.as_bytes()),
    });
    svc.advance_phase(&chair, rid, ElectionPhase::VerificationOpen)?;
    transcript.push(TranscriptEvent::Phase {
        to: ElectionPhase::VerificationOpen,
    });

    let mut triggered = BTreeSet::new();
    for (i, (p, v)) in ballots.iter().enumerate() {
        if scenario.behavior(i) == VoterBehavior::SkipVerify {
            transcript.push(TranscriptEvent::VoterSkipped { voter: i });
            continue;
        }
        let (found, tally_ok) = voter_check(&prompt, p, *v);
        transcript.push(TranscriptEvent::VoterCheck {
            voter: i,
            found,
            tally_ok,
        });
        let attestation = Attestation {
            attested: found && tally_ok,
            comment: None,
        };
        svc.record_verification(&sim.voter(i)?, rid, attestation)?;
        if !(found && tally_ok) {
            triggered.insert(Detector::VoterPairCheck);
        }
    }

    let log = AuditLog::from_jsonl(&svc.audit_log(rid)?);
    let ballots_accepted = log
        .as_ref()
        .map(|l| l.of_kind(EventKind::BallotAccepted).count())
        .unwrap_or(0);
    let listed = prompt.total_listed();
    let eligible = scenario.n_voters;
    transcript.push(TranscriptEvent::CountCheck {
        listed,
        ballots_accepted,
        eligible,
    });
    if listed != ballots_accepted || listed > eligible {
        triggered.insert(Detector::CountCheck);
    }

    let prompt_matches_log = log.as_ref().is_ok_and(|l| {
        l.of_kind(EventKind::PromptPublished).last().is_some_and(|e| {
            e.payload["prompt_sha256"].as_str() == Some(sha256_hex(text.as_bytes()).as_str())
        })
    });
    transcript.push(TranscriptEvent::ChainCheck {
        intact: log.is_ok(),
        prompt_matches_log,
    });
    if log.is_err() || !prompt_matches_log {
        triggered.insert(Detector::ChainCheck);
    }

    let triggered: Vec<Detector> = triggered.into_iter().collect();
    let detector = triggered.first().copied().unwrap_or(Detector::None);
    Ok(DetectionResult {
        detected: detector != Detector::None,
        detector,
        triggered,
        prompt: text,
        transcript,
    })
}

/// What one voter concludes: their pair is listed and the prompt's own
/// arithmetic holds.
pub fn voter_check(prompt: &VerificationPrompt, passphrase: &Passphrase, vote: Vote) -> (bool, bool) {
    let found = find_pair(prompt, passphrase).iter().any(|(v, _)| *v == vote);
    (found, check_tally(prompt).is_empty())
}

fn mutate(
    scenario: &Scenario,
    ballots: &[(Passphrase, Vote)],
    sim: &Sim,
) -> Result<String, HarnessError> {
    let mut rng = StdRng::seed_from_u64(scenario.seed ^ ADVERSARY_STREAM);
    let mut seen: BTreeSet<String> = ballots.iter().map(|(p, _)| p.normalized().to_owned()).collect();
    let mut detail = String::new();
    sim.svc.tamper_vote_table(&sim.rid, |table| {
        let entries = table.entries_mut();
        let position_of = |entries: &[pvv_core::model::BallotEntry], t: usize| {
            entries
                .iter()
                .position(|e| e.passphrase.matches(&ballots[t].0))
                .expect("target ballot present")
        };
        detail = match scenario.adversary_action {
            AdversaryAction::None => String::new(),
            AdversaryAction::FlipVote(t) => {
                let at = position_of(entries, t);
                let from = entries[at].vote;
                let others: Vec<Vote> = Vote::ALL.into_iter().filter(|v| *v != from).collect();
                let to = others[rng.random_range(0..others.len())];
                entries[at].vote = to;
                format!("row {} {from} -> {to}", at + 1)
            }
            AdversaryAction::InsertBallot => {
                let mut extra = entries.last().cloned().expect("non-empty table");
                extra.passphrase = fresh_phrase(&mut rng, &mut seen);
                extra.vote = Vote::ALL[rng.random_range(0..Vote::ALL.len())];
                extra.seq += 1;
                let d = format!("added ({}, {})", extra.passphrase.raw(), extra.vote);
                entries.push(extra);
                d
            }
            AdversaryAction::DeleteBallot => {
                let at = rng.random_range(0..entries.len());
                let gone = entries.remove(at);
                format!("removed row {} ({}, {})", at + 1, gone.passphrase.raw(), gone.vote)
            }
            AdversaryAction::AlterPassphrase(t) => {
                let at = position_of(entries, t);
                let to = fresh_phrase(&mut rng, &mut seen);
                let d = format!("row {} {} -> {}", at + 1, entries[at].passphrase.raw(), to.raw());
                entries[at].passphrase = to;
                d
            }
        };
    })?;
    Ok(detail)
}
