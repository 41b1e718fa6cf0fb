use std::collections::BTreeMap;

use proptest::prelude::*;
use pvv_core::{parse_prompt, Vote};
use pvv_harness::{
    run_scenario, voter_check, AdversaryAction, Detector, PassphrasePolicy, Scenario, TranscriptEvent, VoterBehavior,
};

fn scenario(n: usize, behaviors: Vec<VoterBehavior>, action: AdversaryAction, seed: u64) -> Scenario {
    Scenario {
        name: "prop".into(),
        n_voters: n,
        passphrase_policy: PassphrasePolicy::Distinct,
        voter_behaviors: behaviors,
        adversary_action: action,
        seed,
    }
}

fn behaviors(n: usize) -> impl Strategy<Value = Vec<VoterBehavior>> {
    prop::collection::vec(
        prop_oneof![Just(VoterBehavior::Verify), Just(VoterBehavior::SkipVerify)],
        0..=n,
    )
}

fn action(n: usize) -> impl Strategy<Value = AdversaryAction> {
    prop_oneof![
        Just(AdversaryAction::None),
        (0..n).prop_map(AdversaryAction::FlipVote),
        Just(AdversaryAction::InsertBallot),
        Just(AdversaryAction::DeleteBallot),
        (0..n).prop_map(AdversaryAction::AlterPassphrase),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn honest_elections_are_never_flagged(
        (n, b) in (2usize..16).prop_flat_map(|n| (Just(n), behaviors(n))),
        seed in any::<u64>(),
    ) {
        let r = run_scenario(&scenario(n, b, AdversaryAction::None, seed)).unwrap();
        prop_assert!(!r.detected, "{:?}", r.triggered);
        prop_assert_eq!(r.detector, Detector::None);
    }

    /// The pair-check verdict follows from the published prompt and each
    /// verifying voter's own ballot, with nothing else.
    #[test]
    fn pair_check_agrees_with_replay(
        (n, b, a) in (2usize..14).prop_flat_map(|n| (Just(n), behaviors(n), action(n))),
        seed in any::<u64>(),
    ) {
        let s = scenario(n, b, a, seed);
        let r = run_scenario(&s).unwrap();
        let prompt = parse_prompt(&r.prompt).unwrap();
        let replay = s
            .ballots()
            .iter()
            .enumerate()
            .filter(|(i, _)| s.behavior(*i) == VoterBehavior::Verify)
            .any(|(_, (p, v))| {
                let (found, ok) = voter_check(&prompt, p, *v);
                !(found && ok)
            });
        prop_assert_eq!(replay, r.triggered.contains(&Detector::VoterPairCheck));
        if replay {
            prop_assert_eq!(r.detector, Detector::VoterPairCheck);
        }
    }

    #[test]
    fn count_changes_are_always_counted(
        n in 2usize..16,
        insert in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let a = if insert { AdversaryAction::InsertBallot } else { AdversaryAction::DeleteBallot };
        let r = run_scenario(&scenario(n, vec![], a, seed)).unwrap();
        prop_assert!(r.triggered.contains(&Detector::CountCheck), "{:?}", r.triggered);
    }

    #[test]
    fn scenarios_round_trip_and_replay(
        (n, b, a) in (1usize..10).prop_flat_map(|n| (Just(n), behaviors(n), action(n))),
        seed in any::<u64>(),
    ) {
        let s = scenario(n, b, a, seed);
        let back = Scenario::from_json(&s.to_json()).unwrap();
        prop_assert_eq!(&back, &s);
        prop_assert_eq!(run_scenario(&s).unwrap(), run_scenario(&back).unwrap());
    }
}

#[test]
fn transcript_records_every_verifier() {
    let s = scenario(
        5,
        vec![VoterBehavior::Verify, VoterBehavior::SkipVerify],
        AdversaryAction::FlipVote(2),
        11,
    );
    let r = run_scenario(&s).unwrap();
    let mut checks = BTreeMap::new();
    let mut skipped = Vec::new();
    for e in &r.transcript {
        match e {
            TranscriptEvent::VoterCheck { voter, found, tally_ok } => {
                checks.insert(*voter, (*found, *tally_ok));
            }
            TranscriptEvent::VoterSkipped { voter } => skipped.push(*voter),
            _ => {}
        }
    }
    assert_eq!(skipped, vec![1]);
    assert_eq!(checks.len(), 4);
    assert_eq!(checks[&2], (false, true));
    assert!(checks.iter().filter(|(v, _)| **v != 2).all(|(_, c)| *c == (true, true)));
    assert!(r.detected);
}

#[test]
fn duplicate_phrases_hide_a_flip_between_their_owners() {
    let mut s = scenario(8, vec![], AdversaryAction::FlipVote(0), 3);
    s.passphrase_policy = PassphrasePolicy::ForceDuplicate;
    let ballots = s.ballots();
    assert_eq!(ballots[0], ballots[1]);
    for seed in 0..20 {
        s.seed = seed;
        let r = run_scenario(&s).unwrap();
        // One copy flips; each owner still finds a copy with their vote.
        assert!(!r.triggered.contains(&Detector::VoterPairCheck), "seed {seed}");
        let prompt = parse_prompt(&r.prompt).unwrap();
        let groups: Vec<Vote> = prompt
            .lines()
            .filter(|l| l.passphrase.normalized() == s.ballots()[0].0.normalized())
            .map(|l| l.group)
            .collect();
        assert_eq!(groups.len(), 2);
        assert_ne!(groups[0], groups[1]);
    }
}
