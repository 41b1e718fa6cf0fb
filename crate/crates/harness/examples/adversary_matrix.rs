//! Detection rates of each tampering action, for a fully verifying
//! electorate and for one where half the voters skip the check.

use pvv_harness::{run_matrix, AdversaryAction, PassphrasePolicy, Scenario, VoterBehavior};

fn main() {
    let trials = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(50);
    let all = Scenario {
        name: "all-verify".into(),
        n_voters: 12,
        passphrase_policy: PassphrasePolicy::Distinct,
        voter_behaviors: vec![],
        adversary_action: AdversaryAction::None,
        seed: 0,
    };
    let half = Scenario {
        name: "half-verify".into(),
        voter_behaviors: (0..12)
            .map(|i| if i % 2 == 0 { VoterBehavior::Verify } else { VoterBehavior::SkipVerify })
            .collect(),
        ..all.clone()
    };
    for template in [all, half] {
        let table = run_matrix(&template, trials, 7).unwrap();
        println!("# {}", table.scenario);
        print!("{}", table.to_csv());
        println!();
    }
}
