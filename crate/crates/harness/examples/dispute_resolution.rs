//! A voter finds their pair listed under the wrong vote, files a dispute,
//! and the panel's correction rebuilds the prompt.

use chrono::Duration;
use pvv_core::{Attestation, ElectionPhase, Passphrase, Vote};
use pvv_harness::sim::{Sim, SimOptions, SAMPLE_BALLOTS};
use pvv_service::service::DisputeRequest;

fn main() {
    let sim = Sim::new(SimOptions::default()).unwrap();
    let (svc, rid) = (&sim.svc, &sim.rid);
    sim.vote_in_meeting(&SAMPLE_BALLOTS).unwrap();
    svc.publish_prompt(&sim.ea().unwrap(), rid).unwrap();

    let chair = sim.chair().unwrap();
    svc.advance_phase(&chair, rid, ElectionPhase::VerificationOpen).unwrap();
    for i in 1..6 {
        svc.record_verification(&sim.voter(i).unwrap(), rid, Attestation::default()).unwrap();
    }
    svc.advance_phase(&chair, rid, ElectionPhase::VerificationClosed).unwrap();
    let ea = sim.ea().unwrap();
    svc.advance_phase(&ea, rid, ElectionPhase::Reported).unwrap();
    svc.advance_phase(&ea, rid, ElectionPhase::DisputeWindow).unwrap();

    sim.clock.advance(Duration::hours(3));
    for (phrase, claimed) in [("frank 99", Vote::Yes), ("k b", Vote::Abstain), ("zebra quilt", Vote::No)] {
        let r = svc
            .file_dispute(
                &sim.voter(0).unwrap(),
                rid,
                DisputeRequest {
                    passphrase: Passphrase::new(phrase).unwrap(),
                    claimed_vote: claimed,
                    commitment_proof: None,
                },
            )
            .unwrap();
        println!("{phrase:<12} {claimed:<7} -> {:?}: {}", r.outcome.classification, r.outcome.rationale);
    }
    print!("\n{}", svc.prompt(rid).unwrap());

    sim.clock.advance(Duration::hours(48));
    let report = svc.dispute_report(rid).unwrap();
    println!("\n{}", serde_json::to_string_pretty(&report).unwrap());
}
