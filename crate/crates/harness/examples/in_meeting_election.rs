//! A complete in-meeting referendum through the service, from roster to
//! sealed audit bundle.

use chrono::Duration;
use pvv_core::{Attestation, ElectionPhase, Vote};
use pvv_harness::sim::{Sim, SimOptions};

fn main() {
    let sim = Sim::new(SimOptions { n_voters: 5, ..SimOptions::default() }).unwrap();
    let (svc, rid) = (&sim.svc, &sim.rid);
    let chair = sim.chair().unwrap();

    svc.advance_phase(&chair, rid, ElectionPhase::VotingOpen).unwrap();
    let ballots = [("maple anchor", Vote::Yes), ("quiet lamp", Vote::No), ("river stone", Vote::Yes), ("tin whistle", Vote::Yes)];
    for (i, (p, v)) in ballots.iter().enumerate() {
        let token = svc.issue_token(&sim.voter(i).unwrap(), rid).unwrap();
        let receipt = svc.cast_ballot(rid, &token, p, *v).unwrap();
        println!("voter {i} cast; warnings {:?}", receipt.warnings);
    }
    println!("live count {}", svc.live_count(rid).unwrap());
    svc.advance_phase(&chair, rid, ElectionPhase::VotingClosed).unwrap();

    print!("\n{}", svc.publish_prompt(&sim.ea().unwrap(), rid).unwrap());
    svc.advance_phase(&chair, rid, ElectionPhase::VerificationOpen).unwrap();
    for i in 0..ballots.len() {
        svc.record_verification(&sim.voter(i).unwrap(), rid, Attestation::default()).unwrap();
    }
    svc.advance_phase(&chair, rid, ElectionPhase::VerificationClosed).unwrap();
    let ea = sim.ea().unwrap();
    svc.advance_phase(&ea, rid, ElectionPhase::Reported).unwrap();
    svc.advance_phase(&ea, rid, ElectionPhase::DisputeWindow).unwrap();

    sim.clock.advance(Duration::hours(49));
    let ea = sim.ea().unwrap();
    svc.advance_phase(&ea, rid, ElectionPhase::Final).unwrap();
    let bundle = svc.bundle(rid).unwrap();
    println!("\nsealed {} tally {:?}", bundle.sealed, bundle.tally());
    println!("non-voters {:?}", bundle.non_voters);
    println!("notifications sent {}", sim.sink.sent().len());
}
