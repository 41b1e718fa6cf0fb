//! What an insider with raw store access learns about absentee voters
//! when few of them vote early.

use pvv_core::{ElectionPhase, Vote};
use pvv_harness::absentee_exposure;
use pvv_harness::sim::{Sim, SimOptions};

fn main() {
    for absentees in [1, 3] {
        let sim = Sim::new(SimOptions { n_voters: 6, n_absentee: absentees, ..SimOptions::default() }).unwrap();
        let (svc, rid) = (&sim.svc, &sim.rid);
        svc.advance_phase(&sim.ea().unwrap(), rid, ElectionPhase::AbsenteeOpen).unwrap();
        for i in 0..absentees {
            let s = sim.voter(i).unwrap();
            let t = svc.issue_token(&s, rid).unwrap();
            svc.cast_ballot(rid, &t, &format!("early phrase {i}"), Vote::No).unwrap();
            svc.absentee_ack(&s, rid).unwrap();
        }
        svc.advance_phase(&sim.chair().unwrap(), rid, ElectionPhase::VotingOpen).unwrap();
        for i in absentees..6 {
            let t = svc.issue_token(&sim.voter(i).unwrap(), rid).unwrap();
            svc.cast_ballot(rid, &t, &format!("room phrase {i}"), Vote::Yes).unwrap();
        }
        let r = absentee_exposure(&svc.election(rid).unwrap());
        println!("{absentees} absentee(s): {}", serde_json::to_string_pretty(&r).unwrap());
    }
}
