//! Runs the sample election, exports its hash-chained log, then shows
//! where a one-byte edit is caught.

use pvv_core::audit::verify_jsonl;
use pvv_harness::sim::{Sim, SimOptions, SAMPLE_BALLOTS};

fn main() {
    let sim = Sim::new(SimOptions::default()).unwrap();
    sim.vote_in_meeting(&SAMPLE_BALLOTS).unwrap();
    sim.svc.publish_prompt(&sim.ea().unwrap(), &sim.rid).unwrap();

    let log = sim.svc.audit_log(&sim.rid).unwrap();
    for line in log.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        println!("{:>3} {:<20} {}", v["index"], v["kind"].as_str().unwrap(), v["payload"]);
    }
    println!("head {}", verify_jsonl(&log).unwrap());

    let forged = log.replacen("\"ballots\":3", "\"ballots\":4", 1);
    match verify_jsonl(&forged) {
        Ok(_) => println!("edit went unnoticed"),
        Err(b) => println!("edited copy: {b}"),
    }
}
