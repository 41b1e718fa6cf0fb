//! Builds the verification prompt for the six-ballot sample election and
//! shows what a voter checks.

use pvv_core::prompt::{check_tally, find_pair};
use pvv_core::{build_prompt, parse_prompt, Passphrase, ReferendumId, VoteTable};
use pvv_harness::sim::SAMPLE_BALLOTS;

fn main() {
    let table = VoteTable::from_pairs(
        ReferendumId::new("SMITH-OVERALL").unwrap(),
        SAMPLE_BALLOTS.iter().map(|(p, v)| (Passphrase::new(*p).unwrap(), *v)),
    );
    let text = build_prompt(&table).render();
    print!("{text}");

    // What the voter who typed "Frank  99" does with the published text.
    let prompt = parse_prompt(&text).expect("well-formed");
    let mine = Passphrase::new("Frank  99").unwrap();
    for (vote, index) in find_pair(&prompt, &mine) {
        println!("\nfound \"{mine}\" as {vote} line {index}");
    }
    println!("numbering and tally consistent: {}", check_tally(&prompt).is_empty());
}
