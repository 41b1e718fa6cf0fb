//! Commitment ballots: the published line is a digest of a secret, the
//! vote and the referendum id. Revealing the secret proves the pair.

use pvv_core::passphrase::{commit, verify_commitment};
use pvv_core::{ReferendumId, Vote};

fn main() {
    let rid = ReferendumId::new("SMITH-OVERALL").unwrap();
    let secret = b"0123456789abcdef";
    let c = commit(secret, Vote::Yes, &rid).unwrap();
    println!("scheme  {}", c.scheme_id);
    println!("digest  {}", c.digest);

    for vote in Vote::ALL {
        println!("opens as {vote:<7} {}", verify_commitment(&c, secret, vote, &rid).unwrap());
    }
    let other = ReferendumId::new("SMITH-OTHER").unwrap();
    println!("opens in another referendum: {}", verify_commitment(&c, secret, Vote::Yes, &other).unwrap());
    println!("short secret rejected: {}", commit(b"short", Vote::No, &rid).is_err());
}
