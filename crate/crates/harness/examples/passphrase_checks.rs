//! Advisory passphrase warnings, wordlist suggestions and the chance that
//! two voters pick the same suggested pair.

use pvv_core::passphrase::{collision_probability, suggest, validate, Wordlist};

fn main() {
    for raw in ["assume jockey", "k b", "abc def", "Friendly,  ROOT", "one"] {
        let r = validate(raw).unwrap();
        println!("{raw:>18} -> {:<16} {:?}", r.normalized, r.warnings);
    }

    let words = Wordlist::builtin();
    println!("\nsuggestions from a {}-word list:", words.size());
    for seed in 1..=4 {
        println!("  {}", suggest(seed, &words));
    }

    println!("\nP(some two voters share a suggestion):");
    for n in [10, 26, 100, 500] {
        for w in [2048, 7776] {
            println!("  n={n:<4} W={w:<5} {:.3e}", collision_probability(n, w).unwrap());
        }
    }
}
