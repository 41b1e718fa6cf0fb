use std::collections::BTreeSet;
use std::fs;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::Passphrase;

static BUILTIN: &str = include_str!("words.txt");

#[derive(Debug, Error)]
pub enum WordlistError {
    #[error("line {line}: duplicate word {word:?}")]
    Duplicate { line: usize, word: String },
    #[error("line {line}: {word:?} is not a single word")]
    InvalidWord { line: usize, word: String },
    #[error("wordlist needs at least 2 words, found {0}")]
    TooSmall(usize),
    #[error("reading wordlist: {0}")]
    Io(#[from] std::io::Error),
}

/// An immutable list of distinct lowercase words, in file order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Wordlist {
    words: Vec<String>,
}

impl Wordlist {
    /// Parses the wordlist file format: UTF-8, one word per line, `#`
    /// starts a comment line, blank lines ignored.
    pub fn parse(text: &str) -> Result<Self, WordlistError> {
        let mut seen = BTreeSet::new();
        let mut words = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            if trimmed.chars().any(|c| c.is_whitespace() || c.is_control()) {
                return Err(WordlistError::InvalidWord {
                    line: line_no,
                    word: trimmed.to_owned(),
                });
            }
            let word = trimmed.to_lowercase();
            if !seen.insert(word.clone()) {
                return Err(WordlistError::Duplicate {
                    line: line_no,
                    word,
                });
            }
            words.push(word);
        }
        if words.len() < 2 {
            return Err(WordlistError::TooSmall(words.len()));
        }
        Ok(Self { words })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, WordlistError> {
        Self::parse(&fs::read_to_string(path)?)
    }

    /// The list shipped with the crate.
    pub fn builtin() -> Self {
        Self::parse(BUILTIN).expect("builtin wordlist is well formed")
    }

    pub fn from_words<I, S>(words: I) -> Result<Self, WordlistError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let text = words
            .into_iter()
            .map(|w| w.as_ref().to_owned())
            .collect::<Vec<_>>()
            .join("\n");
        Self::parse(&text)
    }

    pub fn size(&self) -> usize {
        self.words.len()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn get(&self, i: usize) -> Option<&str> {
        self.words.get(i).map(String::as_str)
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.iter().any(|w| w == word)
    }
}

/// The two word indices `suggest` draws for `seed`.
pub fn suggestion_indices(seed: u64, size: usize) -> (usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (rng.random_range(0..size), rng.random_range(0..size))
}

/// Two independent uniform draws joined by a single space.
pub fn suggest(seed: u64, wordlist: &Wordlist) -> Passphrase {
    let (a, b) = suggestion_indices(seed, wordlist.size());
    Passphrase::new(format!("{} {}", wordlist.words[a], wordlist.words[b]))
        .expect("wordlist words form a valid passphrase")
}
