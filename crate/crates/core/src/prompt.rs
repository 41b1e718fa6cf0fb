//! The verification prompt: every `(P, V)` pair grouped by vote in the fixed
//! order YES, NO, ABSTAIN, sorted by passphrase within each group, numbered
//! from 1, followed by the tally.
//!
//! The canonical text form is byte-exact:
//!
//! ```text
//! Referendum: SMITH-OVERALL
//!
//! YES:
//! 1. assume jockey
//! 2. disagree imperial
//! 3. friendly, root
//!
//! NO:
//! 1. frank 99
//! 2. presidential shock
//!
//! ABSTAIN:
//! 1. k b
//!
//! Tally
//! YES: 3
//! NO: 2
//! ABSTAIN: 1
//! ```
//!
//! Lines end in LF, including the last. Passphrases are printed as entered
//! and sorted by their canonical form; exact ties keep submission order.

use std::collections::BTreeMap;
use std::io::Read;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Passphrase, ReferendumId, Vote, VoteTable};

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("malformed prompt at line {line}: {reason}")]
    MalformedPrompt { line: usize, reason: String },
    #[error("vote table CSV: {0}")]
    Csv(String),
}

fn malformed(line: usize, reason: impl Into<String>) -> PromptError {
    PromptError::MalformedPrompt {
        line,
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptLine {
    pub group: Vote,
    /// 1-based position within the group.
    pub index: usize,
    pub passphrase: Passphrase,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationPrompt {
    pub referendum_id: ReferendumId,
    /// Always holds all three votes.
    pub groups: BTreeMap<Vote, Vec<PromptLine>>,
    /// The tally as stated by the prompt's author.
    pub tally: BTreeMap<Vote, u64>,
}

impl VerificationPrompt {
    pub fn group(&self, vote: Vote) -> &[PromptLine] {
        self.groups.get(&vote).map_or(&[], Vec::as_slice)
    }

    pub fn stated_tally(&self, vote: Vote) -> u64 {
        self.tally.get(&vote).copied().unwrap_or(0)
    }

    /// Number of listed pairs across all groups.
    pub fn total_listed(&self) -> usize {
        self.groups.values().map(Vec::len).sum()
    }

    pub fn lines(&self) -> impl Iterator<Item = &PromptLine> {
        Vote::ALL.into_iter().flat_map(move |v| self.group(v).iter())
    }

    pub fn render(&self) -> String {
        render_prompt(self)
    }
}

/// Partitions a (frozen) vote table into the three groups.
pub fn build_prompt(table: &VoteTable) -> VerificationPrompt {
    let mut groups: BTreeMap<Vote, Vec<Passphrase>> =
        Vote::ALL.into_iter().map(|v| (v, Vec::new())).collect();
    for (p, v) in table.pairs() {
        groups.get_mut(&v).expect("all votes present").push(p.clone());
    }
    let mut lines = BTreeMap::new();
    let mut tally = BTreeMap::new();
    for (vote, mut phrases) in groups {
        // Stable: entries with the same canonical form stay in seq order.
        phrases.sort_by(|a, b| a.normalized().cmp(b.normalized()));
        tally.insert(vote, phrases.len() as u64);
        lines.insert(
            vote,
            phrases
                .into_iter()
                .enumerate()
                .map(|(i, passphrase)| PromptLine {
                    group: vote,
                    index: i + 1,
                    passphrase,
                })
                .collect(),
        );
    }
    VerificationPrompt {
        referendum_id: table.referendum_id.clone(),
        groups: lines,
        tally,
    }
}

pub fn render_prompt(prompt: &VerificationPrompt) -> String {
    let mut out = format!("Referendum: {}\n\n", prompt.referendum_id);
    for vote in Vote::ALL {
        out.push_str(vote.as_str());
        out.push_str(":\n");
        for line in prompt.group(vote) {
            out.push_str(&format!("{}. {}\n", line.index, line.passphrase.raw()));
        }
        out.push('\n');
    }
    out.push_str("Tally\n");
    for vote in Vote::ALL {
        out.push_str(&format!("{}: {}\n", vote, prompt.stated_tally(vote)));
    }
    out
}

fn parse_count(s: &str, line: usize) -> Result<u64, PromptError> {
    let canonical = !s.is_empty()
        && s.bytes().all(|b| b.is_ascii_digit())
        && (s == "0" || !s.starts_with('0'));
    if !canonical {
        return Err(malformed(line, format!("{s:?} is not a canonical number")));
    }
    s.parse()
        .map_err(|_| malformed(line, format!("{s:?} is out of range")))
}

/// Strict inverse of [`render_prompt`].
pub fn parse_prompt(text: &str) -> Result<VerificationPrompt, PromptError> {
    let Some(body) = text.strip_suffix('\n') else {
        return Err(malformed(0, "missing trailing newline"));
    };
    let lines: Vec<&str> = body.split('\n').collect();
    let mut pos = 0usize;
    let mut next = |expect: &str| -> Result<(usize, &str), PromptError> {
        let line = lines
            .get(pos)
            .copied()
            .ok_or_else(|| malformed(pos + 1, format!("unexpected end, expected {expect}")))?;
        pos += 1;
        Ok((pos, line))
    };

    let (n, first) = next("referendum header")?;
    let rid = first
        .strip_prefix("Referendum: ")
        .ok_or_else(|| malformed(n, "expected \"Referendum: <id>\""))?;
    let referendum_id =
        ReferendumId::new(rid).map_err(|e| malformed(n, e.to_string()))?;
    let (n, blank) = next("blank line")?;
    if !blank.is_empty() {
        return Err(malformed(n, "expected blank line"));
    }

    let mut groups = BTreeMap::new();
    for vote in Vote::ALL {
        let header = format!("{vote}:");
        let (n, h) = next(&header)?;
        if h != header {
            return Err(malformed(n, format!("expected group header {header:?}")));
        }
        let mut entries = Vec::new();
        loop {
            let (n, line) = next("numbered line or blank line")?;
            if line.is_empty() {
                break;
            }
            let (num, phrase) = line
                .split_once(". ")
                .ok_or_else(|| malformed(n, "expected \"<n>. <passphrase>\""))?;
            let index = parse_count(num, n)? as usize;
            let expected = entries.len() + 1;
            if index != expected {
                return Err(malformed(
                    n,
                    format!("line numbered {index}, expected {expected}"),
                ));
            }
            let passphrase = Passphrase::new(phrase).map_err(|e| malformed(n, e.to_string()))?;
            entries.push(PromptLine {
                group: vote,
                index,
                passphrase,
            });
        }
        groups.insert(vote, entries);
    }

    let (n, t) = next("\"Tally\"")?;
    if t != "Tally" {
        return Err(malformed(n, "expected \"Tally\""));
    }
    let mut tally = BTreeMap::new();
    for vote in Vote::ALL {
        let (n, line) = next("tally line")?;
        let count = line
            .strip_prefix(vote.as_str())
            .and_then(|r| r.strip_prefix(": "))
            .ok_or_else(|| malformed(n, format!("expected \"{vote}: <count>\"")))?;
        let count = parse_count(count, n)?;
        let listed = groups[&vote].len() as u64;
        if count != listed {
            return Err(malformed(
                n,
                format!("tally {vote}: {count} but {listed} lines listed"),
            ));
        }
        tally.insert(vote, count);
    }
    if pos != lines.len() {
        return Err(malformed(pos + 1, "trailing content after tally"));
    }
    Ok(VerificationPrompt {
        referendum_id,
        groups,
        tally,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Discrepancy {
    Tally {
        vote: Vote,
        listed: u64,
        claimed: u64,
    },
    Numbering {
        vote: Vote,
        position: usize,
        found: usize,
    },
}

/// Everything a voter checks "without calculation": each group is numbered
/// 1..n and the stated tally for the group is n.
pub fn check_tally(prompt: &VerificationPrompt) -> Vec<Discrepancy> {
    let mut out = Vec::new();
    for vote in Vote::ALL {
        let group = prompt.group(vote);
        for (i, line) in group.iter().enumerate() {
            if line.index != i + 1 {
                out.push(Discrepancy::Numbering {
                    vote,
                    position: i + 1,
                    found: line.index,
                });
            }
        }
        let listed = group.len() as u64;
        let claimed = prompt.stated_tally(vote);
        if listed != claimed {
            out.push(Discrepancy::Tally {
                vote,
                listed,
                claimed,
            });
        }
    }
    out
}

/// Every line whose passphrase is canonically equal to `passphrase`.
pub fn find_pair(prompt: &VerificationPrompt, passphrase: &Passphrase) -> Vec<(Vote, usize)> {
    prompt
        .lines()
        .filter(|l| l.passphrase.matches(passphrase))
        .map(|l| (l.group, l.index))
        .collect()
}

/// Imports a spreadsheet download. Requires a `passphrase` and a `vote`
/// column; a `timestamp` column is dropped. Headers are case-insensitive.
pub fn import_csv(
    reader: impl Read,
    referendum_id: ReferendumId,
) -> Result<VoteTable, PromptError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| PromptError::Csv(e.to_string()))?
        .clone();
    let mut p_col = None;
    let mut v_col = None;
    for (i, h) in headers.iter().enumerate() {
        match h.to_ascii_lowercase().as_str() {
            "passphrase" => p_col = Some(i),
            "vote" => v_col = Some(i),
            "timestamp" => {}
            other => return Err(PromptError::Csv(format!("unexpected column {other:?}"))),
        }
    }
    let (Some(p_col), Some(v_col)) = (p_col, v_col) else {
        return Err(PromptError::Csv(
            "header must name passphrase and vote columns".into(),
        ));
    };
    let mut pairs = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| PromptError::Csv(e.to_string()))?;
        let row = i + 2;
        let field = |c: usize| rec.get(c).unwrap_or_default();
        let p = Passphrase::new(field(p_col))
            .map_err(|e| PromptError::Csv(format!("row {row}: {e}")))?;
        let v: Vote = field(v_col)
            .parse()
            .map_err(|e| PromptError::Csv(format!("row {row}: {e}")))?;
        pairs.push((p, v));
    }
    Ok(VoteTable::from_pairs(referendum_id, pairs))
}
