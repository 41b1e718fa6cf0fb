//! Absentee inference from the raw store.
//!
//! Absentee ballots are cast before the meeting, so they are the earliest
//! rows of the stored table, and absentee voters acknowledge by identity.
//! Anyone with raw store access can therefore narrow an absentee's vote to
//! the first few rows. The published prompt is sorted and does not carry
//! this ordering. This module measures the exposure; it does not defend
//! against it.

use std::collections::BTreeMap;

use pvv_core::{Election, Vote, VoterId};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExposureReport {
    /// Known by identity from the acknowledgements.
    pub acknowledged: Vec<VoterId>,
    /// Rows cast on an absentee token.
    pub absentee_rows: usize,
    /// Votes in the absentee rows, readable by submission order.
    pub absentee_votes: BTreeMap<Vote, u64>,
    /// Set when the acknowledgements and the early rows pin down exactly
    /// one voter's choice.
    pub identified: Option<(VoterId, Vote)>,
    /// Acknowledged voters whose vote is fully determined, because every
    /// absentee row carries the same vote.
    pub fully_determined: usize,
    /// The published bundle lists pairs sorted, never in submission order.
    pub published_order_hidden: bool,
}

pub fn absentee_exposure(election: &Election) -> ExposureReport {
    let acknowledged: Vec<VoterId> = election
        .participation()
        .absentee_acks
        .iter()
        .cloned()
        .collect();
    let rows: Vec<&pvv_core::model::BallotEntry> = election
        .vote_table()
        .entries()
        .iter()
        .filter(|e| e.absentee)
        .collect();
    let mut absentee_votes = BTreeMap::new();
    for r in &rows {
        *absentee_votes.entry(r.vote).or_insert(0u64) += 1;
    }
    let identified = match (acknowledged.as_slice(), rows.as_slice()) {
        ([who], [row]) => Some((who.clone(), row.vote)),
        _ => None,
    };
    let fully_determined = if absentee_votes.len() == 1 && rows.len() == acknowledged.len() {
        acknowledged.len()
    } else {
        0
    };
    let published_order_hidden = election.bundle().map_or(true, |b| {
        b.vote_table
            .windows(2)
            .all(|w| w[0].passphrase.normalized() <= w[1].passphrase.normalized())
    });
    ExposureReport {
        acknowledged,
        absentee_rows: rows.len(),
        absentee_votes,
        identified,
        fully_determined,
        published_order_hidden,
    }
}
