//! Token issuance and single-use enforcement.
//!
//! Two record kinds live in the registrar namespace and share nothing but
//! the referendum id:
//!
//! - `{rid}/token/{hex}`: the token state, keyed by token value only;
//! - `{rid}/issued/{voter}`: an issued flag carrying no token material.
//!
//! The registrar process sees both halves at issuance time. That is the
//! trust placed in it, the same trust a hosted form service would need.

use pvv_core::model::TokenState;
use pvv_core::{ReferendumId, Token, TokenLedger, VoterId};
use rand::RngCore;
use thiserror::Error;

use crate::store::{Namespace, StoreError, Txn};

#[derive(Debug, Error)]
pub enum RegistrarError {
    #[error("a token was already issued to this voter")]
    AlreadyIssued,
    #[error("not an eligible voter for this referendum")]
    Ineligible,
    #[error(transparent)]
    Store(#[from] StoreError),
}

pub fn token_key(rid: &ReferendumId, token: &Token) -> String {
    format!("{rid}/token/{token}")
}

pub fn issued_key(rid: &ReferendumId, voter: &VoterId) -> String {
    format!("{rid}/issued/{voter}")
}

/// Issues a fresh token. Eligibility is the caller's check; the registrar
/// only enforces one token per voter.
pub fn issue_token(
    txn: &mut Txn,
    rid: &ReferendumId,
    voter: &VoterId,
    absentee: bool,
    rng: &mut impl RngCore,
) -> Result<Token, RegistrarError> {
    let flag = issued_key(rid, voter);
    if txn.get(Namespace::Registrar, &flag)?.is_some() {
        return Err(RegistrarError::AlreadyIssued);
    }
    let token = loop {
        let t = Token::random(rng);
        if txn.get(Namespace::Registrar, &token_key(rid, &t))?.is_none() {
            break t;
        }
    };
    let state = TokenState {
        absentee,
        consumed: false,
    };
    txn.put(
        Namespace::Registrar,
        &token_key(rid, &token),
        &serde_json::to_vec(&state).expect("token state serializes"),
    )?;
    txn.put(Namespace::Registrar, &flag, b"issued")?;
    Ok(token)
}

/// A ledger holding just `token`, if the registrar knows it.
pub fn load_ledger(
    txn: &Txn,
    rid: &ReferendumId,
    token: &Token,
) -> Result<TokenLedger, StoreError> {
    let mut ledger = TokenLedger::new();
    if let Some(bytes) = txn.get(Namespace::Registrar, &token_key(rid, token))? {
        if let Ok(state) = serde_json::from_slice::<TokenState>(&bytes) {
            ledger.insert(*token, state.absentee);
            if state.consumed {
                ledger.consume(token).expect("just inserted");
            }
        }
    }
    Ok(ledger)
}

/// Writes back the state of every token in `ledger`.
pub fn store_ledger(
    txn: &mut Txn,
    rid: &ReferendumId,
    ledger: &TokenLedger,
) -> Result<(), StoreError> {
    for (token, state) in ledger.tokens() {
        txn.put(
            Namespace::Registrar,
            &token_key(rid, token),
            &serde_json::to_vec(state).expect("token state serializes"),
        )?;
    }
    Ok(())
}
