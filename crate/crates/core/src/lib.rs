//! Phrase-verified voting: voters pick a short passphrase, submit it with
//! their vote, and later find the pair in a published prompt listing every
//! ballot. A voter who cannot find their pair, or finds the wrong vote,
//! disputes the result.

pub mod audit;
pub mod bundle;
pub mod dispute;
pub mod election;
pub mod model;
pub mod passphrase;
pub mod prompt;

pub use audit::{AuditEvent, AuditLog, ChainBreak, Digest, EventKind};
pub use bundle::{assemble_bundle, diff_bundles, AuditBundle, BundleChange, PrivacyViolation};
pub use dispute::{
    adjudicate, dispute_report, AdjudicationOutcome, Classification, ClaimStore, DisputeClaim,
    DisputeReport,
};
pub use election::{Election, ElectionError, ElectionParts};
pub use model::{
    Attestation, ElectionPhase, Passphrase, Referendum, ReferendumConfig, ReferendumId,
    ReferendumSpec, Role, Token, TokenLedger, Vote, VoteTable, VoterId,
};
pub use prompt::{build_prompt, parse_prompt, render_prompt, VerificationPrompt};
