//! Adversary simulation and election administration on top of the
//! in-process service.
//!
//! [`run_scenario`] drives one whole election with a corrupt EA that edits
//! the stored vote table between close and publication, then lets every
//! verifying voter and the trusted parties run their checks.
//! [`run_matrix`] aggregates detection rates over seeded trials.

pub mod cli;
pub mod detect;
pub mod exposure;
pub mod matrix;
pub mod scenario;
pub mod sim;

pub use detect::{run_scenario, voter_check, DetectionResult, Detector, HarnessError, TranscriptEvent};
pub use exposure::{absentee_exposure, ExposureReport};
pub use matrix::{run_matrix, DetectionTable, MatrixRow};
pub use scenario::{AdversaryAction, PassphrasePolicy, Scenario, ScenarioError, VoterBehavior};
pub use sim::{Sim, SimOptions};
