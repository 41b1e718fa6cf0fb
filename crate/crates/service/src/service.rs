//! The in-process election service. HTTP handlers are thin wrappers over
//! these methods.
//!
//! Every write to one referendum takes that referendum's lock, reloads its
//! state from the store, applies one core operation and commits in a single
//! transaction, so token consumption is an atomic check-and-set. State is
//! reloaded on every request: whatever is in the store is what the service
//! acts on, including any edits made behind its back.

use std::collections::{BTreeMap, HashMap};
use std::path::Path;
use std::sync::{Arc, Mutex};

use chrono::{DateTime, Duration, NaiveDate, Utc};
use pvv_core::audit::sha256_hex;
use pvv_core::dispute::{CommitmentProof, DisputeRecord};
use pvv_core::election::{AppliedCorrection, ParticipationReport};
use pvv_core::model::ModelError;
use pvv_core::passphrase::{validate, PassphraseError, Warning};
use pvv_core::{
    AdjudicationOutcome, Attestation, AuditBundle, AuditLog, ClaimStore, DisputeClaim,
    DisputeReport, Election, ElectionError, ElectionParts, ElectionPhase, Passphrase, Referendum,
    ReferendumConfig, ReferendumId, ReferendumSpec, Role, Token, Vote, VoterId,
};
use pvv_core::{parse_prompt, VoteTable};
use rand::rngs::StdRng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::auth::{AuthError, Authenticator, Session, SessionManager, StaticRoster};
use crate::clock::{Clock, SystemClock};
use crate::config::ServiceConfig;
use crate::notify::{LogSink, Notification, NotificationKind, NotificationSink, Payload, Recipient};
use crate::registrar::{self, RegistrarError};
use crate::store::{Namespace, Principal, Store, StoreError, Txn};

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error(transparent)]
    Auth(#[from] AuthError),
    #[error("requires role {0}")]
    Forbidden(String),
    #[error("no referendum {0}")]
    NotFound(ReferendumId),
    #[error("referendum {0} already exists")]
    AlreadyExists(ReferendumId),
    #[error("{0}")]
    BadRequest(String),
    #[error(transparent)]
    Registrar(#[from] RegistrarError),
    #[error(transparent)]
    Election(#[from] ElectionError),
    #[error("stored state failed an integrity check: {0}")]
    Integrity(String),
    #[error(transparent)]
    Store(#[from] StoreError),
}

impl From<ModelError> for ServiceError {
    fn from(e: ModelError) -> Self {
        ServiceError::BadRequest(e.to_string())
    }
}

impl ServiceError {
    /// Stable machine-readable error name.
    pub fn kind(&self) -> &'static str {
        use ElectionError as E;
        match self {
            ServiceError::Auth(AuthError::Expired) => "SessionExpired",
            ServiceError::Auth(_) => "Unauthenticated",
            ServiceError::Forbidden(_) => "Forbidden",
            ServiceError::NotFound(_) => "NotFound",
            ServiceError::AlreadyExists(_) => "AlreadyExists",
            ServiceError::BadRequest(_) => "BadRequest",
            ServiceError::Registrar(RegistrarError::AlreadyIssued) => "AlreadyIssued",
            ServiceError::Registrar(RegistrarError::Ineligible) => "Ineligible",
            ServiceError::Registrar(RegistrarError::Store(_)) => "StoreError",
            ServiceError::Election(e) => match e {
                E::IllegalTransition { .. } => "IllegalTransition",
                E::UnauthorizedActor { .. } => "UnauthorizedActor",
                E::PromptNotPublished => "PromptNotPublished",
                E::AlreadyPublished => "AlreadyPublished",
                E::VotingNotOpen => "VotingNotOpen",
                E::LateVote => "LateVote",
                E::InvalidToken => "InvalidToken",
                E::TokenConsumed => "DuplicateSubmission",
                E::NotACommitment => "NotACommitment",
                E::NotAbsenteeApproved(_) => "NotAbsenteeApproved",
                E::PastCutoff => "PastCutoff",
                E::IneligibleVoter(_) => "Ineligible",
                E::NotYetAvailable(_) => "NotYetAvailable",
                E::WrongPhase { .. } => "WrongPhase",
                E::WindowClosed => "WindowClosed",
                E::WindowStillOpen => "WindowStillOpen",
                E::UnknownClaim(_) => "UnknownClaim",
                E::NotCorrectable => "NotCorrectable",
                E::Audit(_) => "LogSealed",
                E::Privacy(_) => "PrivacyViolation",
                E::Chain(_) => "ChainBroken",
            },
            ServiceError::Integrity(_) => "IntegrityFailure",
            ServiceError::Store(_) => "StoreError",
        }
    }
}

pub type Result<T, E = ServiceError> = std::result::Result<T, E>;

/// Names of the per-referendum records in the election namespace.
pub mod records {
    pub const REFERENDUM: &str = "referendum";
    pub const VOTE_TABLE: &str = "vote_table";
    pub const PARTICIPATION: &str = "participation";
    pub const AUDIT_LOG: &str = "audit_log";
    pub const PROMPT: &str = "prompt";
    pub const DISPUTES: &str = "disputes";
    pub const CORRECTIONS: &str = "corrections";
    pub const BUNDLE: &str = "bundle";
    pub const FIRST_PUBLISHED_AT: &str = "first_published_at";
}

pub fn record_key(rid: &ReferendumId, record: &str) -> String {
    format!("{rid}/{record}")
}

pub fn claim_key(rid: &ReferendumId, claim_id: u64) -> String {
    format!("{rid}/claim/{claim_id:08}")
}

fn to_json<T: Serialize>(v: &T) -> Vec<u8> {
    serde_json::to_vec(v).expect("records serialize")
}

fn from_json<T: for<'de> Deserialize<'de>>(name: &str, bytes: &[u8]) -> Result<T> {
    serde_json::from_slice(bytes).map_err(|e| ServiceError::Integrity(format!("{name}: {e}")))
}

fn load_parts(
    rid: &ReferendumId,
    get: impl Fn(&str) -> Result<Option<Vec<u8>>, StoreError>,
) -> Result<Option<ElectionParts>> {
    use records::*;
    let fetch = |name: &str| get(&record_key(rid, name));
    let Some(referendum) = fetch(REFERENDUM)? else {
        return Ok(None);
    };
    let need = |name: &str| -> Result<Vec<u8>> {
        fetch(name)?.ok_or_else(|| ServiceError::Integrity(format!("missing {name} record")))
    };
    let referendum: Referendum = from_json(REFERENDUM, &referendum)?;
    let audit_log = AuditLog::from_jsonl_bytes(&need(AUDIT_LOG)?)
        .map_err(|e| ServiceError::Integrity(e.to_string()))?;
    let prompt = match fetch(PROMPT)? {
        Some(bytes) => {
            let text = String::from_utf8(bytes)
                .map_err(|_| ServiceError::Integrity("prompt is not UTF-8".into()))?;
            Some(parse_prompt(&text).map_err(|e| ServiceError::Integrity(e.to_string()))?)
        }
        None => None,
    };
    let bundle = fetch(BUNDLE)?
        .map(|b| from_json::<AuditBundle>(BUNDLE, &b))
        .transpose()?;
    let first_published_at = fetch(FIRST_PUBLISHED_AT)?
        .map(|b| from_json::<DateTime<Utc>>(FIRST_PUBLISHED_AT, &b))
        .transpose()?;
    Ok(Some(ElectionParts {
        referendum,
        vote_table: from_json(VOTE_TABLE, &need(VOTE_TABLE)?)?,
        participation: from_json(PARTICIPATION, &need(PARTICIPATION)?)?,
        audit_log,
        prompt,
        disputes: from_json::<Vec<DisputeRecord>>(DISPUTES, &need(DISPUTES)?)?,
        corrections: from_json::<Vec<AppliedCorrection>>(CORRECTIONS, &need(CORRECTIONS)?)?,
        bundle,
        first_published_at,
    }))
}

fn save_parts(txn: &mut Txn, parts: &ElectionParts) -> Result<(), StoreError> {
    use records::*;
    let rid = &parts.referendum.referendum_id;
    let ns = Namespace::Election;
    txn.put(ns, &record_key(rid, REFERENDUM), &to_json(&parts.referendum))?;
    txn.put(ns, &record_key(rid, VOTE_TABLE), &to_json(&parts.vote_table))?;
    txn.put(ns, &record_key(rid, PARTICIPATION), &to_json(&parts.participation))?;
    txn.put(ns, &record_key(rid, AUDIT_LOG), parts.audit_log.to_jsonl().as_bytes())?;
    txn.put(ns, &record_key(rid, DISPUTES), &to_json(&parts.disputes))?;
    txn.put(ns, &record_key(rid, CORRECTIONS), &to_json(&parts.corrections))?;
    if let Some(p) = &parts.prompt {
        txn.put(ns, &record_key(rid, PROMPT), p.render().as_bytes())?;
    }
    if let Some(b) = &parts.bundle {
        txn.put(ns, &record_key(rid, BUNDLE), b.to_canonical_json().as_bytes())?;
    }
    if let Some(t) = &parts.first_published_at {
        txn.put(ns, &record_key(rid, FIRST_PUBLISHED_AT), &to_json(t))?;
    }
    Ok(())
}

/// Body of `POST /referenda`. `config` falls back to the service defaults.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CreateReferendum {
    pub referendum_id: ReferendumId,
    pub date: NaiveDate,
    pub question: String,
    pub eligible_voters: Vec<VoterId>,
    #[serde(default)]
    pub absentee_approved: Vec<VoterId>,
    pub meeting_start: DateTime<Utc>,
    #[serde(default)]
    pub absentee_cutoff: Option<DateTime<Utc>>,
    #[serde(default)]
    pub config: Option<ReferendumConfig>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReferendumStatus {
    pub referendum_id: ReferendumId,
    pub question: String,
    pub date: NaiveDate,
    pub phase: ElectionPhase,
    pub eligible: usize,
    pub absentee_cutoff: DateTime<Utc>,
    pub prompt_published: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BallotReceipt {
    pub accepted: bool,
    pub warnings: Vec<Warning>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseChange {
    pub from: ElectionPhase,
    pub to: ElectionPhase,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisputeRequest {
    pub passphrase: Passphrase,
    pub claimed_vote: Vote,
    #[serde(default)]
    pub commitment_proof: Option<CommitmentProof>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DisputeResponse {
    pub claim_id: u64,
    pub outcome: AdjudicationOutcome,
    pub corrected: bool,
    /// Digest of the prompt after any correction.
    pub prompt_sha256: String,
}

type Outbox = Vec<(Payload, bool)>;

pub struct ServiceBuilder {
    config: ServiceConfig,
    store: Option<Store>,
    auth: Option<Box<dyn Authenticator>>,
    sink: Option<Arc<dyn NotificationSink>>,
    clock: Option<Arc<dyn Clock>>,
    seed: Option<u64>,
}

impl ServiceBuilder {
    pub fn store(mut self, store: Store) -> Self {
        self.store = Some(store);
        self
    }

    pub fn authenticator(mut self, auth: impl Authenticator + 'static) -> Self {
        self.auth = Some(Box::new(auth));
        self
    }

    pub fn sink(mut self, sink: Arc<dyn NotificationSink>) -> Self {
        self.sink = Some(sink);
        self
    }

    pub fn clock(mut self, clock: Arc<dyn Clock>) -> Self {
        self.clock = Some(clock);
        self
    }

    /// Seeds token and session generation; for reproducible simulations.
    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }

    pub fn build(self) -> Result<Service> {
        let store = match self.store {
            Some(s) => s,
            None => Store::in_memory()?,
        };
        let auth = self.auth.unwrap_or_else(|| {
            Box::new(StaticRoster::new(self.config.credentials.clone()))
        });
        let rng = match self.seed {
            Some(s) => StdRng::seed_from_u64(s),
            None => StdRng::from_os_rng(),
        };
        Ok(Service {
            sessions: SessionManager::new(Duration::minutes(i64::from(
                self.config.session_ttl_minutes,
            ))),
            config: self.config,
            store,
            auth,
            sink: self.sink.unwrap_or_else(|| Arc::new(LogSink::new())),
            clock: self.clock.unwrap_or_else(|| Arc::new(SystemClock)),
            rng: Mutex::new(rng),
            locks: Mutex::new(HashMap::new()),
        })
    }
}

pub struct Service {
    config: ServiceConfig,
    store: Store,
    auth: Box<dyn Authenticator>,
    sessions: SessionManager,
    sink: Arc<dyn NotificationSink>,
    clock: Arc<dyn Clock>,
    rng: Mutex<StdRng>,
    locks: Mutex<HashMap<ReferendumId, Arc<Mutex<()>>>>,
}

impl Service {
    pub fn builder(config: ServiceConfig) -> ServiceBuilder {
        ServiceBuilder {
            config,
            store: None,
            auth: None,
            sink: None,
            clock: None,
            seed: None,
        }
    }

    /// A file-backed service under `data_dir`.
    pub fn open(config: ServiceConfig, data_dir: &Path) -> Result<Service> {
        std::fs::create_dir_all(data_dir)
            .map_err(|e| ServiceError::BadRequest(format!("data dir: {e}")))?;
        let store = Store::open(data_dir.join("pvv.redb"))?;
        Service::builder(config).store(store).build()
    }

    pub fn config(&self) -> &ServiceConfig {
        &self.config
    }

    /// Raw store access, for inspection and for modelling an insider.
    pub fn store(&self) -> &Store {
        &self.store
    }

    pub fn now(&self) -> DateTime<Utc> {
        self.clock.now()
    }

    fn lock_for(&self, rid: &ReferendumId) -> Arc<Mutex<()>> {
        self.locks
            .lock()
            .expect("lock table")
            .entry(rid.clone())
            .or_default()
            .clone()
    }

    fn dispatch(&self, referendum: &Referendum, outbox: Outbox) {
        for (payload, broadcast) in outbox {
            let mut recipients: Vec<Recipient> = Vec::new();
            if broadcast {
                recipients.extend(referendum.eligible_voters.iter().cloned().map(Recipient::Voter));
            }
            recipients.push(Recipient::T2);
            for recipient in recipients {
                let n = Notification {
                    recipient,
                    payload: payload.clone(),
                };
                if let Err(e) = self.sink.deliver(&n) {
                    tracing::error!(error = %e, "notification delivery failed");
                }
            }
        }
    }

    fn link(&self, rid: &ReferendumId, what: &str) -> String {
        format!("{}/referenda/{rid}/{what}", self.config.public_url.trim_end_matches('/'))
    }

    /// Loads one referendum, runs `f` and commits. Notifications queued in
    /// the outbox go out after the commit.
    fn with_election<T>(
        &self,
        rid: &ReferendumId,
        f: impl FnOnce(&mut Election, &mut Txn, &mut Outbox) -> Result<T>,
    ) -> Result<T> {
        let lock = self.lock_for(rid);
        let _guard = lock.lock().expect("referendum lock");
        let mut outbox = Outbox::new();
        let (out, referendum) = self.store.write(|txn| {
            let parts = load_parts(rid, |k| txn.get(Namespace::Election, k))?
                .ok_or_else(|| ServiceError::NotFound(rid.clone()))?;
            let mut election = Election::from_parts(parts)?;
            let out = f(&mut election, txn, &mut outbox)?;
            save_parts(txn, election.parts())?;
            Ok::<_, ServiceError>((out, election.referendum().clone()))
        })?;
        self.dispatch(&referendum, outbox);
        Ok(out)
    }

    /// Read-only snapshot of one referendum.
    pub fn election(&self, rid: &ReferendumId) -> Result<Election> {
        let parts = load_parts(rid, |k| {
            self.store.read(Principal::System, Namespace::Election, k)
        })?
        .ok_or_else(|| ServiceError::NotFound(rid.clone()))?;
        Ok(Election::from_parts(parts)?)
    }

    fn require(session: &Session, role: Role) -> Result<()> {
        if session.has(role) {
            Ok(())
        } else {
            Err(ServiceError::Forbidden(role.to_string()))
        }
    }

    pub fn login(&self, credential: &str) -> Result<Session> {
        let id = self
            .auth
            .authenticate(credential)
            .ok_or(AuthError::BadCredential)?;
        let roles = self.config.roles.roles_of(&id);
        let mut rng = self.rng.lock().expect("rng lock");
        Ok(self.sessions.open(id, roles, self.now(), &mut *rng))
    }

    pub fn session(&self, bearer: &str) -> Result<Session> {
        Ok(self.sessions.get(bearer, self.now())?)
    }

    pub fn create_referendum(&self, session: &Session, req: CreateReferendum) -> Result<ReferendumStatus> {
        Self::require(session, Role::Ea)?;
        for t in self.config.roles.trusted_parties() {
            if req.eligible_voters.contains(t) {
                return Err(ServiceError::BadRequest(format!(
                    "trusted party {t} may not be on the roster"
                )));
            }
        }
        let referendum = Referendum::new(ReferendumSpec {
            referendum_id: req.referendum_id.clone(),
            date: req.date,
            question: req.question,
            eligible_voters: req.eligible_voters.into_iter().collect(),
            absentee_approved: req.absentee_approved.into_iter().collect(),
            meeting_start: req.meeting_start,
            absentee_cutoff: req.absentee_cutoff,
            config: req.config.unwrap_or_else(|| self.config.defaults.clone()),
        })?;
        let rid = req.referendum_id;
        let lock = self.lock_for(&rid);
        let _guard = lock.lock().expect("referendum lock");
        let election = Election::new(referendum);
        self.store.write(|txn| {
            if txn
                .get(Namespace::Election, &record_key(&rid, records::REFERENDUM))?
                .is_some()
            {
                return Err(ServiceError::AlreadyExists(rid.clone()));
            }
            save_parts(txn, election.parts())?;
            Ok(())
        })?;
        Ok(status_of(&election))
    }

    pub fn status(&self, rid: &ReferendumId) -> Result<ReferendumStatus> {
        Ok(status_of(&self.election(rid)?))
    }

    pub fn advance_phase(
        &self,
        session: &Session,
        rid: &ReferendumId,
        target: ElectionPhase,
    ) -> Result<PhaseChange> {
        let actor = if session.has(Role::Ea) {
            Role::Ea
        } else if session.has(Role::Chair) {
            Role::Chair
        } else {
            return Err(ServiceError::Forbidden("EA or Chair".into()));
        };
        let now = self.now();
        self.with_election(rid, |e, _, outbox| {
            let t = e.advance_phase(target, actor, now)?;
            match t.to {
                ElectionPhase::VotingClosed => {
                    let text = pvv_core::build_prompt(e.vote_table()).render();
                    outbox.push((
                        Payload {
                            referendum_id: rid.clone(),
                            kind: NotificationKind::VoteTableCopy,
                            subject: format!("{rid}: vote table at close"),
                            text: "Copy of the vote table as captured when voting closed.".into(),
                            link: self.link(rid, "prompt"),
                            prompt_sha256: Some(sha256_hex(text.as_bytes())),
                            prompt: Some(text),
                        },
                        false,
                    ));
                }
                ElectionPhase::VerificationClosed => {
                    let names: Vec<String> = e
                        .participation()
                        .verified
                        .keys()
                        .map(|v| v.to_string())
                        .collect();
                    outbox.push((
                        Payload {
                            referendum_id: rid.clone(),
                            kind: NotificationKind::VerificationTable,
                            subject: format!("{rid}: verification table"),
                            text: format!(
                                "{} of {} voters verified:\n{}",
                                names.len(),
                                e.referendum().eligible_voters.len(),
                                names.join("\n")
                            ),
                            link: self.link(rid, "participation"),
                            prompt: None,
                            prompt_sha256: None,
                        },
                        true,
                    ));
                }
                _ => {}
            }
            if let Some(b) = &t.bundle {
                outbox.push((
                    Payload {
                        referendum_id: rid.clone(),
                        kind: NotificationKind::BundlePublished,
                        subject: format!(
                            "{rid}: audit bundle {}",
                            if b.sealed { "sealed" } else { "published" }
                        ),
                        text: format!(
                            "The audit bundle is available. Chain head {}.",
                            b.chain_head_hash.map(|h| h.to_hex()).unwrap_or_default()
                        ),
                        link: self.link(rid, "bundle"),
                        prompt: None,
                        prompt_sha256: Some(sha256_hex(b.verification_prompt.as_bytes())),
                    },
                    true,
                ));
            }
            Ok(PhaseChange {
                from: t.from,
                to: t.to,
            })
        })
    }

    pub fn issue_token(&self, session: &Session, rid: &ReferendumId) -> Result<Token> {
        let voter = session.voter_id.clone();
        self.with_election(rid, |e, txn, _| {
            if !session.has(Role::Voter) || !e.referendum().is_eligible(&voter) {
                return Err(RegistrarError::Ineligible.into());
            }
            if e.phase() >= ElectionPhase::VotingClosed {
                return Err(ElectionError::LateVote.into());
            }
            let absentee = e.phase() == ElectionPhase::AbsenteeOpen
                && e.referendum().absentee_approved.contains(&voter);
            let mut rng = self.rng.lock().expect("rng lock");
            Ok(registrar::issue_token(txn, rid, &voter, absentee, &mut *rng)?)
        })
    }

    /// Anonymous: the token is the only credential.
    pub fn cast_ballot(
        &self,
        rid: &ReferendumId,
        token: &Token,
        passphrase: &str,
        vote: Vote,
    ) -> Result<BallotReceipt> {
        let report = validate(passphrase).map_err(|e| match e {
            PassphraseError::EmptyPassphrase => ServiceError::BadRequest(e.to_string()),
            other => ServiceError::BadRequest(other.to_string()),
        })?;
        let passphrase = Passphrase::new(passphrase)?;
        let now = self.now();
        self.with_election(rid, |e, txn, _| {
            let mut ledger = registrar::load_ledger(txn, rid, token)?;
            e.cast_ballot(&mut ledger, token, passphrase, vote, now)?;
            registrar::store_ledger(txn, rid, &ledger)?;
            Ok(BallotReceipt {
                accepted: true,
                warnings: report.warnings,
            })
        })
    }

    pub fn absentee_ack(&self, session: &Session, rid: &ReferendumId) -> Result<()> {
        Self::require(session, Role::Voter)?;
        let now = self.now();
        self.with_election(rid, |e, _, _| Ok(e.record_absentee_ack(&session.voter_id, now)?))
    }

    pub fn live_count(&self, rid: &ReferendumId) -> Result<usize> {
        Ok(self.election(rid)?.live_count()?)
    }

    pub fn tally(&self, rid: &ReferendumId) -> Result<BTreeMap<Vote, u64>> {
        Ok(self.election(rid)?.tally()?)
    }

    pub fn publish_prompt(&self, session: &Session, rid: &ReferendumId) -> Result<String> {
        if !session.has(Role::Ea) {
            let role = session.roles.iter().next_back().copied().unwrap_or(Role::Voter);
            return Err(ElectionError::UnauthorizedActor {
                role,
                action: "publish the prompt".into(),
            }
            .into());
        }
        self.with_election(rid, |e, _, outbox| {
            let text = e.publish_prompt(Role::Ea)?.render();
            let embed = e.referendum().config.embed_prompt;
            outbox.push((
                Payload {
                    referendum_id: rid.clone(),
                    kind: NotificationKind::PromptPublished,
                    subject: format!("{rid}: please verify your vote"),
                    text: "Find your (passphrase, vote) pair and check the tally.".into(),
                    link: self.link(rid, "prompt"),
                    prompt_sha256: Some(sha256_hex(text.as_bytes())),
                    prompt: embed.then(|| text.clone()),
                },
                true,
            ));
            Ok(text)
        })
    }

    /// The canonical prompt text as stored.
    pub fn prompt(&self, rid: &ReferendumId) -> Result<String> {
        self.election(rid)?
            .prompt()
            .map(|p| p.render())
            .ok_or(ElectionError::PromptNotPublished.into())
    }

    pub fn record_verification(
        &self,
        session: &Session,
        rid: &ReferendumId,
        attestation: Attestation,
    ) -> Result<()> {
        Self::require(session, Role::Voter)?;
        self.with_election(rid, |e, _, _| {
            Ok(e.record_verification(&session.voter_id, attestation)?)
        })
    }

    pub fn participation(&self, session: &Session, rid: &ReferendumId) -> Result<ParticipationReport> {
        if !(session.has(Role::Ea) || session.has(Role::Chair)) {
            return Err(ServiceError::Forbidden("EA or Chair".into()));
        }
        Ok(self.election(rid)?.participation_report()?)
    }

    pub fn bundle(&self, rid: &ReferendumId) -> Result<AuditBundle> {
        self.election(rid)?
            .bundle()
            .cloned()
            .ok_or(ElectionError::NotYetAvailable(ElectionPhase::Reported).into())
    }

    /// Files a claim, adjudicates it for the panel and applies the
    /// correction when the outcome allows one.
    pub fn file_dispute(
        &self,
        session: &Session,
        rid: &ReferendumId,
        req: DisputeRequest,
    ) -> Result<DisputeResponse> {
        Self::require(session, Role::Voter)?;
        let now = self.now();
        self.with_election(rid, |e, txn, outbox| {
            let mut claims = ClaimStore::new();
            let claim = e.file_claim(
                &mut claims,
                &session.voter_id,
                req.passphrase.clone(),
                req.claimed_vote,
                req.commitment_proof,
                now,
            )?;
            txn.put(
                Namespace::Claims,
                &claim_key(rid, claim.claim_id),
                &to_json(&claim),
            )?;
            let outcome = e.adjudicate(&claims, claim.claim_id)?;
            outbox.push((
                Payload {
                    referendum_id: rid.clone(),
                    kind: NotificationKind::DisputeFiled,
                    subject: format!("{rid}: dispute filed"),
                    text: format!(
                        "A voter has filed a dispute involving the pair ({}, {}).",
                        req.passphrase.raw(),
                        req.claimed_vote
                    ),
                    link: self.link(rid, "dispute-report"),
                    prompt: None,
                    prompt_sha256: None,
                },
                true,
            ));
            let corrected = outcome.correction.is_some();
            if corrected {
                let (prompt, _) = e.apply_correction(claim.claim_id, &outcome)?;
                let text = prompt.render();
                let embed = e.referendum().config.embed_prompt;
                outbox.push((
                    Payload {
                        referendum_id: rid.clone(),
                        kind: NotificationKind::CorrectionApplied,
                        subject: format!("{rid}: corrected verification prompt"),
                        text: format!("Claim {} led to a corrected vote.", claim.claim_id),
                        link: self.link(rid, "prompt"),
                        prompt_sha256: Some(sha256_hex(text.as_bytes())),
                        prompt: embed.then_some(text),
                    },
                    true,
                ));
            }
            let prompt_sha256 = sha256_hex(
                e.prompt()
                    .map(|p| p.render())
                    .unwrap_or_default()
                    .as_bytes(),
            );
            Ok(DisputeResponse {
                claim_id: claim.claim_id,
                outcome,
                corrected,
                prompt_sha256,
            })
        })
    }

    /// Confidential claims, for the Adjudication Panel.
    pub fn claims(&self, session: &Session, rid: &ReferendumId) -> Result<Vec<DisputeClaim>> {
        let who = if session.has(Role::Panel) {
            Principal::Role(Role::Panel)
        } else {
            return Err(ServiceError::Forbidden(Role::Panel.to_string()));
        };
        self.store
            .scan(who, Namespace::Claims, &format!("{rid}/claim/"))?
            .into_iter()
            .map(|(k, v)| from_json(&k, &v))
            .collect()
    }

    pub fn dispute_report(&self, rid: &ReferendumId) -> Result<DisputeReport> {
        Ok(self.election(rid)?.dispute_report(self.now())?)
    }

    pub fn audit_log(&self, rid: &ReferendumId) -> Result<String> {
        Ok(self.election(rid)?.audit_log().to_jsonl())
    }

    /// Overwrites the stored vote table. Models an insider with write
    /// access to the store; no event is logged.
    pub fn tamper_vote_table(
        &self,
        rid: &ReferendumId,
        f: impl FnOnce(&mut VoteTable),
    ) -> Result<()> {
        let key = record_key(rid, records::VOTE_TABLE);
        self.store.write(|txn| {
            let bytes = txn
                .get(Namespace::Election, &key)?
                .ok_or_else(|| ServiceError::NotFound(rid.clone()))?;
            let mut table: VoteTable = from_json(records::VOTE_TABLE, &bytes)?;
            f(&mut table);
            txn.put(Namespace::Election, &key, &to_json(&table))?;
            Ok(())
        })
    }
}

fn status_of(e: &Election) -> ReferendumStatus {
    let r = e.referendum();
    ReferendumStatus {
        referendum_id: r.referendum_id.clone(),
        question: r.question.clone(),
        date: r.date,
        phase: r.phase,
        eligible: r.eligible_voters.len(),
        absentee_cutoff: r.absentee_cutoff,
        prompt_published: e.prompt().is_some(),
    }
}
