//! JSON-over-HTTP binding of [`Service`].
//!
//! Authenticated endpoints take `Authorization: Bearer <session id>` from
//! `POST /sessions`. Ballot submission is anonymous and carries the voting
//! token in the body instead. Errors are `{"error": kind, "message": text}`.

use std::sync::Arc;

use axum::extract::{FromRequestParts, Path, State};
use axum::http::header::{AUTHORIZATION, CONTENT_TYPE};
use axum::http::request::Parts;
use axum::http::StatusCode;
use axum::response::{IntoResponse, Response};
use axum::routing::{get, post};
use axum::{Json, Router};
use pvv_core::{Attestation, ElectionError, ElectionPhase, ReferendumId, Token, Vote};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::auth::Session;
use crate::registrar::RegistrarError;
use crate::service::{CreateReferendum, DisputeRequest, Service, ServiceError};

pub struct ApiError(pub ServiceError);

impl From<ServiceError> for ApiError {
    fn from(e: ServiceError) -> Self {
        ApiError(e)
    }
}

pub fn status_of(e: &ServiceError) -> StatusCode {
    use ElectionError as E;
    match e {
        ServiceError::Auth(_) => StatusCode::UNAUTHORIZED,
        ServiceError::Forbidden(_) | ServiceError::Registrar(RegistrarError::Ineligible) => {
            StatusCode::FORBIDDEN
        }
        ServiceError::NotFound(_) => StatusCode::NOT_FOUND,
        ServiceError::BadRequest(_) => StatusCode::BAD_REQUEST,
        ServiceError::AlreadyExists(_) | ServiceError::Registrar(RegistrarError::AlreadyIssued) => {
            StatusCode::CONFLICT
        }
        ServiceError::Election(e) => match e {
            E::UnauthorizedActor { .. }
            | E::IneligibleVoter(_)
            | E::NotAbsenteeApproved(_)
            | E::InvalidToken => StatusCode::FORBIDDEN,
            E::UnknownClaim(_) => StatusCode::NOT_FOUND,
            E::NotACommitment => StatusCode::BAD_REQUEST,
            E::Privacy(_) | E::Chain(_) => StatusCode::INTERNAL_SERVER_ERROR,
            _ => StatusCode::CONFLICT,
        },
        ServiceError::Registrar(RegistrarError::Store(_))
        | ServiceError::Integrity(_)
        | ServiceError::Store(_) => StatusCode::INTERNAL_SERVER_ERROR,
    }
}

impl IntoResponse for ApiError {
    fn into_response(self) -> Response {
        let body = json!({"error": self.0.kind(), "message": self.0.to_string()});
        (status_of(&self.0), Json(body)).into_response()
    }
}

type ApiResult<T> = Result<T, ApiError>;
type Svc = State<Arc<Service>>;

/// An authenticated caller.
pub struct Authed(pub Session);

impl FromRequestParts<Arc<Service>> for Authed {
    type Rejection = ApiError;

    async fn from_request_parts(parts: &mut Parts, svc: &Arc<Service>) -> ApiResult<Self> {
        let bearer = parts
            .headers
            .get(AUTHORIZATION)
            .and_then(|v| v.to_str().ok())
            .and_then(|v| v.strip_prefix("Bearer "))
            .ok_or(ServiceError::Auth(crate::auth::AuthError::NoSession))?;
        Ok(Authed(svc.session(bearer.trim())?))
    }
}

fn rid(id: &str) -> ApiResult<ReferendumId> {
    Ok(ReferendumId::new(id).map_err(ServiceError::from)?)
}

fn text(body: String, content_type: &'static str) -> Response {
    ([(CONTENT_TYPE, content_type)], body).into_response()
}

#[derive(Debug, Serialize, Deserialize)]
pub struct LoginRequest {
    pub credential: String,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PhaseRequest {
    pub phase: ElectionPhase,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TokenResponse {
    pub token: Token,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct BallotRequest {
    pub token: Token,
    pub passphrase: String,
    pub vote: Vote,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CountResponse {
    pub count: usize,
}

async fn login(State(svc): Svc, Json(req): Json<LoginRequest>) -> ApiResult<Response> {
    Ok(Json(svc.login(&req.credential)?).into_response())
}

async fn create(State(svc): Svc, Authed(s): Authed, Json(req): Json<CreateReferendum>) -> ApiResult<Response> {
    let status = svc.create_referendum(&s, req)?;
    Ok((StatusCode::CREATED, Json(status)).into_response())
}

async fn status(State(svc): Svc, Path(id): Path<String>) -> ApiResult<Response> {
    Ok(Json(svc.status(&rid(&id)?)?).into_response())
}

async fn phase(
    State(svc): Svc,
    Authed(s): Authed,
    Path(id): Path<String>,
    Json(req): Json<PhaseRequest>,
) -> ApiResult<Response> {
    Ok(Json(svc.advance_phase(&s, &rid(&id)?, req.phase)?).into_response())
}

async fn token(State(svc): Svc, Authed(s): Authed, Path(id): Path<String>) -> ApiResult<Response> {
    let token = svc.issue_token(&s, &rid(&id)?)?;
    Ok((StatusCode::CREATED, Json(TokenResponse { token })).into_response())
}

async fn ballot(
    State(svc): Svc,
    Path(id): Path<String>,
    Json(req): Json<BallotRequest>,
) -> ApiResult<Response> {
    let r = svc.cast_ballot(&rid(&id)?, &req.token, &req.passphrase, req.vote)?;
    Ok((StatusCode::CREATED, Json(r)).into_response())
}

async fn absentee_ack(State(svc): Svc, Authed(s): Authed, Path(id): Path<String>) -> ApiResult<Response> {
    svc.absentee_ack(&s, &rid(&id)?)?;
    Ok(StatusCode::NO_CONTENT.into_response())
}

async fn count(State(svc): Svc, Path(id): Path<String>) -> ApiResult<Response> {
    let count = svc.live_count(&rid(&id)?)?;
    Ok(Json(CountResponse { count }).into_response())
}

async fn tally(State(svc): Svc, Path(id): Path<String>) -> ApiResult<Response> {
    Ok(Json(svc.tally(&rid(&id)?)?).into_response())
}

async fn publish_prompt(State(svc): Svc, Authed(s): Authed, Path(id): Path<String>) -> ApiResult<Response> {
    let body = svc.publish_prompt(&s, &rid(&id)?)?;
    Ok((StatusCode::CREATED, text(body, "text/plain; charset=utf-8")).into_response())
}

async fn get_prompt(State(svc): Svc, Path(id): Path<String>) -> ApiResult<Response> {
    Ok(text(svc.prompt(&rid(&id)?)?, "text/plain; charset=utf-8"))
}

async fn verification(
    State(svc): Svc,
    Authed(s): Authed,
    Path(id): Path<String>,
    Json(a): Json<Attestation>,
) -> ApiResult<Response> {
    svc.record_verification(&s, &rid(&id)?, a)?;
    Ok(StatusCode::NO_CONTENT.into_response())
}

async fn participation(State(svc): Svc, Authed(s): Authed, Path(id): Path<String>) -> ApiResult<Response> {
    Ok(Json(svc.participation(&s, &rid(&id)?)?).into_response())
}

async fn bundle(State(svc): Svc, Path(id): Path<String>) -> ApiResult<Response> {
    let b = svc.bundle(&rid(&id)?)?;
    Ok(text(b.to_canonical_json(), "application/json"))
}

async fn dispute(
    State(svc): Svc,
    Authed(s): Authed,
    Path(id): Path<String>,
    Json(req): Json<DisputeRequest>,
) -> ApiResult<Response> {
    let r = svc.file_dispute(&s, &rid(&id)?, req)?;
    Ok((StatusCode::CREATED, Json(r)).into_response())
}

async fn claims(State(svc): Svc, Authed(s): Authed, Path(id): Path<String>) -> ApiResult<Response> {
    Ok(Json(svc.claims(&s, &rid(&id)?)?).into_response())
}

async fn dispute_report(State(svc): Svc, Path(id): Path<String>) -> ApiResult<Response> {
    Ok(Json(svc.dispute_report(&rid(&id)?)?).into_response())
}

async fn audit_log(State(svc): Svc, Path(id): Path<String>) -> ApiResult<Response> {
    Ok(text(svc.audit_log(&rid(&id)?)?, "application/x-ndjson"))
}

pub fn router(svc: Arc<Service>) -> Router {
    Router::new()
        .route("/sessions", post(login))
        .route("/referenda", post(create))
        .route("/referenda/{id}", get(status))
        .route("/referenda/{id}/phase", post(phase))
        .route("/referenda/{id}/token", post(token))
        .route("/referenda/{id}/ballot", post(ballot))
        .route("/referenda/{id}/absentee-ack", post(absentee_ack))
        .route("/referenda/{id}/count", get(count))
        .route("/referenda/{id}/tally", get(tally))
        .route("/referenda/{id}/prompt", get(get_prompt).post(publish_prompt))
        .route("/referenda/{id}/verification", post(verification))
        .route("/referenda/{id}/participation", get(participation))
        .route("/referenda/{id}/bundle", get(bundle))
        .route("/referenda/{id}/dispute", post(dispute))
        .route("/referenda/{id}/claims", get(claims))
        .route("/referenda/{id}/dispute-report", get(dispute_report))
        .route("/referenda/{id}/audit-log", get(audit_log))
        .with_state(svc)
}
