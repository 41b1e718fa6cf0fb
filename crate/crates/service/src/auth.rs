//! Authentication stand-in for single sign-on, and expiring sessions.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Mutex;

use chrono::{DateTime, Duration, Utc};
use pvv_core::{Role, VoterId};
use rand::RngCore;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Resolves a presented credential to an identity.
pub trait Authenticator: Send + Sync {
    fn authenticate(&self, credential: &str) -> Option<VoterId>;
}

/// Fixed credential to identity table.
#[derive(Debug, Clone, Default)]
pub struct StaticRoster {
    entries: BTreeMap<String, VoterId>,
}

impl StaticRoster {
    pub fn new(entries: BTreeMap<String, VoterId>) -> Self {
        Self { entries }
    }

    pub fn insert(&mut self, credential: impl Into<String>, id: VoterId) {
        self.entries.insert(credential.into(), id);
    }
}

impl Authenticator for StaticRoster {
    fn authenticate(&self, credential: &str) -> Option<VoterId> {
        self.entries.get(credential).cloned()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Session {
    /// Bearer secret, lowercase hex.
    pub id: String,
    pub voter_id: VoterId,
    pub roles: BTreeSet<Role>,
    pub expiry: DateTime<Utc>,
}

impl Session {
    pub fn has(&self, role: Role) -> bool {
        self.roles.contains(&role)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum AuthError {
    #[error("unknown credential")]
    BadCredential,
    #[error("no such session")]
    NoSession,
    #[error("session expired")]
    Expired,
}

pub struct SessionManager {
    ttl: Duration,
    sessions: Mutex<HashMap<String, Session>>,
}

impl SessionManager {
    pub fn new(ttl: Duration) -> Self {
        Self {
            ttl,
            sessions: Mutex::new(HashMap::new()),
        }
    }

    pub fn open(
        &self,
        voter_id: VoterId,
        roles: BTreeSet<Role>,
        now: DateTime<Utc>,
        rng: &mut impl RngCore,
    ) -> Session {
        let mut secret = [0u8; 24];
        rng.fill_bytes(&mut secret);
        let session = Session {
            id: hex::encode(secret),
            voter_id,
            roles,
            expiry: now + self.ttl,
        };
        self.sessions
            .lock()
            .expect("session lock")
            .insert(session.id.clone(), session.clone());
        session
    }

    pub fn get(&self, id: &str, now: DateTime<Utc>) -> Result<Session, AuthError> {
        let mut map = self.sessions.lock().expect("session lock");
        let s = map.get(id).ok_or(AuthError::NoSession)?;
        if now >= s.expiry {
            map.remove(id);
            return Err(AuthError::Expired);
        }
        Ok(s.clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn sessions_expire() {
        let m = SessionManager::new(Duration::minutes(10));
        let t = DateTime::<Utc>::UNIX_EPOCH;
        let s = m.open(
            VoterId::new("a@example.org").unwrap(),
            [Role::Voter].into(),
            t,
            &mut StdRng::seed_from_u64(1),
        );
        assert!(m.get(&s.id, t + Duration::minutes(9)).is_ok());
        assert_eq!(m.get(&s.id, t + Duration::minutes(10)), Err(AuthError::Expired));
        assert_eq!(m.get(&s.id, t), Err(AuthError::NoSession));
        assert_eq!(m.get("nope", t), Err(AuthError::NoSession));
    }

    #[test]
    fn static_roster() {
        let mut r = StaticRoster::default();
        r.insert("pw", VoterId::new("a@example.org").unwrap());
        assert!(r.authenticate("pw").is_some());
        assert!(r.authenticate("PW").is_none());
    }
}
