//! Voter notifications. Every dispatch goes to each eligible voter and, as
//! a mirrored copy, to T2. The payload is built once, so every recipient and
//! every sink sees the same bytes.

use std::sync::Mutex;

use lettre::message::{header::ContentType, Mailbox};
use lettre::transport::smtp::authentication::Credentials;
use lettre::{Message, SmtpTransport, Transport};
use pvv_core::{ReferendumId, VoterId};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::SmtpConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum NotificationKind {
    /// The vote table as captured at close; sent to T2 only.
    VoteTableCopy,
    PromptPublished,
    VerificationTable,
    BundlePublished,
    DisputeFiled,
    CorrectionApplied,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Recipient {
    Voter(VoterId),
    T2,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Payload {
    pub referendum_id: ReferendumId,
    pub kind: NotificationKind,
    pub subject: String,
    pub text: String,
    pub link: String,
    /// Embedded prompt (or table copy) text, when configured.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt: Option<String>,
    /// Digest of the canonical prompt text, always present when a prompt
    /// is involved, embedded or not.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prompt_sha256: Option<String>,
}

impl Payload {
    /// The plain-text message body used by every sink.
    pub fn render_body(&self) -> String {
        let mut out = format!("{}\n\n{}\n", self.text, self.link);
        if let Some(d) = &self.prompt_sha256 {
            out.push_str(&format!("prompt-sha256: {d}\n"));
        }
        if let Some(p) = &self.prompt {
            out.push('\n');
            out.push_str(p);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Notification {
    pub recipient: Recipient,
    pub payload: Payload,
}

#[derive(Debug, Error)]
pub enum NotifyError {
    #[error("bad address {0:?}")]
    Address(String),
    #[error("smtp: {0}")]
    Smtp(String),
}

pub trait NotificationSink: Send + Sync {
    fn deliver(&self, n: &Notification) -> Result<(), NotifyError>;
}

/// Logs through `tracing` and keeps every notification for inspection.
#[derive(Debug, Default)]
pub struct LogSink {
    sent: Mutex<Vec<Notification>>,
}

impl LogSink {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn sent(&self) -> Vec<Notification> {
        self.sent.lock().expect("sink lock").clone()
    }

    pub fn clear(&self) {
        self.sent.lock().expect("sink lock").clear();
    }
}

impl NotificationSink for LogSink {
    fn deliver(&self, n: &Notification) -> Result<(), NotifyError> {
        tracing::info!(recipient = ?n.recipient, kind = ?n.payload.kind, "notification");
        self.sent.lock().expect("sink lock").push(n.clone());
        Ok(())
    }
}

/// Plain SMTP to a relay. TLS, if any, is the relay's business.
pub struct SmtpSink {
    transport: SmtpTransport,
    from: Mailbox,
    t2: Mailbox,
    voter_domain: Option<String>,
}

fn mailbox(s: &str) -> Result<Mailbox, NotifyError> {
    s.parse().map_err(|_| NotifyError::Address(s.to_owned()))
}

impl SmtpSink {
    pub fn new(cfg: &SmtpConfig) -> Result<Self, NotifyError> {
        let mut b = SmtpTransport::builder_dangerous(cfg.host.clone()).port(cfg.port);
        if let (Some(u), Some(p)) = (&cfg.username, &cfg.password) {
            b = b.credentials(Credentials::new(u.clone(), p.clone()));
        }
        Ok(Self {
            transport: b.build(),
            from: mailbox(&cfg.from)?,
            t2: mailbox(&cfg.t2_address)?,
            voter_domain: cfg.voter_domain.clone(),
        })
    }

    pub fn address_of(&self, r: &Recipient) -> Result<Mailbox, NotifyError> {
        match r {
            Recipient::T2 => Ok(self.t2.clone()),
            Recipient::Voter(v) if v.as_str().contains('@') => mailbox(v.as_str()),
            Recipient::Voter(v) => match &self.voter_domain {
                Some(d) => mailbox(&format!("{v}@{d}")),
                None => Err(NotifyError::Address(v.to_string())),
            },
        }
    }

    pub fn message(&self, n: &Notification) -> Result<Message, NotifyError> {
        Message::builder()
            .from(self.from.clone())
            .to(self.address_of(&n.recipient)?)
            .subject(n.payload.subject.clone())
            .header(ContentType::TEXT_PLAIN)
            .body(n.payload.render_body())
            .map_err(|e| NotifyError::Smtp(e.to_string()))
    }
}

impl NotificationSink for SmtpSink {
    fn deliver(&self, n: &Notification) -> Result<(), NotifyError> {
        let msg = self.message(n)?;
        self.transport
            .send(&msg)
            .map(|_| ())
            .map_err(|e| NotifyError::Smtp(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn payload() -> Payload {
        Payload {
            referendum_id: ReferendumId::new("R1").unwrap(),
            kind: NotificationKind::PromptPublished,
            subject: "Verify R1".into(),
            text: "The prompt is out.".into(),
            link: "http://x/referenda/R1/prompt".into(),
            prompt: Some("Referendum: R1\n".into()),
            prompt_sha256: Some("ab".into()),
        }
    }

    #[test]
    fn smtp_body_matches_payload_rendering() {
        let sink = SmtpSink::new(&SmtpConfig {
            host: "localhost".into(),
            port: 2525,
            from: "ea@example.org".into(),
            username: None,
            password: None,
            t2_address: "t2@example.org".into(),
            voter_domain: Some("example.org".into()),
        })
        .unwrap();
        let n = Notification {
            recipient: Recipient::Voter(VoterId::new("alice").unwrap()),
            payload: payload(),
        };
        let raw = String::from_utf8(sink.message(&n).unwrap().formatted()).unwrap();
        assert!(raw.contains("To: alice@example.org"));
        assert!(raw.contains("prompt-sha256: ab"));
        assert!(raw.contains("Referendum: R1"));
    }

    #[test]
    fn log_sink_records() {
        let s = LogSink::new();
        let n = Notification {
            recipient: Recipient::T2,
            payload: payload(),
        };
        s.deliver(&n).unwrap();
        assert_eq!(s.sent(), vec![n]);
    }
}
