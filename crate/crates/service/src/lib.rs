//! A live election service: registrar, role-gated persistence,
//! notifications and the HTTP API, over the `pvv-core` election model.

pub mod auth;
pub mod clock;
pub mod config;
pub mod http;
pub mod notify;
pub mod privacy;
pub mod registrar;
pub mod service;
pub mod store;

pub use auth::{Authenticator, Session, StaticRoster};
pub use clock::{Clock, ManualClock, SystemClock};
pub use config::{EnvConfig, RoleAssignment, ServiceConfig};
pub use http::router;
pub use notify::{LogSink, Notification, NotificationKind, NotificationSink, Recipient};
pub use service::{CreateReferendum, Service, ServiceError};
pub use store::{Namespace, Principal, Store};
