//! Service configuration: a TOML file for roles, credentials and defaults,
//! plus `PVV_BIND` and `PVV_DATA_DIR` from the environment.

use std::collections::{BTreeMap, BTreeSet};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use pvv_core::{ReferendumConfig, Role, VoterId};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const DEFAULT_BIND: &str = "127.0.0.1:8080";
pub const DEFAULT_DATA_DIR: &str = "./pvv-data";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("reading config: {0}")]
    Io(#[from] std::io::Error),
    #[error("parsing config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("invalid {var}: {reason}")]
    Env { var: &'static str, reason: String },
    #[error("role assignment: {0}")]
    Roles(String),
}

/// Who holds which administrative role.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RoleAssignment {
    /// The two Election Authority members.
    pub ea: Vec<VoterId>,
    pub chair: VoterId,
    pub t1: VoterId,
    pub t2: VoterId,
    /// Panel members besides T1 and T2, who always sit on it.
    #[serde(default)]
    pub panel: Vec<VoterId>,
}

impl RoleAssignment {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.ea.len() != 2 || self.ea[0] == self.ea[1] {
            return Err(ConfigError::Roles(
                "the EA must have exactly two distinct members".into(),
            ));
        }
        if self.t1 == self.t2 {
            return Err(ConfigError::Roles("T1 and T2 must be different people".into()));
        }
        Ok(())
    }

    /// Trusted parties, who may not vote.
    pub fn trusted_parties(&self) -> [&VoterId; 2] {
        [&self.t1, &self.t2]
    }

    /// Roles held by `id`. Anyone who is not a trusted party also holds
    /// `Voter`; eligibility is decided per referendum.
    pub fn roles_of(&self, id: &VoterId) -> BTreeSet<Role> {
        let mut roles = BTreeSet::new();
        if self.ea.contains(id) {
            roles.insert(Role::Ea);
        }
        if &self.chair == id {
            roles.insert(Role::Chair);
        }
        if &self.t2 == id {
            roles.insert(Role::T2);
        }
        if &self.t1 == id || &self.t2 == id || self.panel.contains(id) {
            roles.insert(Role::Panel);
        }
        if !self.trusted_parties().contains(&id) {
            roles.insert(Role::Voter);
        }
        roles
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmtpConfig {
    pub host: String,
    #[serde(default = "default_smtp_port")]
    pub port: u16,
    pub from: String,
    #[serde(default)]
    pub username: Option<String>,
    #[serde(default)]
    pub password: Option<String>,
    /// Recipient address for T2's mirrored copies.
    pub t2_address: String,
    /// Domain appended to voter ids that are not already addresses.
    #[serde(default)]
    pub voter_domain: Option<String>,
}

fn default_smtp_port() -> u16 {
    587
}

fn default_session_ttl() -> u32 {
    480
}

fn default_public_url() -> String {
    format!("http://{DEFAULT_BIND}")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServiceConfig {
    pub roles: RoleAssignment,
    /// Options applied to referenda created without their own.
    #[serde(default)]
    pub defaults: ReferendumConfig,
    #[serde(default = "default_session_ttl")]
    pub session_ttl_minutes: u32,
    /// Base URL used in verification links.
    #[serde(default = "default_public_url")]
    pub public_url: String,
    /// Credential to identity map for the static authenticator.
    #[serde(default)]
    pub credentials: BTreeMap<String, VoterId>,
    #[serde(default)]
    pub smtp: Option<SmtpConfig>,
}

impl ServiceConfig {
    pub fn new(roles: RoleAssignment) -> Self {
        Self {
            roles,
            defaults: ReferendumConfig::default(),
            session_ttl_minutes: default_session_ttl(),
            public_url: default_public_url(),
            credentials: BTreeMap::new(),
            smtp: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text)?;
        cfg.roles.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvConfig {
    pub bind: SocketAddr,
    pub data_dir: PathBuf,
}

impl EnvConfig {
    pub fn from_env() -> Result<Self, ConfigError> {
        Self::from_lookup(|k| std::env::var(k).ok())
    }

    pub fn from_lookup(get: impl Fn(&str) -> Option<String>) -> Result<Self, ConfigError> {
        let bind = get("PVV_BIND").unwrap_or_else(|| DEFAULT_BIND.to_owned());
        let bind = bind.parse().map_err(|e: std::net::AddrParseError| ConfigError::Env {
            var: "PVV_BIND",
            reason: e.to_string(),
        })?;
        let data_dir = get("PVV_DATA_DIR").unwrap_or_else(|| DEFAULT_DATA_DIR.to_owned());
        Ok(Self {
            bind,
            data_dir: data_dir.into(),
        })
    }
}
