//! The `pvv` command line.
//!
//! Commands that touch an election open the file-backed service under
//! `--data-dir` and act as the principal named by `--as` (a credential from
//! the config's roster). `prompt --csv`, `verify-chain <file>`, `simulate`
//! and `collision-prob` work offline.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use chrono::{DateTime, NaiveDate, Utc};
use clap::{Parser, Subcommand, ValueEnum};
use pvv_core::audit::verify_jsonl;
use pvv_core::passphrase::collision_probability;
use pvv_core::prompt::import_csv;
use pvv_core::{build_prompt, ElectionPhase, ReferendumId, VoterId};
use pvv_service::config::ConfigError;
use pvv_service::notify::SmtpSink;
use pvv_service::service::{CreateReferendum, Service, ServiceError};
use pvv_service::{router, EnvConfig, ServiceConfig, Session};
use thiserror::Error;

use crate::detect::{run_scenario, HarnessError};
use crate::matrix::run_matrix;
use crate::scenario::{Scenario, ScenarioError};

#[derive(Debug, Parser)]
#[command(name = "pvv", version, about = "Phrase-verified voting: election administration and simulation")]
pub struct Cli {
    /// Directory holding the election store.
    #[arg(long, env = "PVV_DATA_DIR", default_value = "./pvv-data", global = true)]
    pub data_dir: PathBuf,
    /// Service configuration (TOML).
    #[arg(long, env = "PVV_CONFIG", default_value = "pvv.toml", global = true)]
    pub config: PathBuf,
    /// Credential of the acting official.
    #[arg(long = "as", env = "PVV_CREDENTIAL", global = true)]
    pub credential: Option<String>,
    #[arg(long, env = "PVV_REFERENDUM", global = true)]
    pub referendum: Option<String>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Opening {
    Absentee,
    Voting,
    Verification,
    Disputes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Closing {
    Voting,
    Verification,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create a referendum from a roster file (one voter id per line).
    Init {
        #[arg(long)]
        roster: PathBuf,
        #[arg(long)]
        absentee: Option<PathBuf>,
        #[arg(long)]
        date: NaiveDate,
        #[arg(long)]
        question: String,
        /// RFC 3339 instant.
        #[arg(long)]
        meeting_start: DateTime<Utc>,
    },
    Open {
        phase: Opening,
    },
    Close {
        phase: Closing,
    },
    /// Publish the interim audit bundle.
    Report,
    /// Seal the log after the dispute window.
    Finalize,
    /// Print the verification prompt.
    Prompt {
        /// Build from a spreadsheet export instead of the store.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Publish the prompt from the closed vote table first.
        #[arg(long, conflicts_with = "csv")]
        publish: bool,
    },
    /// Export the audit bundle as canonical JSON.
    Bundle {
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify an exported audit log, or the stored one when no file is given.
    VerifyChain {
        file: Option<PathBuf>,
    },
    /// Run a scenario file; with --trials, the whole detection matrix as CSV.
    Simulate {
        scenario: PathBuf,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Probability that two voters draw the same two-word phrase.
    CollisionProb {
        n_voters: u64,
        wordlist_size: u64,
    },
    /// Serve the HTTP API (PVV_BIND, PVV_DATA_DIR).
    Serve,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Service(#[from] ServiceError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Harness(#[from] HarnessError),
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("{0}")]
    Io(#[from] io::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Failed(String),
}

struct Ctx<'a> {
    cli: &'a Cli,
}

impl Ctx<'_> {
    fn service(&self) -> Result<Service, CliError> {
        let config = ServiceConfig::from_file(&self.cli.config)?;
        Ok(Service::open(config, &self.cli.data_dir)?)
    }

    fn rid(&self) -> Result<ReferendumId, CliError> {
        let id = self
            .cli
            .referendum
            .as_deref()
            .ok_or_else(|| CliError::Usage("--referendum (or PVV_REFERENDUM) is required".into()))?;
        Ok(ReferendumId::new(id).map_err(ServiceError::from)?)
    }

    fn session(&self, svc: &Service) -> Result<Session, CliError> {
        let c = self
            .cli
            .credential
            .as_deref()
            .ok_or_else(|| CliError::Usage("--as (or PVV_CREDENTIAL) is required".into()))?;
        Ok(svc.login(c)?)
    }

    fn advance(&self, phase: ElectionPhase, out: &mut dyn Write) -> Result<(), CliError> {
        let svc = self.service()?;
        let s = self.session(&svc)?;
        let t = svc.advance_phase(&s, &self.rid()?, phase)?;
        writeln!(out, "{} -> {}", t.from, t.to)?;
        Ok(())
    }
}

fn read_ids(path: &Path) -> Result<Vec<VoterId>, CliError> {
    fs::read_to_string(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| VoterId::new(l).map_err(|e| CliError::Usage(format!("{}: {e}", path.display()))))
        .collect()
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let ctx = Ctx { cli };
    match &cli.command {
        Command::Init {
            roster,
            absentee,
            date,
            question,
            meeting_start,
        } => {
            let svc = ctx.service()?;
            let s = ctx.session(&svc)?;
            let status = svc.create_referendum(
                &s,
                CreateReferendum {
                    referendum_id: ctx.rid()?,
                    date: *date,
                    question: question.clone(),
                    eligible_voters: read_ids(roster)?,
                    absentee_approved: absentee.as_deref().map(read_ids).transpose()?.unwrap_or_default(),
                    meeting_start: *meeting_start,
                    absentee_cutoff: None,
                    config: None,
                },
            )?;
            writeln!(
                out,
                "created {} with {} eligible voters; absentee cutoff {}",
                status.referendum_id, status.eligible, status.absentee_cutoff
            )?;
        }
        Command::Open { phase } => ctx.advance(
            match phase {
                Opening::Absentee => ElectionPhase::AbsenteeOpen,
                Opening::Voting => ElectionPhase::VotingOpen,
                Opening::Verification => ElectionPhase::VerificationOpen,
                Opening::Disputes => ElectionPhase::DisputeWindow,
            },
            out,
        )?,
        Command::Close { phase } => ctx.advance(
            match phase {
                Closing::Voting => ElectionPhase::VotingClosed,
                Closing::Verification => ElectionPhase::VerificationClosed,
            },
            out,
        )?,
        Command::Report => ctx.advance(ElectionPhase::Reported, out)?,
        Command::Finalize => ctx.advance(ElectionPhase::Final, out)?,
        Command::Prompt { csv: Some(path), .. } => {
            let rid = ctx.rid()?;
            let table = import_csv(fs::File::open(path)?, rid)
                .map_err(|e| CliError::Failed(e.to_string()))?;
            write!(out, "{}", build_prompt(&table).render())?;
        }
        Command::Prompt { csv: None, publish } => {
            let svc = ctx.service()?;
            let rid = ctx.rid()?;
            let text = if *publish {
                svc.publish_prompt(&ctx.session(&svc)?, &rid)?
            } else {
                svc.prompt(&rid)?
            };
            write!(out, "{text}")?;
        }
        Command::Bundle { out: path } => {
            let svc = ctx.service()?;
            let json = svc.bundle(&ctx.rid()?)?.to_canonical_json();
            match path {
                Some(p) => fs::write(p, json)?,
                None => write!(out, "{json}")?,
            }
        }
        Command::VerifyChain { file } => {
            let text = match file {
                Some(p) => fs::read_to_string(p)?,
                None => ctx.service()?.audit_log(&ctx.rid()?)?,
            };
            match verify_jsonl(&text) {
                Ok(head) => writeln!(out, "chain ok: {} events, head {head}", text.lines().count())?,
                Err(b) => return Err(CliError::Failed(b.to_string())),
            }
        }
        Command::Simulate {
            scenario,
            trials,
            seed,
        } => {
            let s = Scenario::from_json(&fs::read_to_string(scenario)?)?;
            match trials {
                Some(n) => write!(out, "{}", run_matrix(&s, *n, *seed)?.to_csv())?,
                None => {
                    let r = run_scenario(&s)?;
                    writeln!(
                        out,
                        "{}",
                        serde_json::to_string_pretty(&r).expect("result serializes")
                    )?;
                }
            }
        }
        Command::CollisionProb {
            n_voters,
            wordlist_size,
        } => {
            let p = collision_probability(*n_voters, *wordlist_size)
                .map_err(|e| CliError::Usage(e.to_string()))?;
            writeln!(out, "{p:.6e}")?;
        }
        Command::Serve => serve(&ctx)?,
    }
    Ok(())
}

fn serve(ctx: &Ctx<'_>) -> Result<(), CliError> {
    let env = EnvConfig::from_env()?;
    let config = ServiceConfig::from_file(&ctx.cli.config)?;
    let mut builder = Service::builder(config.clone()).store(open_store(&env.data_dir)?);
    if let Some(smtp) = &config.smtp {
        let sink = SmtpSink::new(smtp).map_err(|e| CliError::Failed(e.to_string()))?;
        builder = builder.sink(Arc::new(sink));
    }
    let svc = Arc::new(builder.build()?);
    let rt = tokio::runtime::Runtime::new()?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(env.bind).await?;
        tracing::info!(addr = %env.bind, "serving");
        axum::serve(listener, router(svc))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
    })?;
    Ok(())
}

fn open_store(dir: &Path) -> Result<pvv_service::Store, CliError> {
    fs::create_dir_all(dir)?;
    Ok(pvv_service::Store::open(dir.join("pvv.redb")).map_err(ServiceError::from)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> Result<String, CliError> {
        let cli = Cli::try_parse_from(args).map_err(|e| CliError::Usage(e.to_string()))?;
        let mut out = Vec::new();
        run(&cli, &mut out)?;
        Ok(String::from_utf8(out).unwrap())
    }

    #[test]
    fn collision_prob_prints_exact_value() {
        let out = run_args(&["pvv", "collision-prob", "26", "7776"]).unwrap();
        let p: f64 = out.trim().parse().unwrap();
        assert!(p > 5.3e-6 && p < 5.4e-6, "{p}");
    }

    #[test]
    fn prompt_from_csv() {
        let dir = tempfile::tempdir().unwrap();
        let csv = dir.path().join("ballots.csv");
        fs::write(&csv, "Timestamp,Passphrase,Vote\n2020-10-01 15:01,k b,ABSTAIN\n2020-10-01 15:02,frank 99,NO\n").unwrap();
        let out = run_args(&["pvv", "--referendum", "R", "prompt", "--csv", csv.to_str().unwrap()]).unwrap();
        assert!(out.starts_with("Referendum: R\n"));
        assert!(out.contains("NO:\n1. frank 99\n"));
    }

    #[test]
    fn missing_referendum_is_a_usage_error() {
        assert!(matches!(run_args(&["pvv", "bundle"]), Err(CliError::Config(_)) | Err(CliError::Usage(_))));
    }
}
