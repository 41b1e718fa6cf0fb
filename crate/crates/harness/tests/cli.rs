use std::fs;
use std::path::Path;
use std::process::Command as Process;

use chrono::{Duration, Utc};
use clap::Parser;
use pvv_core::{ElectionPhase, Vote};
use pvv_harness::cli::{run, Cli, CliError};
use pvv_harness::sim::{credential, service_config, voter_id, CHAIR, EA};
use pvv_service::Service;

const RID: &str = "CLI-TEST";

struct Env {
    dir: tempfile::TempDir,
}

impl Env {
    fn new(n_voters: usize) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let voters: Vec<_> = (1..=n_voters).map(voter_id).collect();
        fs::write(dir.path().join("pvv.toml"), service_config(&voters).to_toml()).unwrap();
        let roster: String = voters.iter().map(|v| format!("{v}\n")).collect();
        fs::write(dir.path().join("roster.txt"), format!("# members\n{roster}")).unwrap();
        Env { dir }
    }

    fn path(&self, name: &str) -> String {
        self.dir.path().join(name).to_str().unwrap().to_owned()
    }

    fn pvv(&self, who: &str, args: &[&str]) -> Result<String, CliError> {
        let data = self.path("data");
        let config = self.path("pvv.toml");
        let cred = format!("sim:{who}");
        let mut argv = vec!["pvv", "--data-dir", &data, "--config", &config, "--referendum", RID, "--as", &cred];
        argv.extend_from_slice(args);
        let cli = Cli::try_parse_from(argv).map_err(|e| CliError::Usage(e.to_string()))?;
        let mut out = Vec::new();
        run(&cli, &mut out)?;
        Ok(String::from_utf8(out).unwrap())
    }

    /// Voters cast through the library; the CLI is for officials only.
    fn cast(&self, ballots: &[(&str, Vote)]) {
        let cfg = pvv_service::ServiceConfig::from_file(self.path("pvv.toml")).unwrap();
        let svc = Service::open(cfg, Path::new(&self.path("data"))).unwrap();
        let rid = pvv_core::ReferendumId::new(RID).unwrap();
        for (i, (p, v)) in ballots.iter().enumerate() {
            let s = svc.login(&credential(&voter_id(i + 1))).unwrap();
            let t = svc.issue_token(&s, &rid).unwrap();
            svc.cast_ballot(&rid, &t, p, *v).unwrap();
        }
    }
}

#[test]
fn election_end_to_end_through_the_cli() {
    let env = Env::new(3);
    let start = (Utc::now() + Duration::days(1)).to_rfc3339();
    let roster = env.path("roster.txt");
    let out = env
        .pvv(EA[0], &["init", "--roster", &roster, "--date", "2030-01-01", "--question", "Adopt?", "--meeting-start", &start])
        .unwrap();
    assert!(out.starts_with("created CLI-TEST with 3 eligible voters"), "{out}");

    assert_eq!(env.pvv(CHAIR, &["open", "voting"]).unwrap().trim(), "Setup -> VotingOpen");
    env.cast(&[("zeta one", Vote::No), ("alpha two", Vote::Yes), ("mid three", Vote::Yes)]);
    env.pvv(CHAIR, &["close", "voting"]).unwrap();

    let prompt = env.pvv(EA[0], &["prompt", "--publish"]).unwrap();
    assert!(prompt.contains("YES:\n1. alpha two\n2. mid three\n\nNO:\n1. zeta one\n"), "{prompt}");
    assert_eq!(env.pvv(EA[0], &["prompt"]).unwrap(), prompt);

    env.pvv(CHAIR, &["open", "verification"]).unwrap();
    env.pvv(CHAIR, &["close", "verification"]).unwrap();
    env.pvv(EA[0], &["report"]).unwrap();
    env.pvv(EA[0], &["open", "disputes"]).unwrap();
    let early = env.pvv(EA[0], &["finalize"]).unwrap_err();
    assert!(matches!(&early, CliError::Service(e) if e.kind() == "WindowStillOpen"), "{early}");

    let bundle_path = env.path("bundle.json");
    env.pvv(EA[0], &["bundle", "--out", &bundle_path]).unwrap();
    let bundle: serde_json::Value = serde_json::from_str(&fs::read_to_string(&bundle_path).unwrap()).unwrap();
    assert_eq!(bundle["referendum_id"], RID);
    assert_eq!(bundle["vote_table"].as_array().unwrap().len(), 3);

    let ok = env.pvv(EA[0], &["verify-chain"]).unwrap();
    assert!(ok.starts_with("chain ok: "), "{ok}");

    // Export, corrupt one byte, verify offline.
    let cfg = pvv_service::ServiceConfig::from_file(env.path("pvv.toml")).unwrap();
    let svc = Service::open(cfg, Path::new(&env.path("data"))).unwrap();
    let rid = pvv_core::ReferendumId::new(RID).unwrap();
    assert_eq!(svc.election(&rid).unwrap().phase(), ElectionPhase::DisputeWindow);
    let log = svc.audit_log(&rid).unwrap();
    drop(svc);
    let log_path = env.path("log.jsonl");
    fs::write(&log_path, &log).unwrap();
    assert!(env.pvv(EA[0], &["verify-chain", &log_path]).is_ok());
    fs::write(&log_path, log.replacen("VotingOpen", "VotingOpem", 1)).unwrap();
    assert!(matches!(env.pvv(EA[0], &["verify-chain", &log_path]), Err(CliError::Failed(_))));
}

#[test]
fn officials_are_checked_by_role() {
    let env = Env::new(2);
    let start = (Utc::now() + Duration::days(1)).to_rfc3339();
    let roster = env.path("roster.txt");
    let init = ["init", "--roster", &roster, "--date", "2030-01-01", "--question", "Q", "--meeting-start", &start];
    let denied = env.pvv(CHAIR, &init).unwrap_err();
    assert!(matches!(&denied, CliError::Service(e) if e.kind() == "Forbidden"), "{denied}");
    env.pvv(EA[0], &init).unwrap();
    assert!(env.pvv(EA[0], &["open", "verification"]).is_err());
    assert!(env.pvv("nobody@sim.example", &["open", "voting"]).is_err());
}

#[test]
fn simulate_prints_matrix_csv() {
    let env = Env::new(1);
    let path = env.path("scenario.json");
    fs::write(
        &path,
        r#"{"name":"cli","n_voters":6,"passphrase_policy":"distinct","adversary_action":{"FlipVote":2},"seed":4}"#,
    )
    .unwrap();
    let one = env.pvv(EA[0], &["simulate", &path]).unwrap();
    let r: serde_json::Value = serde_json::from_str(&one).unwrap();
    assert_eq!(r["detected"], true);
    let csv = env.pvv(EA[0], &["simulate", &path, "--trials", "5", "--seed", "1"]).unwrap();
    assert!(csv.starts_with("action,trials,detected,rate\nNone,5,0,0.0000\nFlipVote,5,5,1.0000\n"), "{csv}");
}

#[test]
fn binary_runs_offline_commands() {
    let out = Process::new(env!("CARGO_BIN_EXE_pvv"))
        .args(["collision-prob", "26", "7776"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "5.374892e-6");

    let bad = Process::new(env!("CARGO_BIN_EXE_pvv"))
        .args(["verify-chain", "/nonexistent/log.jsonl"])
        .output()
        .unwrap();
    assert!(!bad.status.success());
    assert!(!bad.stderr.is_empty());
}
