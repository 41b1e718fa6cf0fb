use proptest::prelude::*;
use pvv_core::audit::{verify_jsonl, AuditLog, EventKind};
use serde_json::json;

fn log_of(n: usize) -> AuditLog {
    let mut log = AuditLog::new();
    for i in 0..n {
        let kind = if i % 2 == 0 { EventKind::BallotAccepted } else { EventKind::VerificationRecorded };
        log.append(kind, json!({ "n": i, "note": format!("event {i}") })).unwrap();
    }
    log
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jsonl_round_trips(n in 0usize..40) {
        let log = log_of(n);
        let text = log.to_jsonl();
        let back = AuditLog::from_jsonl(&text).unwrap();
        prop_assert_eq!(back.head(), log.head());
        prop_assert_eq!(verify_jsonl(&text).unwrap(), log.head());
    }

    /// Dropping or swapping lines is caught at the first affected event.
    #[test]
    fn reordering_is_caught(n in 3usize..30, at in any::<prop::sample::Index>()) {
        let lines: Vec<String> = log_of(n).to_jsonl().lines().map(str::to_owned).collect();
        let i = at.index(n - 1);
        let mut swapped = lines.clone();
        swapped.swap(i, i + 1);
        let err = AuditLog::from_jsonl(&(swapped.join("\n") + "\n")).unwrap_err();
        prop_assert_eq!(err.index, i as u64 + 1);
        let mut dropped = lines;
        dropped.remove(i);
        prop_assert!(AuditLog::from_jsonl(&(dropped.join("\n") + "\n")).is_err() || i == n - 1);
    }
}

#[test]
fn a_rewritten_tail_changes_the_head() {
    let log = log_of(10);
    let mut forged = AuditLog::new();
    for e in &log.events()[..9] {
        forged.append(e.kind, e.payload.clone()).unwrap();
    }
    forged.append(EventKind::BallotAccepted, json!({ "n": 99 })).unwrap();
    assert!(forged.verify_chain());
    assert_ne!(forged.head(), log.head());
    assert_eq!(forged.events()[8].hash, log.events()[8].hash);
}

#[test]
fn sealed_logs_refuse_appends() {
    let mut log = log_of(2);
    log.append(EventKind::BundleSealed, json!({})).unwrap();
    assert!(log.is_sealed());
    assert!(log.append(EventKind::BallotAccepted, json!({})).is_err());
}
