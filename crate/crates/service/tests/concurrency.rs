mod common;

use std::sync::{Arc, Barrier};
use std::thread;

use chrono::NaiveDate;
use common::{config, meeting_start, voter_ids, Fixture, ADMINS};
use pvv_core::{ElectionPhase, EventKind, ReferendumId, Vote};
use pvv_service::service::{CreateReferendum, Service, ServiceError};
use pvv_service::store::Store;

fn open_voting(svc: &Service, rid: &ReferendumId) {
    let chair = svc.login(&format!("pw:{}", ADMINS[2])).unwrap();
    svc.advance_phase(&chair, rid, ElectionPhase::VotingOpen).unwrap();
}

#[test]
fn one_token_many_threads_exactly_one_ballot() {
    let f = Fixture::new(3, 0, true);
    open_voting(&f.svc, &f.rid);
    let token = f.svc.issue_token(&f.voter(0), &f.rid).unwrap();
    let barrier = Arc::new(Barrier::new(16));
    let handles: Vec<_> = (0..16)
        .map(|i| {
            let svc = f.svc.clone();
            let rid = f.rid.clone();
            let barrier = barrier.clone();
            thread::spawn(move || {
                barrier.wait();
                svc.cast_ballot(&rid, &token, &format!("racing pass {i}"), Vote::Yes)
            })
        })
        .collect();
    let results: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
    let accepted = results.iter().filter(|r| r.is_ok()).count();
    assert_eq!(accepted, 1);
    for r in results.iter().filter_map(|r| r.as_ref().err()) {
        assert_eq!(r.kind(), "DuplicateSubmission");
    }
    assert_eq!(f.svc.live_count(&f.rid).unwrap(), 1);
    let e = f.svc.election(&f.rid).unwrap();
    assert_eq!(e.audit_log().of_kind(EventKind::BallotAccepted).count(), 1);
    assert!(e.audit_log().verify_chain());
}

#[test]
fn concurrent_voters_all_counted() {
    let f = Fixture::new(40, 0, true);
    open_voting(&f.svc, &f.rid);
    let handles: Vec<_> = (0..40)
        .map(|i| {
            let svc = f.svc.clone();
            let rid = f.rid.clone();
            let session = f.voter(i);
            thread::spawn(move || {
                let token = svc.issue_token(&session, &rid)?;
                let dup = svc.issue_token(&session, &rid);
                assert_eq!(dup.unwrap_err().kind(), "AlreadyIssued");
                let vote = [Vote::Yes, Vote::No, Vote::Abstain][i % 3];
                svc.cast_ballot(&rid, &token, &format!("voter pass {i}"), vote)?;
                Ok::<_, ServiceError>(())
            })
        })
        .collect();
    for h in handles {
        h.join().unwrap().unwrap();
    }
    assert_eq!(f.svc.live_count(&f.rid).unwrap(), 40);
    let e = f.svc.election(&f.rid).unwrap();
    let seqs: Vec<u64> = e.vote_table().entries().iter().map(|b| b.seq).collect();
    assert_eq!(seqs, (1..=40).collect::<Vec<_>>());
    assert_eq!(e.audit_log().of_kind(EventKind::BallotAccepted).count(), 40);
}

#[test]
fn file_backed_store_survives_restart() {
    let dir = tempfile::tempdir().unwrap();
    let voters = voter_ids(4);
    let rid = ReferendumId::new("FILE-BACKED").unwrap();
    {
        let svc = Arc::new(Service::open(config(&voters), dir.path()).unwrap());
        let ea = svc.login(&format!("pw:{}", ADMINS[0])).unwrap();
        svc.create_referendum(
            &ea,
            CreateReferendum {
                referendum_id: rid.clone(),
                date: NaiveDate::from_ymd_opt(2020, 10, 1).unwrap(),
                question: "q".into(),
                eligible_voters: voters.clone(),
                absentee_approved: vec![],
                meeting_start: meeting_start(),
                absentee_cutoff: None,
                config: None,
            },
        )
        .unwrap();
        open_voting(&svc, &rid);
        let handles: Vec<_> = voters
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let svc = svc.clone();
                let rid = rid.clone();
                let session = svc.login(&format!("pw:{v}")).unwrap();
                thread::spawn(move || {
                    let t = svc.issue_token(&session, &rid).unwrap();
                    svc.cast_ballot(&rid, &t, &format!("disk pass {i}"), Vote::No).unwrap();
                })
            })
            .collect();
        for h in handles {
            h.join().unwrap();
        }
    }
    let store = Store::open(dir.path().join("pvv.redb")).unwrap();
    let svc = Service::builder(config(&voters)).store(store).build().unwrap();
    assert_eq!(svc.live_count(&rid).unwrap(), 4);
    let session = svc.login(&format!("pw:{}", voters[0])).unwrap();
    assert_eq!(svc.issue_token(&session, &rid).unwrap_err().kind(), "AlreadyIssued");
    assert!(svc.election(&rid).unwrap().audit_log().verify_chain());
}
