#![allow(dead_code)]

use std::sync::Arc;

use chrono::{DateTime, Duration, NaiveDate, TimeZone, Utc};
use pvv_core::{ReferendumConfig, ReferendumId, Vote, VoterId};
use pvv_service::service::{CreateReferendum, Service};
use pvv_service::{LogSink, ManualClock, RoleAssignment, ServiceConfig, Session};

pub const SAMPLE: [(&str, Vote); 6] = [
    ("frank 99", Vote::No),
    ("assume jockey", Vote::Yes),
    ("k b", Vote::Abstain),
    ("presidential shock", Vote::No),
    ("disagree imperial", Vote::Yes),
    ("friendly, root", Vote::Yes),
];

pub fn id(s: &str) -> VoterId {
    VoterId::new(s).unwrap()
}

pub fn meeting_start() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2020, 10, 1, 15, 0, 0).unwrap()
}

pub const ADMINS: [&str; 6] = [
    "ea1@example.org",
    "ea2@example.org",
    "chair@example.org",
    "t1@example.org",
    "t2@example.org",
    "dean@example.org",
];

pub fn voter_ids(n: usize) -> Vec<VoterId> {
    (1..=n).map(|i| id(&format!("voter{i}@example.org"))).collect()
}

pub fn credential(v: &VoterId) -> String {
    format!("pw:{v}")
}

pub fn config(voters: &[VoterId]) -> ServiceConfig {
    let mut c = ServiceConfig::new(RoleAssignment {
        ea: vec![id(ADMINS[0]), id(ADMINS[1])],
        chair: id(ADMINS[2]),
        t1: id(ADMINS[3]),
        t2: id(ADMINS[4]),
        panel: vec![id(ADMINS[5])],
    });
    c.public_url = "https://vote.example.org".into();
    for v in voters.iter().cloned().chain(ADMINS.iter().map(|a| id(a))) {
        c.credentials.insert(credential(&v), v);
    }
    c
}

pub struct Fixture {
    pub svc: Arc<Service>,
    pub sink: Arc<LogSink>,
    pub clock: Arc<ManualClock>,
    pub voters: Vec<VoterId>,
    pub rid: ReferendumId,
}

impl Fixture {
    pub fn new(n_voters: usize, n_absentee: usize, embed_prompt: bool) -> Self {
        let voters = voter_ids(n_voters);
        let sink = Arc::new(LogSink::new());
        let clock = Arc::new(ManualClock::new(meeting_start() - Duration::hours(3)));
        let svc = Arc::new(
            Service::builder(config(&voters))
                .sink(sink.clone())
                .clock(clock.clone())
                .seed(7)
                .build()
                .unwrap(),
        );
        let rid = ReferendumId::new("SMITH-OVERALL").unwrap();
        let f = Fixture {
            svc,
            sink,
            clock,
            voters,
            rid,
        };
        let ea = f.login(ADMINS[0]);
        f.svc
            .create_referendum(
                &ea,
                CreateReferendum {
                    referendum_id: f.rid.clone(),
                    date: NaiveDate::from_ymd_opt(2020, 10, 1).unwrap(),
                    question: "Promote Dr. Smith?".into(),
                    eligible_voters: f.voters.clone(),
                    absentee_approved: f.voters[..n_absentee].to_vec(),
                    meeting_start: meeting_start(),
                    absentee_cutoff: None,
                    config: Some(ReferendumConfig {
                        embed_prompt,
                        ..ReferendumConfig::default()
                    }),
                },
            )
            .unwrap();
        f
    }

    pub fn login(&self, who: &str) -> Session {
        self.svc.login(&credential(&id(who))).unwrap()
    }

    pub fn voter(&self, i: usize) -> Session {
        self.svc.login(&credential(&self.voters[i])).unwrap()
    }

    pub fn ea(&self) -> Session {
        self.login(ADMINS[0])
    }
}
