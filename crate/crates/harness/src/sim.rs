//! An in-process service with a fixed cast of officials and a numbered
//! roster, on a manual clock.

use std::sync::Arc;

use chrono::{DateTime, Duration, NaiveDate, TimeZone, Utc};
use pvv_core::{ElectionPhase, ReferendumConfig, ReferendumId, Vote, VoterId};
use pvv_service::service::{CreateReferendum, Service, ServiceError};
use pvv_service::{LogSink, ManualClock, RoleAssignment, ServiceConfig, Session};

pub const EA: [&str; 2] = ["ea1@sim.example", "ea2@sim.example"];
pub const CHAIR: &str = "chair@sim.example";
pub const T1: &str = "t1@sim.example";
pub const T2: &str = "t2@sim.example";
pub const PANEL: &str = "panel@sim.example";

/// The six-ballot sample election, in submission order.
pub const SAMPLE_BALLOTS: [(&str, Vote); 6] = [
    ("frank 99", Vote::No),
    ("assume jockey", Vote::Yes),
    ("k b", Vote::Abstain),
    ("presidential shock", Vote::No),
    ("disagree imperial", Vote::Yes),
    ("friendly, root", Vote::Yes),
];

pub fn voter_id(i: usize) -> VoterId {
    VoterId::new(format!("voter{i:03}@sim.example")).expect("valid id")
}

fn id(s: &str) -> VoterId {
    VoterId::new(s).expect("valid id")
}

pub fn credential(v: &VoterId) -> String {
    format!("sim:{v}")
}

/// The meeting every simulated election is scheduled for.
pub fn meeting_start() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2020, 10, 1, 15, 0, 0).unwrap()
}

pub fn service_config(voters: &[VoterId]) -> ServiceConfig {
    let mut c = ServiceConfig::new(RoleAssignment {
        ea: EA.iter().map(|s| id(s)).collect(),
        chair: id(CHAIR),
        t1: id(T1),
        t2: id(T2),
        panel: vec![id(PANEL)],
    });
    c.public_url = "https://vote.sim.example".into();
    let officials = EA.into_iter().chain([CHAIR, T1, T2, PANEL]).map(id);
    for v in voters.iter().cloned().chain(officials) {
        c.credentials.insert(credential(&v), v);
    }
    c
}

#[derive(Debug, Clone)]
pub struct SimOptions {
    pub referendum_id: String,
    pub n_voters: usize,
    /// The first `n_absentee` voters are approved for absentee voting.
    pub n_absentee: usize,
    pub config: ReferendumConfig,
    pub seed: u64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            referendum_id: "SIM".into(),
            n_voters: 6,
            n_absentee: 0,
            config: ReferendumConfig::default(),
            seed: 0,
        }
    }
}

pub struct Sim {
    pub svc: Arc<Service>,
    pub sink: Arc<LogSink>,
    pub clock: Arc<ManualClock>,
    pub voters: Vec<VoterId>,
    pub rid: ReferendumId,
}

impl Sim {
    /// Creates the referendum two hours before the meeting.
    pub fn new(opts: SimOptions) -> Result<Self, ServiceError> {
        let voters: Vec<VoterId> = (1..=opts.n_voters).map(voter_id).collect();
        let sink = Arc::new(LogSink::new());
        let clock = Arc::new(ManualClock::new(meeting_start() - Duration::hours(2)));
        let svc = Arc::new(
            Service::builder(service_config(&voters))
                .sink(sink.clone())
                .clock(clock.clone())
                .seed(opts.seed)
                .build()?,
        );
        let rid = ReferendumId::new(opts.referendum_id)?;
        let sim = Sim {
            svc,
            sink,
            clock,
            voters,
            rid,
        };
        sim.svc.create_referendum(
            &sim.ea()?,
            CreateReferendum {
                referendum_id: sim.rid.clone(),
                date: NaiveDate::from_ymd_opt(2020, 10, 1).expect("date"),
                question: "Simulated referendum".into(),
                eligible_voters: sim.voters.clone(),
                absentee_approved: sim.voters[..opts.n_absentee.min(opts.n_voters)].to_vec(),
                meeting_start: meeting_start(),
                absentee_cutoff: None,
                config: Some(opts.config),
            },
        )?;
        Ok(sim)
    }

    pub fn login(&self, who: &VoterId) -> Result<Session, ServiceError> {
        self.svc.login(&credential(who))
    }

    pub fn voter(&self, i: usize) -> Result<Session, ServiceError> {
        self.login(&self.voters[i])
    }

    pub fn ea(&self) -> Result<Session, ServiceError> {
        self.login(&id(EA[0]))
    }

    pub fn chair(&self) -> Result<Session, ServiceError> {
        self.login(&id(CHAIR))
    }

    pub fn panel(&self) -> Result<Session, ServiceError> {
        self.login(&id(PANEL))
    }

    /// Opens voting, lets voter `i` cast `ballots[i]`, and closes voting.
    pub fn vote_in_meeting(&self, ballots: &[(&str, Vote)]) -> Result<(), ServiceError> {
        let chair = self.chair()?;
        self.svc.advance_phase(&chair, &self.rid, ElectionPhase::VotingOpen)?;
        for (i, (p, v)) in ballots.iter().enumerate() {
            let token = self.svc.issue_token(&self.voter(i)?, &self.rid)?;
            self.svc.cast_ballot(&self.rid, &token, p, *v)?;
        }
        self.svc.advance_phase(&chair, &self.rid, ElectionPhase::VotingClosed)?;
        Ok(())
    }
}
