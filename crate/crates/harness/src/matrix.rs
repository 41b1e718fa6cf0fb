//! Detection rates over many seeded trials.

use std::collections::BTreeMap;
use std::thread;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::detect::{run_scenario, Detector, HarnessError};
use crate::scenario::{AdversaryAction, Scenario};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRow {
    pub action: String,
    pub trials: usize,
    pub detected: usize,
    pub rate: f64,
    /// Trials attributed to each detector, `None` included.
    pub by_detector: BTreeMap<Detector, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionTable {
    pub scenario: String,
    pub rows: Vec<MatrixRow>,
}

impl DetectionTable {
    pub fn row(&self, action: &str) -> Option<&MatrixRow> {
        self.rows.iter().find(|r| r.action == action)
    }

    /// `action,trials,detected,rate`, one line per action.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["action", "trials", "detected", "rate"])
            .expect("in-memory write");
        for r in &self.rows {
            w.write_record([
                r.action.clone(),
                r.trials.to_string(),
                r.detected.to_string(),
                format!("{:.4}", r.rate),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

/// The actions swept by [`run_matrix`]. A targeted action in the template
/// pins its target; otherwise each trial draws one.
pub fn sweep(template: &Scenario) -> Vec<(AdversaryAction, Option<usize>)> {
    let pinned = template.adversary_action.target();
    vec![
        (AdversaryAction::None, None),
        (AdversaryAction::FlipVote(0), pinned),
        (AdversaryAction::InsertBallot, None),
        (AdversaryAction::DeleteBallot, None),
        (AdversaryAction::AlterPassphrase(0), pinned),
    ]
}

/// Runs `n_trials` seeded copies of `template` for each action of
/// [`sweep`]. Trials run in parallel; the result depends only on the
/// inputs.
pub fn run_matrix(template: &Scenario, n_trials: usize, seed: u64) -> Result<DetectionTable, HarnessError> {
    template.validate()?;
    let mut rows = Vec::new();
    for (k, (action, pinned)) in sweep(template).into_iter().enumerate() {
        let mut rng = StdRng::seed_from_u64(seed ^ ((k as u64) << 32));
        let trials: Vec<Scenario> = (0..n_trials.max(1))
            .map(|_| {
                let mut s = template.clone();
                s.seed = rng.random();
                let target = pinned.unwrap_or_else(|| rng.random_range(0..s.n_voters));
                s.adversary_action = action.with_target(target);
                s
            })
            .collect();
        let results = run_parallel(&trials)?;
        let mut by_detector = BTreeMap::new();
        for r in &results {
            *by_detector.entry(r.detector).or_insert(0) += 1;
        }
        let detected = results.iter().filter(|r| r.detected).count();
        rows.push(MatrixRow {
            action: action.label().to_owned(),
            trials: results.len(),
            detected,
            rate: detected as f64 / results.len() as f64,
            by_detector,
        });
    }
    Ok(DetectionTable {
        scenario: template.name.clone(),
        rows,
    })
}

fn run_parallel(trials: &[Scenario]) -> Result<Vec<crate::detect::DetectionResult>, HarnessError> {
    let workers = thread::available_parallelism().map_or(4, |n| n.get()).min(16);
    let chunk = trials.len().div_ceil(workers).max(1);
    thread::scope(|s| {
        let handles: Vec<_> = trials
            .chunks(chunk)
            .map(|c| s.spawn(move || c.iter().map(run_scenario).collect::<Result<Vec<_>, _>>()))
            .collect();
        let mut out = Vec::with_capacity(trials.len());
        for h in handles {
            out.extend(h.join().expect("trial thread panicked")?);
        }
        Ok(out)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::PassphrasePolicy;

    #[test]
    fn small_matrix_and_csv() {
        let template = Scenario {
            name: "distinct".into(),
            n_voters: 5,
            passphrase_policy: PassphrasePolicy::Distinct,
            voter_behaviors: vec![],
            adversary_action: AdversaryAction::None,
            seed: 0,
        };
        let t = run_matrix(&template, 4, 9).unwrap();
        assert_eq!(t.row("None").unwrap().detected, 0);
        assert_eq!(t.row("FlipVote").unwrap().rate, 1.0);
        assert_eq!(t, run_matrix(&template, 4, 9).unwrap());
        let csv = t.to_csv();
        assert!(csv.starts_with("action,trials,detected,rate\nNone,4,0,0.0000\n"));
        assert_eq!(csv.lines().count(), 6);
    }
}
