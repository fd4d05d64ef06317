use chrono::{DateTime, Duration, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::AnalysisError;
use crate::bank::{FrameLabel, TaskId, Version};
use crate::session::{Choice, Demographics, SessionId, SessionState};
use crate::store::ResponseRecord;

/// Synthetic respondent: risk-seeking with a frame-dependent probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentPolicy {
    pub p_risky_positive: f64,
    pub p_risky_negative: f64,
    pub seed: u64,
}

impl AgentPolicy {
    pub fn new(
        p_risky_positive: f64,
        p_risky_negative: f64,
        seed: u64,
    ) -> Result<Self, AnalysisError> {
        for (name, p) in [
            ("p_risky_positive", p_risky_positive),
            ("p_risky_negative", p_risky_negative),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(AnalysisError::InvalidPolicy(format!(
                    "{name} = {p} is not a probability"
                )));
            }
        }
        Ok(AgentPolicy {
            p_risky_positive,
            p_risky_negative,
            seed,
        })
    }

    fn p_risky(&self, frame: FrameLabel) -> f64 {
        match frame {
            FrameLabel::P => self.p_risky_positive,
            FrameLabel::N => self.p_risky_negative,
        }
    }
}

/// Fixed timestamp base so simulated records are bit-reproducible.
fn sim_epoch() -> DateTime<Utc> {
    DateTime::parse_from_rfc3339("2021-09-01T00:00:00Z")
        .expect("valid literal")
        .with_timezone(&Utc)
}

/// A simulated respondent's record plus the order it answered in.
#[derive(Debug, Clone, PartialEq)]
pub struct AgentRun {
    pub record: ResponseRecord,
    pub order: Vec<TaskId>,
}

/// One simulated respondent. Each agent draws from its own stream so the
/// output does not depend on the order agents are run in.
fn run_agent(policy: &AgentPolicy, version: Version, index: u64) -> AgentRun {
    let mut rng = ChaCha8Rng::seed_from_u64(policy.seed);
    rng.set_stream((u64::from(version.number()) << 40) | index);

    let session_id = SessionId::new(format!(
        "sim-{}-v{}-{index:06}",
        policy.seed,
        version.number()
    ));
    let mut state = SessionState::start(session_id, Demographics::default(), version)
        .expect("default demographics are valid");
    let mut order = Vec::with_capacity(7);
    loop {
        let available = state.available_tasks();
        if available.is_empty() {
            break;
        }
        let task = available[rng.random_range(0..available.len())];
        let choice = if rng.random_bool(policy.p_risky(state.frame(task))) {
            Choice::Risky
        } else {
            Choice::Certain
        };
        state
            .submit_answer(task, choice, None)
            .expect("only available tasks are answered");
        order.push(task);
    }
    let offset = Duration::seconds(i64::try_from(index).unwrap_or(i64::MAX));
    let record = state
        .to_record(sim_epoch() + offset)
        .expect("every task is reachable, so the run completes");
    AgentRun { record, order }
}

/// Runs `n_per_version` agents through each version.
pub fn simulate(
    n_per_version: usize,
    policy: &AgentPolicy,
) -> Result<(Vec<ResponseRecord>, Vec<ResponseRecord>), AnalysisError> {
    let (v1, v2) = simulate_runs(n_per_version, policy)?;
    let records = |runs: Vec<AgentRun>| runs.into_iter().map(|r| r.record).collect();
    Ok((records(v1), records(v2)))
}

/// [`simulate`], keeping each agent's answer order.
pub fn simulate_runs(
    n_per_version: usize,
    policy: &AgentPolicy,
) -> Result<(Vec<AgentRun>, Vec<AgentRun>), AnalysisError> {
    let policy = AgentPolicy::new(
        policy.p_risky_positive,
        policy.p_risky_negative,
        policy.seed,
    )?;
    if n_per_version == 0 {
        return Err(AnalysisError::InvalidPolicy(
            "n_per_version must be at least 1".into(),
        ));
    }
    let cohort = |version| {
        (0..n_per_version as u64)
            .map(|i| run_agent(&policy, version, i))
            .collect::<Vec<_>>()
    };
    Ok((cohort(Version::V1), cohort(Version::V2)))
}
