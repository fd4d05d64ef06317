//! One respondent's run through the seven tasks.
//!
//! The engine is a plain value type: every transition either succeeds and
//! mutates the state, or fails and leaves it untouched. Callers that share a
//! session across threads must serialize access themselves.

use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::bank::{bank, frame_of, BankError, FrameLabel, TaskId, Version, TASK_COUNT};
use crate::consequence::{ConsequenceBundle, Effect};
use crate::store::ResponseRecord;

pub const HEALTH_MAX: u16 = 250;
pub const START_HEALTH: u16 = 1;
/// 12 gold coins.
pub const START_GOLD_DECI: i64 = 120;
pub const MAX_AGE: u32 = 130;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SessionError {
    #[error("task {0} is locked")]
    Locked(TaskId),
    #[error("task {0} has already been answered")]
    AlreadyAnswered(TaskId),
    #[error("choice must be 1 or 2, got {0}")]
    InvalidChoice(i64),
    #[error(transparent)]
    Task(#[from] BankError),
    #[error("invalid demographics: {0}")]
    InvalidDemographics(String),
    #[error("session is not complete ({0} of 7 tasks solved)")]
    Incomplete(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SessionId(String);

impl SessionId {
    pub fn new(id: impl Into<String>) -> Self {
        SessionId(id.into())
    }

    /// 128 random bits, hex encoded.
    pub fn random() -> Self {
        SessionId(format!("{:032x}", rand::random::<u128>()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for SessionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Self-reported respondent data; every field may be left empty.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Demographics {
    pub gender: String,
    pub age: Option<u32>,
    pub education: String,
}

impl Demographics {
    pub fn new(
        gender: impl Into<String>,
        age: Option<i64>,
        education: impl Into<String>,
    ) -> Result<Self, SessionError> {
        let age = match age {
            None => None,
            Some(a) if (0..=i64::from(MAX_AGE)).contains(&a) => Some(a as u32),
            Some(a) => {
                return Err(SessionError::InvalidDemographics(format!(
                    "age {a} outside 0..={MAX_AGE}"
                )))
            }
        };
        Ok(Demographics {
            gender: gender.into(),
            age,
            education: education.into(),
        })
    }

    pub fn validate(&self) -> Result<(), SessionError> {
        match self.age {
            Some(a) if a > MAX_AGE => Err(SessionError::InvalidDemographics(format!(
                "age {a} outside 0..={MAX_AGE}"
            ))),
            _ => Ok(()),
        }
    }
}

/// Which answer button was pressed. Answer one is always the certain option.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Choice {
    Certain,
    Risky,
}

impl Choice {
    pub fn number(self) -> u8 {
        match self {
            Choice::Certain => 1,
            Choice::Risky => 2,
        }
    }

    pub fn from_number(n: i64) -> Result<Self, SessionError> {
        match n {
            1 => Ok(Choice::Certain),
            2 => Ok(Choice::Risky),
            other => Err(SessionError::InvalidChoice(other)),
        }
    }
}

impl TryFrom<u8> for Choice {
    type Error = SessionError;

    fn try_from(n: u8) -> Result<Self, Self::Error> {
        Choice::from_number(i64::from(n))
    }
}

impl From<Choice> for u8 {
    fn from(c: Choice) -> u8 {
        c.number()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerState {
    pub health: u16,
    pub gold_deci: i64,
    pub bonus_display: Option<String>,
}

impl PlayerState {
    pub fn health_display(&self) -> String {
        format!("{}/{HEALTH_MAX}", self.health)
    }

    pub fn gold_display(&self) -> String {
        format_gold(self.gold_deci)
    }
}

/// Renders deci-coins the way the HUD does: "9", "12.5".
pub fn format_gold(deci: i64) -> String {
    let sign = if deci < 0 { "-" } else { "" };
    let abs = deci.unsigned_abs();
    if abs.is_multiple_of(10) {
        format!("{sign}{}", abs / 10)
    } else {
        format!("{sign}{}.{}", abs / 10, abs % 10)
    }
}

/// What a successful answer produced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Transition {
    pub bundle: ConsequenceBundle,
    pub continuation: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionState {
    pub session_id: SessionId,
    pub version: Version,
    pub demographics: Demographics,
    pub player: PlayerState,
    pub solved: [bool; TASK_COUNT],
    /// 0 = unanswered, otherwise the pressed button.
    pub answers: [u8; TASK_COUNT],
    pub response_times_ms: [Option<u64>; TASK_COUNT],
    pub finalized: bool,
    pub gate_open: bool,
    unlocked: [bool; TASK_COUNT],
}

/// Starts a session under a freshly generated id.
pub fn start_session(d: Demographics, version: Version) -> Result<SessionState, SessionError> {
    SessionState::start(SessionId::random(), d, version)
}

impl SessionState {
    pub fn start(
        session_id: SessionId,
        demographics: Demographics,
        version: Version,
    ) -> Result<Self, SessionError> {
        demographics.validate()?;
        Ok(SessionState {
            session_id,
            version,
            demographics,
            player: PlayerState {
                health: START_HEALTH,
                gold_deci: START_GOLD_DECI,
                bonus_display: None,
            },
            solved: [false; TASK_COUNT],
            answers: [0; TASK_COUNT],
            response_times_ms: [None; TASK_COUNT],
            finalized: false,
            gate_open: false,
            // roadside and gate tasks are reachable from the start
            unlocked: [true, true, false, false, false, false, false],
        })
    }

    pub fn is_available(&self, task: TaskId) -> bool {
        self.unlocked[task.index()] && !self.solved[task.index()]
    }

    /// Unsolved tasks the player can currently open, ascending.
    pub fn available_tasks(&self) -> Vec<TaskId> {
        TaskId::all().filter(|&t| self.is_available(t)).collect()
    }

    pub fn frame(&self, task: TaskId) -> FrameLabel {
        frame_of(self.version, task)
    }

    /// Checks that `task` may be opened right now.
    pub fn check_open(&self, task: TaskId) -> Result<(), SessionError> {
        if self.solved[task.index()] {
            Err(SessionError::AlreadyAnswered(task))
        } else if !self.unlocked[task.index()] {
            Err(SessionError::Locked(task))
        } else {
            Ok(())
        }
    }

    pub fn submit_answer(
        &mut self,
        task: TaskId,
        choice: Choice,
        response_time_ms: Option<u64>,
    ) -> Result<Transition, SessionError> {
        self.check_open(task)?;
        let question = bank().get(task);
        let bundle = question
            .consequence
            .expect("game tasks carry a consequence")
            .bundle();

        let slot = task.index();
        self.answers[slot] = choice.number();
        self.solved[slot] = true;
        self.response_times_ms[slot] = response_time_ms;
        for effect in &bundle.effects {
            self.apply(effect);
        }

        Ok(Transition {
            continuation: question.script(self.frame(task)).continuation.clone(),
            bundle,
        })
    }

    fn apply(&mut self, effect: &Effect) {
        match effect {
            Effect::HealthSet {
                value, raise_only, ..
            } => {
                let value = (*value).min(HEALTH_MAX);
                self.player.health = if *raise_only {
                    self.player.health.max(value)
                } else {
                    value
                };
            }
            Effect::GoldDelta { deci_coins } => {
                self.player.gold_deci += deci_coins;
                debug_assert!(self.player.gold_deci >= 0);
            }
            Effect::GateOpen => {
                self.gate_open = true;
                for task in [3, 4, 5] {
                    self.unlocked[task - 1] = true;
                }
            }
            Effect::BonusDisplay { text } => self.player.bonus_display = Some(text.clone()),
            Effect::UnlockTasks { tasks } => {
                for &t in tasks {
                    if let Ok(t) = TaskId::new(t) {
                        self.unlocked[t.index()] = true;
                    }
                }
            }
            Effect::BlackoutRelocate { .. } => {}
        }
    }

    pub fn solved_count(&self) -> usize {
        self.solved.iter().filter(|&&s| s).count()
    }

    pub fn is_complete(&self) -> bool {
        self.solved.iter().all(|&s| s)
    }

    /// Builds the persisted record; finalization itself is the caller's job.
    pub fn to_record(&self, created_at: DateTime<Utc>) -> Result<ResponseRecord, SessionError> {
        if !self.is_complete() {
            return Err(SessionError::Incomplete(self.solved_count()));
        }
        Ok(ResponseRecord {
            record_id: record_id_for(&self.session_id),
            session_id: self.session_id.clone(),
            version: self.version.number(),
            gender: self.demographics.gender.clone(),
            age: self.demographics.age,
            education: self.demographics.education.clone(),
            answers: self.answers.to_vec(),
            response_times_ms: self.response_times_ms.to_vec(),
            created_at,
        })
    }
}

/// Record ids are 24 hex chars, the shape of a document object id, derived
/// from the session id so a retried finalization reproduces the same id.
pub fn record_id_for(session: &SessionId) -> String {
    let digest = Sha256::digest(session.as_str().as_bytes());
    hex::encode(&digest[..12])
}
