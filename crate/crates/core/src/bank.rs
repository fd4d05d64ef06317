//! The seven framed tasks, their two renderings, and the per-version
//! framing plan.
//!
//! The stimuli live in `data/bank.toml`, embedded at build time. Loading
//! checks every structural rule (certain-first ordering, probability
//! normalization, exact EV equality for quantified tasks), so a bad edit
//! to the data file fails the test suite instead of reaching respondents.

use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize, Serializer};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::consequence::ConsequenceId;
use crate::decision::{parse_fixed, parse_rational, Domain, Outcome, Prospect, Rational};

pub const TASK_COUNT: usize = 7;

const EMBEDDED_BANK: &str = include_str!("../data/bank.toml");

/// Framing of each task in version 1; version 2 is the inverse.
const V1_FRAMES: [FrameLabel; TASK_COUNT] = {
    use FrameLabel::*;
    [P, P, N, P, N, N, P]
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BankError {
    #[error("no question with id {0}")]
    NotFound(u8),
    #[error("invalid game version {0}")]
    InvalidVersion(u8),
    #[error("bank file does not parse: {0}")]
    Parse(String),
    #[error("question {id}: {reason}")]
    Invalid { id: u8, reason: String },
}

/// Task number, 1 through 7.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct TaskId(u8);

impl TaskId {
    pub fn new(id: u8) -> Result<Self, BankError> {
        if (1..=TASK_COUNT as u8).contains(&id) {
            Ok(TaskId(id))
        } else {
            Err(BankError::NotFound(id))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// Zero-based slot in the answers list.
    pub fn index(self) -> usize {
        usize::from(self.0 - 1)
    }

    pub fn all() -> impl Iterator<Item = TaskId> {
        (1..=TASK_COUNT as u8).map(TaskId)
    }
}

impl TryFrom<u8> for TaskId {
    type Error = BankError;

    fn try_from(id: u8) -> Result<Self, Self::Error> {
        TaskId::new(id)
    }
}

impl From<TaskId> for u8 {
    fn from(t: TaskId) -> u8 {
        t.0
    }
}

impl fmt::Display for TaskId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q{}", self.0)
    }
}

/// Which of the two game builds a respondent plays.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Version {
    V1,
    V2,
}

impl Version {
    pub const ALL: [Version; 2] = [Version::V1, Version::V2];

    pub fn number(self) -> u8 {
        match self {
            Version::V1 => 1,
            Version::V2 => 2,
        }
    }
}

impl TryFrom<u8> for Version {
    type Error = BankError;

    fn try_from(v: u8) -> Result<Self, Self::Error> {
        match v {
            1 => Ok(Version::V1),
            2 => Ok(Version::V2),
            other => Err(BankError::InvalidVersion(other)),
        }
    }
}

impl From<Version> for u8 {
    fn from(v: Version) -> u8 {
        v.number()
    }
}

impl fmt::Display for Version {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "V{}", self.number())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FrameLabel {
    P,
    N,
}

impl FrameLabel {
    pub fn inverse(self) -> Self {
        match self {
            FrameLabel::P => FrameLabel::N,
            FrameLabel::N => FrameLabel::P,
        }
    }
}

impl fmt::Display for FrameLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FrameLabel::P => "P",
            FrameLabel::N => "N",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Valence {
    Gain,
    Loss,
    Neutral,
}

/// A branch of a stimulus. `value` is `None` when the wording gives no
/// number for it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DescribedOutcome {
    pub label: String,
    pub value: Option<i64>,
    #[serde(serialize_with = "serialize_rational")]
    pub probability: Rational,
}

fn serialize_rational<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&format!("{}/{}", r.numer(), r.denom()))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeepStructure {
    pub domain: Domain,
    pub certain: Vec<DescribedOutcome>,
    pub risky: Vec<DescribedOutcome>,
    pub quantified: bool,
}

impl DeepStructure {
    fn prospect(&self, branch: &[DescribedOutcome]) -> Option<Prospect> {
        let outcomes = branch
            .iter()
            .map(|o| o.value.map(|v| Outcome::new(v, o.probability)))
            .collect::<Option<Vec<_>>>()?;
        Prospect::new(self.domain, outcomes).ok()
    }

    /// The certain option, if every branch carries a number.
    pub fn certain_prospect(&self) -> Option<Prospect> {
        self.prospect(&self.certain)
    }

    pub fn risky_prospect(&self) -> Option<Prospect> {
        self.prospect(&self.risky)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DialogueScript {
    pub npc_name: String,
    pub question: String,
    pub answer_one: String,
    pub answer_two: String,
    pub continuation: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FrameRendering {
    pub script: DialogueScript,
    /// Gain/loss/neutral wording of answer one and answer two.
    pub labels: [Valence; 2],
    pub certain_cue: String,
    pub risky_cue: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FramedQuestion {
    pub id: u8,
    pub deep: DeepStructure,
    pub positive: FrameRendering,
    pub negative: FrameRendering,
    pub consequence: Option<ConsequenceId>,
}

impl FramedQuestion {
    pub fn rendering(&self, frame: FrameLabel) -> &FrameRendering {
        match frame {
            FrameLabel::P => &self.positive,
            FrameLabel::N => &self.negative,
        }
    }

    pub fn script(&self, frame: FrameLabel) -> &DialogueScript {
        &self.rendering(frame).script
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct VersionPlan {
    pub version: Version,
    pub frames: [FrameLabel; TASK_COUNT],
}

impl VersionPlan {
    pub fn for_version(version: Version) -> Self {
        let frames = match version {
            Version::V1 => V1_FRAMES,
            Version::V2 => V1_FRAMES.map(FrameLabel::inverse),
        };
        VersionPlan { version, frames }
    }

    pub fn frame(&self, task: TaskId) -> FrameLabel {
        self.frames[task.index()]
    }
}

/// Typed lookup of the framing plan.
pub fn frame_of(version: Version, task: TaskId) -> FrameLabel {
    VersionPlan::for_version(version).frame(task)
}

/// Framing plan lookup from raw numbers.
pub fn frame_for(version: u8, id: u8) -> Result<FrameLabel, BankError> {
    Ok(frame_of(Version::try_from(version)?, TaskId::new(id)?))
}

/// One line of [`Bank::validate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BankCheck {
    pub id: u8,
    pub quantified: bool,
    /// `None` for tasks whose outcomes are not all numeric.
    pub ev_equal: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Bank {
    questions: Vec<FramedQuestion>,
    fixture: FramedQuestion,
}

impl Bank {
    pub fn from_toml_str(src: &str) -> Result<Self, BankError> {
        let raw: RawBank = toml::from_str(src).map_err(|e| BankError::Parse(e.to_string()))?;
        if raw.format_version != 1 {
            return Err(BankError::Parse(format!(
                "unsupported format_version {}",
                raw.format_version
            )));
        }
        let mut questions = Vec::with_capacity(TASK_COUNT);
        for (i, rq) in raw.question.into_iter().enumerate() {
            let expected = i as u8 + 1;
            if rq.id != expected {
                return Err(BankError::Invalid {
                    id: rq.id,
                    reason: format!("expected question {expected} at this position"),
                });
            }
            let q = rq.build()?;
            if q.consequence.is_none() {
                return Err(BankError::Invalid {
                    id: q.id,
                    reason: "game tasks need a consequence".into(),
                });
            }
            questions.push(q);
        }
        if questions.len() != TASK_COUNT {
            return Err(BankError::Parse(format!(
                "expected {TASK_COUNT} questions, found {}",
                questions.len()
            )));
        }
        let fixture = raw.fixture.build()?;
        if fixture.id != 0 {
            return Err(BankError::Invalid {
                id: fixture.id,
                reason: "the fixture must use id 0".into(),
            });
        }
        Ok(Bank { questions, fixture })
    }

    pub fn get(&self, task: TaskId) -> &FramedQuestion {
        &self.questions[task.index()]
    }

    pub fn get_question(&self, id: u8) -> Result<&FramedQuestion, BankError> {
        Ok(self.get(TaskId::new(id)?))
    }

    pub fn questions(&self) -> &[FramedQuestion] {
        &self.questions
    }

    pub fn render(&self, id: u8, frame: FrameLabel) -> Result<&DialogueScript, BankError> {
        Ok(self.get_question(id)?.script(frame))
    }

    /// The $500-endowment worked example; not one of the seven tasks.
    pub fn table1_fixture(&self) -> &FramedQuestion {
        &self.fixture
    }

    pub fn validate(&self) -> Vec<BankCheck> {
        self.questions
            .iter()
            .map(|q| BankCheck {
                id: q.id,
                quantified: q.deep.quantified,
                ev_equal: q.deep.quantified.then(|| ev_equal(&q.deep)),
            })
            .collect()
    }

    /// Compact JSON of the loaded bank; the basis of [`Bank::checksum`].
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("bank serializes")
    }

    /// SHA-256 of the canonical serialization, lowercase hex.
    pub fn checksum(&self) -> String {
        hex::encode(Sha256::digest(self.canonical_json().as_bytes()))
    }
}

fn ev_equal(deep: &DeepStructure) -> bool {
    match (deep.certain_prospect(), deep.risky_prospect()) {
        (Some(c), Some(r)) => c.expected_value_exact() == r.expected_value_exact(),
        _ => false,
    }
}

/// The embedded bank, parsed once.
pub fn bank() -> &'static Bank {
    static BANK: OnceLock<Bank> = OnceLock::new();
    BANK.get_or_init(|| Bank::from_toml_str(EMBEDDED_BANK).expect("embedded bank is valid"))
}

pub fn get_question(id: u8) -> Result<&'static FramedQuestion, BankError> {
    bank().get_question(id)
}

pub fn render(id: u8, frame: FrameLabel) -> Result<&'static DialogueScript, BankError> {
    bank().render(id, frame)
}

pub fn validate_bank() -> Vec<BankCheck> {
    bank().validate()
}

pub fn table1_fixture() -> &'static FramedQuestion {
    bank().table1_fixture()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBank {
    format_version: u32,
    question: Vec<RawQuestion>,
    fixture: RawQuestion,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuestion {
    id: u8,
    npc_name: String,
    domain: Domain,
    #[serde(default)]
    consequence: Option<ConsequenceId>,
    quantified: bool,
    certain: Vec<RawOutcome>,
    risky: Vec<RawOutcome>,
    positive: RawScript,
    negative: RawScript,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutcome {
    #[serde(default)]
    value: Option<String>,
    probability: String,
    label: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScript {
    question: String,
    answer_one: String,
    answer_two: String,
    continuation: String,
    labels: [Valence; 2],
    certain_cue: String,
    risky_cue: String,
}

impl RawQuestion {
    fn build(self) -> Result<FramedQuestion, BankError> {
        let id = self.id;
        let invalid = |reason: String| BankError::Invalid { id, reason };

        let convert = |branch: Vec<RawOutcome>| -> Result<Vec<DescribedOutcome>, BankError> {
            branch
                .into_iter()
                .map(|o| {
                    let probability = parse_rational(&o.probability)
                        .ok_or_else(|| invalid(format!("bad probability {:?}", o.probability)))?;
                    let value = match &o.value {
                        Some(v) => Some(
                            parse_fixed(v, self.domain)
                                .ok_or_else(|| invalid(format!("bad value {v:?}")))?,
                        ),
                        None => None,
                    };
                    Ok(DescribedOutcome {
                        label: o.label,
                        value,
                        probability,
                    })
                })
                .collect()
        };
        let certain = convert(self.certain)?;
        let risky = convert(self.risky)?;

        if certain.len() != 1 || certain[0].probability != Rational::from_integer(1) {
            return Err(invalid(
                "certain option must be one outcome with probability 1".into(),
            ));
        }
        if risky.len() < 2 {
            return Err(invalid("risky option needs at least two outcomes".into()));
        }
        let risky_total: Rational = risky.iter().map(|o| o.probability).sum();
        if risky_total != Rational::from_integer(1)
            || risky
                .iter()
                .any(|o| o.probability < Rational::from_integer(0))
        {
            return Err(invalid(format!("risky probabilities sum to {risky_total}")));
        }
        let all_numeric = certain.iter().chain(&risky).all(|o| o.value.is_some());
        if self.quantified != all_numeric {
            return Err(invalid(format!(
                "quantified = {} but numeric outcomes = {all_numeric}",
                self.quantified
            )));
        }
        let deep = DeepStructure {
            domain: self.domain,
            certain,
            risky,
            quantified: self.quantified,
        };
        if deep.quantified && !ev_equal(&deep) {
            return Err(invalid("certain and risky expected values differ".into()));
        }

        let npc_name = self.npc_name;
        let render = |raw: RawScript| -> Result<FrameRendering, BankError> {
            let script = DialogueScript {
                npc_name: npc_name.clone(),
                question: raw.question,
                answer_one: raw.answer_one,
                answer_two: raw.answer_two,
                continuation: raw.continuation,
            };
            for (field, text) in [
                ("npc_name", &script.npc_name),
                ("question", &script.question),
                ("answer_one", &script.answer_one),
                ("answer_two", &script.answer_two),
                ("continuation", &script.continuation),
            ] {
                if text.trim().is_empty() {
                    return Err(invalid(format!("{field} is empty")));
                }
            }
            if raw.certain_cue.is_empty() || raw.risky_cue.is_empty() {
                return Err(invalid("cues must be non-empty".into()));
            }
            if !script.answer_one.contains(&raw.certain_cue)
                || script.answer_two.contains(&raw.certain_cue)
            {
                return Err(invalid(format!(
                    "certain cue {:?} must appear in answer one only",
                    raw.certain_cue
                )));
            }
            if !script.answer_two.contains(&raw.risky_cue)
                || script.answer_one.contains(&raw.risky_cue)
            {
                return Err(invalid(format!(
                    "risky cue {:?} must appear in answer two only",
                    raw.risky_cue
                )));
            }
            Ok(FrameRendering {
                script,
                labels: raw.labels,
                certain_cue: raw.certain_cue,
                risky_cue: raw.risky_cue,
            })
        };
        let positive = render(self.positive)?;
        let negative = render(self.negative)?;
        if positive.script.continuation != negative.script.continuation {
            return Err(invalid("frames must share the continuation".into()));
        }

        Ok(FramedQuestion {
            id,
            deep,
            positive,
            negative,
            consequence: self.consequence,
        })
    }
}
