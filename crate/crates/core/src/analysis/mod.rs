//! Choice-data analysis: risky-choice shares by frame, framing and
//! reflection tests, the Allais walkthrough, and a seeded respondent
//! simulator used to check the detectors end to end.
//!
//! Answer 2 is the risky option everywhere; the bank guarantees the certain
//! option is always rendered first.

mod report;
mod simulate;
pub mod stats;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bank::{frame_of, BankError, FrameLabel, TaskId, Version};
use crate::decision::{allais, allais_violates_eut, AllaisChoice};
use crate::store::ResponseRecord;

pub use report::{
    report, AgeSummary, DemographicsBreakdown, QuestionSection, Report, ReportFormat,
};
pub use simulate::{simulate, simulate_runs, AgentPolicy, AgentRun};
pub use stats::{normal_cdf, two_proportion_z, ZTest};

pub const RISKY_ANSWER: u8 = 2;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("no records to analyze{0}")]
    Empty(String),
    #[error("invalid agent policy: {0}")]
    InvalidPolicy(String),
    #[error(transparent)]
    Bank(#[from] BankError),
}

fn risky_count<'a>(
    records: impl IntoIterator<Item = &'a ResponseRecord>,
    task: TaskId,
) -> (usize, usize) {
    records.into_iter().fold((0, 0), |(risky, n), r| {
        (
            risky + usize::from(r.answers[task.index()] == RISKY_ANSWER),
            n + 1,
        )
    })
}

/// Share of records choosing the risky option on `qid`.
pub fn risky_share(records: &[ResponseRecord], qid: u8) -> Result<f64, AnalysisError> {
    let task = TaskId::new(qid)?;
    if records.is_empty() {
        return Err(AnalysisError::Empty(format!(" for question {qid}")));
    }
    let (risky, n) = risky_count(records, task);
    Ok(risky as f64 / n as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectReport {
    pub question_id: u8,
    pub n_pos: usize,
    pub n_neg: usize,
    pub risky_share_pos: f64,
    pub risky_share_neg: f64,
    /// Negative-frame share minus positive-frame share.
    pub delta: f64,
    pub z_stat: f64,
    pub p_value: f64,
}

/// Splits both cohorts into positive- and negative-frame pools for `task`.
pub fn frame_pools<'a>(
    v1: &'a [ResponseRecord],
    v2: &'a [ResponseRecord],
    task: TaskId,
) -> (Vec<&'a ResponseRecord>, Vec<&'a ResponseRecord>) {
    let mut positive = Vec::new();
    let mut negative = Vec::new();
    for (version, records) in [(Version::V1, v1), (Version::V2, v2)] {
        let pool = match frame_of(version, task) {
            FrameLabel::P => &mut positive,
            FrameLabel::N => &mut negative,
        };
        pool.extend(records.iter());
    }
    (positive, negative)
}

/// Framing test for one question across the two versions.
pub fn framing_effect(
    v1: &[ResponseRecord],
    v2: &[ResponseRecord],
    qid: u8,
) -> Result<EffectReport, AnalysisError> {
    let task = TaskId::new(qid)?;
    let (positive, negative) = frame_pools(v1, v2, task);
    if positive.is_empty() || negative.is_empty() {
        return Err(AnalysisError::Empty(format!(
            " in the {} pool of question {qid}",
            if positive.is_empty() {
                "positive"
            } else {
                "negative"
            }
        )));
    }
    let (risky_pos, n_pos) = risky_count(positive, task);
    let (risky_neg, n_neg) = risky_count(negative, task);
    let test = two_proportion_z(risky_neg, n_neg, risky_pos, n_pos);
    let risky_share_pos = risky_pos as f64 / n_pos as f64;
    let risky_share_neg = risky_neg as f64 / n_neg as f64;
    Ok(EffectReport {
        question_id: qid,
        n_pos,
        n_neg,
        risky_share_pos,
        risky_share_neg,
        delta: risky_share_neg - risky_share_pos,
        z_stat: test.z,
        p_value: test.p_value,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReflectionSummary {
    /// Answered question instances in each frame.
    pub n_pos: usize,
    pub n_neg: usize,
    pub risky_share_pos: f64,
    pub risky_share_neg: f64,
    pub delta: f64,
    pub z_stat: f64,
    pub p_value: f64,
    pub verdict: String,
}

impl ReflectionSummary {
    pub fn consistent_with_reflection(&self) -> bool {
        self.delta > 0.0
    }
}

/// Pools every question instance by its frame and compares risky shares.
pub fn reflection_summary(
    v1: &[ResponseRecord],
    v2: &[ResponseRecord],
) -> Result<ReflectionSummary, AnalysisError> {
    if v1.is_empty() && v2.is_empty() {
        return Err(AnalysisError::Empty(String::new()));
    }
    let (mut risky_pos, mut n_pos, mut risky_neg, mut n_neg) = (0, 0, 0, 0);
    for task in TaskId::all() {
        let (positive, negative) = frame_pools(v1, v2, task);
        let (r, n) = risky_count(positive, task);
        risky_pos += r;
        n_pos += n;
        let (r, n) = risky_count(negative, task);
        risky_neg += r;
        n_neg += n;
    }
    let test = two_proportion_z(risky_neg, n_neg, risky_pos, n_pos);
    let risky_share_pos = risky_pos as f64 / n_pos as f64;
    let risky_share_neg = risky_neg as f64 / n_neg as f64;
    let delta = risky_share_neg - risky_share_pos;
    let verdict = if delta > 0.0 {
        "consistent with reflection"
    } else {
        "not consistent with reflection"
    };
    Ok(ReflectionSummary {
        n_pos,
        n_neg,
        risky_share_pos,
        risky_share_neg,
        delta,
        z_stat: test.z,
        p_value: test.p_value,
        verdict: verdict.to_string(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GambleSummary {
    pub label: String,
    /// (payoff in dollars, probability as a fraction string)
    pub outcomes: Vec<(i64, String)>,
    pub expected_value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternVerdict {
    pub pattern: String,
    pub violates_eut: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllaisReport {
    pub gambles: Vec<GambleSummary>,
    pub patterns: Vec<PatternVerdict>,
}

pub fn allais_demo() -> AllaisReport {
    let gambles = allais::all()
        .into_iter()
        .map(|(label, p)| GambleSummary {
            label: label.to_string(),
            outcomes: p
                .outcomes()
                .iter()
                .map(|o| (o.value, o.probability.to_string()))
                .collect(),
            expected_value: p.expected_value(),
        })
        .collect();
    let patterns = AllaisChoice::ALL
        .iter()
        .map(|&c| PatternVerdict {
            pattern: c.to_string(),
            violates_eut: allais_violates_eut(c),
        })
        .collect();
    AllaisReport { gambles, patterns }
}

fn millions(dollars: f64) -> String {
    let m = dollars / allais::MILLION as f64;
    if m.fract() == 0.0 {
        format!("${m:.0}M")
    } else {
        format!("${m}M")
    }
}

impl fmt::Display for AllaisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Allais lotteries")?;
        for g in &self.gambles {
            let parts: Vec<String> = g
                .outcomes
                .iter()
                .map(|(v, p)| format!("{p} x {}", millions(*v as f64)))
                .collect();
            writeln!(
                f,
                "  {:<3} {:<48} EV = {}",
                g.label,
                parts.join(" + "),
                millions(g.expected_value)
            )?;
        }
        writeln!(f, "Choice patterns")?;
        for p in &self.patterns {
            let verdict = if p.violates_eut {
                "violates expected utility"
            } else {
                "consistent with expected utility"
            };
            writeln!(f, "  {:<9} {verdict}", p.pattern)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::session::{record_id_for, SessionId};
    use chrono::DateTime;

    fn rec(version: u8, answers: [u8; 7]) -> ResponseRecord {
        let session_id = SessionId::new(format!("{version}-{answers:?}"));
        ResponseRecord {
            record_id: record_id_for(&session_id),
            session_id,
            version,
            gender: String::new(),
            age: None,
            education: String::new(),
            answers: answers.to_vec(),
            response_times_ms: vec![None; 7],
            created_at: DateTime::UNIX_EPOCH,
        }
    }

    fn with_q1(choices: &[u8]) -> Vec<ResponseRecord> {
        choices
            .iter()
            .map(|&c| rec(1, [c, 1, 1, 1, 1, 1, 1]))
            .collect()
    }

    #[test]
    fn risky_share_counts_answer_two() {
        assert_eq!(risky_share(&with_q1(&[2, 2, 1, 2]), 1).unwrap(), 0.75);
        assert_eq!(risky_share(&with_q1(&[1, 1]), 1).unwrap(), 0.0);
        assert_eq!(risky_share(&with_q1(&[2]), 1).unwrap(), 1.0);
        assert!(matches!(risky_share(&[], 1), Err(AnalysisError::Empty(_))));
    }

    #[test]
    fn q3_pools_follow_the_plan() {
        let v1 = vec![rec(1, [1, 1, 2, 1, 1, 1, 1])];
        let v2 = vec![rec(2, [1, 1, 1, 1, 1, 1, 1]), rec(2, [1, 1, 1, 1, 1, 1, 1])];
        let (pos, neg) = frame_pools(&v1, &v2, TaskId::new(3).unwrap());
        assert!(pos.iter().all(|r| r.version == 2));
        assert!(neg.iter().all(|r| r.version == 1));
        let eff = framing_effect(&v1, &v2, 3).unwrap();
        assert_eq!((eff.n_pos, eff.n_neg), (2, 1));
        assert_eq!(eff.risky_share_neg, 1.0);
        assert_eq!(eff.delta, 1.0);
    }

    #[test]
    fn empty_pool_is_an_error() {
        let v1 = vec![rec(1, [1; 7])];
        assert!(framing_effect(&v1, &[], 1).is_err());
        assert!(reflection_summary(&[], &[]).is_err());
        assert!(reflection_summary(&v1, &[]).is_ok());
    }

    #[test]
    fn allais_demo_values() {
        let demo = allais_demo();
        let evs: Vec<f64> = demo.gambles.iter().map(|g| g.expected_value).collect();
        assert_eq!(evs, vec![100e6, 139e6, 11e6, 50e6]);
        let flagged: Vec<_> = demo
            .patterns
            .iter()
            .filter(|p| p.violates_eut)
            .map(|p| p.pattern.as_str())
            .collect();
        assert_eq!(flagged, ["(1A, 2B)", "(1B, 2A)"]);
        let text = demo.to_string();
        assert!(text.contains("EV = $139M"));
    }
}
