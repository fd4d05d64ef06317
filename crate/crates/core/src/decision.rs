//! Decision-theory primitives: prospects, expected value and utility,
//! the reference-dependent value function, and the Allais consistency check.
//!
//! Outcome values are fixed-point integers in the base unit of their
//! [`Domain`] (gold is counted in tenths of a coin) and probabilities are
//! exact rationals, so expected-value comparisons between stimuli never
//! depend on floating-point rounding.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exact rational used for probabilities and expected values.
pub type Rational = Ratio<i128>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecisionError {
    #[error("prospect has no outcomes")]
    EmptyProspect,
    #[error("negative probability {0}")]
    NegativeProbability(Rational),
    #[error("probabilities sum to {0}, expected 1")]
    NotNormalized(Rational),
    #[error("prospects are in different domains ({0} vs {1})")]
    DomainMismatch(Domain, Domain),
    #[error("utility is undefined at outcome {0}")]
    UtilityUndefined(f64),
    #[error("invalid value-function parameters: {0}")]
    InvalidParams(&'static str),
    #[error("probability weighting violates its contract: {0}")]
    InvalidWeighting(String),
}

/// What an outcome is counted in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Domain {
    Health,
    Gold,
    Lives,
    AbstractMoney,
}

impl Domain {
    /// Number of base units per displayed unit.
    pub fn scale(self) -> i64 {
        match self {
            Domain::Gold => 10,
            _ => 1,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Domain::Health => "health",
            Domain::Gold => "gold",
            Domain::Lives => "lives",
            Domain::AbstractMoney => "abstract-money",
        }
    }
}

impl fmt::Display for Domain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Domain {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "health" => Ok(Domain::Health),
            "gold" => Ok(Domain::Gold),
            "lives" => Ok(Domain::Lives),
            "abstract-money" => Ok(Domain::AbstractMoney),
            other => Err(format!("unknown domain {other:?}")),
        }
    }
}

/// One payoff of a prospect, `value` in base units of the owning domain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub value: i64,
    pub probability: Rational,
}

impl Outcome {
    pub fn new(value: i64, probability: Rational) -> Self {
        Outcome { value, probability }
    }
}

/// A validated list of (payoff, probability) pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prospect {
    domain: Domain,
    outcomes: Vec<Outcome>,
}

impl Prospect {
    pub fn new(domain: Domain, outcomes: Vec<Outcome>) -> Result<Self, DecisionError> {
        if outcomes.is_empty() {
            return Err(DecisionError::EmptyProspect);
        }
        let mut total = Rational::zero();
        for o in &outcomes {
            if o.probability.is_negative() {
                return Err(DecisionError::NegativeProbability(o.probability));
            }
            total += o.probability;
        }
        if !total.is_one() {
            return Err(DecisionError::NotNormalized(total));
        }
        Ok(Prospect { domain, outcomes })
    }

    /// A degenerate prospect paying `value` with probability one.
    pub fn certain(domain: Domain, value: i64) -> Self {
        Prospect {
            domain,
            outcomes: vec![Outcome::new(value, Rational::one())],
        }
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn is_certain(&self) -> bool {
        self.outcomes.len() == 1
    }

    /// Outcome value converted from base units to domain units.
    pub fn unit_value(&self, outcome: &Outcome) -> f64 {
        outcome.value as f64 / self.domain.scale() as f64
    }

    /// Expected value in domain units, exact.
    pub fn expected_value_exact(&self) -> Rational {
        let sum = self.outcomes.iter().fold(Rational::zero(), |acc, o| {
            acc + o.probability * i128::from(o.value)
        });
        sum / i128::from(self.domain.scale())
    }

    /// Expected value in domain units; accumulated exactly, converted last.
    pub fn expected_value(&self) -> f64 {
        rational_to_f64(&self.expected_value_exact())
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Free-function form of [`Prospect::expected_value`].
pub fn expected_value(p: &Prospect) -> f64 {
    p.expected_value()
}

/// `Σ u(x_k)·p_k` with `x_k` in domain units. `u` returns `None` where it is
/// undefined, which is reported as an error rather than skipped.
pub fn expected_utility<U>(p: &Prospect, u: U) -> Result<f64, DecisionError>
where
    U: Fn(f64) -> Option<f64>,
{
    let mut total = 0.0;
    for o in &p.outcomes {
        let x = p.unit_value(o);
        let ux = u(x).ok_or(DecisionError::UtilityUndefined(x))?;
        total += ux * rational_to_f64(&o.probability);
    }
    Ok(total)
}

/// Exact expected-value equality of two prospects in the same domain.
pub fn prospects_equal_ev(a: &Prospect, b: &Prospect) -> Result<bool, DecisionError> {
    if a.domain != b.domain {
        return Err(DecisionError::DomainMismatch(a.domain, b.domain));
    }
    Ok(a.expected_value_exact() == b.expected_value_exact())
}

/// Power-form value function parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueFnParams {
    alpha: f64,
    beta: f64,
    lambda: f64,
}

impl Default for ValueFnParams {
    fn default() -> Self {
        ValueFnParams {
            alpha: 0.88,
            beta: 0.88,
            lambda: 2.25,
        }
    }
}

impl ValueFnParams {
    pub fn new(alpha: f64, beta: f64, lambda: f64) -> Result<Self, DecisionError> {
        if !(alpha.is_finite() && beta.is_finite() && lambda.is_finite()) {
            return Err(DecisionError::InvalidParams("parameters must be finite"));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(DecisionError::InvalidParams("alpha must lie in (0, 1]"));
        }
        if !(beta > 0.0 && beta <= 1.0) {
            return Err(DecisionError::InvalidParams("beta must lie in (0, 1]"));
        }
        if lambda < 1.0 {
            return Err(DecisionError::InvalidParams("lambda must be at least 1"));
        }
        Ok(ValueFnParams {
            alpha,
            beta,
            lambda,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }
}

/// Value of a deviation `x` from the reference point (which sits at zero).
pub fn pt_value(x: f64, params: &ValueFnParams) -> f64 {
    if x >= 0.0 {
        x.powf(params.alpha)
    } else {
        -params.lambda * (-x).powf(params.beta)
    }
}

/// Maps an objective probability to a decision weight.
pub trait ProbabilityWeighting {
    fn weight(&self, p: f64) -> f64;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityWeighting;

impl ProbabilityWeighting for IdentityWeighting {
    fn weight(&self, p: f64) -> f64 {
        p
    }
}

impl<F: Fn(f64) -> f64> ProbabilityWeighting for F {
    fn weight(&self, p: f64) -> f64 {
        self(p)
    }
}

const WEIGHT_ENDPOINT_TOL: f64 = 1e-12;

/// `Σ w(p_k)·v(x_k)`. The weighting must fix both endpoints and stay in [0, 1].
pub fn pt_prospect_value<W>(
    p: &Prospect,
    params: &ValueFnParams,
    weighting: &W,
) -> Result<f64, DecisionError>
where
    W: ProbabilityWeighting + ?Sized,
{
    let w0 = weighting.weight(0.0);
    let w1 = weighting.weight(1.0);
    if w0.abs() > WEIGHT_ENDPOINT_TOL || (w1 - 1.0).abs() > WEIGHT_ENDPOINT_TOL {
        return Err(DecisionError::InvalidWeighting(format!(
            "w(0) = {w0}, w(1) = {w1}"
        )));
    }
    let mut total = 0.0;
    for o in &p.outcomes {
        let prob = rational_to_f64(&o.probability);
        // w(1) is pinned so certain prospects reduce to v(x) exactly.
        let w = if o.probability.is_one() {
            1.0
        } else {
            weighting.weight(prob)
        };
        if !(0.0..=1.0).contains(&w) {
            return Err(DecisionError::InvalidWeighting(format!("w({prob}) = {w}")));
        }
        total += w * pt_value(p.unit_value(o), params);
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GambleA {
    A1,
    B1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GambleB {
    A2,
    B2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AllaisChoice {
    pub gamble_a: GambleA,
    pub gamble_b: GambleB,
}

impl AllaisChoice {
    pub const ALL: [AllaisChoice; 4] = [
        AllaisChoice::new(GambleA::A1, GambleB::A2),
        AllaisChoice::new(GambleA::A1, GambleB::B2),
        AllaisChoice::new(GambleA::B1, GambleB::A2),
        AllaisChoice::new(GambleA::B1, GambleB::B2),
    ];

    pub const fn new(gamble_a: GambleA, gamble_b: GambleB) -> Self {
        AllaisChoice { gamble_a, gamble_b }
    }
}

impl fmt::Display for AllaisChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = match self.gamble_a {
            GambleA::A1 => "1A",
            GambleA::B1 => "1B",
        };
        let b = match self.gamble_b {
            GambleB::A2 => "2A",
            GambleB::B2 => "2B",
        };
        write!(f, "({a}, {b})")
    }
}

/// With u(0) = 0, preferring 1A over 1B and preferring 2A over 2B both
/// reduce to `0.11·u(100M) > 0.10·u(500M)`; mixed patterns need it to hold
/// and fail at once.
pub fn allais_violates_eut(choice: AllaisChoice) -> bool {
    let prefers_sure_side_first = choice.gamble_a == GambleA::A1;
    let prefers_sure_side_second = choice.gamble_b == GambleB::A2;
    prefers_sure_side_first != prefers_sure_side_second
}

pub mod allais {
    //! The four Allais lotteries, payoffs in dollars.

    use super::{Domain, Outcome, Prospect, Rational};

    pub const MILLION: i64 = 1_000_000;

    fn pct(n: i128) -> Rational {
        Rational::new(n, 100)
    }

    fn build(outcomes: &[(i64, i128)]) -> Prospect {
        Prospect::new(
            Domain::AbstractMoney,
            outcomes
                .iter()
                .map(|&(v, p)| Outcome::new(v, pct(p)))
                .collect(),
        )
        .expect("Allais lotteries are normalized")
    }

    pub fn option_1a() -> Prospect {
        build(&[(100 * MILLION, 100)])
    }

    pub fn option_1b() -> Prospect {
        build(&[(100 * MILLION, 89), (500 * MILLION, 10), (0, 1)])
    }

    pub fn option_2a() -> Prospect {
        build(&[(0, 89), (100 * MILLION, 11)])
    }

    pub fn option_2b() -> Prospect {
        build(&[(0, 90), (500 * MILLION, 10)])
    }

    /// All four lotteries with their conventional labels.
    pub fn all() -> [(&'static str, Prospect); 4] {
        [
            ("1A", option_1a()),
            ("1B", option_1b()),
            ("2A", option_2a()),
            ("2B", option_2b()),
        ]
    }
}

/// Parses an exact rational from `"0.875"`, `"7/8"` or `"1"`.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if s.contains('/') {
        return Rational::from_str(s).ok();
    }
    let (negative, digits) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part
        .chars()
        .chain(frac_part.chars())
        .all(|c| c.is_ascii_digit())
    {
        return None;
    }
    let int_val: i128 = if int_part.is_empty() {
        0
    } else {
        int_part.parse().ok()?
    };
    let denom = 10i128.checked_pow(u32::try_from(frac_part.len()).ok()?)?;
    let frac_val: i128 = if frac_part.is_empty() {
        0
    } else {
        frac_part.parse().ok()?
    };
    let r = Rational::new(int_val.checked_mul(denom)?.checked_add(frac_val)?, denom);
    Some(if negative { -r } else { r })
}

/// Parses a decimal amount in domain units into base units, rejecting
/// precision the domain cannot represent.
pub fn parse_fixed(s: &str, domain: Domain) -> Option<i64> {
    let r = parse_rational(s)? * i128::from(domain.scale());
    if !r.is_integer() {
        return None;
    }
    i64::try_from(r.to_integer()).ok()
}
