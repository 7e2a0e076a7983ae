//! Sampling policies and the VOI stopping rule.

use std::fmt;
use std::str::FromStr;

use crate::belief::{argmax, BeliefState};
use crate::bounds::{erf_unchecked, simple_unchecked};
use crate::error::{domain, Error, Result};

/// What to do next in a selection run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyDecision {
    Sample(usize),
    Stop,
}

/// A sampling policy.
///
/// The VOI policies sample the arm with the largest VOI bound for the
/// remaining budget. With a positive `cost` they also stop once no arm's
/// per-sample VOI bound exceeds it; `None` or `Some(0.0)` always spends the
/// full budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PolicyKind {
    /// Hoeffding exponential bound.
    Voi {
        cost: Option<f64>,
    },
    /// Error-function bound for selection, Hoeffding bound for stopping.
    VoiPlus {
        cost: Option<f64>,
    },
    Ucb1,
    RoundRobin,
}

impl PolicyKind {
    pub const NAMES: [&'static str; 4] = ["voi", "voi-plus", "ucb1", "round-robin"];

    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::Voi { .. } => "voi",
            PolicyKind::VoiPlus { .. } => "voi-plus",
            PolicyKind::Ucb1 => "ucb1",
            PolicyKind::RoundRobin => "round-robin",
        }
    }

    /// Sets the sample cost of a VOI policy; other policies are unchanged.
    pub fn with_cost(self, cost: f64) -> Result<Self> {
        if !(cost >= 0.0 && cost.is_finite()) {
            return domain(format!("sample cost {cost} must be finite and >= 0"));
        }
        let cost = (cost > 0.0).then_some(cost);
        Ok(match self {
            PolicyKind::Voi { .. } => PolicyKind::Voi { cost },
            PolicyKind::VoiPlus { .. } => PolicyKind::VoiPlus { cost },
            other => other,
        })
    }

    pub fn cost(&self) -> Option<f64> {
        match *self {
            PolicyKind::Voi { cost } | PolicyKind::VoiPlus { cost } => cost,
            _ => None,
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "voi" => Ok(PolicyKind::Voi { cost: None }),
            "voi-plus" => Ok(PolicyKind::VoiPlus { cost: None }),
            "ucb1" => Ok(PolicyKind::Ucb1),
            "round-robin" => Ok(PolicyKind::RoundRobin),
            other => Err(Error::Config(format!(
                "unknown policy {other:?}; expected one of {}",
                PolicyKind::NAMES.join(", ")
            ))),
        }
    }
}

/// Per-sample VOI bound of `arm`: the Hoeffding bound divided by the horizon.
///
/// The bound is linear in the horizon, so this is independent of how many
/// samples remain and can be compared directly with a per-sample cost.
pub fn stop_ratio(state: &BeliefState, arm: usize) -> Result<f64> {
    state.check_arm(arm)?;
    Ok(simple_unchecked(state, arm, 1.0))
}

/// Largest [`stop_ratio`] over all arms.
pub fn max_stop_ratio(state: &BeliefState) -> f64 {
    (0..state.num_arms())
        .map(|i| simple_unchecked(state, i, 1.0))
        .fold(0.0, f64::max)
}

/// True when a positive `cost` is at least every arm's per-sample VOI bound.
pub fn should_stop(state: &BeliefState, cost: Option<f64>) -> bool {
    match cost {
        Some(c) if c > 0.0 => max_stop_ratio(state) <= c,
        _ => false,
    }
}

/// UCB1 index `mean + sqrt(2 ln t / n)`.
pub fn ucb1_score(mean: f64, count: u64, total: u64) -> f64 {
    mean + (2.0 * (total as f64).ln() / count as f64).sqrt()
}

/// Chooses the next action.
///
/// `remaining` is the number of samples still available (the VOI horizon)
/// and `elapsed` the number already taken, initialization included.
pub fn decide(
    policy: &PolicyKind,
    state: &BeliefState,
    remaining: u64,
    elapsed: u64,
) -> Result<PolicyDecision> {
    if remaining == 0 {
        return domain("no samples remaining; select the final arm instead");
    }
    let k = state.num_arms();
    let horizon = remaining as f64;
    let arm = match *policy {
        PolicyKind::Voi { cost } => {
            if should_stop(state, cost) {
                return Ok(PolicyDecision::Stop);
            }
            argmax((0..k).map(|i| simple_unchecked(state, i, horizon)))
        }
        PolicyKind::VoiPlus { cost } => {
            if should_stop(state, cost) {
                return Ok(PolicyDecision::Stop);
            }
            argmax((0..k).map(|i| erf_unchecked(state, i, horizon)))
        }
        PolicyKind::Ucb1 => {
            let t = state.total_samples();
            argmax((0..k).map(|i| ucb1_score(state.mean(i), state.count(i), t)))
        }
        PolicyKind::RoundRobin => (elapsed % k as u64) as usize,
    };
    Ok(PolicyDecision::Sample(arm))
}
