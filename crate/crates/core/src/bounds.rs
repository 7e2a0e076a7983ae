//! Distribution-free upper bounds on the value of information (VOI) of
//! sampling one arm `N` more times.
//!
//! Payoffs are assumed iid in `[0,1]` and the arm finally selected is the
//! one with the greatest sample mean. Sampling arm `i` can only change the
//! selection if its mean crosses the current leader's: for the leader
//! `alpha` that means dropping below the runner-up `beta`, for any other arm
//! it means rising above `alpha`. The gain from such a crossing is bounded
//! by how far the mean can move, and the crossing probability is bounded by
//! Hoeffding's inequality:
//!
//! ```text
//! VOI(alpha) <= N·mean(beta)/n_alpha     · Pr(crossing)
//! VOI(i)     <= N·(1 - mean(alpha))/n_i  · Pr(crossing)
//! Pr(crossing) <= 2·exp(-PHI·gap²·n)     PHI = 8(√2-1)²
//! ```
//!
//! A tighter variant integrates the Hoeffding tail over the crossing
//! distance, giving differences of error functions ([`voi_bound_erf`]).
//!
//! All bounds are linear in `N`, so the arm with the largest bound does not
//! depend on the horizon. Raw `2·exp(..)` factors are not clamped to 1; the
//! policies only compare the values.

use crate::belief::{argmax, BeliefState};
use crate::error::{domain, Result};

/// The exponent constant `8(√2 − 1)² = 24 − 16√2 ≈ 1.3725830`.
///
/// It is the minimum over `r > 0` of `2((1 + r)/(1 + √r))²`, the factor that
/// appears after splitting the crossing event between past and future
/// samples and balancing the two Hoeffding terms.
pub fn phi() -> f64 {
    let t = std::f64::consts::SQRT_2 - 1.0;
    8.0 * t * t
}

fn check_mean(name: &str, m: f64) -> Result<()> {
    if (0.0..=1.0).contains(&m) {
        Ok(())
    } else {
        domain(format!("{name} = {m} outside [0,1]"))
    }
}

fn check_order(upper: f64, lower: f64) -> Result<()> {
    check_mean("leader mean", upper)?;
    check_mean("other mean", lower)?;
    if lower > upper {
        return domain(format!("mean {lower} exceeds leader mean {upper}"));
    }
    Ok(())
}

fn check_count(n: u64) -> Result<()> {
    if n == 0 {
        domain("sample count must be at least 1")
    } else {
        Ok(())
    }
}

#[inline]
fn hoeffding_factor(gap: f64, n: u64) -> f64 {
    2.0 * (-phi() * gap * gap * n as f64).exp()
}

/// Bound on the probability that `N` more samples of the leader push its
/// mean to or below the runner-up's. Raw value in `(0, 2]`.
pub fn prob_bound_alpha(mean_alpha: f64, mean_beta: f64, n_alpha: u64) -> Result<f64> {
    check_order(mean_alpha, mean_beta)?;
    check_count(n_alpha)?;
    Ok(hoeffding_factor(mean_alpha - mean_beta, n_alpha))
}

/// Bound on the probability that `N` more samples of a non-leading arm lift
/// its mean to or above the leader's. Raw value in `(0, 2]`.
pub fn prob_bound_other(mean_alpha: f64, mean_i: f64, n_i: u64) -> Result<f64> {
    check_order(mean_alpha, mean_i)?;
    check_count(n_i)?;
    Ok(hoeffding_factor(mean_alpha - mean_i, n_i))
}

fn check_query(state: &BeliefState, arm: usize, horizon: u64) -> Result<()> {
    state.check_arm(arm)?;
    if horizon == 0 {
        return domain("horizon N must be at least 1");
    }
    Ok(())
}

/// Hoeffding VOI bound of sampling `arm` `horizon` more times.
pub fn voi_bound_simple(state: &BeliefState, arm: usize, horizon: u64) -> Result<f64> {
    check_query(state, arm, horizon)?;
    Ok(simple_unchecked(state, arm, horizon as f64))
}

pub(crate) fn simple_unchecked(state: &BeliefState, arm: usize, horizon: f64) -> f64 {
    let alpha = state.alpha();
    let mean_alpha = state.mean(alpha);
    if arm == alpha {
        let mean_beta = state.mean(state.beta());
        let n = state.count(alpha);
        2.0 * horizon * mean_beta / n as f64
            * (-phi() * sq(mean_alpha - mean_beta) * n as f64).exp()
    } else {
        let n = state.count(arm);
        let gap = mean_alpha - state.mean(arm);
        2.0 * horizon * (1.0 - mean_alpha) / n as f64 * (-phi() * gap * gap * n as f64).exp()
    }
}

/// Error-function VOI bound of sampling `arm` `horizon` more times.
pub fn voi_bound_erf(state: &BeliefState, arm: usize, horizon: u64) -> Result<f64> {
    check_query(state, arm, horizon)?;
    Ok(erf_unchecked(state, arm, horizon as f64))
}

pub(crate) fn erf_unchecked(state: &BeliefState, arm: usize, horizon: f64) -> f64 {
    const SQRT_PI: f64 = 1.772_453_850_905_516;
    let alpha = state.alpha();
    let mean_alpha = state.mean(alpha);
    let n = state.count(arm) as f64;
    let root_n = n.sqrt();
    let (far, near) = if arm == alpha {
        let mean_beta = state.mean(state.beta());
        (mean_alpha, mean_alpha - mean_beta)
    } else {
        let mean_i = state.mean(arm);
        (1.0 - mean_i, mean_alpha - mean_i)
    };
    let diff = libm::erf(far * root_n) - libm::erf(near * root_n);
    (horizon * SQRT_PI / (n * root_n) * diff).max(0.0)
}

/// The VOI bound skeleton with a caller-supplied crossing probability.
///
/// Multiplying by [`prob_bound_alpha`] / [`prob_bound_other`] (unclamped)
/// gives back [`voi_bound_simple`]; an exact crossing probability gives the
/// tightest bound of this form.
pub fn voi_bound_theorem(
    state: &BeliefState,
    arm: usize,
    horizon: u64,
    crossing_prob: f64,
) -> Result<f64> {
    check_query(state, arm, horizon)?;
    if !(0.0..=1.0).contains(&crossing_prob) {
        return domain(format!(
            "crossing probability {crossing_prob} outside [0,1]"
        ));
    }
    let alpha = state.alpha();
    let n = state.count(arm) as f64;
    let reach = if arm == alpha {
        state.mean(state.beta())
    } else {
        1.0 - state.mean(alpha)
    };
    Ok(horizon as f64 * reach / n * crossing_prob)
}

fn sq(x: f64) -> f64 {
    x * x
}

/// Which closed-form bound to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundFamily {
    /// Hoeffding exponential bound.
    Simple,
    /// Error-function bound.
    Erf,
}

/// Per-arm VOI bounds at a fixed horizon.
#[derive(Debug, Clone, PartialEq)]
pub struct VoiEstimate {
    values: Vec<f64>,
    horizon: u64,
}

impl VoiEstimate {
    pub fn compute(state: &BeliefState, horizon: u64, family: BoundFamily) -> Result<Self> {
        if horizon == 0 {
            return domain("horizon N must be at least 1");
        }
        let h = horizon as f64;
        let values = (0..state.num_arms())
            .map(|i| match family {
                BoundFamily::Simple => simple_unchecked(state, i, h),
                BoundFamily::Erf => erf_unchecked(state, i, h),
            })
            .collect();
        Ok(Self { values, horizon })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    /// Arm with the largest bound, smallest index on ties.
    pub fn best_arm(&self) -> usize {
        argmax(self.values.iter().copied())
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }
}
