//! Belief-state bookkeeping shared by every sampling policy.
//!
//! Arms are indexed `0..K`. Whenever several arms share the greatest sample
//! mean, the smallest index wins; this rule is used for `alpha`, `beta`, the
//! final selection and every policy argmax, so runs are fully determined by
//! their random streams.

use crate::error::{config, domain, Result};

/// Number of samples and running payoff sum for one arm.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ArmStats {
    count: u64,
    sum: f64,
}

impl ArmStats {
    pub fn new(count: u64, sum: f64) -> Result<Self> {
        if !(sum >= 0.0 && sum <= count as f64) {
            return domain(format!("arm sum {sum} outside [0, {count}]"));
        }
        Ok(Self { count, sum })
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn sum(&self) -> f64 {
        self.sum
    }

    /// Sample mean, or `None` before the first sample.
    pub fn mean(&self) -> Option<f64> {
        (self.count > 0).then(|| self.sum / self.count as f64)
    }

    /// Returns the statistics after observing one more payoff.
    pub fn observe(self, payoff: f64) -> Result<Self> {
        check_payoff(payoff)?;
        Ok(Self {
            count: self.count + 1,
            sum: self.sum + payoff,
        })
    }
}

fn check_payoff(payoff: f64) -> Result<()> {
    if (0.0..=1.0).contains(&payoff) {
        Ok(())
    } else {
        domain(format!("payoff {payoff} outside [0,1]"))
    }
}

/// Indices of the arms with the greatest and second-greatest sample mean.
///
/// Ties go to the smallest index. Every arm must have at least one sample.
pub fn best_two(stats: &[ArmStats]) -> Result<(usize, usize)> {
    if stats.len() < 2 {
        return domain(format!(
            "best_two needs at least 2 arms, got {}",
            stats.len()
        ));
    }
    let mut means = Vec::with_capacity(stats.len());
    for (i, s) in stats.iter().enumerate() {
        match s.mean() {
            Some(m) => means.push(m),
            None => return domain(format!("arm {i} has no samples")),
        }
    }
    Ok(best_two_of_means(&means))
}

pub(crate) fn best_two_of_means(means: &[f64]) -> (usize, usize) {
    best_two_by(means.len(), |i| means[i])
}

/// Single pass over `k >= 2` values; strict comparisons keep the first of
/// equal values in front.
fn best_two_by(k: usize, mean: impl Fn(usize) -> f64) -> (usize, usize) {
    let (m0, m1) = (mean(0), mean(1));
    let (mut alpha, mut beta, mut ma, mut mb) = if m1 > m0 {
        (1, 0, m1, m0)
    } else {
        (0, 1, m0, m1)
    };
    for i in 2..k {
        let m = mean(i);
        if m > ma {
            (beta, mb) = (alpha, ma);
            (alpha, ma) = (i, m);
        } else if m > mb {
            (beta, mb) = (i, m);
        }
    }
    (alpha, beta)
}

/// Index of the first maximum; NaN values never win.
pub(crate) fn argmax(values: impl IntoIterator<Item = f64>) -> usize {
    let mut best = 0;
    let mut best_value = f64::NEG_INFINITY;
    for (i, v) in values.into_iter().enumerate() {
        if v > best_value {
            best = i;
            best_value = v;
        }
    }
    best
}

/// Sample statistics of all arms, with the two leading arms identified.
///
/// A belief state is only formed once every arm has been sampled at least
/// once, so all means are defined.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefState {
    arms: Vec<ArmStats>,
    alpha: usize,
    beta: usize,
}

impl BeliefState {
    pub fn new(arms: Vec<ArmStats>) -> Result<Self> {
        let (alpha, beta) = best_two(&arms)?;
        Ok(Self { arms, alpha, beta })
    }

    /// State after one initial sample of each arm with the given payoffs.
    pub fn from_initial_payoffs(payoffs: &[f64]) -> Result<Self> {
        let arms = payoffs
            .iter()
            .map(|&p| ArmStats::default().observe(p))
            .collect::<Result<Vec<_>>>()?;
        Self::new(arms)
    }

    /// Builds a state from `(count, mean)` pairs. Convenient for tests.
    pub fn from_counts_and_means(pairs: &[(u64, f64)]) -> Result<Self> {
        let arms = pairs
            .iter()
            .map(|&(n, m)| ArmStats::new(n, m * n as f64))
            .collect::<Result<Vec<_>>>()?;
        Self::new(arms)
    }

    pub fn arms(&self) -> &[ArmStats] {
        &self.arms
    }

    pub fn num_arms(&self) -> usize {
        self.arms.len()
    }

    pub fn alpha(&self) -> usize {
        self.alpha
    }

    pub fn beta(&self) -> usize {
        self.beta
    }

    pub fn count(&self, arm: usize) -> u64 {
        self.arms[arm].count
    }

    pub fn mean(&self, arm: usize) -> f64 {
        let s = &self.arms[arm];
        s.sum / s.count as f64
    }

    pub fn total_samples(&self) -> u64 {
        self.arms.iter().map(|a| a.count).sum()
    }

    pub(crate) fn check_arm(&self, arm: usize) -> Result<()> {
        if arm < self.arms.len() {
            Ok(())
        } else {
            domain(format!(
                "arm index {arm} out of range for {} arms",
                self.arms.len()
            ))
        }
    }

    /// Returns the state after observing `payoff` from `arm`.
    pub fn update(&self, arm: usize, payoff: f64) -> Result<Self> {
        let mut next = self.clone();
        next.record(arm, payoff)?;
        Ok(next)
    }

    /// In-place form of [`update`](Self::update), used by the run loops.
    pub fn record(&mut self, arm: usize, payoff: f64) -> Result<()> {
        self.check_arm(arm)?;
        self.arms[arm] = self.arms[arm].observe(payoff)?;
        (self.alpha, self.beta) = best_two_by(self.arms.len(), |i| self.mean(i));
        Ok(())
    }
}

/// The arm finally chosen: the one with the greatest sample mean.
pub fn select_final(state: &BeliefState) -> usize {
    state.alpha()
}

/// True Bernoulli parameters of a selection problem instance.
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionProblem {
    means: Vec<f64>,
}

impl SelectionProblem {
    pub fn new(means: Vec<f64>) -> Result<Self> {
        if means.len() < 2 {
            return config(format!("need at least 2 arms, got {}", means.len()));
        }
        if let Some(m) = means.iter().find(|m| !(0.0..=1.0).contains(*m)) {
            return domain(format!("arm mean {m} outside [0,1]"));
        }
        Ok(Self { means })
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn num_arms(&self) -> usize {
        self.means.len()
    }

    pub fn best_value(&self) -> f64 {
        self.means.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Regret of choosing `chosen`: best true mean minus the chosen arm's mean.
pub fn simple_regret(problem: &SelectionProblem, chosen: usize) -> f64 {
    problem.best_value() - problem.means[chosen]
}
