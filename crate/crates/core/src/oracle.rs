//! Exact reference computations used to check the bounds and policies.
//!
//! - [`optimal_value`]: Bayes-optimal value of the Beta-Bernoulli metalevel
//!   MDP (sample an arm at a cost, or stop and take the best posterior mean)
//!   by memoized recursion over pseudo-count vectors.
//! - [`binomial_tail`]: exact tail probabilities of a Bernoulli sample mean.
//! - [`phi_by_minimization`]: golden-section search for the exponent
//!   constant of the Hoeffding VOI bound.
//! - [`exact_blinkered_voi`]: the plug-in VOI of sampling one arm `N` more
//!   times with a known Bernoulli parameter, by enumeration.
//! - [`policy_value`]: Monte Carlo value of a policy under the uniform prior,
//!   for comparison against [`optimal_value`].

use std::collections::HashMap;

use rayon::prelude::*;

use crate::belief::{best_two_of_means, BeliefState, SelectionProblem};
use crate::error::{config, domain, Result};
use crate::flat::run_trial;
use crate::policy::PolicyKind;
use crate::rng::{trial_mean, PayoffStream};
use crate::stats::mean_and_stderr;

/// Largest total budget accepted by [`optimal_value`].
pub const MAX_DP_BUDGET: u32 = 12;
/// Largest number of arms accepted by [`optimal_value`].
pub const MAX_DP_ARMS: usize = 3;
/// Largest budget accepted by [`optimal_value_naive`].
pub const MAX_NAIVE_BUDGET: u32 = 6;
/// Largest sample count accepted by [`binomial_tail`].
pub const MAX_TAIL_N: u64 = 10_000;

/// Beta posteriors of all arms as integer pseudo-counts `(a, b)`.
///
/// Starts from the uniform prior `Beta(1,1)`; each success increments `a`,
/// each failure `b`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BayesBelief {
    arms: Vec<(u32, u32)>,
}

impl BayesBelief {
    pub fn new(arms: Vec<(u32, u32)>) -> Result<Self> {
        if arms.is_empty() {
            return domain("belief needs at least one arm");
        }
        if arms.iter().any(|&(a, b)| a < 1 || b < 1) {
            return domain("pseudo-counts must be at least 1");
        }
        Ok(Self { arms })
    }

    pub fn uniform(arms: usize) -> Self {
        Self {
            arms: vec![(1, 1); arms],
        }
    }

    pub fn pseudo_counts(&self) -> &[(u32, u32)] {
        &self.arms
    }

    pub fn mean(&self, arm: usize) -> f64 {
        let (a, b) = self.arms[arm];
        a as f64 / (a + b) as f64
    }

    fn best_mean(&self) -> f64 {
        (0..self.arms.len())
            .map(|i| self.mean(i))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    fn observe(&self, arm: usize, success: bool) -> Self {
        let mut next = self.clone();
        if success {
            next.arms[arm].0 += 1;
        } else {
            next.arms[arm].1 += 1;
        }
        next
    }
}

/// Optimal metalevel value `V` and the continuation values `Q` of sampling
/// each arm once and continuing optimally.
///
/// `continuation` is empty when no budget remains.
#[derive(Debug, Clone, PartialEq)]
pub struct MetaValue {
    pub value: f64,
    pub continuation: Vec<f64>,
}

fn check_dp(belief: &BayesBelief, budget: u32, cost: f64, max_budget: u32) -> Result<()> {
    if budget > max_budget {
        return config(format!(
            "budget {budget} exceeds exact-DP guard {max_budget}"
        ));
    }
    if belief.arms.len() > MAX_DP_ARMS {
        return config(format!(
            "{} arms exceed exact-DP guard {MAX_DP_ARMS}",
            belief.arms.len()
        ));
    }
    if !(cost >= 0.0 && cost.is_finite()) {
        return domain(format!("cost {cost} must be finite and >= 0"));
    }
    Ok(())
}

/// Exact optimal value with at most `budget` samples at `cost` each.
///
/// `V(s, 0) = max_i mu_i(s)`;
/// `V(s, n) = max(max_i mu_i(s), max_i [-cost + mu_i V(s+win_i, n-1) + (1-mu_i) V(s+loss_i, n-1)])`.
pub fn optimal_value(belief: &BayesBelief, budget: u32, cost: f64) -> Result<MetaValue> {
    check_dp(belief, budget, cost, MAX_DP_BUDGET)?;
    let mut memo = HashMap::new();
    let mut value = |b: &BayesBelief, n: u32| memo_value(b, n, cost, &mut memo);
    Ok(assemble(belief, budget, cost, &mut value))
}

/// Same recursion without memoization; exponential, for cross-checking.
pub fn optimal_value_naive(belief: &BayesBelief, budget: u32, cost: f64) -> Result<MetaValue> {
    check_dp(belief, budget, cost, MAX_NAIVE_BUDGET)?;
    let mut value = |b: &BayesBelief, n: u32| naive_value(b, n, cost);
    Ok(assemble(belief, budget, cost, &mut value))
}

fn assemble(
    belief: &BayesBelief,
    budget: u32,
    cost: f64,
    value: &mut dyn FnMut(&BayesBelief, u32) -> f64,
) -> MetaValue {
    let stop = belief.best_mean();
    if budget == 0 {
        return MetaValue {
            value: stop,
            continuation: Vec::new(),
        };
    }
    let continuation: Vec<f64> = (0..belief.arms.len())
        .map(|i| q_value(belief, i, budget, cost, value))
        .collect();
    let value = continuation.iter().copied().fold(stop, f64::max);
    MetaValue {
        value,
        continuation,
    }
}

fn q_value(
    belief: &BayesBelief,
    arm: usize,
    budget: u32,
    cost: f64,
    value: &mut dyn FnMut(&BayesBelief, u32) -> f64,
) -> f64 {
    let mu = belief.mean(arm);
    let win = value(&belief.observe(arm, true), budget - 1);
    let loss = value(&belief.observe(arm, false), budget - 1);
    -cost + mu * win + (1.0 - mu) * loss
}

fn memo_value(
    belief: &BayesBelief,
    budget: u32,
    cost: f64,
    memo: &mut HashMap<(BayesBelief, u32), f64>,
) -> f64 {
    if budget == 0 {
        return belief.best_mean();
    }
    if let Some(&v) = memo.get(&(belief.clone(), budget)) {
        return v;
    }
    let mut v = belief.best_mean();
    for i in 0..belief.arms.len() {
        let mut rec = |b: &BayesBelief, n: u32| memo_value(b, n, cost, memo);
        v = v.max(q_value(belief, i, budget, cost, &mut rec));
    }
    memo.insert((belief.clone(), budget), v);
    v
}

fn naive_value(belief: &BayesBelief, budget: u32, cost: f64) -> f64 {
    if budget == 0 {
        return belief.best_mean();
    }
    let mut v = belief.best_mean();
    for i in 0..belief.arms.len() {
        let mut rec = |b: &BayesBelief, n: u32| naive_value(b, n, cost);
        v = v.max(q_value(belief, i, budget, cost, &mut rec));
    }
    v
}

fn ln_choose(n: u64, k: u64) -> f64 {
    libm::lgamma(n as f64 + 1.0) - libm::lgamma(k as f64 + 1.0) - libm::lgamma((n - k) as f64 + 1.0)
}

/// Exact `Pr(mean of n iid Bernoulli(p) >= threshold)`.
///
/// The count threshold is `ceil(n·threshold)` with a 1e-9 allowance, so a
/// threshold that is a multiple of `1/n` up to rounding includes that count.
/// Terms are accumulated in log space.
pub fn binomial_tail(n: u64, p: f64, threshold: f64) -> Result<f64> {
    if n == 0 || n > MAX_TAIL_N {
        return domain(format!(
            "binomial_tail needs 1 <= n <= {MAX_TAIL_N}, got {n}"
        ));
    }
    if !(0.0..=1.0).contains(&p) {
        return domain(format!("probability {p} outside [0,1]"));
    }
    let k_min = (n as f64 * threshold - 1e-9).ceil();
    if k_min <= 0.0 {
        return Ok(1.0);
    }
    if k_min > n as f64 {
        return Ok(0.0);
    }
    let k_min = k_min as u64;
    if p == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(1.0);
    }
    let (lp, lq) = (p.ln(), (1.0 - p).ln());
    let logs: Vec<f64> = (k_min..=n)
        .map(|k| ln_choose(n, k) + k as f64 * lp + (n - k) as f64 * lq)
        .collect();
    let peak = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = logs.iter().map(|l| (l - peak).exp()).sum();
    Ok((peak + sum.ln()).exp().min(1.0))
}

/// `2((1 + r)/(1 + √r))²`, minimized over `r` to obtain the exponent constant.
pub fn phi_objective(r: f64) -> f64 {
    let g = (1.0 + r) / (1.0 + r.sqrt());
    2.0 * g * g
}

/// Golden-section minimization of [`phi_objective`] on `(0, 16]`.
///
/// Returns `(minimum, argmin)`.
pub fn phi_by_minimization() -> (f64, f64) {
    let inv_golden = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (0.0f64, 16.0f64);
    let mut x1 = hi - inv_golden * (hi - lo);
    let mut x2 = lo + inv_golden * (hi - lo);
    let (mut f1, mut f2) = (phi_objective(x1), phi_objective(x2));
    for _ in 0..200 {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_golden * (hi - lo);
            f1 = phi_objective(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_golden * (hi - lo);
            f2 = phi_objective(x2);
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let argmin = 0.5 * (lo + hi);
    (phi_objective(argmin), argmin)
}

/// The split point `delta` that equalizes the two Hoeffding exponents when
/// the crossing event of an arm with `n` past and `horizon` future samples
/// is divided between past and future deviations.
pub fn equalizing_delta(gap: f64, n: u64, horizon: u64) -> f64 {
    let ratio = n as f64 / horizon as f64;
    gap * (1.0 + ratio) / (1.0 + ratio.sqrt())
}

/// Exponents `(2·delta²·n, 2·(gap·(1 + n/N) − delta)²·N)` of the past- and
/// future-sample Hoeffding terms.
pub fn split_exponents(gap: f64, n: u64, horizon: u64, delta: f64) -> (f64, f64) {
    let (n, big_n) = (n as f64, horizon as f64);
    let future = gap * (1.0 + n / big_n) - delta;
    (2.0 * delta * delta * n, 2.0 * future * future * big_n)
}

/// Theorem-style VOI skeleton with the tighter `N/(N + n)` factor.
pub fn pre_relaxation_factor(state: &BeliefState, arm: usize, horizon: u64) -> f64 {
    let reach = if arm == state.alpha() {
        state.mean(state.beta())
    } else {
        1.0 - state.mean(state.alpha())
    };
    horizon as f64 * reach / (horizon + state.count(arm)) as f64
}

/// Exact plug-in VOI of sampling `arm` `horizon` more times when its future
/// payoffs are Bernoulli(`p`), together with the crossing probability.
///
/// For a non-leading arm the gain is `E[(mean_i' − mean_alpha)+]`, where
/// `mean_i'` is its mean after the extra samples; for the leader it is
/// `E[(mean_beta − mean_alpha')+]`. Crossing means `mean_i' >= mean_alpha`
/// (resp. `mean_alpha' <= mean_beta`).
pub fn exact_blinkered_voi(
    state: &BeliefState,
    arm: usize,
    horizon: u64,
    p: f64,
) -> Result<(f64, f64)> {
    state.check_arm(arm)?;
    if horizon == 0 || horizon > MAX_TAIL_N {
        return domain(format!("horizon must be in 1..={MAX_TAIL_N}"));
    }
    if !(0.0..=1.0).contains(&p) {
        return domain(format!("probability {p} outside [0,1]"));
    }
    let alpha = state.alpha();
    let n = state.count(arm);
    let sum = state.arms()[arm].sum();
    let total = (n + horizon) as f64;
    let mut voi = 0.0;
    let mut cross = 0.0;
    for y in 0..=horizon {
        let prob = binomial_pmf(horizon, y, p);
        let new_mean = (sum + y as f64) / total;
        let (gain, crossed) = if arm == alpha {
            let beta_mean = state.mean(state.beta());
            (beta_mean - new_mean, new_mean <= beta_mean)
        } else {
            let alpha_mean = state.mean(alpha);
            (new_mean - alpha_mean, new_mean >= alpha_mean)
        };
        if crossed {
            cross += prob;
        }
        voi += prob * gain.max(0.0);
    }
    Ok((voi, cross.min(1.0)))
}

fn binomial_pmf(n: u64, k: u64, p: f64) -> f64 {
    match p {
        0.0 => (k == 0) as u8 as f64,
        1.0 => (k == n) as u8 as f64,
        _ => (ln_choose(n, k) + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln()).exp(),
    }
}

/// One grid point of the Hoeffding check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HoeffdingCase {
    pub n: u64,
    pub p: f64,
    pub delta: f64,
    pub tail: f64,
    pub bound: f64,
}

/// Checks `Pr(mean - p >= delta) <= exp(-2 delta² n)` exactly for
/// `n in 1..=max_n`, `p in {0, 0.05, .., 1}` and `delta in {0.05, .., 0.5}`.
///
/// Returns `(cases checked, violations)`.
pub fn hoeffding_grid(max_n: u64) -> (usize, Vec<HoeffdingCase>) {
    let mut checked = 0;
    let mut violations = Vec::new();
    for n in 1..=max_n {
        for p20 in 0..=20u32 {
            for d20 in 1..=10u32 {
                let (p, delta) = (p20 as f64 / 20.0, d20 as f64 / 20.0);
                let threshold = (p20 + d20) as f64 / 20.0;
                let tail = binomial_tail(n, p, threshold).expect("grid within range");
                let bound = (-2.0 * delta * delta * n as f64).exp();
                checked += 1;
                if tail > bound {
                    violations.push(HoeffdingCase {
                        n,
                        p,
                        delta,
                        tail,
                        bound,
                    });
                }
            }
        }
    }
    (checked, violations)
}

/// Runs one Bayesian episode: means drawn from the uniform prior, then the
/// policy samples with the given budget. Returns the chosen arm's true mean
/// minus the total sampling cost.
///
/// When the budget cannot cover one sample of every arm, the first `budget`
/// arms are sampled once and the best of them (by sample mean) is chosen.
pub fn episode_value(
    policy: &PolicyKind,
    arms: usize,
    budget: u64,
    cost: f64,
    seed: u64,
    episode: u64,
) -> Result<f64> {
    let means: Vec<f64> = (0..arms as u64)
        .map(|a| trial_mean(seed, episode, a))
        .collect();
    let stream = PayoffStream::new(seed, episode);
    if budget < arms as u64 {
        if budget == 0 {
            let first = means[0];
            return Ok(first);
        }
        let sampled: Vec<f64> = (0..budget as usize)
            .map(|a| stream.payoff(a, 0, means[a]))
            .collect();
        let chosen = if sampled.len() == 1 {
            0
        } else {
            best_two_of_means(&sampled).0
        };
        return Ok(means[chosen] - cost * budget as f64);
    }
    let problem = SelectionProblem::new(means)?;
    let outcome = run_trial(&policy.with_cost(cost)?, &problem, budget, &stream)?;
    Ok(problem.means()[outcome.chosen] - cost * outcome.used as f64)
}

/// Monte Carlo estimate `(mean, stderr)` of a policy's value over
/// `episodes` draws from the uniform prior.
pub fn policy_value(
    policy: &PolicyKind,
    arms: usize,
    budget: u64,
    cost: f64,
    episodes: u64,
    seed: u64,
) -> Result<(f64, f64)> {
    let values = (0..episodes)
        .into_par_iter()
        .map(|e| episode_value(policy, arms, budget, cost, seed, e))
        .collect::<Result<Vec<_>>>()?;
    Ok(mean_and_stderr(&values))
}

/// DP-versus-simulation comparison for one (arms, budget, cost, policy).
#[derive(Debug, Clone, PartialEq)]
pub struct DominanceCase {
    pub arms: usize,
    pub budget: u32,
    pub cost: f64,
    pub policy: &'static str,
    pub optimal: f64,
    pub simulated: f64,
    pub stderr: f64,
}

impl DominanceCase {
    /// The simulated value may exceed the optimum by at most 3 standard errors.
    pub fn holds(&self) -> bool {
        self.simulated <= self.optimal + 3.0 * self.stderr
    }
}

/// Compares the exact optimal value with every policy's simulated value on
/// 2- and 3-arm uniform-prior problems, budgets {2, 4, 6}, costs {0, 0.01}.
pub fn dominance_cases(episodes: u64, seed: u64) -> Result<Vec<DominanceCase>> {
    let policies = [
        PolicyKind::Voi { cost: None },
        PolicyKind::VoiPlus { cost: None },
        PolicyKind::Ucb1,
        PolicyKind::RoundRobin,
    ];
    let mut cases = Vec::new();
    for arms in [2usize, 3] {
        for budget in [2u32, 4, 6] {
            for cost in [0.0, 0.01] {
                let optimal = optimal_value(&BayesBelief::uniform(arms), budget, cost)?.value;
                for policy in &policies {
                    let (simulated, stderr) =
                        policy_value(policy, arms, budget as u64, cost, episodes, seed)?;
                    cases.push(DominanceCase {
                        arms,
                        budget,
                        cost,
                        policy: policy.name(),
                        optimal,
                        simulated,
                        stderr,
                    });
                }
            }
        }
    }
    Ok(cases)
}

/// Outcome of one named oracle check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Runs the oracle suite: exponent constant, Hoeffding grid, DP sanity,
/// memo/naive agreement and DP dominance over simulated policies.
pub fn run_checks(episodes: u64, seed: u64) -> Result<Vec<CheckResult>> {
    let mut out = Vec::new();

    let (min, argmin) = phi_by_minimization();
    let closed = crate::bounds::phi();
    let r_star = 3.0 - 2.0 * std::f64::consts::SQRT_2;
    out.push(CheckResult {
        name: "phi",
        passed: (min - closed).abs() <= 1e-9 && (argmin - r_star).abs() <= 1e-6,
        detail: format!(
            "closed form {closed:.15}, minimum {min:.15} at r = {argmin:.12} (expected {r_star:.12})"
        ),
    });

    let (checked, violations) = hoeffding_grid(50);
    out.push(CheckResult {
        name: "hoeffding",
        passed: violations.is_empty(),
        detail: format!("{checked} grid points, {} violations", violations.len()),
    });

    let v = optimal_value(&BayesBelief::uniform(2), 1, 0.0)?.value;
    out.push(CheckResult {
        name: "dp",
        passed: (v - 7.0 / 12.0).abs() < 1e-12,
        detail: format!("two uniform arms, one sample: {v:.12} (expected 7/12)"),
    });

    let mut agree = true;
    for arms in 1..=3 {
        for budget in 0..=4 {
            for cost in [0.0, 0.01] {
                let b = BayesBelief::uniform(arms);
                agree &= optimal_value(&b, budget, cost)? == optimal_value_naive(&b, budget, cost)?;
            }
        }
    }
    out.push(CheckResult {
        name: "memo",
        passed: agree,
        detail: "memoized and naive recursions, budgets 0..=4".to_string(),
    });

    let cases = dominance_cases(episodes, seed)?;
    let failed: Vec<_> = cases.iter().filter(|c| !c.holds()).collect();
    let worst = cases
        .iter()
        .map(|c| (c.simulated - c.optimal) / c.stderr.max(f64::MIN_POSITIVE))
        .fold(f64::NEG_INFINITY, f64::max);
    out.push(CheckResult {
        name: "dominance",
        passed: failed.is_empty(),
        detail: format!(
            "{} cases, {episodes} episodes each, {} above optimum by > 3 stderr (max excess {worst:.2} stderr)",
            cases.len(),
            failed.len()
        ),
    });
    Ok(out)
}

/// Plain-text report of [`run_checks`], one line per check.
pub fn format_report(checks: &[CheckResult]) -> String {
    let mut s = String::new();
    for c in checks {
        let status = if c.passed { "OK" } else { "FAILED" };
        s.push_str(&format!("{} {status}: {}\n", c.name, c.detail));
    }
    let all = checks.iter().all(|c| c.passed);
    s.push_str(if all {
        "all checks passed\n"
    } else {
        "some checks FAILED\n"
    });
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{phi, voi_bound_theorem};
    use proptest::prelude::*;

    #[test]
    fn dp_small_values() {
        let b = BayesBelief::uniform(2);
        assert_eq!(optimal_value(&b, 0, 0.0).unwrap().value, 0.5);
        let v = optimal_value(&b, 1, 0.0).unwrap();
        assert!((v.value - 7.0 / 12.0).abs() < 1e-15);
        assert_eq!(v.continuation.len(), 2);
        assert!((v.continuation[0] - 7.0 / 12.0).abs() < 1e-15);
    }

    #[test]
    fn dp_cost_above_payoff_range_never_samples() {
        let b = BayesBelief::new(vec![(3, 1), (1, 2), (2, 2)]).unwrap();
        for budget in [1, 4, 8] {
            let v = optimal_value(&b, budget, 1.0).unwrap();
            assert_eq!(v.value, 0.75);
        }
    }

    #[test]
    fn dp_guards() {
        let b = BayesBelief::uniform(2);
        assert!(matches!(
            optimal_value(&b, 13, 0.0),
            Err(crate::Error::Config(_))
        ));
        assert!(matches!(
            optimal_value(&BayesBelief::uniform(4), 2, 0.0),
            Err(crate::Error::Config(_))
        ));
        assert!(optimal_value(&b, 2, -0.1).is_err());
        assert!(BayesBelief::new(vec![(0, 1)]).is_err());
    }

    #[test]
    fn dp_value_is_max_of_stop_and_continuations() {
        let b = BayesBelief::new(vec![(2, 1), (1, 1), (1, 3)]).unwrap();
        let v = optimal_value(&b, 5, 0.01).unwrap();
        let best = v.continuation.iter().copied().fold(2.0 / 3.0, f64::max);
        assert_eq!(v.value, best);
    }

    #[test]
    fn memo_and_naive_agree_exactly() {
        for k in 1..=3 {
            for budget in 0..=4 {
                for cost in [0.0, 0.01, 0.2] {
                    let b = BayesBelief::uniform(k);
                    assert_eq!(
                        optimal_value(&b, budget, cost).unwrap(),
                        optimal_value_naive(&b, budget, cost).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn dp_monotone_in_budget_and_cost() {
        for k in 2..=3 {
            let b = BayesBelief::uniform(k);
            let mut prev = 0.0;
            for budget in 0..=8 {
                let v = optimal_value(&b, budget, 0.005).unwrap().value;
                assert!(v >= prev);
                prev = v;
            }
            let mut prev = f64::INFINITY;
            for cost in [0.0, 0.001, 0.01, 0.05, 0.2, 1.0] {
                let v = optimal_value(&b, 6, cost).unwrap().value;
                assert!(v <= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn tail_examples() {
        assert!((binomial_tail(10, 0.5, 0.7).unwrap() - 0.171875).abs() < 1e-12);
        assert_eq!(binomial_tail(10, 0.3, 0.0).unwrap(), 1.0);
        assert_eq!(binomial_tail(7, 0.0, 0.1).unwrap(), 0.0);
        assert_eq!(binomial_tail(7, 1.0, 1.0).unwrap(), 1.0);
        assert_eq!(binomial_tail(7, 0.9, 1.01).unwrap(), 0.0);
        assert!(binomial_tail(0, 0.5, 0.5).is_err());
        assert!(binomial_tail(10_001, 0.5, 0.5).is_err());
    }

    #[test]
    fn tail_large_n_no_underflow() {
        // Pr(Bin(10000, 0.5) >= 5000) = 1/2 + pmf(5000)/2.
        let pmf = (ln_choose(10_000, 5_000) + 10_000.0 * 0.5f64.ln()).exp();
        let t = binomial_tail(10_000, 0.5, 0.5).unwrap();
        assert!((t - (0.5 + pmf / 2.0)).abs() < 1e-10, "{t}");
        let far = binomial_tail(10_000, 0.1, 0.5).unwrap();
        assert!((0.0..1e-300).contains(&far));
    }

    #[test]
    fn tail_matches_direct_sum_small_n() {
        for n in 1..=20u64 {
            for p in [0.1f64, 0.35, 0.5, 0.8] {
                for k in 0..=n {
                    let direct: f64 = (k..=n)
                        .map(|j| {
                            let c =
                                (0..j).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64);
                            c * p.powi(j as i32) * (1.0 - p).powi((n - j) as i32)
                        })
                        .sum();
                    let t = binomial_tail(n, p, k as f64 / n as f64).unwrap();
                    assert!((t - direct).abs() < 1e-12, "n={n} p={p} k={k}");
                }
            }
        }
    }

    #[test]
    fn phi_minimization() {
        let (min, argmin) = phi_by_minimization();
        assert!((min - phi()).abs() < 1e-9, "{min}");
        assert!(
            (argmin - (3.0 - 2.0 * std::f64::consts::SQRT_2)).abs() < 1e-6,
            "{argmin}"
        );
        assert_eq!(phi_objective(1.0), 2.0);
        assert!(phi_objective(1.0) > min);
    }

    #[test]
    fn report_lines() {
        let checks = vec![
            CheckResult {
                name: "phi",
                passed: true,
                detail: "x".into(),
            },
            CheckResult {
                name: "dp",
                passed: false,
                detail: "y".into(),
            },
        ];
        assert_eq!(
            format_report(&checks),
            "phi OK: x\ndp FAILED: y\nsome checks FAILED\n"
        );
    }

    #[test]
    fn hoeffding_grid_small() {
        let (checked, violations) = hoeffding_grid(10);
        assert_eq!(checked, 10 * 21 * 10);
        assert!(violations.is_empty(), "{violations:?}");
    }

    proptest! {
        #[test]
        fn delta_equalizes_exponents(gap in 0.001f64..1.0, n in 1u64..1000, horizon in 1u64..1000) {
            let d = equalizing_delta(gap, n, horizon);
            let (past, future) = split_exponents(gap, n, horizon, d);
            prop_assert!((past - future).abs() <= 1e-9 * past.max(1.0), "{past} {future}");
            // Past exponent is at least PHI·gap²·n, which yields the bound's constant.
            prop_assert!(past >= phi() * gap * gap * n as f64 * (1.0 - 1e-12));
            prop_assert!(d >= 2.0 * (std::f64::consts::SQRT_2 - 1.0) * gap * (1.0 - 1e-12));
        }

        #[test]
        fn exact_voi_below_theorem_skeleton(
            counts in prop::collection::vec((1u64..40, 0.0f64..=1.0), 2..5),
            arm in 0usize..5,
            horizon in 1u64..60,
            p in 0.0f64..=1.0,
        ) {
            let stats = counts
                .iter()
                .map(|&(n, f)| crate::ArmStats::new(n, (f * n as f64).round()).unwrap())
                .collect();
            let s = BeliefState::new(stats).unwrap();
            let arm = arm % s.num_arms();
            let (voi, cross) = exact_blinkered_voi(&s, arm, horizon, p).unwrap();
            let tight = pre_relaxation_factor(&s, arm, horizon) * cross;
            let loose = voi_bound_theorem(&s, arm, horizon, cross).unwrap();
            prop_assert!(voi <= tight + 1e-12, "voi {voi} > tight {tight}");
            prop_assert!(tight <= loose + 1e-12);
        }
    }
}
