//! Deterministic simulation of flat Bernoulli selection problems.
//!
//! Each trial draws `K` true means uniformly from `[0,1)`, gives every arm
//! one initial sample, then lets the policy sample until it stops or the
//! budget runs out. All random values are keyed by trial, arm and draw
//! index, so every policy sees the same problem and the same payoff
//! sequence for each arm (paired comparison), and results do not depend on
//! how trials are scheduled across threads.

use rayon::prelude::*;

use crate::belief::{select_final, simple_regret, BeliefState, SelectionProblem};
use crate::error::{config, Result};
use crate::policy::{decide, PolicyDecision, PolicyKind};
use crate::rng::{trial_mean, PayoffStream};
use crate::stats::mean_and_stderr;

/// Budgets used by default: 200 to 2000 in multiplicative steps of 2.
pub const DEFAULT_BUDGETS: [u64; 4] = [200, 400, 800, 1600];

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub arms: usize,
    pub budgets: Vec<u64>,
    pub trials: u64,
    pub policies: Vec<PolicyKind>,
    pub master_seed: u64,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.arms < 2 {
            return config(format!("need at least 2 arms, got {}", self.arms));
        }
        if self.trials == 0 {
            return config("trials must be at least 1");
        }
        if self.budgets.is_empty() {
            return config("at least one budget is required");
        }
        if self.budgets.windows(2).any(|w| w[0] >= w[1]) {
            return config(format!(
                "budgets must be strictly increasing: {:?}",
                self.budgets
            ));
        }
        if self.budgets[0] < self.arms as u64 {
            return config(format!(
                "budget {} is smaller than the number of arms {}",
                self.budgets[0], self.arms
            ));
        }
        if self.policies.is_empty() {
            return config("at least one policy is required");
        }
        for (i, p) in self.policies.iter().enumerate() {
            if self.policies[..i].iter().any(|q| q.name() == p.name()) {
                return config(format!("policy {p} listed twice"));
            }
        }
        Ok(())
    }
}

/// One aggregated line of output.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub policy: String,
    pub budget: u64,
    pub trials: u64,
    pub mean_regret: f64,
    pub stderr_regret: f64,
    pub mean_samples_used: f64,
}

impl ResultRow {
    pub fn aggregate(policy: &str, budget: u64, outcomes: &[TrialOutcome]) -> Self {
        let regrets: Vec<f64> = outcomes.iter().map(|o| o.regret).collect();
        let used: Vec<f64> = outcomes.iter().map(|o| o.used as f64).collect();
        let (mean_regret, stderr_regret) = mean_and_stderr(&regrets);
        let (mean_samples_used, _) = mean_and_stderr(&used);
        Self {
            policy: policy.to_string(),
            budget,
            trials: outcomes.len() as u64,
            mean_regret,
            stderr_regret,
            mean_samples_used,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub chosen: usize,
    pub regret: f64,
    pub used: u64,
}

/// The selection problem of trial `trial`: `arms` means uniform on `[0,1)`.
pub fn trial_problem(master_seed: u64, trial: u64, arms: usize) -> SelectionProblem {
    let means = (0..arms as u64)
        .map(|a| trial_mean(master_seed, trial, a))
        .collect();
    SelectionProblem::new(means).expect("uniform means are valid")
}

/// Runs one selection trial and reports the final choice.
pub fn run_trial(
    policy: &PolicyKind,
    problem: &SelectionProblem,
    budget: u64,
    stream: &PayoffStream,
) -> Result<TrialOutcome> {
    run_trial_inner(policy, problem, budget, stream, None)
}

/// Like [`run_trial`], also returning the sequence of sampled arms
/// (initialization pass included).
pub fn run_trial_traced(
    policy: &PolicyKind,
    problem: &SelectionProblem,
    budget: u64,
    stream: &PayoffStream,
) -> Result<(TrialOutcome, Vec<usize>)> {
    let mut trace = Vec::new();
    let outcome = run_trial_inner(policy, problem, budget, stream, Some(&mut trace))?;
    Ok((outcome, trace))
}

fn run_trial_inner(
    policy: &PolicyKind,
    problem: &SelectionProblem,
    budget: u64,
    stream: &PayoffStream,
    mut trace: Option<&mut Vec<usize>>,
) -> Result<TrialOutcome> {
    let k = problem.num_arms();
    if budget < k as u64 {
        return config(format!(
            "budget {budget} cannot cover one sample of each of {k} arms"
        ));
    }
    let means = problem.means();
    let initial: Vec<f64> = (0..k)
        .map(|arm| stream.payoff(arm, 0, means[arm]))
        .collect();
    if let Some(t) = trace.as_deref_mut() {
        t.extend(0..k);
    }
    let mut state = BeliefState::from_initial_payoffs(&initial)?;
    let mut used = k as u64;
    while used < budget {
        match decide(policy, &state, budget - used, used)? {
            PolicyDecision::Stop => break,
            PolicyDecision::Sample(arm) => {
                let payoff = stream.payoff(arm, state.count(arm), means[arm]);
                state.record(arm, payoff)?;
                used += 1;
                if let Some(t) = trace.as_deref_mut() {
                    t.push(arm);
                }
            }
        }
    }
    let chosen = select_final(&state);
    Ok(TrialOutcome {
        chosen,
        regret: simple_regret(problem, chosen),
        used,
    })
}

/// Runs every (policy, budget) pair over all trials.
///
/// Trials run in parallel on the current rayon pool; results are aggregated
/// in trial order, so the output depends only on `config`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultRow>> {
    let (seed, arms) = (config.master_seed, config.arms);
    run_experiment_with_problems(config, &|trial| trial_problem(seed, trial, arms))
}

/// [`run_experiment`] with caller-supplied problem instances per trial.
pub fn run_experiment_with_problems(
    config: &ExperimentConfig,
    problem_for_trial: &(dyn Fn(u64) -> SelectionProblem + Sync),
) -> Result<Vec<ResultRow>> {
    config.validate()?;
    let mut rows = Vec::with_capacity(config.policies.len() * config.budgets.len());
    for policy in &config.policies {
        for &budget in &config.budgets {
            let outcomes = (0..config.trials)
                .into_par_iter()
                .map(|trial| {
                    let problem = problem_for_trial(trial);
                    if problem.num_arms() != config.arms {
                        return config_err_arms(problem.num_arms(), config.arms);
                    }
                    let stream = PayoffStream::new(config.master_seed, trial);
                    run_trial(policy, &problem, budget, &stream)
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(ResultRow::aggregate(policy.name(), budget, &outcomes));
        }
    }
    rows.sort_by(|a, b| (&a.policy, a.budget).cmp(&(&b.policy, b.budget)));
    Ok(rows)
}

fn config_err_arms<T>(got: usize, want: usize) -> Result<T> {
    config(format!(
        "problem has {got} arms, configuration expects {want}"
    ))
}
