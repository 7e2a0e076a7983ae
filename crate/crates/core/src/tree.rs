//! Hybrid Monte Carlo tree search.
//!
//! At the root, each child is treated as an arm of a selection problem and
//! sampled according to a flat [`PolicyKind`] (typically the VOI policy,
//! which also decides when to stop). Below the root, moves are chosen by UCT.
//! With [`PolicyKind::Ucb1`] at the root this is plain UCT everywhere.
//!
//! Across the moves of an episode the tree is rebuilt from scratch and any
//! budget left unused by an early stop is carried over to the next move.
//!
//! The evaluation domain is a synthetic bandit tree: a complete tree of
//! given depth and branching whose leaves pay Bernoulli rewards with means
//! drawn uniformly per trial. A node's true value is the best leaf mean
//! below it.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::belief::{argmax, best_two_of_means, ArmStats, BeliefState};
use crate::error::{config, domain, Result};
use crate::flat::{ResultRow, TrialOutcome};
use crate::policy::{decide, PolicyDecision, PolicyKind};
use crate::rng::{trial_mean, PayoffStream};

/// Largest depth accepted for a [`BanditTreeSpec`].
pub const MAX_DEPTH: u32 = 4;
/// Largest branching factor accepted for a [`BanditTreeSpec`].
pub const MAX_BRANCHING: u32 = 8;

/// Random source for one search.
///
/// Terminal payoffs are keyed by an outcome id (e.g. a leaf) and the number
/// of earlier draws from that id; random rollout moves are keyed by rollout
/// index and step. Two searches over the same game with the same stream see
/// the same payoff sequence for every leaf, whatever order they visit them.
#[derive(Debug, Clone)]
pub struct SearchRng {
    stream: PayoffStream,
    draws: HashMap<u64, u64>,
    rollout: u64,
    step: u64,
}

impl SearchRng {
    pub fn new(stream: PayoffStream) -> Self {
        Self {
            stream,
            draws: HashMap::new(),
            rollout: 0,
            step: 0,
        }
    }

    /// Next Bernoulli(`p`) payoff of outcome `id`.
    pub fn keyed_bernoulli(&mut self, id: u64, p: f64) -> f64 {
        let draw = self.draws.entry(id).or_insert(0);
        let payoff = self.stream.payoff(id as usize, *draw, p);
        *draw += 1;
        payoff
    }

    /// Uniformly random move index in `0..moves`.
    pub fn random_move(&mut self, moves: usize) -> usize {
        let u = self.stream.rollout_uniform(self.rollout, self.step);
        self.step += 1;
        ((u * moves as f64) as usize).min(moves - 1)
    }

    fn next_rollout(&mut self) {
        self.rollout += 1;
        self.step = 0;
    }
}

/// A finite single-agent game with stochastic terminal payoffs in `[0,1]`.
///
/// Moves are indexed `0..num_moves(state)`; a state without moves is
/// terminal.
pub trait GameModel {
    type State: Clone;

    fn root(&self) -> Self::State;
    fn num_moves(&self, state: &Self::State) -> usize;
    fn play(&self, state: &Self::State, mv: usize) -> Self::State;
    fn terminal_payoff(&self, state: &Self::State, rng: &mut SearchRng) -> f64;

    fn is_terminal(&self, state: &Self::State) -> bool {
        self.num_moves(state) == 0
    }

    /// Plays uniformly random moves to a terminal state and returns its payoff.
    fn rollout(&self, state: &Self::State, rng: &mut SearchRng) -> f64 {
        let mut s = state.clone();
        loop {
            let moves = self.num_moves(&s);
            if moves == 0 {
                return self.terminal_payoff(&s, rng);
            }
            s = self.play(&s, rng.random_move(moves));
        }
    }
}

/// Shape of a synthetic bandit tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BanditTreeSpec {
    pub depth: u32,
    pub branching: u32,
}

impl BanditTreeSpec {
    pub fn validate(&self) -> Result<()> {
        if !(1..=MAX_DEPTH).contains(&self.depth) {
            return config(format!("depth {} outside 1..={MAX_DEPTH}", self.depth));
        }
        if !(1..=MAX_BRANCHING).contains(&self.branching) {
            return config(format!(
                "branching {} outside 1..={MAX_BRANCHING}",
                self.branching
            ));
        }
        Ok(())
    }

    pub fn leaves(&self) -> u64 {
        (self.branching as u64).pow(self.depth)
    }
}

/// Position in a bandit tree: the level and the base-`branching` index of
/// the path taken so far. At the leaf level the index is the leaf id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TreePos {
    pub level: u32,
    pub index: u64,
}

/// A complete bandit tree instance for one trial.
#[derive(Debug, Clone)]
pub struct BanditTree {
    spec: BanditTreeSpec,
    leaf_means: Vec<f64>,
}

impl BanditTree {
    /// Leaf means are drawn with the same keys as the arm means of a flat
    /// trial, so a depth-1 tree is the flat problem of the same trial.
    pub fn new(spec: BanditTreeSpec, seed: u64, trial: u64) -> Result<Self> {
        spec.validate()?;
        let leaf_means = (0..spec.leaves())
            .map(|leaf| trial_mean(seed, trial, leaf))
            .collect();
        Ok(Self { spec, leaf_means })
    }

    pub fn from_leaf_means(spec: BanditTreeSpec, leaf_means: Vec<f64>) -> Result<Self> {
        spec.validate()?;
        if leaf_means.len() as u64 != spec.leaves() {
            return config(format!(
                "expected {} leaf means, got {}",
                spec.leaves(),
                leaf_means.len()
            ));
        }
        if leaf_means.iter().any(|m| !(0.0..=1.0).contains(m)) {
            return domain("leaf means must lie in [0,1]");
        }
        Ok(Self { spec, leaf_means })
    }

    pub fn spec(&self) -> BanditTreeSpec {
        self.spec
    }

    pub fn leaf_means(&self) -> &[f64] {
        &self.leaf_means
    }

    /// Best leaf mean reachable from `pos`.
    pub fn true_value(&self, pos: &TreePos) -> f64 {
        let span = (self.spec.branching as u64).pow(self.spec.depth - pos.level);
        let start = (pos.index * span) as usize;
        self.leaf_means[start..start + span as usize]
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

impl GameModel for BanditTree {
    type State = TreePos;

    fn root(&self) -> TreePos {
        TreePos { level: 0, index: 0 }
    }

    fn num_moves(&self, state: &TreePos) -> usize {
        if state.level >= self.spec.depth {
            0
        } else {
            self.spec.branching as usize
        }
    }

    fn play(&self, state: &TreePos, mv: usize) -> TreePos {
        TreePos {
            level: state.level + 1,
            index: state.index * self.spec.branching as u64 + mv as u64,
        }
    }

    fn terminal_payoff(&self, state: &TreePos, rng: &mut SearchRng) -> f64 {
        rng.keyed_bernoulli(state.index, self.leaf_means[state.index as usize])
    }
}

/// Statistics of one search-tree node.
#[derive(Debug, Clone)]
pub struct UctNode {
    pub visits: u64,
    pub payoff_sum: f64,
    /// Arena index of the child reached by each move, once expanded.
    pub children: Vec<Option<usize>>,
    /// Rollouts whose tree descent ended at this node, and their payoff sum.
    pub ended: u64,
    pub ended_sum: f64,
}

impl UctNode {
    fn new(moves: usize) -> Self {
        Self {
            visits: 0,
            payoff_sum: 0.0,
            children: vec![None; moves],
            ended: 0,
            ended_sum: 0.0,
        }
    }

    pub fn mean(&self) -> Option<f64> {
        (self.visits > 0).then(|| self.payoff_sum / self.visits as f64)
    }
}

/// UCT child choice.
///
/// `children` holds `(visits, mean)` per move. An unvisited child is chosen
/// first (lowest index); otherwise the argmax of
/// `mean + exploration * sqrt(ln(parent_visits) / visits)`, lowest index on
/// ties.
pub fn uct_select(parent_visits: u64, children: &[(u64, f64)], exploration: f64) -> Result<usize> {
    if children.is_empty() {
        return domain("uct_select on a node without children");
    }
    if let Some(i) = children.iter().position(|&(n, _)| n == 0) {
        return Ok(i);
    }
    let ln_parent = (parent_visits as f64).ln();
    Ok(argmax(children.iter().map(|&(n, mean)| {
        mean + exploration * (ln_parent / n as f64).sqrt()
    })))
}

/// Per-move search budget: the nominal allowance plus carried-over samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchBudget {
    pub nominal: u64,
    pub carryover: u64,
}

impl SearchBudget {
    pub fn new(nominal: u64) -> Self {
        Self {
            nominal,
            carryover: 0,
        }
    }

    pub fn available(&self) -> u64 {
        self.nominal + self.carryover
    }
}

/// Root policy, sample cost and UCT constant of a search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchConfig {
    pub root_policy: PolicyKind,
    pub cost: f64,
    pub exploration: f64,
}

impl SearchConfig {
    /// VOI at the root, UCT below.
    pub fn hybrid(cost: f64) -> Self {
        Self {
            root_policy: PolicyKind::Voi { cost: None },
            cost,
            exploration: std::f64::consts::SQRT_2,
        }
    }

    /// UCT at every node.
    pub fn uct() -> Self {
        Self {
            root_policy: PolicyKind::Ucb1,
            cost: 0.0,
            exploration: std::f64::consts::SQRT_2,
        }
    }
}

/// Arena of search nodes; node 0 is the root.
#[derive(Debug, Clone)]
pub struct SearchTree {
    nodes: Vec<UctNode>,
    log: Option<Vec<(Vec<usize>, f64)>>,
}

impl SearchTree {
    pub fn nodes(&self) -> &[UctNode] {
        &self.nodes
    }

    pub fn root(&self) -> &UctNode {
        &self.nodes[0]
    }

    /// Paths (node indices from the root) and payoffs of every rollout,
    /// when recording was requested.
    pub fn rollout_log(&self) -> Option<&[(Vec<usize>, f64)]> {
        self.log.as_deref()
    }

    fn child_stats(&self, node: usize) -> Vec<(u64, f64)> {
        self.nodes[node]
            .children
            .iter()
            .map(|c| match c {
                Some(id) => {
                    let n = &self.nodes[*id];
                    (n.visits, n.mean().unwrap_or(0.0))
                }
                None => (0, 0.0),
            })
            .collect()
    }

    fn root_arms(&self) -> Vec<ArmStats> {
        self.nodes[0]
            .children
            .iter()
            .map(|c| {
                let n = &self.nodes[c.expect("root children expanded")];
                ArmStats::new(n.visits, n.payoff_sum).expect("payoff sums within counts")
            })
            .collect()
    }
}

/// Result of one search.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub mv: usize,
    pub used: u64,
    /// Root move sampled by each rollout, in order.
    pub root_trace: Vec<usize>,
}

/// Searches from the game's root. See [`search_from`].
pub fn hybrid_search<G: GameModel>(
    game: &G,
    budget: SearchBudget,
    cfg: &SearchConfig,
    rng: &mut SearchRng,
) -> Result<SearchOutcome> {
    search_from(game, &game.root(), budget, cfg, rng)
}

/// Searches from `start` and returns the root move with the greatest
/// sample mean.
///
/// Every root move is sampled once (in index order) before the root policy
/// takes over; the search ends when the available budget is spent or the
/// root policy stops. A position with a single legal move returns it
/// without searching.
pub fn search_from<G: GameModel>(
    game: &G,
    start: &G::State,
    budget: SearchBudget,
    cfg: &SearchConfig,
    rng: &mut SearchRng,
) -> Result<SearchOutcome> {
    search_tree(game, start, budget, cfg, rng, false).map(|(o, _)| o)
}

/// [`search_from`] that also returns the final tree, optionally recording
/// every rollout's path.
pub fn search_tree<G: GameModel>(
    game: &G,
    start: &G::State,
    budget: SearchBudget,
    cfg: &SearchConfig,
    rng: &mut SearchRng,
    record: bool,
) -> Result<(SearchOutcome, SearchTree)> {
    let moves = game.num_moves(start);
    if moves == 0 {
        return domain("search from a terminal state");
    }
    let mut tree = SearchTree {
        nodes: vec![UctNode::new(moves)],
        log: record.then(Vec::new),
    };
    if moves == 1 {
        return Ok((
            SearchOutcome {
                mv: 0,
                used: 0,
                root_trace: Vec::new(),
            },
            tree,
        ));
    }
    let available = budget.available();
    if available < moves as u64 {
        return config(format!(
            "budget {available} cannot cover one rollout per root move ({moves})"
        ));
    }
    let root_policy = cfg.root_policy.with_cost(cfg.cost)?;
    let mut states: Vec<G::State> = vec![start.clone()];
    let mut trace = Vec::new();
    let mut used = 0u64;

    while used < available {
        let root_move = if used < moves as u64 {
            used as usize
        } else {
            match root_policy {
                PolicyKind::Ucb1 => {
                    uct_select(tree.nodes[0].visits, &tree.child_stats(0), cfg.exploration)?
                }
                _ => {
                    let state = BeliefState::new(tree.root_arms())?;
                    match decide(&root_policy, &state, available - used, used)? {
                        PolicyDecision::Stop => break,
                        PolicyDecision::Sample(m) => m,
                    }
                }
            }
        };
        trace.push(root_move);
        simulate(
            game,
            &mut tree,
            &mut states,
            root_move,
            cfg.exploration,
            rng,
        )?;
        used += 1;
    }

    let means: Vec<f64> = tree
        .root_arms()
        .iter()
        .map(|a| a.sum() / a.count() as f64)
        .collect();
    let (mv, _) = best_two_of_means(&means);
    Ok((
        SearchOutcome {
            mv,
            used,
            root_trace: trace,
        },
        tree,
    ))
}

/// One rollout: descend from the root through `root_move`, expand one node,
/// play out randomly, back up the payoff.
fn simulate<G: GameModel>(
    game: &G,
    tree: &mut SearchTree,
    states: &mut Vec<G::State>,
    root_move: usize,
    exploration: f64,
    rng: &mut SearchRng,
) -> Result<()> {
    rng.next_rollout();
    let mut path = vec![0usize];
    let mut node = 0usize;
    let mut mv = Some(root_move);
    let payoff = loop {
        let state = &states[node];
        if game.is_terminal(state) {
            break game.terminal_payoff(state, rng);
        }
        let m = match mv.take() {
            Some(m) => m,
            None => uct_select(
                tree.nodes[node].visits,
                &tree.child_stats(node),
                exploration,
            )?,
        };
        match tree.nodes[node].children[m] {
            Some(child) => {
                node = child;
                path.push(node);
            }
            None => {
                let child_state = game.play(state, m);
                let child = tree.nodes.len();
                tree.nodes.push(UctNode::new(game.num_moves(&child_state)));
                tree.nodes[node].children[m] = Some(child);
                let payoff = game.rollout(&child_state, rng);
                states.push(child_state);
                node = child;
                path.push(node);
                break payoff;
            }
        }
    };
    for &id in &path {
        let n = &mut tree.nodes[id];
        n.visits += 1;
        n.payoff_sum += payoff;
    }
    let last = &mut tree.nodes[node];
    last.ended += 1;
    last.ended_sum += payoff;
    if let Some(log) = tree.log.as_mut() {
        log.push((path, payoff));
    }
    Ok(())
}

/// One move of an episode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MoveRecord {
    pub mv: usize,
    pub available: u64,
    pub used: u64,
}

/// Plays the game from its root to a terminal state, searching before each
/// move with `nominal` plus the budget left unused by the previous move.
///
/// The tree is discarded after every move. The search of the `k`-th move
/// draws from `stream` with round `k`.
pub fn run_episode<G: GameModel>(
    game: &G,
    nominal: u64,
    cfg: &SearchConfig,
    stream: PayoffStream,
) -> Result<(Vec<MoveRecord>, G::State)> {
    let mut state = game.root();
    let mut budget = SearchBudget::new(nominal);
    let mut records = Vec::new();
    while !game.is_terminal(&state) {
        let mut rng = SearchRng::new(stream.with_round(records.len() as u64));
        let out = search_from(game, &state, budget, cfg, &mut rng)?;
        let available = budget.available();
        records.push(MoveRecord {
            mv: out.mv,
            available,
            used: out.used,
        });
        budget.carryover = available - out.used;
        state = game.play(&state, out.mv);
    }
    Ok((records, state))
}

/// Settings for comparing search policies on random bandit trees.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeExperimentConfig {
    pub spec: BanditTreeSpec,
    /// Per-search budgets (single-move mode) or nominal per-move budgets
    /// (episode mode).
    pub budgets: Vec<u64>,
    pub trials: u64,
    pub policies: Vec<PolicyKind>,
    pub cost: f64,
    pub exploration: f64,
    pub master_seed: u64,
    /// Play whole episodes with budget carryover instead of a single root
    /// decision.
    pub episodes: bool,
}

impl TreeExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        if self.trials == 0 {
            return config("trials must be at least 1");
        }
        if self.budgets.is_empty() || self.budgets.windows(2).any(|w| w[0] >= w[1]) {
            return config(format!(
                "budgets must be non-empty and strictly increasing: {:?}",
                self.budgets
            ));
        }
        if self.spec.branching > 1 && self.budgets[0] < self.spec.branching as u64 {
            return config(format!(
                "budget {} smaller than branching {}",
                self.budgets[0], self.spec.branching
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
        if !(self.cost >= 0.0 && self.cost.is_finite()) {
            return config(format!("cost {} must be finite and >= 0", self.cost));
        }
        if !(self.exploration >= 0.0 && self.exploration.is_finite()) {
            return config(format!(
                "exploration {} must be finite and >= 0",
                self.exploration
            ));
        }
        Ok(())
    }
}

/// Root decision of one trial: regret of the chosen root move against the
/// true backed-up values, and rollouts used.
pub fn tree_trial(
    tree: &BanditTree,
    budget: u64,
    cfg: &SearchConfig,
    stream: PayoffStream,
) -> Result<TrialOutcome> {
    let mut rng = SearchRng::new(stream);
    let out = hybrid_search(tree, SearchBudget::new(budget), cfg, &mut rng)?;
    let root = tree.root();
    let best = tree.true_value(&root);
    let chosen = tree.true_value(&tree.play(&root, out.mv));
    Ok(TrialOutcome {
        chosen: out.mv,
        regret: best - chosen,
        used: out.used,
    })
}

/// Whole episode of one trial: regret of the leaf reached against the best
/// leaf, and rollouts used per move.
pub fn episode_trial(
    tree: &BanditTree,
    nominal: u64,
    cfg: &SearchConfig,
    stream: PayoffStream,
) -> Result<(f64, f64)> {
    let (records, leaf) = run_episode(tree, nominal, cfg, stream)?;
    let best = tree.true_value(&tree.root());
    let regret = best - tree.true_value(&leaf);
    let used: u64 = records.iter().map(|r| r.used).sum();
    Ok((regret, used as f64 / records.len() as f64))
}

/// Runs every (policy, budget) pair over all trials with paired streams.
///
/// With `episodes` unset each trial is a single root decision; otherwise a
/// full episode whose `mean_samples_used` is rollouts per move.
pub fn evaluate_tree_policies(cfg: &TreeExperimentConfig) -> Result<Vec<ResultRow>> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for policy in &cfg.policies {
        let search = SearchConfig {
            root_policy: *policy,
            cost: cfg.cost,
            exploration: cfg.exploration,
        };
        for &budget in &cfg.budgets {
            let results = (0..cfg.trials)
                .into_par_iter()
                .map(|trial| {
                    let tree = BanditTree::new(cfg.spec, cfg.master_seed, trial)?;
                    let stream = PayoffStream::new(cfg.master_seed, trial);
                    if cfg.episodes {
                        episode_trial(&tree, budget, &search, stream)
                    } else {
                        tree_trial(&tree, budget, &search, stream)
                            .map(|o| (o.regret, o.used as f64))
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            let regrets: Vec<f64> = results.iter().map(|r| r.0).collect();
            let used: Vec<f64> = results.iter().map(|r| r.1).collect();
            let (mean_regret, stderr_regret) = crate::stats::mean_and_stderr(&regrets);
            let (mean_samples_used, _) = crate::stats::mean_and_stderr(&used);
            rows.push(ResultRow {
                policy: policy.name().to_string(),
                budget,
                trials: cfg.trials,
                mean_regret,
                stderr_regret,
                mean_samples_used,
            });
        }
    }
    rows.sort_by(|a, b| (&a.policy, a.budget).cmp(&(&b.policy, b.budget)));
    Ok(rows)
}
