//! Acceptance suite. Each test checks one exit criterion at its fixed
//! tolerance and prints a PASS/FAIL line; run with `--nocapture` to see them.

use std::process::Command;

use mcsel_core::flat::{
    run_experiment, run_trial_traced, trial_problem, ExperimentConfig, DEFAULT_BUDGETS,
};
use mcsel_core::oracle::{dominance_cases, hoeffding_grid, phi_by_minimization};
use mcsel_core::policy::{decide, PolicyDecision};
use mcsel_core::rng::{hash, uniform, PayoffStream};
use mcsel_core::tree::{
    evaluate_tree_policies, hybrid_search, BanditTree, BanditTreeSpec, SearchBudget, SearchConfig,
    SearchRng, TreeExperimentConfig,
};
use mcsel_core::{phi, ArmStats, BeliefState, PolicyKind, ResultRow};

const Z95: f64 = 1.959_963_984_540_054;
const COSTS: [f64; 5] = [0.0, 1e-8, 1e-6, 1e-4, 1e-2];

fn report(name: &str, passed: bool, detail: &str) {
    println!(
        "[{}] {name}: {detail}",
        if passed { "PASS" } else { "FAIL" }
    );
}

fn row<'a>(rows: &'a [ResultRow], policy: &str, budget: u64) -> &'a ResultRow {
    rows.iter()
        .find(|r| r.policy == policy && r.budget == budget)
        .expect("row present")
}

#[test]
fn flat_voi_policies_beat_ucb1() {
    // Paired trials; at 2000 the budget-800 gap is within noise.
    let cfg = ExperimentConfig {
        arms: 25,
        budgets: DEFAULT_BUDGETS.to_vec(),
        trials: 10_000,
        policies: vec![
            PolicyKind::Ucb1,
            PolicyKind::Voi { cost: None },
            PolicyKind::VoiPlus { cost: None },
        ],
        master_seed: 42,
    };
    let rows = run_experiment(&cfg).unwrap();
    let mut all = true;
    for &budget in &cfg.budgets {
        let ucb = row(&rows, "ucb1", budget);
        assert_eq!(ucb.mean_samples_used, budget as f64);
        let ucb_lo = ucb.mean_regret - Z95 * ucb.stderr_regret;
        for policy in ["voi", "voi-plus"] {
            let r = row(&rows, policy, budget);
            assert_eq!(r.mean_samples_used, budget as f64);
            let hi = r.mean_regret + Z95 * r.stderr_regret;
            let ok = r.mean_regret < ucb.mean_regret && hi < ucb_lo;
            all &= ok;
            report(
                &format!("flat ordering {policy} vs ucb1 @ {budget}"),
                ok,
                &format!(
                    "{policy} {:.6} (95% hi {hi:.6}) vs ucb1 {:.6} (95% lo {ucb_lo:.6})",
                    r.mean_regret, ucb.mean_regret
                ),
            );
        }
    }
    assert!(
        all,
        "VOI policies must beat UCB1 with non-overlapping 95% CIs at every budget"
    );
}

#[test]
fn phi_constant_matches_minimization() {
    let (min, argmin) = phi_by_minimization();
    let closed = 24.0 - 16.0 * std::f64::consts::SQRT_2;
    let r_star = 3.0 - 2.0 * std::f64::consts::SQRT_2;
    let ok = (phi() - min).abs() <= 1e-9
        && (phi() - closed).abs() <= 1e-9
        && (argmin - r_star).abs() <= 1e-6;
    report(
        "phi constant",
        ok,
        &format!(
            "phi {:.15}, minimum {min:.15}, argmin {argmin:.10} vs {r_star:.10}",
            phi()
        ),
    );
    assert!(ok);
    assert!(phi() > 1.37);
}

#[test]
fn hoeffding_dominance_grid() {
    let (checked, violations) = hoeffding_grid(50);
    let ok = checked == 50 * 21 * 10 && violations.is_empty();
    report(
        "hoeffding dominance",
        ok,
        &format!("{checked} cases, {} violations", violations.len()),
    );
    assert!(ok, "{violations:?}");
}

#[test]
fn exact_dp_dominates_every_policy() {
    let cases = dominance_cases(100_000, 2024).unwrap();
    assert_eq!(cases.len(), 2 * 3 * 2 * 4);
    let mut all = true;
    for c in &cases {
        all &= c.holds();
        if !c.holds() {
            report("oracle dominance case", false, &format!("{c:?}"));
        }
    }
    let worst = cases
        .iter()
        .map(|c| (c.simulated - c.optimal) / c.stderr)
        .fold(f64::NEG_INFINITY, f64::max);
    report(
        "oracle dominance",
        all,
        &format!(
            "{} cases x 1e5 episodes, max excess {worst:.2} stderr (limit 3)",
            cases.len()
        ),
    );
    assert!(all);
}

fn random_state(case: u64) -> BeliefState {
    let k = 2 + (hash(&[case, 0]) % 24) as usize;
    let arms = (0..k as u64)
        .map(|a| {
            let n = 1 + hash(&[case, 1, a]) % 200;
            let p = uniform(&[case, 2, a]);
            // Binomial-like successes: round(p * n) perturbed by the key.
            let s = ((p * n as f64).round() as u64).min(n);
            ArmStats::new(n, s as f64).unwrap()
        })
        .collect();
    BeliefState::new(arms).unwrap()
}

#[test]
fn voi_choice_is_horizon_invariant() {
    let mut mismatches = 0;
    let cases = 2000;
    for case in 0..cases {
        let s = random_state(case);
        for policy in [
            PolicyKind::Voi { cost: None },
            PolicyKind::VoiPlus { cost: None },
        ] {
            let picks: Vec<PolicyDecision> = [1, 10, 1000]
                .iter()
                .map(|&n| decide(&policy, &s, n, 0).unwrap())
                .collect();
            if picks.iter().any(|p| *p != picks[0]) {
                mismatches += 1;
            }
        }
    }
    let ok = mismatches == 0;
    report(
        "N-invariance",
        ok,
        &format!("{cases} states x 2 policies, {mismatches} mismatches"),
    );
    assert!(ok);
}

fn nonincreasing(xs: &[f64]) -> bool {
    xs.windows(2).all(|w| w[1] <= w[0])
}

#[test]
fn samples_used_nonincreasing_in_cost() {
    let mut flat_used = Vec::new();
    for policy in [
        PolicyKind::Voi { cost: None },
        PolicyKind::VoiPlus { cost: None },
    ] {
        let used: Vec<f64> = COSTS
            .iter()
            .map(|&c| {
                let cfg = ExperimentConfig {
                    arms: 25,
                    budgets: vec![800],
                    trials: 500,
                    policies: vec![policy.with_cost(c).unwrap()],
                    master_seed: 7,
                };
                run_experiment(&cfg).unwrap()[0].mean_samples_used
            })
            .collect();
        flat_used.push((policy.name(), used));
    }
    let tree_used: Vec<f64> = COSTS
        .iter()
        .map(|&c| {
            let cfg = TreeExperimentConfig {
                spec: BanditTreeSpec {
                    depth: 2,
                    branching: 5,
                },
                budgets: vec![1000],
                trials: 300,
                policies: vec![PolicyKind::Voi { cost: None }],
                cost: c,
                exploration: std::f64::consts::SQRT_2,
                master_seed: 7,
                episodes: false,
            };
            evaluate_tree_policies(&cfg).unwrap()[0].mean_samples_used
        })
        .collect();

    let mut all = true;
    for (name, used) in &flat_used {
        let ok = nonincreasing(used);
        all &= ok;
        report(
            &format!("stopping monotonicity flat {name}"),
            ok,
            &format!("costs {COSTS:?} -> used {used:?}"),
        );
    }
    let ok = nonincreasing(&tree_used);
    all &= ok;
    report(
        "stopping monotonicity tree voi",
        ok,
        &format!("costs {COSTS:?} -> used {tree_used:?}"),
    );
    // Cost 0 spends everything; the largest cost must actually stop early.
    assert_eq!(tree_used[0], 1000.0);
    assert!(tree_used[4] < 1000.0);
    assert!(all);
}

#[test]
fn depth_one_tree_reduces_to_flat_voi() {
    let mut mismatches = 0;
    let cases = 200u64;
    for case in 0..cases {
        let seed = 1000 + case;
        let k = 2 + (hash(&[case, 10]) % 7) as usize;
        let budget = k as u64 + hash(&[case, 11]) % 300;
        let cost = [0.0, 1e-4, 1e-2][(case % 3) as usize];

        let problem = trial_problem(seed, case, k);
        let stream = PayoffStream::new(seed, case);
        let (flat, flat_trace) = run_trial_traced(
            &PolicyKind::Voi { cost: None }.with_cost(cost).unwrap(),
            &problem,
            budget,
            &stream,
        )
        .unwrap();

        let tree = BanditTree::new(
            BanditTreeSpec {
                depth: 1,
                branching: k as u32,
            },
            seed,
            case,
        )
        .unwrap();
        assert_eq!(tree.leaf_means(), problem.means());
        let mut rng = SearchRng::new(stream);
        let out = hybrid_search(
            &tree,
            SearchBudget::new(budget),
            &SearchConfig::hybrid(cost),
            &mut rng,
        )
        .unwrap();

        if out.root_trace != flat_trace || out.mv != flat.chosen || out.used != flat.used {
            mismatches += 1;
        }
    }
    let ok = mismatches == 0;
    report(
        "depth-1 reduction",
        ok,
        &format!("{cases} seeded cases, {mismatches} mismatches"),
    );
    assert!(ok);
}

#[test]
fn hybrid_tree_search_not_worse_than_uct() {
    let cfg = TreeExperimentConfig {
        spec: BanditTreeSpec {
            depth: 2,
            branching: 5,
        },
        budgets: vec![1000],
        trials: 2000,
        policies: vec![
            PolicyKind::Ucb1,
            PolicyKind::Voi { cost: None },
            PolicyKind::VoiPlus { cost: None },
        ],
        cost: 0.0,
        exploration: std::f64::consts::SQRT_2,
        master_seed: 42,
        episodes: false,
    };
    let rows = evaluate_tree_policies(&cfg).unwrap();
    let uct = row(&rows, "ucb1", 1000);
    let check = |policy: &str| {
        let r = row(&rows, policy, 1000);
        let se = (r.stderr_regret.powi(2) + uct.stderr_regret.powi(2)).sqrt();
        let limit = uct.mean_regret + 2.0 * se;
        (
            r.mean_regret <= limit,
            format!(
                "{policy} {:.6} vs uct {:.6}, limit {limit:.6}",
                r.mean_regret, uct.mean_regret
            ),
        )
    };
    let (ok, detail) = check("voi");
    report("tree comparison hybrid(voi) vs uct", ok, &detail);
    let (plus_ok, plus_detail) = check("voi-plus");
    println!(
        "[INFO] tree comparison hybrid(voi-plus) vs uct ({}): {plus_detail}",
        if plus_ok { "within" } else { "outside" }
    );
    assert!(ok, "{detail}");
}

fn run_cli(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_mcsel"))
        .args(args)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out.stdout
}

#[test]
fn cli_output_is_deterministic_across_threads() {
    let invocations: [&[&str]; 4] = [
        &[
            "flat",
            "--arms",
            "10",
            "--budgets",
            "50,100",
            "--trials",
            "300",
            "--policies",
            "ucb1,voi,voi-plus,round-robin",
            "--seed",
            "9",
        ],
        &[
            "flat",
            "--arms",
            "6",
            "--budgets",
            "60",
            "--trials",
            "200",
            "--policies",
            "voi",
            "--cost",
            "1e-3",
            "--seed",
            "3",
        ],
        &[
            "tree",
            "--depth",
            "2",
            "--branching",
            "4",
            "--budgets",
            "100,200",
            "--trials",
            "100",
            "--seed",
            "5",
        ],
        &[
            "tree",
            "--depth",
            "3",
            "--branching",
            "3",
            "--nominal",
            "60",
            "--trials",
            "50",
            "--cost",
            "1e-4",
            "--seed",
            "5",
        ],
    ];
    let mut all = true;
    for args in invocations {
        let base = run_cli(&[args, &["--threads", "1"]].concat());
        let again = run_cli(&[args, &["--threads", "1"]].concat());
        let multi = run_cli(&[args, &["--threads", "4"]].concat());
        let ok = base == again && base == multi && !base.is_empty();
        all &= ok;
        report(
            "determinism",
            ok,
            &format!("{} ({} bytes)", args.join(" "), base.len()),
        );
    }
    let oracle = ["oracle-check", "--episodes", "5000"];
    let a = run_cli(&[&oracle[..], &["--threads", "1"]].concat());
    let b = run_cli(&[&oracle[..], &["--threads", "3"]].concat());
    let ok = a == b;
    all &= ok;
    report("determinism", ok, "oracle-check --episodes 5000");
    assert!(all);
}
