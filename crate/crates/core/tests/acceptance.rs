//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::collections::HashMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use jigsaw_mcts::env::{
    compute_metrics, correct_prefix_value, slice_image, synthetic_image, value_target, Action, GameState,
    PatchOrder, PuzzleInstance, PuzzleSpec,
};
use jigsaw_mcts::eval::{Evaluator, PolicyHead, SyntheticEvaluator, ValueHead};
use jigsaw_mcts::harness::{
    brute_force_solve, run_benchmark, sign_test, BenchmarkReport, Dataset, DatasetSource, ExperimentConfig, Scorer,
    DEFAULT_LEAF_CAP,
};
use jigsaw_mcts::mcts::{
    backpropagate, edge_score, play_game, EdgeStats, Node, RewardMode, SearchConfig, Selection, Tree,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

type Outcome = Result<String, String>;

fn check(cond: bool, detail: String) -> Outcome {
    if cond {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn bench(text: &str) -> BenchmarkReport {
    let cfg = ExperimentConfig::parse_str(text).expect("acceptance config parses");
    run_benchmark(&cfg).expect("benchmark runs").report
}

fn column(report: &BenchmarkReport, metric: fn(&jigsaw_mcts::env::ReassemblyMetrics) -> f64) -> Vec<f64> {
    report.results.iter().map(|r| metric(&r.metrics)).collect()
}

fn patch_wise(m: &jigsaw_mcts::env::ReassemblyMetrics) -> f64 {
    m.patch_wise
}

fn puzzle_wise(m: &jigsaw_mcts::env::ReassemblyMetrics) -> f64 {
    f64::from(m.puzzle_wise)
}

fn oracle_solvability() -> Outcome {
    let t0 = Instant::now();
    let report = bench("puzzles = 100\nn_visits = 1000\nreward = ground-truth\npolicy = oracle\nvalue = oracle\n");
    let secs = t0.elapsed().as_secs_f64();
    let solved = report.summary.mean_puzzle_wise;
    check(
        solved == 1.0 && t0.elapsed() < Duration::from_secs(120),
        format!("puzzle-wise {:.2}% over 100 3x3 puzzles in {secs:.1} s", 100.0 * solved),
    )
}

fn brute_force_equivalence() -> Outcome {
    let data = Dataset::open(&DatasetSource::Synthetic, PuzzleSpec::new(8, 2, 2).unwrap(), 2024).unwrap();
    let heads: [(&str, PolicyHead, ValueHead); 6] = [
        ("oracle", PolicyHead::Oracle, ValueHead::Oracle),
        ("noisy-0.3", PolicyHead::Noisy(0.3), ValueHead::Noisy(0.3)),
        ("noisy-0.7", PolicyHead::Noisy(0.7), ValueHead::Noisy(0.7)),
        ("noisy-1.0", PolicyHead::Noisy(1.0), ValueHead::Noisy(1.0)),
        ("uniform-const", PolicyHead::Uniform, ValueHead::Constant(0.5)),
        ("uniform-noisy", PolicyHead::Uniform, ValueHead::Noisy(0.5)),
    ];
    let cfg = SearchConfig {
        n_visits: 1000,
        selection: Selection::Uct,
        reward_mode: RewardMode::GroundTruth,
        ..SearchConfig::default()
    };
    let mut mismatches = Vec::new();
    for (name, policy, value) in heads {
        for i in 0..50 {
            let inst = Arc::new(data.instance(i).unwrap());
            let eval = SyntheticEvaluator::new(Arc::clone(&inst), policy, value, i as u64);
            let order = PatchOrder::shuffled(4, 31 * i as u64 + 7);
            let best = brute_force_solve(&inst, &order, Scorer::GroundTruth, &eval, DEFAULT_LEAF_CAP).unwrap();
            let game = play_game(&inst, &order, &eval, &cfg).unwrap();
            let score = f64::from(compute_metrics(&game.terminal, &inst).unwrap().puzzle_wise);
            if score != best.score {
                mismatches.push(format!("{name}#{i}"));
            }
        }
    }
    check(
        mismatches.is_empty(),
        format!(
            "6 evaluators x 50 2x2 puzzles, UCT, 1000 visits, ground-truth scorer: {} mismatches {:?}",
            mismatches.len(),
            mismatches
        ),
    )
}

fn dummy_state() -> GameState {
    let spec = PuzzleSpec::new(2, 3, 0).unwrap();
    let inst = slice_image(&synthetic_image(6, 6, 0), spec, 0, "backprop").unwrap();
    GameState::initial(&inst, &PatchOrder::identity(9)).unwrap()
}

fn backprop_exactness() -> Outcome {
    let state = dummy_state();
    let value = prop_oneof![Just(0.0), Just(1.0), 0.0f64..=1.0];
    let strategy = (1usize..5, 1usize..6).prop_flat_map(move |(branching, depth)| {
        (
            Just(branching),
            prop::collection::vec((prop::collection::vec(0..branching, depth), value.clone()), 1..60),
        )
    });
    let config = Config {
        cases: 10_000,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    let result = runner.run(&strategy, |(branching, ops)| {
        let priors: Vec<(Action, f64)> = (0..branching).map(|i| (Action::new(i), 1.0 / branching as f64)).collect();
        let mut tree = Tree::new();
        let mut ids: HashMap<Vec<usize>, usize> = HashMap::new();
        let mut reference: HashMap<(usize, usize), Vec<f64>> = HashMap::new();
        for (choices, v) in &ops {
            let mut path = Vec::new();
            for k in 0..choices.len() {
                let id = *ids
                    .entry(choices[..k].to_vec())
                    .or_insert_with(|| tree.push(Node::new(state.clone(), &priors)));
                path.push((id, choices[k]));
                reference.entry((id, choices[k])).or_default().push(*v);
            }
            backpropagate(&mut tree, &path, *v);
        }
        for (id, node) in tree.nodes().iter().enumerate() {
            prop_assert_eq!(node.visits, node.edges.iter().map(|e| e.stats.visits).sum::<u32>() + 1);
            for (a, edge) in node.edges.iter().enumerate() {
                let values = reference.get(&(id, a)).cloned().unwrap_or_default();
                prop_assert_eq!(edge.stats.visits as usize, values.len());
                if values.is_empty() {
                    continue;
                }
                let n = values.len() as f64;
                let mean = values.iter().sum::<f64>() / n;
                let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let sd = (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n).sqrt();
                prop_assert!((edge.stats.q - mean).abs() <= 1e-9, "Q {} vs {}", edge.stats.q, mean);
                prop_assert_eq!(edge.stats.q_max, max);
                prop_assert!((edge.stats.sigma() - sd).abs() <= 1e-9, "sigma {} vs {}", edge.stats.sigma(), sd);
            }
        }
        Ok(())
    });
    match result {
        Ok(()) => Ok("10000 random backup sequences: Q, N, Q_max and sigma match the reference within 1e-9".into()),
        Err(e) => Err(format!("{e}")),
    }
}

fn value_target_exactness() -> Outcome {
    let mut checked = 0usize;
    for f in 2..=25usize {
        let values: Vec<f64> = (0..f).map(|i| correct_prefix_value(i, f)).collect();
        if values[0] != 0.5 || values[f - 1] != 1.0 || !values.windows(2).all(|w| w[0] < w[1]) {
            return Err(format!("closed form wrong at f = {f}: {values:?}"));
        }
        checked += f;
    }
    for n in 2..=5usize {
        let spec = PuzzleSpec::new(2, n, 0).unwrap();
        let side = spec.canvas_side();
        let inst = slice_image(&synthetic_image(side, side, n as u64), spec, 0, "eq").unwrap();
        let f = spec.patches();
        let order = PatchOrder::shuffled(f, n as u64);
        let home: Vec<usize> = order.as_slice().iter().map(|&p| inst.solution_position(p)).collect();
        for i in 0..=f {
            let correct = GameState::from_moves(&inst, &order, &home[..i]).unwrap();
            let want = if i == f { 1.0 } else { correct_prefix_value(i, f) };
            if value_target(&correct, &inst) != want {
                return Err(format!("flawless prefix f = {f}, i = {i}"));
            }
            checked += 1;
            for k in 0..i {
                let mut moves = home[..i].to_vec();
                if i < f {
                    moves[k] = home[i];
                } else {
                    let j = (k + 1) % f;
                    moves.swap(k, j);
                }
                let flawed = GameState::from_moves(&inst, &order, &moves).unwrap();
                if value_target(&flawed, &inst) != 0.0 {
                    return Err(format!("flawed prefix f = {f}, i = {i}, misplaced #{k}"));
                }
                checked += 1;
            }
        }
    }
    Ok(format!(
        "0.5 at i = 0, 1.0 at i = f-1, 0 when flawed; {checked} (f, i) cases for f <= 25"
    ))
}

fn selection_formulas() -> Outcome {
    let stats = |prior: f64, values: &[f64]| {
        let mut e = EdgeStats::new(prior);
        for &v in values {
            e.update(v);
        }
        e
    };
    let cfg = |selection, c, w, lambda| SearchConfig {
        selection,
        c,
        w,
        lambda,
        ..SearchConfig::default()
    };
    let cases = [
        ("PUCT unvisited", edge_score(&stats(0.25, &[]), 1, &cfg(Selection::Puct, 1.0, 0.0, 0.5)), 0.25),
        (
            "PUCT visited",
            edge_score(&stats(0.2, &[0.3, 0.3]), 7, &cfg(Selection::Puct, 1.5, 0.0, 0.5)),
            0.5645751311064591,
        ),
        ("UCT", edge_score(&stats(0.1, &[0.5]), 2, &cfg(Selection::Uct, 1.0, 0.0, 0.5)), 1.3325546111576978),
        (
            "SP-MCTS",
            edge_score(&stats(0.1, &[0.2, 0.4, 0.9]), 4, &cfg(Selection::SpMcts, 1.0, 0.02, 0.5)),
            1.4921700223234677,
        ),
        (
            "SP-mix",
            edge_score(&stats(0.1, &[0.2, 0.4, 0.9]), 4, &cfg(Selection::SpMix, 1.0, 0.0, 0.5)),
            1.3797779934458725,
        ),
        (
            "SP-MCTS W=0 sigma=0 vs UCT",
            edge_score(&stats(0.1, &[0.5, 0.5, 0.5]), 4, &cfg(Selection::SpMcts, 1.3, 0.0, 0.5)),
            edge_score(&stats(0.1, &[0.5, 0.5, 0.5]), 4, &cfg(Selection::Uct, 1.3, 0.0, 0.5)),
        ),
    ];
    let worst = cases.iter().map(|(_, got, want)| (got - want).abs()).fold(0.0, f64::max);
    let failing: Vec<&str> = cases
        .iter()
        .filter(|(_, got, want)| (got - want).abs() > 1e-12)
        .map(|(name, _, _)| *name)
        .collect();
    check(
        failing.is_empty(),
        format!("{} fixtures, max error {worst:.1e}, failing {failing:?}", cases.len()),
    )
}

fn greedy_ordering() -> Outcome {
    let t0 = Instant::now();
    let base = "puzzles = 200\npolicy = noisy:0.3\nvalue = noisy:0.3\n";
    let mcts = column(&bench(&format!("{base}solver = mcts\n")), patch_wise);
    let gv = column(&bench(&format!("{base}solver = greedy-value\n")), patch_wise);
    let gp = column(&bench(&format!("{base}solver = greedy-policy\n")), patch_wise);
    let secs = t0.elapsed().as_secs_f64();
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let (m, v, p) = (mean(&mcts), mean(&gv), mean(&gp));
    let mv = sign_test(&mcts, &gv);
    let vp = sign_test(&gv, &gp);
    check(
        m > v && v > p && mv.p_value < 0.05 && vp.p_value < 0.05 && secs < 600.0,
        format!(
            "patch-wise MCTS {m:.4} > greedy-V {v:.4} > greedy-P {p:.4}; sign tests {}/{} p={:.2e}, {}/{} p={:.2e}; {secs:.1} s",
            mv.wins, mv.losses, mv.p_value, vp.wins, vp.losses, vp.p_value
        ),
    )
}

fn reward_mode_ordering() -> Outcome {
    let base = "puzzles = 200\npolicy = noisy:0.5\nvalue = noisy:0.5\n";
    let gt = bench(&format!("{base}reward = ground-truth\n")).summary.mean_puzzle_wise;
    let pred = bench(&format!("{base}reward = predicted\n")).summary.mean_puzzle_wise;
    check(
        gt > pred,
        format!("puzzle-wise ground-truth {:.1}% > predicted {:.1}% (noisy 0.5)", 100.0 * gt, 100.0 * pred),
    )
}

fn budget_monotonicity() -> Outcome {
    let means: Vec<f64> = [10, 100, 1000]
        .iter()
        .map(|n| {
            bench(&format!("puzzles = 200\npolicy = noisy:0.3\nvalue = noisy:0.3\nn_visits = {n}\n"))
                .summary
                .mean_patch_wise
        })
        .collect();
    check(
        means.windows(2).all(|w| w[0] <= w[1]),
        format!("patch-wise at 10/100/1000 visits: {:.4} / {:.4} / {:.4}", means[0], means[1], means[2]),
    )
}

fn multi_attempt_gain() -> Outcome {
    let base = "puzzles = 200\npolicy = noisy:0.5\nvalue = noisy:0.5\nattempt_selection = ground-truth-best\n";
    let one = column(&bench(&format!("{base}attempts = 1\n")), puzzle_wise);
    let ten = column(&bench(&format!("{base}attempts = 10\n")), puzzle_wise);
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let gain = 100.0 * (mean(&ten) - mean(&one));
    check(
        gain >= 10.0,
        format!(
            "puzzle-wise k=1 {:.1}% -> k=10 {:.1}%, gain {gain:.1} points (noisy 0.5)",
            100.0 * mean(&one),
            100.0 * mean(&ten)
        ),
    )
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut bytes = Vec::new();
    for run in 0..2 {
        let path = dir.path().join(format!("report{run}.json"));
        let mut cfg = ExperimentConfig::parse_str(
            "puzzles = 40\nn_visits = 200\npolicy = noisy:0.4\nvalue = noisy:0.4\nattempts = 3\nmaster_seed = 99\n",
        )
        .unwrap();
        cfg.report = Some(path.clone());
        run_benchmark(&cfg).unwrap();
        bytes.push(std::fs::read(&path).unwrap());
    }
    check(
        bytes[0] == bytes[1] && !bytes[0].is_empty(),
        format!("two bench runs, {} byte reports, identical: {}", bytes[0].len(), bytes[0] == bytes[1]),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("oracle solvability", oracle_solvability),
        ("brute-force equivalence", brute_force_equivalence),
        ("backprop exactness", backprop_exactness),
        ("value target exactness", value_target_exactness),
        ("selection formulas", selection_formulas),
        ("MCTS > greedy-V > greedy-P", greedy_ordering),
        ("ground-truth reward > predicted reward", reward_mode_ordering),
        ("budget monotonicity", budget_monotonicity),
        ("multi-attempt gain", multi_attempt_gain),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        let t0 = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = t0.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name}: {detail} [{secs:.1} s]"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail} [{secs:.1} s]");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

#[allow(dead_code)]
fn _assert_evaluator_object_safe(_: &dyn Evaluator, _: &PuzzleInstance) {}
