mod common;

use std::collections::HashMap;

use common::{fo_sentence, pr, pr_tapes, rng, tarski, AnyGen};
use proptest::prelude::*;
use tlogic::game::{
    check_truth, extract_trace, solve, verify_strategy, NodeStatus, OpponentPolicy, Outcome, Owner, Player,
    SolveOptions, Truth, Verdict,
};
use tlogic::structure::{random_structure, Structure};
use tlogic::syntax::{classify_fragment, FormulaAst, NodeId};

fn clocked_case(seed: u64, depth: usize) -> (FormulaAst, Structure) {
    let mut r = rng(seed);
    let f = AnyGen::clocked().formula(&mut r, depth);
    let ast = FormulaAst::build(&pr_tapes(), &f).unwrap();
    let n = (seed % 4) as usize;
    let m = random_structure(&pr_tapes().input_part(), n, 0.5, &mut r);
    (ast, m)
}

/// Every classified node is justified by its successors; with exhaustive
/// exploration nothing unclassified could have been attracted.
fn check_attractor(v: &Verdict) {
    let g = v.graph();
    for id in 0..g.len() as u32 {
        let p = g.position(id);
        let node = g.node(id);
        match node.status {
            NodeStatus::Terminal(val) | NodeStatus::Collapsed(val) => {
                assert_eq!(node.winner, val.winner(p.positive), "node {id}");
            }
            NodeStatus::Expanded(owner) => {
                let won = |w: Player| node.succ.iter().filter(|s| g.node(**s).winner == Some(w)).count();
                for w in [Player::Eloise, Player::Abelard] {
                    let forced = if owner == Owner::Player(w) {
                        won(w) > 0
                    } else {
                        !node.succ.is_empty() && won(w) == node.succ.len()
                    };
                    if node.winner == Some(w) {
                        assert!(forced, "node {id} classified for {w:?} without support");
                    } else {
                        assert!(!forced, "node {id} should be attracted to {w:?}");
                    }
                }
            }
            NodeStatus::Unexpanded => panic!("exhaustive solve left node {id} unexpanded"),
        }
    }
    let (e, a, d) = g.partition();
    assert_eq!(e + a + d, g.len());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn attractor_partition(seed in any::<u64>(), depth in 1usize..5) {
        let (ast, m) = clocked_case(seed, depth);
        let v = solve(&ast, &m, &[], SolveOptions::exhaustive()).unwrap();
        check_attractor(&v);
    }

    #[test]
    fn negation_duality(seed in any::<u64>(), depth in 1usize..5) {
        let (ast, m) = clocked_case(seed, depth);
        let neg = FormulaAst::build(ast.vocab(), &ast.to_formula().negate()).unwrap();
        let a = solve(&ast, &m, &[], SolveOptions::default()).unwrap().outcome;
        let b = solve(&neg, &m, &[], SolveOptions::default()).unwrap().outcome;
        prop_assert_eq!(b, a.swap());
    }

    #[test]
    fn optimisations_preserve_outcomes(seed in any::<u64>(), depth in 1usize..5) {
        let (ast, m) = clocked_case(seed, depth);
        let full = solve(&ast, &m, &[], SolveOptions::exhaustive()).unwrap().outcome;
        prop_assert_eq!(solve(&ast, &m, &[], SolveOptions::default()).unwrap().outcome, full);
        prop_assert_eq!(solve(&ast, &m, &[], SolveOptions::default().sequential()).unwrap().outcome, full);
    }

    #[test]
    fn strategies_are_sound(seed in any::<u64>(), depth in 1usize..5) {
        let (ast, m) = clocked_case(seed, depth);
        for opts in [SolveOptions::default(), SolveOptions::exhaustive()] {
            let v = solve(&ast, &m, &[], opts).unwrap();
            if v.winner().is_some() {
                prop_assert!(verify_strategy(&v, &ast).is_ok(), "{:?}", verify_strategy(&v, &ast));
                let t = extract_trace(&v, &ast, OpponentPolicy::Random(seed)).unwrap();
                prop_assert_eq!(t.winner, v.winner());
            } else {
                prop_assert!(v.strategy().is_none());
            }
        }
    }

    #[test]
    fn budgets_never_flip_verdicts(seed in any::<u64>(), depth in 1usize..5) {
        let (ast, m) = clocked_case(seed, depth);
        let full = solve(&ast, &m, &[], SolveOptions::default()).unwrap();
        let mut last = None;
        for b in [1u64, 2, 4, 8, 16, 64, 256, 4096] {
            let v = solve(&ast, &m, &[], SolveOptions::default().with_budget(Some(b))).unwrap();
            if v.outcome != Outcome::Unknown {
                prop_assert_eq!(v.outcome, full.outcome);
                last = Some(v.outcome);
            } else {
                prop_assert_eq!(last, None, "definite verdict lost at budget {}", b);
                prop_assert!(v.stats.positions as u64 >= b, "unknown before the budget ran out");
            }
        }
    }

    #[test]
    fn clocks_bound_visits_along_traces(seed in any::<u64>(), depth in 1usize..5) {
        let (ast, m) = clocked_case(seed, depth);
        let v = solve(&ast, &m, &[], SolveOptions::exhaustive()).unwrap();
        if v.winner().is_some() {
            let t = extract_trace(&v, &ast, OpponentPolicy::Random(seed)).unwrap();
            for &node in ast.clocked_nodes() {
                let limit = ast.node(node).clock().unwrap().eval(m.size() as u64);
                let visits = t.steps.iter().filter(|s| s.node == node).count();
                prop_assert!(num_bigint::BigUint::from(visits) <= limit, "node {:?}", node);
            }
        }
    }

    #[test]
    fn first_order_agrees_with_tarski(seed in any::<u64>(), depth in 0usize..5) {
        let mut r = rng(seed);
        let f = fo_sentence(&mut r, depth);
        let ast = FormulaAst::build(&pr(), &f).unwrap();
        let m = random_structure(&pr(), (seed % 5) as usize, 0.5, &mut r);
        let want = tarski(&f, &m, &mut HashMap::new());
        for collapse in [true, false] {
            let opts = SolveOptions { collapse_fo: collapse, ..SolveOptions::default() };
            let got = solve(&ast, &m, &[], opts).unwrap().outcome;
            prop_assert_eq!(got, if want { Outcome::EloiseWins } else { Outcome::AbelardWins });
        }
    }
}

#[test]
fn clocked_fragments_terminate_without_budget() {
    for seed in 0..300 {
        let (ast, m) = clocked_case(seed, 5);
        let r = classify_fragment(&ast);
        assert!(r.in_t_allexp && r.in_t_ix_kexp.is_some());
        let v = solve(&ast, &m, &[], SolveOptions::exhaustive()).unwrap();
        assert_ne!(v.outcome, Outcome::Unknown);
    }
}

#[test]
fn ix_free_formulas_terminate_without_budget() {
    let mut g = AnyGen::new();
    g.clock_p = 0.0;
    let mut done = 0;
    for seed in 0..400u64 {
        let mut r = rng(seed);
        let f = g.formula(&mut r, 4);
        let ast = FormulaAst::build(&pr_tapes(), &f).unwrap();
        if !classify_fragment(&ast).in_t_minus_ix {
            continue;
        }
        let m = random_structure(&pr_tapes().input_part(), (seed % 3) as usize, 0.5, &mut r);
        assert_ne!(
            solve(&ast, &m, &[], SolveOptions::exhaustive()).unwrap().outcome,
            Outcome::Unknown
        );
        done += 1;
    }
    assert!(done > 100);
}

#[test]
fn top_trace_has_one_step() {
    let ast = FormulaAst::build(&pr(), &tlogic::syntax::Formula::True).unwrap();
    let m = Structure::empty(&pr(), 2);
    let v = solve(&ast, &m, &[], SolveOptions::default()).unwrap();
    let t = extract_trace(&v, &ast, OpponentPolicy::First).unwrap();
    assert_eq!(t.steps.len(), 1);
    assert_eq!(t.nodes(), vec![NodeId(0)]);
    assert_eq!(tlogic::game::Trace::from_text(&t.to_text()).unwrap(), t);
}

#[test]
fn truth_values_of_draws() {
    let ast = tlogic::syntax::parse_formula(common::REACH, &pr()).unwrap();
    let m = common::digraph(2, 0b1001, &[]);
    let g = [("x".to_string(), 0)];
    assert_eq!(
        solve(&ast, &m, &g, SolveOptions::default()).unwrap().outcome,
        Outcome::Draw
    );
    assert_eq!(check_truth(&ast, &m, &g, None).unwrap(), Truth::False);
}
