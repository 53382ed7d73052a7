use proptest::prelude::*;

use smachine::compute::*;
use smachine::constructors::*;
use smachine::machine::{base_of, format_base, invert_rule, History, SetTag, SMachine};
use smachine::{AdmissibleWord, Error};

fn lr() -> SMachine {
    build_lr(&["a", "b"]).unwrap()
}

fn word(m: &SMachine, s: &str) -> AdmissibleWord {
    m.parse_word(s).unwrap()
}

#[test]
fn lr_sweep_step_by_step() {
    let m = lr();
    let w = word(&m, "q1 a p1 q2");
    let z1 = m.find("z1(a)").unwrap();
    assert!(is_applicable(&m, &w, z1));
    let w1 = apply_rule(&m, &w, z1).unwrap();
    assert_eq!(m.format_word(&w1), "q1 p1 a' q2");
    let turn = m.find("z1-2").unwrap();
    let w2 = apply_rule(&m, &word(&m, "q1 p1 q2"), turn).unwrap();
    assert_eq!(m.format_word(&w2), "q1 p2 q2");
    let h = m.history_from_str("z1(a) z1-2 z2(a)").unwrap();
    let c = run_history(&m, &w, &h).unwrap();
    assert_eq!(c.trace.len(), 4);
    assert_eq!(m.format_word(c.end()), "q1 a p2 q2");
}

#[test]
fn domain_violation_is_not_applicable() {
    let m = lr();
    let w = word(&m, "q1 a' p1 q2");
    let z1 = m.find("z1(a)").unwrap();
    assert!(!is_applicable(&m, &w, z1));
    assert!(matches!(apply_rule(&m, &w, z1), Err(Error::NotApplicable { .. })));
    let h = m.history_from_str("z1(a)").unwrap();
    assert!(matches!(run_history(&m, &w, &h), Err(Error::NotApplicableAt { index: 0, .. })));
}

#[test]
fn inverse_rule_swaps_and_inverts() {
    let m = lr();
    let z1 = m.rule(m.find("z1(a)").unwrap());
    let inv = invert_rule(z1);
    let alpha = m.alphabet();
    for (p, q) in z1.parts.iter().zip(&inv.parts) {
        assert_eq!((p.from, p.to), (q.to, q.from));
        assert_eq!(q.left, p.left.inverse());
        assert_eq!(q.right, p.right.inverse());
    }
    let p1 = alpha.sym("p1").unwrap();
    let part = inv.parts.iter().find(|p| p.from == p1).unwrap();
    assert_eq!(smachine::machine::format_letters(alpha, part.left.letters()), "a");
    assert_eq!(smachine::machine::format_letters(alpha, part.right.letters()), "a'^-1");
}

#[test]
fn empty_history_and_inverse_pairs() {
    let m = lr();
    let w = word(&m, "q1 a p1 q2");
    let c = run_history(&m, &w, &History(vec![])).unwrap();
    assert_eq!(c.trace, vec![w.clone()]);
    let h = m.history_from_str("z1(a) z1(a)^-1").unwrap();
    assert_eq!(run_history(&m, &w, &h).unwrap().end(), &w);
}

#[test]
fn bases() {
    let m = lr();
    let hw = &m.hardware;
    assert_eq!(format_base(hw, &base_of(&m.start_configuration(), &hw.alphabet)), "Q1 P Q2");
    let w = word(&m, "q1 a q1^-1");
    assert_eq!(format_base(hw, &base_of(&w, &hw.alphabet)), "Q1 Q1^-1");
    assert!(m.parse_word("q1 q1^-1").is_err());
    let b = build_main_machine(&ToyRecognizer::even(), DEFAULT_M, DEFAULT_L).unwrap();
    let std = base_of(&b.w_st(), b.machine.alphabet());
    assert_eq!(base_of(&b.w_kk(3, 1), b.machine.alphabet()), std);
}

#[test]
fn step_histories_and_eligibility() {
    let b = build_main_machine(&ToyRecognizer::even(), DEFAULT_M, DEFAULT_L).unwrap();
    let m = &b.machine;
    let r2 = m.rules_in_set(SetTag::Set(2))[0];
    let r3 = m.rules_in_set(SetTag::Set(3))[0];
    let t12 = m.rules_in_set(SetTag::Transition(1))[0];
    let t23 = m.rules_in_set(SetTag::Transition(2))[0];
    let h = History(vec![r2, r2, t23, r3]);
    assert_eq!(format_step_history(&step_history(&h, m).unwrap()), "(2)(23)(3)");
    assert_eq!(format_step_history(&step_history(&History(vec![t12.inverse()]), m).unwrap()), "(21)");
    assert!(step_history(&History(vec![]), m).unwrap().is_empty());
    assert!(is_eligible(&History(vec![t23, t23.inverse()]), m));
    assert!(!is_eligible(&History(vec![t23.inverse(), t23]), m));
    assert!(!is_eligible(&History(vec![r3, r3.inverse()]), m));
    assert_eq!(first_ineligible(&History(vec![r2, t23.inverse(), t23]), m), Some(2));
}

#[test]
fn depth_zero_enumeration_is_the_empty_computation() {
    let m = lr();
    let w = word(&m, "q1 a p1 q2");
    let all: Vec<_> = enumerate_computations(&m, &w, 0, HistoryFilter::Reduced).collect();
    assert_eq!(all.len(), 1);
    assert!(all[0].history.0.is_empty());
}

#[test]
fn depth_three_enumeration_finds_the_sweep() {
    let m = lr();
    let w = word(&m, "q1 a p1 q2");
    let target = word(&m, "q1 a p2 q2");
    let found: Vec<_> = enumerate_computations(&m, &w, 3, HistoryFilter::Reduced)
        .filter(|c| c.end() == &target)
        .map(|c| m.history_to_string(&c.history))
        .collect();
    assert!(found.contains(&"z1(a) z1-2 z2(a)".to_string()), "{found:?}");
}

#[test]
fn enumeration_grows_with_depth() {
    let m = lr();
    let w = word(&m, "q1 a b p1 q2");
    let mut prev: Vec<History> = vec![];
    for d in 0..5 {
        let cur: Vec<History> =
            enumerate_computations(&m, &w, d, HistoryFilter::Reduced).map(|c| c.history).collect();
        assert!(prev.iter().all(|h| cur.contains(h)), "depth {d}");
        assert!(cur.iter().all(|h| h.is_reduced() && h.0.len() <= d));
        prev = cur;
    }
}

#[test]
fn walker_and_enumerator_agree() {
    let m = build_lr_m(&["a"], 2).unwrap();
    let w = m.parse_word("q1 a p1 q2").unwrap();
    let mut walked = Vec::new();
    walk_computations(&m, &w, &EnumOptions::new(4, HistoryFilter::Eligible), |_, h| {
        walked.push(h.to_vec());
        true
    });
    let mut listed: Vec<_> =
        enumerate_computations(&m, &w, 4, HistoryFilter::Eligible).map(|c| c.history.0).collect();
    walked.sort();
    listed.sort();
    assert_eq!(walked, listed);
}

fn arb_lr_word() -> impl Strategy<Value = String> {
    let tape = prop::collection::vec(prop_oneof![Just("a"), Just("b"), Just("a^-1"), Just("b^-1")], 0..5);
    (tape, prop::bool::ANY).prop_map(|(t, two)| {
        let mut out: Vec<&str> = vec!["q1"];
        let mut last: Option<&str> = None;
        for x in t {
            let cancels = last.is_some_and(|l: &str| l.trim_end_matches("^-1") == x.trim_end_matches("^-1") && l != x);
            if !cancels {
                out.push(x);
                last = Some(x);
            }
        }
        out.push(if two { "p2" } else { "p1" });
        out.push("q2");
        out.join(" ")
    })
}

proptest! {
    #[test]
    fn applying_then_inverting_is_identity(s in arb_lr_word()) {
        let m = lr();
        let w = word(&m, &s);
        for r in m.ordered_rules() {
            if let Ok(v) = apply_rule(&m, &w, *r) {
                prop_assert_eq!(apply_rule(&m, &v, r.inverse()).unwrap(), w.clone());
            }
        }
    }

    #[test]
    fn history_text_round_trips(idx in prop::collection::vec(0usize..12, 0..8)) {
        let m = lr();
        let refs = m.ordered_rules();
        let h = History(idx.into_iter().map(|i| refs[i % refs.len()]).collect());
        prop_assert_eq!(m.history_from_str(&m.history_to_string(&h)).unwrap(), h);
    }

    #[test]
    fn computations_replay(s in arb_lr_word(), d in 0usize..4) {
        let m = lr();
        let w = word(&m, &s);
        for c in enumerate_computations(&m, &w, d, HistoryFilter::Reduced) {
            prop_assert!(c.verify(&m).is_ok());
            prop_assert_eq!(c.trace.len(), c.history.0.len() + 1);
        }
    }
}
