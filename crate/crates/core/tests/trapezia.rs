use std::sync::OnceLock;

use smachine::compute::{run_history, Computation};
use smachine::constructors::*;
use smachine::machine::{History, RuleRef, SetTag};
use smachine::presentation::{compile_group_g, compile_plain, Presentation, RelatorTag};
use smachine::trapezia::*;
use smachine::word::Letter;
use smachine::Error;

struct Fixture {
    b: MainMachineBundle,
    g: Presentation,
}

fn fx() -> &'static Fixture {
    static F: OnceLock<Fixture> = OnceLock::new();
    F.get_or_init(|| {
        let b = build_main_machine(&ToyRecognizer::even(), DEFAULT_M, DEFAULT_L).unwrap();
        let g = compile_group_g(&b).unwrap();
        Fixture { b, g }
    })
}

fn rule_in(b: &MainMachineBundle, set: SetTag) -> RuleRef {
    b.machine.rules_in_set(set)[0]
}

fn accepting(k: i64) -> Computation {
    let b = &fx().b;
    run_history(&b.machine, &b.w_kk(k, k), &b.acceptance_witness(k).unwrap()).unwrap()
}

fn input_run(k: i64) -> Computation {
    let b = &fx().b;
    run_history(&b.machine, &b.w_st(), &b.input_witness(k).unwrap()).unwrap()
}

/// Cells of a band by direct count: one per letter of the word the positive
/// rule is applied to.
fn expected_area(c: &Computation) -> usize {
    c.history
        .0
        .iter()
        .enumerate()
        .map(|(t, r)| if r.is_positive() { c.trace[t].len() } else { c.trace[t + 1].len() })
        .sum()
}

#[test]
fn plain_rules_lift_to_the_word_itself() {
    let b = &fx().b;
    let r4 = rule_in(b, SetTag::Set(4));
    let w = b.w_kk(2, 2);
    let p = make_permissible(&b.machine, &w, r4, None, b.l()).unwrap();
    assert_eq!(p.letters(), w.letters());
    assert!(matches!(make_permissible(&b.machine, &w, r4, Some(1), b.l()), Err(Error::SuperscriptForbidden(_))));
    let t23 = rule_in(b, SetTag::Transition(2));
    assert!(matches!(
        make_permissible(&b.machine, &w, t23.inverse(), Some(2), b.l()),
        Err(Error::SuperscriptForbidden(_))
    ));
}

#[test]
fn superscripted_rules_propagate_the_first_superscript() {
    let b = &fx().b;
    let m = &b.machine;
    let r2 = rule_in(b, SetTag::Set(2));
    let w = input_run(2).trace[5].clone();
    assert!(matches!(make_permissible(m, &w, r2, None, b.l()), Err(Error::SuperscriptRequired(_))));
    let p3 = make_permissible(m, &w, r2, Some(3), b.l()).unwrap();
    assert!(p3.letters().iter().all(|l| l.sup == Some(3)));
    let p7 = make_permissible(m, &w, r2, Some(7), b.l()).unwrap();
    assert_eq!(p3.erase(), p7.erase());
    assert!(is_permissible(m, &p3, b.l()));
}

#[test]
fn superscripts_step_across_the_t_junction() {
    let b = &fx().b;
    let m = &b.machine;
    let st = b.w_st();
    let mut rotated: Vec<Letter> = st.letters()[1..].to_vec();
    rotated.push(st.letters()[0]);
    let w = smachine::AdmissibleWord::new(&m.hardware, rotated).unwrap();
    let start = m.rules_in_set(SetTag::Start)[0];
    let p = make_permissible(m, &w, start, Some(12), b.l()).unwrap();
    let sups: Vec<u32> = p.letters().iter().map(|l| l.sup.unwrap()).collect();
    assert!(sups[..sups.len() - 1].iter().all(|&s| s == 12));
    assert_eq!(*sups.last().unwrap(), 1);
    assert!(is_permissible(m, &p, b.l()));
    let mut broken = p.clone();
    broken.0.last_mut().unwrap().sup = Some(12);
    assert!(!is_permissible(m, &broken, b.l()));
}

#[test]
fn one_rule_band_has_a_cell_per_letter() {
    let f = fx();
    let tb = TrapeziumBuilder::new(&f.b.machine, &f.g);
    let c = accepting(2);
    let one = Computation { history: History(vec![c.history.0[0]]), trace: c.trace[..2].to_vec() };
    let t = tb.computation_to_trapezium(&one, None).unwrap();
    assert_eq!(t.height(), 1);
    let alpha = f.b.machine.alphabet();
    let band = &t.bands[0];
    let q = band.cells.iter().filter(|c| c.tag == RelatorTag::ThetaQ).count();
    let a = band.cells.iter().filter(|c| c.tag == RelatorTag::ThetaA).count();
    assert_eq!(q, f.b.n());
    let w = if one.history.0[0].is_positive() { &one.trace[0] } else { &one.trace[1] };
    assert_eq!(a, w.tape_len(alpha));
}

#[test]
fn accepting_trapezia_check_out() {
    let f = fx();
    let tb = TrapeziumBuilder::new(&f.b.machine, &f.g);
    for k in [0, 2, -2] {
        let c = accepting(k);
        let t = tb.computation_to_trapezium(&c, None).unwrap();
        assert_eq!(t.height(), c.len());
        assert_eq!(t.bottom().erase(), c.start().letters());
        assert_eq!(t.top().erase(), c.end().letters());
        assert_eq!(t.area(), expected_area(&c));
        assert!(t.area() >= f.b.n() * t.height());
        assert_eq!(t.history, c.history);
        let alpha = f.b.machine.alphabet();
        for band in &t.bands {
            for lbl in [&band.bottom, &band.top] {
                assert!(alpha.is_state(lbl.0[0].sym) && alpha.is_state(lbl.0.last().unwrap().sym));
            }
        }
    }
}

#[test]
fn input_trapezia_carry_superscripts() {
    let f = fx();
    let tb = TrapeziumBuilder::new(&f.b.machine, &f.g);
    let c = input_run(2);
    assert!(matches!(tb.computation_to_trapezium(&c, None), Err(Error::SuperscriptRequired(_))));
    for s in [1, 12] {
        let t = tb.computation_to_trapezium(&c, Some(s)).unwrap();
        assert!(t.bottom().letters().iter().all(|l| l.sup == Some(s)));
        // θ(23) erases the superscripts of the top.
        assert!(t.top().letters().iter().all(|l| l.sup.is_none()));
        assert_eq!(t.top().erase(), f.b.w_kk(2, 2).letters());
        assert_eq!(t.area(), expected_area(&c));
    }
}

#[test]
fn t23_then_its_inverse_is_a_trapezium() {
    let f = fx();
    let m = &f.b.machine;
    let tb = TrapeziumBuilder::new(m, &f.g);
    let c = input_run(0);
    let t23 = *c.history.0.last().unwrap();
    let mut h = c.history.clone();
    h.0.push(t23.inverse());
    let c2 = run_history(m, &f.b.w_st(), &h).unwrap();
    let t = tb.computation_to_trapezium(&c2, Some(4)).unwrap();
    assert!(t.top().letters().iter().all(|l| l.sup == Some(4)));
}

#[test]
fn ineligible_and_empty_histories_are_rejected() {
    let f = fx();
    let m = &f.b.machine;
    let tb = TrapeziumBuilder::new(m, &f.g);
    let c = accepting(0);
    let r = c.history.0[0];
    let back = run_history(m, c.start(), &History(vec![r, r.inverse()])).unwrap();
    assert!(matches!(tb.computation_to_trapezium(&back, None), Err(Error::IneligibleHistory(1))));
    let empty = Computation { history: History(vec![]), trace: vec![c.start().clone()] };
    assert!(matches!(tb.computation_to_trapezium(&empty, None), Err(Error::EmptyHistory)));
}

#[test]
fn hub_words_are_disk_words() {
    let b = &fx().b;
    let ac = power_word(&b.w_ac(), b.l());
    assert!(matches!(is_disk_word(&ac, b, 1000), DiskVerdict::Yes { .. }));
    let w_st = b.w_st();
    let st: Vec<Letter> = (1..=b.l()).flat_map(|i| w_st.letters().iter().map(move |x| x.with_sup(Some(i)))).collect();
    assert!(matches!(is_disk_word(&st, b, 1000), DiskVerdict::Yes { from_s1: true, .. }));
}

#[test]
fn accepted_w_kk_powers_are_disk_words() {
    let b = &fx().b;
    for k in [0, 2] {
        let v = power_word(&b.w_kk(k, k), b.l());
        match is_disk_word(&v, b, 1000) {
            DiskVerdict::Yes { w, history, from_s1 } => {
                assert!(!from_s1);
                let c = run_history(&b.machine, &w, &history).unwrap();
                assert_eq!(c.end(), &b.w_ac());
            }
            other => panic!("k = {k}: {other:?}"),
        }
    }
}

#[test]
fn non_powers_are_not_disk_words() {
    let b = &fx().b;
    let mut v = power_word(&b.w_kk(2, 2), b.l());
    v.pop();
    assert!(matches!(is_disk_word(&v, b, 10), DiskVerdict::No(_)));
    let mut v = power_word(&b.w_ac(), b.l());
    let n = b.w_ac().len();
    v[n] = b.w_kk(0, 0).letters()[0].inverse();
    assert!(matches!(is_disk_word(&v, b, 10), DiskVerdict::No(_)));
}

#[test]
fn disk_cells_count_one_hub_and_l_trapezia() {
    let f = fx();
    let b = &f.b;
    let tb = TrapeziumBuilder::new(&b.machine, &f.g);
    let ac = b.w_ac();
    let empty = Computation { history: History(vec![]), trace: vec![ac.clone()] };
    assert_eq!(disk_diagram_cells(&tb, b, &ac, &empty).unwrap(), 1);
    let c = accepting(0);
    let cells = disk_diagram_cells(&tb, b, &b.w_kk(0, 0), &c).unwrap();
    assert_eq!(cells, 1 + b.l() as usize * expected_area(&c));
    assert!(cells >= 1 + b.l() as usize * b.n() * c.len());
    assert!(matches!(disk_diagram_cells(&tb, b, &b.w_kk(2, 2), &c), Err(Error::WitnessInvalid(_))));
}

#[test]
fn toy_trapezium_matches_golden_dump() {
    let toy = ToyRecognizer::even();
    let m = toy.machine().unwrap();
    let p = compile_plain(&m, 3);
    let tb = TrapeziumBuilder::new(&m, &p);
    let h = m.history_from_str("er er acc").unwrap();
    let c = run_history(&m, &toy.input_configuration(&m, 4).unwrap(), &h).unwrap();
    let t = tb.computation_to_trapezium(&c, None).unwrap();
    let dump = t.dump(&m);
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/golden/toy_trapezium.txt");
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(path, &dump).unwrap();
    }
    assert_eq!(dump, std::fs::read_to_string(path).unwrap());
}
