use smachine::compute::run_history;
use smachine::constructors::*;
use smachine::machine::base_of;

fn bundle() -> MainMachineBundle {
    build_main_machine(&ToyRecognizer::even(), DEFAULT_M, DEFAULT_L).unwrap()
}

#[test]
fn main_machine_dimensions() {
    let b = bundle();
    assert_eq!(b.n(), 25);
    assert_eq!(b.machine.num_positive_rules(), 56);
    assert_eq!(b.w_ac().tape_len(b.machine.alphabet()), 0);
    assert_eq!(base_of(&b.w_kk(3, 3), b.machine.alphabet()).len(), 25);
}

#[test]
fn acceptance_witness_replays() {
    let b = bundle();
    for k in [-2i64, 0, 2, 4] {
        let h = b.acceptance_witness(k).unwrap();
        let c = run_history(&b.machine, &b.w_kk(k, k), &h).unwrap();
        assert_eq!(c.end(), &b.w_ac(), "k = {k}");
    }
    assert!(b.acceptance_witness(1).is_none());
}

#[test]
fn input_witness_reaches_w_kk() {
    let b = bundle();
    for k in [-1i64, 0, 1, 3] {
        let h = b.input_witness(k).unwrap();
        let c = run_history(&b.machine, &b.w_st(), &h).unwrap();
        assert_eq!(c.end(), &b.w_kk(k, k), "k = {k}");
    }
}
