use smachine::blueprint::Blueprint;
use smachine::constructors::*;
use smachine::format::*;

fn shipped() -> Vec<smachine::SMachine> {
    let toy = ToyRecognizer::even();
    let bundle = build_main_machine(&toy, DEFAULT_M, DEFAULT_L).unwrap();
    vec![
        toy.machine().unwrap(),
        build_lr(&["a", "b"]).unwrap(),
        build_lr_m(&["a"], 3).unwrap(),
        build_rl(&["a"]).unwrap(),
        bundle.m3.blueprint.build().unwrap(),
        build_m5(&bundle.m3).unwrap(),
        build_trimmed_machine(&bundle).unwrap(),
        bundle.machine,
    ]
}

#[test]
fn print_parse_round_trip() {
    for m in shipped() {
        let text = print_machine(&m);
        let bp = parse_blueprint(&text).unwrap();
        assert_eq!(bp, Blueprint::from_machine(&m), "{}", m.name);
        let again = print_machine(&parse_machine(&text).unwrap());
        assert_eq!(again, text, "{}", m.name);
    }
}

#[test]
fn toy_text() {
    let text = print_machine(&ToyRecognizer::even().machine().unwrap());
    let expected = "\
machine toy-even
HARDWARE
circular no
part Q0 = q0
part Q1 = q1 q1f
part Q2 = q2
sector 0 = alpha
sector 1 =
RULES
rule er - : q0 -> q0 , q1 q2 -> alpha^-1 alpha^-1 q1 q2 | 0={alpha}
rule acc - : q0 q1 q2 -> q0 q1f q2
DISTINGUISHED
start = q0 q1 q2
end = q0 q1f q2
input = 0
";
    assert_eq!(text, expected);
}

#[test]
fn parse_errors_carry_line_numbers() {
    let bad = "machine x\nHARDWARE\ncircular maybe\n";
    match parse_blueprint(bad) {
        Err(smachine::Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("{other:?}"),
    }
    let text = print_machine(&ToyRecognizer::even().machine().unwrap()).replace("q1 q2 -> alpha", "q1 -> alpha");
    assert!(parse_machine(&text).is_err());
}

#[test]
fn manifest_json_round_trip() {
    let b = build_main_machine(&ToyRecognizer::even(), 2, 12).unwrap();
    let man = Manifest::for_bundle(&b);
    assert_eq!(man.params.n, 25);
    let back = Manifest::from_json(&man.to_json()).unwrap();
    assert_eq!(back, man);
    assert_eq!(man.machine_sha256.len(), 64);
}
