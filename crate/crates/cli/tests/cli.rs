use std::path::Path;
use std::process::{Command, Output};

fn smachine(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_smachine")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn build_writes_machine_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.txt");
    let o = smachine(&["build", "--main", "--m", "2", "--L", "12", "--toy-even", "-o", path(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let man = std::fs::read_to_string(dir.path().join("m.txt.manifest.json")).unwrap();
    assert!(man.contains("\"L\": 12") && man.contains("\"m0\": \"toy-even\""));

    // The written machine file loads back and prints identically.
    let again = smachine(&["build", "--file", path(&out)]);
    assert_eq!(code(&again), 0);
    assert_eq!(stdout(&again), std::fs::read_to_string(&out).unwrap());

    // The manifest replays to the same presentation.
    let man_path = dir.path().join("m.txt.manifest.json");
    let a = smachine(&["--manifest", path(&man_path), "compile", "--group", "M"]);
    let b = smachine(&["compile", "--group", "M"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn tampered_manifest_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("m.txt");
    assert_eq!(code(&smachine(&["build", "-o", path(&out)])), 0);
    let man_path = dir.path().join("m.txt.manifest.json");
    // L only shapes the group; m changes the machine itself.
    let man = std::fs::read_to_string(&man_path).unwrap().replace("\"m\": 2", "\"m\": 3");
    std::fs::write(&man_path, man).unwrap();
    let o = smachine(&["--manifest", path(&man_path), "compile"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn compile_gap_style_and_export_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let gap = smachine(&["compile", "--group", "G", "--format", "gap-style"]);
    assert_eq!(code(&gap), 0);
    let text = stdout(&gap);
    assert!(text.contains("FreeGroup(") && text.contains("rels := ["));

    let plain = dir.path().join("g.txt");
    assert_eq!(code(&smachine(&["compile", "--group", "G", "-o", path(&plain)])), 0);
    let back = smachine(&["export", path(&plain), "--format", "plain"]);
    assert_eq!(back.stdout, std::fs::read(&plain).unwrap());
    let via = smachine(&["export", path(&plain)]);
    assert_eq!(via.stdout, gap.stdout);
}

#[test]
fn every_group_compiles() {
    for g in ["G", "M", "Mbar", "Gbar", "Gk", "Gbar-HNN"] {
        let o = smachine(&["compile", "--group", g, "--k", "2"]);
        assert_eq!(code(&o), 0, "{g}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stdout.is_empty());
    }
}

#[test]
fn simulate_prints_the_trace() {
    let o = smachine(&["simulate", "--lr", "--word", "q1 a p1 q2", "--history", "z1(a) z1-2 z2(a)"]);
    assert_eq!(code(&o), 0);
    let lines: Vec<String> = stdout(&o).lines().map(str::to_string).collect();
    assert_eq!(lines.len(), 4);
    assert_eq!(lines[0], "q1 a p1 q2");
    assert!(lines[3].ends_with("q1 a p2 q2"));
    let q = smachine(&["simulate", "--lr", "--word", "q1 a p1 q2", "--history", "z1(a) z1-2 z2(a)", "--quiet"]);
    assert_eq!(stdout(&q), "q1 a p2 q2\n");
}

#[test]
fn inapplicable_history_exits_two() {
    let o = smachine(&["simulate", "--lr", "--word", "q1 a p1 q2", "--history", "z2(a)"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn enumerate_respects_the_limit() {
    let o = smachine(&["enumerate", "--lr", "--word", "q1 a p1 q2", "--depth", "3", "--limit", "4"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert_eq!(out.lines().count(), 4);
    assert!(out.starts_with("- : q1 a p1 q2\n"));
}

#[test]
fn verify_single_suite_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("r.json");
    let o = smachine(&["verify", "--suite", "lr-bound", "--max-tape", "1", "--out", path(&json)]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).starts_with("[PASS] lr-bound"));
    let r = smachine(&["report", path(&json)]);
    assert_eq!(code(&r), 0);
    assert!(stdout(&r).ends_with("1/1 suites passed\n"));
    let j = smachine(&["report", path(&json), "--json"]);
    assert_eq!(j.stdout, std::fs::read(&json).unwrap());
}

#[test]
fn disk_word_with_power() {
    let o = smachine(&["disk", "--kk", "0", "--power"]);
    assert_eq!(code(&o), 0);
    let out = stdout(&o);
    assert!(out.starts_with("disk word: yes\n"));
    assert!(out.lines().any(|l| l.starts_with("cells: ")));
    // W(1,1) is reached from the start configuration.
    let s1 = smachine(&["disk", "--kk", "1", "--power"]);
    assert!(stdout(&s1).contains("witness (s1 -> W)"));
    let n = smachine(&["disk", "--kk", "0"]);
    assert!(stdout(&n).starts_with("disk word: no"));
}

#[test]
fn exit_codes() {
    assert_eq!(code(&smachine(&["bogus"])), 1);
    assert_eq!(code(&smachine(&["verify", "--suite", "nope"])), 1);
    assert_eq!(code(&smachine(&["simulate", "--lr", "--word", "q1 zz q2"])), 1);
    assert_eq!(code(&smachine(&["--help"])), 0);
    let missing = smachine(&["report", "/definitely/missing.json"]);
    assert_eq!(code(&missing), 3);
    assert!(String::from_utf8_lossy(&missing.stderr).contains("/definitely/missing.json"));
}

#[test]
fn repeated_runs_are_byte_identical() {
    for args in [
        &["build", "--m3"][..],
        &["compile", "--group", "Gbar", "--format", "gap-style"],
        &["verify", "--suite", "round-trip", "--words", "20", "--jobs", "2"],
    ] {
        let a = smachine(args);
        let b = smachine(args);
        assert_eq!(code(&a), 0, "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}
