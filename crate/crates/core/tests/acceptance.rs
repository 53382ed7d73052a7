//! One PASS/FAIL line per acceptance criterion; exits nonzero on any FAIL.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use smachine::constructors::*;
use smachine::harness::*;

struct Outcome {
    failures: usize,
}

impl Outcome {
    fn line(&mut self, n: usize, name: &str, ok: bool, took: Duration, detail: String) {
        if !ok {
            self.failures += 1;
        }
        println!("{} {n:>2} {name} ({:.1}s) {detail}", if ok { "PASS" } else { "FAIL" }, took.as_secs_f64());
    }
}

fn timed<T>(f: impl FnOnce() -> T) -> (T, Duration) {
    let t = Instant::now();
    let v = f();
    (v, t.elapsed())
}

fn all_passed(rs: &[Report]) -> bool {
    rs.iter().all(|r| r.passed)
}

fn main() {
    let b = build_main_machine(&ToyRecognizer::even(), DEFAULT_M, DEFAULT_L).expect("main machine");
    let cfg = HarnessConfig::default();
    let mut out = Outcome { failures: 0 };
    let mut runs: BTreeMap<&str, (Vec<Report>, Duration)> = BTreeMap::new();
    for name in SUITES {
        runs.insert(name, timed(|| run_suite(name, &b, &cfg).unwrap_or_else(|e| panic!("{name}: {e}"))));
    }
    let first: Vec<Report> = SUITES.iter().flat_map(|s| runs[s].0.clone()).collect();
    let min = |m: u64| Duration::from_secs(60 * m);
    let get = |name: &str| (&runs[name].0, runs[name].1, &runs[name].0[0]);

    let (rs, t, r) = get("round-trip");
    let words = r.stat("words") / r.stat("machines").max(1);
    out.line(1, "rule-application round trip", all_passed(rs) && words >= 1000 && t < min(1), t,
        format!("{} machines, {} words each, {} inverse checks", r.stat("machines"), words, r.stat("applications")));

    let (rs, t, r) = get("lr-bound");
    out.line(2, "LR length bound", all_passed(rs) && cfg.lr_max_tape >= 4 && t < min(5), t,
        format!("{} computations, min slack {}, violations {}", r.stat("computations"), r.stat("min_slack"), r.stat("violations")));

    let (rs, t, r) = get("wi-bound");
    out.line(3, "two-letter-base bound", all_passed(rs) && cfg.wi_depth >= 8 && r.stat("m3_fragment_words") > 0 && t < min(10), t,
        format!("{} computations from {} words, min slack {}", r.stat("computations"), r.stat("start_words"), r.stat("min_slack")));

    let (rs, t, r) = get("chi");
    let covered = r.stat("two_transition_computations") > 0;
    out.line(4, "χ-occurrence bound", all_passed(rs) && covered && r.stat("max_per_index") <= 1, t,
        format!("{} computations, {} crossing two transitions, max per index {}",
            r.stat("computations"), r.stat("two_transition_computations"), r.stat("max_per_index")));

    let (rs, t, r) = get("language");
    let positives_have_witness = r.rows.iter().all(|row| row["verdict"] != "accepted" || row.contains_key("witness_length"));
    let verdicts: Vec<String> = r.rows.iter().map(|row| format!("k={}:{}({})", row["k"], row["verdict"], row["source"])).collect();
    out.line(5, "accepted-language agreement", all_passed(rs) && positives_have_witness && t < min(15), t, verdicts.join(" "));

    let (rs, t, _) = get("norep");
    let n: i64 = rs.iter().map(|r| r.stat("computations")).sum();
    out.line(6, "no return to W(k,k)", all_passed(rs) && cfg.norep_depth >= 8, t,
        format!("{n} computations from W(0,0) and W(2,2)"));

    let (rs, t, r) = get("presentation");
    out.line(7, "presentation audits", all_passed(rs), t,
        format!("{} relators, {} (θ,a), {} hubs", r.stat("relators"), r.stat("theta_a"), r.stat("hubs")));

    let (rs, t, r) = get("trapezia");
    out.line(8, "trapezium correspondence", all_passed(rs) && r.stat("computations") >= 200, t,
        format!("{} computations, {} cells", r.stat("computations"), r.stat("cells")));

    let (rs, t, r) = get("disk-cells");
    let rows: Vec<String> = r.rows.iter().map(|row| format!("k={}: {} ≥ {}", row["k"], row["cells"], row["lower_bound"])).collect();
    out.line(9, "disk-diagram cell count", all_passed(rs) && !r.rows.is_empty(), t, rows.join(", "));

    // Periodic distinctness belongs to the full suite without a criterion of its own.
    let (rs, _, r) = get("periodic");
    if !all_passed(rs) {
        println!("note: periodic-distinctness suite failed\n{}", r.render());
    }

    let (second, t) = timed(|| run_all(&b, &cfg).expect("second run"));
    let same = reports_to_json(&first) == reports_to_json(&second);
    out.line(10, "determinism", same, t, format!("{} reports compared byte for byte", second.len()));

    for r in first.iter().filter(|r| !r.passed) {
        print!("{}", r.render());
    }
    if out.failures > 0 {
        println!("{} criteria failed", out.failures);
        std::process::exit(1);
    }
}
