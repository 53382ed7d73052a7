//! The machine constructions: running-letter machines, history sectors,
//! control letters, the staged machine M₃, its mirror M₄, the circular M₅,
//! the main machine M and its trimmed version M̄.

use std::collections::BTreeSet;

use crate::blueprint::{set_of, Blueprint, PartDecl, Rewrite, RuleDecl, Sig};
use crate::error::{Error, Result};
use crate::machine::{AdmissibleWord, History, RuleTag, SMachine, SetTag, StageTag};
use crate::word::Letter;

fn locked(n: usize) -> Vec<BTreeSet<String>> {
    vec![BTreeSet::new(); n]
}

fn keep_all(letters: &[String]) -> Vec<Rewrite> {
    letters.iter().map(Rewrite::keep).collect()
}

fn power(name: &str, k: i64) -> Vec<Sig> {
    let s = if k >= 0 { Sig::pos(name) } else { Sig::neg(name) };
    vec![s; k.unsigned_abs() as usize]
}

// ---------------------------------------------------------------------------
// The pluggable recognizer M₁

/// An input recognizer M₁ together with a reference acceptor. The shipped
/// toy accepts `αᵏ` exactly when `k` is even.
#[derive(Clone, Debug)]
pub struct ToyRecognizer {
    pub id: String,
    pub blueprint: Blueprint,
    pub input_letter: String,
}

impl ToyRecognizer {
    /// Parts `Q0 = {q0}`, `Q1 = {q1, q1f}`, `Q2 = {q2}`; input sector 0 over
    /// `{alpha}`. `er` erases `α²`, `acc` moves to the accept letter on
    /// empty tape.
    pub fn even() -> Self {
        let bp = Blueprint {
            name: "toy-even".into(),
            parts: vec![
                PartDecl { name: "Q0".into(), letters: vec!["q0".into()] },
                PartDecl { name: "Q1".into(), letters: vec!["q1".into(), "q1f".into()] },
                PartDecl { name: "Q2".into(), letters: vec!["q2".into()] },
            ],
            sectors: vec![set_of(["alpha"]), BTreeSet::new()],
            circular: false,
            rules: vec![
                RuleDecl {
                    label: "er".into(),
                    tag: RuleTag::NONE,
                    parts: vec![
                        Rewrite::keep("q0"),
                        Rewrite::keep("q1").with(power("alpha", -2), vec![]),
                        Rewrite::keep("q2"),
                    ],
                    domains: vec![set_of(["alpha"]), BTreeSet::new()],
                },
                RuleDecl {
                    label: "acc".into(),
                    tag: RuleTag::NONE,
                    parts: vec![Rewrite::keep("q0"), Rewrite::change("q1", "q1f"), Rewrite::keep("q2")],
                    domains: locked(2),
                },
            ],
            start: vec!["q0".into(), "q1".into(), "q2".into()],
            end: vec!["q0".into(), "q1f".into(), "q2".into()],
            input_sector: Some(0),
        };
        ToyRecognizer { id: "toy-even".into(), blueprint: bp, input_letter: "alpha".into() }
    }

    pub fn machine(&self) -> Result<SMachine> {
        self.blueprint.build()
    }

    /// Reference acceptor, independent of the machine.
    pub fn accepts(&self, k: i64) -> bool {
        k % 2 == 0
    }

    /// An accepting history of M₁ for `αᵏ`, as signed rule labels.
    pub fn accepting_history(&self, k: i64) -> Option<Vec<Sig>> {
        if !self.accepts(k) {
            return None;
        }
        let mut h = power("er", k / 2);
        h.push(Sig::pos("acc"));
        Some(h)
    }

    /// `q0 αᵏ q1 q2`.
    pub fn input_configuration(&self, m: &SMachine, k: i64) -> Result<AdmissibleWord> {
        let a = m.letter(&self.input_letter)?;
        let mut letters = vec![Letter::new(m.start[0])];
        letters.extend(std::iter::repeat_n(Letter::signed(a, k < 0), k.unsigned_abs() as usize));
        letters.extend(m.start[1..].iter().map(|&s| Letter::new(s)));
        AdmissibleWord::new(&m.hardware, letters)
    }
}

// ---------------------------------------------------------------------------
// Running state letters

/// `LR_m(Y)`: the letter of `P` sweeps between `q1` and `q2` `2m` times.
/// Odd phases move left turning `a` into `a'`, even phases move right
/// turning `a'` back into `a`. Odd turns lock the left sector, even turns
/// the right one.
pub fn build_lr_m(y: &[&str], m: usize) -> Result<SMachine> {
    if y.is_empty() {
        return Err(Error::EmptyAlphabet);
    }
    if m == 0 {
        return Err(Error::InvalidM(m));
    }
    let y1: Vec<String> = y.iter().map(|s| s.to_string()).collect();
    let y2: Vec<String> = y.iter().map(|s| format!("{s}'")).collect();
    let phases = 2 * m;
    let p: Vec<String> = (1..=phases).map(|i| format!("p{i}")).collect();
    let mut rules = Vec::new();
    for i in 1..=phases {
        for (a, a2) in y1.iter().zip(&y2) {
            let (left, right) = if i % 2 == 1 {
                (vec![Sig::neg(a.as_str())], vec![Sig::pos(a2.as_str())])
            } else {
                (vec![Sig::pos(a.as_str())], vec![Sig::neg(a2.as_str())])
            };
            rules.push(RuleDecl {
                label: format!("z{i}({a})"),
                tag: RuleTag::NONE,
                parts: vec![
                    Rewrite::keep("q1"),
                    Rewrite::keep(p[i - 1].clone()).with(left, right),
                    Rewrite::keep("q2"),
                ],
                domains: vec![set_of(&y1), set_of(&y2)],
            });
        }
        if i < phases {
            let domains = if i % 2 == 1 {
                vec![BTreeSet::new(), set_of(&y2)]
            } else {
                vec![set_of(&y1), BTreeSet::new()]
            };
            rules.push(RuleDecl {
                label: format!("z{i}-{}", i + 1),
                tag: RuleTag::NONE,
                parts: vec![
                    Rewrite::keep("q1"),
                    Rewrite::change(p[i - 1].clone(), p[i].clone()),
                    Rewrite::keep("q2"),
                ],
                domains,
            });
        }
    }
    let all: BTreeSet<String> = y1.iter().chain(&y2).cloned().collect();
    Blueprint {
        name: if m == 1 { "LR".into() } else { format!("LR{m}") },
        parts: vec![
            PartDecl { name: "Q1".into(), letters: vec!["q1".into()] },
            PartDecl { name: "P".into(), letters: p.clone() },
            PartDecl { name: "Q2".into(), letters: vec!["q2".into()] },
        ],
        sectors: vec![all.clone(), all],
        circular: false,
        rules,
        start: vec!["q1".into(), p[0].clone(), "q2".into()],
        end: vec!["q1".into(), p[phases - 1].clone(), "q2".into()],
        input_sector: None,
    }
    .build()
}

pub fn build_lr(y: &[&str]) -> Result<SMachine> {
    build_lr_m(y, 1)
}

/// `RL(Y)`: the mirror-image sweep. `r1` starts next to `q1` and moves right
/// turning `a` into `a'`, turns at `q2`, and `r2` moves back.
pub fn build_rl(y: &[&str]) -> Result<SMachine> {
    if y.is_empty() {
        return Err(Error::EmptyAlphabet);
    }
    let y1: Vec<String> = y.iter().map(|s| s.to_string()).collect();
    let y2: Vec<String> = y.iter().map(|s| format!("{s}'")).collect();
    let mut rules = Vec::new();
    for (phase, run) in [(1, "r1"), (2, "r2")] {
        for (a, a2) in y1.iter().zip(&y2) {
            let (left, right) = if phase == 1 {
                (vec![Sig::pos(a2.as_str())], vec![Sig::neg(a.as_str())])
            } else {
                (vec![Sig::neg(a2.as_str())], vec![Sig::pos(a.as_str())])
            };
            rules.push(RuleDecl {
                label: format!("x{phase}({a})"),
                tag: RuleTag::NONE,
                parts: vec![Rewrite::keep("q1"), Rewrite::keep(run).with(left, right), Rewrite::keep("q2")],
                domains: vec![set_of(&y2), set_of(&y1)],
            });
        }
    }
    rules.push(RuleDecl {
        label: "x1-2".into(),
        tag: RuleTag::NONE,
        parts: vec![Rewrite::keep("q1"), Rewrite::change("r1", "r2"), Rewrite::keep("q2")],
        domains: vec![set_of(&y2), BTreeSet::new()],
    });
    let all: BTreeSet<String> = y1.iter().chain(&y2).cloned().collect();
    Blueprint {
        name: "RL".into(),
        parts: vec![
            PartDecl { name: "Q1".into(), letters: vec!["q1".into()] },
            PartDecl { name: "R".into(), letters: vec!["r1".into(), "r2".into()] },
            PartDecl { name: "Q2".into(), letters: vec!["q2".into()] },
        ],
        sectors: vec![all.clone(), all],
        circular: false,
        rules,
        start: vec!["q1".into(), "r1".into(), "q2".into()],
        end: vec!["q1".into(), "r2".into(), "q2".into()],
        input_sector: None,
    }
    .build()
}

// ---------------------------------------------------------------------------
// History sectors and control letters

/// A history sector together with its left/right letter pairs, one pair per
/// positive rule of M₁ (in M₁'s rule order).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HistorySector {
    pub sector: usize,
    pub pairs: Vec<(String, String)>,
}

impl HistorySector {
    pub fn left_letters(&self) -> BTreeSet<String> {
        self.pairs.iter().map(|p| p.0.clone()).collect()
    }

    pub fn right_letters(&self) -> BTreeSet<String> {
        self.pairs.iter().map(|p| p.1.clone()).collect()
    }

    pub fn all_letters(&self) -> BTreeSet<String> {
        self.pairs.iter().flat_map(|p| [p.0.clone(), p.1.clone()]).collect()
    }

    fn pair(&self, rule: &str, labels: &[String]) -> &(String, String) {
        &self.pairs[labels.iter().position(|l| l == rule).expect("rule of M1")]
    }
}

/// A machine carrying history sectors: M₂, M̄₂, and their descendants.
#[derive(Clone, Debug)]
pub struct HistoryMachine {
    pub blueprint: Blueprint,
    pub history: Vec<HistorySector>,
    /// Positive rule labels of M₁.
    pub m1_rules: Vec<String>,
}

pub fn history_letter(rule: &str, i: usize, right: bool) -> String {
    format!("{rule}_h{i}{}", if right { 'r' } else { 'l' })
}

/// M₂: every part `Qᵢ` (0 < i < n) splits into `Qᵢ,ℓ Qᵢ,r` with a history
/// sector between them; `θ_h` reads `h_θ` off the left end of each history
/// sector and appends `h̄_θ` at its right end.
pub fn add_history_sectors(m1: &Blueprint) -> Result<HistoryMachine> {
    let input = m1.input_sector.ok_or(Error::NoInputSector)?;
    if m1.circular {
        return Err(Error::InvalidMachine("M1 must not be circular".into()));
    }
    let n = m1.num_parts() - 1;
    let lname = |q: &str| format!("{q}_l");
    let rname = |q: &str| format!("{q}_r");
    let labels: Vec<String> = m1.rules.iter().map(|r| r.label.clone()).collect();
    let history: Vec<HistorySector> = (1..n)
        .map(|i| HistorySector {
            sector: 2 * i - 1,
            pairs: labels
                .iter()
                .map(|l| (history_letter(l, i, false), history_letter(l, i, true)))
                .collect(),
        })
        .collect();

    // part order: Q0.r, Q1.l, Q1.r, ..., Qn.l
    let mut parts = Vec::new();
    let mut sectors = Vec::new();
    for (i, p) in m1.parts.iter().enumerate() {
        if i > 0 {
            parts.push(PartDecl {
                name: lname(&p.name),
                letters: p.letters.iter().map(|q| lname(q)).collect(),
            });
        }
        if i > 0 && i < n {
            sectors.push(history[i - 1].all_letters());
        }
        if i < n {
            parts.push(PartDecl {
                name: rname(&p.name),
                letters: p.letters.iter().map(|q| rname(q)).collect(),
            });
            sectors.push(m1.sectors[i].clone());
        }
    }
    let rules = m1
        .rules
        .iter()
        .map(|r| {
            let mut ps = Vec::new();
            let mut domains = Vec::new();
            for (i, p) in r.parts.iter().enumerate() {
                if i > 0 {
                    let right = if i < n { vec![Sig::neg(history_letter(&r.label, i, false))] } else { vec![] };
                    ps.push(Rewrite { from: lname(&p.from), to: lname(&p.to), left: p.left.clone(), right });
                }
                if i > 0 && i < n {
                    domains.push(history[i - 1].all_letters());
                }
                if i < n {
                    let left = if i > 0 { vec![Sig::pos(history_letter(&r.label, i, true))] } else { vec![] };
                    ps.push(Rewrite { from: rname(&p.from), to: rname(&p.to), left, right: p.right.clone() });
                    domains.push(r.domains[i].clone());
                }
            }
            RuleDecl { label: r.label.clone(), tag: r.tag, parts: ps, domains }
        })
        .collect();
    let copy = |v: &[String]| {
        let mut out = Vec::new();
        for (i, q) in v.iter().enumerate() {
            if i > 0 {
                out.push(lname(q));
            }
            if i < n {
                out.push(rname(q));
            }
        }
        out
    };
    Ok(HistoryMachine {
        blueprint: Blueprint {
            name: "M2".into(),
            parts,
            sectors,
            circular: false,
            rules,
            start: copy(&m1.start),
            end: copy(&m1.end),
            input_sector: Some(2 * input),
        },
        history,
        m1_rules: labels,
    })
}

/// M̄₂: every part `Qᵢ` becomes `PᵢQᵢRᵢ`; the `PQ` and `QR` sectors are
/// always locked, and a part `q → a q' b` becomes `p → a p`, `q → q'`,
/// `r → r b`.
pub fn add_control_letters(m2: &HistoryMachine) -> Result<HistoryMachine> {
    let bp = &m2.blueprint;
    let s = bp.num_parts();
    let pl = |i: usize| format!("p{i}");
    let rl = |i: usize| format!("r{i}");
    let mut parts = Vec::new();
    let mut sectors = Vec::new();
    for (i, p) in bp.parts.iter().enumerate() {
        parts.push(PartDecl { name: format!("P{i}"), letters: vec![pl(i)] });
        parts.push(p.clone());
        parts.push(PartDecl { name: format!("R{i}"), letters: vec![rl(i)] });
        sectors.push(BTreeSet::new());
        sectors.push(BTreeSet::new());
        if i + 1 < s {
            sectors.push(bp.sectors[i].clone());
        }
    }
    let rules = bp
        .rules
        .iter()
        .map(|r| {
            let mut ps = Vec::new();
            let mut domains = Vec::new();
            for (i, p) in r.parts.iter().enumerate() {
                ps.push(Rewrite::keep(pl(i)).with(p.left.clone(), vec![]));
                ps.push(Rewrite::change(p.from.clone(), p.to.clone()));
                ps.push(Rewrite::keep(rl(i)).with(vec![], p.right.clone()));
                domains.push(BTreeSet::new());
                domains.push(BTreeSet::new());
                if i + 1 < s {
                    domains.push(r.domains[i].clone());
                }
            }
            RuleDecl { label: r.label.clone(), tag: r.tag, parts: ps, domains }
        })
        .collect();
    let wrap = |v: &[String]| {
        v.iter()
            .enumerate()
            .flat_map(|(i, q)| [pl(i), q.clone(), rl(i)])
            .collect::<Vec<_>>()
    };
    Ok(HistoryMachine {
        blueprint: Blueprint {
            name: "M2bar".into(),
            parts,
            sectors,
            circular: false,
            rules,
            start: wrap(&bp.start),
            end: wrap(&bp.end),
            input_sector: bp.input_sector.map(|j| 3 * j + 2),
        },
        history: m2
            .history
            .iter()
            .map(|h| HistorySector { sector: 3 * h.sector + 2, pairs: h.pairs.clone() })
            .collect(),
        m1_rules: m2.m1_rules.clone(),
    })
}

// ---------------------------------------------------------------------------
// M₃

/// What a stage of M₃ runs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StageKind {
    /// Copies of RL in every history sector (the `R` letter runs).
    RunRight,
    /// A copy of M̄₂.
    Forward,
    /// Copies of LR in every history sector (the `P` letter runs).
    RunLeft,
    /// Copies of the negative rules of M̄₂.
    Backward,
}

/// Stage `k` of `4m + 1`. The last stage is a forward copy of M̄₂, so that
/// the end configuration carries the history in the right alphabets.
pub fn stage_kind(k: usize, m: usize) -> StageKind {
    if k == 4 * m + 1 {
        return StageKind::Forward;
    }
    match k % 4 {
        1 => StageKind::RunRight,
        2 => StageKind::Forward,
        3 => StageKind::RunLeft,
        _ => StageKind::Backward,
    }
}

fn at(name: &str, k: usize) -> String {
    format!("{name}@{k}")
}

fn run_letter(name: &str, phase: usize, k: usize) -> String {
    format!("{name}_{phase}@{k}")
}

pub fn rl_label(phase: usize, rule: &str, k: usize) -> String {
    format!("rl{phase}({rule})@{k}")
}

pub fn lr_label(phase: usize, rule: &str, k: usize) -> String {
    format!("lr{phase}({rule})@{k}")
}

pub fn forward_label(rule: &str, k: usize) -> String {
    format!("{rule}@{k}")
}

pub fn backward_label(rule: &str, k: usize) -> String {
    format!("inv_{rule}@{k}")
}

pub fn chi_label(k: usize) -> String {
    format!("chi{k}-{}", k + 1)
}

/// The staged machine M₃ plus the bookkeeping later constructions need.
#[derive(Clone, Debug)]
pub struct StagedMachine {
    pub blueprint: Blueprint,
    pub history: Vec<HistorySector>,
    pub m1_rules: Vec<String>,
    pub m: usize,
    pub stages: usize,
    /// Start letters of M̄₂; stage letters and set letters derive from them.
    pub base: Vec<String>,
}

/// Letters of stage `k` in each part: `(start, end, all)`.
fn stage_letters(m2bar: &Blueprint, hist: &[HistorySector], kind: StageKind, k: usize) -> Vec<(String, String, Vec<String>)> {
    let running: BTreeSet<usize> = match kind {
        StageKind::RunRight => hist.iter().map(|h| h.sector).collect(),
        StageKind::RunLeft => hist.iter().map(|h| h.sector + 1).collect(),
        _ => BTreeSet::new(),
    };
    m2bar
        .parts
        .iter()
        .enumerate()
        .map(|(j, p)| match kind {
            StageKind::Forward | StageKind::Backward => {
                let (s, e) = if kind == StageKind::Forward {
                    (&m2bar.start[j], &m2bar.end[j])
                } else {
                    (&m2bar.end[j], &m2bar.start[j])
                };
                (at(s, k), at(e, k), p.letters.iter().map(|q| at(q, k)).collect())
            }
            _ => {
                let base = &m2bar.start[j];
                if running.contains(&j) {
                    let (a, b) = (run_letter(base, 1, k), run_letter(base, 2, k));
                    (a.clone(), b.clone(), vec![a, b])
                } else {
                    let a = at(base, k);
                    (a.clone(), a.clone(), vec![a])
                }
            }
        })
        .collect()
}

fn stage_tag(k: usize) -> RuleTag {
    RuleTag::stage(StageTag::Stage(k as u16))
}

/// M₃: `4m + 1` stages `RL, M̄₂, LR, M̄₂⁻¹, …`, joined by χ-rules. The base
/// is that of M̄₂; every stage has its own state letters.
pub fn compose_m3(m2bar: &HistoryMachine, m: usize) -> Result<StagedMachine> {
    if m == 0 {
        return Err(Error::InvalidM(m));
    }
    let bp = &m2bar.blueprint;
    let hist = &m2bar.history;
    let input = bp.input_sector.ok_or(Error::NoInputSector)?;
    let nparts = bp.num_parts();
    let nsec = bp.num_sectors();
    let labels = &m2bar.m1_rules;
    for h in hist {
        if h.sector + 2 >= nparts || !bp.sectors[h.sector - 1].is_empty() || !bp.sectors[h.sector + 1].is_empty() {
            return Err(Error::StageMismatch(format!("history sector {} is not flanked by control letters", h.sector)));
        }
    }
    let stages = 4 * m + 1;
    let letters: Vec<Vec<(String, String, Vec<String>)>> =
        (1..=stages).map(|k| stage_letters(bp, hist, stage_kind(k, m), k)).collect();

    let mut sectors = bp.sectors.clone();
    for h in hist {
        sectors[h.sector - 1].extend(h.all_letters());
        sectors[h.sector + 1].extend(h.all_letters());
    }
    let input_dom = bp.sectors[input].clone();

    let mut rules = Vec::new();
    for k in 1..=stages {
        let kind = stage_kind(k, m);
        let st = &letters[k - 1];
        let tag = stage_tag(k);
        let base_parts = || -> Vec<Rewrite> { st.iter().map(|(s, _, _)| Rewrite::keep(s.clone())).collect() };
        match kind {
            StageKind::Forward | StageKind::Backward => {
                for r in &bp.rules {
                    let r = if kind == StageKind::Forward {
                        r.clone()
                    } else {
                        r.inverted(r.label.clone())
                    };
                    let label = if kind == StageKind::Forward {
                        forward_label(&r.label, k)
                    } else {
                        backward_label(&r.label, k)
                    };
                    rules.push(RuleDecl {
                        label,
                        tag,
                        parts: r
                            .parts
                            .iter()
                            .map(|p| Rewrite { from: at(&p.from, k), to: at(&p.to, k), left: p.left.clone(), right: p.right.clone() })
                            .collect(),
                        domains: r.domains.clone(),
                    });
                }
            }
            StageKind::RunRight | StageKind::RunLeft => {
                // (running part, sector on the left, sector on the right)
                let windows: Vec<(usize, usize, usize, &HistorySector)> = hist
                    .iter()
                    .map(|h| match kind {
                        StageKind::RunRight => (h.sector, h.sector - 1, h.sector, h),
                        _ => (h.sector + 1, h.sector, h.sector + 1, h),
                    })
                    .collect();
                let with_input = |mut d: Vec<BTreeSet<String>>| {
                    if kind == StageKind::RunRight {
                        d[input] = input_dom.clone();
                    }
                    d
                };
                let tagname = if kind == StageKind::RunRight { "rl" } else { "lr" };
                for phase in 1..=2usize {
                    for rule in labels {
                        let mut parts = base_parts();
                        let mut domains = with_input(locked(nsec));
                        for &(run, ls, rs, h) in &windows {
                            let (l, r) = h.pair(rule, labels);
                            let name = run_letter(&bp.start[run], phase, k);
                            // RL: Y⁽¹⁾ = left alphabet, LR: Y⁽¹⁾ = right alphabet.
                            let (y1, y2, d1, d2) = if kind == StageKind::RunRight {
                                (l, r, h.left_letters(), h.right_letters())
                            } else {
                                (r, l, h.right_letters(), h.left_letters())
                            };
                            let (left, right) = match (kind, phase) {
                                (StageKind::RunRight, 1) => (vec![Sig::pos(y2.as_str())], vec![Sig::neg(y1.as_str())]),
                                (StageKind::RunRight, _) => (vec![Sig::neg(y2.as_str())], vec![Sig::pos(y1.as_str())]),
                                (_, 1) => (vec![Sig::neg(y1.as_str())], vec![Sig::pos(y2.as_str())]),
                                (_, _) => (vec![Sig::pos(y1.as_str())], vec![Sig::neg(y2.as_str())]),
                            };
                            parts[run] = Rewrite::keep(name).with(left, right);
                            if kind == StageKind::RunRight {
                                domains[ls] = d2;
                                domains[rs] = d1;
                            } else {
                                domains[ls] = d1;
                                domains[rs] = d2;
                            }
                        }
                        rules.push(RuleDecl {
                            label: format!("{tagname}{phase}({rule})@{k}"),
                            tag,
                            parts,
                            domains,
                        });
                    }
                }
                let mut parts = base_parts();
                let mut domains = with_input(locked(nsec));
                for &(run, ls, rs, h) in &windows {
                    let base = &bp.start[run];
                    parts[run] = Rewrite::change(run_letter(base, 1, k), run_letter(base, 2, k));
                    if kind == StageKind::RunRight {
                        domains[ls] = h.right_letters();
                    } else {
                        domains[rs] = h.left_letters();
                    }
                }
                rules.push(RuleDecl { label: format!("{tagname}1-2@{k}"), tag, parts, domains });
            }
        }
        if k < stages {
            let next = &letters[k];
            let mut domains = locked(nsec);
            let (hist_right, with_input) = match kind {
                StageKind::RunRight => (false, true),
                StageKind::Forward | StageKind::RunLeft => (true, false),
                StageKind::Backward => (false, true),
            };
            for h in hist {
                domains[h.sector] = if hist_right { h.right_letters() } else { h.left_letters() };
            }
            if with_input {
                domains[input] = input_dom.clone();
            }
            rules.push(RuleDecl {
                label: chi_label(k),
                tag: RuleTag::stage(StageTag::Chi(k as u16)),
                parts: st.iter().zip(next).map(|(a, b)| Rewrite::change(a.1.clone(), b.0.clone())).collect(),
                domains,
            });
        }
    }

    let parts = bp
        .parts
        .iter()
        .enumerate()
        .map(|(j, p)| PartDecl {
            name: p.name.clone(),
            letters: letters.iter().flat_map(|st| st[j].2.clone()).collect(),
        })
        .collect();
    Ok(StagedMachine {
        blueprint: Blueprint {
            name: "M3".into(),
            parts,
            sectors,
            circular: false,
            rules,
            start: letters[0].iter().map(|x| x.0.clone()).collect(),
            end: letters[stages - 1].iter().map(|x| x.1.clone()).collect(),
            input_sector: Some(input),
        },
        history: hist.clone(),
        m1_rules: labels.clone(),
        m,
        stages,
        base: bp.start.clone(),
    })
}

/// M₀ → M₂ → M̄₂ → M₃.
pub fn build_m3(m1: &ToyRecognizer, m: usize) -> Result<StagedMachine> {
    compose_m3(&add_control_letters(&add_history_sectors(&m1.blueprint)?)?, m)
}

// ---------------------------------------------------------------------------
// Mirror and circular closure

pub fn mirror_name(name: &str) -> String {
    format!("{name}'")
}

fn mirror_set(s: &BTreeSet<String>) -> BTreeSet<String> {
    s.iter().map(|x| mirror_name(x)).collect()
}

fn mirror_word(w: &[Sig]) -> Vec<Sig> {
    w.iter().rev().map(|s| Sig { name: mirror_name(&s.name), inv: !s.inv }).collect()
}

/// M₄ with base `B(B')⁻¹`. A mirror part holds positive letters standing for
/// the inverses of the copied letters, so `q → a q' b` becomes
/// `x → (b')⁻¹ x' (a')⁻¹` there. The junction sector is locked.
pub fn mirror_m4(bp: &Blueprint) -> Blueprint {
    let n = bp.num_parts();
    let mut parts = bp.parts.clone();
    for p in bp.parts.iter().rev() {
        parts.push(PartDecl { name: mirror_name(&p.name), letters: p.letters.iter().map(|l| mirror_name(l)).collect() });
    }
    let mut sectors = bp.sectors.clone();
    sectors.push(BTreeSet::new());
    sectors.extend(bp.sectors.iter().rev().map(mirror_set));
    let rules = bp
        .rules
        .iter()
        .map(|r| {
            let mut ps = r.parts.clone();
            ps.extend(r.parts.iter().rev().map(|p| Rewrite {
                from: mirror_name(&p.from),
                to: mirror_name(&p.to),
                left: mirror_word(&p.right),
                right: mirror_word(&p.left),
            }));
            let mut domains = r.domains.clone();
            domains.push(BTreeSet::new());
            domains.extend(r.domains.iter().rev().map(mirror_set));
            RuleDecl { label: r.label.clone(), tag: r.tag, parts: ps, domains }
        })
        .collect();
    let both = |v: &[String]| {
        let mut out = v.to_vec();
        out.extend(v.iter().rev().map(|x| mirror_name(x)));
        out
    };
    debug_assert_eq!(parts.len(), 2 * n);
    Blueprint {
        name: format!("{}-mirror", bp.name),
        parts,
        sectors,
        circular: false,
        rules,
        start: both(&bp.start),
        end: both(&bp.end),
        input_sector: bp.input_sector,
    }
}

/// Mirror image of sector `s` of a base of `n` parts inside `B(B')⁻¹`.
pub fn mirror_sector(n: usize, s: usize) -> usize {
    2 * n - 2 - s
}

pub const T_LETTER: &str = "t";

/// Adds the part `{t}` in front and closes the base into a cycle; both
/// sectors next to `t` are locked by every rule.
pub fn circularize_m5(bp: &Blueprint) -> Blueprint {
    let mut parts = vec![PartDecl { name: "T".into(), letters: vec![T_LETTER.into()] }];
    parts.extend(bp.parts.iter().cloned());
    let mut sectors = vec![BTreeSet::new()];
    sectors.extend(bp.sectors.iter().cloned());
    sectors.push(BTreeSet::new());
    let rules = bp
        .rules
        .iter()
        .map(|r| {
            let mut ps = vec![Rewrite::keep(T_LETTER)];
            ps.extend(r.parts.iter().cloned());
            let mut domains = vec![BTreeSet::new()];
            domains.extend(r.domains.iter().cloned());
            domains.push(BTreeSet::new());
            RuleDecl { label: r.label.clone(), tag: r.tag, parts: ps, domains }
        })
        .collect();
    let with_t = |v: &[String]| {
        let mut out = vec![T_LETTER.to_string()];
        out.extend(v.iter().cloned());
        out
    };
    Blueprint {
        name: format!("{}-circular", bp.name),
        parts,
        sectors,
        circular: true,
        rules,
        start: with_t(&bp.start),
        end: with_t(&bp.end),
        input_sector: bp.input_sector.map(|s| s + 1),
    }
}

/// Position of a half-base part/sector inside `{t}B(B')⁻¹`.
pub fn circular_part(n: usize, j: usize, mirror: bool) -> usize {
    if mirror {
        2 * n - j
    } else {
        j + 1
    }
}

pub fn circular_sector(n: usize, s: usize, mirror: bool) -> usize {
    if mirror {
        mirror_sector(n, s) + 1
    } else {
        s + 1
    }
}

// ---------------------------------------------------------------------------
// The main machine

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Parameters {
    pub m: usize,
    #[serde(rename = "L")]
    pub l: u32,
    #[serde(rename = "N")]
    pub n: usize,
    /// Recorded only; no construction depends on it.
    pub c4: Option<u64>,
}

pub const DEFAULT_M: usize = 2;
pub const DEFAULT_L: u32 = 12;

pub fn set_suffix(set: &str) -> String {
    format!("~{set}")
}

/// Labels of the single-rule families of M.
pub mod labels {
    pub const START: &str = "start";
    pub const ACCEPT: &str = "accept";
    pub const INSERT_INPUT: &str = "in(alpha)";
    pub const T12: &str = "t12";
    pub const T23: &str = "t23";
    pub const T34: &str = "t34";
    pub const T45: &str = "t45";

    pub fn insert_history(rule: &str) -> String {
        format!("ins({rule})")
    }

    pub fn erase_history(rule: &str) -> String {
        format!("era({rule})")
    }

    pub fn lr_m(phase: usize, letter: &str) -> String {
        format!("z{phase}({letter})")
    }

    pub fn lr_m_turn(phase: usize) -> String {
        format!("z{phase}-{}", phase + 1)
    }
}

/// The main machine M with its distinguished words.
#[derive(Clone, Debug)]
pub struct MainMachineBundle {
    pub machine: SMachine,
    pub blueprint: Blueprint,
    pub params: Parameters,
    pub m0_id: String,
    pub m3: StagedMachine,
    /// Number of parts of the half base `B₃`.
    pub half: usize,
    /// Input sector and history sectors of `B₃`.
    pub input_sector: usize,
    pub history_sectors: Vec<usize>,
    pub input_letter: String,
    pub copy_letter: String,
    /// State letters of the sets, per part (index 0 is `t`).
    pub st_letters: Vec<String>,
    pub set1_letters: Vec<String>,
    pub set3_letters: Vec<String>,
    pub ac_letters: Vec<String>,
    pub toy: ToyRecognizer,
}

impl MainMachineBundle {
    pub fn w_st(&self) -> AdmissibleWord {
        self.machine.start_configuration()
    }

    pub fn w_ac(&self) -> AdmissibleWord {
        self.machine.end_configuration()
    }

    /// `s₁(M)`: all state letters are start letters of Θ₁, empty tape.
    pub fn s1(&self) -> AdmissibleWord {
        let syms: Vec<_> = self.set1_letters.iter().map(|n| self.machine.letter(n).unwrap()).collect();
        self.machine.configuration(&syms)
    }

    pub fn input_sector_main(&self) -> usize {
        circular_sector(self.half, self.input_sector, false)
    }

    pub fn mirror_input_sector_main(&self) -> usize {
        circular_sector(self.half, self.input_sector, true)
    }

    /// `W(k,k') ≡ w₁ αᵏ w₂ (α')^{−k'} w₃`, the words in the domain of θ(23)⁻¹.
    pub fn w_kk(&self, k: i64, k2: i64) -> AdmissibleWord {
        let m = &self.machine;
        let alpha = m.letter(&self.input_letter).unwrap();
        let alpha_m = m.letter(&mirror_name(&self.input_letter)).unwrap();
        let (s1, s2) = (self.input_sector_main(), self.mirror_input_sector_main());
        let mut letters = Vec::new();
        for (j, name) in self.set3_letters.iter().enumerate() {
            letters.push(Letter::new(m.letter(name).unwrap()));
            if j == s1 {
                letters.extend(std::iter::repeat_n(Letter::signed(alpha, k < 0), k.unsigned_abs() as usize));
            }
            if j == s2 {
                let inv = k2 > 0;
                letters.extend(std::iter::repeat_n(Letter::signed(alpha_m, inv), k2.unsigned_abs() as usize));
            }
        }
        AdmissibleWord::new(&m.hardware, letters).expect("W(k,k') is admissible")
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn l(&self) -> u32 {
        self.params.l
    }

    fn sig_rule(&self, label: &str, inv: bool) -> Result<crate::machine::RuleRef> {
        let r = self.machine.find(label)?;
        Ok(if inv { r.inverse() } else { r })
    }

    fn resolve(&self, steps: &[(String, bool)]) -> Result<History> {
        steps.iter().map(|(l, inv)| self.sig_rule(l, *inv)).collect::<Result<Vec<_>>>().map(History)
    }

    /// A computation `W(k,k) → … → W_ac` avoiding Θ₁ and Θ₂, assembled
    /// from an accepting history of M₀: Θ₃ writes the history, Θ₄ runs M₅
    /// stage by stage, Θ₅ erases the history.
    pub fn acceptance_witness(&self, k: i64) -> Option<History> {
        let h = self.toy.accepting_history(k)?;
        let mut steps: Vec<(String, bool)> = Vec::new();
        for s in h.iter().rev() {
            steps.push((labels::insert_history(&s.name), s.inv));
        }
        steps.push((labels::T34.into(), false));
        let stages = self.m3.stages;
        for k in 1..=stages {
            match stage_kind(k, self.params.m) {
                StageKind::RunRight => {
                    steps.extend(h.iter().map(|s| (rl_label(1, &s.name, k), s.inv)));
                    steps.push((format!("rl1-2@{k}"), false));
                    steps.extend(h.iter().rev().map(|s| (rl_label(2, &s.name, k), s.inv)));
                }
                StageKind::RunLeft => {
                    steps.extend(h.iter().rev().map(|s| (lr_label(1, &s.name, k), s.inv)));
                    steps.push((format!("lr1-2@{k}"), false));
                    steps.extend(h.iter().map(|s| (lr_label(2, &s.name, k), s.inv)));
                }
                StageKind::Forward => steps.extend(h.iter().map(|s| (forward_label(&s.name, k), s.inv))),
                StageKind::Backward => {
                    steps.extend(h.iter().rev().map(|s| (backward_label(&s.name, k), s.inv)))
                }
            }
            if k < stages {
                steps.push((chi_label(k), false));
            }
        }
        steps.push((labels::T45.into(), false));
        steps.extend(h.iter().map(|s| (labels::erase_history(&s.name), s.inv)));
        steps.push((labels::ACCEPT.into(), false));
        self.resolve(&steps).ok()
    }

    /// A computation `W_st → … → W(k,k)`: θ₁, Θ₁ inserts `αᵏ`, θ(12),
    /// `LR_m` sweeps, θ(23).
    pub fn input_witness(&self, k: i64) -> Result<History> {
        let mut out = vec![self.sig_rule(labels::START, false)?];
        for _ in 0..k.unsigned_abs() {
            out.push(self.sig_rule(labels::INSERT_INPUT, k < 0)?);
        }
        out.push(self.sig_rule(labels::T12, false)?);
        let n = k.unsigned_abs() as usize;
        let phases = 2 * self.params.m;
        for phase in 1..=phases {
            for _ in 0..n {
                out.push(self.sig_rule(&labels::lr_m(phase, &self.input_letter), k < 0)?);
            }
            if phase < phases {
                out.push(self.sig_rule(&labels::lr_m_turn(phase), false)?);
            }
        }
        out.push(self.sig_rule(labels::T23, false)?);
        Ok(History(out))
    }
}

/// Builds M from M₀, `m` and `L`.
pub fn build_main_machine(m0: &ToyRecognizer, m: usize, l: u32) -> Result<MainMachineBundle> {
    if m == 0 {
        return Err(Error::BadParameters("m must be at least 1".into()));
    }
    if l < 2 {
        return Err(Error::BadParameters("L must be at least 2".into()));
    }
    let m3 = build_m3(m0, m)?;
    let b3 = &m3.blueprint;
    let n = b3.num_parts();
    let nsec = b3.num_sectors();
    let input = b3.input_sector.ok_or(Error::NoInputSector)?;
    let alpha = m0.input_letter.clone();
    let copy = format!("{alpha}#");
    let run = input + 1; // the P part right of the input sector
    let right_of_run = input + 1;

    let base = &m3.base;
    let names = |set: &str| -> Vec<String> { base.iter().map(|b| format!("{b}{}", set_suffix(set))).collect() };
    let st = names("st");
    let s1 = names("1");
    let s3 = names("3");
    let s5 = names("5");
    let ac = names("ac");
    let phases = 2 * m;
    let s2_run: Vec<String> = (1..=phases).map(|i| format!("{}_{i}{}", base[run], set_suffix("2"))).collect();
    let s2_start: Vec<String> =
        names("2").into_iter().enumerate().map(|(j, x)| if j == run { s2_run[0].clone() } else { x }).collect();
    let s2_end: Vec<String> = s2_start
        .iter()
        .enumerate()
        .map(|(j, x)| if j == run { s2_run[phases - 1].clone() } else { x.clone() })
        .collect();

    let a_set = set_of([alpha.as_str()]);
    let c_set = set_of([copy.as_str()]);
    let hist = &m3.history;
    let mut rules = Vec::new();
    let transition = |label: &str, tag: SetTag, from: &[String], to: &[String], domains: Vec<BTreeSet<String>>| RuleDecl {
        label: label.into(),
        tag: RuleTag::set(tag),
        parts: from.iter().zip(to).map(|(a, b)| Rewrite::change(a.clone(), b.clone())).collect(),
        domains,
    };
    let only_input = || {
        let mut d = locked(nsec);
        d[input] = a_set.clone();
        d
    };

    rules.push(transition(labels::START, SetTag::Start, &st, &s1, locked(nsec)));
    let mut parts = keep_all(&s1);
    parts[run] = Rewrite::keep(s1[run].clone()).with(vec![Sig::pos(alpha.as_str())], vec![]);
    rules.push(RuleDecl { label: labels::INSERT_INPUT.into(), tag: RuleTag::set(SetTag::Set(1)), parts, domains: only_input() });
    rules.push(transition(labels::T12, SetTag::Transition(1), &s1, &s2_start, only_input()));

    let fixed2 = names("2");
    for phase in 1..=phases {
        let (left, right) = if phase % 2 == 1 {
            (vec![Sig::neg(alpha.as_str())], vec![Sig::pos(copy.as_str())])
        } else {
            (vec![Sig::pos(alpha.as_str())], vec![Sig::neg(copy.as_str())])
        };
        let mut parts = keep_all(&fixed2);
        parts[run] = Rewrite::keep(s2_run[phase - 1].clone()).with(left, right);
        let mut domains = locked(nsec);
        domains[input] = a_set.clone();
        domains[right_of_run] = c_set.clone();
        rules.push(RuleDecl {
            label: labels::lr_m(phase, &alpha),
            tag: RuleTag::set(SetTag::Set(2)),
            parts,
            domains,
        });
        if phase < phases {
            let mut parts = keep_all(&fixed2);
            parts[run] = Rewrite::change(s2_run[phase - 1].clone(), s2_run[phase].clone());
            let mut domains = locked(nsec);
            if phase % 2 == 1 {
                domains[right_of_run] = c_set.clone();
            } else {
                domains[input] = a_set.clone();
            }
            rules.push(RuleDecl {
                label: labels::lr_m_turn(phase),
                tag: RuleTag::set(SetTag::Set(2)),
                parts,
                domains,
            });
        }
    }
    rules.push(transition(labels::T23, SetTag::Transition(2), &s2_end, &s3, only_input()));

    let m1_rules = &m3.m1_rules;
    for rule in m1_rules {
        let mut parts = keep_all(&s3);
        let mut domains = only_input();
        for h in hist {
            let (l, _) = h.pair(rule, m1_rules);
            parts[h.sector] = Rewrite::keep(s3[h.sector].clone()).with(vec![], vec![Sig::pos(l.as_str())]);
            domains[h.sector] = h.left_letters();
        }
        rules.push(RuleDecl {
            label: labels::insert_history(rule),
            tag: RuleTag::set(SetTag::Set(3)),
            parts,
            domains,
        });
    }
    let mut d34 = only_input();
    for h in hist {
        d34[h.sector] = h.left_letters();
    }
    rules.push(transition(labels::T34, SetTag::Transition(3), &s3, &b3.start, d34));
    for r in &b3.rules {
        let mut r = r.clone();
        r.tag.set = Some(SetTag::Set(4));
        rules.push(r);
    }
    let mut d45 = locked(nsec);
    for h in hist {
        d45[h.sector] = h.right_letters();
    }
    rules.push(transition(labels::T45, SetTag::Transition(4), &b3.end, &s5, d45.clone()));
    for rule in m1_rules {
        let mut parts = keep_all(&s5);
        for h in hist {
            let (_, r) = h.pair(rule, m1_rules);
            parts[h.sector] = Rewrite::keep(s5[h.sector].clone()).with(vec![], vec![Sig::neg(r.as_str())]);
        }
        rules.push(RuleDecl {
            label: labels::erase_history(rule),
            tag: RuleTag::set(SetTag::Set(5)),
            parts,
            domains: d45.clone(),
        });
    }
    rules.push(transition(labels::ACCEPT, SetTag::Accept, &s5, &ac, locked(nsec)));

    let mut sectors = b3.sectors.clone();
    sectors[input].insert(alpha.clone());
    sectors[right_of_run].insert(copy.clone());
    let parts = b3
        .parts
        .iter()
        .enumerate()
        .map(|(j, p)| {
            let mut letters = vec![st[j].clone(), s1[j].clone()];
            if j == run {
                letters.extend(s2_run.iter().cloned());
            } else {
                letters.push(fixed2[j].clone());
            }
            letters.push(s3[j].clone());
            letters.extend(p.letters.iter().cloned());
            letters.push(s5[j].clone());
            letters.push(ac[j].clone());
            PartDecl { name: p.name.clone(), letters }
        })
        .collect();
    let half = Blueprint {
        name: "M".into(),
        parts,
        sectors,
        circular: false,
        rules,
        start: st.clone(),
        end: ac.clone(),
        input_sector: Some(input),
    };
    let mut bp = circularize_m5(&mirror_m4(&half));
    bp.name = "M".into();
    let machine = bp.build()?;
    let with_mirror = |v: &[String]| {
        let mut out = vec![T_LETTER.to_string()];
        out.extend(v.iter().cloned());
        out.extend(v.iter().rev().map(|x| mirror_name(x)));
        out
    };
    Ok(MainMachineBundle {
        params: Parameters { m, l, n: bp.num_parts(), c4: None },
        m0_id: m0.id.clone(),
        half: n,
        input_sector: input,
        history_sectors: hist.iter().map(|h| h.sector).collect(),
        input_letter: alpha,
        copy_letter: copy,
        st_letters: with_mirror(&st),
        set1_letters: with_mirror(&s1),
        set3_letters: with_mirror(&s3),
        ac_letters: with_mirror(&ac),
        machine,
        blueprint: bp,
        m3,
        toy: m0.clone(),
    })
}

/// M₅ as a stand-alone machine: `{t}B₃(B₃')⁻¹` with the rules of M₃.
pub fn build_m5(m3: &StagedMachine) -> Result<SMachine> {
    let mut bp = circularize_m5(&mirror_m4(&m3.blueprint));
    bp.name = "M5".into();
    bp.build()
}

/// M̄: the rules Θ₃ ∪ Θ₄ ∪ Θ₅ with θ(34), θ(45) and θ₀. State letters used
/// only by removed rules disappear, sector alphabets shrink to the letters
/// some remaining rule admits, and the Θ₃ letters become the start letters.
pub fn build_trimmed_machine(bundle: &MainMachineBundle) -> Result<SMachine> {
    let bp = &bundle.blueprint;
    let keep = |r: &RuleDecl| match r.tag.set {
        Some(SetTag::Set(i)) => i >= 3,
        Some(SetTag::Transition(i)) => i >= 3,
        Some(SetTag::Accept) => true,
        _ => false,
    };
    let rules: Vec<RuleDecl> = bp.rules.iter().filter(|r| keep(r)).cloned().collect();
    let used: BTreeSet<&str> =
        rules.iter().flat_map(|r| r.parts.iter().flat_map(|p| [p.from.as_str(), p.to.as_str()])).collect();
    let parts = bp
        .parts
        .iter()
        .map(|p| PartDecl {
            name: p.name.clone(),
            letters: p.letters.iter().filter(|l| used.contains(l.as_str())).cloned().collect(),
        })
        .collect();
    let sectors = (0..bp.num_sectors())
        .map(|s| rules.iter().flat_map(|r| r.domains[s].iter().cloned()).collect())
        .collect();
    Blueprint {
        name: "Mbar".into(),
        parts,
        sectors,
        circular: true,
        rules,
        start: bundle.set3_letters.clone(),
        end: bp.end.clone(),
        input_sector: bp.input_sector,
    }
    .build()
}
