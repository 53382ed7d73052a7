//! Falsification suites for the computation-level lemmas, the language
//! experiment and the presentation audits. Every suite is deterministic;
//! parallel runs aggregate in input order.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compute::{apply_rule, applicable_rules, run_history, walk_computations, EnumOptions, HistoryFilter};
use crate::constructors::{build_lr, build_m5, build_rl, build_trimmed_machine, MainMachineBundle};
use crate::error::{Error, Result};
use crate::machine::{AdmissibleWord, History, RuleRef, SMachine, SetTag, StageTag};
use crate::word::Letter;

/// Counterexamples kept per report; the violation count is always exact.
const MAX_REPROS: usize = 5;

/// A failing computation, replayable with `run_history`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Repro {
    pub machine: String,
    pub start: String,
    pub history: String,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub suite: String,
    pub passed: bool,
    pub params: BTreeMap<String, String>,
    pub stats: BTreeMap<String, i64>,
    pub notes: Vec<String>,
    pub counterexamples: Vec<Repro>,
    pub rows: Vec<BTreeMap<String, String>>,
}

impl Report {
    pub fn new(suite: &str) -> Self {
        Report {
            suite: suite.into(),
            passed: true,
            params: BTreeMap::new(),
            stats: BTreeMap::new(),
            notes: Vec::new(),
            counterexamples: Vec::new(),
            rows: Vec::new(),
        }
    }

    pub fn param(&mut self, k: &str, v: impl ToString) -> &mut Self {
        self.params.insert(k.into(), v.to_string());
        self
    }

    pub fn add(&mut self, k: &str, v: i64) {
        *self.stats.entry(k.into()).or_insert(0) += v;
    }

    pub fn set(&mut self, k: &str, v: i64) {
        self.stats.insert(k.into(), v);
    }

    pub fn stat(&self, k: &str) -> i64 {
        self.stats.get(k).copied().unwrap_or(0)
    }

    /// Records a violation and fails the suite.
    pub fn fail(&mut self, r: Repro) {
        self.passed = false;
        self.add("violations", 1);
        if self.counterexamples.len() < MAX_REPROS {
            self.counterexamples.push(r);
        }
    }

    fn absorb(&mut self, part: Partial) {
        for (k, v) in part.sums {
            self.add(&k, v);
        }
        for (k, v) in part.maxes {
            let e = self.stats.entry(k).or_insert(v);
            *e = (*e).max(v);
        }
        for (k, v) in part.mins {
            let e = self.stats.entry(k).or_insert(v);
            *e = (*e).min(v);
        }
        for r in part.fails {
            self.fail(r);
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Human-readable rendering used by `report`.
    pub fn render(&self) -> String {
        let mut out = format!("[{}] {}\n", if self.passed { "PASS" } else { "FAIL" }, self.suite);
        for (k, v) in &self.params {
            out += &format!("  param {k} = {v}\n");
        }
        for (k, v) in &self.stats {
            out += &format!("  {k}: {v}\n");
        }
        for n in &self.notes {
            out += &format!("  note: {n}\n");
        }
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|(k, v)| format!("{k}={v}")).collect();
            out += &format!("  row {}\n", cells.join(" "));
        }
        for r in &self.counterexamples {
            out += &format!("  counterexample on {}: start `{}` history `{}` ({})\n", r.machine, r.start, r.history, r.detail);
        }
        out
    }
}

/// Statistics from one parallel work item, merged in input order.
#[derive(Default)]
struct Partial {
    sums: BTreeMap<String, i64>,
    maxes: BTreeMap<String, i64>,
    mins: BTreeMap<String, i64>,
    fails: Vec<Repro>,
}

impl Partial {
    fn add(&mut self, k: &str, v: i64) {
        *self.sums.entry(k.into()).or_insert(0) += v;
    }

    fn max(&mut self, k: &str, v: i64) {
        let e = self.maxes.entry(k.into()).or_insert(v);
        *e = (*e).max(v);
    }

    fn min(&mut self, k: &str, v: i64) {
        let e = self.mins.entry(k.into()).or_insert(v);
        *e = (*e).min(v);
    }
}

/// Maps in parallel on `jobs` threads, keeping input order.
fn par_map<T: Sync, R: Send>(jobs: usize, items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    if jobs <= 1 {
        return items.iter().map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build().expect("thread pool");
    pool.install(|| items.par_iter().map(f).collect())
}

fn repro(m: &SMachine, start: &AdmissibleWord, hist: &[RuleRef], detail: String) -> Repro {
    Repro {
        machine: m.name.clone(),
        start: m.format_word(start),
        history: m.history_to_string(&History(hist.to_vec())),
        detail,
    }
}

/// Rule mask excluding the given sets.
pub fn mask_without(m: &SMachine, sets: &[SetTag]) -> Vec<bool> {
    m.positive_rules().map(|r| !r.tag.set.is_some_and(|s| sets.contains(&s))).collect()
}

fn reduced_words(alphabet: &[Letter], len: usize, out: &mut Vec<Vec<Letter>>, cur: &mut Vec<Letter>) {
    if cur.len() == len {
        out.push(cur.clone());
        return;
    }
    for &x in alphabet {
        if cur.last().is_some_and(|&p| p == x.inverse()) {
            continue;
        }
        cur.push(x);
        reduced_words(alphabet, len, out, cur);
        cur.pop();
    }
}

/// Reduced words of length at most `max` over the letters and their inverses.
fn words_upto(letters: &BTreeSet<crate::word::Sym>, max: usize) -> Vec<Vec<Letter>> {
    let alphabet: Vec<Letter> =
        letters.iter().flat_map(|&s| [Letter::signed(s, false), Letter::signed(s, true)]).collect();
    let mut out = Vec::new();
    for len in 0..=max {
        reduced_words(&alphabet, len, &mut out, &mut Vec::new());
    }
    out
}

/// Every standard-base configuration with total tape length at most `max_tape`,
/// in a fixed order.
pub fn standard_configurations(m: &SMachine, max_tape: usize) -> Vec<AdmissibleWord> {
    let hw = &m.hardware;
    let n = hw.num_parts();
    let tapes: Vec<Vec<Vec<Letter>>> = (0..n.saturating_sub(1))
        .map(|j| hw.sector_right_of(j).map(|s| words_upto(&hw.sectors[s], max_tape)).unwrap_or_else(|| vec![vec![]]))
        .collect();
    let mut out = Vec::new();
    let mut states = vec![0usize; n];
    loop {
        let mut chosen = vec![0usize; tapes.len()];
        loop {
            let total: usize = chosen.iter().zip(&tapes).map(|(&i, t)| t[i].len()).sum();
            if total <= max_tape {
                let mut letters = Vec::new();
                for j in 0..n {
                    letters.push(Letter::signed(hw.parts[j].letters[states[j]], false));
                    if j + 1 < n {
                        letters.extend_from_slice(&tapes[j][chosen[j]]);
                    }
                }
                if let Ok(w) = AdmissibleWord::new(hw, letters) {
                    out.push(w);
                }
            }
            if !odometer(&mut chosen, |j| tapes[j].len()) {
                break;
            }
        }
        if !odometer(&mut states, |j| hw.parts[j].letters.len()) {
            break;
        }
    }
    out
}

fn odometer(digits: &mut [usize], radix: impl Fn(usize) -> usize) -> bool {
    for j in (0..digits.len()).rev() {
        digits[j] += 1;
        if digits[j] < radix(j) {
            return true;
        }
        digits[j] = 0;
    }
    false
}

/// Admissible words with a two-letter base and a tape word of length at most
/// `max_tape` between the two state letters.
pub fn two_letter_words(m: &SMachine, max_tape: usize) -> Vec<AdmissibleWord> {
    let hw = &m.hardware;
    let states: Vec<Letter> = hw
        .parts
        .iter()
        .flat_map(|p| p.letters.iter().flat_map(|&s| [Letter::signed(s, false), Letter::signed(s, true)]))
        .collect();
    let tape: BTreeSet<_> = hw.sectors.iter().flatten().copied().collect();
    let tapes = words_upto(&tape, max_tape);
    let mut out = Vec::new();
    for &x in &states {
        for &y in &states {
            for u in &tapes {
                let mut letters = vec![x];
                letters.extend_from_slice(u);
                letters.push(y);
                if let Ok(w) = AdmissibleWord::new(hw, letters) {
                    out.push(w);
                }
            }
        }
    }
    out
}

/// Two-letter subwords of the given words: each pair of consecutive state
/// letters with the tape word between them.
pub fn two_letter_subwords(m: &SMachine, words: &[AdmissibleWord]) -> Vec<AdmissibleWord> {
    let alpha = m.alphabet();
    let mut seen = BTreeSet::new();
    for w in words {
        let idx: Vec<usize> = (0..w.len()).filter(|&i| alpha.is_state(w.letters()[i].sym)).collect();
        for p in idx.windows(2) {
            seen.insert(w.letters()[p[0]..=p[1]].to_vec());
        }
    }
    seen.into_iter().filter_map(|l| AdmissibleWord::new(&m.hardware, l).ok()).collect()
}

/// (W·θ)·θ⁻¹ = W for every applicable signed rule, on `count` words per
/// machine: half random standard configurations, half endpoints of random
/// walks from the start configuration.
pub fn check_round_trip(machines: &[SMachine], count: usize, seed: u64, jobs: usize) -> Report {
    let mut rep = Report::new("round-trip");
    rep.param("words_per_machine", count).param("seed", seed);
    let items: Vec<(u64, &SMachine)> = machines.iter().enumerate().map(|(i, m)| (i as u64, m)).collect();
    let parts = par_map(jobs, &items, |&(i, m)| {
        let mut p = Partial::default();
        let mut rng = StdRng::seed_from_u64(seed.wrapping_add(i));
        let words = sample_words(m, count, &mut rng);
        p.add("words", words.len() as i64);
        for w in &words {
            for (r, v) in applicable_rules(m, w) {
                p.add("applications", 1);
                match apply_rule(m, &v, r.inverse()) {
                    Ok(back) if &back == w => {}
                    other => p.fails.push(repro(m, w, &[r, r.inverse()], format!("inverse gave {other:?}"))),
                }
            }
        }
        p
    });
    rep.set("machines", machines.len() as i64);
    for p in parts {
        rep.absorb(p);
    }
    rep
}

fn sample_words(m: &SMachine, count: usize, rng: &mut StdRng) -> Vec<AdmissibleWord> {
    let hw = &m.hardware;
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0;
    while out.len() < count / 2 && attempts < 20 * count {
        attempts += 1;
        let mut letters = Vec::new();
        let n = hw.num_parts();
        for j in 0..n {
            let part = &hw.parts[j].letters;
            letters.push(Letter::signed(part[rng.random_range(0..part.len())], false));
            if let Some(s) = hw.sector_right_of(j).filter(|_| j + 1 < n) {
                let alpha: Vec<_> = hw.sectors[s].iter().copied().collect();
                if alpha.is_empty() {
                    continue;
                }
                for _ in 0..rng.random_range(0..4) {
                    let x = Letter::signed(alpha[rng.random_range(0..alpha.len())], rng.random_bool(0.5));
                    if letters.last() == Some(&x.inverse()) {
                        letters.pop();
                    } else {
                        letters.push(x);
                    }
                }
            }
        }
        if let Ok(w) = AdmissibleWord::new(hw, letters) {
            out.push(w);
        }
    }
    let mut w = m.start_configuration();
    while out.len() < count {
        let next: Vec<_> = applicable_rules(m, &w).collect();
        if next.is_empty() || rng.random_bool(0.05) {
            w = m.start_configuration();
        } else {
            w = next[rng.random_range(0..next.len())].1.clone();
        }
        out.push(w.clone());
    }
    out
}

/// Largest amount one rule application can shrink a word by.
pub fn max_step_shrink(m: &SMachine) -> usize {
    m.positive_rules().map(|r| r.parts.iter().map(|p| p.left.len() + p.right.len()).sum::<usize>()).max().unwrap_or(0)
}

/// t ≤ |W₀| + |Wₜ| − 2 for reduced standard-base computations of LR over
/// {a, b} from every start word with tape length at most `max_tape`; RL is
/// cross-checked one tape letter lower.
pub fn check_lr_bound(max_tape: usize, jobs: usize) -> Result<Report> {
    let mut rep = Report::new("lr-bound");
    rep.param("max_tape", max_tape);
    let runs = [(build_lr(&["a", "b"])?, max_tape), (build_rl(&["a", "b"])?, max_tape.saturating_sub(1))];
    for (m, max_tape) in runs {
        let depth = 2 * max_tape + 7;
        rep.param(&format!("depth_{}", m.name), depth);
        let delta = max_step_shrink(&m);
        let starts = standard_configurations(&m, max_tape);
        rep.add("start_words", starts.len() as i64);
        let parts = par_map(jobs, &starts, |w0| {
            let mut p = Partial::default();
            let opts = EnumOptions::new(depth, HistoryFilter::Reduced);
            walk_computations(&m, w0, &opts, |trace, hist| {
                let t = hist.len() as i64;
                let bound = (trace[0].len() + trace[trace.len() - 1].len()) as i64 - 2;
                p.add("computations", 1);
                p.max("max_length", t);
                p.min("min_slack", bound - t);
                if t == depth as i64 {
                    p.add("depth_cap_hits", 1);
                }
                if t > bound {
                    p.fails.push(repro(&m, w0, hist, format!("t = {t} exceeds bound {bound}")));
                }
                // A violation at time s needs |W_s| ≤ s − |W₀| + 1, and each
                // step shrinks the word by at most delta: below a word too
                // long to get there by the depth cap nothing can fail.
                let reach = (trace[trace.len() - 1].len() + delta * hist.len() + trace[0].len()) as i64 - 1;
                let open = reach <= ((delta + 1) * depth) as i64;
                if !open {
                    p.add("pruned", 1);
                }
                open
            });
            p
        });
        for p in parts {
            rep.absorb(p);
        }
    }
    if rep.stat("depth_cap_hits") > 0 {
        rep.notes.push("some computations reached the depth cap; longer ones were not explored".into());
    }
    Ok(rep)
}

/// min over factorizations H = H₁H₂ᵏH₃ of 2|H₁| + 3|H₂| + 2|H₃|.
pub fn min_factorization_cost(h: &[RuleRef]) -> usize {
    let t = h.len();
    let mut best = 2 * t;
    for p in 1..=t {
        for i in 0..t {
            let mut k = 0;
            while i + (k + 1) * p <= t && h[i + k * p..i + (k + 1) * p] == h[i..i + p] {
                k += 1;
            }
            if k >= 1 {
                best = best.min(2 * (t - k * p) + 3 * p);
            }
        }
    }
    best
}

/// Rules acting identically on every word with the base of `w`: the same
/// substitutions at its state letters and the same domain on the sector
/// between them. Returns each rule's class representative (least index) and
/// the class members.
fn base_classes(m: &SMachine, w: &AdmissibleWord) -> (Vec<usize>, Vec<Vec<usize>>) {
    let hw = &m.hardware;
    let alpha = m.alphabet();
    let states: Vec<Letter> = w.letters().iter().copied().filter(|l| alpha.is_state(l.sym)).collect();
    let parts: Vec<usize> = states.iter().filter_map(|l| alpha.part_of(l.sym)).collect();
    let sector = if states[0].inv { hw.sector_left_of(parts[0]) } else { hw.sector_right_of(parts[0]) };
    let rules: Vec<_> = m.positive_rules().collect();
    let same = |i: usize, j: usize| {
        parts.iter().all(|&p| rules[i].parts[p] == rules[j].parts[p])
            && sector.is_none_or(|s| rules[i].domains[s] == rules[j].domains[s])
    };
    let mut rep: Vec<usize> = (0..rules.len()).collect();
    let mut members: Vec<Vec<usize>> = vec![vec![]; rules.len()];
    for i in 0..rules.len() {
        if let Some(j) = (0..i).find(|&j| rep[j] == j && same(i, j)) {
            rep[i] = j;
        }
        members[rep[i]].push(i);
    }
    (rep, members)
}

/// A reduced history with the same trace as a history of representatives,
/// choosing class members so no rule meets its inverse.
fn realize(hist: &[RuleRef], members: &[Vec<usize>]) -> Option<Vec<RuleRef>> {
    let mut out: Vec<RuleRef> = Vec::with_capacity(hist.len());
    for &r in hist {
        let pick = members[r.base_index()].iter().map(|&i| {
            let x = RuleRef::positive(i);
            if r.is_positive() { x } else { x.inverse() }
        });
        let choice = pick.into_iter().find(|x| out.last() != Some(&x.inverse()))?;
        out.push(choice);
    }
    Some(out)
}

/// The two-letter-base length bound, checked on every prefix computation.
///
/// Rules acting identically on the base are collapsed to a representative:
/// the trace is unchanged and the factorization cost can only drop, so the
/// collapsed walk checks every reduced history. Representative histories
/// may cancel a rule against its inverse when its class has other members.
pub fn check_wi_on(m: &SMachine, starts: &[AdmissibleWord], depth: usize, jobs: usize, rep: &mut Report) {
    rep.add("start_words", starts.len() as i64);
    let parts = par_map(jobs, starts, |w0| {
        let mut p = Partial::default();
        let (class, members) = base_classes(m, w0);
        let mut trace = vec![w0.clone()];
        let mut hist = Vec::new();
        let mut peaks = vec![w0.len()];
        wi_rec(m, depth, &class, &members, &mut trace, &mut hist, &mut peaks, &mut p);
        p
    });
    for p in parts {
        rep.absorb(p);
    }
}

#[allow(clippy::too_many_arguments)]
fn wi_rec(
    m: &SMachine,
    depth: usize,
    class: &[usize],
    members: &[Vec<usize>],
    trace: &mut Vec<AdmissibleWord>,
    hist: &mut Vec<RuleRef>,
    peaks: &mut Vec<usize>,
    p: &mut Partial,
) {
    p.add("computations", 1);
    let (w0, wt) = (&trace[0], &trace[trace.len() - 1]);
    let peak = peaks[peaks.len() - 1];
    let excess = peak as i64 - (w0.len() + wt.len()) as i64;
    // Nonempty histories cost at least 2 (at least 3 from length 2 on).
    if excess >= 2 && !hist.is_empty() {
        let cost = min_factorization_cost(hist) as i64;
        p.min("min_slack", cost - excess);
        if excess > cost {
            match realize(hist, members) {
                Some(real) if excess > min_factorization_cost(&real) as i64 => {
                    p.fails.push(repro(m, w0, &real, format!("max |W_i| = {peak} exceeds bound {}", peak as i64 - excess + min_factorization_cost(&real) as i64)))
                }
                _ => p.add("unrealized_excess", 1),
            }
        }
    }
    if hist.len() >= depth {
        return;
    }
    let last = hist.last().copied();
    let next: Vec<(RuleRef, AdmissibleWord)> = applicable_rules(m, wt)
        .filter(|(r, _)| class[r.base_index()] == r.base_index())
        .filter(|(r, _)| last != Some(r.inverse()) || members[r.base_index()].len() > 1)
        .collect();
    for (r, v) in next {
        let peak = peaks[peaks.len() - 1].max(v.len());
        trace.push(v);
        hist.push(r);
        peaks.push(peak);
        wi_rec(m, depth, class, members, trace, hist, peaks, p);
        trace.pop();
        hist.pop();
        peaks.pop();
    }
}

/// The two-letter-base bound on LR (all two-letter words with tape ≤ 2) and on
/// the M3 fragment spanned by the projected accepting traces of W(0,0) and
/// W(2,2).
pub fn check_wi_bound(b: &MainMachineBundle, depth: usize, jobs: usize) -> Result<Report> {
    let mut rep = Report::new("wi-bound");
    rep.param("depth", depth).param("lr_max_tape", 2);
    let lr = build_lr(&["a", "b"])?;
    check_wi_on(&lr, &two_letter_words(&lr, 2), depth, jobs, &mut rep);
    let m3 = b.m3.blueprint.build()?;
    let projected = m3_projections(b, &m3, &[0, 2])?;
    let frag = two_letter_subwords(&m3, &projected);
    check_wi_on(&m3, &frag, depth, jobs, &mut rep);
    rep.set("m3_fragment_words", frag.len() as i64);
    Ok(rep)
}

/// Standard-base M3 words obtained from the Θ₄ part of the accepting traces
/// of W(k,k), restricted to the first half of the main base.
pub fn m3_projections(b: &MainMachineBundle, m3: &SMachine, ks: &[i64]) -> Result<Vec<AdmissibleWord>> {
    let m = &b.machine;
    let alpha = m.alphabet();
    let mut out = Vec::new();
    for &k in ks {
        let Some(h) = b.acceptance_witness(k) else { continue };
        let c = run_history(m, &b.w_kk(k, k), &h)?;
        for (i, w) in c.trace.iter().enumerate() {
            let in_set4 = [i.checked_sub(1).map(|j| h.0[j]), h.0.get(i).copied()]
                .into_iter()
                .flatten()
                .any(|r| m.rule(r).tag.set == Some(SetTag::Set(4)));
            if !in_set4 {
                continue;
            }
            let pos = |part: usize| w.letters().iter().position(|l| alpha.part_of(l.sym) == Some(part));
            let (Some(a), Some(z)) = (pos(1), pos(b.half)) else { continue };
            let letters = w.letters()[a..=z]
                .iter()
                .map(|l| Ok(Letter::signed(m3.letter(alpha.name(l.sym))?, l.inv)))
                .collect::<Result<Vec<_>>>()?;
            let pw = AdmissibleWord::new(&m3.hardware, letters)?;
            if !out.contains(&pw) {
                out.push(pw);
            }
        }
    }
    if out.is_empty() {
        return Err(Error::WitnessInvalid("no Θ4 words to project".into()));
    }
    Ok(out)
}

/// χ-rule index of each positive rule, if any.
fn chi_indices(m: &SMachine) -> Vec<Option<u16>> {
    m.positive_rules()
        .map(|r| match r.tag.stage {
            Some(StageTag::Chi(k)) => Some(k),
            _ => None,
        })
        .collect()
}

/// At most one occurrence of each χ(i,i+1)^±1 in reduced standard-base
/// computations of M3, started from the projections of the Θ₄ parts of the
/// accepting traces.
pub fn check_chi_occurrences(b: &MainMachineBundle, depth: usize, jobs: usize) -> Result<Report> {
    let m3 = b.m3.blueprint.build()?;
    let chi = chi_indices(&m3);
    let starts = m3_projections(b, &m3, &[0, 2])?;
    let mut rep = Report::new("chi-occurrences");
    rep.param("depth", depth).param("machine", &m3.name);
    rep.set("start_words", starts.len() as i64);
    let parts = par_map(jobs, &starts, |w0| {
        let mut p = Partial::default();
        let opts = EnumOptions::new(depth, HistoryFilter::Reduced);
        walk_computations(&m3, w0, &opts, |_, hist| {
            p.add("computations", 1);
            let Some(&last) = hist.last() else { return true };
            let Some(k) = chi[last.base_index()] else { return true };
            let seen: Vec<u16> = hist.iter().filter_map(|r| chi[r.base_index()]).collect();
            let same = seen.iter().filter(|&&j| j == k).count() as i64;
            p.max("max_per_index", same);
            let distinct: BTreeSet<u16> = seen.iter().copied().collect();
            if distinct.len() >= 2 {
                p.add("two_transition_computations", 1);
            }
            if same > 1 {
                p.fails.push(repro(&m3, w0, hist, format!("χ({k},{}) occurs {same} times", k + 1)));
            }
            true
        });
        p
    });
    for p in parts {
        rep.absorb(p);
    }
    if rep.stat("two_transition_computations") == 0 {
        rep.notes.push("no enumerated computation crosses two stage transitions".into());
    }
    Ok(rep)
}

/// No nonempty reduced computation avoiding Θ₁ and Θ₂ returns to W(k,k).
pub fn check_norep(b: &MainMachineBundle, k: i64, depth: usize) -> Report {
    let m = &b.machine;
    let w = b.w_kk(k, k);
    let mut rep = Report::new("norep");
    rep.param("k", k).param("depth", depth);
    let opts = EnumOptions::new(depth, HistoryFilter::Reduced).with_allowed(mask_without(m, &[SetTag::Set(1), SetTag::Set(2)]));
    let mut p = Partial::default();
    walk_computations(m, &w, &opts, |trace, hist| {
        p.add("computations", 1);
        p.max("max_length", hist.len() as i64);
        if !hist.is_empty() && trace[trace.len() - 1] == w {
            p.fails.push(repro(m, &w, hist, "returns to W(k,k)".into()));
        }
        true
    });
    rep.absorb(p);
    rep
}

/// Reduced histories of length `len` whose powers stay reduced.
fn cyclic_histories(m: &SMachine, len: usize) -> Vec<Vec<RuleRef>> {
    let rules = m.ordered_rules();
    let mut out = Vec::new();
    let mut stack: Vec<Vec<RuleRef>> = vec![vec![]];
    while let Some(h) = stack.pop() {
        if h.len() == len {
            if h.first() != h.last().map(|r| r.inverse()).as_ref() || len == 1 {
                out.push(h);
            }
            continue;
        }
        for &r in rules.iter().rev() {
            if h.last() != Some(&r.inverse()) {
                let mut g = h.clone();
                g.push(r);
                stack.push(g);
            }
        }
    }
    out
}

/// H-periodic LR computations without a subcomputation Wᵢ → … → Wⱼ ≡ Wᵢ of
/// history H have pairwise distinct period-boundary words. Runs up to `reps`
/// periods of every H of length ≤ `max_period` from every standard word with
/// tape ≤ `max_tape`.
pub fn check_periodic_distinctness(max_period: usize, reps: usize, max_tape: usize, jobs: usize) -> Result<Report> {
    let m = build_lr(&["a", "b"])?;
    let mut rep = Report::new("periodic");
    rep.param("max_period", max_period).param("reps", reps).param("max_tape", max_tape);
    let starts = standard_configurations(&m, max_tape);
    let periods: Vec<Vec<RuleRef>> = (1..=max_period).flat_map(|p| cyclic_histories(&m, p)).collect();
    rep.set("periods", periods.len() as i64);
    rep.set("start_words", starts.len() as i64);
    rep.set("skipped_hypothesis", 0);
    let parts = par_map(jobs, &periods, |h| {
        let mut p = Partial::default();
        let n = h.len();
        for w0 in &starts {
            let mut trace = vec![w0.clone()];
            'run: for _ in 0..reps {
                for &r in h {
                    match crate::compute::try_apply(&m, &trace[trace.len() - 1], r) {
                        Some(v) => trace.push(v),
                        None => break 'run,
                    }
                }
            }
            let periods_done = (trace.len() - 1) / n;
            if periods_done == 0 {
                p.add("inapplicable", 1);
                continue;
            }
            trace.truncate(periods_done * n + 1);
            let hist: Vec<RuleRef> = (0..periods_done * n).map(|i| h[i % n]).collect();
            // Subcomputations with history H start wherever H occurs in H^s.
            let repeats = (0..=hist.len() - n).any(|i| hist[i..i + n] == h[..] && trace[i] == trace[i + n]);
            if repeats {
                p.add("skipped_hypothesis", 1);
                continue;
            }
            p.add("checked", 1);
            let boundary: Vec<&AdmissibleWord> = trace.iter().step_by(n).collect();
            let distinct: HashSet<&AdmissibleWord> = boundary.iter().copied().collect();
            if distinct.len() != boundary.len() {
                p.fails.push(repro(&m, w0, &hist, "period-boundary words repeat".into()));
            }
        }
        p
    });
    for p in parts {
        rep.absorb(p);
    }
    Ok(rep)
}

/// How the language experiment settled one k.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Accepted,
    Rejected,
    Unknown,
}

/// Bidirectional search W(k,k) ↔ W_ac without Θ₁/Θ₂, compared with the toy
/// recognizer. A search that runs out of budget falls back to the constructive
/// witness; every positive verdict is replayed.
pub fn accepted_language_experiment(b: &MainMachineBundle, ks: &[i64], budget: usize) -> Report {
    let m = &b.machine;
    let mask = mask_without(m, &[SetTag::Set(1), SetTag::Set(2)]);
    let ac = b.w_ac();
    let mut rep = Report::new("language");
    rep.param("budget", budget).param("k", format!("{ks:?}"));
    for &k in ks {
        let w = b.w_kk(k, k);
        let reference = b.toy.accepts(k);
        let outcome = crate::search::bidirectional_search_with(m, &w, &ac, budget, Some(&mask));
        let (verdict, source, witness) = match outcome {
            crate::search::SearchOutcome::Found(h) => (Verdict::Accepted, "search", Some(h)),
            crate::search::SearchOutcome::Disconnected => (Verdict::Rejected, "search", None),
            crate::search::SearchOutcome::BudgetExceeded => match b.acceptance_witness(k) {
                Some(h) => (Verdict::Accepted, "constructive", Some(h)),
                None => (Verdict::Unknown, "budget-exhausted", None),
            },
        };
        let mut row = BTreeMap::new();
        row.insert("k".to_string(), k.to_string());
        row.insert("reference".to_string(), if reference { "accept" } else { "reject" }.to_string());
        row.insert("verdict".to_string(), format!("{verdict:?}").to_lowercase());
        row.insert("source".to_string(), source.to_string());
        if let Some(h) = &witness {
            row.insert("witness_length".to_string(), h.len().to_string());
            let masked = h.0.iter().any(|r| !mask[r.base_index()]);
            let replays = run_history(m, &w, h).is_ok_and(|c| c.end() == &ac);
            if !replays || masked {
                rep.fail(repro(m, &w, &h.0, "witness does not replay to W_ac without Θ1/Θ2".into()));
            }
        }
        match (verdict, reference) {
            (Verdict::Accepted, false) | (Verdict::Rejected, true) => {
                rep.fail(Repro {
                    machine: m.name.clone(),
                    start: m.format_word(&w),
                    history: witness.as_ref().map(|h| m.history_to_string(h)).unwrap_or_default(),
                    detail: format!("k = {k}: verdict {verdict:?} disagrees with the reference"),
                });
            }
            (Verdict::Unknown, _) => rep.add("unknown", 1),
            _ => rep.add("agree", 1),
        }
        rep.rows.push(row);
    }
    rep
}

/// μ, ν, superscript discipline, hub lengths and relator counts on G, and
/// the absence of superscripted generators in the trimmed Ḡ.
pub fn presentation_audit(b: &MainMachineBundle) -> Result<Report> {
    use crate::presentation::{check_superscripts, compile_group_g, compile_trimmed, mu, nu, RelatorTag};
    let g = compile_group_g(b)?;
    let mut rep = Report::new("presentation");
    rep.param("group", &g.name);
    let fail = |rep: &mut Report, detail: String| {
        rep.fail(Repro { machine: g.name.clone(), start: String::new(), history: String::new(), detail })
    };
    rep.set("relators", g.relators.len() as i64);
    for r in &g.relators {
        if mu(&g, &r.word)? != 0 {
            fail(&mut rep, format!("μ ≠ 0 on {}", g.format_word(&r.word)));
        }
        if r.tag == RelatorTag::ThetaA {
            rep.add("theta_a", 1);
            if !nu(&g, &r.word)?.is_empty() {
                fail(&mut rep, format!("ν survives on {}", g.format_word(&r.word)));
            }
        }
        if r.tag == RelatorTag::Hub {
            rep.add("hubs", 1);
            if r.word.len() != b.l() as usize * b.n() {
                fail(&mut rep, format!("hub of length {} ≠ L·N", r.word.len()));
            }
        }
    }
    if let Err(e) = check_superscripts(&g) {
        fail(&mut rep, e.to_string());
    }
    let tags = [RelatorTag::ThetaQ, RelatorTag::ThetaA, RelatorTag::Hub, RelatorTag::Hnn];
    let by_tag: usize = tags.iter().map(|&t| g.count(t)).sum();
    if by_tag != g.relators.len() || g.count(RelatorTag::Hub) != 2 {
        fail(&mut rep, format!("relator counts do not reconcile: {by_tag} by tag, {} total", g.relators.len()));
    }
    rep.set("theta_q", g.count(RelatorTag::ThetaQ) as i64);
    let trimmed = build_trimmed_machine(b)?;
    let (_, gbar) = compile_trimmed(b, &trimmed)?;
    let sup = gbar.generators().iter().filter(|x| x.sup.is_some()).count();
    rep.set("trimmed_superscripted_generators", sup as i64);
    if sup != 0 {
        fail(&mut rep, format!("{sup} superscripted generators in {}", gbar.name));
    }
    Ok(rep)
}

/// Trapezia for a computation, starting plain and falling back to
/// superscript 1 when the first band needs one.
fn trapezium_for(
    tb: &crate::trapezia::TrapeziumBuilder<'_>,
    c: &crate::compute::Computation,
) -> Result<crate::trapezia::Trapezium> {
    match tb.computation_to_trapezium(c, None) {
        Err(Error::SuperscriptRequired(_)) => tb.computation_to_trapezium(c, Some(1)),
        other => other,
    }
}

/// Height, boundary erasures and cell relators of the trapezia of the first
/// `count` nonempty eligible computations from W_st, W(0,0) and W(2,2),
/// taken in turn.
pub fn check_trapezia(b: &MainMachineBundle, count: usize, depth: usize) -> Result<Report> {
    use crate::compute::enumerate_computations;
    use crate::trapezia::TrapeziumBuilder;
    let m = &b.machine;
    let g = crate::presentation::compile_group_g(b)?;
    let tb = TrapeziumBuilder::new(m, &g);
    let mut rep = Report::new("trapezia");
    rep.param("count", count).param("depth", depth);
    let starts = [b.w_st(), b.w_kk(0, 0), b.w_kk(2, 2)];
    let mut streams: Vec<_> =
        starts.iter().map(|w| enumerate_computations(m, w, depth, HistoryFilter::Eligible).skip(1)).collect();
    let mut done = 0;
    while done < count {
        let mut progressed = false;
        for s in streams.iter_mut() {
            let Some(c) = s.next() else { continue };
            progressed = true;
            done += 1;
            let mut bad = |why: String| rep.fail(repro(m, c.start(), &c.history.0, why));
            match trapezium_for(&tb, &c) {
                Err(e) => bad(e.to_string()),
                Ok(t) => {
                    if t.height() != c.len() {
                        bad(format!("height {} ≠ {}", t.height(), c.len()));
                    }
                    if t.bottom().erase() != c.start().letters() || t.top().erase() != c.end().letters() {
                        bad("boundary erasures differ from W0 / Wt".into());
                    }
                    let cells: Vec<_> = t.bands.iter().flat_map(|band| &band.cells).collect();
                    if let Some(cell) = cells.iter().find(|cell| !tb.is_relator(&cell.boundary)) {
                        bad(format!("cell {} is not a relator", g.format_word(&cell.boundary)));
                    }
                    rep.add("cells", cells.len() as i64);
                }
            }
            if done == count {
                break;
            }
        }
        if !progressed {
            rep.notes.push(format!("only {done} eligible computations up to depth {depth}"));
            rep.passed = false;
            break;
        }
    }
    rep.set("computations", done as i64);
    Ok(rep)
}

/// Disk-diagram cell counts for the accepted W(k,k)^L: at least N·L·d, and
/// exactly one hub plus L copies of the witness trapezium, whose area is
/// counted here from the trace.
pub fn check_disk_cells(b: &MainMachineBundle, ks: &[i64]) -> Result<Report> {
    use crate::trapezia::{disk_diagram_cells, TrapeziumBuilder};
    let m = &b.machine;
    let g = crate::presentation::compile_group_g(b)?;
    let tb = TrapeziumBuilder::new(m, &g);
    let (n, l) = (b.n(), b.l() as usize);
    let mut rep = Report::new("disk-cells");
    rep.param("k", format!("{ks:?}"));
    for &k in ks.iter().filter(|&&k| b.toy.accepts(k)) {
        let w = b.w_kk(k, k);
        let Some(h) = b.acceptance_witness(k) else {
            rep.fail(repro(m, &w, &[], format!("no witness for accepted k = {k}")));
            continue;
        };
        let c = run_history(m, &w, &h)?;
        let d = c.len();
        let area: usize = (0..d).map(|t| if h.0[t].is_positive() { c.trace[t].len() } else { c.trace[t + 1].len() }).sum();
        let expected = 1 + l * area;
        let cells = disk_diagram_cells(&tb, b, &w, &c)?;
        let mut row = BTreeMap::new();
        for (key, v) in [("k", k as usize), ("d", d), ("cells", cells), ("lower_bound", n * l * d), ("expected", expected)] {
            row.insert(key.to_string(), v.to_string());
        }
        rep.rows.push(row);
        if cells < n * l * d || cells != expected {
            rep.fail(repro(m, &w, &h.0, format!("{cells} cells; need ≥ {} and exactly {expected}", n * l * d)));
        }
    }
    Ok(rep)
}

/// Every machine the constructors ship, for the round-trip suite.
pub fn shipped_machines(b: &MainMachineBundle) -> Result<Vec<SMachine>> {
    Ok(vec![
        b.toy.machine()?,
        build_lr(&["a", "b"])?,
        build_rl(&["a", "b"])?,
        crate::constructors::build_lr_m(&["a", "b"], b.params.m)?,
        b.m3.blueprint.build()?,
        build_m5(&b.m3)?,
        b.machine.clone(),
        build_trimmed_machine(b)?,
    ])
}

/// Per-suite budgets; the defaults are the acceptance settings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HarnessConfig {
    pub seed: u64,
    pub jobs: usize,
    pub round_trip_words: usize,
    pub lr_max_tape: usize,
    pub wi_depth: usize,
    pub chi_depth: usize,
    pub norep_depth: usize,
    pub periodic_max_period: usize,
    pub periodic_reps: usize,
    pub periodic_max_tape: usize,
    pub language_ks: Vec<i64>,
    pub search_budget: usize,
    pub trapezia: usize,
    pub trapezia_depth: usize,
}

impl Default for HarnessConfig {
    fn default() -> Self {
        HarnessConfig {
            seed: 1,
            jobs: 1,
            round_trip_words: 1000,
            lr_max_tape: 4,
            wi_depth: 8,
            chi_depth: 12,
            norep_depth: 8,
            periodic_max_period: 3,
            periodic_reps: 5,
            periodic_max_tape: 3,
            language_ks: vec![0, 1, 2, 3],
            search_budget: 100_000,
            trapezia: 200,
            trapezia_depth: 6,
        }
    }
}

pub const SUITES: [&str; 10] =
    ["round-trip", "lr-bound", "wi-bound", "chi", "norep", "periodic", "language", "presentation", "trapezia", "disk-cells"];

/// Runs one suite by name.
pub fn run_suite(name: &str, b: &MainMachineBundle, cfg: &HarnessConfig) -> Result<Vec<Report>> {
    Ok(match name {
        "round-trip" => vec![check_round_trip(&shipped_machines(b)?, cfg.round_trip_words, cfg.seed, cfg.jobs)],
        "lr-bound" => vec![check_lr_bound(cfg.lr_max_tape, cfg.jobs)?],
        "wi-bound" => vec![check_wi_bound(b, cfg.wi_depth, cfg.jobs)?],
        "chi" => vec![check_chi_occurrences(b, cfg.chi_depth, cfg.jobs)?],
        "norep" => vec![check_norep(b, 0, cfg.norep_depth), check_norep(b, 2, cfg.norep_depth)],
        "periodic" => vec![check_periodic_distinctness(
            cfg.periodic_max_period,
            cfg.periodic_reps,
            cfg.periodic_max_tape,
            cfg.jobs,
        )?],
        "language" => vec![accepted_language_experiment(b, &cfg.language_ks, cfg.search_budget)],
        "presentation" => vec![presentation_audit(b)?],
        "trapezia" => vec![check_trapezia(b, cfg.trapezia, cfg.trapezia_depth)?],
        "disk-cells" => vec![check_disk_cells(b, &cfg.language_ks)?],
        other => return Err(Error::Parse { line: 0, msg: format!("unknown suite `{other}`") }),
    })
}

/// All suites in a fixed order.
pub fn run_all(b: &MainMachineBundle, cfg: &HarnessConfig) -> Result<Vec<Report>> {
    let mut out = Vec::new();
    for s in SUITES {
        out.extend(run_suite(s, b, cfg)?);
    }
    Ok(out)
}

pub fn reports_to_json(reports: &[Report]) -> String {
    serde_json::to_string_pretty(reports).expect("reports serialize")
}

pub fn reports_from_json(text: &str) -> Result<Vec<Report>> {
    serde_json::from_str(text).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })
}
