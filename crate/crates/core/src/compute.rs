//! Rule application, computations and their enumeration.

use std::collections::VecDeque;
use std::fmt;

use crate::error::{Error, Result};
use crate::machine::{AdmissibleWord, History, RuleRef, SMachine, SetTag};
use crate::word::{push_reduced, Letter};

/// Checks the sector-domain condition of `rule` on `w` (and that every state
/// letter is the one the rule rewrites).
pub fn is_applicable(m: &SMachine, w: &AdmissibleWord, rule: RuleRef) -> bool {
    check_applicable(m, w, rule).is_ok()
}

/// Why a rule does not apply: the offending state letter's position, and
/// whether the letter itself (rather than its sector) is at fault.
fn first_obstruction(m: &SMachine, w: &AdmissibleWord, rule: RuleRef) -> Option<(usize, bool)> {
    let hw = &m.hardware;
    let alpha = &hw.alphabet;
    let r = m.rule(rule);
    let letters = w.letters();
    let mut i = 0;
    while i < letters.len() {
        let q = letters[i];
        let Some(part) = alpha.part_of(q.sym) else {
            i += 1;
            continue;
        };
        if r.parts[part].from != q.sym {
            return Some((i, true));
        }
        let mut j = i + 1;
        while j < letters.len() && !alpha.is_state(letters[j].sym) {
            j += 1;
        }
        if j < letters.len() && j > i + 1 {
            let sector = if q.inv { hw.sector_left_of(part) } else { hw.sector_right_of(part) };
            let dom = sector.map(|s| &r.domains[s]);
            let fits = dom.is_some_and(|d| letters[i + 1..j].iter().all(|l| d.contains(&l.sym)));
            if !fits {
                return Some((i, false));
            }
        }
        i = j;
    }
    None
}

fn check_applicable(m: &SMachine, w: &AdmissibleWord, rule: RuleRef) -> Result<()> {
    match first_obstruction(m, w, rule) {
        None => Ok(()),
        Some((i, letter)) => {
            let name = m.alphabet().name(w.letters()[i].sym);
            let reason = if letter {
                format!("state letter {name} is not rewritten")
            } else {
                format!("sector after {name} leaves the rule's domain")
            };
            Err(Error::NotApplicable { rule: m.rule(rule).display_label(), reason })
        }
    }
}

/// `W · θ`: substitutes every state letter, freely reduces and trims tape
/// letters off both ends.
pub fn apply_rule(m: &SMachine, w: &AdmissibleWord, rule: RuleRef) -> Result<AdmissibleWord> {
    check_applicable(m, w, rule)?;
    let trimmed = substitute(m, w, rule).ok_or_else(|| Error::MalformedWord("all state letters cancelled".into()))?;
    AdmissibleWord::new(&m.hardware, trimmed)
}

/// [`apply_rule`] without error reporting, for the enumerators.
pub fn try_apply(m: &SMachine, w: &AdmissibleWord, rule: RuleRef) -> Option<AdmissibleWord> {
    if first_obstruction(m, w, rule).is_some() {
        return None;
    }
    let trimmed = substitute(m, w, rule)?;
    // Substitution keeps the word reduced and every sector over its alphabet;
    // only cancelling state letters can break admissibility.
    let alpha = m.alphabet();
    if trimmed.iter().filter(|l| alpha.is_state(l.sym)).count() != w.state_count(alpha) {
        crate::machine::check_admissible(&m.hardware, &trimmed).ok()?;
    }
    Some(AdmissibleWord::from_trusted(trimmed))
}

fn substitute(m: &SMachine, w: &AdmissibleWord, rule: RuleRef) -> Option<Vec<Letter>> {
    let alpha = m.alphabet();
    let r = m.rule(rule);
    let mut out: Vec<Letter> = Vec::with_capacity(w.len() + 8);
    for &l in w.letters() {
        match alpha.part_of(l.sym) {
            None => push_reduced(&mut out, l),
            Some(part) => {
                let p = &r.parts[part];
                if !l.inv {
                    for &x in p.left.letters() {
                        push_reduced(&mut out, x);
                    }
                    push_reduced(&mut out, Letter::new(p.to));
                    for &x in p.right.letters() {
                        push_reduced(&mut out, x);
                    }
                } else {
                    for x in p.right.letters().iter().rev() {
                        push_reduced(&mut out, x.inverse());
                    }
                    push_reduced(&mut out, Letter::inverse_of(p.to));
                    for x in p.left.letters().iter().rev() {
                        push_reduced(&mut out, x.inverse());
                    }
                }
            }
        }
    }
    let a = out.iter().position(|l| alpha.is_state(l.sym))?;
    let b = out.iter().rposition(|l| alpha.is_state(l.sym))?;
    out.truncate(b + 1);
    out.drain(..a);
    Some(out)
}

/// `W₀ → … → Wₜ` with its history.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Computation {
    pub history: History,
    pub trace: Vec<AdmissibleWord>,
}

impl Computation {
    pub fn start(&self) -> &AdmissibleWord {
        &self.trace[0]
    }

    pub fn end(&self) -> &AdmissibleWord {
        self.trace.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.history.len()
    }

    pub fn is_empty(&self) -> bool {
        self.history.is_empty()
    }

    /// Replays the history and checks every trace entry.
    pub fn verify(&self, m: &SMachine) -> Result<()> {
        let replay = run_history(m, self.start(), &self.history)?;
        if replay.trace != self.trace {
            return Err(Error::MalformedWord("trace does not match its history".into()));
        }
        Ok(())
    }
}

pub fn run_history(m: &SMachine, w: &AdmissibleWord, h: &History) -> Result<Computation> {
    let mut trace = Vec::with_capacity(h.len() + 1);
    trace.push(w.clone());
    for (k, &r) in h.0.iter().enumerate() {
        let next = apply_rule(m, trace.last().unwrap(), r).map_err(|e| match e {
            Error::NotApplicable { rule, .. } => Error::NotApplicableAt { index: k, rule },
            other => other,
        })?;
        trace.push(next);
    }
    Ok(Computation { history: h.clone(), trace })
}

/// One symbol of a step history: a rule set `(i)` or a transition `(ij)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum StepSymbol {
    Set(u8),
    Transition { from: u8, to: u8 },
}

impl fmt::Display for StepSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepSymbol::Set(i) => write!(f, "({i})"),
            StepSymbol::Transition { from, to } => write!(f, "({from}{to})"),
        }
    }
}

pub fn format_step_history(s: &[StepSymbol]) -> String {
    s.iter().map(ToString::to_string).collect()
}

/// Collapses maximal runs of same-set rules; transitions become two-digit
/// symbols, inverted transitions swap their digits. The start rule θ₁ is
/// `(01)` and the accept rule θ₀ is `(50)`.
pub fn step_history(h: &History, m: &SMachine) -> Result<Vec<StepSymbol>> {
    let mut out: Vec<StepSymbol> = Vec::new();
    for &r in &h.0 {
        let rule = m.rule(r);
        let (a, b) = match rule.tag.set {
            Some(SetTag::Set(i)) => {
                let s = StepSymbol::Set(i);
                if out.last() != Some(&s) {
                    out.push(s);
                }
                continue;
            }
            Some(SetTag::Transition(i)) => (i, i + 1),
            Some(SetTag::Start) => (0, 1),
            Some(SetTag::Accept) => (5, 0),
            None => return Err(Error::UntaggedRule(rule.display_label())),
        };
        let (from, to) = if r.is_positive() { (a, b) } else { (b, a) };
        out.push(StepSymbol::Transition { from, to });
    }
    Ok(out)
}

fn is_theta23(m: &SMachine, r: RuleRef) -> bool {
    m.rule(r).tag.set == Some(SetTag::Transition(2))
}

/// Whether `next` may follow `prev` in an eligible history: no mutually
/// inverse neighbours except θ(23)·θ(23)⁻¹.
pub fn eligible_step(m: &SMachine, prev: RuleRef, next: RuleRef) -> bool {
    prev != next.inverse() || (prev.is_positive() && is_theta23(m, prev))
}

pub fn is_eligible(h: &History, m: &SMachine) -> bool {
    h.0.windows(2).all(|w| eligible_step(m, w[0], w[1]))
}

pub fn first_ineligible(h: &History, m: &SMachine) -> Option<usize> {
    h.0.windows(2).position(|w| !eligible_step(m, w[0], w[1])).map(|i| i + 1)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum HistoryFilter {
    Reduced,
    Eligible,
    All,
}

impl HistoryFilter {
    pub fn admits(self, m: &SMachine, prev: Option<RuleRef>, next: RuleRef) -> bool {
        match (self, prev) {
            (_, None) | (HistoryFilter::All, _) => true,
            (HistoryFilter::Reduced, Some(p)) => p != next.inverse(),
            (HistoryFilter::Eligible, Some(p)) => eligible_step(m, p, next),
        }
    }
}

impl std::str::FromStr for HistoryFilter {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "reduced" => Ok(HistoryFilter::Reduced),
            "eligible" => Ok(HistoryFilter::Eligible),
            "all" => Ok(HistoryFilter::All),
            _ => Err(format!("unknown history filter `{s}`")),
        }
    }
}

/// Signed rules applicable to `w`, in enumeration order.
pub fn applicable_rules<'a>(
    m: &'a SMachine,
    w: &'a AdmissibleWord,
) -> impl Iterator<Item = (RuleRef, AdmissibleWord)> + 'a {
    let first = w.letters()[0].sym;
    m.rules_rewriting(first)
        .iter()
        .filter_map(move |&r| try_apply(m, w, r).map(|v| (r, v)))
}

/// Options shared by the enumerators.
#[derive(Clone)]
pub struct EnumOptions {
    pub depth: usize,
    pub filter: HistoryFilter,
    /// Indexed by [`RuleRef::base_index`]; `None` allows every rule.
    pub allowed: Option<Vec<bool>>,
}

impl EnumOptions {
    pub fn new(depth: usize, filter: HistoryFilter) -> Self {
        EnumOptions { depth, filter, allowed: None }
    }

    pub fn with_allowed(mut self, allowed: Vec<bool>) -> Self {
        self.allowed = Some(allowed);
        self
    }

    fn allows(&self, r: RuleRef) -> bool {
        self.allowed.as_ref().is_none_or(|a| a[r.base_index()])
    }
}

/// Breadth-first stream of every computation from a word, each exactly once,
/// in a deterministic order (shorter first; siblings by rule label with the
/// positive rule before its inverse).
pub struct Enumerator<'a> {
    machine: &'a SMachine,
    opts: EnumOptions,
    queue: VecDeque<Computation>,
}

pub fn enumerate_computations<'a>(
    m: &'a SMachine,
    w: &AdmissibleWord,
    depth: usize,
    filter: HistoryFilter,
) -> Enumerator<'a> {
    enumerate_with(m, w, EnumOptions::new(depth, filter))
}

pub fn enumerate_with<'a>(m: &'a SMachine, w: &AdmissibleWord, opts: EnumOptions) -> Enumerator<'a> {
    let mut queue = VecDeque::new();
    queue.push_back(Computation { history: History::default(), trace: vec![w.clone()] });
    Enumerator { machine: m, opts, queue }
}

impl Iterator for Enumerator<'_> {
    type Item = Computation;

    fn next(&mut self) -> Option<Computation> {
        let c = self.queue.pop_front()?;
        if c.len() < self.opts.depth {
            let last = c.history.0.last().copied();
            for (r, v) in applicable_rules(self.machine, c.end()) {
                if !self.opts.allows(r) || !self.opts.filter.admits(self.machine, last, r) {
                    continue;
                }
                let mut h = c.history.clone();
                h.0.push(r);
                let mut trace = c.trace.clone();
                trace.push(v);
                self.queue.push_back(Computation { history: h, trace });
            }
        }
        Some(c)
    }
}

/// Depth-first visit of the same computation set as [`Enumerator`], with
/// memory linear in the depth. The callback sees each trace and history
/// (including the empty computation) and returns `false` to prune below it.
pub fn walk_computations<F>(m: &SMachine, w: &AdmissibleWord, opts: &EnumOptions, mut visit: F)
where
    F: FnMut(&[AdmissibleWord], &[RuleRef]) -> bool,
{
    let mut trace = vec![w.clone()];
    let mut hist = Vec::new();
    walk_rec(m, opts, &mut trace, &mut hist, &mut visit);
}

fn walk_rec<F>(
    m: &SMachine,
    opts: &EnumOptions,
    trace: &mut Vec<AdmissibleWord>,
    hist: &mut Vec<RuleRef>,
    visit: &mut F,
) where
    F: FnMut(&[AdmissibleWord], &[RuleRef]) -> bool,
{
    if !visit(trace, hist) || hist.len() >= opts.depth {
        return;
    }
    let cur = trace.last().unwrap().clone();
    let last = hist.last().copied();
    for (r, v) in applicable_rules(m, &cur) {
        if !opts.allows(r) || !opts.filter.admits(m, last, r) {
            continue;
        }
        trace.push(v);
        hist.push(r);
        walk_rec(m, opts, trace, hist, visit);
        trace.pop();
        hist.pop();
    }
}
