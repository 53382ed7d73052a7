//! Permissible words, trapezia built band by band from computations, disk
//! words and the cell counts of their disk diagrams.
//!
//! A band for a positive rule θ over a bottom word B has one cell per letter
//! of B: the (θ,q)-relator of the part for a state letter and the
//! (θ,a)-relator for a tape letter. A band for θ⁻¹ is the θ-band read upside
//! down, so its cells are those of the θ-band whose bottom is the result.

use std::collections::HashSet;
use std::fmt::Write as _;

use crate::compute::{first_ineligible, is_eligible, run_history, Computation};
use crate::constructors::MainMachineBundle;
use crate::error::{Error, Result};
use crate::machine::{format_letters, AdmissibleWord, History, RuleRef, SMachine};
use crate::presentation::{sup_mode, theta_gen, GenKind, GroupGenerator, Presentation, RelatorTag, SupMode};
use crate::search::{bidirectional_search, SearchOutcome};
use crate::word::{cyclic_key, push_reduced, Letter, Word};

/// A word whose letters may carry superscripts and whose erasure is
/// admissible.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PermissibleWord(pub Vec<Letter>);

impl PermissibleWord {
    pub fn erase(&self) -> Vec<Letter> {
        self.0.iter().map(|l| l.erased()).collect()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }
}

fn bump(i: u32, l: u32, up: bool) -> u32 {
    match (up, i) {
        (true, i) if i >= l => 1,
        (true, i) => i + 1,
        (false, i) if i <= 1 => l,
        (false, i) => i - 1,
    }
}

/// Superscript step between neighbours: +1 across `q t` with q in the last
/// part and t in part 0, −1 across its inverse, 0 elsewhere.
fn junction_step(m: &SMachine, a: Letter, b: Letter) -> i8 {
    let hw = &m.hardware;
    if !hw.circular {
        return 0;
    }
    let last = hw.num_parts() - 1;
    match (hw.alphabet.part_of(a.sym), hw.alphabet.part_of(b.sym)) {
        (Some(pa), Some(0)) if pa == last && !a.inv && !b.inv => 1,
        (Some(0), Some(pb)) if pb == last && a.inv && b.inv => -1,
        _ => 0,
    }
}

/// Whether θ-admissible words lift with superscripts.
pub fn needs_superscript(m: &SMachine, rule: RuleRef) -> bool {
    match sup_mode(m.rule(rule).tag.set) {
        SupMode::Full => true,
        SupMode::Mixed => rule.is_positive(),
        SupMode::Plain => false,
    }
}

/// Propagates `first` along `letters` by the two-letter rule.
fn lift(m: &SMachine, letters: &[Letter], first: Option<u32>, l: u32) -> Vec<Letter> {
    let Some(mut cur) = first else {
        return letters.iter().map(|x| x.erased()).collect();
    };
    let mut out = Vec::with_capacity(letters.len());
    for (k, &x) in letters.iter().enumerate() {
        if k > 0 {
            match junction_step(m, letters[k - 1], x) {
                1 => cur = bump(cur, l, true),
                -1 => cur = bump(cur, l, false),
                _ => {}
            }
        }
        out.push(x.with_sup(Some(cur)));
    }
    out
}

/// The permissible lift of a θ-admissible word: unique once the first
/// superscript is chosen, and the word itself for rules without
/// superscripts.
pub fn make_permissible(
    m: &SMachine,
    v: &AdmissibleWord,
    rule: RuleRef,
    first: Option<u32>,
    l: u32,
) -> Result<PermissibleWord> {
    let needs = needs_superscript(m, rule);
    match (needs, first) {
        (true, None) => Err(Error::SuperscriptRequired(m.rule_name(rule))),
        (false, Some(_)) => Err(Error::SuperscriptForbidden(m.rule_name(rule))),
        (_, Some(i)) if i == 0 || i > l => Err(Error::SuperscriptMismatch(format!("superscript {i} outside 1..={l}"))),
        _ => Ok(PermissibleWord(lift(m, v.letters(), first, l))),
    }
}

/// Checks the two-letter superscript rule and admissibility of the erasure.
pub fn is_permissible(m: &SMachine, w: &PermissibleWord, l: u32) -> bool {
    if AdmissibleWord::new(&m.hardware, w.erase()).is_err() {
        return false;
    }
    let v = &w.0;
    if v.iter().all(|x| x.sup.is_none()) {
        return true;
    }
    v.windows(2).all(|p| match (p[0].sup, p[1].sup) {
        (Some(a), Some(b)) => match junction_step(m, p[0], p[1]) {
            1 => b == bump(a, l, true),
            -1 => b == bump(a, l, false),
            _ => a == b,
        },
        _ => false,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cell {
    pub tag: RelatorTag,
    /// Boundary read as bottom · right θ-edge · top⁻¹ · left θ-edge⁻¹.
    pub boundary: Word,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Band {
    pub rule: RuleRef,
    pub bottom: PermissibleWord,
    pub top: PermissibleWord,
    pub cells: Vec<Cell>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trapezium {
    pub history: History,
    pub bands: Vec<Band>,
}

impl Trapezium {
    pub fn height(&self) -> usize {
        self.bands.len()
    }

    pub fn area(&self) -> usize {
        self.bands.iter().map(|b| b.cells.len()).sum()
    }

    pub fn bottom(&self) -> &PermissibleWord {
        &self.bands[0].bottom
    }

    pub fn top(&self) -> &PermissibleWord {
        &self.bands[self.bands.len() - 1].top
    }

    /// One line per band: `<rule> cells=<n> : <bottom> -> <top>`.
    pub fn dump(&self, m: &SMachine) -> String {
        let alpha = m.alphabet();
        let mut out = format!("trapezium height={} area={}\n", self.height(), self.area());
        for b in &self.bands {
            let _ = writeln!(
                out,
                "{} cells={} : {} -> {}",
                m.rule_name(b.rule),
                b.cells.len(),
                format_letters(alpha, &b.bottom.0),
                format_letters(alpha, &b.top.0)
            );
        }
        out
    }
}

pub fn trapezium_area(t: &Trapezium) -> usize {
    t.area()
}

/// Builds trapezia for one machine against its compiled presentation and
/// checks every cell against the relators.
pub struct TrapeziumBuilder<'a> {
    pub machine: &'a SMachine,
    pub presentation: &'a Presentation,
    keys: HashSet<Word>,
}

impl<'a> TrapeziumBuilder<'a> {
    pub fn new(machine: &'a SMachine, presentation: &'a Presentation) -> Self {
        let keys = presentation.relators.iter().map(|r| cyclic_key(&r.word)).collect();
        TrapeziumBuilder { machine, presentation, keys }
    }

    pub fn is_relator(&self, w: &Word) -> bool {
        self.keys.contains(&cyclic_key(w))
    }

    fn l(&self) -> u32 {
        self.presentation.l
    }

    fn gen(&self, g: GroupGenerator, inv: bool) -> Result<Letter> {
        Ok(Letter::signed(self.presentation.gen(&g)?, inv))
    }

    fn letter_gen(&self, x: Letter) -> Result<Letter> {
        let alpha = self.machine.alphabet();
        let kind = if alpha.is_state(x.sym) { GenKind::Q } else { GenKind::Tape };
        self.gen(GroupGenerator::letter(kind, alpha.name(x.sym), x.sup), x.inv)
    }

    /// Cells and reduced top of the band of the positive rule `base` over
    /// `bottom`.
    fn positive_band(&self, base: RuleRef, bottom: &[Letter]) -> Result<(Vec<Cell>, Vec<Letter>)> {
        let m = self.machine;
        let hw = &m.hardware;
        let alpha = &hw.alphabet;
        let r = m.rule(base);
        let mode = sup_mode(r.tag.set);
        let (n, l, circ) = (hw.num_parts(), self.l(), hw.circular);
        let th = |j: usize, s: Option<u32>| theta_gen(&r.label, j, s, n, l, circ);
        let mut cells = Vec::with_capacity(bottom.len());
        let mut top: Vec<Letter> = Vec::new();
        let mut sector: Option<usize> = None;
        let mut last_right: Option<GroupGenerator> = None;
        for &x in bottom {
            let s = if mode == SupMode::Plain { None } else { x.sup };
            let top_sup = if mode == SupMode::Full { s } else { None };
            let (left, right, tag, top_piece) = match alpha.part_of(x.sym) {
                Some(j) => {
                    let p = &r.parts[j];
                    if p.from != x.sym {
                        return Err(Error::WitnessInvalid(format!("{} is not rewritten by {}", alpha.name(x.sym), r.label)));
                    }
                    let v: Vec<Letter> = p
                        .left
                        .letters()
                        .iter()
                        .copied()
                        .chain([Letter::new(p.to)])
                        .chain(p.right.letters().iter().copied())
                        .map(|y| y.with_sup(top_sup))
                        .collect();
                    sector = if x.inv { hw.sector_left_of(j) } else { hw.sector_right_of(j) };
                    let (a, b) = (th(j, s), th(j + 1, s));
                    if x.inv {
                        (b, a, RelatorTag::ThetaQ, v.iter().rev().map(|y| y.inverse()).collect::<Vec<_>>())
                    } else {
                        (a, b, RelatorTag::ThetaQ, v)
                    }
                }
                None => {
                    let sec = sector.ok_or_else(|| Error::WitnessInvalid("tape letter outside a sector".into()))?;
                    if !r.domains[sec].contains(&x.sym) {
                        return Err(Error::WitnessInvalid(format!("{} locked in sector {sec}", alpha.name(x.sym))));
                    }
                    let e = th(sec + 1, s);
                    (e.clone(), e, RelatorTag::ThetaA, vec![x.with_sup(top_sup)])
                }
            };
            if let Some(prev) = &last_right {
                if *prev != left {
                    return Err(Error::WitnessInvalid(format!("θ-edges {prev} and {left} do not match")));
                }
            }
            let mut boundary = vec![self.letter_gen(x)?, self.gen(right.clone(), false)?];
            for &y in top_piece.iter().rev() {
                boundary.push(self.letter_gen(y.inverse())?);
            }
            boundary.push(self.gen(left, true)?);
            let boundary = Word(boundary);
            if !self.is_relator(&boundary) {
                return Err(Error::WitnessInvalid(format!(
                    "cell {} is not a relator",
                    self.presentation.format_word(&boundary)
                )));
            }
            cells.push(Cell { tag, boundary });
            for y in top_piece {
                push_reduced(&mut top, y);
            }
            last_right = Some(right);
        }
        let first = top.iter().position(|y| alpha.is_state(y.sym));
        let last = top.iter().rposition(|y| alpha.is_state(y.sym));
        let top = match (first, last) {
            (Some(a), Some(b)) => top[a..=b].to_vec(),
            _ => return Err(Error::WitnessInvalid("band top has no state letters".into())),
        };
        Ok((cells, top))
    }

    /// The trapezium of an eligible computation; `first` is the superscript
    /// of the first letter of the bottom, required exactly when the first
    /// rule lifts with superscripts.
    pub fn computation_to_trapezium(&self, c: &Computation, first: Option<u32>) -> Result<Trapezium> {
        let m = self.machine;
        if c.history.0.is_empty() {
            return Err(Error::EmptyHistory);
        }
        if !is_eligible(&c.history, m) {
            return Err(Error::IneligibleHistory(first_ineligible(&c.history, m).unwrap_or(0)));
        }
        make_permissible(m, c.start(), c.history.0[0], first, self.l())?;
        let mut cur = first;
        let mut bands: Vec<Band> = Vec::with_capacity(c.len());
        for (t, &rule) in c.history.0.iter().enumerate() {
            let (before, after) = (&c.trace[t], &c.trace[t + 1]);
            let base = RuleRef::positive(rule.base_index());
            let mode = sup_mode(m.rule(base).tag.set);
            let sup = if mode == SupMode::Plain {
                None
            } else {
                Some(cur.unwrap_or(1))
            };
            let pos_bottom = if rule.is_positive() { before } else { after };
            let lifted = lift(m, pos_bottom.letters(), sup, self.l());
            let (cells, pos_top) = self.positive_band(base, &lifted)?;
            let other = if rule.is_positive() { after } else { before };
            let erased: Vec<Letter> = pos_top.iter().map(|x| x.erased()).collect();
            if erased != other.letters() {
                return Err(Error::WitnessInvalid(format!("band {} does not reproduce the trace", t + 1)));
            }
            let (bottom, top) = if rule.is_positive() {
                (PermissibleWord(lifted), PermissibleWord(pos_top))
            } else {
                (PermissibleWord(pos_top), PermissibleWord(lifted))
            };
            if let Some(prev) = bands.last() {
                if prev.top != bottom {
                    return Err(Error::WitnessInvalid(format!("band {} does not continue band {t}", t + 1)));
                }
            }
            if let Some(s) = top.0.first().and_then(|x| x.sup) {
                cur = Some(s);
            }
            bands.push(Band { rule, bottom, top, cells });
        }
        Ok(Trapezium { history: c.history.clone(), bands })
    }
}

/// Result of a disk-word check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DiskVerdict {
    /// `V^∅ = W^L` and the history certifies W: it runs from W to W_ac, or
    /// from s₁(M) to W.
    Yes { w: AdmissibleWord, history: History, from_s1: bool },
    No(String),
    Unknown,
}

/// Decides, where a certificate can be found within `budget` rule
/// applications, whether `v` is a disk word.
pub fn is_disk_word(v: &[Letter], b: &MainMachineBundle, budget: usize) -> DiskVerdict {
    let m = &b.machine;
    let l = b.l() as usize;
    let erased: Vec<Letter> = v.iter().map(|x| x.erased()).collect();
    if erased.is_empty() || erased.len() % l != 0 {
        return DiskVerdict::No(format!("length {} is not a positive multiple of L = {l}", erased.len()));
    }
    let root = &erased[..erased.len() / l];
    if erased.chunks(root.len()).any(|c| c != root) {
        return DiskVerdict::No("erasure is not an L-th power".into());
    }
    let w = match AdmissibleWord::new(&m.hardware, root.to_vec()) {
        Ok(w) => w,
        Err(e) => return DiskVerdict::No(format!("root is not admissible: {e}")),
    };
    let ac = b.w_ac();
    if w == ac {
        return DiskVerdict::Yes { w, history: History(vec![]), from_s1: false };
    }
    // Words of the W(k,k) family carry a constructive accepting history.
    let tape = w.tape_len(m.alphabet()) as i64;
    for k in -tape..=tape {
        if b.w_kk(k, k) == w {
            if let Some(h) = b.acceptance_witness(k) {
                if run_history(m, &w, &h).is_ok_and(|c| c.end() == &ac) {
                    return DiskVerdict::Yes { w, history: h, from_s1: false };
                }
            }
        }
    }
    let forward = bidirectional_search(m, &w, &ac, budget);
    if let SearchOutcome::Found(history) = forward {
        return DiskVerdict::Yes { w, history, from_s1: false };
    }
    let s1 = b.s1();
    let back = bidirectional_search(m, &s1, &w, budget);
    if let SearchOutcome::Found(history) = back {
        return DiskVerdict::Yes { w, history, from_s1: true };
    }
    if forward == SearchOutcome::Disconnected && back == SearchOutcome::Disconnected {
        DiskVerdict::No("neither W_ac nor s1 is reachable from the root".into())
    } else {
        DiskVerdict::Unknown
    }
}

/// Cells of the disk diagram for `w^L`: one hub and L copies of the
/// trapezium of the witness `c`.
pub fn disk_diagram_cells(
    tb: &TrapeziumBuilder<'_>,
    b: &MainMachineBundle,
    w: &AdmissibleWord,
    c: &Computation,
) -> Result<usize> {
    let m = &b.machine;
    let ac = b.w_ac();
    if c.history.0.is_empty() {
        return if w == &ac && c.start() == w {
            Ok(1)
        } else {
            Err(Error::WitnessInvalid("an empty witness only certifies W_ac".into()))
        };
    }
    c.verify(m).map_err(|e| Error::WitnessInvalid(e.to_string()))?;
    let accepting = c.start() == w && c.end() == &ac;
    let from_s1 = c.start() == &b.s1() && c.end() == w;
    if !accepting && !from_s1 {
        return Err(Error::WitnessInvalid("computation neither accepts W nor reaches it from s1".into()));
    }
    let first = needs_superscript(m, c.history.0[0]).then_some(1);
    let t = tb.computation_to_trapezium(c, first)?;
    Ok(1 + b.l() as usize * t.area())
}

/// `W^L` as a plain word.
pub fn power_word(w: &AdmissibleWord, l: u32) -> Vec<Letter> {
    (0..l).flat_map(|_| w.letters().iter().copied()).collect()
}
