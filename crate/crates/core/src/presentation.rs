//! Group presentations compiled from machines.
//!
//! Every positive rule θ contributes, for each part j, a (θ,q)-relator
//! `Uⱼ θⱼ₊₁ Vⱼ⁻¹ θⱼ⁻¹` where the part rewrites `Uⱼ → Vⱼ`, and for each
//! sector s and each letter `a` it admits, a (θ,a)-relator
//! `a θₛ₊₁ a⁻¹ θₛ₊₁⁻¹`. Sector s lies between parts s and s+1, so its
//! θ-letter is θₛ₊₁.
//!
//! Rules of the input half of the main machine (start, Θ₁, θ(12), Θ₂) are
//! compiled L times with superscripts 1..L on every letter; θ(23) keeps the
//! superscripts on its bottom and θ-letters only. On a circular base θ₀ is
//! not a generator of its own: θ₀⁽ⁱ⁾ = θ_N⁽ⁱ⁻¹⁾ and θ₀ = θ_N.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::constructors::MainMachineBundle;
use crate::error::{Error, Result};
use crate::machine::{SMachine, SetTag, SymbolKind};
use crate::word::{cyclically_reduce, least_rotation, push_reduced, Letter, Sym, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GenKind {
    Q,
    Tape,
    Theta,
    Stable,
}

impl GenKind {
    fn key(self) -> &'static str {
        match self {
            GenKind::Q => "q",
            GenKind::Tape => "tape",
            GenKind::Theta => "theta",
            GenKind::Stable => "stable",
        }
    }
}

/// A generator: a state or tape letter, a θ-letter `label/j`, or a stable
/// letter, with an optional superscript in `1..=L`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroupGenerator {
    pub kind: GenKind,
    /// Letter name, or rule label for θ-letters.
    pub name: String,
    /// Subscript of a θ-letter.
    pub index: Option<usize>,
    pub sup: Option<u32>,
}

impl GroupGenerator {
    pub fn letter(kind: GenKind, name: impl Into<String>, sup: Option<u32>) -> Self {
        GroupGenerator { kind, name: name.into(), index: None, sup }
    }

    pub fn theta(label: impl Into<String>, j: usize, sup: Option<u32>) -> Self {
        GroupGenerator { kind: GenKind::Theta, name: label.into(), index: Some(j), sup }
    }

    pub fn erased(&self) -> Self {
        GroupGenerator { sup: None, ..self.clone() }
    }

    fn parse(kind: GenKind, tok: &str) -> Result<Self> {
        let bad = || Error::UnknownGenerator(tok.to_string());
        let (body, sup) = match tok.strip_suffix(')').and_then(|t| t.rsplit_once('(')) {
            Some((b, s)) if kind != GenKind::Theta || b.contains('/') => {
                (b, Some(s.parse::<u32>().map_err(|_| bad())?))
            }
            _ => (tok, None),
        };
        if kind == GenKind::Theta {
            let (label, j) = body.rsplit_once('/').ok_or_else(bad)?;
            let j = j.parse().map_err(|_| bad())?;
            Ok(GroupGenerator::theta(label, j, sup))
        } else {
            Ok(GroupGenerator::letter(kind, body, sup))
        }
    }
}

impl fmt::Display for GroupGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if let Some(j) = self.index {
            write!(f, "/{j}")?;
        }
        if let Some(i) = self.sup {
            write!(f, "({i})")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RelatorTag {
    ThetaQ,
    ThetaA,
    Hub,
    Hnn,
}

impl RelatorTag {
    pub fn as_str(self) -> &'static str {
        match self {
            RelatorTag::ThetaQ => "theta-q",
            RelatorTag::ThetaA => "theta-a",
            RelatorTag::Hub => "hub",
            RelatorTag::Hnn => "hnn",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        [RelatorTag::ThetaQ, RelatorTag::ThetaA, RelatorTag::Hub, RelatorTag::Hnn]
            .into_iter()
            .find(|t| t.as_str() == s)
    }
}

/// A relator: a cyclically reduced word over generator indices, stored in
/// its least rotation. Letters never carry `sup`; superscripts belong to
/// the generators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Relator {
    pub word: Word,
    pub tag: RelatorTag,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Presentation {
    pub name: String,
    pub l: u32,
    pub n: usize,
    /// Names of the letters μ counts (the t-part of a circular base).
    pub t_letters: BTreeSet<String>,
    generators: Vec<GroupGenerator>,
    index: HashMap<GroupGenerator, Sym>,
    pub relators: Vec<Relator>,
}

fn normalize(w: &Word) -> Word {
    least_rotation(&cyclically_reduce(w))
}

impl Presentation {
    /// Builds a presentation from relators over generator names; the
    /// generator table is the sorted union of `extra` and every letter used.
    pub fn from_parts(
        name: impl Into<String>,
        l: u32,
        n: usize,
        t_letters: BTreeSet<String>,
        extra: impl IntoIterator<Item = GroupGenerator>,
        rels: Vec<(Vec<(GroupGenerator, bool)>, RelatorTag)>,
    ) -> Presentation {
        let mut gens: BTreeSet<GroupGenerator> = extra.into_iter().collect();
        for (w, _) in &rels {
            gens.extend(w.iter().map(|(g, _)| g.clone()));
        }
        let generators: Vec<GroupGenerator> = gens.into_iter().collect();
        let index = generators.iter().enumerate().map(|(i, g)| (g.clone(), i as Sym)).collect();
        let mut p = Presentation { name: name.into(), l, n, t_letters, generators, index, relators: vec![] };
        for (w, tag) in rels {
            let word = Word(w.iter().map(|(g, inv)| Letter::signed(p.index[g], *inv)).collect());
            p.push_relator(word, tag);
        }
        p
    }

    pub fn generators(&self) -> &[GroupGenerator] {
        &self.generators
    }

    pub fn generator(&self, s: Sym) -> &GroupGenerator {
        &self.generators[s as usize]
    }

    pub fn num_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn gen(&self, g: &GroupGenerator) -> Result<Sym> {
        self.index.get(g).copied().ok_or_else(|| Error::UnknownGenerator(g.to_string()))
    }

    /// Appends a new generator (it must sort after every existing one, as
    /// stable letters do, so indices stay put).
    pub fn add_generator(&mut self, g: GroupGenerator) -> Result<Sym> {
        if self.index.contains_key(&g) {
            return Err(Error::InvalidMachine(format!("generator {g} already declared")));
        }
        if self.generators.last().is_some_and(|last| *last > g) {
            return Err(Error::InvalidMachine(format!("generator {g} would reorder the table")));
        }
        let s = self.generators.len() as Sym;
        self.index.insert(g.clone(), s);
        self.generators.push(g);
        Ok(s)
    }

    pub fn push_relator(&mut self, w: Word, tag: RelatorTag) {
        self.relators.push(Relator { word: normalize(&w), tag });
    }

    pub fn count(&self, tag: RelatorTag) -> usize {
        self.relators.iter().filter(|r| r.tag == tag).count()
    }

    /// Maps machine letters (with optional superscripts) to generators.
    pub fn lift(&self, m: &SMachine, letters: &[Letter]) -> Result<Word> {
        let alpha = m.alphabet();
        letters
            .iter()
            .map(|l| {
                let kind = if alpha.is_state(l.sym) { GenKind::Q } else { GenKind::Tape };
                let g = GroupGenerator::letter(kind, alpha.name(l.sym), l.sup);
                Ok(Letter::signed(self.gen(&g)?, l.inv))
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }

    /// The θ-letter θⱼ⁽ⁱ⁾ of `label`, with θ₀ folded onto θ_N on a circular
    /// base.
    pub fn theta(&self, label: &str, j: usize, sup: Option<u32>, circular: bool) -> Result<Sym> {
        self.gen(&theta_gen(label, j, sup, self.n, self.l, circular))
    }

    pub fn format_word(&self, w: &Word) -> String {
        w.letters()
            .iter()
            .map(|l| {
                let g = self.generator(l.sym);
                if l.inv {
                    format!("{g}^-1")
                } else {
                    g.to_string()
                }
            })
            .collect::<Vec<_>>()
            .join(".")
    }

    pub fn parse_word(&self, s: &str) -> Result<Word> {
        parse_word_with(&self.names(), s)
    }

    fn names(&self) -> HashMap<String, Sym> {
        self.generators.iter().enumerate().map(|(i, g)| (g.to_string(), i as Sym)).collect()
    }
}

fn parse_word_with(by_name: &HashMap<String, Sym>, s: &str) -> Result<Word> {
    s.split('.')
        .filter(|t| !t.is_empty())
        .map(|t| {
            let (name, inv) = match t.strip_suffix("^-1") {
                Some(n) => (n, true),
                None => (t, false),
            };
            by_name
                .get(name)
                .map(|&g| Letter::signed(g, inv))
                .ok_or_else(|| Error::UnknownGenerator(name.to_string()))
        })
        .collect::<Result<Vec<_>>>()
        .map(Word)
}

fn prev_sup(i: u32, l: u32) -> u32 {
    if i <= 1 {
        l
    } else {
        i - 1
    }
}

pub fn theta_gen(label: &str, j: usize, sup: Option<u32>, n: usize, l: u32, circular: bool) -> GroupGenerator {
    if circular && j == 0 {
        GroupGenerator::theta(label, n, sup.map(|i| prev_sup(i, l)))
    } else {
        GroupGenerator::theta(label, j, sup)
    }
}

/// How a rule's relators carry superscripts.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SupMode {
    /// L copies, every letter superscripted.
    Full,
    /// L copies; the top word Vⱼ and the right-hand tape letter are plain.
    Mixed,
    Plain,
}

pub fn sup_mode(tag: Option<SetTag>) -> SupMode {
    match tag {
        Some(SetTag::Start | SetTag::Set(1) | SetTag::Transition(1) | SetTag::Set(2)) => SupMode::Full,
        Some(SetTag::Transition(2)) => SupMode::Mixed,
        _ => SupMode::Plain,
    }
}

type RawRel = (Vec<(GroupGenerator, bool)>, RelatorTag);

fn compile_relators(m: &SMachine, l: u32, mode_of: impl Fn(Option<SetTag>) -> SupMode) -> Vec<RawRel> {
    let hw = &m.hardware;
    let alpha = m.alphabet();
    let n = hw.num_parts();
    let circ = hw.circular;
    let lg = |s: Sym, sup: Option<u32>, inv: bool| {
        let kind = if alpha.is_state(s) { GenKind::Q } else { GenKind::Tape };
        (GroupGenerator::letter(kind, alpha.name(s), sup), inv)
    };
    let mut out = Vec::new();
    for r in m.positive_rules() {
        let mode = mode_of(r.tag.set);
        let sups: Vec<Option<u32>> = match mode {
            SupMode::Plain => vec![None],
            _ => (1..=l).map(Some).collect(),
        };
        for &s in &sups {
            let top = if mode == SupMode::Full { s } else { None };
            let th = |j: usize, inv: bool| (theta_gen(&r.label, j, s, n, l, circ), inv);
            for (j, p) in r.parts.iter().enumerate() {
                let mut w = vec![lg(p.from, s, false), th(j + 1, false)];
                let v: Vec<Letter> = p
                    .left
                    .letters()
                    .iter()
                    .copied()
                    .chain(std::iter::once(Letter::new(p.to)))
                    .chain(p.right.letters().iter().copied())
                    .collect();
                w.extend(v.iter().rev().map(|x| lg(x.sym, top, !x.inv)));
                w.push(th(j, true));
                out.push((w, RelatorTag::ThetaQ));
            }
            for (sec, dom) in r.domains.iter().enumerate() {
                for &a in dom {
                    let w = vec![lg(a, s, false), th(sec + 1, false), lg(a, top, true), th(sec + 1, true)];
                    out.push((w, RelatorTag::ThetaA));
                }
            }
        }
    }
    out
}

fn t_letters(m: &SMachine) -> BTreeSet<String> {
    let hw = &m.hardware;
    if !hw.circular {
        return BTreeSet::new();
    }
    hw.parts[0].letters.iter().map(|&s| hw.alphabet.name(s).to_string()).collect()
}

/// Presentation of a machine with no superscripts anywhere.
pub fn compile_plain(m: &SMachine, l: u32) -> Presentation {
    let rels = compile_relators(m, l, |_| SupMode::Plain);
    Presentation::from_parts(m.name.clone(), l, m.hardware.num_parts(), t_letters(m), [], rels)
}

/// The group M of the main machine: (θ,q)- and (θ,a)-relators, no hubs.
pub fn compile_group_m(b: &MainMachineBundle) -> Presentation {
    let m = &b.machine;
    let l = b.l();
    let rels = compile_relators(m, l, sup_mode);
    let alpha = m.alphabet();
    let tape = (0..alpha.len() as Sym).filter(|&s| alpha.kind(s) == SymbolKind::Tape).flat_map(|s| {
        std::iter::once(None)
            .chain((1..=l).map(Some))
            .map(move |i| GroupGenerator::letter(GenKind::Tape, alpha.name(s), i))
    });
    let extra: Vec<_> = tape.collect();
    Presentation::from_parts(format!("M({})", m.name), l, m.hardware.num_parts(), t_letters(m), extra, rels)
}

/// G = M plus the hubs `W_st⁽¹⁾⋯W_st⁽ᴸ⁾` and `W_ac^L`.
pub fn add_hub_relations(mut p: Presentation, b: &MainMachineBundle) -> Result<Presentation> {
    let m = &b.machine;
    let st = b.w_st();
    let mut hub1 = Vec::new();
    for i in 1..=p.l {
        let copy: Vec<Letter> = st.letters().iter().map(|x| x.with_sup(Some(i))).collect();
        let w = p.lift(m, &copy).map_err(|e| Error::SuperscriptMismatch(format!("W_st({i}): {e}")))?;
        hub1.extend(w.0);
    }
    let ac = p.lift(m, b.w_ac().letters())?;
    p.push_relator(Word(hub1), RelatorTag::Hub);
    p.push_relator(ac.power(p.l as usize), RelatorTag::Hub);
    p.name = format!("G({})", m.name);
    Ok(p)
}

pub fn compile_group_g(b: &MainMachineBundle) -> Result<Presentation> {
    add_hub_relations(compile_group_m(b), b)
}

/// The trimmed groups M̄ and Ḡ = M̄ / ⟨W_ac^L⟩.
pub fn compile_trimmed(b: &MainMachineBundle, trimmed: &SMachine) -> Result<(Presentation, Presentation)> {
    let mut mbar = compile_plain(trimmed, b.l());
    mbar.name = format!("Mbar({})", trimmed.name);
    let mut gbar = mbar.clone();
    let ac = gbar.lift(trimmed, trimmed.end_configuration().letters())?;
    gbar.push_relator(ac.power(gbar.l as usize), RelatorTag::Hub);
    gbar.name = format!("Gbar({})", trimmed.name);
    Ok((mbar, gbar))
}

/// G_k: a stable letter x with `x W(k,k) x⁻¹ = W_ac`.
pub fn hnn_gk(p: &Presentation, b: &MainMachineBundle, k: i64) -> Result<Presentation> {
    let m = &b.machine;
    let w = p.lift(m, b.w_kk(k, k).letters())?;
    let ac = p.lift(m, b.w_ac().letters())?;
    let mut out = p.clone();
    let x = out.add_generator(GroupGenerator::letter(GenKind::Stable, "x", None))?;
    out.push_relator(conj_rel(x, &w, &ac), RelatorTag::Hnn);
    out.name = format!("G_{k}({})", m.name);
    Ok(out)
}

/// A stable letter y commuting with `W_ac`.
pub fn hnn_gbar(p: &Presentation, m: &SMachine) -> Result<Presentation> {
    let ac = p.lift(m, m.end_configuration().letters())?;
    let mut out = p.clone();
    let y = out.add_generator(GroupGenerator::letter(GenKind::Stable, "y", None))?;
    out.push_relator(conj_rel(y, &ac, &ac), RelatorTag::Hnn);
    out.name = format!("{}+y", p.name);
    Ok(out)
}

/// `x · u · x⁻¹ · v⁻¹`.
fn conj_rel(x: Sym, u: &Word, v: &Word) -> Word {
    let mut w = vec![Letter::new(x)];
    w.extend_from_slice(u.letters());
    w.push(Letter::inverse_of(x));
    w.extend_from_slice(v.inverse().letters());
    Word(w)
}

/// Signed number of t-letters, mod L.
pub fn mu(p: &Presentation, w: &Word) -> Result<u32> {
    let mut c: i64 = 0;
    for l in w.letters() {
        let g = p.generators.get(l.sym as usize).ok_or_else(|| Error::UnknownGenerator(format!("#{}", l.sym)))?;
        if g.kind == GenKind::Q && p.t_letters.contains(&g.name) {
            c += if l.inv { -1 } else { 1 };
        }
    }
    Ok(c.rem_euclid(p.l as i64) as u32)
}

/// Deletes tape letters and reduces; q-letters are an error.
pub fn nu(p: &Presentation, w: &Word) -> Result<Word> {
    let mut out = Vec::new();
    for &l in w.letters() {
        let g = p.generators.get(l.sym as usize).ok_or_else(|| Error::UnknownGenerator(format!("#{}", l.sym)))?;
        match g.kind {
            GenKind::Q => return Err(Error::QLetterPresent(g.to_string())),
            GenKind::Tape => {}
            _ => push_reduced(&mut out, l),
        }
    }
    Ok(Word(out))
}

/// Checks that the superscripts inside each (θ,q)-relator are coherent: q-
/// and tape letters share one superscript (or none), and the two θ-letters
/// agree except in relators through the t-part, where they differ by one.
pub fn check_superscripts(p: &Presentation) -> Result<()> {
    for r in p.relators.iter().filter(|r| r.tag == RelatorTag::ThetaQ) {
        let gens: Vec<&GroupGenerator> = r.word.letters().iter().map(|l| p.generator(l.sym)).collect();
        let bad = || Error::SuperscriptMismatch(p.format_word(&r.word));
        let bottom: BTreeSet<u32> =
            gens.iter().filter(|g| g.kind != GenKind::Theta).filter_map(|g| g.sup).collect();
        if bottom.len() > 1 {
            return Err(bad());
        }
        let th: Vec<Option<u32>> = gens.iter().filter(|g| g.kind == GenKind::Theta).map(|g| g.sup).collect();
        let through_t = gens.iter().any(|g| g.kind == GenKind::Q && p.t_letters.contains(&g.name));
        match th.as_slice() {
            [None, None] => {}
            [Some(a), Some(b)] if through_t && p.n > 1 => {
                if (*a as i64 - *b as i64).rem_euclid(p.l as i64) != 1
                    && (*b as i64 - *a as i64).rem_euclid(p.l as i64) != 1
                {
                    return Err(bad());
                }
            }
            [Some(a), Some(b)] if a == b => {}
            _ => return Err(bad()),
        }
        if let (Some(&q), Some(Some(t))) = (bottom.iter().next(), th.first()) {
            if !through_t && q != *t {
                return Err(bad());
            }
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Plain,
    Gap,
}

impl std::str::FromStr for ExportFormat {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "plain" => Ok(ExportFormat::Plain),
            "gap" | "gap-style" => Ok(ExportFormat::Gap),
            _ => Err(format!("unknown format `{s}` (plain, gap-style)")),
        }
    }
}

pub fn export(p: &Presentation, format: ExportFormat) -> String {
    match format {
        ExportFormat::Plain => export_plain(p),
        ExportFormat::Gap => export_gap(p),
    }
}

const KINDS: [GenKind; 4] = [GenKind::Q, GenKind::Tape, GenKind::Theta, GenKind::Stable];

/// ```text
/// presentation <name> L=<l> N=<n>
/// t-letters: t
/// q: ...
/// tape: ...
/// theta: ...
/// stable: ...
/// relators:
/// g1.g2^-1.g3 # theta-q
/// ```
fn export_plain(p: &Presentation) -> String {
    let mut out = format!("presentation {} L={} N={}\n", p.name, p.l, p.n);
    out.push_str(&format!("t-letters: {}\n", p.t_letters.iter().cloned().collect::<Vec<_>>().join(" ")));
    for k in KINDS {
        let names: Vec<String> = p.generators.iter().filter(|g| g.kind == k).map(|g| g.to_string()).collect();
        out.push_str(&format!("{}: {}\n", k.key(), names.join(" ")).replace(" \n", "\n"));
    }
    if !p.relators.is_empty() {
        out.push_str("relators:\n");
        for r in &p.relators {
            out.push_str(&format!("{} # {}\n", p.format_word(&r.word), r.tag.as_str()));
        }
    }
    out
}

pub fn parse_plain(text: &str) -> Result<Presentation> {
    let perr = |line: usize, msg: &str| Error::Parse { line, msg: msg.to_string() };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end()));
    let (ln, head) = lines.next().ok_or_else(|| perr(1, "empty input"))?;
    let mut it = head.split_whitespace();
    if it.next() != Some("presentation") {
        return Err(perr(ln, "expected `presentation`"));
    }
    let name = it.next().ok_or_else(|| perr(ln, "missing name"))?.to_string();
    let l = it.next().and_then(|x| x.strip_prefix("L=")).and_then(|x| x.parse().ok());
    let n = it.next().and_then(|x| x.strip_prefix("N=")).and_then(|x| x.parse().ok());
    let (Some(l), Some(n)) = (l, n) else { return Err(perr(ln, "expected L=<l> N=<n>")) };
    let (ln, tl) = lines.next().ok_or_else(|| perr(ln + 1, "missing t-letters"))?;
    let t_letters = tl
        .strip_prefix("t-letters:")
        .ok_or_else(|| perr(ln, "expected `t-letters:`"))?
        .split_whitespace()
        .map(str::to_string)
        .collect();
    let mut gens = Vec::new();
    for k in KINDS {
        let (ln, gl) = lines.next().ok_or_else(|| perr(ln, "missing generator line"))?;
        let rest = gl
            .strip_prefix(k.key())
            .and_then(|r| r.strip_prefix(':'))
            .ok_or_else(|| perr(ln, &format!("expected `{}:`", k.key())))?;
        for tok in rest.split_whitespace() {
            gens.push(GroupGenerator::parse(k, tok).map_err(|e| perr(ln, &e.to_string()))?);
        }
    }
    let mut p = Presentation::from_parts(name, l, n, t_letters, gens, vec![]);
    match lines.next() {
        None => return Ok(p),
        Some((_, "relators:")) => {}
        Some((ln, _)) => return Err(perr(ln, "expected `relators:`")),
    }
    let names = p.names();
    for (ln, rl) in lines {
        if rl.is_empty() {
            continue;
        }
        let (w, tag) = rl.split_once(" # ").ok_or_else(|| perr(ln, "missing relator tag"))?;
        let tag = RelatorTag::parse(tag.trim()).ok_or_else(|| perr(ln, "unknown relator tag"))?;
        let w = parse_word_with(&names, w.trim()).map_err(|e| perr(ln, &e.to_string()))?;
        p.push_relator(w, tag);
    }
    Ok(p)
}

fn export_gap(p: &Presentation) -> String {
    let names: Vec<String> = p.generators.iter().map(|g| format!("\"{g}\"")).collect();
    let mut out = format!("# {} L={} N={}\n", p.name, p.l, p.n);
    out.push_str(&format!("F := FreeGroup([{}]);;\n", names.join(", ")));
    if p.relators.is_empty() {
        return out;
    }
    out.push_str("rels := [\n");
    let rels: Vec<String> = p
        .relators
        .iter()
        .map(|r| {
            let w: Vec<String> = r
                .word
                .letters()
                .iter()
                .map(|l| format!("F.{}{}", l.sym + 1, if l.inv { "^-1" } else { "" }))
                .collect();
            format!("  {}", w.join("*"))
        })
        .collect();
    out.push_str(&rels.join(",\n"));
    out.push_str("\n];;\nG := F / rels;;\n");
    out
}
