//! Hardware, rules and S-machines.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::word::{Letter, Sym, Word};

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum SymbolKind {
    State { part: usize },
    Tape,
}

/// Name table for the state and tape letters of one machine.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Alphabet {
    names: Vec<String>,
    kinds: Vec<SymbolKind>,
    index: HashMap<String, Sym>,
}

impl Alphabet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Interns `name`; fails if it already exists with a different kind.
    pub fn add(&mut self, name: &str, kind: SymbolKind) -> Result<Sym> {
        if let Some(&s) = self.index.get(name) {
            if self.kinds[s as usize] != kind {
                return Err(Error::InvalidMachine(format!(
                    "letter `{name}` declared twice with different roles"
                )));
            }
            return Ok(s);
        }
        validate_name(name)?;
        let s = self.names.len() as Sym;
        self.names.push(name.to_string());
        self.kinds.push(kind);
        self.index.insert(name.to_string(), s);
        Ok(s)
    }

    pub fn lookup(&self, name: &str) -> Option<Sym> {
        self.index.get(name).copied()
    }

    pub fn sym(&self, name: &str) -> Result<Sym> {
        self.lookup(name)
            .ok_or_else(|| Error::UnknownLetter(name.to_string()))
    }

    pub fn name(&self, s: Sym) -> &str {
        &self.names[s as usize]
    }

    pub fn kind(&self, s: Sym) -> SymbolKind {
        self.kinds[s as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn is_state(&self, s: Sym) -> bool {
        matches!(self.kind(s), SymbolKind::State { .. })
    }

    pub fn part_of(&self, s: Sym) -> Option<usize> {
        match self.kind(s) {
            SymbolKind::State { part } => Some(part),
            SymbolKind::Tape => None,
        }
    }
}

/// Letter names avoid whitespace and the characters the text formats use
/// as separators (`.`, `/`, `(`, `)`, `,`, `=`, `{`, `}`).
pub fn validate_name(name: &str) -> Result<()> {
    let ok = !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || "_#'@~+-*".contains(c))
        && !name.starts_with('-');
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidMachine(format!("illegal letter name `{name}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Part {
    pub name: String,
    pub letters: Vec<Sym>,
}

/// Parts of state letters, sector alphabets, and circularity.
///
/// Sector `j` sits between part `j` and part `j + 1`. A circular machine
/// with `n` parts has `n` sectors, the last one closing the cycle back to
/// part 0; a non-circular one has `n - 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hardware {
    pub alphabet: Alphabet,
    pub parts: Vec<Part>,
    pub sectors: Vec<BTreeSet<Sym>>,
    pub circular: bool,
}

impl Hardware {
    pub fn num_parts(&self) -> usize {
        self.parts.len()
    }

    pub fn num_sectors(&self) -> usize {
        self.sectors.len()
    }

    pub fn sector_right_of(&self, part: usize) -> Option<usize> {
        (part < self.sectors.len()).then_some(part)
    }

    pub fn sector_left_of(&self, part: usize) -> Option<usize> {
        if part > 0 {
            Some(part - 1)
        } else if self.circular {
            Some(self.parts.len() - 1)
        } else {
            None
        }
    }

    pub fn next_part(&self, part: usize) -> Option<usize> {
        if part + 1 < self.parts.len() {
            Some(part + 1)
        } else if self.circular {
            Some(0)
        } else {
            None
        }
    }

    pub fn prev_part(&self, part: usize) -> Option<usize> {
        if part > 0 {
            Some(part - 1)
        } else if self.circular {
            Some(self.parts.len() - 1)
        } else {
            None
        }
    }

    pub fn part_index(&self, name: &str) -> Option<usize> {
        self.parts.iter().position(|p| p.name == name)
    }

    /// Checks part disjointness and that sector alphabets hold tape letters.
    pub fn validate(&self) -> Result<()> {
        let expected = if self.circular {
            self.parts.len()
        } else {
            self.parts.len().saturating_sub(1)
        };
        if self.parts.is_empty() || self.sectors.len() != expected {
            return Err(Error::InvalidMachine(format!(
                "{} parts need {expected} sectors, found {}",
                self.parts.len(),
                self.sectors.len()
            )));
        }
        let mut seen = BTreeSet::new();
        for (i, p) in self.parts.iter().enumerate() {
            if p.letters.is_empty() {
                return Err(Error::InvalidMachine(format!("part {} is empty", p.name)));
            }
            for &s in &p.letters {
                if self.alphabet.part_of(s) != Some(i) || !seen.insert(s) {
                    return Err(Error::InvalidMachine(format!(
                        "letter {} misplaced in part {}",
                        self.alphabet.name(s),
                        p.name
                    )));
                }
            }
        }
        for sec in &self.sectors {
            if sec.iter().any(|&s| self.alphabet.is_state(s)) {
                return Err(Error::InvalidMachine("state letter in a sector alphabet".into()));
            }
        }
        Ok(())
    }
}

/// Rule family markers used for step histories and superscript handling.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum SetTag {
    /// One of the five working sets of the main machine.
    Set(u8),
    /// Transition rule θ(i, i+1).
    Transition(u8),
    /// The start rule θ₁ leaving the start configuration.
    Start,
    /// The accept rule θ₀.
    Accept,
}

/// Position of a rule inside the staged machine M₃ (and its copies).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub enum StageTag {
    Stage(u16),
    /// χ(k, k+1).
    Chi(u16),
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Default, PartialOrd, Ord)]
pub struct RuleTag {
    pub set: Option<SetTag>,
    pub stage: Option<StageTag>,
}

impl RuleTag {
    pub const NONE: RuleTag = RuleTag { set: None, stage: None };

    pub fn set(set: SetTag) -> Self {
        RuleTag { set: Some(set), stage: None }
    }

    pub fn stage(stage: StageTag) -> Self {
        RuleTag { set: None, stage: Some(stage) }
    }
}

impl fmt::Display for RuleTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.set {
            Some(SetTag::Set(i)) => parts.push(format!("set:{i}")),
            Some(SetTag::Transition(i)) => parts.push(format!("trans:{i}")),
            Some(SetTag::Start) => parts.push("start".into()),
            Some(SetTag::Accept) => parts.push("accept".into()),
            None => {}
        }
        match self.stage {
            Some(StageTag::Stage(k)) => parts.push(format!("stage:{k}")),
            Some(StageTag::Chi(k)) => parts.push(format!("chi:{k}")),
            None => {}
        }
        if parts.is_empty() {
            write!(f, "-")
        } else {
            write!(f, "{}", parts.join("/"))
        }
    }
}

impl std::str::FromStr for RuleTag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let mut tag = RuleTag::NONE;
        if s == "-" {
            return Ok(tag);
        }
        for item in s.split('/') {
            let (key, val) = item.split_once(':').unwrap_or((item, ""));
            let num = || val.parse::<u16>().map_err(|_| format!("bad tag `{item}`"));
            match key {
                "set" => tag.set = Some(SetTag::Set(num()? as u8)),
                "trans" => tag.set = Some(SetTag::Transition(num()? as u8)),
                "start" => tag.set = Some(SetTag::Start),
                "accept" => tag.set = Some(SetTag::Accept),
                "stage" => tag.stage = Some(StageTag::Stage(num()?)),
                "chi" => tag.stage = Some(StageTag::Chi(num()?)),
                _ => return Err(format!("bad tag `{item}`")),
            }
        }
        Ok(tag)
    }
}

/// One part `q -> left · q' · right` of a rule.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PartSubst {
    pub from: Sym,
    pub to: Sym,
    pub left: Word,
    pub right: Word,
}

/// A rule: one substitution per part plus a domain per sector. An empty
/// domain locks the sector.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub label: String,
    pub positive: bool,
    pub tag: RuleTag,
    pub parts: Vec<PartSubst>,
    pub domains: Vec<BTreeSet<Sym>>,
}

impl Rule {
    pub fn locks(&self, sector: usize) -> bool {
        self.domains[sector].is_empty()
    }

    pub fn display_label(&self) -> String {
        if self.positive {
            self.label.clone()
        } else {
            format!("{}^-1", self.label)
        }
    }

    /// Checks the word/domain conventions of a rule against `hw`.
    pub fn validate(&self, hw: &Hardware) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidMachine(format!("rule {}: {m}", self.label)));
        if self.parts.len() != hw.num_parts() || self.domains.len() != hw.num_sectors() {
            return bad("arity does not match the hardware".into());
        }
        if self.label.is_empty() || self.label.chars().any(|c| c.is_whitespace() || "/.,=|{}".contains(c)) {
            return bad("illegal label".into());
        }
        for (s, dom) in self.domains.iter().enumerate() {
            if !dom.is_subset(&hw.sectors[s]) {
                return bad(format!("domain of sector {s} exceeds the sector alphabet"));
            }
        }
        for (j, p) in self.parts.iter().enumerate() {
            if hw.alphabet.part_of(p.from) != Some(j) || hw.alphabet.part_of(p.to) != Some(j) {
                return bad(format!("part {j} substitutes letters of another part"));
            }
            let check = |w: &Word, sector: Option<usize>, side: &str| -> Result<()> {
                if w.is_empty() {
                    return Ok(());
                }
                let dom = match sector {
                    Some(s) => &self.domains[s],
                    None => {
                        return Err(Error::InvalidMachine(format!(
                            "rule {}: part {j} writes {side} of an outer state letter",
                            self.label
                        )))
                    }
                };
                if !w.is_reduced() || w.letters().iter().any(|l| !dom.contains(&l.sym)) {
                    return Err(Error::InvalidMachine(format!(
                        "rule {}: {side} word of part {j} is not a reduced word over its sector domain",
                        self.label
                    )));
                }
                Ok(())
            };
            check(&p.left, hw.sector_left_of(j), "left")?;
            check(&p.right, hw.sector_right_of(j), "right")?;
        }
        Ok(())
    }
}

/// θ ↦ θ⁻¹: swaps each part's letters and inverts both tape words; sector
/// domains are unchanged.
pub fn invert_rule(rule: &Rule) -> Rule {
    Rule {
        label: rule.label.clone(),
        positive: !rule.positive,
        tag: rule.tag,
        parts: rule
            .parts
            .iter()
            .map(|p| PartSubst {
                from: p.to,
                to: p.from,
                left: p.left.inverse(),
                right: p.right.inverse(),
            })
            .collect(),
        domains: rule.domains.clone(),
    }
}

/// Reference to a signed rule of a machine. Even indices are positive
/// rules, odd ones their inverses.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct RuleRef(pub u32);

impl RuleRef {
    pub fn positive(index: usize) -> Self {
        RuleRef(2 * index as u32)
    }

    pub fn inverse(self) -> Self {
        RuleRef(self.0 ^ 1)
    }

    pub fn is_positive(self) -> bool {
        self.0 & 1 == 0
    }

    pub fn base_index(self) -> usize {
        (self.0 >> 1) as usize
    }
}

/// Hardware together with a symmetric rule set.
#[derive(Clone, Debug)]
pub struct SMachine {
    pub name: String,
    pub hardware: Hardware,
    rules: Vec<Rule>,
    pub start: Vec<Sym>,
    pub end: Vec<Sym>,
    pub input_sector: Option<usize>,
    order: Vec<RuleRef>,
    by_label: HashMap<String, usize>,
    by_letter: HashMap<Sym, Vec<RuleRef>>,
}

impl SMachine {
    /// Builds a machine from its positive rules; inverses are derived.
    pub fn new(
        name: impl Into<String>,
        hardware: Hardware,
        positive_rules: Vec<Rule>,
        start: Vec<Sym>,
        end: Vec<Sym>,
        input_sector: Option<usize>,
    ) -> Result<Self> {
        hardware.validate()?;
        let n = hardware.num_parts();
        if start.len() != n || end.len() != n {
            return Err(Error::InvalidMachine("start/end letters must name one letter per part".into()));
        }
        for (j, (&s, &e)) in start.iter().zip(&end).enumerate() {
            if hardware.alphabet.part_of(s) != Some(j) || hardware.alphabet.part_of(e) != Some(j) {
                return Err(Error::InvalidMachine(format!("start/end letter outside part {j}")));
            }
        }
        if let Some(s) = input_sector {
            if s >= hardware.num_sectors() {
                return Err(Error::InvalidMachine(format!("input sector {s} out of range")));
            }
        }
        let mut rules = Vec::with_capacity(2 * positive_rules.len());
        let mut by_label = HashMap::new();
        for (i, r) in positive_rules.into_iter().enumerate() {
            if !r.positive {
                return Err(Error::InvalidMachine(format!("rule {} must be given positively", r.label)));
            }
            r.validate(&hardware)?;
            if by_label.insert(r.label.clone(), i).is_some() {
                return Err(Error::InvalidMachine(format!("duplicate rule label {}", r.label)));
            }
            let inv = invert_rule(&r);
            rules.push(r);
            rules.push(inv);
        }
        let mut order: Vec<RuleRef> = (0..rules.len() as u32).map(RuleRef).collect();
        order.sort_by(|a, b| {
            let (ra, rb) = (&rules[a.0 as usize], &rules[b.0 as usize]);
            ra.label.cmp(&rb.label).then(rb.positive.cmp(&ra.positive))
        });
        let mut by_letter: HashMap<Sym, Vec<RuleRef>> = HashMap::new();
        for &r in &order {
            for p in &rules[r.0 as usize].parts {
                by_letter.entry(p.from).or_default().push(r);
            }
        }
        Ok(SMachine {
            name: name.into(),
            hardware,
            rules,
            start,
            end,
            input_sector,
            order,
            by_label,
            by_letter,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.hardware.alphabet
    }

    pub fn rule(&self, r: RuleRef) -> &Rule {
        &self.rules[r.0 as usize]
    }

    pub fn num_positive_rules(&self) -> usize {
        self.rules.len() / 2
    }

    pub fn positive_rules(&self) -> impl Iterator<Item = &Rule> {
        self.rules.iter().step_by(2)
    }

    pub fn positive_refs(&self) -> impl Iterator<Item = RuleRef> {
        (0..self.num_positive_rules()).map(RuleRef::positive)
    }

    /// All signed rules in enumeration order: by label, positive first.
    pub fn ordered_rules(&self) -> &[RuleRef] {
        &self.order
    }

    /// Signed rules that rewrite the state letter `sym`, in enumeration order.
    pub fn rules_rewriting(&self, sym: Sym) -> &[RuleRef] {
        self.by_letter.get(&sym).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn find(&self, label: &str) -> Result<RuleRef> {
        self.by_label
            .get(label)
            .map(|&i| RuleRef::positive(i))
            .ok_or_else(|| Error::UnknownRule(label.to_string()))
    }

    /// Resolves `label` or `label^-1`.
    pub fn find_signed(&self, token: &str) -> Result<RuleRef> {
        match token.strip_suffix("^-1") {
            Some(l) => Ok(self.find(l)?.inverse()),
            None => self.find(token),
        }
    }

    pub fn rule_name(&self, r: RuleRef) -> String {
        self.rule(r).display_label()
    }

    pub fn history_from_str(&self, s: &str) -> Result<History> {
        s.split_whitespace()
            .map(|t| self.find_signed(t))
            .collect::<Result<Vec<_>>>()
            .map(History)
    }

    pub fn history_to_string(&self, h: &History) -> String {
        h.0.iter().map(|&r| self.rule_name(r)).collect::<Vec<_>>().join(" ")
    }

    pub fn letter(&self, name: &str) -> Result<Sym> {
        self.alphabet().sym(name)
    }

    /// Configuration built from one letter per part, with empty tape.
    pub fn configuration(&self, letters: &[Sym]) -> AdmissibleWord {
        AdmissibleWord::from_trusted(letters.iter().map(|&s| Letter::new(s)).collect())
    }

    pub fn start_configuration(&self) -> AdmissibleWord {
        self.configuration(&self.start)
    }

    pub fn end_configuration(&self) -> AdmissibleWord {
        self.configuration(&self.end)
    }

    /// Parses a word in the space-separated `name` / `name^-1` notation.
    pub fn parse_word(&self, s: &str) -> Result<AdmissibleWord> {
        let letters = parse_letters(self.alphabet(), s)?;
        AdmissibleWord::new(&self.hardware, letters)
    }

    pub fn format_word(&self, w: &AdmissibleWord) -> String {
        format_letters(self.alphabet(), w.letters())
    }

    /// Positive rule refs carrying `set`.
    pub fn rules_in_set(&self, set: SetTag) -> Vec<RuleRef> {
        self.positive_refs()
            .filter(|&r| self.rule(r).tag.set == Some(set))
            .collect()
    }
}

pub fn parse_letters(alpha: &Alphabet, s: &str) -> Result<Vec<Letter>> {
    s.split_whitespace()
        .map(|tok| {
            let (name, inv) = match tok.strip_suffix("^-1") {
                Some(n) => (n, true),
                None => (tok, false),
            };
            alpha.sym(name).map(|sym| Letter::signed(sym, inv))
        })
        .collect()
}

pub fn format_letters(alpha: &Alphabet, letters: &[Letter]) -> String {
    letters
        .iter()
        .map(|l| {
            let mut s = alpha.name(l.sym).to_string();
            if let Some(i) = l.sup {
                s.push_str(&format!("({i})"));
            }
            if l.inv {
                s.push_str("^-1");
            }
            s
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// A signed part symbol of a base.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord)]
pub struct BaseLetter {
    pub part: usize,
    pub inv: bool,
}

/// An admissible word `q₁u₁q₂…uₛqₛ₊₁`: reduced, starting and ending with
/// state letters, with each sector over its alphabet.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct AdmissibleWord {
    letters: Vec<Letter>,
}

impl AdmissibleWord {
    pub fn new(hw: &Hardware, letters: Vec<Letter>) -> Result<Self> {
        check_admissible(hw, &letters)?;
        Ok(AdmissibleWord { letters })
    }

    pub(crate) fn from_trusted(letters: Vec<Letter>) -> Self {
        AdmissibleWord { letters }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn as_word(&self) -> Word {
        Word(self.letters.clone())
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Number of tape letters.
    pub fn tape_len(&self, alpha: &Alphabet) -> usize {
        self.letters.iter().filter(|l| !alpha.is_state(l.sym)).count()
    }

    pub fn state_count(&self, alpha: &Alphabet) -> usize {
        self.letters.iter().filter(|l| alpha.is_state(l.sym)).count()
    }

    /// Splits into state letters and the tape words between them.
    pub fn sectors(&self, alpha: &Alphabet) -> (Vec<Letter>, Vec<Vec<Letter>>) {
        let mut states = Vec::new();
        let mut tapes = Vec::new();
        let mut cur = Vec::new();
        for &l in &self.letters {
            if alpha.is_state(l.sym) {
                if !states.is_empty() {
                    tapes.push(std::mem::take(&mut cur));
                }
                states.push(l);
            } else {
                cur.push(l);
            }
        }
        (states, tapes)
    }
}

/// The base of an admissible word: its projection onto signed part symbols.
pub fn base_of(w: &AdmissibleWord, alpha: &Alphabet) -> Vec<BaseLetter> {
    w.letters
        .iter()
        .filter_map(|l| alpha.part_of(l.sym).map(|part| BaseLetter { part, inv: l.inv }))
        .collect()
}

pub fn format_base(hw: &Hardware, base: &[BaseLetter]) -> String {
    base.iter()
        .map(|b| {
            let n = &hw.parts[b.part].name;
            if b.inv {
                format!("{n}^-1")
            } else {
                n.clone()
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Alphabet of the sector following a state letter, or `None` when the
/// adjacency leaves no sector (only the empty word then fits).
fn following_sector(hw: &Hardware, part: usize, inv: bool) -> Option<usize> {
    if inv {
        hw.sector_left_of(part)
    } else {
        hw.sector_right_of(part)
    }
}

pub fn check_admissible(hw: &Hardware, letters: &[Letter]) -> Result<()> {
    let alpha = &hw.alphabet;
    let err = |m: String| Err(Error::MalformedWord(m));
    if letters.is_empty() {
        return err("empty word".into());
    }
    if letters.iter().any(|l| l.sup.is_some()) {
        return err("admissible words carry no superscripts".into());
    }
    if !alpha.is_state(letters[0].sym) || !alpha.is_state(letters[letters.len() - 1].sym) {
        return err("word must start and end with state letters".into());
    }
    if !Word(letters.to_vec()).is_reduced() {
        return err("word is not reduced".into());
    }
    let mut i = 0;
    while i < letters.len() {
        let q = letters[i];
        let part = alpha.part_of(q.sym).unwrap();
        let mut j = i + 1;
        while j < letters.len() && !alpha.is_state(letters[j].sym) {
            j += 1;
        }
        if j == letters.len() {
            break;
        }
        let next = letters[j];
        let next_part = alpha.part_of(next.sym).unwrap();
        let ok_order = if next == q.inverse() {
            true
        } else if !q.inv {
            !next.inv && hw.next_part(part) == Some(next_part)
        } else {
            next.inv && hw.prev_part(part) == Some(next_part)
        };
        if !ok_order {
            return err(format!(
                "{} cannot be followed by {}",
                alpha.name(q.sym),
                alpha.name(next.sym)
            ));
        }
        let tape = &letters[i + 1..j];
        let sector = following_sector(hw, part, q.inv);
        let fits = match sector {
            Some(s) => tape.iter().all(|l| hw.sectors[s].contains(&l.sym)),
            None => tape.is_empty(),
        };
        if !fits {
            return err(format!("sector after {} holds foreign tape letters", alpha.name(q.sym)));
        }
        i = j;
    }
    Ok(())
}

/// A finite sequence of signed rules.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default, PartialOrd, Ord)]
pub struct History(pub Vec<RuleRef>);

impl History {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> History {
        History(self.0.iter().rev().map(|r| r.inverse()).collect())
    }

    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|w| w[0] != w[1].inverse())
    }
}
