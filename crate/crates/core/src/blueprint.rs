//! Name-level description of a machine. Constructions compose blueprints
//! (letters are identified by name) and compile them once at the end.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::machine::{Alphabet, Hardware, Part, PartSubst, Rule, RuleTag, SMachine, SymbolKind};
use crate::word::{Letter, Word};

/// A signed letter name.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sig {
    pub name: String,
    pub inv: bool,
}

impl Sig {
    pub fn pos(name: impl Into<String>) -> Self {
        Sig { name: name.into(), inv: false }
    }

    pub fn neg(name: impl Into<String>) -> Self {
        Sig { name: name.into(), inv: true }
    }

    pub fn inverse(&self) -> Self {
        Sig { name: self.name.clone(), inv: !self.inv }
    }

    pub fn renamed(&self, f: impl Fn(&str) -> String) -> Self {
        Sig { name: f(&self.name), inv: self.inv }
    }
}

pub fn inverse_sigs(w: &[Sig]) -> Vec<Sig> {
    w.iter().rev().map(Sig::inverse).collect()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartDecl {
    pub name: String,
    pub letters: Vec<String>,
}

/// `from → left · to · right`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rewrite {
    pub from: String,
    pub to: String,
    pub left: Vec<Sig>,
    pub right: Vec<Sig>,
}

impl Rewrite {
    pub fn keep(q: impl Into<String>) -> Self {
        let q = q.into();
        Rewrite { from: q.clone(), to: q, left: vec![], right: vec![] }
    }

    pub fn change(from: impl Into<String>, to: impl Into<String>) -> Self {
        Rewrite { from: from.into(), to: to.into(), left: vec![], right: vec![] }
    }

    pub fn with(mut self, left: Vec<Sig>, right: Vec<Sig>) -> Self {
        self.left = left;
        self.right = right;
        self
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleDecl {
    pub label: String,
    pub tag: RuleTag,
    pub parts: Vec<Rewrite>,
    pub domains: Vec<BTreeSet<String>>,
}

impl RuleDecl {
    /// The inverse rule written positively under a new label.
    pub fn inverted(&self, label: impl Into<String>) -> RuleDecl {
        RuleDecl {
            label: label.into(),
            tag: self.tag,
            parts: self
                .parts
                .iter()
                .map(|p| Rewrite {
                    from: p.to.clone(),
                    to: p.from.clone(),
                    left: inverse_sigs(&p.left),
                    right: inverse_sigs(&p.right),
                })
                .collect(),
            domains: self.domains.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Blueprint {
    pub name: String,
    pub parts: Vec<PartDecl>,
    pub sectors: Vec<BTreeSet<String>>,
    pub circular: bool,
    pub rules: Vec<RuleDecl>,
    pub start: Vec<String>,
    pub end: Vec<String>,
    pub input_sector: Option<usize>,
}

pub fn set_of<S: AsRef<str>>(names: impl IntoIterator<Item = S>) -> BTreeSet<String> {
    names.into_iter().map(|s| s.as_ref().to_string()).collect()
}

fn sigs_to_word(alpha: &Alphabet, w: &[Sig]) -> Result<Word> {
    w.iter()
        .map(|s| alpha.sym(&s.name).map(|sym| Letter::signed(sym, s.inv)))
        .collect::<Result<Vec<_>>>()
        .map(Word)
}

fn word_to_sigs(alpha: &Alphabet, w: &Word) -> Vec<Sig> {
    w.letters()
        .iter()
        .map(|l| Sig { name: alpha.name(l.sym).to_string(), inv: l.inv })
        .collect()
}

impl Blueprint {
    pub fn build(&self) -> Result<SMachine> {
        let mut alpha = Alphabet::new();
        let mut parts = Vec::with_capacity(self.parts.len());
        for (j, p) in self.parts.iter().enumerate() {
            let mut letters = Vec::with_capacity(p.letters.len());
            for l in &p.letters {
                if alpha.lookup(l).is_some() {
                    return Err(Error::InvalidMachine(format!("state letter {l} declared twice")));
                }
                letters.push(alpha.add(l, SymbolKind::State { part: j })?);
            }
            parts.push(Part { name: p.name.clone(), letters });
        }
        let mut sectors = Vec::with_capacity(self.sectors.len());
        for sec in &self.sectors {
            let mut s = BTreeSet::new();
            for l in sec {
                s.insert(alpha.add(l, SymbolKind::Tape)?);
            }
            sectors.push(s);
        }
        let hw = Hardware { alphabet: alpha, parts, sectors, circular: self.circular };
        let alpha = &hw.alphabet;
        let rules = self
            .rules
            .iter()
            .map(|r| {
                if r.parts.len() != hw.num_parts() || r.domains.len() != hw.num_sectors() {
                    return Err(Error::InvalidMachine(format!(
                        "rule {}: arity does not match the hardware",
                        r.label
                    )));
                }
                let parts = r
                    .parts
                    .iter()
                    .map(|p| {
                        Ok(PartSubst {
                            from: alpha.sym(&p.from)?,
                            to: alpha.sym(&p.to)?,
                            left: sigs_to_word(alpha, &p.left)?,
                            right: sigs_to_word(alpha, &p.right)?,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                let domains = r
                    .domains
                    .iter()
                    .map(|d| d.iter().map(|n| alpha.sym(n)).collect::<Result<BTreeSet<_>>>())
                    .collect::<Result<Vec<_>>>()?;
                Ok(Rule { label: r.label.clone(), positive: true, tag: r.tag, parts, domains })
            })
            .collect::<Result<Vec<_>>>()?;
        let names = |v: &[String]| v.iter().map(|n| alpha.sym(n)).collect::<Result<Vec<_>>>();
        let start = names(&self.start)?;
        let end = names(&self.end)?;
        SMachine::new(self.name.clone(), hw, rules, start, end, self.input_sector)
    }

    pub fn from_machine(m: &SMachine) -> Blueprint {
        let hw = &m.hardware;
        let alpha = &hw.alphabet;
        let name_set = |s: &BTreeSet<u32>| s.iter().map(|&x| alpha.name(x).to_string()).collect();
        Blueprint {
            name: m.name.clone(),
            parts: hw
                .parts
                .iter()
                .map(|p| PartDecl {
                    name: p.name.clone(),
                    letters: p.letters.iter().map(|&s| alpha.name(s).to_string()).collect(),
                })
                .collect(),
            sectors: hw.sectors.iter().map(name_set).collect(),
            circular: hw.circular,
            rules: m
                .positive_rules()
                .map(|r| RuleDecl {
                    label: r.label.clone(),
                    tag: r.tag,
                    parts: r
                        .parts
                        .iter()
                        .map(|p| Rewrite {
                            from: alpha.name(p.from).to_string(),
                            to: alpha.name(p.to).to_string(),
                            left: word_to_sigs(alpha, &p.left),
                            right: word_to_sigs(alpha, &p.right),
                        })
                        .collect(),
                    domains: r.domains.iter().map(name_set).collect(),
                })
                .collect(),
            start: m.start.iter().map(|&s| alpha.name(s).to_string()).collect(),
            end: m.end.iter().map(|&s| alpha.name(s).to_string()).collect(),
            input_sector: m.input_sector,
        }
    }

    pub fn num_parts(&self) -> usize {
        self.parts.len()
    }

    pub fn num_sectors(&self) -> usize {
        self.sectors.len()
    }

    pub fn rule(&self, label: &str) -> Option<&RuleDecl> {
        self.rules.iter().find(|r| r.label == label)
    }
}
