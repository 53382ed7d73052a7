//! Machine description files and run manifests.
//!
//! ```text
//! machine toy-even
//! HARDWARE
//! circular no
//! part Q0 = q0
//! part Q1 = q1 q1f
//! part Q2 = q2
//! sector 0 = alpha
//! sector 1 =
//! RULES
//! rule er - : q0 -> q0 , q1 q2 -> alpha^-1 alpha^-1 q1 q2 | 0={alpha}
//! rule acc - : q0 q1 q2 -> q0 q1f q2
//! DISTINGUISHED
//! start = q0 q1 q2
//! end = q0 q1f q2
//! input = 0
//! ```
//!
//! Parts joined by locked sectors are written as one group
//! `qᵢ qᵢ₊₁ -> a qᵢ' qᵢ₊₁' b`; every other sector gets an explicit domain.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::blueprint::{Blueprint, PartDecl, Rewrite, RuleDecl, Sig};
use crate::constructors::{MainMachineBundle, Parameters};
use crate::error::{Error, Result};
use crate::machine::{RuleTag, SMachine};

fn fmt_sigs(w: &[Sig]) -> Vec<String> {
    w.iter()
        .map(|s| if s.inv { format!("{}^-1", s.name) } else { s.name.clone() })
        .collect()
}

fn parse_sig(tok: &str) -> Sig {
    match tok.strip_suffix("^-1") {
        Some(n) => Sig::neg(n),
        None => Sig::pos(tok),
    }
}

/// Groups of consecutive parts joined by sectors the rule locks.
fn groups(r: &RuleDecl) -> Vec<std::ops::Range<usize>> {
    let n = r.parts.len();
    let mut out = Vec::new();
    let mut start = 0;
    for i in 0..n {
        let joined = i + 1 < n && r.domains[i].is_empty();
        if !joined {
            out.push(start..i + 1);
            start = i + 1;
        }
    }
    out
}

fn print_rule(r: &RuleDecl) -> String {
    let mut gs = Vec::new();
    let mut internal = BTreeSet::new();
    for g in groups(r) {
        let parts = &r.parts[g.clone()];
        let from: Vec<&str> = parts.iter().map(|p| p.from.as_str()).collect();
        let mut to = fmt_sigs(&parts[0].left);
        to.extend(parts.iter().map(|p| p.to.clone()));
        to.extend(fmt_sigs(&parts[parts.len() - 1].right));
        gs.push(format!("{} -> {}", from.join(" "), to.join(" ")));
        internal.extend(g.start..g.end - 1);
    }
    let doms: Vec<String> = (0..r.domains.len())
        .filter(|s| !internal.contains(s))
        .map(|s| format!("{s}={{{}}}", r.domains[s].iter().cloned().collect::<Vec<_>>().join(",")))
        .collect();
    let mut line = format!("rule {} {} : {}", r.label, r.tag, gs.join(" , "));
    if !doms.is_empty() {
        line.push_str(" | ");
        line.push_str(&doms.join(" "));
    }
    line
}

/// Canonical text of a blueprint.
pub fn print_blueprint(bp: &Blueprint) -> String {
    let mut out = String::new();
    let mut line = |s: String| {
        out.push_str(s.trim_end());
        out.push('\n');
    };
    line(format!("machine {}", bp.name));
    line("HARDWARE".into());
    line(format!("circular {}", if bp.circular { "yes" } else { "no" }));
    for p in &bp.parts {
        line(format!("part {} = {}", p.name, p.letters.join(" ")));
    }
    for (j, s) in bp.sectors.iter().enumerate() {
        line(format!("sector {j} = {}", s.iter().cloned().collect::<Vec<_>>().join(" ")));
    }
    line("RULES".into());
    for r in &bp.rules {
        line(print_rule(r));
    }
    line("DISTINGUISHED".into());
    line(format!("start = {}", bp.start.join(" ")));
    line(format!("end = {}", bp.end.join(" ")));
    line(format!("input = {}", bp.input_sector.map_or("none".to_string(), |s| s.to_string())));
    out
}

pub fn print_machine(m: &SMachine) -> String {
    print_blueprint(&Blueprint::from_machine(m))
}

#[derive(PartialEq, Eq, Clone, Copy)]
enum Section {
    Header,
    Hardware,
    Rules,
    Distinguished,
}

pub fn parse_blueprint(text: &str) -> Result<Blueprint> {
    let mut bp = Blueprint {
        name: String::new(),
        parts: vec![],
        sectors: vec![],
        circular: false,
        rules: vec![],
        start: vec![],
        end: vec![],
        input_sector: None,
    };
    let mut section = Section::Header;
    let mut raw_rules: Vec<(usize, String)> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let err = |msg: String| Error::Parse { line: lineno, msg };
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        match line {
            "HARDWARE" => {
                section = Section::Hardware;
                continue;
            }
            "RULES" => {
                section = Section::Rules;
                continue;
            }
            "DISTINGUISHED" => {
                section = Section::Distinguished;
                continue;
            }
            _ => {}
        }
        let (key, rest) = line.split_once(' ').unwrap_or((line, ""));
        let rhs = || -> Result<Vec<String>> {
            let (_, v) = rest.split_once('=').ok_or_else(|| err("expected `=`".into()))?;
            Ok(v.split_whitespace().map(str::to_string).collect())
        };
        match (section, key) {
            (Section::Header, "machine") => bp.name = rest.trim().to_string(),
            (Section::Hardware, "circular") => {
                bp.circular = match rest.trim() {
                    "yes" => true,
                    "no" => false,
                    v => return Err(err(format!("circular must be yes or no, not `{v}`"))),
                }
            }
            (Section::Hardware, "part") => {
                let name = rest.split_whitespace().next().ok_or_else(|| err("missing part name".into()))?;
                bp.parts.push(PartDecl { name: name.to_string(), letters: rhs()? });
            }
            (Section::Hardware, "sector") => {
                let j: usize = rest
                    .split_whitespace()
                    .next()
                    .and_then(|x| x.parse().ok())
                    .ok_or_else(|| err("bad sector index".into()))?;
                if j != bp.sectors.len() {
                    return Err(err(format!("sector {j} out of order")));
                }
                bp.sectors.push(rhs()?.into_iter().collect());
            }
            (Section::Rules, "rule") => raw_rules.push((lineno, rest.to_string())),
            (Section::Distinguished, "start") => bp.start = rhs()?,
            (Section::Distinguished, "end") => bp.end = rhs()?,
            (Section::Distinguished, "input") => {
                let v = rhs()?;
                bp.input_sector = match v.as_slice() {
                    [x] if x == "none" => None,
                    [x] => Some(x.parse().map_err(|_| err(format!("bad input sector `{x}`")))?),
                    _ => return Err(err("bad input sector".into())),
                };
            }
            _ => return Err(err(format!("unexpected line `{line}`"))),
        }
    }
    let nsec = bp.sectors.len();
    let states: BTreeSet<&str> = bp.parts.iter().flat_map(|p| p.letters.iter().map(String::as_str)).collect();
    let mut rules = Vec::new();
    for (lineno, rest) in raw_rules {
        rules.push(parse_rule(&rest, &states, bp.parts.len(), nsec).map_err(|msg| Error::Parse { line: lineno, msg })?);
    }
    bp.rules = rules;
    Ok(bp)
}

fn parse_rule(rest: &str, states: &BTreeSet<&str>, nparts: usize, nsec: usize) -> std::result::Result<RuleDecl, String> {
    let (head, body) = rest.split_once(" : ").ok_or("expected ` : `")?;
    let mut head = head.split_whitespace();
    let label = head.next().ok_or("missing rule label")?.to_string();
    let tag: RuleTag = head.next().unwrap_or("-").parse()?;
    let (groups_txt, doms_txt) = body.split_once(" | ").unwrap_or((body, ""));
    let mut domains: Vec<Option<BTreeSet<String>>> = vec![None; nsec];
    let mut parts: Vec<Rewrite> = Vec::new();
    for g in groups_txt.split(" , ") {
        let (from, to) = g.split_once("->").ok_or_else(|| format!("group `{g}` lacks `->`"))?;
        let from: Vec<&str> = from.split_whitespace().collect();
        let to: Vec<&str> = to.split_whitespace().collect();
        let is_state = |t: &&str| states.contains(t);
        let first = to.iter().position(is_state).ok_or_else(|| format!("group `{g}` has no target letter"))?;
        let last = to.iter().rposition(is_state).unwrap();
        let targets = &to[first..=last];
        if targets.len() != from.len() || !targets.iter().all(is_state) || !from.iter().all(is_state) {
            return Err(format!("group `{g}` is malformed"));
        }
        let start = parts.len();
        for (i, (f, t)) in from.iter().zip(targets).enumerate() {
            let mut rw = Rewrite::change(*f, *t);
            if i == 0 {
                rw.left = to[..first].iter().map(|x| parse_sig(x)).collect();
            }
            if i + 1 == from.len() {
                rw.right = to[last + 1..].iter().map(|x| parse_sig(x)).collect();
            }
            parts.push(rw);
        }
        for s in start..parts.len() - 1 {
            if s < nsec {
                domains[s] = Some(BTreeSet::new());
            }
        }
    }
    if parts.len() != nparts {
        return Err(format!("rule {label} rewrites {} parts, hardware has {nparts}", parts.len()));
    }
    for d in doms_txt.split_whitespace() {
        let (s, set) = d.split_once('=').ok_or_else(|| format!("bad domain `{d}`"))?;
        let s: usize = s.parse().map_err(|_| format!("bad sector `{s}`"))?;
        let set = set
            .strip_prefix('{')
            .and_then(|x| x.strip_suffix('}'))
            .ok_or_else(|| format!("bad domain `{d}`"))?;
        if s >= nsec || domains[s].is_some() {
            return Err(format!("sector {s} declared twice or out of range"));
        }
        domains[s] = Some(set.split(',').filter(|x| !x.is_empty()).map(str::to_string).collect());
    }
    Ok(RuleDecl {
        label,
        tag,
        parts,
        domains: domains
            .into_iter()
            .enumerate()
            .map(|(s, d)| d.ok_or_else(|| format!("sector {s} has no domain")))
            .collect::<std::result::Result<_, _>>()?,
    })
}

pub fn parse_machine(text: &str) -> Result<SMachine> {
    parse_blueprint(text)?.build()
}

/// SHA-256 of the canonical machine text.
pub fn machine_hash(m: &SMachine) -> String {
    hex::encode(Sha256::digest(print_machine(m).as_bytes()))
}

/// Parameters and identity of a constructed machine, enough to rebuild and
/// check it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub machine: String,
    #[serde(flatten)]
    pub params: Parameters,
    pub m0: String,
    pub machine_sha256: String,
    pub rules: usize,
}

impl Manifest {
    pub fn for_bundle(b: &MainMachineBundle) -> Manifest {
        Manifest {
            machine: b.machine.name.clone(),
            params: b.params.clone(),
            m0: b.m0_id.clone(),
            machine_sha256: machine_hash(&b.machine),
            rules: b.machine.num_positive_rules(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn from_json(s: &str) -> Result<Manifest> {
        serde_json::from_str(s).map_err(|e| Error::Parse { line: e.line(), msg: e.to_string() })
    }
}
