//! Bounded bidirectional search for computations between two words.

use std::collections::HashMap;

use crate::compute::applicable_rules;
use crate::machine::{AdmissibleWord, History, RuleRef, SMachine};

pub const DEFAULT_BUDGET: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SearchOutcome {
    /// A reduced history from the first word to the second.
    Found(History),
    /// One side ran out of words: the two words are not connected.
    Disconnected,
    /// The rule-application budget ran out first.
    BudgetExceeded,
}

struct Side {
    words: Vec<AdmissibleWord>,
    parent: Vec<Option<(usize, RuleRef)>>,
    seen: HashMap<AdmissibleWord, usize>,
    frontier: Vec<usize>,
}

impl Side {
    fn new(w: &AdmissibleWord) -> Self {
        Side {
            words: vec![w.clone()],
            parent: vec![None],
            seen: HashMap::from([(w.clone(), 0)]),
            frontier: vec![0],
        }
    }

    /// Rules leading from the root to word `i`.
    fn path(&self, mut i: usize) -> Vec<RuleRef> {
        let mut out = Vec::new();
        while let Some((p, r)) = self.parent[i] {
            out.push(r);
            i = p;
        }
        out.reverse();
        out
    }
}

/// Breadth-first from both ends, always growing the smaller frontier by one
/// layer, until the two explored sets meet.
pub fn bidirectional_search(m: &SMachine, from: &AdmissibleWord, to: &AdmissibleWord, budget: usize) -> SearchOutcome {
    bidirectional_search_with(m, from, to, budget, None)
}

/// As [`bidirectional_search`], using only rules whose positive index is
/// marked in `allowed`.
pub fn bidirectional_search_with(
    m: &SMachine,
    from: &AdmissibleWord,
    to: &AdmissibleWord,
    budget: usize,
    allowed: Option<&[bool]>,
) -> SearchOutcome {
    if from == to {
        return SearchOutcome::Found(History(vec![]));
    }
    let mut sides = [Side::new(from), Side::new(to)];
    let mut spent = 0usize;
    loop {
        let grow = if sides[0].frontier.len() <= sides[1].frontier.len() { 0 } else { 1 };
        if sides[grow].frontier.is_empty() {
            return SearchOutcome::Disconnected;
        }
        let frontier = std::mem::take(&mut sides[grow].frontier);
        let mut next = Vec::new();
        for i in frontier {
            let w = sides[grow].words[i].clone();
            for (r, v) in applicable_rules(m, &w) {
                if allowed.is_some_and(|a| !a[r.base_index()]) {
                    continue;
                }
                spent += 1;
                if spent > budget {
                    return SearchOutcome::BudgetExceeded;
                }
                if sides[grow].seen.contains_key(&v) {
                    continue;
                }
                let j = sides[grow].words.len();
                sides[grow].words.push(v.clone());
                sides[grow].parent.push(Some((i, r)));
                sides[grow].seen.insert(v.clone(), j);
                if let Some(&k) = sides[1 - grow].seen.get(&v) {
                    let (fi, bi) = if grow == 0 { (j, k) } else { (k, j) };
                    let mut h = sides[0].path(fi);
                    h.extend(sides[1].path(bi).into_iter().rev().map(RuleRef::inverse));
                    return SearchOutcome::Found(History(h));
                }
                next.push(j);
            }
        }
        sides[grow].frontier = next;
    }
}
