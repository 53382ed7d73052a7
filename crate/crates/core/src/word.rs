//! Signed letters and freely reduced words.

use std::fmt;

/// Index of a symbol in an [`Alphabet`](crate::machine::Alphabet) or a
/// generator table.
pub type Sym = u32;

/// A signed letter, optionally carrying a superscript in `1..=L`.
///
/// Machine execution never looks at superscripts; they only appear on
/// permissible words and group relators.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct Letter {
    pub sym: Sym,
    pub inv: bool,
    pub sup: Option<u32>,
}

impl Letter {
    pub const fn new(sym: Sym) -> Self {
        Letter { sym, inv: false, sup: None }
    }

    pub const fn inverse_of(sym: Sym) -> Self {
        Letter { sym, inv: true, sup: None }
    }

    pub const fn signed(sym: Sym, inv: bool) -> Self {
        Letter { sym, inv, sup: None }
    }

    pub fn inverse(self) -> Self {
        Letter { inv: !self.inv, ..self }
    }

    pub fn with_sup(self, sup: Option<u32>) -> Self {
        Letter { sup, ..self }
    }

    pub fn erased(self) -> Self {
        Letter { sup: None, ..self }
    }

    /// True when `self · other` cancels in the free group.
    pub fn cancels(self, other: Letter) -> bool {
        self.sym == other.sym && self.sup == other.sup && self.inv != other.inv
    }
}

/// A finite sequence of signed letters.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Word(pub Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_letters(letters: impl IntoIterator<Item = Letter>) -> Self {
        Word(letters.into_iter().collect())
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|l| l.inverse()).collect())
    }

    pub fn is_reduced(&self) -> bool {
        self.0.windows(2).all(|w| !w[0].cancels(w[1]))
    }

    /// Free reduction; see [`reduce_word`].
    pub fn reduced(&self) -> Word {
        reduce_word(self)
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut out = self.0.clone();
        out.extend_from_slice(&other.0);
        Word(out)
    }

    pub fn power(&self, n: usize) -> Word {
        let mut out = Vec::with_capacity(self.len() * n);
        for _ in 0..n {
            out.extend_from_slice(&self.0);
        }
        Word(out)
    }

    /// Drops every superscript.
    pub fn erased(&self) -> Word {
        Word(self.0.iter().map(|l| l.erased()).collect())
    }

    /// Signed exponent sum of `sym`.
    pub fn exponent_sum(&self, sym: Sym) -> i64 {
        self.0
            .iter()
            .filter(|l| l.sym == sym)
            .map(|l| if l.inv { -1 } else { 1 })
            .sum()
    }
}

impl From<Vec<Letter>> for Word {
    fn from(v: Vec<Letter>) -> Self {
        Word(v)
    }
}

/// Pushes `letter` onto a partially reduced buffer, cancelling if possible.
pub fn push_reduced(buf: &mut Vec<Letter>, letter: Letter) {
    if buf.last().is_some_and(|top| top.cancels(letter)) {
        buf.pop();
    } else {
        buf.push(letter);
    }
}

/// Returns the unique freely reduced form of `w`.
pub fn reduce_word(w: &Word) -> Word {
    let mut buf = Vec::with_capacity(w.len());
    for &l in w.letters() {
        push_reduced(&mut buf, l);
    }
    Word(buf)
}

/// Cyclic reduction: strips matching first/last letters of a reduced word.
pub fn cyclically_reduce(w: &Word) -> Word {
    let r = reduce_word(w);
    let v = r.letters();
    let (mut i, mut j) = (0, v.len());
    while j > i + 1 && v[i].cancels(v[j - 1]) {
        i += 1;
        j -= 1;
    }
    Word(v[i..j].to_vec())
}

/// Lexicographically least rotation of a word, comparing letters by their
/// derived `Ord`.
pub fn least_rotation(w: &Word) -> Word {
    let v = w.letters();
    if v.is_empty() {
        return Word::empty();
    }
    let n = v.len();
    let best = (0..n)
        .min_by(|&a, &b| {
            (0..n)
                .map(|k| v[(a + k) % n].cmp(&v[(b + k) % n]))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .unwrap();
    Word((0..n).map(|k| v[(best + k) % n]).collect())
}

/// Canonical key of a relator up to rotation and inversion.
pub fn cyclic_key(w: &Word) -> Word {
    let c = cyclically_reduce(w);
    let a = least_rotation(&c);
    let b = least_rotation(&c.inverse());
    a.min(b)
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.sym)?;
        if let Some(s) = self.sup {
            write!(f, "({s})")?;
        }
        if self.inv {
            write!(f, "^-1")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn w(spec: &[i32]) -> Word {
        Word(
            spec.iter()
                .map(|&x| Letter::signed(x.unsigned_abs(), x < 0))
                .collect(),
        )
    }

    #[test]
    fn cancellation() {
        assert_eq!(reduce_word(&w(&[1, -1, 2])), w(&[2]));
    }

    #[test]
    fn empty_word() {
        assert_eq!(reduce_word(&Word::empty()), Word::empty());
    }

    #[test]
    fn inner_cancellation() {
        // a b^-1 b a -> a a
        assert_eq!(reduce_word(&w(&[1, -2, 2, 1])), w(&[1, 1]));
    }

    #[test]
    fn superscripts_block_cancellation() {
        let a = Letter::new(1).with_sup(Some(1));
        let b = Letter::inverse_of(1).with_sup(Some(2));
        assert_eq!(reduce_word(&Word(vec![a, b])).len(), 2);
        assert_eq!(reduce_word(&Word(vec![a, a.inverse()])).len(), 0);
    }

    #[test]
    fn cyclic_key_matches_rotations_and_inverse() {
        let r = w(&[1, 2, -1, -2]);
        let rot = w(&[2, -1, -2, 1]);
        assert_eq!(cyclic_key(&r), cyclic_key(&rot));
        assert_eq!(cyclic_key(&r), cyclic_key(&r.inverse()));
        assert_eq!(cyclically_reduce(&w(&[3, 1, 2, -3])), w(&[1, 2]));
    }

    fn arb_word() -> impl Strategy<Value = Word> {
        proptest::collection::vec((1u32..4, any::<bool>()), 0..24)
            .prop_map(|v| Word(v.into_iter().map(|(s, i)| Letter::signed(s, i)).collect()))
    }

    proptest! {
        #[test]
        fn reduction_is_idempotent_and_shrinks(x in arb_word()) {
            let r = reduce_word(&x);
            prop_assert!(r.len() <= x.len());
            prop_assert!(r.is_reduced());
            prop_assert_eq!(reduce_word(&r), r.clone());
            // x · x^-1 reduces to nothing
            prop_assert!(reduce_word(&x.concat(&x.inverse())).is_empty());
        }
    }
}
