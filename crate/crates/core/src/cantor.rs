//! The binary sequence space: finite words, a canonical word coding,
//! eventually periodic points, clopen sets, and symbolic index sets.
//!
//! Words are coded by length first, then numeric value: the word `s` gets
//! the number `2^|s| - 1 + val(s)` with `val` reading `s` as a big-endian
//! binary numeral. Sequences over arbitrary `u64` letters embed into
//! binary words by sending the letter `a` to the block `0^a 1`.

use crate::error::{Error, Result};
use crate::trees::TreeSchema;
use num::integer::lcm;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

/// A finite binary word.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Word(Vec<bool>);

impl Word {
    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        Word(bits.into_iter().collect())
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    /// The word extended by one bit.
    pub fn child(&self, bit: bool) -> Word {
        let mut w = self.clone();
        w.push(bit);
        w
    }

    pub fn parent(&self) -> Option<Word> {
        if self.is_empty() {
            None
        } else {
            Some(Word(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut w = self.clone();
        w.0.extend_from_slice(&other.0);
        w
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.0.starts_with(&self.0)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            write!(f, "{}", if b { '1' } else { '0' })?;
        }
        Ok(())
    }
}

impl FromStr for Word {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let mut bits = Vec::with_capacity(s.len());
        for c in s.chars() {
            match c {
                '0' => bits.push(false),
                '1' => bits.push(true),
                _ => {
                    return Err(Error::InvalidInput(format!(
                        "word may only contain 0 and 1, got {c:?}"
                    )))
                }
            }
        }
        Ok(Word(bits))
    }
}

impl TryFrom<String> for Word {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Word> for String {
    fn from(w: Word) -> String {
        w.to_string()
    }
}

/// Code of a word: length first, then value. Words up to length 63 fit.
pub fn word_code(w: &Word) -> Result<u64> {
    if w.len() > 63 {
        return Err(Error::Precision(format!(
            "word of length {} exceeds the representable coding range",
            w.len()
        )));
    }
    let mut val: u64 = 0;
    for &b in w.bits() {
        val = val * 2 + u64::from(b);
    }
    Ok((1u64 << w.len()) - 1 + val)
}

/// Inverse of [`word_code`]; total on `u64`.
pub fn word_from_code(n: u64) -> Word {
    let np1 = u128::from(n) + 1;
    let len = (127 - np1.leading_zeros()) as usize;
    let val = u128::from(n) - ((1u128 << len) - 1);
    let bits = (0..len).map(|i| (val >> (len - 1 - i)) & 1 == 1).collect();
    Word(bits)
}

/// Embeds a sequence of `u64` letters as a binary word, block `0^a 1`
/// per letter `a`.
pub fn embed_letters(path: &[u64]) -> Result<Word> {
    let mut bits: Vec<bool> = Vec::new();
    for &a in path {
        if bits.len() as u128 + u128::from(a) + 1 > 63 {
            return Err(Error::Precision(
                "embedded word exceeds the representable coding range".into(),
            ));
        }
        for _ in 0..a {
            bits.push(false);
        }
        bits.push(true);
    }
    Ok(Word(bits))
}

/// Decodes a binary word back to letters; `None` when the word is not an
/// embedding image (every embedded nonempty word ends in 1).
pub fn decode_embed(w: &Word) -> Option<Vec<u64>> {
    if w.is_empty() {
        return Some(Vec::new());
    }
    if !w.bits()[w.len() - 1] {
        return None;
    }
    let mut letters = Vec::new();
    let mut run: u64 = 0;
    for &b in w.bits() {
        if b {
            letters.push(run);
            run = 0;
        } else {
            run += 1;
        }
    }
    Some(letters)
}

/// Code of a letter sequence: [`word_code`] after [`embed_letters`].
pub fn node_code(path: &[u64]) -> Result<u64> {
    word_code(&embed_letters(path)?)
}

/// An eventually periodic point of the binary sequence space, kept in
/// canonical form: the period is primitive and the prefix cannot be
/// shortened by rotating the period.
///
/// Canonical form makes structural equality coincide with extensional
/// equality of the sequences.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "PointRepr", into = "PointRepr")]
pub struct Point {
    prefix: Word,
    period: Word,
}

#[derive(Serialize, Deserialize, Clone)]
struct PointRepr {
    prefix: Word,
    period: Word,
}

impl TryFrom<PointRepr> for Point {
    type Error = Error;
    fn try_from(r: PointRepr) -> Result<Self> {
        Point::new(r.prefix, r.period)
    }
}

impl From<Point> for PointRepr {
    fn from(p: Point) -> PointRepr {
        PointRepr {
            prefix: p.prefix,
            period: p.period,
        }
    }
}

impl Point {
    pub fn new(prefix: Word, period: Word) -> Result<Point> {
        if period.is_empty() {
            return Err(Error::InvalidInput("period must be nonempty".into()));
        }
        let mut prefix = prefix.0;
        let mut period = period.0;
        // shrink the period to its primitive root
        for d in 1..=period.len() {
            if period.len() % d == 0 && period.chunks(d).all(|c| c == &period[..d]) {
                period.truncate(d);
                break;
            }
        }
        // absorb prefix bits that also close the period
        while let (Some(&pb), Some(&qb)) = (prefix.last(), period.last()) {
            if pb != qb {
                break;
            }
            prefix.pop();
            let last = period.pop().expect("period stays nonempty");
            period.insert(0, last);
        }
        Ok(Point {
            prefix: Word(prefix),
            period: Word(period),
        })
    }

    pub fn zeros() -> Point {
        Point {
            prefix: Word::empty(),
            period: Word(vec![false]),
        }
    }

    pub fn ones() -> Point {
        Point {
            prefix: Word::empty(),
            period: Word(vec![true]),
        }
    }

    /// The point `w` followed by a constant tail.
    pub fn from_word_tail(w: Word, tail: bool) -> Point {
        Point::new(w, Word(vec![tail])).expect("period is nonempty")
    }

    pub fn prefix(&self) -> &Word {
        &self.prefix
    }

    pub fn period(&self) -> &Word {
        &self.period
    }

    pub fn bit(&self, k: usize) -> bool {
        if k < self.prefix.len() {
            self.prefix.0[k]
        } else {
            self.period.0[(k - self.prefix.len()) % self.period.len()]
        }
    }

    /// The first `k` bits.
    pub fn prefix_word(&self, k: usize) -> Word {
        Word((0..k).map(|i| self.bit(i)).collect())
    }

    pub fn starts_with(&self, w: &Word) -> bool {
        w.bits().iter().enumerate().all(|(i, &b)| self.bit(i) == b)
    }

    pub fn is_eventually_zero(&self) -> bool {
        self.period.0.iter().all(|&b| !b)
    }

    pub fn is_eventually_one(&self) -> bool {
        self.period.0.iter().all(|&b| b)
    }

    /// The point `w ⌢ self`.
    pub fn with_prefix(&self, w: &Word) -> Point {
        let mut bits = w.0.clone();
        bits.extend_from_slice(&self.prefix.0);
        Point::new(Word(bits), self.period.clone()).expect("period stays nonempty")
    }

    /// The point with the first `k` bits removed.
    pub fn suffix(&self, k: usize) -> Point {
        if k <= self.prefix.len() {
            Point::new(Word(self.prefix.0[k..].to_vec()), self.period.clone())
                .expect("period stays nonempty")
        } else {
            let off = (k - self.prefix.len()) % self.period.len();
            let mut q = self.period.0.clone();
            q.rotate_left(off);
            Point::new(Word::empty(), Word(q)).expect("period stays nonempty")
        }
    }

    /// Least position holding a zero bit, when one exists.
    pub fn first_zero(&self) -> Option<usize> {
        let bound = self.prefix.len() + self.period.len();
        (0..bound).find(|&k| !self.bit(k))
    }

    /// Least position where the two sequences differ.
    pub fn first_disagreement(&self, other: &Point) -> Option<usize> {
        let bound = self.prefix.len().max(other.prefix.len())
            + lcm(self.period.len(), other.period.len());
        (0..bound).find(|&k| self.bit(k) != other.bit(k))
    }

    /// The immediate successor in lexicographic order, when it exists:
    /// exactly the points of the form `u 0 1 1 1 ...`.
    pub fn lex_successor(&self) -> Option<Point> {
        if self.period.0 == [true] && !self.prefix.is_empty() {
            let mut w = self.prefix.clone();
            w.0.pop();
            w.push(true);
            Some(Point::from_word_tail(w, false))
        } else {
            None
        }
    }

    /// The immediate predecessor in lexicographic order, when it exists:
    /// exactly the points of the form `u 1 0 0 0 ...`.
    pub fn lex_predecessor(&self) -> Option<Point> {
        if self.period.0 == [false] && !self.prefix.is_empty() {
            let mut w = self.prefix.clone();
            w.0.pop();
            w.push(false);
            Some(Point::from_word_tail(w, true))
        } else {
            None
        }
    }
}

impl PartialOrd for Point {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Point {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        match self.first_disagreement(other) {
            None => std::cmp::Ordering::Equal,
            Some(k) => self.bit(k).cmp(&other.bit(k)),
        }
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})*", self.prefix, self.period)
    }
}

/// The basic clopen set of all points extending a word.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Cylinder {
    pub word: Word,
}

impl Cylinder {
    pub fn new(word: Word) -> Self {
        Cylinder { word }
    }

    pub fn contains(&self, x: &Point) -> bool {
        x.starts_with(&self.word)
    }

    pub fn min_point(&self) -> Point {
        Point::from_word_tail(self.word.clone(), false)
    }

    pub fn max_point(&self) -> Point {
        Point::from_word_tail(self.word.clone(), true)
    }
}

/// A clopen set, kept as the canonical antichain of cylinders covering
/// it: no listed word extends another, and no two siblings are both
/// listed (they merge into their parent).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "ClopenRepr", into = "ClopenRepr")]
pub struct ClopenSet {
    words: BTreeSet<Word>,
}

#[derive(Serialize, Deserialize, Clone)]
struct ClopenRepr {
    words: Vec<Word>,
}

impl TryFrom<ClopenRepr> for ClopenSet {
    type Error = Error;
    fn try_from(r: ClopenRepr) -> Result<Self> {
        Ok(ClopenSet::from_words(r.words))
    }
}

impl From<ClopenSet> for ClopenRepr {
    fn from(c: ClopenSet) -> ClopenRepr {
        ClopenRepr {
            words: c.words.into_iter().collect(),
        }
    }
}

impl ClopenSet {
    pub fn empty() -> Self {
        ClopenSet {
            words: BTreeSet::new(),
        }
    }

    pub fn full() -> Self {
        ClopenSet {
            words: [Word::empty()].into_iter().collect(),
        }
    }

    pub fn cylinder(w: Word) -> Self {
        ClopenSet::from_words([w])
    }

    pub fn from_words<I: IntoIterator<Item = Word>>(words: I) -> Self {
        let mut set: BTreeSet<Word> = words.into_iter().collect();
        loop {
            // drop words whose strict prefix is present
            let absorbed: Vec<Word> = set
                .iter()
                .filter(|w| {
                    (0..w.len()).any(|k| set.contains(&Word(w.0[..k].to_vec())))
                })
                .cloned()
                .collect();
            for w in &absorbed {
                set.remove(w);
            }
            // merge sibling pairs into their parent
            let mut merged = false;
            let candidates: Vec<Word> = set.iter().cloned().collect();
            for w in candidates {
                if w.is_empty() || !set.contains(&w) {
                    continue;
                }
                let mut sib = w.clone();
                let last = sib.0.pop().expect("nonempty");
                sib.push(!last);
                if set.contains(&sib) {
                    let parent = w.parent().expect("nonempty");
                    set.remove(&w);
                    set.remove(&sib);
                    set.insert(parent);
                    merged = true;
                }
            }
            if absorbed.is_empty() && !merged {
                break;
            }
        }
        ClopenSet { words: set }
    }

    pub fn words(&self) -> &BTreeSet<Word> {
        &self.words
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.words.len() == 1 && self.words.contains(&Word::empty())
    }

    pub fn contains_point(&self, x: &Point) -> bool {
        self.words.iter().any(|w| x.starts_with(w))
    }

    pub fn union(&self, other: &ClopenSet) -> ClopenSet {
        ClopenSet::from_words(self.words.iter().chain(other.words.iter()).cloned())
    }

    pub fn intersection(&self, other: &ClopenSet) -> ClopenSet {
        let mut out = Vec::new();
        for a in &self.words {
            for b in &other.words {
                if a.is_prefix_of(b) {
                    out.push(b.clone());
                } else if b.is_prefix_of(a) {
                    out.push(a.clone());
                }
            }
        }
        ClopenSet::from_words(out)
    }

    pub fn complement(&self) -> ClopenSet {
        fn comp(words: Vec<Vec<bool>>) -> Vec<Vec<bool>> {
            if words.iter().any(|w| w.is_empty()) {
                return Vec::new();
            }
            if words.is_empty() {
                return vec![Vec::new()];
            }
            let mut out = Vec::new();
            for bit in [false, true] {
                let tails: Vec<Vec<bool>> = words
                    .iter()
                    .filter(|w| w[0] == bit)
                    .map(|w| w[1..].to_vec())
                    .collect();
                for mut t in comp(tails) {
                    t.insert(0, bit);
                    out.push(t);
                }
            }
            out
        }
        let raw = comp(self.words.iter().map(|w| w.0.clone()).collect());
        ClopenSet::from_words(raw.into_iter().map(Word))
    }

    pub fn difference(&self, other: &ClopenSet) -> ClopenSet {
        self.intersection(&other.complement())
    }

    /// Subset test by recursively covering each cylinder of `self` with
    /// cylinders of `other`.
    pub fn subset_direct(&self, other: &ClopenSet) -> bool {
        fn covered(w: &Word, cover: &BTreeSet<Word>) -> bool {
            if cover.iter().any(|b| b.is_prefix_of(w)) {
                return true;
            }
            if !cover.iter().any(|b| w.is_prefix_of(b) && b.len() > w.len()) {
                return false;
            }
            covered(&w.child(false), cover) && covered(&w.child(true), cover)
        }
        self.words.iter().all(|w| covered(w, &other.words))
    }

    /// Subset test through the complement; agrees with
    /// [`ClopenSet::subset_direct`].
    pub fn subset_via_complement(&self, other: &ClopenSet) -> bool {
        self.intersection(&other.complement()).is_empty()
    }
}

/// Which sibling cylinders along a branch to keep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SiblingSelect {
    All,
    /// Only siblings at positions where the branch has bit 0.
    AtZeroBits,
    /// Only siblings at positions where the branch has bit 1.
    AtOneBits,
}

/// A symbolic subset of the natural numbers, viewed as word codes.
///
/// Membership is decidable for every form, and whether the set is
/// infinite can be read off structurally. `Affine` with `mul = 0`
/// denotes the constant image `{add}` (when the inner set is nonempty).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum IndexSet {
    All,
    Finite {
        values: BTreeSet<u64>,
    },
    /// Codes of the embedded nodes of a tree over `u64` letters.
    NodeSet {
        tree: TreeSchema,
    },
    /// Codes of the finite prefixes of a point.
    BranchNodes {
        point: Point,
    },
    /// Codes of the words leaving a point after following it for a
    /// while: the prefix of length `k` extended by the flipped bit.
    BranchSiblings {
        point: Point,
        select: SiblingSelect,
    },
    Affine {
        inner: Box<IndexSet>,
        mul: u64,
        add: u64,
    },
    Union {
        parts: Vec<IndexSet>,
    },
    Restrict {
        inner: Box<IndexSet>,
        min: u64,
    },
    ExceptFinite {
        inner: Box<IndexSet>,
        drop: BTreeSet<u64>,
    },
}

impl IndexSet {
    pub fn contains(&self, n: u64) -> bool {
        match self {
            IndexSet::All => true,
            IndexSet::Finite { values } => values.contains(&n),
            IndexSet::NodeSet { tree } => match decode_embed(&word_from_code(n)) {
                Some(letters) => tree.contains(&letters),
                None => false,
            },
            IndexSet::BranchNodes { point } => {
                let w = word_from_code(n);
                point.starts_with(&w)
            }
            IndexSet::BranchSiblings { point, select } => {
                let w = word_from_code(n);
                match w.bits().split_last() {
                    None => false,
                    Some((&last, head)) => {
                        let k = head.len();
                        head.iter().enumerate().all(|(i, &b)| point.bit(i) == b)
                            && point.bit(k) != last
                            && match select {
                                SiblingSelect::All => true,
                                SiblingSelect::AtZeroBits => !point.bit(k),
                                SiblingSelect::AtOneBits => point.bit(k),
                            }
                    }
                }
            }
            IndexSet::Affine { inner, mul, add } => {
                if *mul == 0 {
                    n == *add && !matches!(inner.enumerate_capped(1).0.len(), 0)
                } else if n < *add || (n - add) % mul != 0 {
                    false
                } else {
                    inner.contains((n - add) / mul)
                }
            }
            IndexSet::Union { parts } => parts.iter().any(|p| p.contains(n)),
            IndexSet::Restrict { inner, min } => n >= *min && inner.contains(n),
            IndexSet::ExceptFinite { inner, drop } => !drop.contains(&n) && inner.contains(n),
        }
    }

    /// Structural infiniteness of the denoted set of naturals.
    pub fn is_infinite(&self) -> bool {
        match self {
            IndexSet::All => true,
            IndexSet::Finite { .. } => false,
            IndexSet::NodeSet { tree } => tree.is_infinite(),
            IndexSet::BranchNodes { .. } => true,
            IndexSet::BranchSiblings { point, select } => match select {
                SiblingSelect::All => true,
                SiblingSelect::AtZeroBits => !point.is_eventually_one(),
                SiblingSelect::AtOneBits => !point.is_eventually_zero(),
            },
            IndexSet::Affine { inner, mul, .. } => *mul >= 1 && inner.is_infinite(),
            IndexSet::Union { parts } => parts.iter().any(|p| p.is_infinite()),
            IndexSet::Restrict { inner, .. } => inner.is_infinite(),
            IndexSet::ExceptFinite { inner, .. } => inner.is_infinite(),
        }
    }

    /// The first `count` elements in increasing order. Errors when the
    /// set is infinite but the requested elements do not fit in `u64`
    /// codes.
    pub fn enumerate(&self, count: usize) -> Result<Vec<u64>> {
        let (v, exhausted) = self.enumerate_capped(count);
        if v.len() < count && !exhausted {
            // count reached the representable range before the set ran out
            return Err(Error::Precision(
                "requested indices exceed the representable coding range".into(),
            ));
        }
        if v.len() < count && self.is_infinite() {
            return Err(Error::Precision(
                "requested indices exceed the representable coding range".into(),
            ));
        }
        Ok(v)
    }

    /// First `count` elements plus a flag telling whether the whole
    /// representable part of the set was listed.
    fn enumerate_capped(&self, count: usize) -> (Vec<u64>, bool) {
        match self {
            IndexSet::All => {
                let v: Vec<u64> = (0..count as u64).collect();
                (v, false)
            }
            IndexSet::Finite { values } => {
                let exhausted = values.len() <= count;
                (values.iter().copied().take(count).collect(), exhausted)
            }
            IndexSet::NodeSet { tree } => enumerate_nodeset(tree, count),
            IndexSet::BranchNodes { point } => {
                let mut out = Vec::new();
                for k in 0..=63usize {
                    if out.len() == count {
                        return (out, false);
                    }
                    out.push(word_code(&point.prefix_word(k)).expect("length <= 63"));
                }
                (out, true)
            }
            IndexSet::BranchSiblings { point, select } => {
                let mut out = Vec::new();
                for k in 0..63usize {
                    if out.len() == count {
                        return (out, false);
                    }
                    let keep = match select {
                        SiblingSelect::All => true,
                        SiblingSelect::AtZeroBits => !point.bit(k),
                        SiblingSelect::AtOneBits => point.bit(k),
                    };
                    if keep {
                        let w = point.prefix_word(k).child(!point.bit(k));
                        out.push(word_code(&w).expect("length <= 63"));
                    }
                }
                (out, true)
            }
            IndexSet::Affine { inner, mul, add } => {
                if *mul == 0 {
                    let (v, ex) = inner.enumerate_capped(1);
                    if v.is_empty() {
                        (Vec::new(), ex)
                    } else {
                        (vec![*add], true)
                    }
                } else {
                    let (v, ex) = inner.enumerate_capped(count);
                    let mut out = Vec::new();
                    let mut overflow = false;
                    for n in v {
                        match n.checked_mul(*mul).and_then(|m| m.checked_add(*add)) {
                            Some(m) => out.push(m),
                            None => {
                                overflow = true;
                                break;
                            }
                        }
                    }
                    (out, ex && !overflow)
                }
            }
            IndexSet::Union { parts } => {
                let mut merged: BTreeSet<u64> = BTreeSet::new();
                let mut all_exhausted = true;
                for p in parts {
                    let (v, ex) = p.enumerate_capped(count);
                    all_exhausted &= ex;
                    merged.extend(v);
                }
                if merged.len() >= count {
                    (merged.into_iter().take(count).collect(), false)
                } else {
                    (merged.into_iter().collect(), all_exhausted)
                }
            }
            IndexSet::Restrict { inner, min } => filter_pull(inner, count, |n| n >= *min),
            IndexSet::ExceptFinite { inner, drop } => {
                filter_pull(inner, count, |n| !drop.contains(&n))
            }
        }
    }
}

/// Pulls increasingly large chunks of `inner` until `count` elements
/// survive the filter or the representable part of `inner` is exhausted.
fn filter_pull(inner: &IndexSet, count: usize, keep: impl Fn(u64) -> bool) -> (Vec<u64>, bool) {
    let mut pull = count.max(16);
    loop {
        let (v, ex) = inner.enumerate_capped(pull);
        let kept: Vec<u64> = v.into_iter().filter(|&n| keep(n)).collect();
        if kept.len() >= count {
            return (kept.into_iter().take(count).collect(), false);
        }
        if ex {
            return (kept, true);
        }
        pull *= 2;
    }
}

/// Emits codes of embedded tree nodes in increasing order by walking
/// embed lengths one at a time; within a length, code order equals
/// lexicographic order of the binary words, which the recursion follows
/// by trying longer zero blocks (larger letters) first.
fn enumerate_nodeset(tree: &TreeSchema, count: usize) -> (Vec<u64>, bool) {
    fn stage(
        s: &TreeSchema,
        remaining: usize,
        bits: &mut Vec<bool>,
        out: &mut Vec<u64>,
        count: usize,
    ) {
        if out.len() == count {
            return;
        }
        if remaining == 0 {
            let code = word_code(&Word::from_bits(bits.iter().copied())).expect("length <= 63");
            out.push(code);
            return;
        }
        for a in (0..remaining as u64).rev() {
            if let Some(child) = s.child_schema(a, remaining) {
                for _ in 0..a {
                    bits.push(false);
                }
                bits.push(true);
                stage(&child, remaining - a as usize - 1, bits, out, count);
                for _ in 0..=a {
                    bits.pop();
                }
                if out.len() == count {
                    return;
                }
            }
        }
    }

    let mut out = Vec::new();
    if tree.is_empty_schema() {
        return (out, true);
    }
    for len in 0..=63usize {
        if out.len() >= count {
            return (out, false);
        }
        let mut bits = Vec::new();
        stage(tree, len, &mut bits, &mut out, count);
    }
    let exhausted = out.len() < count;
    (out, exhausted)
}
