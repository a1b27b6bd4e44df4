//! A catalog of step-like functions on the binary sequence space,
//! lexicographic intervals, difference regions, and the dense sequences
//! the decision procedures work over.
//!
//! Every catalog function is constant or the indicator of a lexicographic
//! interval, so extensional equality is decidable by normalizing that
//! interval. Differences of two catalog functions live on boolean
//! combinations of two intervals, which stay small interval unions.

use crate::cantor::{word_from_code, Cylinder, Point, Word};
use crate::error::{Error, Result};
use crate::Rational;
use num::Signed;
use serde::{Deserialize, Serialize};

/// An interval in the lexicographic order of binary sequences, kept
/// normalized: a strict endpoint is replaced by its closed neighbor when
/// that neighbor exists. For normalized nonempty intervals, structural
/// equality coincides with equality of the denoted point sets.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "IntervalRepr", into = "IntervalRepr")]
pub struct LexInterval {
    pub lo: Point,
    pub lo_strict: bool,
    pub hi: Point,
    pub hi_strict: bool,
}

#[derive(Serialize, Deserialize, Clone)]
struct IntervalRepr {
    lo: Point,
    #[serde(default)]
    lo_strict: bool,
    hi: Point,
    #[serde(default)]
    hi_strict: bool,
}

impl TryFrom<IntervalRepr> for LexInterval {
    type Error = Error;
    fn try_from(r: IntervalRepr) -> Result<Self> {
        Ok(LexInterval::new(r.lo, r.lo_strict, r.hi, r.hi_strict))
    }
}

impl From<LexInterval> for IntervalRepr {
    fn from(i: LexInterval) -> IntervalRepr {
        IntervalRepr {
            lo: i.lo,
            lo_strict: i.lo_strict,
            hi: i.hi,
            hi_strict: i.hi_strict,
        }
    }
}

impl LexInterval {
    pub fn new(lo: Point, lo_strict: bool, hi: Point, hi_strict: bool) -> LexInterval {
        let (lo, lo_strict) = if lo_strict {
            match lo.lex_successor() {
                Some(s) => (s, false),
                None => (lo, true),
            }
        } else {
            (lo, false)
        };
        let (hi, hi_strict) = if hi_strict {
            match hi.lex_predecessor() {
                Some(p) => (p, false),
                None => (hi, true),
            }
        } else {
            (hi, false)
        };
        LexInterval {
            lo,
            lo_strict,
            hi,
            hi_strict,
        }
    }

    pub fn closed(lo: Point, hi: Point) -> LexInterval {
        LexInterval::new(lo, false, hi, false)
    }

    pub fn full() -> LexInterval {
        LexInterval::closed(Point::zeros(), Point::ones())
    }

    pub fn singleton(x: Point) -> LexInterval {
        LexInterval::closed(x.clone(), x)
    }

    /// The points extending `w`, as the interval from `w 0 0 ...` to
    /// `w 1 1 ...`.
    pub fn cylinder(w: &Word) -> LexInterval {
        LexInterval::closed(
            Point::from_word_tail(w.clone(), false),
            Point::from_word_tail(w.clone(), true),
        )
    }

    /// After normalization a strict endpoint has no closed neighbor, so
    /// the interval is empty exactly when the bounds cross or collapse
    /// onto a strict end.
    pub fn is_empty(&self) -> bool {
        match self.lo.cmp(&self.hi) {
            std::cmp::Ordering::Greater => true,
            std::cmp::Ordering::Equal => self.lo_strict || self.hi_strict,
            std::cmp::Ordering::Less => false,
        }
    }

    pub fn is_full(&self) -> bool {
        !self.lo_strict
            && !self.hi_strict
            && self.lo == Point::zeros()
            && self.hi == Point::ones()
    }

    pub fn contains(&self, x: &Point) -> bool {
        let above = match x.cmp(&self.lo) {
            std::cmp::Ordering::Less => false,
            std::cmp::Ordering::Equal => !self.lo_strict,
            std::cmp::Ordering::Greater => true,
        };
        let below = match x.cmp(&self.hi) {
            std::cmp::Ordering::Greater => false,
            std::cmp::Ordering::Equal => !self.hi_strict,
            std::cmp::Ordering::Less => true,
        };
        above && below
    }

    pub fn intersect(&self, other: &LexInterval) -> LexInterval {
        let (lo, lo_strict) = match self.lo.cmp(&other.lo) {
            std::cmp::Ordering::Less => (other.lo.clone(), other.lo_strict),
            std::cmp::Ordering::Greater => (self.lo.clone(), self.lo_strict),
            std::cmp::Ordering::Equal => (self.lo.clone(), self.lo_strict || other.lo_strict),
        };
        let (hi, hi_strict) = match self.hi.cmp(&other.hi) {
            std::cmp::Ordering::Less => (self.hi.clone(), self.hi_strict),
            std::cmp::Ordering::Greater => (other.hi.clone(), other.hi_strict),
            std::cmp::Ordering::Equal => (self.hi.clone(), self.hi_strict || other.hi_strict),
        };
        LexInterval::new(lo, lo_strict, hi, hi_strict)
    }

    /// Complement within the whole space, as up to two intervals.
    pub fn complement(&self) -> Vec<LexInterval> {
        if self.is_empty() {
            return vec![LexInterval::full()];
        }
        let mut out = Vec::new();
        let left = LexInterval::new(Point::zeros(), false, self.lo.clone(), !self.lo_strict);
        let right = LexInterval::new(self.hi.clone(), !self.hi_strict, Point::ones(), false);
        if !left.is_empty() {
            out.push(left);
        }
        if !right.is_empty() {
            out.push(right);
        }
        out
    }

    /// Removes `other`, leaving up to two intervals.
    pub fn subtract(&self, other: &LexInterval) -> Vec<LexInterval> {
        // clip the cut to this interval so a disjoint or overhanging cut
        // cannot produce pieces outside of it
        let cut = self.intersect(other);
        if cut.is_empty() {
            return if self.is_empty() {
                Vec::new()
            } else {
                vec![self.clone()]
            };
        }
        let mut out = Vec::new();
        let left = LexInterval::new(
            self.lo.clone(),
            self.lo_strict,
            cut.lo.clone(),
            !cut.lo_strict,
        );
        let right = LexInterval::new(
            cut.hi.clone(),
            !cut.hi_strict,
            self.hi.clone(),
            self.hi_strict,
        );
        if !left.is_empty() {
            out.push(left);
        }
        if !right.is_empty() {
            out.push(right);
        }
        out
    }

    /// The word `w` with this interval equal to the cylinder of `w`,
    /// when the interval is exactly a cylinder.
    pub fn as_cylinder(&self) -> Option<Word> {
        if self.lo_strict || self.hi_strict {
            return None;
        }
        let d = self.lo.first_disagreement(&self.hi)?;
        let w = self.lo.prefix_word(d);
        let lo = Point::from_word_tail(w.clone(), false);
        let hi = Point::from_word_tail(w.clone(), true);
        (lo == self.lo && hi == self.hi).then_some(w)
    }

    /// Some point of the interval, when nonempty. Closed low ends return
    /// the endpoint; otherwise a point just above the open end is built
    /// by flipping the first suitable zero bit.
    pub fn sample_point(&self) -> Option<Point> {
        if self.is_empty() {
            return None;
        }
        if !self.lo_strict {
            return Some(self.lo.clone());
        }
        // normalized strict end: lo has no successor, hence lo < hi and
        // lo has infinitely many zero bits
        let d = self
            .lo
            .first_disagreement(&self.hi)
            .expect("strict low end differs from the high end");
        let mut m = d + 1;
        while self.lo.bit(m) {
            m += 1;
        }
        let z = Point::from_word_tail(self.lo.prefix_word(m).child(true), false);
        debug_assert!(self.contains(&z));
        Some(z)
    }
}

/// A finite union of lexicographic intervals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct Region {
    pub intervals: Vec<LexInterval>,
}

impl Region {
    pub fn empty() -> Region {
        Region {
            intervals: Vec::new(),
        }
    }

    pub fn from_intervals<I: IntoIterator<Item = LexInterval>>(intervals: I) -> Region {
        Region {
            intervals: intervals.into_iter().filter(|i| !i.is_empty()).collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.iter().all(|i| i.is_empty())
    }

    pub fn contains(&self, x: &Point) -> bool {
        self.intervals.iter().any(|i| i.contains(x))
    }

    pub fn sample_point(&self) -> Option<Point> {
        self.intervals.iter().find_map(|i| i.sample_point())
    }

    pub fn union(&self, other: &Region) -> Region {
        Region::from_intervals(self.intervals.iter().chain(&other.intervals).cloned())
    }
}

/// Whether the cylinder is covered by the union of the given regions.
///
/// Maintains the uncovered remainder as a disjoint list of intervals and
/// subtracts region intervals one at a time; emptiness of the leftovers
/// is exact because interval emptiness accounts for adjacent endpoints.
pub fn region_covers(cylinder: &Cylinder, regions: &[Region]) -> bool {
    let mut remainder = vec![LexInterval::cylinder(&cylinder.word)];
    for region in regions {
        for cut in &region.intervals {
            if remainder.is_empty() {
                return true;
            }
            remainder = remainder.iter().flat_map(|r| r.subtract(cut)).collect();
        }
    }
    remainder.is_empty()
}

/// A step-like function on the binary sequence space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SymbolicFn {
    /// Indicator of the points `>=` the given one.
    PlusStep { point: Point },
    /// Indicator of the points `>` the given one.
    MinusStep { point: Point },
    /// Indicator of the cylinder of a word.
    NodeInd { word: Word },
    /// Indicator of a single point.
    PointInd { point: Point },
    Const { value: Rational },
    Zero,
}

/// Extensional normal form of a catalog function.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormalFn {
    Const(Rational),
    /// Value 1 on a nonempty, non-full normalized interval, 0 elsewhere.
    Indicator(LexInterval),
}

impl SymbolicFn {
    /// Support interval plus the on/off values: the function equals `on`
    /// on the interval and `off` outside; constants report no interval.
    pub fn parts(&self) -> (Option<LexInterval>, Rational, Rational) {
        let one = Rational::from_integer(1);
        let zero = Rational::from_integer(0);
        match self {
            SymbolicFn::PlusStep { point } => (
                Some(LexInterval::new(point.clone(), false, Point::ones(), false)),
                one,
                zero,
            ),
            SymbolicFn::MinusStep { point } => (
                Some(LexInterval::new(point.clone(), true, Point::ones(), false)),
                one,
                zero,
            ),
            SymbolicFn::NodeInd { word } => (Some(LexInterval::cylinder(word)), one, zero),
            SymbolicFn::PointInd { point } => {
                (Some(LexInterval::singleton(point.clone())), one, zero)
            }
            SymbolicFn::Const { value } => (None, *value, *value),
            SymbolicFn::Zero => (None, zero.clone(), zero),
        }
    }

    pub fn eval(&self, x: &Point) -> Rational {
        let (support, on, off) = self.parts();
        match support {
            None => on,
            Some(i) => {
                if i.contains(x) {
                    on
                } else {
                    off
                }
            }
        }
    }

    pub fn normal_form(&self) -> NormalFn {
        let (support, on, off) = self.parts();
        match support {
            None => NormalFn::Const(on),
            Some(i) => {
                if i.is_empty() {
                    NormalFn::Const(off)
                } else if i.is_full() {
                    NormalFn::Const(on)
                } else {
                    NormalFn::Indicator(i)
                }
            }
        }
    }

    /// Extensional equality.
    pub fn equivalent(&self, other: &SymbolicFn) -> bool {
        self.normal_form() == other.normal_form()
    }
}

/// The set of points where `f` and `g` differ by more than `theta`, as a
/// union of intervals: the supports split the space into four cells, and
/// a cell enters the region when the value difference there is large.
pub fn diff_region(f: &SymbolicFn, g: &SymbolicFn, theta: Rational) -> Region {
    let (sf, fa, fb) = f.parts();
    let (sg, ga, gb) = g.parts();
    let sf = sf.unwrap_or_else(LexInterval::full);
    let sg = sg.unwrap_or_else(LexInterval::full);
    // for constants the support is the whole space, so the off-value
    // cells are empty and their value is irrelevant
    let mut out: Vec<LexInterval> = Vec::new();
    let mut cell = |intervals: Vec<LexInterval>, va: &Rational, vb: &Rational| {
        if (va - vb).abs() > theta {
            out.extend(intervals.into_iter().filter(|i| !i.is_empty()));
        }
    };
    cell(vec![sf.intersect(&sg)], &fa, &ga);
    cell(
        sg.complement()
            .iter()
            .map(|c| sf.intersect(c))
            .collect(),
        &fa,
        &gb,
    );
    cell(
        sf.complement()
            .iter()
            .map(|c| sg.intersect(c))
            .collect(),
        &fb,
        &ga,
    );
    let mut neither = Vec::new();
    for a in sf.complement() {
        for b in sg.complement() {
            neither.push(a.intersect(&b));
        }
    }
    cell(neither, &fb, &gb);
    Region::from_intervals(out)
}

/// A concrete dense sequence of catalog functions, indexed by naturals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DenseSequence {
    /// Index `4q + r` gives the step at the word coded by `q`, closed at
    /// the word's zero tail (`r = 0`), closed at its one tail (`r = 1`),
    /// or the strict versions (`r = 2, 3`).
    SplitCantorCanonical,
    /// Index `n` gives the indicator of the cylinder of the word coded
    /// by `n`.
    NodeIndicatorsByH,
    /// A finite patch over another sequence: small indices read the
    /// table, the rest fall through with the same index.
    FiniteTableWithTail {
        table: Vec<SymbolicFn>,
        tail: Box<DenseSequence>,
    },
}

impl DenseSequence {
    pub fn fn_at(&self, n: u64) -> SymbolicFn {
        match self {
            DenseSequence::SplitCantorCanonical => {
                let q = n / 4;
                let r = n % 4;
                let s = word_from_code(q);
                let lo = Point::from_word_tail(s.clone(), false);
                let hi = Point::from_word_tail(s, true);
                match r {
                    0 => SymbolicFn::PlusStep { point: lo },
                    1 => SymbolicFn::PlusStep { point: hi },
                    2 => SymbolicFn::MinusStep { point: lo },
                    _ => SymbolicFn::MinusStep { point: hi },
                }
            }
            DenseSequence::NodeIndicatorsByH => SymbolicFn::NodeInd {
                word: word_from_code(n),
            },
            DenseSequence::FiniteTableWithTail { table, tail } => {
                match table.get(usize::try_from(n).unwrap_or(usize::MAX)) {
                    Some(f) => f.clone(),
                    None => tail.fn_at(n),
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ratio;
    use proptest::prelude::*;

    fn w(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn pt(prefix: &str, period: &str) -> Point {
        Point::new(w(prefix), w(period)).unwrap()
    }

    fn plus(p: Point) -> SymbolicFn {
        SymbolicFn::PlusStep { point: p }
    }

    fn minus(p: Point) -> SymbolicFn {
        SymbolicFn::MinusStep { point: p }
    }

    #[test]
    fn eval_steps() {
        let x = pt("", "01");
        let f = plus(x.clone());
        assert_eq!(f.eval(&x), ratio(1, 1));
        assert_eq!(f.eval(&Point::zeros()), ratio(0, 1));
        assert_eq!(f.eval(&Point::ones()), ratio(1, 1));
        let g = minus(x.clone());
        assert_eq!(g.eval(&x), ratio(0, 1));
        assert_eq!(g.eval(&Point::ones()), ratio(1, 1));
        let c = SymbolicFn::NodeInd { word: w("01") };
        assert_eq!(c.eval(&x), ratio(1, 1));
        assert_eq!(c.eval(&pt("00", "1")), ratio(0, 1));
    }

    #[test]
    fn step_equivalences() {
        // the strict step at a point with a successor is the weak step
        // at that successor
        let a = minus(pt("00", "1"));
        let b = plus(pt("01", "0"));
        assert!(a.equivalent(&b));
        assert!(plus(Point::zeros()).equivalent(&SymbolicFn::Const {
            value: ratio(1, 1)
        }));
        assert!(minus(Point::ones()).equivalent(&SymbolicFn::Zero));
        assert!(SymbolicFn::NodeInd { word: w("") }.equivalent(&SymbolicFn::Const {
            value: ratio(1, 1)
        }));
        assert!(SymbolicFn::NodeInd { word: w("11") }.equivalent(&plus(pt("11", "0"))));
        let x = pt("", "01");
        assert!(!plus(x.clone()).equivalent(&minus(x.clone())));
        assert!(!SymbolicFn::PointInd { point: x.clone() }
            .equivalent(&SymbolicFn::NodeInd { word: w("01") }));
    }

    #[test]
    fn interval_emptiness_sees_adjacency() {
        let x = pt("0", "1");
        let s = x.lex_successor().unwrap();
        assert_eq!(s, pt("1", "0"));
        let gap = LexInterval::new(x.clone(), true, s.clone(), true);
        assert!(gap.is_empty());
        let upto = LexInterval::new(x.clone(), true, s.clone(), false);
        assert!(!upto.is_empty());
        assert_eq!(upto.sample_point().unwrap(), s);
        // no successor: the strict end survives normalization
        let y = pt("", "01");
        let open = LexInterval::new(y.clone(), true, Point::ones(), false);
        assert!(open.lo_strict);
        assert!(!open.is_empty());
        let z = open.sample_point().unwrap();
        assert!(open.contains(&z));
        assert!(z > y);
    }

    #[test]
    fn cylinder_recognition() {
        let i = LexInterval::cylinder(&w("01"));
        assert_eq!(i.as_cylinder(), Some(w("01")));
        let j = LexInterval::closed(pt("010", "0"), pt("01", "1"));
        assert_eq!(j.as_cylinder(), Some(w("01")));
        let k = LexInterval::closed(pt("", "01"), Point::ones());
        assert_eq!(k.as_cylinder(), None);
    }

    #[test]
    fn diff_region_point_of_difference() {
        let x = pt("", "01");
        let f = plus(x.clone());
        let g = minus(x.clone());
        let r = diff_region(&f, &g, ratio(1, 2));
        assert!(r.contains(&x));
        assert!(!r.contains(&Point::zeros()));
        assert!(!r.contains(&Point::ones()));
        assert_eq!(r.sample_point(), Some(x.clone()));
        // threshold at the full gap excludes everything
        let r1 = diff_region(&f, &g, ratio(1, 1));
        assert!(r1.is_empty());
        // identical functions never differ
        assert!(diff_region(&f, &f, ratio(0, 1)).is_empty());
    }

    #[test]
    fn covering_with_adjacent_pieces() {
        let cyl = Cylinder::new(w(""));
        let x = pt("0", "1");
        let s = x.lex_successor().unwrap();
        let left = Region::from_intervals([LexInterval::closed(Point::zeros(), x.clone())]);
        let right = Region::from_intervals([LexInterval::closed(s.clone(), Point::ones())]);
        assert!(region_covers(&cyl, &[left.clone(), right.clone()]));

        // with a limit point the two open sides leave exactly that point
        let y = pt("", "01");
        let below = Region::from_intervals([LexInterval::new(
            Point::zeros(),
            false,
            y.clone(),
            true,
        )]);
        let above = Region::from_intervals([LexInterval::new(
            y.clone(),
            true,
            Point::ones(),
            false,
        )]);
        assert!(!region_covers(&cyl, &[below.clone(), above.clone()]));
        let point = Region::from_intervals([LexInterval::singleton(y.clone())]);
        assert!(region_covers(&cyl, &[below, above, point]));
    }

    #[test]
    fn subtracting_a_disjoint_interval_changes_nothing() {
        let one = LexInterval::cylinder(&w("1"));
        let far = LexInterval::cylinder(&w("00"));
        assert_eq!(one.subtract(&far), vec![one.clone()]);
        let region = Region::from_intervals([far, one.clone()]);
        assert!(region_covers(&Cylinder::new(w("1")), &[region]));
    }

    #[test]
    fn dense_sequences_fixed_values() {
        let d = DenseSequence::SplitCantorCanonical;
        assert_eq!(d.fn_at(0), plus(Point::zeros()));
        assert_eq!(d.fn_at(1), plus(Point::ones()));
        assert_eq!(d.fn_at(2), minus(Point::zeros()));
        assert_eq!(d.fn_at(3), minus(Point::ones()));
        // q = 2 codes the word "1"
        assert_eq!(d.fn_at(8), plus(pt("1", "0")));
        assert_eq!(d.fn_at(9), plus(Point::ones()));

        let n = DenseSequence::NodeIndicatorsByH;
        assert_eq!(n.fn_at(0), SymbolicFn::NodeInd { word: w("") });
        assert_eq!(n.fn_at(8), SymbolicFn::NodeInd { word: w("001") });

        let patched = DenseSequence::FiniteTableWithTail {
            table: vec![SymbolicFn::Zero],
            tail: Box::new(d.clone()),
        };
        assert_eq!(patched.fn_at(0), SymbolicFn::Zero);
        assert_eq!(patched.fn_at(8), d.fn_at(8));
    }

    #[test]
    fn serde_round_trips() {
        let f = minus(pt("01", "10"));
        let js = serde_json::to_string(&f).unwrap();
        assert_eq!(serde_json::from_str::<SymbolicFn>(&js).unwrap(), f);
        let d = DenseSequence::FiniteTableWithTail {
            table: vec![SymbolicFn::Const { value: ratio(2, 3) }],
            tail: Box::new(DenseSequence::NodeIndicatorsByH),
        };
        let js = serde_json::to_string(&d).unwrap();
        assert_eq!(serde_json::from_str::<DenseSequence>(&js).unwrap(), d);
        let i = LexInterval::new(pt("0", "1"), true, Point::ones(), false);
        let js = serde_json::to_string(&i).unwrap();
        assert_eq!(serde_json::from_str::<LexInterval>(&js).unwrap(), i);
    }

    fn arb_point() -> impl Strategy<Value = Point> {
        (
            proptest::collection::vec(any::<bool>(), 0..4),
            proptest::collection::vec(any::<bool>(), 1..3),
        )
            .prop_map(|(p, q)| {
                Point::new(Word::from_bits(p), Word::from_bits(q)).unwrap()
            })
    }

    fn arb_fn() -> impl Strategy<Value = SymbolicFn> {
        prop_oneof![
            arb_point().prop_map(|p| SymbolicFn::PlusStep { point: p }),
            arb_point().prop_map(|p| SymbolicFn::MinusStep { point: p }),
            proptest::collection::vec(any::<bool>(), 0..4)
                .prop_map(|b| SymbolicFn::NodeInd { word: Word::from_bits(b) }),
            arb_point().prop_map(|p| SymbolicFn::PointInd { point: p }),
            (0i64..3).prop_map(|n| SymbolicFn::Const { value: ratio(n, 1) }),
            Just(SymbolicFn::Zero),
        ]
    }

    proptest! {
        #[test]
        fn prop_equivalence_matches_empty_difference(f in arb_fn(), g in arb_fn()) {
            let equal = f.equivalent(&g);
            let differ = diff_region(&f, &g, ratio(0, 1));
            prop_assert_eq!(equal, differ.is_empty());
            if let Some(x) = differ.sample_point() {
                prop_assert_ne!(f.eval(&x), g.eval(&x));
            }
        }

        #[test]
        fn prop_eval_agrees_with_normal_form(f in arb_fn(), x in arb_point()) {
            let v = f.eval(&x);
            match f.normal_form() {
                NormalFn::Const(c) => prop_assert_eq!(v, c),
                NormalFn::Indicator(i) => {
                    let expect = if i.contains(&x) { ratio(1, 1) } else { ratio(0, 1) };
                    prop_assert_eq!(v, expect);
                }
            }
        }

        #[test]
        fn prop_subtract_partitions(
            a in arb_point(),
            b in arb_point(),
            x in arb_point(),
            y in arb_point(),
            z in arb_point(),
        ) {
            let outer = LexInterval::closed(a.clone().min(b.clone()), a.max(b));
            let cut = LexInterval::closed(x.clone().min(y.clone()), x.max(y));
            let rest = outer.subtract(&cut);
            let expected = outer.contains(&z) && !cut.contains(&z);
            let got = rest.iter().any(|i| i.contains(&z));
            prop_assert_eq!(expected, got);
        }

        #[test]
        fn prop_region_cover_detects_gap(x in arb_point()) {
            let cyl = Cylinder::new(Word::empty());
            let below = Region::from_intervals([LexInterval::new(Point::zeros(), false, x.clone(), true)]);
            let above = Region::from_intervals([LexInterval::new(x.clone(), true, Point::ones(), false)]);
            prop_assert!(!region_covers(&cyl, &[below.clone(), above.clone()]));
            let exact = Region::from_intervals([LexInterval::singleton(x)]);
            prop_assert!(region_covers(&cyl, &[below, above, exact]));
        }
    }
}
