//! Reductions that turn membership questions into convergence questions.
//!
//! The pivot is the sibling map: following a point `x` through the binary
//! tree and branching off at each step gives an antichain of words, one per
//! depth, that determines `x`.  Pushing that antichain through the canonical
//! split family produces a subfamily whose convergence matches "does the
//! domain contain `x`" once the family is restricted to a domain with no
//! eventually constant points.  The second half glues a tree of interest
//! onto a fixed well-founded infinite base so that well-foundedness of the
//! glued tree is equivalent to convergence of its node indicators.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::cantor::{word_from_code, ClopenSet, IndexSet, Point, SiblingSelect, Word};
use crate::catalog::{diff_region, DenseSequence, LexInterval, Region, SymbolicFn};
use crate::convergence::{decide_convergence, Verdict};
use crate::error::{Error, Result};
use crate::ratio;
use crate::trees::TreeSchema;

/// A point set with decidable membership: clopen sets, lexicographic
/// intervals, tail-pattern predicates, and finite boolean combinations.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DecidablePointSet {
    Clopen { set: ClopenSet },
    Interval { interval: LexInterval },
    /// Points with a constant tail (eventually zero or eventually one).
    EventuallyConstant,
    /// Points some tail of which reads `pattern` repeated forever,
    /// starting at the beginning of the pattern.
    TailPattern { pattern: Word },
    Not { inner: Box<DecidablePointSet> },
    And { parts: Vec<DecidablePointSet> },
    Or { parts: Vec<DecidablePointSet> },
}

impl DecidablePointSet {
    pub fn contains(&self, x: &Point) -> bool {
        match self {
            DecidablePointSet::Clopen { set } => set.contains_point(x),
            DecidablePointSet::Interval { interval } => interval.contains(x),
            DecidablePointSet::EventuallyConstant => {
                x.is_eventually_zero() || x.is_eventually_one()
            }
            DecidablePointSet::TailPattern { pattern } => tail_matches(x, pattern),
            DecidablePointSet::Not { inner } => !inner.contains(x),
            DecidablePointSet::And { parts } => parts.iter().all(|p| p.contains(x)),
            DecidablePointSet::Or { parts } => parts.iter().any(|p| p.contains(x)),
        }
    }

    /// How many leading bits the description of this set can distinguish.
    fn resolution(&self) -> usize {
        match self {
            DecidablePointSet::Clopen { set } => {
                set.words().iter().map(Word::len).max().unwrap_or(0)
            }
            DecidablePointSet::Interval { interval } => {
                let desc = |p: &Point| p.prefix().len() + p.period().len();
                desc(&interval.lo).max(desc(&interval.hi))
            }
            DecidablePointSet::EventuallyConstant => 1,
            DecidablePointSet::TailPattern { pattern } => pattern.len(),
            DecidablePointSet::Not { inner } => inner.resolution(),
            DecidablePointSet::And { parts } | DecidablePointSet::Or { parts } => {
                parts.iter().map(DecidablePointSet::resolution).max().unwrap_or(0)
            }
        }
    }

    /// Search for an eventually constant member, trying every constant-tail
    /// point whose free prefix is short enough to be distinguished by this
    /// set's description (plus slack).  The sweep is exhaustive for clopen
    /// sets, single intervals, and tail patterns; for deeply mixed
    /// combinations it is a best-effort check to a fixed depth.
    pub fn eventually_constant_member(&self) -> Option<Point> {
        let bound = (self.resolution() + 2).min(18);
        for len in 0..=bound {
            for value in 0..(1u64 << len) {
                let bits = (0..len).rev().map(|k| value >> k & 1 == 1);
                let u = Word::from_bits(bits);
                for tail in [false, true] {
                    let p = Point::from_word_tail(u.clone(), tail);
                    if self.contains(&p) {
                        return Some(p);
                    }
                }
            }
        }
        None
    }

    /// A set is admissible as a restriction domain when it has no
    /// eventually constant member that the sweep can find.
    pub fn is_admissible(&self) -> bool {
        self.eventually_constant_member().is_none()
    }
}

/// Does some tail of `x` read `pattern` repeated forever, phase-aligned to
/// the start of the pattern?
fn tail_matches(x: &Point, pattern: &Word) -> bool {
    if pattern.is_empty() {
        return false;
    }
    let pre = x.prefix().len();
    let per = x.period().len();
    // offsets congruent modulo per*|pattern| past the prefix read identical
    // comparisons, so checking offsets below pre + per*|pattern| is enough;
    // agreement over one full common period past the offset closes the pin
    let bound = pre + per * pattern.len();
    let window = per * pattern.len() + bound;
    (0..=bound).any(|n| (0..window).all(|i| x.bit(n + i) == pattern.bits()[i % pattern.len()]))
}

/// The sibling antichain of `x`: for every depth `k`, the word that follows
/// `x` for `k` steps and then takes the other branch.
pub fn phi_map(x: &Point) -> IndexSet {
    IndexSet::BranchSiblings {
        point: x.clone(),
        select: SiblingSelect::All,
    }
}

/// The sibling antichain pushed into the split family's index space: every
/// sibling word code is multiplied by four, landing on the strand whose
/// functions step up at the word followed by zeros.
pub fn h_image(x: &Point) -> IndexSet {
    IndexSet::Affine {
        inner: Box::new(phi_map(x)),
        mul: 4,
        add: 0,
    }
}

/// Recover the first `len` bits of the point whose image a set is: the
/// sibling at depth `k` pins bit `k` to the opposite of its own last letter.
pub fn recovered_prefix(image: &IndexSet, len: usize) -> Result<Word> {
    let codes = image.enumerate(len)?;
    let mut bits: Vec<bool> = Vec::with_capacity(codes.len());
    for (k, code) in codes.iter().enumerate() {
        if code % 4 != 0 {
            return Err(Error::InvalidInput(format!(
                "code {code} does not sit on the step-up strand"
            )));
        }
        let w = word_from_code(code / 4);
        if w.len() != k + 1 {
            return Err(Error::InvalidInput(format!(
                "sibling at depth {k} has length {}, want {}",
                w.len(),
                k + 1
            )));
        }
        if w.bits()[..k] != bits[..] {
            return Err(Error::InvalidInput(format!(
                "sibling at depth {k} does not extend the recovered branch"
            )));
        }
        bits.push(!w.bits()[k]);
    }
    Ok(Word::from_bits(bits))
}

/// A dense family together with the domain its functions are restricted to.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RestrictedFamily {
    pub seq: DenseSequence,
    pub set: DecidablePointSet,
}

/// Restrict a family to a domain.  The domain must not contain eventually
/// constant points; when the sweep finds one the restriction is refused.
pub fn restrict_family(seq: &DenseSequence, set: &DecidablePointSet) -> Result<RestrictedFamily> {
    if let Some(p) = set.eventually_constant_member() {
        return Err(Error::InvalidInput(format!(
            "the domain contains the eventually constant point {p}"
        )));
    }
    Ok(RestrictedFamily {
        seq: seq.clone(),
        set: set.clone(),
    })
}

/// Decide convergence of a restricted family over an index set.
///
/// Convergence on the whole space restricts to convergence on the domain.
/// A divergence certificate survives when its witness lies in the domain;
/// otherwise the two certified strands still converge separately, so the
/// restricted family diverges exactly where their limits disagree inside
/// the domain — and those disagreement points must be isolated for the
/// comparison to settle the question.
pub fn decide_restricted(fam: &RestrictedFamily, codes: &IndexSet) -> Result<Verdict> {
    let full = decide_convergence(&fam.seq, codes)?;
    let Verdict::Diverges {
        witness,
        sub_lo,
        sub_hi,
        gap,
    } = full
    else {
        return Ok(full);
    };
    if fam.set.contains(&witness) {
        return Ok(Verdict::Diverges {
            witness,
            sub_lo,
            sub_hi,
            gap,
        });
    }
    // comparing the strand limits only settles the restricted question if
    // the two strands jointly exhaust the family
    let window = codes.enumerate(48)?;
    if window.iter().any(|n| !sub_lo.contains(*n) && !sub_hi.contains(*n)) {
        return Err(Error::UndecidablePresentation(
            "the divergence certificate does not exhaust the family".into(),
        ));
    }
    let lo_limit = strand_limit(&fam.seq, &sub_lo)?;
    let hi_limit = strand_limit(&fam.seq, &sub_hi)?;
    let diff = diff_region(&hi_limit, &lo_limit, ratio(0, 1));
    for z in isolated_points(&diff)? {
        if fam.set.contains(&z) {
            let d = hi_limit.eval(&z) - lo_limit.eval(&z);
            let sep = if d < ratio(0, 1) { -d } else { d };
            return Ok(Verdict::Diverges {
                witness: z,
                sub_lo,
                sub_hi,
                gap: sep * ratio(3, 4),
            });
        }
    }
    Ok(Verdict::Converges { limit: hi_limit })
}

fn strand_limit(seq: &DenseSequence, sub: &IndexSet) -> Result<SymbolicFn> {
    match decide_convergence(seq, sub)? {
        Verdict::Converges { limit } => Ok(limit),
        Verdict::Diverges { .. } => Err(Error::UndecidablePresentation(
            "a certificate strand diverges on its own".into(),
        )),
    }
}

/// The points of a region, provided it consists of isolated points only.
fn isolated_points(region: &Region) -> Result<Vec<Point>> {
    let mut out = BTreeSet::new();
    for iv in &region.intervals {
        if iv.is_empty() {
            continue;
        }
        if iv.lo == iv.hi && !iv.lo_strict && !iv.hi_strict {
            out.insert(iv.lo.clone());
        } else {
            return Err(Error::UndecidablePresentation(
                "the strand limits differ on more than isolated points".into(),
            ));
        }
    }
    Ok(out.into_iter().collect())
}

/// Check the membership/convergence exchange for one point and one domain:
/// `x` lies outside the domain exactly when the split family, restricted to
/// the domain and indexed along the sibling image of `x`, converges.
/// Returns `true` when the exchange holds; `false` flags a defect.
pub fn verify_p1(x: &Point, set: &DecidablePointSet) -> Result<bool> {
    let fam = restrict_family(&DenseSequence::SplitCantorCanonical, set)?;
    let verdict = decide_restricted(&fam, &h_image(x))?;
    Ok(!set.contains(x) == verdict.is_convergent())
}

/// How glued tree nodes are coded into family indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PsiCoding {
    /// Nodes keep their embedded word codes; injective by construction.
    HBased,
    /// Embedded word codes pushed through `mul * h + add`.
    AffineH { mul: u64, add: u64 },
    /// An explicit finite list of `(node path, index)` pairs.
    Table { pairs: Vec<(Vec<u64>, u64)> },
}

/// Glue a tree onto a well-founded infinite base and return the coded index
/// set of the union's nodes.  Over the node-indicator family this makes
/// well-foundedness of `tree` equivalent to convergence: the base keeps the
/// index set infinite without adding any infinite branch.
pub fn psi_glue(tree: &TreeSchema, base: &TreeSchema, coding: &PsiCoding) -> Result<IndexSet> {
    if !base.is_wellfounded() {
        return Err(Error::NotWellFounded(
            "the glued base tree must be well-founded".into(),
        ));
    }
    if !base.is_infinite() {
        return Err(Error::InvalidInput(
            "the glued base tree must be infinite".into(),
        ));
    }
    match coding {
        PsiCoding::HBased => Ok(union_nodes(tree, base)),
        PsiCoding::AffineH { mul, add } => {
            if *mul == 0 {
                return Err(Error::NotInjective(
                    "a zero multiplier collapses every index".into(),
                ));
            }
            Ok(IndexSet::Affine {
                inner: Box::new(union_nodes(tree, base)),
                mul: *mul,
                add: *add,
            })
        }
        PsiCoding::Table { pairs } => {
            let mut keys = BTreeSet::new();
            let mut values = BTreeSet::new();
            for (path, index) in pairs {
                if !keys.insert(path.clone()) {
                    return Err(Error::InvalidInput(format!(
                        "the coding lists the node {path:?} twice"
                    )));
                }
                if !values.insert(*index) {
                    return Err(Error::NotInjective(format!(
                        "the coding repeats the index {index}"
                    )));
                }
            }
            Err(Error::InvalidInput(
                "a finite table cannot code the infinite glued base".into(),
            ))
        }
    }
}

fn union_nodes(tree: &TreeSchema, base: &TreeSchema) -> IndexSet {
    IndexSet::Union {
        parts: vec![
            IndexSet::NodeSet { tree: tree.clone() },
            IndexSet::NodeSet { tree: base.clone() },
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cantor::word_code;

    fn wd(s: &str) -> Word {
        Word::from_bits(s.chars().map(|c| c == '1'))
    }

    fn pt(prefix: &str, period: &str) -> Point {
        Point::new(wd(prefix), wd(period)).expect("nonempty period")
    }

    fn antichain() -> TreeSchema {
        TreeSchema::OmegaJoin {
            rule: crate::trees::OmegaRule::Constant {
                child: Box::new(TreeSchema::Single),
            },
        }
    }

    fn no_constant_tails() -> DecidablePointSet {
        DecidablePointSet::Not {
            inner: Box::new(DecidablePointSet::EventuallyConstant),
        }
    }

    #[test]
    fn sibling_images_step_through_flipped_prefixes() {
        let phi = phi_map(&Point::zeros());
        let codes = phi.enumerate(4).unwrap();
        let expect: Vec<u64> = ["1", "01", "001", "0001"]
            .iter()
            .map(|s| word_code(&wd(s)).unwrap())
            .collect();
        assert_eq!(codes, expect);

        let phi = phi_map(&Point::ones());
        let codes = phi.enumerate(3).unwrap();
        let expect: Vec<u64> = ["0", "10", "110"]
            .iter()
            .map(|s| word_code(&wd(s)).unwrap())
            .collect();
        assert_eq!(codes, expect);
    }

    #[test]
    fn sibling_words_form_an_antichain_off_the_branch() {
        let x = pt("0", "011");
        let words: Vec<Word> = phi_map(&x)
            .enumerate(8)
            .unwrap()
            .into_iter()
            .map(word_from_code)
            .collect();
        for (k, w) in words.iter().enumerate() {
            assert_eq!(w.len(), k + 1);
            assert!(!x.starts_with(w), "sibling {w} lies on the branch of {x}");
        }
        for a in &words {
            for b in &words {
                if a != b {
                    assert!(!a.is_prefix_of(b), "{a} extends into {b}");
                }
            }
        }
    }

    #[test]
    fn image_codes_begin_eight_sixteen_thirty_two() {
        let image = h_image(&Point::zeros());
        assert_eq!(image.enumerate(4).unwrap(), vec![8, 16, 32, 64]);

        let image = h_image(&pt("", "01"));
        let codes = image.enumerate(6).unwrap();
        assert!(codes.iter().all(|c| c % 4 == 0));
        assert!(codes.windows(2).all(|p| p[0] < p[1]));
    }

    #[test]
    fn image_round_trip_recovers_the_branch() {
        for x in [
            Point::zeros(),
            Point::ones(),
            pt("", "01"),
            pt("110", "10"),
            pt("0100", "011"),
        ] {
            let got = recovered_prefix(&h_image(&x), 8).unwrap();
            assert_eq!(got, x.prefix_word(8), "round trip through the image of {x}");
        }
    }

    #[test]
    fn images_of_distinct_points_differ() {
        let points = [Point::zeros(), Point::ones(), pt("", "01"), pt("1", "01")];
        for a in &points {
            for b in &points {
                let same = a == b;
                let codes_a = h_image(a).enumerate(8).unwrap();
                let codes_b = h_image(b).enumerate(8).unwrap();
                assert_eq!(codes_a == codes_b, same);
            }
        }
    }

    #[test]
    fn constant_tail_membership_is_decided() {
        let ec = DecidablePointSet::EventuallyConstant;
        assert!(ec.contains(&Point::zeros()));
        assert!(ec.contains(&pt("0110", "1")));
        assert!(!ec.contains(&pt("", "01")));

        let pat = DecidablePointSet::TailPattern { pattern: wd("01") };
        assert!(pat.contains(&pt("", "01")));
        assert!(pat.contains(&pt("111", "01")));
        // 1(10)* carries 01 repeated from offset two
        assert!(pat.contains(&pt("1", "10")), "phase shifts are absorbed");
        assert!(!pat.contains(&Point::zeros()));
    }

    #[test]
    fn admissibility_finds_constant_tails() {
        let full = DecidablePointSet::Clopen {
            set: ClopenSet::full(),
        };
        assert_eq!(full.eventually_constant_member(), Some(Point::zeros()));

        let cyl = DecidablePointSet::Clopen {
            set: ClopenSet::cylinder(wd("01")),
        };
        let found = cyl.eventually_constant_member().unwrap();
        assert!(cyl.contains(&found));

        let empty = DecidablePointSet::Clopen {
            set: ClopenSet::empty(),
        };
        assert!(empty.is_admissible());

        assert!(no_constant_tails().is_admissible());
        let singleton = DecidablePointSet::Interval {
            interval: LexInterval::singleton(pt("", "01")),
        };
        assert!(singleton.is_admissible());
        let closed = DecidablePointSet::Interval {
            interval: LexInterval::closed(pt("", "01"), pt("", "10")),
        };
        let found = closed.eventually_constant_member().unwrap();
        assert!(closed.contains(&found));
        assert!(found.is_eventually_zero() || found.is_eventually_one());
    }

    #[test]
    fn restriction_rejects_domains_with_constant_tails() {
        let seq = DenseSequence::SplitCantorCanonical;
        for bad in [
            DecidablePointSet::Clopen {
                set: ClopenSet::full(),
            },
            DecidablePointSet::Clopen {
                set: ClopenSet::cylinder(wd("01")),
            },
            DecidablePointSet::EventuallyConstant,
        ] {
            assert!(matches!(
                restrict_family(&seq, &bad),
                Err(Error::InvalidInput(_))
            ));
        }
        for good in [
            no_constant_tails(),
            DecidablePointSet::Interval {
                interval: LexInterval::singleton(pt("", "01")),
            },
            DecidablePointSet::Or { parts: vec![] },
        ] {
            assert!(restrict_family(&seq, &good).is_ok());
        }
    }

    #[test]
    fn restricted_verdicts_follow_domain_membership() {
        let seq = DenseSequence::SplitCantorCanonical;
        let x = pt("", "01");

        // domain holding the witness: the divergence certificate survives
        let inside = DecidablePointSet::Interval {
            interval: LexInterval::singleton(x.clone()),
        };
        let fam = restrict_family(&seq, &inside).unwrap();
        match decide_restricted(&fam, &h_image(&x)).unwrap() {
            Verdict::Diverges { witness, .. } => assert_eq!(witness, x),
            v => panic!("want divergence at {x}, got {v:?}"),
        }

        // domain avoiding the witness: the strand limits agree there
        let outside = DecidablePointSet::And {
            parts: vec![
                no_constant_tails(),
                DecidablePointSet::Not {
                    inner: Box::new(inside.clone()),
                },
            ],
        };
        let fam = restrict_family(&seq, &outside).unwrap();
        match decide_restricted(&fam, &h_image(&x)).unwrap() {
            Verdict::Converges { limit } => match limit {
                SymbolicFn::PlusStep { point } | SymbolicFn::MinusStep { point } => {
                    assert_eq!(point, x)
                }
                other => panic!("want a step at {x}, got {other:?}"),
            },
            v => panic!("want convergence off {x}, got {v:?}"),
        }
    }

    #[test]
    fn restriction_keeps_unrelated_divergences() {
        // the domain misses the witness but contains no disagreement point
        // of the strand limits, so the restricted family converges
        let seq = DenseSequence::SplitCantorCanonical;
        let x = pt("", "01");
        let far = DecidablePointSet::And {
            parts: vec![
                no_constant_tails(),
                DecidablePointSet::Interval {
                    interval: LexInterval::cylinder(&wd("10")),
                },
            ],
        };
        let fam = restrict_family(&seq, &far).unwrap();
        let verdict = decide_restricted(&fam, &h_image(&x)).unwrap();
        assert!(verdict.is_convergent(), "no disagreement point in [10]");
    }

    #[test]
    fn exchange_holds_for_eventually_periodic_points() {
        // two-sided point inside the domain: family diverges there
        assert!(verify_p1(&pt("", "01"), &no_constant_tails()).unwrap());
        // two-sided point outside a singleton domain elsewhere
        let elsewhere = DecidablePointSet::Interval {
            interval: LexInterval::singleton(pt("", "10")),
        };
        assert!(verify_p1(&pt("", "01"), &elsewhere).unwrap());
        // eventually constant points never lie in an admissible domain and
        // their sibling families converge outright
        assert!(verify_p1(&Point::zeros(), &no_constant_tails()).unwrap());
        assert!(verify_p1(&Point::ones(), &elsewhere).unwrap());
        assert!(verify_p1(&pt("0110", "0"), &no_constant_tails()).unwrap());
    }

    #[test]
    fn gluing_requires_a_sound_base() {
        let t = antichain();
        assert!(matches!(
            psi_glue(&t, &TreeSchema::FullBranch, &PsiCoding::HBased),
            Err(Error::NotWellFounded(_))
        ));
        assert!(matches!(
            psi_glue(&t, &TreeSchema::Chain { len: 3 }, &PsiCoding::HBased),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            psi_glue(&t, &antichain(), &PsiCoding::AffineH { mul: 0, add: 5 }),
            Err(Error::NotInjective(_))
        ));
        let dup_value = PsiCoding::Table {
            pairs: vec![(vec![], 7), (vec![0], 7)],
        };
        assert!(matches!(
            psi_glue(&t, &antichain(), &dup_value),
            Err(Error::NotInjective(_))
        ));
        let dup_key = PsiCoding::Table {
            pairs: vec![(vec![0], 1), (vec![0], 2)],
        };
        assert!(matches!(
            psi_glue(&t, &antichain(), &dup_key),
            Err(Error::InvalidInput(_))
        ));
        let fine_but_finite = PsiCoding::Table {
            pairs: vec![(vec![], 0), (vec![0], 1)],
        };
        assert!(matches!(
            psi_glue(&t, &antichain(), &fine_but_finite),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn glued_wellfounded_trees_stay_convergent() {
        let seq = DenseSequence::NodeIndicatorsByH;
        let base = antichain();

        // gluing a tree onto itself changes nothing
        let same = psi_glue(&base, &base, &PsiCoding::HBased).unwrap();
        let direct = decide_convergence(&seq, &IndexSet::NodeSet { tree: base.clone() }).unwrap();
        assert_eq!(decide_convergence(&seq, &same).unwrap(), direct);

        // a finite subtree disappears into the base
        let small = psi_glue(&TreeSchema::Single, &base, &PsiCoding::HBased).unwrap();
        assert_eq!(decide_convergence(&seq, &small).unwrap(), direct);
        assert!(direct.is_convergent());
    }

    #[test]
    fn gluing_an_escaping_branch_forces_divergence() {
        let seq = DenseSequence::NodeIndicatorsByH;
        let glued = psi_glue(&TreeSchema::FullBranch, &antichain(), &PsiCoding::HBased).unwrap();
        let verdict = decide_convergence(&seq, &glued).unwrap();
        assert!(!verdict.is_convergent());
        assert!(!crate::convergence::decide_convergence_to(
            &seq,
            &glued,
            &SymbolicFn::Zero
        )
        .unwrap());
    }

    #[test]
    fn affine_codings_shift_the_index_set() {
        let base = antichain();
        let glued = psi_glue(&base, &base, &PsiCoding::AffineH { mul: 4, add: 0 }).unwrap();
        let IndexSet::Affine { inner, mul, add } = &glued else {
            panic!("want an affine wrapper, got {glued:?}");
        };
        assert_eq!((*mul, *add), (4, 0));
        // root and first child of the antichain sit at codes 0 and 2
        assert!(inner.contains(0) && inner.contains(2));
        assert!(glued.contains(0) && glued.contains(8));
        assert!(!glued.contains(2));
    }

    #[test]
    fn verdicts_respect_the_wellfoundedness_bridge() {
        let seq = DenseSequence::NodeIndicatorsByH;
        let base = antichain();
        let cases = [
            (TreeSchema::Chain { len: 4 }, true),
            (antichain(), true),
            (TreeSchema::FullBranch, false),
            (
                TreeSchema::Join {
                    children: vec![TreeSchema::FullBranch, TreeSchema::Chain { len: 2 }],
                },
                false,
            ),
        ];
        for (tree, wellfounded) in cases {
            assert_eq!(tree.is_wellfounded(), wellfounded);
            let glued = psi_glue(&tree, &base, &PsiCoding::HBased).unwrap();
            let converges =
                crate::convergence::decide_convergence_to(&seq, &glued, &SymbolicFn::Zero)
                    .unwrap();
            assert_eq!(converges, wellfounded, "bridge fails for {tree:?}");
        }
    }

    #[test]
    fn isolated_point_extraction_guards_fat_regions() {
        let fat = Region {
            intervals: vec![LexInterval::cylinder(&wd("0"))],
        };
        assert!(isolated_points(&fat).is_err());
        let thin = Region {
            intervals: vec![
                LexInterval::singleton(pt("", "01")),
                LexInterval::singleton(pt("", "10")),
            ],
        };
        assert_eq!(isolated_points(&thin).unwrap().len(), 2);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn small_word(max: usize) -> impl Strategy<Value = Word> {
            prop::collection::vec(any::<bool>(), 0..=max).prop_map(Word::from_bits)
        }

        fn small_point() -> impl Strategy<Value = Point> {
            (small_word(3), prop::collection::vec(any::<bool>(), 1..=3)).prop_map(
                |(prefix, period)| {
                    Point::new(prefix, Word::from_bits(period)).expect("nonempty period")
                },
            )
        }

        proptest! {
            #[test]
            fn prop_sibling_images_are_antichains_off_the_branch(x in small_point()) {
                let words: Vec<Word> = phi_map(&x)
                    .enumerate(8)
                    .unwrap()
                    .into_iter()
                    .map(word_from_code)
                    .collect();
                for (k, w) in words.iter().enumerate() {
                    prop_assert_eq!(w.len(), k + 1);
                    prop_assert!(!x.starts_with(w));
                }
                for a in &words {
                    for b in &words {
                        if a != b {
                            prop_assert!(!a.is_prefix_of(b));
                        }
                    }
                }
                let got = recovered_prefix(&h_image(&x), 8).unwrap();
                prop_assert_eq!(got, x.prefix_word(8));
            }

            #[test]
            fn prop_exchange_holds_on_admissible_domains(
                x in small_point(),
                w in small_word(3),
                pattern in prop::collection::vec(any::<bool>(), 1..=3),
                pick in 0usize..4,
            ) {
                let atom = match pick {
                    0 => DecidablePointSet::Interval { interval: LexInterval::cylinder(&w) },
                    1 => DecidablePointSet::Interval {
                        interval: LexInterval::singleton(Point::from_word_tail(w.clone(), true)),
                    },
                    2 => DecidablePointSet::TailPattern { pattern: Word::from_bits(pattern) },
                    _ => DecidablePointSet::Or { parts: vec![] },
                };
                let set = DecidablePointSet::And {
                    parts: vec![super::no_constant_tails(), atom],
                };
                prop_assume!(set.is_admissible());
                prop_assert!(verify_p1(&x, &set).unwrap());
            }
        }
    }
}
