//! Seeded instance generators and fixed corpora for the test suites.
//!
//! Everything random flows from one ChaCha stream, so a seed pins the whole
//! corpus: trees, schemas, presentations, points, and restriction domains.
//! The fixed corpora collect (family, index set) pairs with known verdicts
//! that exercise every index-set shape the deciders support.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::cantor::{ClopenSet, IndexSet, Point, SiblingSelect, Word};
use crate::catalog::{DenseSequence, LexInterval, SymbolicFn};
use crate::rank::{
    materialize_copy, Attachment, AttachmentValues, CompactPresentation, FnOnCompact, TowerTop,
};
use crate::reductions::{h_image, DecidablePointSet};
use crate::trees::{FinTree, OmegaRule, TreeSchema};
use crate::ratio;

/// The one stream every suite draws from.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A random prefix-closed finite tree with up to `max_nodes` nodes, grown by
/// attaching children with small letters to random existing nodes.
pub fn random_fintree(rng: &mut ChaCha8Rng, max_nodes: usize) -> FinTree {
    let want = rng.gen_range(1..=max_nodes.max(1));
    let mut paths: Vec<Vec<u64>> = vec![vec![]];
    let mut tries = 0;
    while paths.len() < want && tries < 8 * want {
        tries += 1;
        let mut child = paths[rng.gen_range(0..paths.len())].clone();
        child.push(rng.gen_range(0..4u64));
        if !paths.contains(&child) {
            paths.push(child);
        }
    }
    FinTree::from_paths(paths)
}

/// Every ordered tree with up to `max_nodes` nodes, children labeled
/// `0, 1, …` left to right, plus the empty tree.  Rank and monotone-map
/// behaviour only depend on this shape, so the list is exhaustive for
/// shape-level claims.
pub fn canonical_trees(max_nodes: usize) -> Vec<FinTree> {
    let mut out = vec![FinTree::from_paths(Vec::<Vec<u64>>::new())];
    for n in 1..=max_nodes {
        for paths in tree_paths(n) {
            out.push(FinTree::from_paths(paths));
        }
    }
    out
}

/// All ordered trees with exactly `n` nodes, as full path lists.
fn tree_paths(n: usize) -> Vec<Vec<Vec<u64>>> {
    assert!(n >= 1);
    forest_paths(n - 1)
        .into_iter()
        .map(|forest| {
            let mut paths = vec![vec![]];
            paths.extend(forest);
            paths
        })
        .collect()
}

/// All ordered forests with `n` nodes total; each forest is the flattened
/// path list of its trees, the leading letter being the tree's position.
fn forest_paths(n: usize) -> Vec<Vec<Vec<u64>>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for first in 1..=n {
        for tree in tree_paths(first) {
            for rest in forest_paths(n - first) {
                let mut paths: Vec<Vec<u64>> = tree
                    .iter()
                    .map(|p| {
                        let mut q = vec![0u64];
                        q.extend(p);
                        q
                    })
                    .collect();
                for p in &rest {
                    let mut q = p.clone();
                    q[0] += 1;
                    paths.push(q);
                }
                out.push(paths);
            }
        }
    }
    out
}

pub fn antichain_schema() -> TreeSchema {
    TreeSchema::OmegaJoin {
        rule: OmegaRule::Constant {
            child: Box::new(TreeSchema::Single),
        },
    }
}

/// Growing chains: rank ω + 1.
pub fn fan_schema() -> TreeSchema {
    TreeSchema::OmegaJoin {
        rule: OmegaRule::AffineChain { mul: 1, add: 1 },
    }
}

/// A fan of fans: rank ω·2 + 1.
pub fn stacked_schema() -> TreeSchema {
    TreeSchema::OmegaJoin {
        rule: OmegaRule::Nested {
            mul: 1,
            add: 0,
            core: Box::new(fan_schema()),
        },
    }
}

/// Well-founded schemas spanning ranks up to ω·2 + 1; the random pool in
/// [`random_wf_schema`] is seeded alongside these fixed tall ones.
pub fn tall_wf_schemas() -> Vec<TreeSchema> {
    vec![
        antichain_schema(),
        fan_schema(),
        stacked_schema(),
        TreeSchema::OmegaJoin {
            rule: OmegaRule::Nested {
                mul: 0,
                add: 3,
                core: Box::new(TreeSchema::Single),
            },
        },
        TreeSchema::Join {
            children: vec![antichain_schema(), fan_schema()],
        },
    ]
}

/// A random well-founded schema, forced infinite (finite draws get an
/// antichain joined on, since convergence questions need infinite index
/// sets).
pub fn random_wf_schema(rng: &mut ChaCha8Rng) -> TreeSchema {
    let core = wf_core(rng, 2);
    debug_assert!(core.is_wellfounded());
    if core.is_infinite() {
        core
    } else {
        TreeSchema::Join {
            children: vec![core, antichain_schema()],
        }
    }
}

fn wf_core(rng: &mut ChaCha8Rng, depth: usize) -> TreeSchema {
    if depth == 0 {
        return match rng.gen_range(0..3) {
            0 => TreeSchema::Single,
            1 => TreeSchema::chain(rng.gen_range(1..=4)),
            _ => antichain_schema(),
        };
    }
    match rng.gen_range(0..5) {
        0 => TreeSchema::chain(rng.gen_range(1..=4)),
        1 => {
            let children = (0..rng.gen_range(1..=3))
                .map(|_| wf_core(rng, depth - 1))
                .collect();
            TreeSchema::Join { children }
        }
        2 => TreeSchema::OmegaJoin {
            rule: OmegaRule::Constant {
                child: Box::new(wf_core(rng, depth - 1)),
            },
        },
        3 => TreeSchema::OmegaJoin {
            rule: OmegaRule::AffineChain {
                mul: rng.gen_range(0..=2),
                add: rng.gen_range(1..=3),
            },
        },
        _ => TreeSchema::OmegaJoin {
            rule: OmegaRule::Nested {
                mul: rng.gen_range(0..=1),
                add: rng.gen_range(1..=2),
                core: Box::new(wf_core(rng, depth - 1)),
            },
        },
    }
}

/// A random schema with an escaping branch somewhere.
pub fn random_ill_schema(rng: &mut ChaCha8Rng) -> TreeSchema {
    let schema = match rng.gen_range(0..4) {
        0 => TreeSchema::FullBranch,
        1 => TreeSchema::Join {
            children: vec![wf_core(rng, 1), TreeSchema::FullBranch],
        },
        2 => TreeSchema::Join {
            children: vec![TreeSchema::FullBranch, wf_core(rng, 1)],
        },
        _ => TreeSchema::OmegaJoin {
            rule: OmegaRule::Nested {
                mul: rng.gen_range(0..=1),
                add: rng.gen_range(1..=2),
                core: Box::new(TreeSchema::FullBranch),
            },
        },
    };
    debug_assert!(!schema.is_wellfounded());
    schema
}

/// A random presentation with matching values over thresholds (1/3, 2/3).
/// Values sit below, between, or above the thresholds; towers only appear
/// when allowed, since they have no finite faithful sample.
pub fn random_presentation(
    rng: &mut ChaCha8Rng,
    depth: usize,
    allow_towers: bool,
) -> (CompactPresentation, FnOnCompact) {
    let vals = [ratio(0, 1), ratio(1, 2), ratio(1, 1)];
    let value = vals[rng.gen_range(0..vals.len())];
    if depth == 0 || rng.gen_bool(0.3) {
        return (CompactPresentation::Leaf, FnOnCompact::Leaf { value });
    }
    let count = rng.gen_range(1..=2);
    let mut attachments = Vec::with_capacity(count);
    let mut att_values = Vec::with_capacity(count);
    for _ in 0..count {
        let top = if allow_towers { 3 } else { 2 };
        match rng.gen_range(0..top) {
            0 => {
                let (cs, cv) = random_presentation(rng, depth - 1, allow_towers);
                attachments.push(Attachment::Constant { child: Box::new(cs) });
                att_values.push(AttachmentValues::Constant { child: Box::new(cv) });
            }
            1 => {
                let (es, ev) = random_presentation(rng, depth - 1, allow_towers);
                let (os, ov) = random_presentation(rng, depth - 1, allow_towers);
                attachments.push(Attachment::Alternating {
                    even: Box::new(es),
                    odd: Box::new(os),
                });
                att_values.push(AttachmentValues::Alternating {
                    even: Box::new(ev),
                    odd: Box::new(ov),
                });
            }
            _ => {
                let tops = [TowerTop::Low, TowerTop::High, TowerTop::AlternatingParity];
                attachments.push(Attachment::Towers {
                    shift: rng.gen_range(-1..=2),
                });
                att_values.push(AttachmentValues::Towers {
                    low: ratio(0, 1),
                    high: ratio(1, 1),
                    top: tops[rng.gen_range(0..tops.len())],
                });
            }
        }
    }
    (
        CompactPresentation::Apex { attachments },
        FnOnCompact::Apex {
            value,
            attachments: att_values,
        },
    )
}

/// A random point of the presented set: either the apex itself or a point
/// found by descending into a materialized copy along the spine coding.
pub fn presentation_point(
    rng: &mut ChaCha8Rng,
    shape: &CompactPresentation,
    values: &FnOnCompact,
) -> Option<Point> {
    match (shape, values) {
        (CompactPresentation::Empty, _) => None,
        (CompactPresentation::Leaf, _) => Some(Point::ones()),
        (
            CompactPresentation::Apex { attachments },
            FnOnCompact::Apex {
                attachments: att_values,
                ..
            },
        ) => {
            if attachments.is_empty() || rng.gen_bool(0.34) {
                return Some(Point::ones());
            }
            let l = attachments.len();
            // tower copies can be empty at small indices; retry a few times
            for _ in 0..6 {
                let k = rng.gen_range(0..l);
                let n = rng.gen_range(0..3u64);
                let Ok((cs, cv)) = materialize_copy(&attachments[k], &att_values[k], n) else {
                    continue;
                };
                if let Some(sub) = presentation_point(rng, &cs, &cv) {
                    let spine = k + (n as usize) * l;
                    let mut w = Word::from_bits(std::iter::repeat(true).take(spine));
                    w.push(false);
                    return Some(sub.with_prefix(&w));
                }
            }
            Some(Point::ones())
        }
        _ => None,
    }
}

/// A random eventually periodic point with bounded description.
pub fn random_point(rng: &mut ChaCha8Rng, max_prefix: usize, max_period: usize) -> Point {
    let plen = rng.gen_range(0..=max_prefix);
    let prefix = Word::from_bits((0..plen).map(|_| rng.gen_bool(0.5)));
    let qlen = rng.gen_range(1..=max_period.max(1));
    let period = Word::from_bits((0..qlen).map(|_| rng.gen_bool(0.5)));
    Point::new(prefix, period).expect("nonempty period")
}

pub fn random_word(rng: &mut ChaCha8Rng, max_len: usize) -> Word {
    let len = rng.gen_range(0..=max_len);
    Word::from_bits((0..len).map(|_| rng.gen_bool(0.5)))
}

fn random_two_sided(rng: &mut ChaCha8Rng) -> Point {
    let periods = ["01", "10", "011", "001", "110", "100"];
    let period = Word::from_bits(
        periods[rng.gen_range(0..periods.len())]
            .chars()
            .map(|c| c == '1'),
    );
    let prefix = random_word(rng, 2);
    Point::new(prefix, period).expect("nonempty period")
}

/// A random restriction domain that passes the admissibility sweep: no
/// eventually constant members.
pub fn random_admissible_domain(rng: &mut ChaCha8Rng) -> DecidablePointSet {
    let not_ec = || DecidablePointSet::Not {
        inner: Box::new(DecidablePointSet::EventuallyConstant),
    };
    loop {
        let candidate = match rng.gen_range(0..6) {
            0 => DecidablePointSet::Clopen {
                set: ClopenSet::empty(),
            },
            1 => not_ec(),
            2 => DecidablePointSet::And {
                parts: vec![
                    not_ec(),
                    DecidablePointSet::Clopen {
                        set: ClopenSet::cylinder(random_word(rng, 3)),
                    },
                ],
            },
            3 => DecidablePointSet::Interval {
                interval: LexInterval::singleton(random_two_sided(rng)),
            },
            4 => DecidablePointSet::And {
                parts: vec![
                    not_ec(),
                    DecidablePointSet::Not {
                        inner: Box::new(DecidablePointSet::Clopen {
                            set: ClopenSet::cylinder(random_word(rng, 3)),
                        }),
                    },
                ],
            },
            _ => DecidablePointSet::TailPattern {
                pattern: random_two_sided(rng).period().clone(),
            },
        };
        if candidate.is_admissible() {
            return candidate;
        }
    }
}

fn pt(prefix: &str, period: &str) -> Point {
    let bits = |s: &str| Word::from_bits(s.chars().map(|c| c == '1'));
    Point::new(bits(prefix), bits(period)).expect("nonempty period")
}

fn nodes(tree: TreeSchema) -> IndexSet {
    IndexSet::NodeSet { tree }
}

/// Families with index sets along which they converge pointwise.
pub fn convergent_corpus() -> Vec<(DenseSequence, IndexSet)> {
    let nih = DenseSequence::NodeIndicatorsByH;
    let split = DenseSequence::SplitCantorCanonical;
    vec![
        (nih.clone(), nodes(antichain_schema())),
        (nih.clone(), nodes(fan_schema())),
        (nih.clone(), nodes(stacked_schema())),
        (nih.clone(), nodes(TreeSchema::FullBranch)),
        (
            nih.clone(),
            IndexSet::BranchNodes { point: pt("", "01") },
        ),
        (
            nih.clone(),
            IndexSet::ExceptFinite {
                inner: Box::new(nodes(antichain_schema())),
                drop: [0u64, 2].into_iter().collect(),
            },
        ),
        (
            nih,
            IndexSet::Restrict {
                inner: Box::new(nodes(antichain_schema())),
                min: 4,
            },
        ),
        (split.clone(), h_image(&Point::zeros())),
        (split.clone(), h_image(&Point::ones())),
        (
            split,
            IndexSet::Affine {
                inner: Box::new(IndexSet::BranchSiblings {
                    point: pt("", "01"),
                    select: SiblingSelect::AtZeroBits,
                }),
                mul: 4,
                add: 0,
            },
        ),
    ]
}

/// Families with index sets along which they diverge somewhere.
pub fn divergent_corpus() -> Vec<(DenseSequence, IndexSet)> {
    let nih = DenseSequence::NodeIndicatorsByH;
    let split = DenseSequence::SplitCantorCanonical;
    vec![
        (
            nih.clone(),
            nodes(TreeSchema::Join {
                children: vec![TreeSchema::FullBranch, TreeSchema::FullBranch],
            }),
        ),
        (
            nih.clone(),
            nodes(TreeSchema::Join {
                children: vec![TreeSchema::FullBranch, antichain_schema()],
            }),
        ),
        (
            nih.clone(),
            IndexSet::Union {
                parts: vec![
                    IndexSet::BranchNodes { point: pt("", "01") },
                    nodes(antichain_schema()),
                ],
            },
        ),
        (
            nih.clone(),
            IndexSet::Union {
                parts: vec![nodes(TreeSchema::FullBranch), nodes(antichain_schema())],
            },
        ),
        (nih, IndexSet::All),
        (split.clone(), h_image(&pt("", "01"))),
        (split.clone(), h_image(&pt("", "10"))),
        (split.clone(), h_image(&pt("1", "011"))),
        (split.clone(), h_image(&pt("00", "01"))),
        (split, IndexSet::All),
    ]
}

/// Every (family, index set) pair the dual-procedure agreement suite runs:
/// both fixed corpora plus a patched-table family.
pub fn convergence_corpus() -> Vec<(DenseSequence, IndexSet)> {
    let mut out = convergent_corpus();
    out.extend(divergent_corpus());
    out.push((
        DenseSequence::FiniteTableWithTail {
            table: vec![SymbolicFn::Zero, SymbolicFn::Const { value: ratio(1, 1) }],
            tail: Box::new(DenseSequence::NodeIndicatorsByH),
        },
        nodes(antichain_schema()),
    ));
    out
}
