//! Trees of separation certificates over shrinking balls.
//!
//! A node pairs a strictly increasing list of catalog indices with a
//! nested, fast-shrinking chain of balls; each coordinate certifies
//! that on its ball the indexed function is uniformly separated — from
//! every point's best match inside a finite block of later indices
//! (block trees), or from a fixed limit function (limit trees). The
//! trees over a given index set are well-founded exactly when the
//! indexed subsequence converges (for block trees) or converges to the
//! given limit (for limit trees), which makes their ordinal ranks a
//! measure of how badly convergence fails to be uniform.
//!
//! Everything here is windowed: the trees are infinite objects, so all
//! operations work on explicitly capped truncations and report
//! cap-relative results.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::cantor::{word_code, word_from_code, Cylinder, IndexSet, Point, Word};
use crate::catalog::{diff_region, region_covers, DenseSequence, Region, SymbolicFn};
use crate::convergence::{decide_convergence, decide_convergence_to, Verdict};
use crate::error::{Error, Result};
use crate::ordinals::Ordinal;
use crate::trees::{FinTree, MonotoneMap};
use crate::{ratio, Rational};

/// The ball with index `n`: the cylinder of the word coded by `n`.
/// Under the metric `2^-(first disagreement)` its diameter is
/// `2^-(word length)`, and closed balls, open balls and cylinders all
/// coincide.
pub fn ball(n: u64) -> Cylinder {
    Cylinder::new(word_from_code(n))
}

/// Whether a list of ball indices is acceptable: each ball contains
/// the next, and the `i`-th ball has diameter at most `1/(i+1)`. The
/// empty list is acceptable, and prefixes of acceptable lists are
/// acceptable.
pub fn acceptable(w: &[u64]) -> bool {
    let mut prev: Option<Word> = None;
    for (i, &l) in w.iter().enumerate() {
        let word = word_from_code(l);
        if let Some(p) = &prev {
            if !p.is_prefix_of(&word) {
                return false;
            }
        }
        // diam [u] = 2^-|u| <= 1/(i+1)  <=>  2^|u| >= i+1
        if (1u128 << word.len()) < i as u128 + 1 {
            return false;
        }
        prev = Some(word);
    }
    true
}

/// Strict order on finite index blocks: `F < G` when `max F < min G`.
/// Empty blocks compare under nothing, so any window containing one is
/// not increasing.
pub fn blocks_increasing(blocks: &[BTreeSet<u64>]) -> bool {
    blocks.windows(2).all(|pair| {
        match (pair[0].iter().next_back(), pair[1].iter().next()) {
            (Some(max0), Some(min1)) => max0 < min1,
            _ => false,
        }
    })
}

/// A node of the block tree: indices `s`, blocks `t` and balls `w` of
/// equal length. Coordinate `i` asserts that every point of ball
/// `w[i]` is separated from `f_{s[i]}` by some member of `t[i]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockNode {
    pub s: Vec<u64>,
    pub t: Vec<BTreeSet<u64>>,
    pub w: Vec<u64>,
}

impl BlockNode {
    pub fn root() -> Self {
        BlockNode {
            s: Vec::new(),
            t: Vec::new(),
            w: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }
}

/// A node of the limit tree: indices `s` and balls `w` of equal
/// length. Coordinate `i` asserts that the whole ball `w[i]` is
/// separated from the limit function.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LimitNode {
    pub s: Vec<u64>,
    pub w: Vec<u64>,
}

impl LimitNode {
    pub fn root() -> Self {
        LimitNode {
            s: Vec::new(),
            w: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }
}

fn strictly_increasing(xs: &[u64]) -> bool {
    xs.windows(2).all(|p| p[0] < p[1])
}

fn check_member(codes: &IndexSet, n: u64, what: &str) -> Result<()> {
    if codes.contains(n) {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!(
            "{what} {n} is not in the index set"
        )))
    }
}

/// The separation threshold of level `d`.
fn separation(d: u64) -> Result<Rational> {
    let den = i64::try_from(d + 1)
        .map_err(|_| Error::Precision("separation level is too large".into()))?;
    Ok(ratio(1, den))
}

fn check_block_shape(codes: &IndexSet, node: &BlockNode) -> Result<()> {
    if node.s.len() != node.t.len() || node.s.len() != node.w.len() {
        return Err(Error::InvalidInput(
            "node components differ in length".into(),
        ));
    }
    if !strictly_increasing(&node.s) {
        return Err(Error::InvalidInput(
            "indices must be strictly increasing".into(),
        ));
    }
    for &n in &node.s {
        check_member(codes, n, "index")?;
    }
    for f in &node.t {
        if f.is_empty() {
            return Err(Error::InvalidInput("blocks must be non-empty".into()));
        }
        for &m in f {
            check_member(codes, m, "block member")?;
        }
    }
    if !blocks_increasing(&node.t) {
        return Err(Error::InvalidInput(
            "blocks must be strictly increasing".into(),
        ));
    }
    Ok(())
}

fn check_limit_shape(codes: &IndexSet, node: &LimitNode) -> Result<()> {
    if node.s.len() != node.w.len() {
        return Err(Error::InvalidInput(
            "node components differ in length".into(),
        ));
    }
    if !strictly_increasing(&node.s) {
        return Err(Error::InvalidInput(
            "indices must be strictly increasing".into(),
        ));
    }
    for &n in &node.s {
        check_member(codes, n, "index")?;
    }
    Ok(())
}

/// Membership of a node in the level-`d` block tree over `codes`.
/// Malformed nodes (length mismatch, non-increasing components, empty
/// blocks, components outside the index set) are errors; a well-formed
/// node is a member when its balls are acceptable and each one is
/// covered by the separation regions of its block.
pub fn block_member(
    seq: &DenseSequence,
    codes: &IndexSet,
    d: u64,
    node: &BlockNode,
) -> Result<bool> {
    check_block_shape(codes, node)?;
    if !acceptable(&node.w) {
        return Ok(false);
    }
    let theta = separation(d)?;
    for i in 0..node.len() {
        let f = seq.fn_at(node.s[i]);
        let regions: Vec<Region> = node.t[i]
            .iter()
            .map(|&m| diff_region(&f, &seq.fn_at(m), theta))
            .collect();
        if !region_covers(&ball(node.w[i]), &regions) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Membership of a node in the level-`d` limit tree over `codes`
/// against the limit `f`: each ball must lie entirely inside the
/// region where its indexed function differs from `f` by more than the
/// level threshold.
pub fn limit_member(
    seq: &DenseSequence,
    codes: &IndexSet,
    f: &SymbolicFn,
    d: u64,
    node: &LimitNode,
) -> Result<bool> {
    check_limit_shape(codes, node)?;
    if !acceptable(&node.w) {
        return Ok(false);
    }
    let theta = separation(d)?;
    for i in 0..node.len() {
        let region = diff_region(&seq.fn_at(node.s[i]), f, theta);
        if !region_covers(&ball(node.w[i]), &[region]) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Membership in the glued block tree, whose nodes carry their level
/// in the leading coordinates: `s` starts with `d`, `t` with the
/// singleton `{d}` and `w` with `d`; the remainder must belong to the
/// level-`d` tree. The empty node is the root.
pub fn glued_block_member(
    seq: &DenseSequence,
    codes: &IndexSet,
    node: &BlockNode,
) -> Result<bool> {
    if node.is_empty() && node.t.is_empty() && node.w.is_empty() {
        return Ok(true);
    }
    if node.s.is_empty() || node.t.is_empty() || node.w.is_empty() {
        return Err(Error::InvalidInput(
            "node components differ in length".into(),
        ));
    }
    let d = node.s[0];
    if node.t[0] != BTreeSet::from([d]) || node.w[0] != d {
        return Err(Error::InvalidInput(
            "glued node leads disagree on the level".into(),
        ));
    }
    let inner = BlockNode {
        s: node.s[1..].to_vec(),
        t: node.t[1..].to_vec(),
        w: node.w[1..].to_vec(),
    };
    block_member(seq, codes, d, &inner)
}

/// Glued limit-tree membership: `s` and `w` both start with the level.
pub fn glued_limit_member(
    seq: &DenseSequence,
    codes: &IndexSet,
    f: &SymbolicFn,
    node: &LimitNode,
) -> Result<bool> {
    if node.is_empty() && node.w.is_empty() {
        return Ok(true);
    }
    if node.s.is_empty() || node.w.is_empty() {
        return Err(Error::InvalidInput(
            "node components differ in length".into(),
        ));
    }
    let d = node.s[0];
    if node.w[0] != d {
        return Err(Error::InvalidInput(
            "glued node leads disagree on the level".into(),
        ));
    }
    let inner = LimitNode {
        s: node.s[1..].to_vec(),
        w: node.w[1..].to_vec(),
    };
    limit_member(seq, codes, f, d, &inner)
}

/// Which certificate tree to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TreeKind {
    Block,
    Limit,
}

/// Finite windows bounding a truncation. The trees are infinite, so
/// every finite claim names its window: which leading indices feed the
/// nodes, which blocks are available, how long ball words may get, and
/// how many nodes the build may accept before giving up.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationCaps {
    /// Number of leading index-set elements available for `s` and for
    /// the singleton blocks.
    pub index_count: usize,
    /// Longest ball word considered.
    pub max_ball_word: usize,
    /// Blocks available beyond the singletons of the leading indices.
    pub extra_blocks: Vec<BTreeSet<u64>>,
    /// Hard bound on the number of accepted nodes.
    pub node_budget: usize,
}

impl Default for TruncationCaps {
    fn default() -> Self {
        TruncationCaps {
            index_count: 16,
            max_ball_word: 8,
            extra_blocks: Vec::new(),
            node_budget: 100_000,
        }
    }
}

impl TruncationCaps {
    /// Doubles the index window (and scales the budget to match) while
    /// keeping the ball universe fixed.  Convergent families separate at
    /// bounded resolution, so their chains stop deepening once the index
    /// pool saturates that resolution; widening the pool further leaves
    /// the truncation height alone.  Growing the ball universe instead
    /// would let chains refine forever even for convergent families.
    pub fn doubled(&self) -> Self {
        TruncationCaps {
            index_count: self.index_count * 2,
            max_ball_word: self.max_ball_word,
            extra_blocks: self.extra_blocks.clone(),
            node_budget: self.node_budget.saturating_mul(4),
        }
    }
}

/// One letter of a truncated tree: the components a node appends.
/// `block` is present for block trees and absent for limit trees.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Extension {
    pub index: u64,
    pub block: Option<BTreeSet<u64>>,
    pub ball: u64,
}

/// A finite window onto a certificate tree: the tree over legend
/// positions plus the legend decoding each letter.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncatedTree {
    pub tree: FinTree,
    pub legend: Vec<Extension>,
}

impl TruncatedTree {
    /// Decodes a tree path back into node components.
    pub fn decode(&self, path: &[u64]) -> Result<Vec<Extension>> {
        path.iter()
            .map(|&letter| {
                self.legend
                    .get(letter as usize)
                    .cloned()
                    .ok_or_else(|| Error::InvalidInput(format!("letter {letter} has no legend entry")))
            })
            .collect()
    }

    /// Decodes a path into a block node.
    pub fn block_node(&self, path: &[u64]) -> Result<BlockNode> {
        let exts = self.decode(path)?;
        let mut node = BlockNode::root();
        for e in exts {
            let block = e.block.ok_or_else(|| {
                Error::InvalidInput("limit-tree letters carry no blocks".into())
            })?;
            node.s.push(e.index);
            node.t.push(block);
            node.w.push(e.ball);
        }
        Ok(node)
    }

    /// Decodes a path into a limit node.
    pub fn limit_node(&self, path: &[u64]) -> Result<LimitNode> {
        let exts = self.decode(path)?;
        Ok(LimitNode {
            s: exts.iter().map(|e| e.index).collect(),
            w: exts.iter().map(|e| e.ball).collect(),
        })
    }
}

/// Least word length whose ball is small enough for coordinate `i`.
fn min_ball_len(i: usize) -> usize {
    let mut l = 0;
    while (1u128 << l) < i as u128 + 1 {
        l += 1;
    }
    l
}

/// All words of length at most `max_len` whose ball the regions cover,
/// sorted by code. Coverage is inherited by subwords, so the word tree
/// is probed only down to the covered frontier and the subtrees below
/// it are emitted without further region arithmetic.
fn good_balls(regions: &[Region], max_len: usize) -> Result<Vec<Word>> {
    fn emit(w: &Word, max_len: usize, out: &mut Vec<Word>) {
        out.push(w.clone());
        if w.len() < max_len {
            emit(&w.child(false), max_len, out);
            emit(&w.child(true), max_len, out);
        }
    }
    let mut out = Vec::new();
    let mut stack = vec![Word::empty()];
    while let Some(w) = stack.pop() {
        if region_covers(&Cylinder::new(w.clone()), regions) {
            emit(&w, max_len, &mut out);
        } else if w.len() < max_len {
            stack.push(w.child(false));
            stack.push(w.child(true));
        }
    }
    let mut keyed = out
        .into_iter()
        .map(|w| Ok((word_code(&w)?, w)))
        .collect::<Result<Vec<_>>>()?;
    keyed.sort_by_key(|(c, _)| *c);
    Ok(keyed.into_iter().map(|(_, w)| w).collect())
}

struct TruncationBuild {
    indices: Vec<u64>,
    /// Block universe in a fixed order; a single dummy slot for limit
    /// trees, which carry no blocks.
    blocks: Vec<BTreeSet<u64>>,
    is_limit: bool,
    node_budget: usize,
    /// Covered ball words per index position and block slot.
    good: Vec<Vec<Vec<Word>>>,
}

impl TruncationBuild {
    fn slot_allowed(&self, bpos: usize, last_block_max: Option<u64>) -> bool {
        if self.is_limit {
            return true;
        }
        match last_block_max {
            Some(mx) => self.blocks[bpos].iter().next().is_some_and(|&mn| mn > mx),
            None => true,
        }
    }

    fn grow(
        &self,
        depth_left: usize,
        last_pos: Option<usize>,
        last_block_max: Option<u64>,
        last_ball: Option<&Word>,
        coord: usize,
        path: &mut Vec<Extension>,
        out: &mut Vec<Vec<Extension>>,
    ) -> Result<()> {
        if depth_left == 0 {
            return Ok(());
        }
        let from = last_pos.map_or(0, |i| i + 1);
        let min_len = min_ball_len(coord);
        for ii in from..self.indices.len() {
            for bpos in 0..self.good[ii].len() {
                if !self.slot_allowed(bpos, last_block_max) {
                    continue;
                }
                for w in &self.good[ii][bpos] {
                    if w.len() < min_len {
                        continue;
                    }
                    if let Some(lb) = last_ball {
                        if !lb.is_prefix_of(w) {
                            continue;
                        }
                    }
                    if out.len() >= self.node_budget {
                        return Err(Error::Caps(format!(
                            "node budget {} exhausted",
                            self.node_budget
                        )));
                    }
                    let ext = Extension {
                        index: self.indices[ii],
                        block: if self.is_limit {
                            None
                        } else {
                            Some(self.blocks[bpos].clone())
                        },
                        ball: word_code(w)?,
                    };
                    path.push(ext);
                    out.push(path.clone());
                    let block_max = if self.is_limit {
                        None
                    } else {
                        self.blocks[bpos].iter().next_back().copied()
                    };
                    self.grow(depth_left - 1, Some(ii), block_max, Some(w), coord + 1, path, out)?;
                    path.pop();
                }
            }
        }
        Ok(())
    }
}

/// The finite induced subtree of all member nodes of length at most
/// `depth` whose components fall inside the caps. Deterministic for
/// fixed caps; exceeding the node budget is a caps error. Limit trees
/// require the limit function `f`.
pub fn truncate_tree(
    kind: TreeKind,
    seq: &DenseSequence,
    codes: &IndexSet,
    f: Option<&SymbolicFn>,
    d: u64,
    depth: usize,
    caps: &TruncationCaps,
) -> Result<TruncatedTree> {
    let limit = match (kind, f) {
        (TreeKind::Limit, Some(f)) => Some(f),
        (TreeKind::Limit, None) => {
            return Err(Error::InvalidInput(
                "a limit tree needs its limit function".into(),
            ))
        }
        (TreeKind::Block, _) => None,
    };
    if caps.max_ball_word > 62 {
        return Err(Error::Precision(
            "ball words beyond length 62 have no representable codes".into(),
        ));
    }
    let theta = separation(d)?;
    let indices = pool(codes, caps.index_count)?;
    let mut blocks: Vec<BTreeSet<u64>> = Vec::new();
    if kind == TreeKind::Block {
        blocks.extend(indices.iter().map(|&n| BTreeSet::from([n])));
        for b in &caps.extra_blocks {
            if b.is_empty() {
                return Err(Error::InvalidInput("blocks must be non-empty".into()));
            }
            for &m in b {
                check_member(codes, m, "block member")?;
            }
            blocks.push(b.clone());
        }
    }
    let mut good = Vec::with_capacity(indices.len());
    for &n in &indices {
        let fnn = seq.fn_at(n);
        let slots = if let Some(f) = limit {
            vec![good_balls(
                &[diff_region(&fnn, f, theta)],
                caps.max_ball_word,
            )?]
        } else {
            blocks
                .iter()
                .map(|b| {
                    let regions: Vec<Region> = b
                        .iter()
                        .map(|&m| diff_region(&fnn, &seq.fn_at(m), theta))
                        .collect();
                    good_balls(&regions, caps.max_ball_word)
                })
                .collect::<Result<Vec<_>>>()?
        };
        good.push(slots);
    }
    let build = TruncationBuild {
        indices,
        blocks,
        is_limit: limit.is_some(),
        node_budget: caps.node_budget,
        good,
    };
    let mut out: Vec<Vec<Extension>> = Vec::new();
    build.grow(depth, None, None, None, 0, &mut Vec::new(), &mut out)?;
    let legend: Vec<Extension> = out
        .iter()
        .flatten()
        .cloned()
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut paths: Vec<Vec<u64>> = vec![Vec::new()];
    for p in &out {
        paths.push(
            p.iter()
                .map(|e| legend.binary_search(e).expect("letter in legend") as u64)
                .collect(),
        );
    }
    Ok(TruncatedTree {
        tree: FinTree::from_paths(paths),
        legend,
    })
}

/// First `want` elements of the index set, shrinking the request when
/// the representable part runs out early.
fn pool(codes: &IndexSet, want: usize) -> Result<Vec<u64>> {
    let mut d = want.max(1);
    loop {
        match codes.enumerate(d) {
            Ok(v) => return Ok(v),
            Err(e) if d <= 8 => return Err(e),
            Err(_) => d /= 2,
        }
    }
}

/// Rank of the glued truncation: one more than the largest per-level
/// truncation rank over the represented levels.
pub fn glued_rank(
    kind: TreeKind,
    seq: &DenseSequence,
    codes: &IndexSet,
    f: Option<&SymbolicFn>,
    levels: &[u64],
    depth: usize,
    caps: &TruncationCaps,
) -> Result<Ordinal> {
    let ranks: Vec<Ordinal> = levels
        .iter()
        .map(|&d| Ok(truncate_tree(kind, seq, codes, f, d, depth, caps)?.tree.rank()))
        .collect::<Result<_>>()?;
    Ordinal::sup_plus_one(&ranks)
}

/// An initial segment of an infinite branch of the level-`d` block
/// tree, certifying divergence: node `k` has length `k` and each node
/// extends the previous one. The balls shrink onto the witness point.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BranchWitness {
    pub d: u64,
    pub witness: Point,
    pub nodes: Vec<BlockNode>,
}

/// Builds a divergence branch of the requested length from a
/// divergence certificate: indices come from the certificate's two
/// sub-families, blocks are singletons of the low side, and the balls
/// are cylinders around the witness grown until the separation is
/// certified on the whole ball. The level is the least `d` whose
/// threshold `1/(d+1)` sits below the certified gap.
pub fn branch_witness(
    seq: &DenseSequence,
    codes: &IndexSet,
    len: usize,
) -> Result<BranchWitness> {
    let Verdict::Diverges {
        witness,
        sub_lo,
        sub_hi,
        gap,
    } = decide_convergence(seq, codes)?
    else {
        return Err(Error::InvalidInput(
            "convergent families have no divergence branch".into(),
        ));
    };
    // least d with 1/(d+1) < gap
    let d = u64::try_from(gap.recip().floor().to_integer())
        .map_err(|_| Error::Precision("divergence gap is out of range".into()))?;
    let theta = separation(d)?;
    let hi = sub_hi.enumerate(len)?;
    let lo = sub_lo.enumerate(len)?;
    let mut balls = Vec::with_capacity(len);
    let mut j = 0usize;
    for i in 0..len {
        while (1u128 << j) < i as u128 + 1 {
            j += 1;
        }
        loop {
            let cyl = Cylinder::new(witness.prefix_word(j));
            let region = diff_region(&seq.fn_at(hi[i]), &seq.fn_at(lo[i]), theta);
            if region_covers(&cyl, &[region]) {
                break;
            }
            j += 1;
            if j > 62 {
                return Err(Error::Caps(
                    "no ball around the witness certifies the separation within \
                     the word-length cap"
                        .into(),
                ));
            }
        }
        balls.push(word_code(&witness.prefix_word(j))?);
    }
    let nodes = (0..=len)
        .map(|k| BlockNode {
            s: hi[..k].to_vec(),
            t: lo[..k].iter().map(|&m| BTreeSet::from([m])).collect(),
            w: balls[..k].to_vec(),
        })
        .collect();
    Ok(BranchWitness { d, witness, nodes })
}

/// A monotone embedding of a truncated limit tree into the level-`d`
/// block tree, witnessing that the limit tree's rank is bounded by the
/// block tree's.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonotoneReduction {
    pub d: u64,
    pub source: TruncatedTree,
    pub target: TruncatedTree,
    pub map: MonotoneMap,
    pub pairs: Vec<(LimitNode, BlockNode)>,
}

/// Greedy effective subcover: splits the ball into cylinders until on
/// each piece a single pool index past `p` is separated from `f_n` by
/// more than `theta` everywhere, and returns the set of chosen
/// indices.
fn cover_block(
    seq: &DenseSequence,
    pool: &[u64],
    n: u64,
    ball_word: &Word,
    p: Option<u64>,
    theta: Rational,
) -> Result<BTreeSet<u64>> {
    let start = match p {
        Some(p) => pool.partition_point(|&m| m <= p),
        None => 0,
    };
    let candidates = &pool[start..];
    if candidates.is_empty() {
        return Err(Error::Caps(
            "index pool exhausted while assembling a block".into(),
        ));
    }
    let fnn = seq.fn_at(n);
    let mut queue = VecDeque::from([ball_word.clone()]);
    let mut block = BTreeSet::new();
    let mut pieces = 0usize;
    while let Some(piece) = queue.pop_front() {
        pieces += 1;
        if pieces > 4096 {
            return Err(Error::Caps(
                "cylinder splitting produced too many pieces".into(),
            ));
        }
        let cyl = Cylinder::new(piece.clone());
        let chosen = candidates.iter().copied().find(|&m| {
            region_covers(&cyl, &[diff_region(&fnn, &seq.fn_at(m), theta)])
        });
        match chosen {
            Some(m) => {
                block.insert(m);
            }
            None if piece.len() < 62 => {
                queue.push_back(piece.child(false));
                queue.push_back(piece.child(true));
            }
            None => {
                return Err(Error::Caps(
                    "cylinder splitting exceeded the word-length cap".into(),
                ))
            }
        }
    }
    Ok(block)
}

/// Constructs the monotone map from the depth-`depth` truncation of
/// the level-`d` limit tree into the block tree over the same index
/// set: each coordinate's block is assembled by the effective
/// subcover, with every block past the maximum of the previous ones,
/// so blocks increase strictly along every path. The limit must be a
/// continuous catalog function and the family must converge to it.
pub fn monotone_reduction(
    seq: &DenseSequence,
    codes: &IndexSet,
    f: &SymbolicFn,
    d: u64,
    depth: usize,
    caps: &TruncationCaps,
) -> Result<MonotoneReduction> {
    match f {
        SymbolicFn::Zero | SymbolicFn::Const { .. } | SymbolicFn::NodeInd { .. } => {}
        _ => {
            return Err(Error::InvalidInput(
                "the limit must be a continuous catalog function".into(),
            ))
        }
    }
    if !decide_convergence_to(seq, codes, f)? {
        return Err(Error::InvalidInput(
            "the family does not converge to the given limit".into(),
        ));
    }
    let source = truncate_tree(TreeKind::Limit, seq, codes, Some(f), d, depth, caps)?;
    let theta = separation(d)?;
    let indices = pool(codes, caps.index_count.saturating_mul(8).max(64))?;
    // blocks per source path, built parent-first (the node set is
    // lexicographic, so parents precede children)
    let mut phi: BTreeMap<Vec<u64>, Vec<BTreeSet<u64>>> = BTreeMap::new();
    let mut pairs_raw: Vec<(Vec<u64>, LimitNode, BlockNode)> = Vec::new();
    for path in source.tree.nodes() {
        let blocks = if path.is_empty() {
            Vec::new()
        } else {
            let parent = &path[..path.len() - 1];
            let mut blocks = phi
                .get(parent)
                .cloned()
                .ok_or_else(|| Error::InvalidInput("tree parent missing".into()))?;
            let ext = source.decode(&path[path.len() - 1..])?.remove(0);
            let p = blocks.last().and_then(|b| b.iter().next_back().copied());
            blocks.push(cover_block(
                seq,
                &indices,
                ext.index,
                &word_from_code(ext.ball),
                p,
                theta,
            )?);
            blocks
        };
        let node = source.limit_node(path)?;
        let image = BlockNode {
            s: node.s.clone(),
            t: blocks.clone(),
            w: node.w.clone(),
        };
        phi.insert(path.clone(), blocks);
        pairs_raw.push((path.clone(), node, image));
    }
    // image tree: letters over the distinct image extensions
    let image_exts = |image: &BlockNode| -> Vec<Extension> {
        (0..image.len())
            .map(|i| Extension {
                index: image.s[i],
                block: Some(image.t[i].clone()),
                ball: image.w[i],
            })
            .collect()
    };
    let legend: Vec<Extension> = pairs_raw
        .iter()
        .flat_map(|(_, _, image)| image_exts(image))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let mut target_paths: Vec<Vec<u64>> = vec![Vec::new()];
    let mut map = MonotoneMap {
        pairs: BTreeMap::new(),
    };
    let mut pairs = Vec::new();
    for (path, node, image) in pairs_raw {
        let target_path: Vec<u64> = image_exts(&image)
            .iter()
            .map(|e| legend.binary_search(e).expect("letter in legend") as u64)
            .collect();
        target_paths.push(target_path.clone());
        map.pairs.insert(path, target_path);
        pairs.push((node, image));
    }
    let target = TruncatedTree {
        tree: FinTree::from_paths(target_paths),
        legend,
    };
    if !map.verify(&source.tree, &target.tree) {
        return Err(Error::InvalidInput(
            "constructed map failed monotonicity checks".into(),
        ));
    }
    Ok(MonotoneReduction {
        d,
        source,
        target,
        map,
        pairs,
    })
}
