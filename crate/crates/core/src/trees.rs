//! Trees of finite sequences and their ordinal ranks.
//!
//! Two presentations are provided. [`FinTree`] is an explicit finite set of
//! sequences over `u64` letters, closed under prefixes. [`TreeSchema`] is a
//! finite description of a possibly infinite tree built from chains, finite
//! joins, countable joins governed by an [`OmegaRule`], and a designated
//! infinite branch. Ranks are computed by iterating the child derivative
//! (for `FinTree`) or structurally (for `TreeSchema`).

use crate::error::{Error, Result};
use crate::ordinals::Ordinal;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};

/// A finite prefix-closed set of sequences over `u64` letters.
///
/// Invariant: every node's parent is present; nonempty trees contain the
/// root (the empty sequence).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FinTreeRepr", into = "FinTreeRepr")]
pub struct FinTree {
    nodes: BTreeSet<Vec<u64>>,
}

#[derive(Serialize, Deserialize, Clone)]
struct FinTreeRepr {
    nodes: Vec<Vec<u64>>,
}

impl TryFrom<FinTreeRepr> for FinTree {
    type Error = Error;
    fn try_from(r: FinTreeRepr) -> Result<Self> {
        FinTree::new(r.nodes.into_iter().collect())
    }
}

impl From<FinTree> for FinTreeRepr {
    fn from(t: FinTree) -> Self {
        FinTreeRepr {
            nodes: t.nodes.into_iter().collect(),
        }
    }
}

impl FinTree {
    pub fn empty() -> Self {
        FinTree {
            nodes: BTreeSet::new(),
        }
    }

    /// Validates prefix closure.
    pub fn new(nodes: BTreeSet<Vec<u64>>) -> Result<Self> {
        for n in &nodes {
            if !n.is_empty() && !nodes.contains(&n[..n.len() - 1]) {
                return Err(Error::InvalidInput(format!(
                    "node {n:?} present without its parent"
                )));
            }
        }
        Ok(FinTree { nodes })
    }

    /// Builds the downward closure of the given paths.
    pub fn from_paths<I, P>(paths: I) -> Self
    where
        I: IntoIterator<Item = P>,
        P: AsRef<[u64]>,
    {
        let mut nodes = BTreeSet::new();
        for p in paths {
            let p = p.as_ref();
            for k in 0..=p.len() {
                nodes.insert(p[..k].to_vec());
            }
        }
        FinTree { nodes }
    }

    pub fn nodes(&self) -> &BTreeSet<Vec<u64>> {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, path: &[u64]) -> bool {
        self.nodes.contains(path)
    }

    /// Immediate children of `path`, in increasing letter order.
    pub fn children(&self, path: &[u64]) -> Vec<Vec<u64>> {
        self.extensions(path)
            .filter(|n| n.len() == path.len() + 1)
            .cloned()
            .collect()
    }

    /// All strict extensions of `path` present in the tree.
    ///
    /// Extensions of a sequence form a contiguous lexicographic block, so
    /// this is a range scan.
    pub fn extensions<'a>(&'a self, path: &'a [u64]) -> impl Iterator<Item = &'a Vec<u64>> {
        self.nodes
            .range(path.to_vec()..)
            .take_while(move |n| n.starts_with(path))
            .filter(move |n| n.len() > path.len())
    }

    /// Keeps the nodes that have at least one child.
    pub fn derivative(&self) -> FinTree {
        let nodes = self
            .nodes
            .iter()
            .filter(|n| {
                self.nodes
                    .range((*n).clone()..)
                    .take_while(|m| m.starts_with(n.as_slice()))
                    .any(|m| m.len() == n.len() + 1)
            })
            .cloned()
            .collect();
        FinTree { nodes }
    }

    /// Number of derivative iterations until the tree is empty.
    pub fn rank(&self) -> Ordinal {
        let mut t = self.clone();
        let mut steps = 0u64;
        while !t.is_empty() {
            t = t.derivative();
            steps += 1;
        }
        Ordinal::from_u64(steps)
    }

    /// Length of the longest chain, counted in nodes. Used as an
    /// independent check against [`FinTree::rank`].
    pub fn height(&self) -> u64 {
        self.nodes
            .iter()
            .map(|n| n.len() as u64 + 1)
            .max()
            .unwrap_or(0)
    }
}

/// Rule giving the `n`-th child subtree of a countable join.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OmegaRule {
    /// Every child is a copy of the same schema.
    Constant { child: Box<TreeSchema> },
    /// Child `n` is a chain of `mul*n + add` nodes.
    AffineChain { mul: u64, add: u64 },
    /// Child `n` is a chain of `mul*n + add` single-child nodes on top of
    /// a copy of `core`.
    Nested {
        mul: u64,
        add: u64,
        core: Box<TreeSchema>,
    },
}

/// Finite description of a tree over `u64` letters.
///
/// `Join` children sit under their position index as letter; `Empty`
/// children act as padding to place a subtree at a chosen letter.
/// `Chain { len: 0 }` denotes the empty tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TreeSchema {
    Empty,
    Single,
    Chain { len: u64 },
    Join { children: Vec<TreeSchema> },
    OmegaJoin { rule: OmegaRule },
    /// The single infinite branch of zeros.
    FullBranch,
}

/// The infinite branches of a schema, each branch named by the letters
/// leading to its designated-branch node (the branch continues with
/// zeros from there).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BranchSet {
    Finite(Vec<Vec<u64>>),
    Infinite,
}

impl TreeSchema {
    /// Chain of `len` nodes; empty when `len` is zero.
    pub fn chain(len: u64) -> TreeSchema {
        if len == 0 {
            TreeSchema::Empty
        } else {
            TreeSchema::Chain { len }
        }
    }

    pub fn is_empty_schema(&self) -> bool {
        matches!(self, TreeSchema::Empty | TreeSchema::Chain { len: 0 })
    }

    /// True when no designated infinite branch occurs anywhere.
    pub fn is_wellfounded(&self) -> bool {
        match self {
            TreeSchema::Empty | TreeSchema::Single | TreeSchema::Chain { .. } => true,
            TreeSchema::FullBranch => false,
            TreeSchema::Join { children } => children.iter().all(|c| c.is_wellfounded()),
            TreeSchema::OmegaJoin { rule } => match rule {
                OmegaRule::Constant { child } => child.is_wellfounded(),
                OmegaRule::AffineChain { .. } => true,
                OmegaRule::Nested { core, .. } => core.is_wellfounded(),
            },
        }
    }

    /// True when the denoted node set is infinite.
    pub fn is_infinite(&self) -> bool {
        match self {
            TreeSchema::Empty | TreeSchema::Single | TreeSchema::Chain { .. } => false,
            TreeSchema::FullBranch => true,
            TreeSchema::Join { children } => children.iter().any(|c| c.is_infinite()),
            TreeSchema::OmegaJoin { rule } => match rule {
                OmegaRule::Constant { child } => !child.is_empty_schema(),
                OmegaRule::AffineChain { mul, add } => *mul >= 1 || *add >= 1,
                OmegaRule::Nested { mul, add, core } => {
                    *mul >= 1 || *add >= 1 || !core.is_empty_schema()
                }
            },
        }
    }

    pub fn contains(&self, path: &[u64]) -> bool {
        match self {
            TreeSchema::Empty | TreeSchema::Chain { len: 0 } => false,
            TreeSchema::Single => path.is_empty(),
            TreeSchema::Chain { len } => {
                (path.len() as u64) < *len && path.iter().all(|&a| a == 0)
            }
            TreeSchema::FullBranch => path.iter().all(|&a| a == 0),
            TreeSchema::Join { children } => match path.split_first() {
                None => true,
                Some((&a, rest)) => (a as usize) < children.len()
                    && children[a as usize].contains(rest),
            },
            TreeSchema::OmegaJoin { rule } => match path.split_first() {
                None => true,
                Some((&n, rest)) => rule_contains(rule, n, rest),
            },
        }
    }

    /// Rank of the root node: zero for leaves, strict supremum of the child
    /// node ranks otherwise. `None` for the empty schema.
    fn node_rank(&self) -> Option<Ordinal> {
        match self {
            TreeSchema::Empty | TreeSchema::Chain { len: 0 } => None,
            TreeSchema::Single => Some(Ordinal::zero()),
            TreeSchema::Chain { len } => Some(Ordinal::from_u64(len - 1)),
            TreeSchema::FullBranch => None,
            TreeSchema::Join { children } => {
                let best = children
                    .iter()
                    .filter_map(|c| c.node_rank())
                    .map(|r| r.succ())
                    .max();
                Some(best.unwrap_or_else(Ordinal::zero))
            }
            TreeSchema::OmegaJoin { rule } => Some(match rule {
                OmegaRule::Constant { child } => match child.node_rank() {
                    None => Ordinal::zero(),
                    Some(r) => r.succ(),
                },
                OmegaRule::AffineChain { mul, add } => affine_chain_rank(*mul, *add),
                OmegaRule::Nested { mul, add, core } => match core.node_rank() {
                    None => affine_chain_rank(*mul, *add),
                    Some(r) => {
                        if *mul >= 1 {
                            r.add(&Ordinal::omega())
                        } else {
                            r.add(&Ordinal::from_u64(*add)).succ()
                        }
                    }
                },
            }),
        }
    }

    /// Ordinal rank: least number of derivative iterations emptying the
    /// tree. Errors when an infinite branch is present.
    pub fn rank(&self) -> Result<Ordinal> {
        if !self.is_wellfounded() {
            return Err(Error::NotWellFounded(
                "schema contains an infinite branch".into(),
            ));
        }
        Ok(match self.node_rank() {
            None => Ordinal::zero(),
            Some(r) => r.succ(),
        })
    }

    /// The finite tree of all nodes with length at most `depth` and every
    /// letter below `width`.
    pub fn truncate(&self, depth: usize, width: u64) -> FinTree {
        let mut nodes = BTreeSet::new();
        if width == 0 {
            if !self.is_empty_schema() {
                nodes.insert(Vec::new());
            }
            return FinTree { nodes };
        }
        let mut base = Vec::new();
        trunc(self, &mut base, depth, width, &mut nodes);
        FinTree { nodes }
    }

    /// Letters leading from the root to the lexicographically least
    /// designated-branch node; the least infinite branch continues with
    /// zeros from there.
    pub fn konig_prefix(&self) -> Result<Vec<u64>> {
        if self.is_wellfounded() {
            return Err(Error::NoInfiniteBranch);
        }
        let mut path = Vec::new();
        let mut cur = Cursor::Node(self);
        loop {
            match cur {
                Cursor::Node(TreeSchema::FullBranch) => return Ok(path),
                Cursor::Node(TreeSchema::Join { children }) => {
                    let (i, c) = children
                        .iter()
                        .enumerate()
                        .find(|(_, c)| !c.is_wellfounded())
                        .expect("join without well-founded witness");
                    path.push(i as u64);
                    cur = Cursor::Node(c);
                }
                Cursor::Node(TreeSchema::OmegaJoin { rule }) => {
                    path.push(0);
                    match rule {
                        OmegaRule::Constant { child } => cur = Cursor::Node(child),
                        OmegaRule::Nested { add, core, .. } => {
                            cur = Cursor::Tower(u128::from(*add), core)
                        }
                        OmegaRule::AffineChain { .. } => {
                            unreachable!("affine chains are well-founded")
                        }
                    }
                }
                Cursor::Node(_) => unreachable!("well-founded schema on descent"),
                Cursor::Tower(0, core) => cur = Cursor::Node(core),
                Cursor::Tower(m, core) => {
                    path.push(0);
                    cur = Cursor::Tower(m - 1, core);
                }
            }
        }
    }

    /// Node of length `depth` on the lexicographically least infinite
    /// branch. For increasing depths the results extend one another.
    pub fn konig_branch(&self, depth: usize) -> Result<Vec<u64>> {
        let mut p = self.konig_prefix()?;
        while p.len() < depth {
            p.push(0);
        }
        p.truncate(depth);
        Ok(p)
    }

    /// A prefix of some infinite branch other than the least one, when one
    /// exists. The branch continues with zeros after the prefix.
    pub fn second_branch_prefix(&self) -> Result<Option<Vec<u64>>> {
        if self.is_wellfounded() {
            return Err(Error::NoInfiniteBranch);
        }
        let mut path = Vec::new();
        let mut cur = Cursor::Node(self);
        loop {
            match cur {
                Cursor::Node(TreeSchema::FullBranch) => return Ok(None),
                Cursor::Node(TreeSchema::Join { children }) => {
                    let mut bad = children.iter().enumerate().filter(|(_, c)| !c.is_wellfounded());
                    let (i, c) = bad.next().expect("join without witness");
                    if let Some((j, d)) = bad.next() {
                        let mut alt = path.clone();
                        alt.push(j as u64);
                        alt.extend(d.konig_prefix()?);
                        return Ok(Some(alt));
                    }
                    path.push(i as u64);
                    cur = Cursor::Node(c);
                }
                Cursor::Node(TreeSchema::OmegaJoin { rule }) => {
                    // every child of an ill-founded countable join is
                    // ill-founded, so child 1 yields a second branch
                    let mut alt = path.clone();
                    alt.push(1);
                    match rule {
                        OmegaRule::Constant { child } => alt.extend(child.konig_prefix()?),
                        OmegaRule::Nested { mul, add, core } => {
                            for _ in 0..(mul + add) {
                                alt.push(0);
                            }
                            alt.extend(core.konig_prefix()?);
                        }
                        OmegaRule::AffineChain { .. } => {
                            unreachable!("affine chains are well-founded")
                        }
                    }
                    return Ok(Some(alt));
                }
                Cursor::Node(_) => unreachable!("well-founded schema on descent"),
                Cursor::Tower(0, core) => cur = Cursor::Node(core),
                Cursor::Tower(m, core) => {
                    path.push(0);
                    cur = Cursor::Tower(m - 1, core);
                }
            }
        }
    }

    /// All infinite branches, or `Infinite` when a designated branch sits
    /// inside a countable join rule.
    pub fn branch_set(&self) -> BranchSet {
        match self {
            TreeSchema::Empty | TreeSchema::Single | TreeSchema::Chain { .. } => {
                BranchSet::Finite(Vec::new())
            }
            TreeSchema::FullBranch => BranchSet::Finite(vec![Vec::new()]),
            TreeSchema::Join { children } => {
                let mut all = Vec::new();
                for (i, c) in children.iter().enumerate() {
                    match c.branch_set() {
                        BranchSet::Infinite => return BranchSet::Infinite,
                        BranchSet::Finite(list) => {
                            for mut p in list {
                                p.insert(0, i as u64);
                                all.push(p);
                            }
                        }
                    }
                }
                BranchSet::Finite(all)
            }
            TreeSchema::OmegaJoin { rule } => {
                let inner_bad = match rule {
                    OmegaRule::Constant { child } => !child.is_wellfounded(),
                    OmegaRule::AffineChain { .. } => false,
                    OmegaRule::Nested { core, .. } => !core.is_wellfounded(),
                };
                if inner_bad {
                    BranchSet::Infinite
                } else {
                    BranchSet::Finite(Vec::new())
                }
            }
        }
    }

    /// Subtree under `letter`, materialized as a schema. `None` when the
    /// child is absent. The result is only guaranteed to agree with the
    /// true child subtree on nodes of length at most `depth_cap`; deep
    /// towers are clipped to keep the materialization small.
    pub fn child_schema(&self, letter: u64, depth_cap: usize) -> Option<TreeSchema> {
        match self {
            TreeSchema::Empty | TreeSchema::Single | TreeSchema::Chain { len: 0 } => None,
            TreeSchema::Chain { len } => {
                if letter == 0 && *len >= 2 {
                    Some(TreeSchema::chain(len - 1))
                } else {
                    None
                }
            }
            TreeSchema::FullBranch => (letter == 0).then_some(TreeSchema::FullBranch),
            TreeSchema::Join { children } => children
                .get(letter as usize)
                .filter(|c| !c.is_empty_schema())
                .cloned(),
            TreeSchema::OmegaJoin { rule } => match rule {
                OmegaRule::Constant { child } => {
                    (!child.is_empty_schema()).then(|| (**child).clone())
                }
                OmegaRule::AffineChain { mul, add } => {
                    let m = u128::from(*mul) * u128::from(letter) + u128::from(*add);
                    if m == 0 {
                        None
                    } else {
                        Some(TreeSchema::chain(m.min(depth_cap as u128 + 1) as u64))
                    }
                }
                OmegaRule::Nested { mul, add, core } => {
                    let m = u128::from(*mul) * u128::from(letter) + u128::from(*add);
                    if core.is_empty_schema() {
                        // the child is a bare chain of m nodes
                        (m > 0).then(|| TreeSchema::chain(m.min(depth_cap as u128 + 1) as u64))
                    } else if m > depth_cap as u128 {
                        // the core sits below the cap; only tower nodes remain
                        Some(TreeSchema::chain(depth_cap as u64 + 1))
                    } else {
                        Some(tower_schema(m as usize, core))
                    }
                }
            },
        }
    }

    /// Replaces the designated-branch node reached by `route` (through
    /// join positions only) with the empty schema.
    pub fn without_branch(&self, route: &[u64]) -> Result<TreeSchema> {
        match (self, route.split_first()) {
            (TreeSchema::FullBranch, None) => Ok(TreeSchema::Empty),
            (TreeSchema::Join { children }, Some((&a, rest))) => {
                let a = a as usize;
                if a >= children.len() {
                    return Err(Error::InvalidInput("route leaves the schema".into()));
                }
                let mut children = children.clone();
                children[a] = children[a].without_branch(rest)?;
                Ok(TreeSchema::Join { children })
            }
            _ => Err(Error::InvalidInput(
                "route does not lead to a designated branch through joins".into(),
            )),
        }
    }
}

/// Schema denoting exactly the prefixes of the branch `prefix` followed
/// by zeros: a single chain of nodes through the given letters.
pub fn path_schema(prefix: &[u64]) -> TreeSchema {
    let mut acc = TreeSchema::FullBranch;
    for &a in prefix.iter().rev() {
        let mut children = vec![TreeSchema::Empty; a as usize];
        children.push(acc);
        acc = TreeSchema::Join { children };
    }
    acc
}

fn tower_schema(m: usize, core: &TreeSchema) -> TreeSchema {
    let mut acc = core.clone();
    for _ in 0..m {
        acc = TreeSchema::Join {
            children: vec![acc],
        };
    }
    acc
}

fn affine_chain_rank(mul: u64, add: u64) -> Ordinal {
    if mul >= 1 {
        Ordinal::omega()
    } else {
        Ordinal::from_u64(add)
    }
}

fn rule_contains(rule: &OmegaRule, n: u64, rest: &[u64]) -> bool {
    match rule {
        OmegaRule::Constant { child } => child.contains(rest),
        OmegaRule::AffineChain { mul, add } => {
            let m = u128::from(*mul) * u128::from(n) + u128::from(*add);
            (rest.len() as u128) < m && rest.iter().all(|&a| a == 0)
        }
        OmegaRule::Nested { mul, add, core } => {
            let m = u128::from(*mul) * u128::from(n) + u128::from(*add);
            if (rest.len() as u128) < m {
                rest.iter().all(|&a| a == 0)
            } else {
                let m = m as usize;
                rest[..m].iter().all(|&a| a == 0) && core.contains(&rest[m..])
            }
        }
    }
}

enum Cursor<'a> {
    Node(&'a TreeSchema),
    Tower(u128, &'a TreeSchema),
}

fn trunc(
    s: &TreeSchema,
    base: &mut Vec<u64>,
    depth_left: usize,
    width: u64,
    out: &mut BTreeSet<Vec<u64>>,
) {
    match s {
        TreeSchema::Empty | TreeSchema::Chain { len: 0 } => {}
        TreeSchema::Single => {
            out.insert(base.clone());
        }
        TreeSchema::Chain { len } => {
            trunc_zero_chain(u128::from(*len), base, depth_left, out);
        }
        TreeSchema::FullBranch => {
            trunc_zero_chain(depth_left as u128 + 1, base, depth_left, out);
        }
        TreeSchema::Join { children } => {
            out.insert(base.clone());
            if depth_left == 0 {
                return;
            }
            for (i, c) in children.iter().enumerate() {
                if (i as u64) >= width {
                    break;
                }
                base.push(i as u64);
                trunc(c, base, depth_left - 1, width, out);
                base.pop();
            }
        }
        TreeSchema::OmegaJoin { rule } => {
            out.insert(base.clone());
            if depth_left == 0 {
                return;
            }
            for n in 0..width {
                base.push(n);
                match rule {
                    OmegaRule::Constant { child } => {
                        trunc(child, base, depth_left - 1, width, out)
                    }
                    OmegaRule::AffineChain { mul, add } => {
                        let m = u128::from(*mul) * u128::from(n) + u128::from(*add);
                        trunc_zero_chain(m, base, depth_left - 1, out);
                    }
                    OmegaRule::Nested { mul, add, core } => {
                        let m = u128::from(*mul) * u128::from(n) + u128::from(*add);
                        trunc_tower(m, core, base, depth_left - 1, width, out);
                    }
                }
                base.pop();
            }
        }
    }
}

fn trunc_zero_chain(len: u128, base: &mut Vec<u64>, depth_left: usize, out: &mut BTreeSet<Vec<u64>>) {
    let cap = len.min(depth_left as u128 + 1) as usize;
    let mut p = base.clone();
    for _ in 0..cap {
        out.insert(p.clone());
        p.push(0);
    }
}

fn trunc_tower(
    m: u128,
    core: &TreeSchema,
    base: &mut Vec<u64>,
    depth_left: usize,
    width: u64,
    out: &mut BTreeSet<Vec<u64>>,
) {
    if m == 0 {
        trunc(core, base, depth_left, width, out);
        return;
    }
    out.insert(base.clone());
    if depth_left == 0 {
        return;
    }
    base.push(0);
    trunc_tower(m - 1, core, base, depth_left - 1, width, out);
    base.pop();
}

/// A map between tree node sets sending strict extensions to strict
/// extensions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonotoneMap {
    /// Serialized as a list of `[source, image]` pairs: JSON objects
    /// cannot key on integer sequences.
    #[serde(with = "map_as_pairs")]
    pub pairs: BTreeMap<Vec<u64>, Vec<u64>>,
}

mod map_as_pairs {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(
        map: &BTreeMap<Vec<u64>, Vec<u64>>,
        ser: S,
    ) -> Result<S::Ok, S::Error> {
        map.iter().collect::<Vec<_>>().serialize(ser)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        de: D,
    ) -> Result<BTreeMap<Vec<u64>, Vec<u64>>, D::Error> {
        Ok(Vec::<(Vec<u64>, Vec<u64>)>::deserialize(de)?
            .into_iter()
            .collect())
    }
}

impl MonotoneMap {
    /// Checks domain coverage, image membership and strictness on
    /// parent-child pairs (which implies it on all comparable pairs).
    pub fn verify(&self, source: &FinTree, target: &FinTree) -> bool {
        if self.pairs.len() != source.len() {
            return false;
        }
        for (u, v) in &self.pairs {
            if !source.contains(u) || !target.contains(v) {
                return false;
            }
            if !u.is_empty() {
                let parent = &u[..u.len() - 1];
                match self.pairs.get(parent) {
                    Some(pv) => {
                        if !(v.len() > pv.len() && v.starts_with(pv)) {
                            return false;
                        }
                    }
                    None => return false,
                }
            }
        }
        true
    }
}

/// Finds a monotone map from `source` into `target`, if one exists.
///
/// Uses the table `can(s, t)` = "the subtree at `s` maps into the strict
/// extensions of `t`", then reconstructs greedily by always taking the
/// lexicographically least viable image, so the result is deterministic.
pub fn find_monotone_map(source: &FinTree, target: &FinTree) -> Option<MonotoneMap> {
    if source.is_empty() {
        return Some(MonotoneMap {
            pairs: BTreeMap::new(),
        });
    }
    if target.is_empty() {
        return None;
    }
    let s_nodes: Vec<&Vec<u64>> = source.nodes().iter().collect();
    let t_nodes: Vec<&Vec<u64>> = target.nodes().iter().collect();
    let s_index: HashMap<&Vec<u64>, usize> =
        s_nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let t_index: HashMap<&Vec<u64>, usize> =
        t_nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    let s_children: Vec<Vec<usize>> = s_nodes
        .iter()
        .map(|n| source.children(n).iter().map(|c| s_index[c]).collect())
        .collect();
    let t_desc: Vec<Vec<usize>> = t_nodes
        .iter()
        .map(|n| target.extensions(n).map(|c| t_index[c]).collect())
        .collect();

    let mut memo: Vec<Vec<Option<bool>>> = vec![vec![None; t_nodes.len()]; s_nodes.len()];
    fn can(
        si: usize,
        ti: usize,
        s_children: &[Vec<usize>],
        t_desc: &[Vec<usize>],
        memo: &mut Vec<Vec<Option<bool>>>,
    ) -> bool {
        if let Some(v) = memo[si][ti] {
            return v;
        }
        let ok = s_children[si]
            .iter()
            .all(|&c| t_desc[ti].iter().any(|&tv| can(c, tv, s_children, t_desc, memo)));
        memo[si][ti] = Some(ok);
        ok
    }

    let root = s_index[&Vec::new()];
    let root_img =
        (0..t_nodes.len()).find(|&ti| can(root, ti, &s_children, &t_desc, &mut memo))?;

    let mut pairs = BTreeMap::new();
    let mut queue = vec![(root, root_img)];
    while let Some((si, ti)) = queue.pop() {
        pairs.insert(s_nodes[si].clone(), t_nodes[ti].clone());
        for &c in &s_children[si] {
            let img = t_desc[ti]
                .iter()
                .copied()
                .find(|&tv| can(c, tv, &s_children, &t_desc, &mut memo))
                .expect("viable child image exists by the table");
            queue.push((c, img));
        }
    }
    Some(MonotoneMap { pairs })
}

/// Exhaustive backtracking search for a monotone map. Exponential; meant
/// as an oracle on small trees.
pub fn exists_monotone_map_bruteforce(source: &FinTree, target: &FinTree) -> bool {
    if source.is_empty() {
        return true;
    }
    if target.is_empty() {
        return false;
    }
    let s_nodes: Vec<&Vec<u64>> = source.nodes().iter().collect();
    let t_nodes: Vec<&Vec<u64>> = target.nodes().iter().collect();
    let s_index: HashMap<&Vec<u64>, usize> =
        s_nodes.iter().enumerate().map(|(i, n)| (*n, i)).collect();
    // in lexicographic order every parent precedes its children
    let parent: Vec<Option<usize>> = s_nodes
        .iter()
        .map(|n| {
            if n.is_empty() {
                None
            } else {
                Some(s_index[&n[..n.len() - 1].to_vec()])
            }
        })
        .collect();
    let mut image: Vec<usize> = vec![0; s_nodes.len()];

    fn assign(
        k: usize,
        s_nodes: &[&Vec<u64>],
        t_nodes: &[&Vec<u64>],
        parent: &[Option<usize>],
        image: &mut Vec<usize>,
    ) -> bool {
        if k == s_nodes.len() {
            return true;
        }
        for ti in 0..t_nodes.len() {
            if let Some(p) = parent[k] {
                let pv = t_nodes[image[p]];
                let tv = t_nodes[ti];
                if !(tv.len() > pv.len() && tv.starts_with(pv)) {
                    continue;
                }
            }
            image[k] = ti;
            if assign(k + 1, s_nodes, t_nodes, parent, image) {
                return true;
            }
        }
        false
    }
    assign(0, &s_nodes, &t_nodes, &parent, &mut image)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w() -> Ordinal {
        Ordinal::omega()
    }

    fn nat(n: u64) -> Ordinal {
        Ordinal::from_u64(n)
    }

    #[test]
    fn fintree_validation() {
        assert!(FinTree::new([vec![0u64]].into_iter().collect()).is_err());
        let t = FinTree::from_paths([[0u64, 1]]);
        assert_eq!(t.len(), 3);
        assert!(t.contains(&[]));
        assert!(t.contains(&[0]));
        assert!(t.contains(&[0, 1]));
        assert!(!t.contains(&[1]));
    }

    #[test]
    fn fintree_rank_matches_height() {
        let t = FinTree::from_paths([vec![0u64, 0], vec![1]]);
        assert_eq!(t.rank(), nat(3));
        assert_eq!(t.height(), 3);
        let d = t.derivative();
        assert_eq!(d.nodes().len(), 2);
        assert!(d.contains(&[]) && d.contains(&[0]));
        assert_eq!(FinTree::empty().rank(), nat(0));
        let single = FinTree::from_paths::<_, Vec<u64>>([vec![]]);
        assert_eq!(single.rank(), nat(1));
    }

    #[test]
    fn schema_ranks() {
        assert_eq!(TreeSchema::Empty.rank().unwrap(), nat(0));
        assert_eq!(TreeSchema::Single.rank().unwrap(), nat(1));
        assert_eq!(TreeSchema::chain(5).rank().unwrap(), nat(5));
        let join = TreeSchema::Join {
            children: vec![TreeSchema::chain(2), TreeSchema::chain(3)],
        };
        assert_eq!(join.rank().unwrap(), nat(4));
        let fan = TreeSchema::OmegaJoin {
            rule: OmegaRule::AffineChain { mul: 1, add: 1 },
        };
        assert_eq!(fan.rank().unwrap(), w().succ());
        let copies = TreeSchema::OmegaJoin {
            rule: OmegaRule::Constant {
                child: Box::new(TreeSchema::Single),
            },
        };
        assert_eq!(copies.rank().unwrap(), nat(2));
        let towers = TreeSchema::OmegaJoin {
            rule: OmegaRule::Nested {
                mul: 0,
                add: 3,
                core: Box::new(TreeSchema::Single),
            },
        };
        assert_eq!(towers.rank().unwrap(), nat(5));
        let stacked = TreeSchema::OmegaJoin {
            rule: OmegaRule::Nested {
                mul: 1,
                add: 0,
                core: Box::new(TreeSchema::OmegaJoin {
                    rule: OmegaRule::AffineChain { mul: 1, add: 1 },
                }),
            },
        };
        // w*2 + 1
        let expect = Ordinal::omega_term(Ordinal::one(), 2).succ();
        assert_eq!(stacked.rank().unwrap(), expect);
        assert!(matches!(
            TreeSchema::FullBranch.rank(),
            Err(Error::NotWellFounded(_))
        ));
    }

    #[test]
    fn truncation_ranks() {
        let towers = TreeSchema::OmegaJoin {
            rule: OmegaRule::Nested {
                mul: 0,
                add: 3,
                core: Box::new(TreeSchema::Single),
            },
        };
        assert_eq!(towers.truncate(10, 5).rank(), nat(5));
        let fan = TreeSchema::OmegaJoin {
            rule: OmegaRule::AffineChain { mul: 1, add: 1 },
        };
        assert_eq!(fan.truncate(10, 8).rank(), nat(9));
        assert_eq!(fan.truncate(3, 8).rank(), nat(4));
        let full = TreeSchema::FullBranch;
        let t = full.truncate(4, 2);
        assert_eq!(t.len(), 5);
        assert_eq!(t.rank(), nat(5));
    }

    #[test]
    fn truncation_matches_contains() {
        let stacked = TreeSchema::OmegaJoin {
            rule: OmegaRule::Nested {
                mul: 1,
                add: 1,
                core: Box::new(TreeSchema::Join {
                    children: vec![TreeSchema::Empty, TreeSchema::chain(2)],
                }),
            },
        };
        let t = stacked.truncate(4, 3);
        for n in t.nodes() {
            assert!(stacked.contains(n), "truncation emitted {n:?}");
        }
        // spot checks both ways
        assert!(stacked.contains(&[2, 0, 0, 0, 1]));
        assert!(!stacked.contains(&[2, 0, 1]));
        assert!(t.contains(&[1, 0, 0]));
        assert!(!t.contains(&[1, 1]));
    }

    #[test]
    fn schema_contains_tower_paths() {
        let s = TreeSchema::OmegaJoin {
            rule: OmegaRule::Nested {
                mul: 2,
                add: 1,
                core: Box::new(TreeSchema::Join {
                    children: vec![TreeSchema::Empty, TreeSchema::Single],
                }),
            },
        };
        // child 1 carries a tower of 3 zeros, then the join core
        assert!(s.contains(&[1, 0, 0, 0]));
        assert!(s.contains(&[1, 0, 0, 0, 1]));
        assert!(!s.contains(&[1, 0, 0, 0, 0]));
        assert!(!s.contains(&[1, 0, 0, 1]));
    }

    #[test]
    fn konig_descends_least_branch() {
        let s = TreeSchema::Join {
            children: vec![TreeSchema::chain(3), TreeSchema::FullBranch],
        };
        assert_eq!(s.konig_prefix().unwrap(), vec![1]);
        assert_eq!(s.konig_branch(4).unwrap(), vec![1, 0, 0, 0]);
        assert_eq!(s.second_branch_prefix().unwrap(), None);

        let two = TreeSchema::Join {
            children: vec![TreeSchema::FullBranch, TreeSchema::FullBranch],
        };
        assert_eq!(two.konig_prefix().unwrap(), vec![0]);
        assert_eq!(two.second_branch_prefix().unwrap(), Some(vec![1]));

        let inf = TreeSchema::OmegaJoin {
            rule: OmegaRule::Constant {
                child: Box::new(TreeSchema::FullBranch),
            },
        };
        assert_eq!(inf.konig_prefix().unwrap(), vec![0]);
        assert_eq!(inf.second_branch_prefix().unwrap(), Some(vec![1]));
        assert_eq!(inf.branch_set(), BranchSet::Infinite);

        assert!(matches!(
            TreeSchema::chain(4).konig_prefix(),
            Err(Error::NoInfiniteBranch)
        ));
    }

    #[test]
    fn branch_surgery() {
        let s = TreeSchema::Join {
            children: vec![TreeSchema::FullBranch, TreeSchema::chain(2)],
        };
        assert_eq!(s.branch_set(), BranchSet::Finite(vec![vec![0]]));
        let cut = s.without_branch(&[0]).unwrap();
        assert!(cut.is_wellfounded());
        assert_eq!(cut.rank().unwrap(), nat(3));
        assert!(s.without_branch(&[1]).is_err());
    }

    #[test]
    fn path_schema_denotes_branch_prefixes() {
        let p = path_schema(&[2, 1]);
        assert!(p.contains(&[]));
        assert!(p.contains(&[2]));
        assert!(p.contains(&[2, 1]));
        assert!(p.contains(&[2, 1, 0, 0]));
        assert!(!p.contains(&[0]));
        assert!(!p.contains(&[2, 0]));
        assert!(!p.is_wellfounded());
        assert_eq!(p.konig_prefix().unwrap(), vec![2, 1]);
    }

    #[test]
    fn monotone_map_basics() {
        let c2 = TreeSchema::chain(2).truncate(5, 1);
        let c3 = TreeSchema::chain(3).truncate(5, 1);
        let m = find_monotone_map(&c2, &c3).unwrap();
        assert!(m.verify(&c2, &c3));
        assert!(find_monotone_map(&c3, &c2).is_none());
        assert!(exists_monotone_map_bruteforce(&c2, &c3));
        assert!(!exists_monotone_map_bruteforce(&c3, &c2));

        // wide source into a thin but tall target
        let wide = FinTree::from_paths([vec![0u64], vec![1], vec![2]]);
        let tall = FinTree::from_paths([vec![0u64, 0, 0]]);
        let m = find_monotone_map(&wide, &tall).unwrap();
        assert!(m.verify(&wide, &tall));
        assert!(find_monotone_map(&tall, &wide).is_none());
    }

    #[test]
    fn monotone_map_agrees_with_rank_order() {
        let samples = vec![
            FinTree::empty(),
            FinTree::from_paths::<_, Vec<u64>>([vec![]]),
            FinTree::from_paths([vec![0u64], vec![1]]),
            FinTree::from_paths([vec![0u64, 0], vec![1]]),
            FinTree::from_paths([vec![0u64, 0, 0]]),
            FinTree::from_paths([vec![0u64, 1], vec![2, 0], vec![0, 0]]),
        ];
        for a in &samples {
            for b in &samples {
                let found = find_monotone_map(a, b);
                let expect = a.rank() <= b.rank();
                assert_eq!(found.is_some(), expect, "{a:?} into {b:?}");
                assert_eq!(
                    exists_monotone_map_bruteforce(a, b),
                    expect,
                    "oracle on {a:?} into {b:?}"
                );
                if let Some(m) = found {
                    assert!(m.verify(a, b));
                }
            }
        }
    }

    #[test]
    fn serde_round_trips() {
        let t = FinTree::from_paths([vec![0u64, 1], vec![2]]);
        let js = serde_json::to_string(&t).unwrap();
        let back: FinTree = serde_json::from_str(&js).unwrap();
        assert_eq!(t, back);
        assert!(serde_json::from_str::<FinTree>(r#"{"nodes":[[0]]}"#).is_err());

        let s = TreeSchema::OmegaJoin {
            rule: OmegaRule::Nested {
                mul: 1,
                add: 0,
                core: Box::new(TreeSchema::Join {
                    children: vec![TreeSchema::Empty, TreeSchema::FullBranch],
                }),
            },
        };
        let js = serde_json::to_string(&s).unwrap();
        let back: TreeSchema = serde_json::from_str(&js).unwrap();
        assert_eq!(s, back);
    }

    #[test]
    fn child_schema_agrees_with_contains() {
        let s = TreeSchema::OmegaJoin {
            rule: OmegaRule::Nested {
                mul: 2,
                add: 1,
                core: Box::new(TreeSchema::Join {
                    children: vec![TreeSchema::Empty, TreeSchema::Single],
                }),
            },
        };
        for letter in 0..4u64 {
            let child = s.child_schema(letter, 6).unwrap();
            for path in [
                vec![],
                vec![0],
                vec![0, 0],
                vec![0, 1],
                vec![0, 0, 0],
                vec![0, 0, 1],
                vec![1],
            ] {
                let mut full = vec![letter];
                full.extend(&path);
                assert_eq!(
                    child.contains(&path),
                    s.contains(&full),
                    "letter {letter} path {path:?}"
                );
            }
        }
        assert!(TreeSchema::Single.child_schema(0, 4).is_none());
        assert_eq!(
            TreeSchema::chain(3).child_schema(0, 4),
            Some(TreeSchema::chain(2))
        );
    }

    #[test]
    fn infinite_and_wellfounded_flags() {
        assert!(!TreeSchema::chain(9).is_infinite());
        assert!(TreeSchema::FullBranch.is_infinite());
        let fan = TreeSchema::OmegaJoin {
            rule: OmegaRule::AffineChain { mul: 0, add: 2 },
        };
        assert!(fan.is_infinite());
        let lone = TreeSchema::OmegaJoin {
            rule: OmegaRule::Constant {
                child: Box::new(TreeSchema::Empty),
            },
        };
        assert!(!lone.is_infinite());
        assert!(lone.is_wellfounded());
        assert_eq!(lone.rank().unwrap(), nat(1));
    }
}
