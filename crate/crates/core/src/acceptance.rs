//! The advertised-guarantee suite: one deterministic check per claim the
//! library stands behind.  The command-line self test and the integration
//! suite both run these and print one line per criterion, so the reports
//! carry counts and witnesses but never timings.

use serde::{Deserialize, Serialize};

use crate::blocktrees::{
    block_member, blocks_increasing, branch_witness, monotone_reduction, truncate_tree, TreeKind,
    TruncationCaps,
};
use crate::cantor::{Cylinder, IndexSet, Point};
use crate::catalog::{DenseSequence, SymbolicFn};
use crate::convergence::{decide_convergence, decide_convergence_to, verify_verdict};
use crate::generators::{
    antichain_schema, canonical_trees, convergence_corpus, convergent_corpus, divergent_corpus,
    presentation_point, random_admissible_domain, random_fintree, random_ill_schema, random_point,
    random_presentation, random_wf_schema, seeded, tall_wf_schemas,
};
use crate::ordinals::Ordinal;
use crate::rank::{
    alpha_bruteforce, alpha_on, find_attaining_sub, point_death_stage, restrict_ball,
};
use crate::reductions::{h_image, verify_p1};
use crate::trees::find_monotone_map;
use crate::ratio;

pub const CRITERIA: usize = 10;

/// Outcome of one criterion run.  Details are deterministic for a fixed
/// seed: counts and first-failure witnesses, never wall-clock data.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: String,
    pub title: String,
    pub pass: bool,
    pub detail: String,
}

/// Outcome of one sampled case of the membership/convergence exchange.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CaseReport {
    pub case: String,
    pub pass: bool,
    pub detail: String,
}

pub fn run_all(seed: u64) -> Vec<CriterionReport> {
    (1..=CRITERIA).map(|n| run_criterion(n, seed)).collect()
}

pub fn run_criterion(index: usize, seed: u64) -> CriterionReport {
    let (title, outcome) = match index {
        1 => ("monotone maps respect tree rank", c1(seed)),
        2 => (
            "symbolic separation rank matches the finite oracle",
            c2(seed),
        ),
        3 => (
            "ranks are zero or successor, with attaining sub-copies",
            c3(seed),
        ),
        4 => (
            "points survive inside every window below their death stage",
            c4(seed),
        ),
        5 => (
            "node families converge to zero exactly on well-founded trees",
            c5(seed),
        ),
        6 => (
            "membership/convergence exchange on restricted split families",
            c6(seed),
        ),
        7 => (
            "divergence witnesses check out and truncations stabilize",
            c7(seed),
        ),
        8 => (
            "limit trees embed into block trees monotonically",
            c8(seed),
        ),
        9 => (
            "symbolic verdicts agree with the sampling oracle",
            c9(seed),
        ),
        10 => ("exchange-suite reports are deterministic", c10(seed)),
        _ => (
            "unknown criterion",
            (false, format!("no criterion number {index}")),
        ),
    };
    let (pass, detail) = outcome;
    CriterionReport {
        id: format!("criterion-{index}"),
        title: title.to_string(),
        pass,
        detail,
    }
}

fn c1(seed: u64) -> (bool, String) {
    let mut rng = seeded(seed.wrapping_add(1));
    for i in 0..200 {
        let s = random_fintree(&mut rng, 12);
        let t = random_fintree(&mut rng, 12);
        if let Some(map) = find_monotone_map(&s, &t) {
            if !map.verify(&s, &t) {
                return (false, format!("seeded pair {i}: map fails verification"));
            }
            if s.rank() > t.rank() {
                return (
                    false,
                    format!(
                        "seeded pair {i}: map exists but rank {} > {}",
                        s.rank(),
                        t.rank()
                    ),
                );
            }
        }
    }
    let all = canonical_trees(6);
    for (i, s) in all.iter().enumerate() {
        for (j, t) in all.iter().enumerate() {
            let found = find_monotone_map(s, t);
            if let Some(map) = &found {
                if !map.verify(s, t) {
                    return (false, format!("canonical pair ({i},{j}): bad map"));
                }
            }
            if found.is_some() != (s.rank() <= t.rank()) {
                return (
                    false,
                    format!(
                        "canonical pair ({i},{j}): witness {} but ranks {} vs {}",
                        found.is_some(),
                        s.rank(),
                        t.rank()
                    ),
                );
            }
        }
    }
    (
        true,
        format!(
            "200 seeded pairs sound; {n}x{n} canonical pairs complete",
            n = all.len()
        ),
    )
}

fn c2(seed: u64) -> (bool, String) {
    let mut rng = seeded(seed.wrapping_add(2));
    let (a, b) = (ratio(1, 3), ratio(2, 3));
    for i in 0..100 {
        let (shape, values) = random_presentation(&mut rng, 3, false);
        let alpha = match alpha_on(&shape, &values, a, b) {
            Ok(o) => o,
            Err(e) => return (false, format!("presentation {i}: {e}")),
        };
        if alpha > Ordinal::from_u64(6) {
            return (false, format!("presentation {i}: rank {alpha} above 6"));
        }
        match alpha_bruteforce(&shape, &values, a, b, 64) {
            Ok(brute) if brute == alpha => {}
            Ok(brute) => {
                return (
                    false,
                    format!("presentation {i}: symbolic {alpha} vs oracle {brute}"),
                )
            }
            Err(e) => return (false, format!("presentation {i}: oracle failed: {e}")),
        }
    }
    (true, "100 seeded presentations agree with the oracle".into())
}

fn c3(seed: u64) -> (bool, String) {
    let mut rng = seeded(seed.wrapping_add(3));
    let (a, b) = (ratio(1, 3), ratio(2, 3));
    let mut exhibited = 0;
    for i in 0..100 {
        let (shape, values) = random_presentation(&mut rng, 3, false);
        let alpha = match alpha_on(&shape, &values, a, b) {
            Ok(o) => o,
            Err(e) => return (false, format!("presentation {i}: {e}")),
        };
        if !alpha.is_zero() && !alpha.is_successor() {
            return (false, format!("presentation {i}: rank {alpha} is a limit"));
        }
        let Some(pred) = alpha.pred() else { continue };
        if pred.is_zero() {
            // rank one: the presentation itself is the stage-zero witness
            continue;
        }
        match find_attaining_sub(&shape, &values, a, b, &pred) {
            Ok(sub) => match alpha_on(&sub.shape, &sub.values, a, b) {
                Ok(got) if got == pred => exhibited += 1,
                Ok(got) => {
                    return (
                        false,
                        format!("presentation {i}: sub-copy rank {got}, want {pred}"),
                    )
                }
                Err(e) => return (false, format!("presentation {i}: sub-copy broken: {e}")),
            },
            Err(e) => {
                return (
                    false,
                    format!("presentation {i}: no attaining sub-copy at {pred}: {e}"),
                )
            }
        }
    }
    for i in 0..30 {
        let (shape, values) = random_presentation(&mut rng, 2, true);
        let alpha = match alpha_on(&shape, &values, a, b) {
            Ok(o) => o,
            Err(e) => return (false, format!("tower presentation {i}: {e}")),
        };
        if !alpha.is_zero() && !alpha.is_successor() {
            return (
                false,
                format!("tower presentation {i}: rank {alpha} is a limit"),
            );
        }
    }
    (
        true,
        format!("130 presentations zero-or-successor; {exhibited} attaining sub-copies shown"),
    )
}

fn c4(seed: u64) -> (bool, String) {
    let mut rng = seeded(seed.wrapping_add(4));
    let (a, b) = (ratio(1, 3), ratio(2, 3));
    for i in 0..100 {
        let (shape, values) = random_presentation(&mut rng, 3, true);
        let Some(x) = presentation_point(&mut rng, &shape, &values) else {
            return (false, format!("tuple {i}: presentation has no points"));
        };
        let death = match point_death_stage(&shape, &values, a, b, &x) {
            Ok(d) => d,
            Err(e) => return (false, format!("tuple {i}: {e}")),
        };
        // any stage strictly below the death stage keeps the point alive
        let xi = match death.pred() {
            Some(p) => p,
            None => Ordinal::from_u64(5),
        };
        for len in 0..=6 {
            let window = Cylinder::new(x.prefix_word(len));
            match restrict_ball(&shape, &values, a, b, &window, &xi, &x) {
                Ok(true) => {}
                Ok(false) => {
                    return (
                        false,
                        format!("tuple {i}: {x} gone from its own window at depth {len}, stage {xi}"),
                    )
                }
                Err(e) => return (false, format!("tuple {i}: {e}")),
            }
        }
    }
    (true, "100 tuples survive in all windows to depth 6".into())
}

fn c5(seed: u64) -> (bool, String) {
    let mut rng = seeded(seed.wrapping_add(5));
    let seq = DenseSequence::NodeIndicatorsByH;
    let mut schemas = tall_wf_schemas();
    while schemas.len() < 25 {
        schemas.push(random_wf_schema(&mut rng));
    }
    while schemas.len() < 50 {
        schemas.push(random_ill_schema(&mut rng));
    }
    for (i, tree) in schemas.iter().enumerate() {
        let codes = IndexSet::NodeSet { tree: tree.clone() };
        let converges = match decide_convergence_to(&seq, &codes, &SymbolicFn::Zero) {
            Ok(c) => c,
            Err(e) => return (false, format!("schema {i}: {e}")),
        };
        if converges != tree.is_wellfounded() {
            return (
                false,
                format!(
                    "schema {i}: converges-to-zero {} but well-founded {}",
                    converges,
                    tree.is_wellfounded()
                ),
            );
        }
    }
    (true, "50 schemas match the bridge (25 well-founded, 25 not)".into())
}

fn c6(seed: u64) -> (bool, String) {
    let image = h_image(&Point::zeros());
    match image.enumerate(4) {
        Ok(codes) if codes == [8, 16, 32, 64] => {}
        Ok(codes) => return (false, format!("image of 0* starts {codes:?}")),
        Err(e) => return (false, format!("image of 0*: {e}")),
    }
    let mut rng = seeded(seed.wrapping_add(6));
    let domains: Vec<_> = (0..10).map(|_| random_admissible_domain(&mut rng)).collect();
    let points: Vec<_> = (0..100).map(|_| random_point(&mut rng, 4, 2)).collect();
    for (i, x) in points.iter().enumerate() {
        for (j, set) in domains.iter().enumerate() {
            match verify_p1(x, set) {
                Ok(true) => {}
                Ok(false) => {
                    return (false, format!("point {i} domain {j}: exchange violated at {x}"))
                }
                Err(e) => return (false, format!("point {i} domain {j}: {e}")),
            }
        }
    }
    (true, "image prefix frozen; 100x10 exchanges hold".into())
}

fn c7(_seed: u64) -> (bool, String) {
    for (i, (seq, codes)) in divergent_corpus().iter().enumerate() {
        let bw = match branch_witness(seq, codes, 6) {
            Ok(bw) => bw,
            Err(e) => return (false, format!("divergent family {i}: {e}")),
        };
        for (j, node) in bw.nodes.iter().enumerate() {
            match block_member(seq, codes, bw.d, node) {
                Ok(true) => {}
                Ok(false) => {
                    return (
                        false,
                        format!("divergent family {i}: witness node {j} not a member"),
                    )
                }
                Err(e) => return (false, format!("divergent family {i}: node {j}: {e}")),
            }
        }
    }
    // The base index window must already saturate each family's separation
    // resolution (the stacked schema needs the deepest pool); from there the
    // height is pinned by the fixed ball universe and stays put as the
    // window doubles.  Depth 6 exceeds every intrinsic chain bound, so a
    // creeping height would be visible rather than masked by the depth cap.
    let base = TruncationCaps {
        index_count: 8,
        max_ball_word: 3,
        extra_blocks: Vec::new(),
        node_budget: 500_000,
    };
    for (i, (seq, codes)) in convergent_corpus().iter().enumerate() {
        let mut heights = Vec::new();
        let mut caps = base.clone();
        for _ in 0..3 {
            match truncate_tree(TreeKind::Block, seq, codes, None, 1, 6, &caps) {
                Ok(tr) => heights.push(tr.tree.height()),
                Err(e) => return (false, format!("convergent family {i}: {e}")),
            }
            caps = caps.doubled();
        }
        if heights[0] != heights[1] || heights[1] != heights[2] {
            return (
                false,
                format!("convergent family {i}: heights {heights:?} keep growing"),
            );
        }
    }
    (
        true,
        "10 divergence witnesses verified; 10 truncations stable under two cap doublings".into(),
    )
}

fn c8(_seed: u64) -> (bool, String) {
    let antichain = || IndexSet::NodeSet {
        tree: antichain_schema(),
    };
    let sets: Vec<IndexSet> = vec![
        antichain(),
        IndexSet::ExceptFinite {
            inner: Box::new(antichain()),
            drop: [0u64].into_iter().collect(),
        },
        IndexSet::ExceptFinite {
            inner: Box::new(antichain()),
            drop: [0u64, 2].into_iter().collect(),
        },
        IndexSet::Restrict {
            inner: Box::new(antichain()),
            min: 2,
        },
        IndexSet::Restrict {
            inner: Box::new(antichain()),
            min: 4,
        },
        IndexSet::Restrict {
            inner: Box::new(antichain()),
            min: 8,
        },
        IndexSet::ExceptFinite {
            inner: Box::new(IndexSet::Restrict {
                inner: Box::new(antichain()),
                min: 2,
            }),
            drop: [4u64].into_iter().collect(),
        },
    ];
    let caps = TruncationCaps {
        index_count: 8,
        max_ball_word: 4,
        extra_blocks: Vec::new(),
        node_budget: 200_000,
    };
    let seq = DenseSequence::NodeIndicatorsByH;
    let mut instances = 0;
    'outer: for d in 0..=2u64 {
        for (k, codes) in sets.iter().enumerate() {
            if instances == 20 {
                break 'outer;
            }
            instances += 1;
            let mr = match monotone_reduction(&seq, codes, &SymbolicFn::Zero, d, 4, &caps) {
                Ok(mr) => mr,
                Err(e) => return (false, format!("instance d={d} set {k}: {e}")),
            };
            if !mr.map.verify(&mr.source.tree, &mr.target.tree) {
                return (false, format!("instance d={d} set {k}: map fails verification"));
            }
            for (_, image) in &mr.pairs {
                if !blocks_increasing(&image.t) {
                    return (
                        false,
                        format!("instance d={d} set {k}: image blocks not increasing"),
                    );
                }
            }
            if mr.source.tree.rank() > mr.target.tree.rank() {
                return (
                    false,
                    format!(
                        "instance d={d} set {k}: source rank {} above target {}",
                        mr.source.tree.rank(),
                        mr.target.tree.rank()
                    ),
                );
            }
        }
    }
    (
        true,
        format!("{instances} reductions verified with increasing blocks and ordered ranks"),
    )
}

fn c9(_seed: u64) -> (bool, String) {
    let corpus = convergence_corpus();
    for (i, (seq, codes)) in corpus.iter().enumerate() {
        let verdict = match decide_convergence(seq, codes) {
            Ok(v) => v,
            Err(e) => return (false, format!("corpus {i}: {e}")),
        };
        if let Err(e) = verify_verdict(seq, codes, &verdict, 50, 6) {
            return (false, format!("corpus {i}: sampling disagrees: {e}"));
        }
    }
    (
        true,
        format!("{} corpus verdicts confirmed by sampling", corpus.len()),
    )
}

fn c10(seed: u64) -> (bool, String) {
    let first = p1_cases(20, seed);
    let second = p1_cases(20, seed);
    let a = serde_json::to_string(&first).expect("reports serialize");
    let b = serde_json::to_string(&second).expect("reports serialize");
    if a != b {
        return (false, "two runs with one seed differ".into());
    }
    if let Some(bad) = first.iter().find(|c| !c.pass) {
        return (false, format!("case {} failed: {}", bad.case, bad.detail));
    }
    (true, format!("{} cases, byte-identical reports", first.len()))
}

/// The per-case exchange suite behind `selftest --suite p1`: `samples`
/// sampled points, each checked against one of ten sampled domains.
pub fn p1_cases(samples: usize, seed: u64) -> Vec<CaseReport> {
    let mut rng = seeded(seed);
    let domains: Vec<_> = (0..10).map(|_| random_admissible_domain(&mut rng)).collect();
    (0..samples)
        .map(|i| {
            let x = random_point(&mut rng, 4, 2);
            let j = i % domains.len();
            let (pass, detail) = match verify_p1(&x, &domains[j]) {
                Ok(true) => (true, format!("x={x} domain={j}: exchange holds")),
                Ok(false) => (false, format!("x={x} domain={j}: exchange violated")),
                Err(e) => (false, format!("x={x} domain={j}: {e}")),
            };
            CaseReport {
                case: format!("p1-{i:03}"),
                pass,
                detail,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reports_carry_ids_and_titles() {
        let r = run_criterion(1, 7);
        assert_eq!(r.id, "criterion-1");
        assert!(!r.title.is_empty());
    }

    #[test]
    fn unknown_criteria_fail_loudly() {
        assert!(!run_criterion(11, 7).pass);
    }

    #[test]
    fn case_suite_is_deterministic() {
        assert_eq!(p1_cases(5, 3), p1_cases(5, 3));
    }
}
