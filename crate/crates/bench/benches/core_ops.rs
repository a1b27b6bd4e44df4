//! Benchmarks for the expensive core paths: derivative-based tree
//! ranks, monotone-map search, separation ranks, convergence
//! decisions, and block-tree truncation.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use seprank_core::blocktrees::{truncate_tree, TreeKind, TruncationCaps};
use seprank_core::cantor::IndexSet;
use seprank_core::catalog::DenseSequence;
use seprank_core::convergence::decide_convergence;
use seprank_core::ordinals::Ordinal;
use seprank_core::rank::{alpha_full, build_rank_example, threshold_pairs, ExamplePattern};
use seprank_core::trees::{find_monotone_map, FinTree, OmegaRule, TreeSchema};

/// Disjoint chains of lengths 1..=n under distinct first letters.
fn fan(n: u64) -> FinTree {
    FinTree::from_paths((0..n).map(|i| {
        let mut path = vec![i];
        path.extend(std::iter::repeat(0).take(i as usize));
        path
    }))
}

fn antichain() -> TreeSchema {
    TreeSchema::OmegaJoin {
        rule: OmegaRule::Constant {
            child: Box::new(TreeSchema::Single),
        },
    }
}

fn bench_fin_tree_rank(c: &mut Criterion) {
    let tree = fan(20);
    c.bench_function("fin_tree_rank/fan_20", |b| {
        b.iter(|| black_box(&tree).rank())
    });
}

fn bench_monotone_map(c: &mut Criterion) {
    let source = fan(12);
    let target = fan(14);
    c.bench_function("find_monotone_map/fan_12_into_fan_14", |b| {
        b.iter(|| find_monotone_map(black_box(&source), black_box(&target)).is_some())
    });
}

fn bench_alpha_full(c: &mut Criterion) {
    let example = build_rank_example(&Ordinal::from_u64(6), ExamplePattern::LowApex)
        .expect("stage 6 example");
    let pairs = threshold_pairs(&example.values);
    c.bench_function("alpha_full/stage_6", |b| {
        b.iter(|| {
            alpha_full(
                black_box(&example.shape),
                black_box(&example.values),
                black_box(&pairs),
            )
            .expect("rank computes")
        })
    });
}

fn bench_decide_convergence(c: &mut Criterion) {
    let seq = DenseSequence::NodeIndicatorsByH;
    let codes = IndexSet::NodeSet { tree: antichain() };
    c.bench_function("decide_convergence/antichain_nodes", |b| {
        b.iter(|| decide_convergence(black_box(&seq), black_box(&codes)).expect("decides"))
    });
}

fn bench_truncate_tree(c: &mut Criterion) {
    let seq = DenseSequence::NodeIndicatorsByH;
    let codes = IndexSet::NodeSet { tree: antichain() };
    let caps = TruncationCaps {
        index_count: 5,
        max_ball_word: 4,
        extra_blocks: vec![],
        node_budget: 50_000,
    };
    c.bench_function("truncate_tree/antichain_depth_3", |b| {
        b.iter(|| {
            truncate_tree(
                TreeKind::Block,
                black_box(&seq),
                black_box(&codes),
                None,
                1,
                3,
                black_box(&caps),
            )
            .expect("truncates")
        })
    });
}

criterion_group!(
    benches,
    bench_fin_tree_rank,
    bench_monotone_map,
    bench_alpha_full,
    bench_decide_convergence,
    bench_truncate_tree
);
criterion_main!(benches);
