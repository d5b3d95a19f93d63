#![allow(dead_code)]

use prefdb::models::{LabeledModel, MallowsModel};
use prefdb::patterns::{LabelPattern, PatternNode, PatternUnion};
use prefdb::rankings::{Label, LabelingFunction, Ranking};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const LABELS: [&str; 4] = ["p", "q", "r", "s"];

/// Random labeled Mallows model over 3 to 7 items with φ drawn from `phis`.
pub fn random_model(rng: &mut ChaCha8Rng, phis: &[f64]) -> LabeledModel {
    let m = rng.gen_range(3..=7);
    let mut items: Vec<String> = (0..m).map(|k| format!("i{k}")).collect();
    items.shuffle(rng);
    let phi = phis[rng.gen_range(0..phis.len())];
    let mut lam = LabelingFunction::new();
    for x in &items {
        for l in LABELS {
            if rng.gen_bool(0.4) {
                lam.add(x.as_str().into(), Label::new(l));
            }
        }
    }
    LabeledModel::new(MallowsModel::new(Ranking::new(items).unwrap(), phi).unwrap(), lam)
}

pub fn random_node(rng: &mut ChaCha8Rng) -> PatternNode {
    let k = if rng.gen_bool(0.75) { 1 } else { 2 };
    let labels: Vec<&str> = LABELS.choose_multiple(rng, k).copied().collect();
    PatternNode::new(labels).unwrap()
}

pub fn two_label_union(rng: &mut ChaCha8Rng) -> PatternUnion {
    let u = rng.gen_range(1..=3);
    let patterns = (0..u)
        .map(|_| LabelPattern::new(vec![random_node(rng), random_node(rng)], vec![(0, 1)]).unwrap())
        .collect();
    PatternUnion::new(patterns).unwrap()
}

pub fn bipartite_pattern(rng: &mut ChaCha8Rng) -> LabelPattern {
    let left = rng.gen_range(1..=2);
    let right = rng.gen_range(1..=2);
    let nodes: Vec<PatternNode> = (0..left + right).map(|_| random_node(rng)).collect();
    let mut edges = Vec::new();
    for a in 0..left {
        for b in left..left + right {
            if rng.gen_bool(0.6) {
                edges.push((a, b));
            }
        }
    }
    if edges.is_empty() {
        edges.push((0, left));
    }
    LabelPattern::new(nodes, edges).unwrap()
}

pub fn bipartite_union(rng: &mut ChaCha8Rng) -> PatternUnion {
    let u = rng.gen_range(1..=3);
    PatternUnion::new((0..u).map(|_| bipartite_pattern(rng)).collect()).unwrap()
}

pub fn general_union(rng: &mut ChaCha8Rng) -> PatternUnion {
    let u = rng.gen_range(1..=3);
    let patterns = (0..u)
        .map(|k| {
            if k == 0 || rng.gen_bool(0.5) {
                let nodes = vec![random_node(rng), random_node(rng), random_node(rng)];
                LabelPattern::new(nodes, vec![(0, 1), (1, 2)]).unwrap()
            } else {
                bipartite_pattern(rng)
            }
        })
        .collect();
    PatternUnion::new(patterns).unwrap()
}
