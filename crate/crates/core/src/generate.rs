//! Seeded random networks with tree CPTs, for tests and benchmarks.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::model::{Cpt, CptTree, Distribution, Network, Node, Variable};

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub variables: usize,
    pub max_parents: usize,
    /// Chance that each earlier variable is offered as a parent.
    pub arc_probability: f64,
    /// Chance that a tree node splits on a further parent instead of ending in a leaf.
    pub split_probability: f64,
    /// Largest variable arity; arities are drawn from `2..=max_arity`.
    pub max_arity: usize,
    /// Leaf probabilities are drawn from this open interval (binary variables).
    pub leaf_range: (f64, f64),
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            variables: 6,
            max_parents: 3,
            arc_probability: 0.5,
            split_probability: 0.7,
            max_arity: 2,
            leaf_range: (0.05, 0.95),
        }
    }
}

fn name(i: usize) -> String {
    if i < 26 {
        ((b'A' + i as u8) as char).to_string()
    } else {
        format!("V{i}")
    }
}

fn variable(rng: &mut ChaCha8Rng, i: usize, max_arity: usize) -> Variable {
    let arity = rng.gen_range(2..=max_arity.max(2));
    if arity == 2 {
        Variable::binary(name(i))
    } else {
        let values: Vec<String> = (0..arity).map(|v| format!("v{v}")).collect();
        let refs: Vec<&str> = values.iter().map(String::as_str).collect();
        Variable::new(name(i), &refs)
    }
}

fn leaf(rng: &mut ChaCha8Rng, card: usize, (lo, hi): (f64, f64)) -> CptTree {
    if card == 2 {
        let p = rng.gen_range(lo..hi);
        return CptTree::leaf(vec![p, 1.0 - p]);
    }
    let raw: Vec<f64> = (0..card).map(|_| rng.gen_range(lo..hi)).collect();
    let z: f64 = raw.iter().sum();
    CptTree::Leaf(Distribution(raw.into_iter().map(|x| x / z).collect()))
}

fn tree(rng: &mut ChaCha8Rng, parents: &[&Variable], card: usize, cfg: &GenConfig, depth: usize) -> CptTree {
    if parents.is_empty() || (depth > 0 && !rng.gen_bool(cfg.split_probability)) {
        return leaf(rng, card, cfg.leaf_range);
    }
    let k = rng.gen_range(0..parents.len());
    let test = parents[k];
    let rest: Vec<&Variable> = parents.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, v)| *v).collect();
    CptTree::Node {
        test: test.name.clone(),
        branches: test
            .values
            .iter()
            .map(|v| (v.clone(), tree(rng, &rest, card, cfg, depth + 1)))
            .collect(),
    }
}

/// A random DAG over `cfg.variables` nodes (arcs go from lower to higher
/// index) with random tree CPTs. Trees need not test every declared parent.
pub fn random_tree_network(seed: u64, cfg: &GenConfig) -> Network {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vars: Vec<Variable> = (0..cfg.variables).map(|i| variable(&mut rng, i, cfg.max_arity)).collect();
    let mut nodes = Vec::with_capacity(vars.len());
    for (i, v) in vars.iter().enumerate() {
        let mut candidates: Vec<usize> = (0..i).filter(|_| rng.gen_bool(cfg.arc_probability)).collect();
        candidates.shuffle(&mut rng);
        candidates.truncate(cfg.max_parents);
        candidates.sort_unstable();
        let parents: Vec<&Variable> = candidates.iter().map(|&p| &vars[p]).collect();
        let t = tree(&mut rng, &parents, v.card(), cfg, 0);
        nodes.push(Node {
            var: v.name.clone(),
            parents: parents.iter().map(|p| p.name.clone()).collect(),
            cpt: Cpt::Tree(t),
            deterministic: false,
        });
    }
    Network::new(vars, nodes).expect("generated network is valid")
}

/// A random network whose skeleton has at least one loop.
pub fn random_loopy_network(seed: u64, variables: usize) -> Network {
    let cfg = GenConfig {
        variables,
        max_parents: 3,
        arc_probability: 0.45,
        ..GenConfig::default()
    };
    (0..)
        .map(|k| random_tree_network(seed.wrapping_mul(1_000_003).wrapping_add(k), &cfg))
        .find(|net| !net.is_singly_connected())
        .expect("some draw is loopy")
}
