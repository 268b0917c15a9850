//! Fixture loading and brute-force oracles shared by the acceptance suite.

use std::path::PathBuf;

use csibn_core::{parse_network, tree_lookup, Context, CutsetTree, Network};

pub const FIXTURES: &[&str] = &[
    "chain.json",
    "diamond.json",
    "fig1.json",
    "fig2.json",
    "fig3.json",
    "polytree.json",
];

fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn fixture(name: &str) -> Network {
    let text = std::fs::read_to_string(fixture_path(name)).unwrap();
    parse_network(&text).unwrap_or_else(|e| panic!("{name}: {e}"))
}

/// The hand-built U / V / W cutset for fig1.json.
pub fn fig1_cutset() -> CutsetTree {
    let text = std::fs::read_to_string(fixture_path("fig1_cutset.json")).unwrap();
    serde_json::from_str(&text).unwrap()
}

pub fn names(net: &Network) -> Vec<String> {
    net.variables().iter().map(|v| v.name.clone()).collect()
}

/// Every full assignment to `vars`, first variable slowest.
pub fn assignments(net: &Network, vars: &[String]) -> Vec<Context> {
    let mut out = vec![Context::new()];
    for v in vars {
        let values = &net.variable(v).unwrap().values;
        out = out
            .into_iter()
            .flat_map(|c| values.iter().map(move |x| c.with(v, x)))
            .collect();
    }
    out
}

/// Joint probability of a full assignment, read directly off the CPT-trees.
pub fn joint(net: &Network, full: &Context) -> f64 {
    net.variables()
        .iter()
        .map(|v| {
            let tree = net.tree_of(&v.name).unwrap();
            let idx = v.value_index(full.get(&v.name).unwrap()).unwrap();
            tree_lookup(&tree, full).unwrap().probs()[idx]
        })
        .product()
}

/// P(target | evidence) by brute-force summation; `None` for impossible evidence.
pub fn posterior(net: &Network, target: &str, evidence: &Context) -> Option<Vec<f64>> {
    let var = net.variable(target).unwrap();
    let mut w = vec![0.0; var.card()];
    for full in assignments(net, &names(net)) {
        if evidence.is_consistent_with(&full) {
            w[var.value_index(full.get(target).unwrap()).unwrap()] += joint(net, &full);
        }
    }
    let z: f64 = w.iter().sum();
    (z > 0.0).then(|| w.into_iter().map(|x| x / z).collect())
}
