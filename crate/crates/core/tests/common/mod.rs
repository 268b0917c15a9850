#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use csibn_core::{parse_network, tree_lookup, Context, Network};

pub const FIXTURES: &[&str] = &[
    "chain.json",
    "diamond.json",
    "fig1.json",
    "fig2.json",
    "fig3.json",
    "polytree.json",
];

pub fn fixture(name: &str) -> Network {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name);
    let text = std::fs::read_to_string(&path).unwrap();
    parse_network(&text).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn all_fixtures() -> Vec<(&'static str, Network)> {
    FIXTURES.iter().map(|n| (*n, fixture(n))).collect()
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

pub fn names(net: &Network) -> Vec<String> {
    net.variables().iter().map(|v| v.name.clone()).collect()
}

/// Joint probability straight from the CPT-trees.
pub fn joint(net: &Network, full: &Context) -> f64 {
    net.variables()
        .iter()
        .map(|v| {
            let tree = net.tree_of(&v.name).unwrap();
            let dist = tree_lookup(&tree, full).unwrap();
            let idx = v.value_index(full.get(&v.name).unwrap()).unwrap();
            dist.probs()[idx]
        })
        .product()
}

/// P(target | evidence) by summing the brute-force joint. `None` when the
/// evidence has probability zero.
pub fn posterior(net: &Network, target: &str, evidence: &Context) -> Option<Vec<f64>> {
    let var = net.variable(target).unwrap();
    let mut w = vec![0.0; var.card()];
    for full in assignments(net, &names(net)) {
        if !evidence.is_consistent_with(&full) {
            continue;
        }
        let k = var.value_index(full.get(target).unwrap()).unwrap();
        w[k] += joint(net, &full);
    }
    let z: f64 = w.iter().sum();
    (z > 0.0).then(|| w.into_iter().map(|x| x / z).collect())
}

/// d-separation by moralizing the ancestral graph of X ∪ Y ∪ Z, deleting Z and
/// checking connectivity.
pub fn dsep_moral(net: &Network, xs: &[&str], ys: &[&str], zs: &[&str]) -> bool {
    let mut anc: BTreeSet<String> = BTreeSet::new();
    let mut stack: Vec<String> = xs.iter().chain(ys).chain(zs).map(|s| s.to_string()).collect();
    while let Some(v) = stack.pop() {
        if anc.insert(v.clone()) {
            stack.extend(net.parents(&v).iter().cloned());
        }
    }
    let mut adj: BTreeMap<String, BTreeSet<String>> = anc.iter().map(|v| (v.clone(), BTreeSet::new())).collect();
    for v in &anc {
        let ps = net.parents(v);
        for p in ps {
            adj.get_mut(v).unwrap().insert(p.clone());
            adj.get_mut(p).unwrap().insert(v.clone());
        }
        for a in ps {
            for b in ps {
                if a != b {
                    adj.get_mut(a).unwrap().insert(b.clone());
                }
            }
        }
    }
    let blocked: BTreeSet<&str> = zs.iter().copied().collect();
    let targets: BTreeSet<&str> = ys.iter().copied().collect();
    let mut seen: BTreeSet<String> = BTreeSet::new();
    let mut stack: Vec<String> = xs.iter().map(|s| s.to_string()).collect();
    while let Some(v) = stack.pop() {
        if targets.contains(v.as_str()) {
            return false;
        }
        if !seen.insert(v.clone()) {
            continue;
        }
        for u in &adj[&v] {
            if !blocked.contains(u.as_str()) && !seen.contains(u) {
                stack.push(u.clone());
            }
        }
    }
    true
}

/// True when the undirected graph on `nodes` with `edges` has a cycle.
pub fn has_cycle(nodes: &[String], edges: &[(String, String)]) -> bool {
    let mut adj: BTreeMap<&str, Vec<(&str, usize)>> = nodes.iter().map(|n| (n.as_str(), vec![])).collect();
    for (i, (a, b)) in edges.iter().enumerate() {
        adj.get_mut(a.as_str()).unwrap().push((b.as_str(), i));
        adj.get_mut(b.as_str()).unwrap().push((a.as_str(), i));
    }
    let mut visited: BTreeSet<&str> = BTreeSet::new();
    for start in nodes {
        if visited.contains(start.as_str()) {
            continue;
        }
        // (node, edge used to reach it)
        let mut stack = vec![(start.as_str(), usize::MAX)];
        while let Some((v, via)) = stack.pop() {
            if !visited.insert(v) {
                return true;
            }
            for &(u, e) in &adj[v] {
                if e == via {
                    continue;
                }
                if visited.contains(u) {
                    return true;
                }
                stack.push((u, e));
            }
        }
    }
    false
}

/// Residual graph of a branch: variables bound by `branch` lose their outgoing
/// arcs, and arcs that are vacuous under the branch (the parent occurs on no
/// consistent path of the child's tree) are removed.
pub fn branch_residual(net: &Network, branch: &Context) -> (Vec<String>, Vec<(String, String)>) {
    let mut edges = Vec::new();
    for v in net.variables() {
        let tree = net.tree_of(&v.name).unwrap();
        for p in net.parents(&v.name) {
            if branch.binds(p) {
                continue;
            }
            if tree.occurs_consistent(p, branch) {
                edges.push((p.clone(), v.name.clone()));
            }
        }
    }
    (names(net), edges)
}

/// The hand-built cutset for fig1.json: U; {t} stops, {f} continues with V then W.
pub fn fig1_cutset() -> csibn_core::CutsetTree {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/fig1_cutset.json");
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}
