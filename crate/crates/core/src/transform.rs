//! Multiplexer decomposition of tree CPTs and join-tree clique metrics.
//!
//! A node `X` whose tree tests `A` at the root is split into one conditional
//! node `X@A=a` per value of `A`, each carrying the matching subtree, and `X`
//! becomes a deterministic multiplexer that copies `X@A=a` when `A = a`.

use serde::Serialize;
use thiserror::Error;

use crate::graph::UGraph;
use crate::model::{
    tree_size, Cpt, CptTable, CptTree, Distribution, ModelError, Network, Node, Variable,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransformError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("`{0}` does not have a tree CPT")]
    NotATree(String),
    #[error("the CPT-tree of `{0}` is a single leaf")]
    LeafRoot(String),
    #[error("introduced name `{0}` collides with an existing variable")]
    NameCollision(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// True when every root-to-leaf path tests the same variables in the same
/// order. Leaves are full trees of depth zero.
pub fn is_full_tree(t: &CptTree) -> bool {
    t.uniform_test_sequence().is_some()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionalNode {
    pub name: String,
    pub parents: Vec<String>,
    /// Leaf count of the node's tree.
    pub size: usize,
}

/// One application of [`decompose_node`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecompositionReport {
    pub node: String,
    pub selector: String,
    pub conditional: Vec<ConditionalNode>,
    /// The decomposed node, now a multiplexer.
    pub multiplexer: String,
    pub multiplexer_rows: usize,
    /// Rows of the equivalent full table over the original parents.
    pub table_entries_before: usize,
    /// Leaves of the original tree.
    pub tree_entries_before: usize,
    /// Sum of the conditional nodes' sizes.
    pub total_after: usize,
}

fn conditional_name(x: &str, var: &str, value: &str) -> String {
    if x.contains('@') {
        format!("{x},{var}={value}")
    } else {
        format!("{x}@{var}={value}")
    }
}

/// Splits `x` on the variable tested at the root of its tree.
pub fn decompose_node(net: &Network, x: &str) -> Result<(Network, DecompositionReport), TransformError> {
    let node = net
        .node(x)
        .ok_or_else(|| TransformError::UnknownVariable(x.to_string()))?;
    let xvar = net
        .variable(x)
        .ok_or_else(|| TransformError::UnknownVariable(x.to_string()))?;
    let Cpt::Tree(tree) = &node.cpt else {
        return Err(TransformError::NotATree(x.to_string()));
    };
    let CptTree::Node { test, branches } = tree else {
        return Err(TransformError::LeafRoot(x.to_string()));
    };
    let selector = net
        .variable(test)
        .ok_or_else(|| TransformError::UnknownVariable(test.clone()))?;

    let mut new_vars = Vec::new();
    let mut new_nodes = Vec::new();
    let mut conditional = Vec::new();
    for value in &selector.values {
        let subtree = tree
            .branch(value)
            .ok_or_else(|| TransformError::Model(ModelError::UnknownValue {
                var: test.clone(),
                value: value.clone(),
            }))?;
        let name = conditional_name(x, test, value);
        if net.variable(&name).is_some() {
            return Err(TransformError::NameCollision(name));
        }
        let tested = subtree.tested_vars();
        let parents: Vec<String> = node
            .parents
            .iter()
            .filter(|p| tested.contains(*p))
            .cloned()
            .collect();
        conditional.push(ConditionalNode {
            name: name.clone(),
            parents: parents.clone(),
            size: tree_size(subtree),
        });
        new_vars.push(Variable {
            name: name.clone(),
            values: xvar.values.clone(),
        });
        new_nodes.push(Node {
            var: name,
            parents,
            cpt: Cpt::Tree(subtree.clone()),
            deterministic: false,
        });
    }
    debug_assert_eq!(branches.len(), selector.card());

    // Rows over (selector, X@.=a1, X@.=a2, ...), last parent fastest.
    let k = xvar.card();
    let n_cond = selector.card();
    let rows_per_selector = k.pow(n_cond as u32);
    let mut rows = Vec::with_capacity(n_cond * rows_per_selector);
    for a in 0..n_cond {
        for r in 0..rows_per_selector {
            // Digit `a` (from the most significant end) of `r` in base k.
            let value = (r / k.pow((n_cond - 1 - a) as u32)) % k;
            rows.push(Distribution::point(k, value));
        }
    }
    let multiplexer_rows = rows.len();
    let mut mux_parents = vec![test.clone()];
    mux_parents.extend(conditional.iter().map(|c| c.name.clone()));
    let multiplexer = Node {
        var: x.to_string(),
        parents: mux_parents,
        cpt: Cpt::Table(CptTable { rows }),
        deterministic: true,
    };

    let mut variables = Vec::with_capacity(net.len() + new_vars.len());
    for v in net.variables() {
        if v.name == x {
            variables.extend(new_vars.iter().cloned());
        }
        variables.push(v.clone());
    }
    let mut nodes = Vec::with_capacity(net.len() + new_nodes.len());
    for n in net.nodes() {
        if n.var == x {
            nodes.extend(new_nodes.iter().cloned());
            nodes.push(multiplexer.clone());
        } else {
            nodes.push(n.clone());
        }
    }
    let out = Network::new(variables, nodes)?;

    let table_entries_before = node.parents.iter().map(|p| net.card(p)).product();
    let total_after = conditional.iter().map(|c| c.size).sum();
    let report = DecompositionReport {
        node: x.to_string(),
        selector: test.clone(),
        conditional,
        multiplexer: x.to_string(),
        multiplexer_rows,
        table_entries_before,
        tree_entries_before: tree_size(tree),
        total_after,
    };
    Ok((out, report))
}

fn needs_split(net: &Network, x: &str) -> bool {
    matches!(net.node(x).map(|n| &n.cpt), Some(Cpt::Tree(t)) if !is_full_tree(t))
}

fn decompose_rec(
    net: Network,
    x: &str,
    reports: &mut Vec<DecompositionReport>,
) -> Result<Network, TransformError> {
    if !needs_split(&net, x) {
        return Ok(net);
    }
    let (mut net, report) = decompose_node(&net, x)?;
    let introduced: Vec<String> = report.conditional.iter().map(|c| c.name.clone()).collect();
    reports.push(report);
    for c in introduced {
        net = decompose_rec(net, &c, reports)?;
    }
    Ok(net)
}

/// Decomposes every tree CPT that is not full, recursing into the introduced
/// conditional nodes, until only full trees and multiplexers (tables) remain.
/// Nodes are visited in topological order.
pub fn decompose_network(net: &Network) -> Result<(Network, Vec<DecompositionReport>), TransformError> {
    let order = net
        .topological_order()
        .ok_or_else(|| TransformError::Model(ModelError::Invalid(crate::model::validate(net))))?;
    let mut reports = Vec::new();
    let mut out = net.clone();
    for x in order {
        out = decompose_rec(out, &x, &mut reports)?;
    }
    Ok((out, reports))
}

/// Cliques of a min-fill triangulation of the moral graph.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliqueReport {
    pub elimination_order: Vec<String>,
    /// Maximal cliques in the order they were formed; members in declaration order.
    pub cliques: Vec<Vec<String>>,
    /// Largest sum of log2 |val| over a clique's members.
    pub max_clique_weight: f64,
    /// Sum over cliques of the product of member cardinalities.
    pub total_table_weight: f64,
}

impl CliqueReport {
    pub fn max_clique_size(&self) -> usize {
        self.cliques.iter().map(Vec::len).max().unwrap_or(0)
    }
}

pub fn clique_report(net: &Network) -> CliqueReport {
    let n = net.len();
    let mut g = UGraph::new(n);
    for node in net.nodes() {
        let Some(x) = net.var_index(&node.var) else { continue };
        let mut family = vec![x];
        family.extend(node.parents.iter().filter_map(|p| net.var_index(p)));
        g.add_clique(&family);
    }
    let names: Vec<&str> = net.variables().iter().map(|v| v.name.as_str()).collect();
    let all: Vec<usize> = (0..n).collect();
    let (order, raw) = g.min_fill_order(&all, &names);

    let sets: Vec<Vec<usize>> = raw
        .into_iter()
        .map(|mut c| {
            c.sort_unstable();
            c
        })
        .collect();
    let subset = |a: &[usize], b: &[usize]| a.iter().all(|x| b.binary_search(x).is_ok());
    let mut maximal: Vec<Vec<usize>> = Vec::new();
    for (i, c) in sets.iter().enumerate() {
        let dominated = sets.iter().enumerate().any(|(j, d)| {
            j != i && subset(c, d) && (c.len() < d.len() || j < i)
        });
        if !dominated {
            maximal.push(c.clone());
        }
    }

    let card = |i: usize| net.variables()[i].card() as f64;
    let max_clique_weight = maximal
        .iter()
        .map(|c| c.iter().map(|&i| card(i).log2()).sum::<f64>())
        .fold(0.0, f64::max);
    let total_table_weight = maximal
        .iter()
        .map(|c| c.iter().map(|&i| card(i)).product::<f64>())
        .sum();
    CliqueReport {
        elimination_order: order.iter().map(|&i| names[i].to_string()).collect(),
        cliques: maximal
            .iter()
            .map(|c| c.iter().map(|&i| names[i].to_string()).collect())
            .collect(),
        max_clique_weight,
        total_table_weight,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leaf(p: f64) -> CptTree {
        CptTree::leaf(vec![p, 1.0 - p])
    }

    fn root(name: &str) -> Node {
        Node {
            var: name.into(),
            parents: vec![],
            cpt: Cpt::Tree(leaf(0.5)),
            deterministic: false,
        }
    }

    fn two_leaf_net() -> Network {
        Network::new(
            vec![Variable::binary("A"), Variable::binary("X")],
            vec![
                root("A"),
                Node {
                    var: "X".into(),
                    parents: vec!["A".into()],
                    cpt: Cpt::Tree(CptTree::node("A", vec![("t", leaf(0.9)), ("f", leaf(0.3))])),
                    deterministic: false,
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn leaves_and_full_trees() {
        assert!(is_full_tree(&leaf(0.5)));
        let full = CptTree::node(
            "B1",
            vec![
                ("t", CptTree::node("B2", vec![("t", leaf(0.1)), ("f", leaf(0.2))])),
                ("f", CptTree::node("B2", vec![("t", leaf(0.3)), ("f", leaf(0.4))])),
            ],
        );
        assert!(is_full_tree(&full));
        let ragged = CptTree::node(
            "B1",
            vec![("t", CptTree::node("B2", vec![("t", leaf(0.1)), ("f", leaf(0.2))])), ("f", leaf(0.3))],
        );
        assert!(!is_full_tree(&ragged));
    }

    #[test]
    fn single_leaf_subtrees() {
        let (out, report) = decompose_node(&two_leaf_net(), "X").unwrap();
        assert_eq!(report.conditional.len(), 2);
        assert!(report.conditional.iter().all(|c| c.parents.is_empty() && c.size == 1));
        assert_eq!(report.multiplexer_rows, 8);
        let x = out.node("X").unwrap();
        assert_eq!(x.parents, vec!["A", "X@A=t", "X@A=f"]);
        assert!(x.deterministic);
        // Row bits are (A, X@A=t, X@A=f) with 0 = t.
        let Cpt::Table(tab) = &x.cpt else { panic!() };
        assert_eq!(tab.rows[0b010].probs(), &[0.0, 1.0]);
        assert_eq!(tab.rows[0b001].probs(), &[1.0, 0.0]);
        assert_eq!(tab.rows[0b110].probs(), &[1.0, 0.0]);
        assert_eq!(tab.rows[0b101].probs(), &[0.0, 1.0]);
    }

    #[test]
    fn leaf_root_rejected() {
        let net = two_leaf_net();
        assert_eq!(
            decompose_node(&net, "A").unwrap_err(),
            TransformError::LeafRoot("A".into())
        );
    }

    #[test]
    fn chain_cliques() {
        let mut b = root("B");
        b.parents = vec!["A".into()];
        b.cpt = Cpt::Tree(CptTree::node("A", vec![("t", leaf(0.9)), ("f", leaf(0.3))]));
        let mut c = b.clone();
        c.var = "C".into();
        c.parents = vec!["B".into()];
        c.cpt = Cpt::Tree(CptTree::node("B", vec![("t", leaf(0.9)), ("f", leaf(0.3))]));
        let net = Network::new(
            vec![Variable::binary("A"), Variable::binary("B"), Variable::binary("C")],
            vec![root("A"), b, c],
        )
        .unwrap();
        let r = clique_report(&net);
        assert_eq!(r.cliques, vec![vec!["A", "B"], vec!["B", "C"]]);
        assert_eq!(r.max_clique_weight, 2.0);
        assert_eq!(r.total_table_weight, 8.0);
    }
}
