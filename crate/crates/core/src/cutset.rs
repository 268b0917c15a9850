//! Tree-structured conditional cutsets.
//!
//! A conditional cutset instantiates different variables on different branches:
//! once a value makes some arcs vacuous, fewer further variables are needed to
//! break the remaining loops. Construction is greedy on `w(X) / d'(X)`, where
//! `w` is the log-cardinality of `X` and `d'` the expected number of arcs cut
//! by instantiating it, estimated from the sizes of the children's reduced
//! CPT-trees.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{tree_size, Context, Cpt, ModelError, Network, Node, TreeShape, Variable};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CutsetError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("`{parent}` is not a parent of `{child}`")]
    NotAParent { parent: String, child: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Cost of adding `x` to a cutset: log2 |val(x)|.
pub fn weight(x: &Variable) -> f64 {
    (x.card() as f64).log2()
}

/// `w`, `d'` and their ratio for one variable. The ratio is infinite when
/// `d'` is zero.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeuristicScore {
    pub variable: String,
    pub weight: f64,
    pub deletion: f64,
    pub ratio: f64,
}

/// The network conditioned on `ctx`: every CPT is reduced by the bound parents
/// and each node keeps only the parents its reduced tree still tests. Arcs out
/// of bound variables and arcs vacuous under `ctx` disappear; bound variables
/// keep their incoming arcs.
pub fn condition(net: &Network, ctx: &Context) -> Network {
    let nodes = net
        .nodes()
        .iter()
        .map(|node| {
            let tree = net.tree_of(&node.var).expect("node of a valid network");
            let local = ctx.restrict(node.parents.iter().map(String::as_str));
            let reduced = tree.reduce(&local);
            let tested = reduced.tested_vars();
            Node {
                var: node.var.clone(),
                parents: node
                    .parents
                    .iter()
                    .filter(|p| tested.contains(*p))
                    .cloned()
                    .collect(),
                cpt: Cpt::Tree(reduced),
                deterministic: node.deterministic,
            }
        })
        .collect();
    Network::new_unchecked(net.variables().to_vec(), nodes)
}

/// A network restricted to an active subset of its variables.
struct View<'a> {
    net: &'a Network,
    active: Vec<bool>,
}

impl<'a> View<'a> {
    fn all(net: &'a Network) -> Self {
        View {
            net,
            active: vec![true; net.len()],
        }
    }

    fn is_active(&self, name: &str) -> bool {
        self.net.var_index(name).is_some_and(|i| self.active[i])
    }

    fn parents(&self, v: &str) -> Vec<&'a str> {
        self.net
            .parents(v)
            .iter()
            .map(String::as_str)
            .filter(|p| self.is_active(p))
            .collect()
    }

    fn children(&self, x: &str) -> Vec<&'a str> {
        self.net
            .children(x)
            .into_iter()
            .filter(|c| self.is_active(c))
            .collect()
    }

    fn expected_parents(&self, v: &str, x: &str, xi: &str) -> f64 {
        let parents = self.parents(v);
        if parents.len() <= 1 {
            return 0.0;
        }
        let tree = self.net.tree_of(v).expect("known node");
        let reduced_size = tree_size(&tree.reduce(&Context::new().with(x, xi))) as f64;
        let sum: f64 = parents
            .iter()
            .filter(|a| **a != x)
            .map(|a| reduced_size.ln() / (self.net.card(a) as f64).ln())
            .sum();
        sum / (parents.len() - 1) as f64
    }

    fn arc_deletion_score(&self, x: &str) -> f64 {
        let var = self.net.variable(x).expect("known variable");
        let mut total = 0.0;
        for v in self.children(x) {
            let np = self.parents(v).len() as f64;
            for xi in &var.values {
                total += np - self.expected_parents(v, x, xi);
            }
        }
        (total / var.card() as f64).max(0.0)
    }

    fn score(&self, x: &str) -> HeuristicScore {
        let var = self.net.variable(x).expect("known variable");
        let w = weight(var);
        let d = self.arc_deletion_score(x);
        HeuristicScore {
            variable: x.to_string(),
            weight: w,
            deletion: d,
            ratio: if d > 0.0 { w / d } else { f64::INFINITY },
        }
    }

    /// Repeatedly deactivates nodes with at most one active neighbour.
    fn strip(&mut self) {
        let adj = self.net.skeleton();
        loop {
            let mut changed = false;
            for v in 0..adj.len() {
                if !self.active[v] {
                    continue;
                }
                let degree = adj[v].iter().filter(|&&u| self.active[u]).count();
                if degree <= 1 {
                    self.active[v] = false;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
    }

    fn active_names(&self) -> Vec<&'a str> {
        self.net
            .variables()
            .iter()
            .enumerate()
            .filter(|(i, _)| self.active[*i])
            .map(|(_, v)| v.name.as_str())
            .collect()
    }

    /// Active arcs plus the tree shape of every active node: two instantiations
    /// with equal signatures have the same structural effect.
    fn signature(&self) -> (Vec<(String, String)>, Vec<TreeShape>) {
        let mut arcs = Vec::new();
        let mut shapes = Vec::new();
        for v in self.active_names() {
            for p in self.parents(v) {
                arcs.push((p.to_string(), v.to_string()));
            }
            shapes.push(self.net.tree_of(v).expect("known node").shape());
        }
        (arcs, shapes)
    }
}

/// Expected number of parents of `v` once `x = xi` is known:
/// the average over the other parents `A` of `log_{|val(A)|} t(v, x = xi)`,
/// with `t` the leaf count of the reduced tree. Zero when `x` is the only parent.
pub fn expected_parents(net: &Network, v: &str, x: &str, xi: &str) -> Result<f64, CutsetError> {
    let node = net
        .node(v)
        .ok_or_else(|| CutsetError::UnknownVariable(v.to_string()))?;
    if !node.parents.iter().any(|p| p == x) {
        return Err(CutsetError::NotAParent {
            parent: x.to_string(),
            child: v.to_string(),
        });
    }
    Context::new().with(x, xi).check(net)?;
    Ok(View::all(net).expected_parents(v, x, xi))
}

/// Expected number of arcs deleted by instantiating `x` (the `d'` score).
/// Clamped at zero: with mixed parent arities the raw estimate can go negative.
pub fn arc_deletion_score(net: &Network, x: &str) -> Result<f64, CutsetError> {
    if net.variable(x).is_none() {
        return Err(CutsetError::UnknownVariable(x.to_string()));
    }
    Ok(View::all(net).arc_deletion_score(x))
}

/// Heuristic scores of every variable, in declaration order.
pub fn scores(net: &Network) -> Vec<HeuristicScore> {
    let view = View::all(net);
    net.variables().iter().map(|v| view.score(&v.name)).collect()
}

/// What is left after stripping singly-connected nodes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Residual {
    /// Remaining variables in declaration order.
    pub nodes: Vec<String>,
    /// Remaining `(parent, child)` arcs.
    pub arcs: Vec<(String, String)>,
}

impl Residual {
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Iteratively removes nodes with at most one neighbour in the skeleton. An
/// empty residual means the network is singly connected.
pub fn strip_singly_connected(net: &Network) -> Residual {
    let mut view = View::all(net);
    view.strip();
    let nodes: Vec<&str> = view.active_names();
    let arcs = nodes
        .iter()
        .flat_map(|v| view.parents(v).into_iter().map(move |p| (p.to_string(), v.to_string())))
        .collect();
    Residual {
        nodes: nodes.into_iter().map(String::from).collect(),
        arcs,
    }
}

/// A conditional cutset. Arc value sets partition the tested variable's values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CutsetTree {
    Node { test: String, arcs: Vec<CutsetArc> },
    Empty,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CutsetArc {
    pub values: Vec<String>,
    pub child: CutsetTree,
}

impl CutsetTree {
    /// The standard cutset over `vars` as a full tree: one arc per value, no
    /// merging.
    pub fn flat(net: &Network, vars: &[&str]) -> Result<CutsetTree, CutsetError> {
        let Some((first, rest)) = vars.split_first() else {
            return Ok(CutsetTree::Empty);
        };
        let var = net
            .variable(first)
            .ok_or_else(|| CutsetError::UnknownVariable(first.to_string()))?;
        let child = CutsetTree::flat(net, rest)?;
        Ok(CutsetTree::Node {
            test: first.to_string(),
            arcs: var
                .values
                .iter()
                .map(|v| CutsetArc {
                    values: vec![v.clone()],
                    child: child.clone(),
                })
                .collect(),
        })
    }

    /// Every variable tested somewhere in the tree.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        let mut stack = vec![self];
        while let Some(t) = stack.pop() {
            if let CutsetTree::Node { test, arcs } = t {
                out.insert(test.clone());
                stack.extend(arcs.iter().map(|a| &a.child));
            }
        }
        out
    }

    /// Number of branch contexts, i.e. solver calls in cutset conditioning.
    pub fn branch_count(&self) -> usize {
        match self {
            CutsetTree::Empty => 1,
            CutsetTree::Node { arcs, .. } => arcs
                .iter()
                .map(|a| a.values.len() * a.child.branch_count())
                .sum(),
        }
    }

    fn render(&self, indent: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CutsetTree::Empty => writeln!(f, "{:indent$}(empty)", ""),
            CutsetTree::Node { test, arcs } => {
                writeln!(f, "{:indent$}{test}", "")?;
                for arc in arcs {
                    writeln!(f, "{:w$}{{{}}}", "", arc.values.join(","), w = indent + 2)?;
                    arc.child.render(indent + 4, f)?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for CutsetTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.render(0, f)
    }
}

/// One context per root-to-leaf path and per choice of value in each set
/// label, in depth-first order with arcs and values in stored order.
pub fn branch_contexts(t: &CutsetTree) -> Vec<Context> {
    fn walk(t: &CutsetTree, ctx: &Context, out: &mut Vec<Context>) {
        match t {
            CutsetTree::Empty => out.push(ctx.clone()),
            CutsetTree::Node { test, arcs } => {
                for arc in arcs {
                    for v in &arc.values {
                        walk(&arc.child, &ctx.with(test, v), out);
                    }
                }
            }
        }
    }
    let mut out = Vec::new();
    walk(t, &Context::new(), &mut out);
    out
}

/// Greedy conditional cutset for `net`.
pub fn build_conditional_cutset(net: &Network) -> CutsetTree {
    grow(net, &Context::new(), vec![true; net.len()])
}

/// Conditional cutset for `net` with `evidence` already instantiated. Evidence
/// variables are never chosen; their outgoing arcs count as cut.
pub fn build_conditional_cutset_given(net: &Network, evidence: &Context) -> Result<CutsetTree, CutsetError> {
    evidence.check(net)?;
    Ok(grow(net, evidence, vec![true; net.len()]))
}

const RATIO_EPS: f64 = 1e-12;

fn grow(net: &Network, ctx: &Context, active: Vec<bool>) -> CutsetTree {
    let conditioned = condition(net, ctx);
    let mut view = View {
        net: &conditioned,
        active,
    };
    view.strip();

    let mut candidates: Vec<&str> = view
        .active_names()
        .into_iter()
        .filter(|v| !ctx.binds(v))
        .collect();
    if candidates.is_empty() {
        return CutsetTree::Empty;
    }
    candidates.sort_unstable();

    let mut best: Option<HeuristicScore> = None;
    for c in &candidates {
        let s = view.score(c);
        let better = match &best {
            None => true,
            Some(b) => s.ratio < b.ratio - RATIO_EPS * b.ratio.abs().max(1.0),
        };
        if better {
            best = Some(s);
        }
    }
    let chosen = match best {
        Some(s) if s.ratio.is_finite() => s.variable,
        // No candidate promises a deletion; any node with an active child still
        // cuts at least one arc.
        _ => match candidates.iter().find(|c| !view.children(c).is_empty()) {
            Some(c) => c.to_string(),
            None => return CutsetTree::Empty,
        },
    };

    let var = net.variable(&chosen).expect("candidate is a variable");
    let mut groups: Vec<(_, Vec<String>)> = Vec::new();
    for value in &var.values {
        let next = condition(net, &ctx.with(&chosen, value));
        let sig = View {
            net: &next,
            active: view.active.clone(),
        }
        .signature();
        match groups.iter_mut().find(|(s, _)| *s == sig) {
            Some((_, values)) => values.push(value.clone()),
            None => groups.push((sig, vec![value.clone()])),
        }
    }

    let arcs = groups
        .into_iter()
        .map(|(_, values)| {
            let child = grow(net, &ctx.with(&chosen, &values[0]), view.active.clone());
            CutsetArc { values, child }
        })
        .collect();
    CutsetTree::Node { test: chosen, arcs }
}
