//! Network representation: variables, contexts, CPTs (tabular and tree-structured),
//! validation and the JSON file format.

mod format;
mod tree;
mod validate;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use format::{parse_document, parse_network, serialize_network, ParseError};
pub use tree::{table_to_tree, tree_lookup, tree_size, CptTree, TreeShape};
pub use validate::{validate, Violation};

/// Absolute tolerance used when checking that a distribution sums to one.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{var}` has no value `{value}`")]
    UnknownValue { var: String, value: String },
    #[error("variable `{0}` is bound twice")]
    DuplicateBinding(String),
    #[error("variable `{0}` is not bound by the assignment")]
    Unbound(String),
    #[error("malformed context `{0}`: expected comma-separated Var=value pairs")]
    MalformedContext(String),
    #[error("invalid network: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub values: Vec<String>,
}

impl Variable {
    pub fn new<S: Into<String>>(name: S, values: &[&str]) -> Self {
        Variable {
            name: name.into(),
            values: values.iter().map(|v| v.to_string()).collect(),
        }
    }

    /// Binary variable with values `t` and `f`, in that order.
    pub fn binary<S: Into<String>>(name: S) -> Self {
        Self::new(name, &["t", "f"])
    }

    pub fn card(&self) -> usize {
        self.values.len()
    }

    pub fn value_index(&self, value: &str) -> Option<usize> {
        self.values.iter().position(|v| v == value)
    }
}

/// A partial assignment of values to variables.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Context {
    bindings: BTreeMap<String, String>,
}

impl Context {
    pub fn new() -> Self {
        Self::default()
    }

    /// Parses `A=t,B=f`. Whitespace around names and values is ignored; an empty
    /// string is the empty context. Each pair splits at its last `=`, so
    /// `X@A=t=f` binds `X@A=t`.
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let mut ctx = Context::new();
        for pair in text.split(',') {
            let pair = pair.trim();
            if pair.is_empty() {
                if text.trim().is_empty() {
                    continue;
                }
                return Err(ModelError::MalformedContext(text.to_string()));
            }
            let (var, value) = pair
                .rsplit_once('=')
                .ok_or_else(|| ModelError::MalformedContext(text.to_string()))?;
            let (var, value) = (var.trim(), value.trim());
            if var.is_empty() || value.is_empty() {
                return Err(ModelError::MalformedContext(text.to_string()));
            }
            if ctx.bindings.insert(var.to_string(), value.to_string()).is_some() {
                return Err(ModelError::DuplicateBinding(var.to_string()));
            }
        }
        Ok(ctx)
    }

    pub fn from_pairs<'a, I>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (&'a str, &'a str)>,
    {
        let mut ctx = Context::new();
        for (k, v) in pairs {
            ctx.bind(k, v);
        }
        ctx
    }

    /// Binds `var` to `value`, replacing any previous binding.
    pub fn bind(&mut self, var: &str, value: &str) {
        self.bindings.insert(var.to_string(), value.to_string());
    }

    pub fn with(&self, var: &str, value: &str) -> Context {
        let mut c = self.clone();
        c.bind(var, value);
        c
    }

    pub fn get(&self, var: &str) -> Option<&str> {
        self.bindings.get(var).map(String::as_str)
    }

    pub fn binds(&self, var: &str) -> bool {
        self.bindings.contains_key(var)
    }

    pub fn len(&self) -> usize {
        self.bindings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bindings.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = &str> {
        self.bindings.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.bindings.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }

    /// The sub-context over the given variables.
    pub fn restrict<'a, I>(&self, vars: I) -> Context
    where
        I: IntoIterator<Item = &'a str>,
    {
        let mut c = Context::new();
        for v in vars {
            if let Some(val) = self.get(v) {
                c.bind(v, val);
            }
        }
        c
    }

    /// Union of two contexts; `None` when they disagree on a shared variable.
    pub fn union(&self, other: &Context) -> Option<Context> {
        let mut c = self.clone();
        for (k, v) in other.iter() {
            match c.get(k) {
                Some(existing) if existing != v => return None,
                _ => c.bind(k, v),
            }
        }
        Some(c)
    }

    pub fn is_consistent_with(&self, other: &Context) -> bool {
        self.iter()
            .all(|(k, v)| other.get(k).is_none_or(|o| o == v))
    }

    /// Checks every binding against the network's variables and value lists.
    pub fn check(&self, net: &Network) -> Result<(), ModelError> {
        for (k, v) in self.iter() {
            let var = net
                .variable(k)
                .ok_or_else(|| ModelError::UnknownVariable(k.to_string()))?;
            if var.value_index(v).is_none() {
                return Err(ModelError::UnknownValue {
                    var: k.to_string(),
                    value: v.to_string(),
                });
            }
        }
        Ok(())
    }
}

impl fmt::Display for Context {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, v) in self.iter() {
            if !first {
                f.write_str(",")?;
            }
            first = false;
            write!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

/// A probability vector aligned with a variable's declared value order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Distribution(pub Vec<f64>);

impl Distribution {
    pub fn new(probs: Vec<f64>) -> Self {
        Distribution(probs)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn is_normalized(&self) -> bool {
        (self.sum() - 1.0).abs() <= NORMALIZATION_TOLERANCE
    }

    /// 0/1 vector with a one at `index`.
    pub fn point(len: usize, index: usize) -> Self {
        let mut v = vec![0.0; len];
        v[index] = 1.0;
        Distribution(v)
    }
}

/// Tabular CPT: one row per full parent assignment, row-major over the declared
/// parent order (last parent varies fastest).
#[derive(Debug, Clone, PartialEq)]
pub struct CptTable {
    pub rows: Vec<Distribution>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cpt {
    Table(CptTable),
    Tree(CptTree),
}

impl Cpt {
    /// Number of entries: rows of a table, leaves of a tree.
    pub fn size(&self) -> usize {
        match self {
            Cpt::Table(t) => t.rows.len(),
            Cpt::Tree(t) => tree_size(t),
        }
    }

    pub fn as_tree(&self) -> Option<&CptTree> {
        match self {
            Cpt::Tree(t) => Some(t),
            Cpt::Table(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub var: String,
    pub parents: Vec<String>,
    pub cpt: Cpt,
    /// Advisory: leaf distributions are expected to be 0/1 vectors.
    pub deterministic: bool,
}

/// A Bayesian network. Construct with [`Network::new`] (validated) or
/// [`Network::new_unchecked`]; most algorithms assume a valid network.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    variables: Vec<Variable>,
    nodes: Vec<Node>,
    var_index: HashMap<String, usize>,
    node_index: HashMap<String, usize>,
}

impl Network {
    pub fn new(variables: Vec<Variable>, nodes: Vec<Node>) -> Result<Self, ModelError> {
        let net = Self::new_unchecked(variables, nodes);
        let violations = validate(&net);
        if violations.is_empty() {
            Ok(net)
        } else {
            Err(ModelError::Invalid(violations))
        }
    }

    pub fn new_unchecked(variables: Vec<Variable>, nodes: Vec<Node>) -> Self {
        let mut var_index = HashMap::new();
        for (i, v) in variables.iter().enumerate() {
            var_index.entry(v.name.clone()).or_insert(i);
        }
        let mut node_index = HashMap::new();
        for (i, n) in nodes.iter().enumerate() {
            node_index.entry(n.var.clone()).or_insert(i);
        }
        Network {
            variables,
            nodes,
            var_index,
            node_index,
        }
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn variable(&self, name: &str) -> Option<&Variable> {
        self.var_index.get(name).map(|&i| &self.variables[i])
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.var_index.get(name).copied()
    }

    pub fn node(&self, name: &str) -> Option<&Node> {
        self.node_index.get(name).map(|&i| &self.nodes[i])
    }

    pub fn parents(&self, name: &str) -> &[String] {
        self.node(name).map(|n| n.parents.as_slice()).unwrap_or(&[])
    }

    /// Children of `name` in variable declaration order.
    pub fn children(&self, name: &str) -> Vec<&str> {
        self.variables
            .iter()
            .filter(|v| self.parents(&v.name).iter().any(|p| p == name))
            .map(|v| v.name.as_str())
            .collect()
    }

    pub fn card(&self, name: &str) -> usize {
        self.variable(name).map_or(0, Variable::card)
    }

    /// The CPT of `name` as a tree; tables are expanded into full trees in
    /// declared parent order.
    pub fn tree_of(&self, name: &str) -> Option<CptTree> {
        let node = self.node(name)?;
        Some(match &node.cpt {
            Cpt::Tree(t) => t.clone(),
            Cpt::Table(tab) => {
                let parents: Vec<&Variable> = node
                    .parents
                    .iter()
                    .filter_map(|p| self.variable(p))
                    .collect();
                table_to_tree(tab, &parents)
            }
        })
    }

    /// Variable names in a topological order, ties broken by declaration order.
    /// Returns `None` when the parent relation has a cycle.
    pub fn topological_order(&self) -> Option<Vec<String>> {
        let n = self.variables.len();
        let mut indeg = vec![0usize; n];
        let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, v) in self.variables.iter().enumerate() {
            for p in self.parents(&v.name) {
                let pi = self.var_index(p)?;
                indeg[i] += 1;
                children[pi].push(i);
            }
        }
        let mut order = Vec::with_capacity(n);
        let mut done = vec![false; n];
        while order.len() < n {
            let next = (0..n).find(|&i| !done[i] && indeg[i] == 0)?;
            done[next] = true;
            order.push(next);
            for &c in &children[next] {
                indeg[c] -= 1;
            }
        }
        Some(order.into_iter().map(|i| self.variables[i].name.clone()).collect())
    }

    /// Undirected adjacency over variable indices (parent/child arcs only).
    pub fn skeleton(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.variables.len()];
        for (i, v) in self.variables.iter().enumerate() {
            for p in self.parents(&v.name) {
                if let Some(pi) = self.var_index(p) {
                    adj[i].push(pi);
                    adj[pi].push(i);
                }
            }
        }
        adj
    }

    /// True when the undirected skeleton has no cycle (multi-edges count as cycles).
    pub fn is_singly_connected(&self) -> bool {
        let mut uf = crate::graph::UnionFind::new(self.variables.len());
        for (i, v) in self.variables.iter().enumerate() {
            for p in self.parents(&v.name) {
                if let Some(pi) = self.var_index(p) {
                    if !uf.union(i, pi) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Number of full joint assignments.
    pub fn joint_size(&self) -> usize {
        self.variables.iter().map(Variable::card).product()
    }
}
