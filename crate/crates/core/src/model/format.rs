//! JSON network documents.
//!
//! ```text
//! {"variables": [{"name": "A", "values": ["t", "f"]}, ...],
//!  "nodes": [{"var": "X", "parents": ["A"], "deterministic": false,
//!             "cpt": {"kind": "tree", "root": {"test": "A", "branches": {"t": {"leaf": [0.9, 0.1]}, ...}}}},
//!            {"var": "A", "parents": [], "cpt": {"kind": "table", "rows": [[0.3, 0.7]]}}]}
//! ```

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{validate, Cpt, CptTable, CptTree, Distribution, Network, Node, Variable, Violation};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("semantic error: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Semantic(Vec<Violation>),
}

impl ParseError {
    pub fn violations(&self) -> &[Violation] {
        match self {
            ParseError::Semantic(v) => v,
            ParseError::Syntax { .. } => &[],
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkDoc {
    variables: Vec<Variable>,
    nodes: Vec<NodeDoc>,
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDoc {
    var: String,
    #[serde(default)]
    parents: Vec<String>,
    #[serde(default, skip_serializing_if = "is_false")]
    deterministic: bool,
    cpt: CptDoc,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
enum CptDoc {
    Table { rows: Vec<Distribution> },
    Tree { root: TreeDoc },
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TreeDoc {
    Leaf {
        leaf: Distribution,
    },
    Test {
        test: String,
        branches: IndexMap<String, TreeDoc>,
    },
}

impl From<TreeDoc> for CptTree {
    fn from(doc: TreeDoc) -> Self {
        match doc {
            TreeDoc::Leaf { leaf } => CptTree::Leaf(leaf),
            TreeDoc::Test { test, branches } => CptTree::Node {
                test,
                branches: branches.into_iter().map(|(k, v)| (k, v.into())).collect(),
            },
        }
    }
}

impl From<&CptTree> for TreeDoc {
    fn from(t: &CptTree) -> Self {
        match t {
            CptTree::Leaf(d) => TreeDoc::Leaf { leaf: d.clone() },
            CptTree::Node { test, branches } => TreeDoc::Test {
                test: test.clone(),
                branches: branches.iter().map(|(k, v)| (k.clone(), v.into())).collect(),
            },
        }
    }
}

impl Serialize for CptTree {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        TreeDoc::from(self).serialize(s)
    }
}

/// Parses a document without validating it. Only JSON structure is checked.
pub fn parse_document(text: &str) -> Result<Network, ParseError> {
    let doc: NetworkDoc = serde_json::from_str(text).map_err(|e| ParseError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let nodes = doc
        .nodes
        .into_iter()
        .map(|n| Node {
            var: n.var,
            parents: n.parents,
            deterministic: n.deterministic,
            cpt: match n.cpt {
                CptDoc::Table { rows } => Cpt::Table(CptTable { rows }),
                CptDoc::Tree { root } => Cpt::Tree(root.into()),
            },
        })
        .collect();
    Ok(Network::new_unchecked(doc.variables, nodes))
}

/// Parses and validates a network document.
pub fn parse_network(text: &str) -> Result<Network, ParseError> {
    let net = parse_document(text)?;
    let violations = validate(&net);
    if violations.is_empty() {
        Ok(net)
    } else {
        Err(ParseError::Semantic(violations))
    }
}

/// Pretty-printed JSON document; re-parses to a structurally identical network.
pub fn serialize_network(net: &Network) -> String {
    let doc = NetworkDoc {
        variables: net.variables().to_vec(),
        nodes: net
            .nodes()
            .iter()
            .map(|n| NodeDoc {
                var: n.var.clone(),
                parents: n.parents.clone(),
                deterministic: n.deterministic,
                cpt: match &n.cpt {
                    Cpt::Table(t) => CptDoc::Table { rows: t.rows.clone() },
                    Cpt::Tree(t) => CptDoc::Tree { root: t.into() },
                },
            })
            .collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("network documents always serialize");
    s.push('\n');
    s
}
