use std::collections::{BTreeSet, HashSet};
use std::fmt;

use super::{Cpt, CptTree, Distribution, Network};

/// One broken invariant. `code()` is a stable short name; `Display` adds detail.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    DuplicateVariable(String),
    DegenerateVariable(String),
    DuplicateValue { var: String, value: String },
    MissingNode(String),
    DuplicateNode(String),
    UnknownNodeVariable(String),
    UnknownParent { node: String, parent: String },
    DuplicateParent { node: String, parent: String },
    Cycle(Vec<String>),
    WrongRowCount { node: String, expected: usize, found: usize },
    WrongLength { node: String, expected: usize, found: usize },
    NegativeProbability { node: String },
    UnnormalizedRow { node: String, row: usize, sum: f64 },
    UnnormalizedLeaf { node: String, sum: f64 },
    TestNotParent { node: String, test: String },
    MissingBranch { node: String, test: String, value: String },
    ExtraBranch { node: String, test: String, value: String },
    RepeatedTest { node: String, test: String },
}

impl Violation {
    pub fn code(&self) -> &'static str {
        match self {
            Violation::DuplicateVariable(_) => "duplicate variable",
            Violation::DegenerateVariable(_) => "degenerate variable",
            Violation::DuplicateValue { .. } => "duplicate value",
            Violation::MissingNode(_) => "missing node",
            Violation::DuplicateNode(_) => "duplicate node",
            Violation::UnknownNodeVariable(_) => "unknown variable",
            Violation::UnknownParent { .. } => "unknown variable",
            Violation::DuplicateParent { .. } => "duplicate parent",
            Violation::Cycle(_) => "cycle",
            Violation::WrongRowCount { .. } => "wrong row count",
            Violation::WrongLength { .. } => "wrong distribution length",
            Violation::NegativeProbability { .. } => "negative probability",
            Violation::UnnormalizedRow { .. } => "unnormalized row",
            Violation::UnnormalizedLeaf { .. } => "unnormalized leaf",
            Violation::TestNotParent { .. } => "test not a parent",
            Violation::MissingBranch { .. } => "missing branch",
            Violation::ExtraBranch { .. } => "extra branch",
            Violation::RepeatedTest { .. } => "repeated test",
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let code = self.code();
        match self {
            Violation::DuplicateVariable(v)
            | Violation::DegenerateVariable(v)
            | Violation::MissingNode(v)
            | Violation::DuplicateNode(v)
            | Violation::UnknownNodeVariable(v) => write!(f, "{code}: `{v}`"),
            Violation::DuplicateValue { var, value } => write!(f, "{code}: `{var}` lists `{value}` twice"),
            Violation::UnknownParent { node, parent } => {
                write!(f, "{code}: `{node}` has undeclared parent `{parent}`")
            }
            Violation::DuplicateParent { node, parent } => {
                write!(f, "{code}: `{node}` lists parent `{parent}` twice")
            }
            Violation::Cycle(vars) => write!(f, "{code}: {}", vars.join(" -> ")),
            Violation::WrongRowCount { node, expected, found } => {
                write!(f, "{code}: `{node}` expects {expected} rows, found {found}")
            }
            Violation::WrongLength { node, expected, found } => {
                write!(f, "{code}: `{node}` expects {expected} entries, found {found}")
            }
            Violation::NegativeProbability { node } => write!(f, "{code} in `{node}`"),
            Violation::UnnormalizedRow { node, row, sum } => {
                write!(f, "{code}: `{node}` row {row} sums to {sum}")
            }
            Violation::UnnormalizedLeaf { node, sum } => write!(f, "{code}: `{node}` leaf sums to {sum}"),
            Violation::TestNotParent { node, test } => {
                write!(f, "{code}: tree of `{node}` tests `{test}`")
            }
            Violation::MissingBranch { node, test, value } => {
                write!(f, "{code}: tree of `{node}` has no branch `{test}={value}`")
            }
            Violation::ExtraBranch { node, test, value } => {
                write!(f, "{code}: tree of `{node}` has unexpected branch `{test}={value}`")
            }
            Violation::RepeatedTest { node, test } => {
                write!(f, "{code}: tree of `{node}` tests `{test}` twice on one path")
            }
        }
    }
}

/// Lists every broken invariant; an empty list means the network is valid.
pub fn validate(net: &Network) -> Vec<Violation> {
    let mut out = Vec::new();

    let mut names = HashSet::new();
    for v in net.variables() {
        if !names.insert(v.name.as_str()) {
            out.push(Violation::DuplicateVariable(v.name.clone()));
        }
        if v.values.len() < 2 {
            out.push(Violation::DegenerateVariable(v.name.clone()));
        }
        let mut seen = HashSet::new();
        for val in &v.values {
            if !seen.insert(val.as_str()) {
                out.push(Violation::DuplicateValue {
                    var: v.name.clone(),
                    value: val.clone(),
                });
            }
        }
    }

    let mut node_names = HashSet::new();
    for n in net.nodes() {
        if !node_names.insert(n.var.as_str()) {
            out.push(Violation::DuplicateNode(n.var.clone()));
        }
        if net.variable(&n.var).is_none() {
            out.push(Violation::UnknownNodeVariable(n.var.clone()));
        }
    }
    for v in net.variables() {
        if !node_names.contains(v.name.as_str()) {
            out.push(Violation::MissingNode(v.name.clone()));
        }
    }

    for n in net.nodes() {
        let mut seen = HashSet::new();
        for p in &n.parents {
            if net.variable(p).is_none() {
                out.push(Violation::UnknownParent {
                    node: n.var.clone(),
                    parent: p.clone(),
                });
            }
            if !seen.insert(p.as_str()) {
                out.push(Violation::DuplicateParent {
                    node: n.var.clone(),
                    parent: p.clone(),
                });
            }
        }
        check_cpt(net, n, &mut out);
    }

    if let Some(cycle) = find_cycle(net) {
        out.push(Violation::Cycle(cycle));
    }
    out
}

fn check_distribution(
    node: &str,
    expected: usize,
    d: &Distribution,
    row: Option<usize>,
    out: &mut Vec<Violation>,
) {
    if d.len() != expected {
        out.push(Violation::WrongLength {
            node: node.to_string(),
            expected,
            found: d.len(),
        });
        return;
    }
    if d.probs().iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
        out.push(Violation::NegativeProbability { node: node.to_string() });
        return;
    }
    if !d.is_normalized() {
        let sum = d.sum();
        out.push(match row {
            None => Violation::UnnormalizedLeaf { node: node.to_string(), sum },
            Some(row) => Violation::UnnormalizedRow { node: node.to_string(), row, sum },
        });
    }
}

fn check_cpt(net: &Network, n: &super::Node, out: &mut Vec<Violation>) {
    let card = net.card(&n.var);
    match &n.cpt {
        Cpt::Table(tab) => {
            let expected: usize = n.parents.iter().map(|p| net.card(p)).product();
            if tab.rows.len() != expected {
                out.push(Violation::WrongRowCount {
                    node: n.var.clone(),
                    expected,
                    found: tab.rows.len(),
                });
            }
            for (i, row) in tab.rows.iter().enumerate() {
                check_distribution(&n.var, card, row, Some(i), out);
            }
        }
        Cpt::Tree(t) => {
            let mut path = BTreeSet::new();
            check_tree(net, n, t, &mut path, card, out);
        }
    }
}

fn check_tree(
    net: &Network,
    n: &super::Node,
    t: &CptTree,
    path: &mut BTreeSet<String>,
    card: usize,
    out: &mut Vec<Violation>,
) {
    match t {
        CptTree::Leaf(d) => check_distribution(&n.var, card, d, None, out),
        CptTree::Node { test, branches } => {
            if !n.parents.iter().any(|p| p == test) {
                out.push(Violation::TestNotParent {
                    node: n.var.clone(),
                    test: test.clone(),
                });
            }
            if !path.insert(test.clone()) {
                out.push(Violation::RepeatedTest {
                    node: n.var.clone(),
                    test: test.clone(),
                });
            }
            if let Some(var) = net.variable(test) {
                for value in &var.values {
                    if !branches.iter().any(|(v, _)| v == value) {
                        out.push(Violation::MissingBranch {
                            node: n.var.clone(),
                            test: test.clone(),
                            value: value.clone(),
                        });
                    }
                }
                let mut seen = HashSet::new();
                for (v, _) in branches {
                    if var.value_index(v).is_none() || !seen.insert(v.as_str()) {
                        out.push(Violation::ExtraBranch {
                            node: n.var.clone(),
                            test: test.clone(),
                            value: v.clone(),
                        });
                    }
                }
            }
            for (_, sub) in branches {
                check_tree(net, n, sub, path, card, out);
            }
            path.remove(test);
        }
    }
}

/// A directed cycle through the parent relation, reported from its first node.
fn find_cycle(net: &Network) -> Option<Vec<String>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    let n = net.variables().len();
    let mut mark = vec![Mark::New; n];
    let mut stack: Vec<usize> = Vec::new();

    fn visit(
        net: &Network,
        v: usize,
        mark: &mut [Mark],
        stack: &mut Vec<usize>,
    ) -> Option<Vec<String>> {
        mark[v] = Mark::Active;
        stack.push(v);
        let name = &net.variables()[v].name;
        for p in net.parents(name) {
            let Some(pi) = net.var_index(p) else { continue };
            match mark[pi] {
                Mark::Active => {
                    let start = stack.iter().position(|&x| x == pi).unwrap_or(0);
                    let mut cyc: Vec<String> = stack[start..]
                        .iter()
                        .rev()
                        .map(|&i| net.variables()[i].name.clone())
                        .collect();
                    cyc.push(net.variables()[pi].name.clone());
                    return Some(cyc);
                }
                Mark::New => {
                    if let Some(c) = visit(net, pi, mark, stack) {
                        return Some(c);
                    }
                }
                Mark::Done => {}
            }
        }
        stack.pop();
        mark[v] = Mark::Done;
        None
    }

    for v in 0..n {
        if mark[v] == Mark::New {
            if let Some(c) = visit(net, v, &mut mark, &mut stack) {
                return Some(c);
            }
        }
    }
    None
}
