use std::collections::BTreeSet;

use super::{Context, CptTable, Distribution, ModelError, Variable};

/// A decision-tree CPT. Interior t-nodes test a parent; each t-arc is labelled by
/// one value of the tested parent; leaves carry a distribution over the owner.
#[derive(Debug, Clone, PartialEq)]
pub enum CptTree {
    Leaf(Distribution),
    Node {
        test: String,
        branches: Vec<(String, CptTree)>,
    },
}

/// Tree skeleton without leaf parameters. Two trees with equal shapes make the
/// same structural CSI claims.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TreeShape {
    Leaf,
    Node(String, Vec<(String, TreeShape)>),
}

impl CptTree {
    pub fn leaf(probs: Vec<f64>) -> Self {
        CptTree::Leaf(Distribution(probs))
    }

    pub fn node<S: Into<String>>(test: S, branches: Vec<(&str, CptTree)>) -> Self {
        CptTree::Node {
            test: test.into(),
            branches: branches
                .into_iter()
                .map(|(v, t)| (v.to_string(), t))
                .collect(),
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, CptTree::Leaf(_))
    }

    /// Variable tested at the root, if any.
    pub fn root_test(&self) -> Option<&str> {
        match self {
            CptTree::Leaf(_) => None,
            CptTree::Node { test, .. } => Some(test),
        }
    }

    pub fn branch(&self, value: &str) -> Option<&CptTree> {
        match self {
            CptTree::Leaf(_) => None,
            CptTree::Node { branches, .. } => {
                branches.iter().find(|(v, _)| v == value).map(|(_, t)| t)
            }
        }
    }

    pub fn leaves(&self) -> Vec<&Distribution> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a Distribution>) {
        match self {
            CptTree::Leaf(d) => out.push(d),
            CptTree::Node { branches, .. } => {
                for (_, t) in branches {
                    t.collect_leaves(out);
                }
            }
        }
    }

    /// Every variable labelling some t-node.
    pub fn tested_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_tests(&mut out);
        out
    }

    fn collect_tests(&self, out: &mut BTreeSet<String>) {
        if let CptTree::Node { test, branches } = self {
            out.insert(test.clone());
            for (_, t) in branches {
                t.collect_tests(out);
            }
        }
    }

    /// Root-to-leaf path labellings, left to right, each paired with its leaf.
    pub fn paths(&self) -> Vec<(Context, &Distribution)> {
        let mut out = Vec::new();
        self.collect_paths(Context::new(), &mut out);
        out
    }

    fn collect_paths<'a>(&'a self, label: Context, out: &mut Vec<(Context, &'a Distribution)>) {
        match self {
            CptTree::Leaf(d) => out.push((label, d)),
            CptTree::Node { test, branches } => {
                for (v, t) in branches {
                    t.collect_paths(label.with(test, v), out);
                }
            }
        }
    }

    /// The reduced tree T(c): t-nodes testing a variable bound in `c` are replaced
    /// by the subtree of the selected value; other t-nodes keep reduced subtrees.
    ///
    /// A bound variable whose value has no branch leaves the t-node in place.
    pub fn reduce(&self, c: &Context) -> CptTree {
        match self {
            CptTree::Leaf(d) => CptTree::Leaf(d.clone()),
            CptTree::Node { test, branches } => match c.get(test) {
                Some(value) => match branches.iter().find(|(v, _)| v == value) {
                    Some((_, sub)) => sub.reduce(c),
                    None => self.clone(),
                },
                None => CptTree::Node {
                    test: test.clone(),
                    branches: branches
                        .iter()
                        .map(|(v, t)| (v.clone(), t.reduce(c)))
                        .collect(),
                },
            },
        }
    }

    /// True iff some root-to-leaf path consistent with `c` tests `y`.
    pub fn occurs_consistent(&self, y: &str, c: &Context) -> bool {
        match self {
            CptTree::Leaf(_) => false,
            CptTree::Node { test, branches } => {
                if test == y {
                    return true;
                }
                let bound = c.get(test);
                branches
                    .iter()
                    .filter(|(v, _)| bound.is_none_or(|b| b == v))
                    .any(|(_, t)| t.occurs_consistent(y, c))
            }
        }
    }

    pub fn shape(&self) -> TreeShape {
        match self {
            CptTree::Leaf(_) => TreeShape::Leaf,
            CptTree::Node { test, branches } => TreeShape::Node(
                test.clone(),
                branches.iter().map(|(v, t)| (v.clone(), t.shape())).collect(),
            ),
        }
    }

    /// The sequence of tested variables shared by every root-to-leaf path, if all
    /// paths test the same variables in the same order.
    pub fn uniform_test_sequence(&self) -> Option<Vec<&str>> {
        match self {
            CptTree::Leaf(_) => Some(Vec::new()),
            CptTree::Node { test, branches } => {
                let mut seq: Option<Vec<&str>> = None;
                for (_, t) in branches {
                    let s = t.uniform_test_sequence()?;
                    match &seq {
                        None => seq = Some(s),
                        Some(prev) if *prev == s => {}
                        Some(_) => return None,
                    }
                }
                let mut out = vec![test.as_str()];
                out.extend(seq.unwrap_or_default());
                Some(out)
            }
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            CptTree::Leaf(_) => 0,
            CptTree::Node { branches, .. } => {
                1 + branches.iter().map(|(_, t)| t.depth()).max().unwrap_or(0)
            }
        }
    }

    /// Replaces leaf distributions in left-to-right order. `params` must hold at
    /// least [`tree_size`] entries.
    pub fn with_leaves(&self, params: &mut impl Iterator<Item = Distribution>) -> CptTree {
        match self {
            CptTree::Leaf(d) => CptTree::Leaf(params.next().unwrap_or_else(|| d.clone())),
            CptTree::Node { test, branches } => CptTree::Node {
                test: test.clone(),
                branches: branches
                    .iter()
                    .map(|(v, t)| (v.clone(), t.with_leaves(params)))
                    .collect(),
            },
        }
    }
}

/// Number of leaves.
pub fn tree_size(t: &CptTree) -> usize {
    match t {
        CptTree::Leaf(_) => 1,
        CptTree::Node { branches, .. } => branches.iter().map(|(_, b)| tree_size(b)).sum(),
    }
}

/// Expands a table into the full tree testing `parents` in the given order. No
/// simplification is performed: identical rows stay separate leaves.
pub fn table_to_tree(tab: &CptTable, parents: &[&Variable]) -> CptTree {
    fn build(tab: &CptTable, parents: &[&Variable], depth: usize, row: usize) -> CptTree {
        if depth == parents.len() {
            return CptTree::Leaf(tab.rows.get(row).cloned().unwrap_or_else(|| Distribution(vec![])));
        }
        let var = parents[depth];
        CptTree::Node {
            test: var.name.clone(),
            branches: var
                .values
                .iter()
                .enumerate()
                .map(|(i, v)| (v.clone(), build(tab, parents, depth + 1, row * var.card() + i)))
                .collect(),
        }
    }
    build(tab, parents, 0, 0)
}

/// The leaf reached by following `assignment` from the root.
pub fn tree_lookup<'a>(t: &'a CptTree, assignment: &Context) -> Result<&'a Distribution, ModelError> {
    match t {
        CptTree::Leaf(d) => Ok(d),
        CptTree::Node { test, branches } => {
            let value = assignment
                .get(test)
                .ok_or_else(|| ModelError::Unbound(test.clone()))?;
            let (_, sub) = branches
                .iter()
                .find(|(v, _)| v == value)
                .ok_or_else(|| ModelError::UnknownValue {
                    var: test.clone(),
                    value: value.to_string(),
                })?;
            tree_lookup(sub, assignment)
        }
    }
}
