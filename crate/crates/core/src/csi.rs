//! Context-specific independence: structural vacuity tests on CPT-trees, tree
//! reduction, d-separation, context networks B(c) and CSI-separation.

use std::collections::{BTreeSet, HashSet, VecDeque};

use thiserror::Error;

use crate::model::{Context, Cpt, CptTree, ModelError, Network, Node};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CsiError {
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("variable `{0}` is bound in the context")]
    BoundInContext(String),
    #[error("variable `{0}` appears in more than one of the query sets")]
    NotDisjoint(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// True iff some root-to-leaf path of `t` whose labelling is consistent with `c`
/// tests `y`. Querying a variable bound in `c` is an error.
pub fn occurs_consistent(t: &CptTree, y: &str, c: &Context) -> Result<bool, CsiError> {
    if c.binds(y) {
        return Err(CsiError::BoundInContext(y.to_string()));
    }
    Ok(t.occurs_consistent(y, c))
}

/// The reduced tree T(c).
pub fn reduce_tree(t: &CptTree, c: &Context) -> CptTree {
    t.reduce(c)
}

/// Parents of `x` outside `c` that lie on no tree path consistent with `c`; each
/// such arc is vacuous given `c`. Listed in declared parent order. Table CPTs are
/// read as full trees and never yield vacuous arcs.
pub fn vacuous_parents(net: &Network, x: &str, c: &Context) -> Result<Vec<String>, CsiError> {
    let node = net
        .node(x)
        .ok_or_else(|| CsiError::UnknownVariable(x.to_string()))?;
    let tree = net
        .tree_of(x)
        .ok_or_else(|| CsiError::UnknownVariable(x.to_string()))?;
    Ok(node
        .parents
        .iter()
        .filter(|p| !c.binds(p) && !tree.occurs_consistent(p, c))
        .cloned()
        .collect())
}

/// B(c): the base network with every structurally vacuous arc removed and every
/// CPT replaced by its reduction under `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct ContextNetwork {
    pub base: Network,
    pub context: Context,
    /// `(parent, child)` pairs.
    pub deleted_edges: BTreeSet<(String, String)>,
    /// The network B(c) itself.
    pub network: Network,
}

pub fn context_network(net: &Network, c: &Context) -> Result<ContextNetwork, CsiError> {
    c.check(net)?;
    let mut deleted = BTreeSet::new();
    let mut nodes = Vec::with_capacity(net.nodes().len());
    for node in net.nodes() {
        let vacuous = vacuous_parents(net, &node.var, c)?;
        let tree = net
            .tree_of(&node.var)
            .ok_or_else(|| CsiError::UnknownVariable(node.var.clone()))?;
        let local = c.restrict(node.parents.iter().map(String::as_str));
        for p in &vacuous {
            deleted.insert((p.clone(), node.var.clone()));
        }
        nodes.push(Node {
            var: node.var.clone(),
            parents: node
                .parents
                .iter()
                .filter(|p| !vacuous.contains(p))
                .cloned()
                .collect(),
            cpt: Cpt::Tree(tree.reduce(&local)),
            deterministic: node.deterministic,
        });
    }
    Ok(ContextNetwork {
        base: net.clone(),
        context: c.clone(),
        deleted_edges: deleted,
        network: Network::new_unchecked(net.variables().to_vec(), nodes),
    })
}

fn indices(net: &Network, vars: &[&str]) -> Result<Vec<usize>, CsiError> {
    vars.iter()
        .map(|v| net.var_index(v).ok_or_else(|| CsiError::UnknownVariable(v.to_string())))
        .collect()
}

fn check_disjoint(sets: &[&[&str]]) -> Result<(), CsiError> {
    let mut seen: HashSet<&str> = HashSet::new();
    for set in sets {
        let mut local = HashSet::new();
        for &v in *set {
            if !local.insert(v) {
                continue;
            }
            if !seen.insert(v) {
                return Err(CsiError::NotDisjoint(v.to_string()));
            }
        }
    }
    Ok(())
}

/// Standard d-separation of `xs` and `ys` given `zs`, decided by reachability
/// over (node, direction) pairs.
pub fn d_separated(net: &Network, xs: &[&str], ys: &[&str], zs: &[&str]) -> Result<bool, CsiError> {
    check_disjoint(&[xs, ys, zs])?;
    let x = indices(net, xs)?;
    let y: HashSet<usize> = indices(net, ys)?.into_iter().collect();
    let z: HashSet<usize> = indices(net, zs)?.into_iter().collect();

    let n = net.len();
    let mut parents: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, v) in net.variables().iter().enumerate() {
        for p in net.parents(&v.name) {
            let pi = net
                .var_index(p)
                .ok_or_else(|| CsiError::UnknownVariable(p.clone()))?;
            parents[i].push(pi);
            children[pi].push(i);
        }
    }

    // Z together with its ancestors: colliders in this set are open.
    let mut anc = vec![false; n];
    let mut stack: Vec<usize> = z.iter().copied().collect();
    while let Some(v) = stack.pop() {
        if !anc[v] {
            anc[v] = true;
            stack.extend(&parents[v]);
        }
    }

    // Direction: `true` when the trail arrived from a child (moving up).
    let mut visited: HashSet<(usize, bool)> = HashSet::new();
    let mut queue: VecDeque<(usize, bool)> = x.iter().map(|&v| (v, true)).collect();
    while let Some((v, up)) = queue.pop_front() {
        if !visited.insert((v, up)) {
            continue;
        }
        let observed = z.contains(&v);
        if !observed && y.contains(&v) {
            return Ok(false);
        }
        if up {
            if !observed {
                queue.extend(parents[v].iter().map(|&p| (p, true)));
                queue.extend(children[v].iter().map(|&c| (c, false)));
            }
        } else {
            if !observed {
                queue.extend(children[v].iter().map(|&c| (c, false)));
            }
            if anc[v] {
                queue.extend(parents[v].iter().map(|&p| (p, true)));
            }
        }
    }
    Ok(true)
}

/// X is CSI-separated from Y given Z in context c when it is d-separated from Y
/// given Z ∪ vars(c) in B(c).
pub fn csi_separated(
    net: &Network,
    xs: &[&str],
    ys: &[&str],
    zs: &[&str],
    c: &Context,
) -> Result<bool, CsiError> {
    let cvars: Vec<&str> = c.vars().collect();
    check_disjoint(&[xs, ys, zs, &cvars])?;
    let bc = context_network(net, c)?;
    let mut given: Vec<&str> = zs.to_vec();
    given.extend(cvars);
    d_separated(&bc.network, xs, ys, &given)
}
