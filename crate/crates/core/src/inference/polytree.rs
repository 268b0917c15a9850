use super::factor::{Compiled, Factor};
use super::{InferenceError, InferenceResult, Query};
use crate::graph::UnionFind;
use crate::model::Network;

/// Exact inference on a network whose undirected skeleton is a forest.
///
/// Evidence is sliced into the family factors, which then form a tree-shaped
/// factor graph; sum-product messages flow towards the target. Each factor is
/// visited once, so the work is linear in the total CPT size.
pub fn solve_singly_connected(net: &Network, q: &Query) -> Result<InferenceResult, InferenceError> {
    let (target, evidence) = q.resolve(net)?;
    if !net.is_singly_connected() {
        return Err(InferenceError::NotSinglyConnected);
    }
    let compiled = Compiled::new(net);
    let (weights, _) = forest_weights(&compiled, Some(target), &evidence)?;
    InferenceResult::from_weights(weights, 1)
}

/// Unnormalized P(target = x, evidence) for each x (empty when `target` is
/// `None`) and the evidence probability.
pub(crate) fn forest_weights(
    c: &Compiled,
    target: Option<usize>,
    evidence: &[Option<usize>],
) -> Result<(Vec<f64>, f64), InferenceError> {
    let n = c.len();
    let mut constant = 1.0;
    let mut factors = Vec::new();
    for v in 0..n {
        let f = c.cpt_factor(v).reduce(evidence);
        if f.vars.is_empty() {
            constant *= f.values[0];
        } else {
            factors.push(f);
        }
    }
    let graph = FactorGraph::new(n, factors)?;

    let mut done = vec![false; n];
    let mut weights = Vec::new();
    if let Some(t) = target {
        let belief = graph.belief(t, c.cards[t]);
        graph.mark_component(t, &mut done);
        weights = belief;
    }
    for v in 0..n {
        if done[v] || evidence[v].is_some() {
            continue;
        }
        let z: f64 = graph.belief(v, c.cards[v]).iter().sum();
        constant *= z;
        graph.mark_component(v, &mut done);
    }
    for w in &mut weights {
        *w *= constant;
    }
    let z = if target.is_some() {
        weights.iter().sum()
    } else {
        constant
    };
    Ok((weights, z))
}

struct FactorGraph {
    factors: Vec<Factor>,
    var_factors: Vec<Vec<usize>>,
}

impl FactorGraph {
    fn new(n: usize, factors: Vec<Factor>) -> Result<Self, InferenceError> {
        let mut var_factors = vec![Vec::new(); n];
        // Variables are 0..n, factors n..n+m; any repeated connection is a loop.
        let mut uf = UnionFind::new(n + factors.len());
        for (fi, f) in factors.iter().enumerate() {
            for &v in &f.vars {
                if !uf.union(v, n + fi) {
                    return Err(InferenceError::NotSinglyConnected);
                }
                var_factors[v].push(fi);
            }
        }
        Ok(FactorGraph { factors, var_factors })
    }

    fn belief(&self, v: usize, card: usize) -> Vec<f64> {
        let mut out = vec![1.0; card];
        for &f in &self.var_factors[v] {
            let m = self.factor_to_var(f, v);
            for (o, x) in out.iter_mut().zip(m) {
                *o *= x;
            }
        }
        out
    }

    fn var_to_factor(&self, v: usize, from: usize, card: usize) -> Vec<f64> {
        let mut out = vec![1.0; card];
        for &g in &self.var_factors[v] {
            if g == from {
                continue;
            }
            let m = self.factor_to_var(g, v);
            for (o, x) in out.iter_mut().zip(m) {
                *o *= x;
            }
        }
        out
    }

    fn factor_to_var(&self, f: usize, v: usize) -> Vec<f64> {
        let factor = &self.factors[f];
        let pos = factor.vars.iter().position(|&x| x == v).expect("v in scope");
        let incoming: Vec<Option<Vec<f64>>> = factor
            .vars
            .iter()
            .enumerate()
            .map(|(k, &u)| (k != pos).then(|| self.var_to_factor(u, f, factor.cards[k])))
            .collect();
        let mut out = vec![0.0; factor.cards[pos]];
        let mut idx = vec![0usize; factor.vars.len()];
        for (flat, &val) in factor.values.iter().enumerate() {
            if val == 0.0 {
                continue;
            }
            factor.decode(flat, &mut idx);
            let mut w = val;
            for (k, m) in incoming.iter().enumerate() {
                if let Some(m) = m {
                    w *= m[idx[k]];
                }
            }
            out[idx[pos]] += w;
        }
        out
    }

    fn mark_component(&self, start: usize, done: &mut [bool]) {
        let mut stack = vec![start];
        while let Some(v) = stack.pop() {
            if done[v] {
                continue;
            }
            done[v] = true;
            for &f in &self.var_factors[v] {
                stack.extend(self.factors[f].vars.iter().copied().filter(|&u| !done[u]));
            }
        }
    }
}
