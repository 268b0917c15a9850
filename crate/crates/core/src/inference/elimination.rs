use super::factor::{Compiled, Factor};
use super::{InferenceError, InferenceResult, Query};
use crate::graph::UGraph;
use crate::model::Network;

/// Sum-product variable elimination. Hidden variables are eliminated in greedy
/// min-fill order, ties broken by variable name.
pub fn variable_elimination(net: &Network, q: &Query) -> Result<InferenceResult, InferenceError> {
    let (target, evidence) = q.resolve(net)?;
    let compiled = Compiled::new(net);
    let mut factors: Vec<Factor> = (0..compiled.len())
        .map(|v| compiled.cpt_factor(v).reduce(&evidence))
        .collect();

    let mut graph = UGraph::new(compiled.len());
    for f in &factors {
        graph.add_clique(&f.vars);
    }
    let hidden: Vec<usize> = (0..compiled.len())
        .filter(|&v| v != target && evidence[v].is_none())
        .collect();
    let names: Vec<&str> = compiled.names.iter().map(String::as_str).collect();
    let (order, _) = graph.min_fill_order(&hidden, &names);

    for v in order {
        let (touching, rest): (Vec<Factor>, Vec<Factor>) = factors.into_iter().partition(|f| f.contains(v));
        factors = rest;
        if let Some(prod) = touching.into_iter().reduce(|a, b| a.product(&b)) {
            factors.push(prod.sum_out(v));
        }
    }

    let result = factors
        .into_iter()
        .reduce(|a, b| a.product(&b))
        .unwrap_or_else(|| Factor::constant(1.0));
    let weights = if result.contains(target) {
        result.marginal_of(target)
    } else {
        // Target with no factor cannot occur in a valid network; keep a uniform guard.
        vec![result.total(); compiled.cards[target]]
    };
    InferenceResult::from_weights(weights, 1)
}
