use rayon::prelude::*;

use super::factor::Compiled;
use super::polytree::forest_weights;
use super::{evidence_indices, InferenceError, InferenceResult, Query};
use crate::cutset::{branch_contexts, condition, CutsetTree};
use crate::model::Network;

/// Cutset conditioning over a tree-structured conditional cutset.
///
/// Each branch context is combined with the evidence, the network is
/// conditioned on it (bound parents and vacuous arcs dropped, CPTs reduced) and
/// the resulting polytree is solved for unnormalized joint weights. Branches
/// run in parallel; weights are summed in canonical branch order.
pub fn cutset_infer(net: &Network, q: &Query, ct: &CutsetTree) -> Result<InferenceResult, InferenceError> {
    let (target, _) = q.resolve(net)?;
    for var in ct.variables() {
        if q.evidence.binds(&var) {
            return Err(InferenceError::EvidenceOnCutset(var));
        }
    }
    let branches = branch_contexts(ct);
    let card = net.variables()[target].card();

    let per_branch: Vec<Result<Vec<f64>, InferenceError>> = branches
        .par_iter()
        .map(|branch| {
            let ctx = branch
                .union(&q.evidence)
                .expect("cutset variables are disjoint from the evidence");
            let reduced = condition(net, &ctx);
            if !reduced.is_singly_connected() {
                return Err(InferenceError::InvalidCutset(branch.to_string()));
            }
            let compiled = Compiled::new(&reduced);
            let evidence = evidence_indices(&reduced, &ctx)?;
            match evidence[target] {
                Some(value) => {
                    let (_, z) = forest_weights(&compiled, None, &evidence)?;
                    let mut w = vec![0.0; card];
                    w[value] = z;
                    Ok(w)
                }
                None => forest_weights(&compiled, Some(target), &evidence).map(|(w, _)| w),
            }
        })
        .collect();

    let mut weights = vec![0.0; card];
    for branch in per_branch {
        for (acc, w) in weights.iter_mut().zip(branch?) {
            *acc += w;
        }
    }
    InferenceResult::from_weights(weights, branches.len())
}
