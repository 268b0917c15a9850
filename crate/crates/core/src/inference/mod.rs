//! Exact inference backends.
//!
//! [`query_enumerate`] sums the full joint and serves as ground truth. The other
//! backends ([`variable_elimination`], [`solve_singly_connected`],
//! [`cutset_infer`]) must agree with it to within floating-point noise.

mod conditioning;
mod elimination;
mod enumerate;
pub(crate) mod factor;
mod polytree;

use thiserror::Error;

use crate::model::{Context, Distribution, ModelError, Network};

pub use conditioning::cutset_infer;
pub use elimination::variable_elimination;
pub use enumerate::{contextually_independent, joint_probability, query_enumerate};
pub use polytree::solve_singly_connected;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InferenceError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("evidence has probability zero")]
    ImpossibleEvidence,
    #[error("query target `{0}` is bound by the evidence")]
    TargetInEvidence(String),
    #[error("network is not singly connected")]
    NotSinglyConnected,
    #[error("evidence variable `{0}` is also a cutset variable")]
    EvidenceOnCutset(String),
    #[error("cutset branch `{0}` leaves a loop in the network")]
    InvalidCutset(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub target: String,
    pub evidence: Context,
}

impl Query {
    pub fn new(target: &str, evidence: Context) -> Self {
        Query {
            target: target.to_string(),
            evidence,
        }
    }

    pub fn prior(target: &str) -> Self {
        Self::new(target, Context::new())
    }

    /// Target index and evidence as value indices.
    pub(crate) fn resolve(&self, net: &Network) -> Result<(usize, Vec<Option<usize>>), InferenceError> {
        let target = net
            .var_index(&self.target)
            .ok_or_else(|| ModelError::UnknownVariable(self.target.clone()))?;
        if self.evidence.binds(&self.target) {
            return Err(InferenceError::TargetInEvidence(self.target.clone()));
        }
        Ok((target, evidence_indices(net, &self.evidence)?))
    }
}

pub(crate) fn evidence_indices(net: &Network, c: &Context) -> Result<Vec<Option<usize>>, ModelError> {
    c.check(net)?;
    let mut ev = vec![None; net.len()];
    for (k, v) in c.iter() {
        let i = net.var_index(k).expect("checked");
        ev[i] = net.variables()[i].value_index(v);
    }
    Ok(ev)
}

#[derive(Debug, Clone, PartialEq)]
pub struct InferenceResult {
    pub posterior: Distribution,
    pub evidence_probability: f64,
    /// Per-branch solver calls; 1 for the non-conditioning backends.
    pub evaluations: usize,
}

impl InferenceResult {
    /// Normalizes unnormalized weights P(target = x, evidence).
    pub(crate) fn from_weights(weights: Vec<f64>, evaluations: usize) -> Result<Self, InferenceError> {
        let z: f64 = weights.iter().sum();
        if !(z > 0.0) {
            return Err(InferenceError::ImpossibleEvidence);
        }
        Ok(InferenceResult {
            posterior: Distribution(weights.iter().map(|w| w / z).collect()),
            evidence_probability: z,
            evaluations,
        })
    }

    /// Largest absolute difference between posteriors and evidence probabilities.
    pub fn max_abs_diff(&self, other: &InferenceResult) -> f64 {
        let post = self
            .posterior
            .probs()
            .iter()
            .zip(other.posterior.probs())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        post.max((self.evidence_probability - other.evidence_probability).abs())
    }
}
