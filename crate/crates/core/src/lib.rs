//! Exact inference for Bayesian networks whose CPTs may be decision trees.
//!
//! Tree-structured CPTs expose context-specific independence (CSI): in a given
//! context some arcs carry no influence and can be dropped. This crate detects
//! such arcs, decides CSI-separation, decomposes tree CPTs into multiplexer
//! networks, builds tree-structured conditional cutsets and runs exact inference
//! (enumeration, variable elimination, polytree solving and cutset conditioning).

pub mod csi;
pub mod cutset;
pub mod generate;
mod graph;
pub mod inference;
pub mod model;
pub mod transform;

pub use csi::{
    context_network, csi_separated, d_separated, occurs_consistent, reduce_tree, vacuous_parents,
    ContextNetwork, CsiError,
};
pub use cutset::{
    arc_deletion_score, branch_contexts, build_conditional_cutset, build_conditional_cutset_given,
    condition, expected_parents, strip_singly_connected, weight, CutsetArc, CutsetTree,
    scores, CutsetError, HeuristicScore, Residual,
};
pub use inference::{
    contextually_independent, cutset_infer, joint_probability, query_enumerate,
    solve_singly_connected, variable_elimination, InferenceError, InferenceResult, Query,
};
pub use generate::{random_loopy_network, random_tree_network, GenConfig};
pub use model::{
    parse_document, parse_network, serialize_network, table_to_tree, tree_lookup, tree_size,
    validate, Context, Cpt, CptTable, CptTree, Distribution, ModelError, Network, Node, ParseError,
    TreeShape,
    Variable, Violation,
};
pub use transform::{
    clique_report, decompose_network, decompose_node, is_full_tree, CliqueReport,
    ConditionalNode, DecompositionReport, TransformError,
};
