//! Shared inputs for the benchmarks.

use std::path::PathBuf;

use csibn_core::{parse_network, Network};

/// Loads a network from the repository's `fixtures/` directory.
pub fn fixture(name: &str) -> Network {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_network(&text).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}
