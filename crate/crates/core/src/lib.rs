//! Spectral refutation of semirandom XOR instances via Kikuchi matrices,
//! together with the combinatorial lemmas and code-to-instance reductions
//! that feed them.

pub mod combinatorics;
pub mod error;
pub mod experiment;
pub mod hypergraph;
pub mod kikuchi;
pub mod ldc;
pub mod random;
pub mod refuter;
pub mod spectral;
pub mod verify;
pub mod xor;

pub use error::{Error, Result};
pub use kikuchi::KikuchiMatrix;
pub use hypergraph::{
    check_decomposition, decompose, BipartiteFamily, DecompositionResult, Hypergraph,
    MatchingFamily, Vertex,
};
pub use xor::{Assignment, Partition, PartitionMode, XorInstance};
