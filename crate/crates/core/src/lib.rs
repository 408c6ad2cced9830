//! CSR expansion of max-plus matrix powers.
//!
//! `A^{⊗t} = ⊕_s λ_s^{⊗t} ⊗ C_s ⊗ S_s^{⊗t} ⊗ R_s` for `t ≥ 2n²`, built from
//! the roots of the characteristic maxpolynomial of `A`:
//!
//! 1. [`charpoly`] finds the roots of `χ_A` and the maximal multi-circuit
//!    sequence,
//! 2. [`partition`] splits the nodes into groups with quasi-critical circuits,
//! 3. [`visualize`] makes every trailing principal submatrix non-positive in
//!    one backward sweep of Dijkstra runs,
//! 4. [`csr`] reads `C_s` and `R_s` off an `ℓ`-layer extended graph.
//!
//! All arithmetic is exact ([`Rational`], [`Tropical`]).

pub mod assignment;
pub mod charpoly;
pub mod csr;
pub mod digraph;
pub mod error;
pub mod fixtures;
pub mod matrix;
pub mod oracle;
pub mod partition;
pub mod rational;
pub mod scalar;
pub mod visualize;

pub use csr::{evaluate_expansion, expand, CsrExpansion, CsrTerm};
pub use charpoly::{characteristic_roots, chi_eval, extract_mmcs, ChiEvaluation, Mmcs, MultiCircuit};
pub use partition::{partition_nodes, NodePartition};
pub use visualize::{visualize_all, VisualizationResult};
pub use digraph::{Circuit, WeightedDigraph};
pub use error::{Error, Result};
pub use matrix::{DiagonalScaling, Matrix};

pub use rational::Rational;
pub use scalar::Tropical;

