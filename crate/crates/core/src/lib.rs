//! Simultaneous block triangularization and block diagonalization of finite
//! sets of complex square matrices.
//!
//! Three algorithms are provided:
//!
//! * [`block_triangularize`]: a unitary `U` with every `U A U*` block upper
//!   triangular, from a chain of common invariant subspaces.
//! * [`block_diagonalize_unitary`]: a unitary `U` with every `U A U*` block
//!   diagonal, by triangularizing the set closed under conjugate transpose.
//! * [`block_diagonalize_invertible`]: an invertible `S` with every
//!   `S^-1 A S` block diagonal, from the generalized eigenspaces of a
//!   matrix commuting with the set.
//!
//! Every result is a [`DecompositionReport`] that [`validate_report`] can
//! re-check independently.

pub mod cli;
pub mod commutant;
pub mod diagonalize;
pub mod error;
pub mod invariant;
pub mod io;
pub mod linalg;
pub mod matrix_set;
pub mod report;
pub mod triangularize;
pub mod verify;

pub use commutant::{
    block_diagonalize_invertible, commutant_basis, commuting_witness, select_commuting_matrix,
    CommutantBasis,
};
pub use diagonalize::{adjoin_conjugate_transposes, block_diagonalize_unitary};
pub use error::{Error, Result};
pub use invariant::{find_minimal_invariant_subspace, SearchConfig};
pub use linalg::{ComplexMatrix, Spectrum, Subspace, Tolerances};
pub use matrix_set::MatrixSet;
pub use report::{
    Algorithm, BlockPartition, DecompositionReport, PartitionKind, Provenance, Transform,
};
pub use triangularize::block_triangularize;
pub use verify::{block_pattern_residual, validate_report, ValidationOutcome};
