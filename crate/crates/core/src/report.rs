use crate::error::{Error, Result};
use crate::linalg::{inverse, ComplexMatrix, Spectrum, Tolerances};
use crate::matrix_set::MatrixSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    /// Unitary block triangularization through a chain of invariant subspaces.
    A,
    /// Unitary block diagonalization through the adjoint-closed set.
    B,
    /// Invertible block diagonalization through a commuting matrix.
    C,
}

impl Algorithm {
    pub fn tag(self) -> &'static str {
        match self {
            Algorithm::A => "A",
            Algorithm::B => "B",
            Algorithm::C => "C",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionKind {
    /// Block upper triangular.
    BT,
    /// Block diagonal.
    BD,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPartition {
    pub kind: PartitionKind,
    pub sizes: Vec<usize>,
}

impl BlockPartition {
    pub fn new(kind: PartitionKind, sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(Error::InvalidInput(format!(
                "block sizes must be a nonempty list of positive counts, got {sizes:?}"
            )));
        }
        Ok(BlockPartition { kind, sizes })
    }

    pub fn dim(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn block_count(&self) -> usize {
        self.sizes.len()
    }

    /// A single block says nothing about the structure.
    pub fn is_trivial(&self) -> bool {
        self.sizes.len() < 2
    }

    /// Starting row of each block.
    pub fn offsets(&self) -> Vec<usize> {
        self.sizes
            .iter()
            .scan(0, |acc, &s| {
                let start = *acc;
                *acc += s;
                Some(start)
            })
            .collect()
    }

    /// Block index of every row.
    pub(crate) fn block_of_rows(&self) -> Vec<usize> {
        self.sizes
            .iter()
            .enumerate()
            .flat_map(|(b, &s)| std::iter::repeat_n(b, s))
            .collect()
    }

    pub fn sorted_sizes(&self) -> Vec<usize> {
        let mut s = self.sizes.clone();
        s.sort_unstable();
        s
    }
}

/// A change of basis `S` together with its inverse. Transformed matrices are
/// `S^-1 A S`; for a unitary `U` acting as `U A U*` this is `S = U*`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transform {
    pub s: ComplexMatrix,
    pub s_inv: ComplexMatrix,
    pub unitary: bool,
}

impl Transform {
    pub fn identity(n: usize) -> Self {
        Transform {
            s: ComplexMatrix::identity(n, n),
            s_inv: ComplexMatrix::identity(n, n),
            unitary: true,
        }
    }

    /// `q` must have orthonormal columns; its inverse is its adjoint.
    pub fn from_unitary(q: ComplexMatrix) -> Self {
        let s_inv = q.adjoint();
        Transform {
            s: q,
            s_inv,
            unitary: true,
        }
    }

    pub fn from_invertible(s: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let s_inv = inverse(&s, tol)?;
        Ok(Transform {
            s,
            s_inv,
            unitary: false,
        })
    }

    pub fn dim(&self) -> usize {
        self.s.nrows()
    }

    /// The unitary `U = S*` such that the transformed set is `U A U*`.
    pub fn u(&self) -> ComplexMatrix {
        self.s.adjoint()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Provenance {
    /// Algorithms A and B: the chain of common invariant subspaces.
    InvariantChain {
        /// Dimensions of the nested subspaces V_1 < V_2 < ... < V_t = C^n.
        chain_dims: Vec<usize>,
        /// The last block was kept because the heuristic search found no
        /// smaller invariant subspace inside it, not because it is provably
        /// irreducible.
        search_exhausted: bool,
        /// Number of matrices actually searched (|Gamma| for algorithm B).
        searched_matrices: usize,
        seed: u64,
        trials: usize,
        retried: bool,
    },
    /// Algorithm C: the commuting matrix whose generalized eigenspaces
    /// give the blocks.
    CommutingMatrix {
        commutant_dim: usize,
        /// Which candidate was chosen, e.g. `basis[1]` or `combination[3]`.
        candidate: String,
        matrix: ComplexMatrix,
        spectrum: Spectrum,
        seed: u64,
        trials: usize,
        retried: bool,
    },
    /// Read from a report file that carried no provenance.
    Unspecified,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionReport {
    pub algorithm: Algorithm,
    pub partition: BlockPartition,
    pub transform: Transform,
    /// `S^-1 A S` for every input matrix, under the input names.
    pub transformed: MatrixSet,
    /// Pattern residual of each transformed matrix, in input order.
    pub residuals: Vec<f64>,
    pub provenance: Provenance,
}

impl DecompositionReport {
    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().copied().fold(0.0, f64::max)
    }
}
