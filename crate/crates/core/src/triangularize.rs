//! Simultaneous block triangularization by a unitary matrix, built from a
//! chain of common invariant subspaces found one quotient at a time.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::invariant::{restrict_to_quotient, SearchConfig, Searcher};
use crate::linalg::{invertible_to_unitary, orthogonal_complement, ComplexMatrix, Tolerances};
use crate::matrix_set::MatrixSet;
use crate::report::{
    Algorithm, BlockPartition, DecompositionReport, PartitionKind, Provenance, Transform,
};
use crate::verify::set_residuals;

/// Outcome of the invariant-subspace iteration.
#[derive(Debug, Clone)]
pub(crate) struct InvariantChain {
    /// Unitary `Q`; its leading columns span the nested invariant subspaces.
    pub q: ComplexMatrix,
    /// Block sizes in discovery order.
    pub sizes: Vec<usize>,
    pub search_exhausted: bool,
}

impl InvariantChain {
    pub fn cumulative_dims(&self) -> Vec<usize> {
        self.sizes
            .iter()
            .scan(0, |acc, &s| {
                *acc += s;
                Some(*acc)
            })
            .collect()
    }
}

fn hstack(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(a.nrows(), a.ncols() + b.ncols());
    out.columns_mut(0, a.ncols()).copy_from(a);
    out.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    out
}

pub(crate) fn invariant_chain(
    set: &MatrixSet,
    cfg: &SearchConfig,
    tol: &Tolerances,
) -> Result<InvariantChain> {
    cfg.validate()?;
    tol.validate()?;
    let n = set.dim();
    if n < 2 {
        return Err(Error::InvalidInput(
            "block triangularization needs matrices of size at least 2".into(),
        ));
    }
    let searcher = Searcher { cfg, tol };
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);

    // Accumulated basis of the current invariant subspace and an
    // orthonormal basis of its complement, in which the quotient lives.
    let mut found = ComplexMatrix::zeros(n, 0);
    let mut complement = ComplexMatrix::identity(n, n);
    let mut quotient: Vec<ComplexMatrix> = set.matrices().to_vec();
    let mut sizes = Vec::new();
    let mut search_exhausted = false;

    while complement.ncols() >= 2 {
        let s = complement.ncols();
        let Some(v) = searcher.search(&quotient, s - 1, &mut rng) else {
            if sizes.is_empty() {
                return Err(Error::NotTriangularizable {
                    search_exhausted: true,
                });
            }
            search_exhausted = true;
            break;
        };
        let lifted = &complement * v.basis();
        found = hstack(&found, &lifted);
        sizes.push(v.dim());
        complement = orthogonal_complement(&found, n, tol)?.into_basis();
        let transform = Transform::from_unitary(hstack(&found, &complement));
        quotient = restrict_to_quotient(set, &transform, found.ncols(), tol)?
            .matrices()
            .to_vec();
    }
    sizes.push(complement.ncols());

    let q = invertible_to_unitary(&hstack(&found, &complement), tol)?;
    Ok(InvariantChain {
        q,
        sizes,
        search_exhausted,
    })
}

/// Finds a unitary `U` with every `U A U*` block upper triangular. The
/// report's transform is `S = U*`, so the transformed matrices are
/// `S^-1 A S = U A U*`.
pub fn block_triangularize(
    set: &MatrixSet,
    cfg: &SearchConfig,
    tol: &Tolerances,
) -> Result<DecompositionReport> {
    let chain = invariant_chain(set, cfg, tol)?;
    let partition = BlockPartition::new(PartitionKind::BT, chain.sizes.clone())?;
    let transform = Transform::from_unitary(chain.q.clone());
    let transformed = set.conjugated(&transform.s, &transform.s_inv);
    let residuals = set_residuals(&transformed, &partition)?;
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    if worst > tol.residual_tol {
        return Err(Error::VerificationFailed {
            residual: worst,
            tol: tol.residual_tol,
        });
    }
    Ok(DecompositionReport {
        algorithm: Algorithm::A,
        partition,
        transform,
        transformed,
        residuals,
        provenance: Provenance::InvariantChain {
            chain_dims: chain.cumulative_dims(),
            search_exhausted: chain.search_exhausted,
            searched_matrices: set.len(),
            seed: cfg.rng_seed,
            trials: cfg.n_seed_combinations,
            retried: false,
        },
    })
}
