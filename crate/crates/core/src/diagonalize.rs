//! Simultaneous block diagonalization by a unitary matrix: triangularize the
//! set together with its conjugate transposes, then the same unitary makes
//! the original set block diagonal.

use crate::error::{Error, Result};
use crate::invariant::SearchConfig;
use crate::linalg::{ComplexMatrix, Tolerances};
use crate::matrix_set::MatrixSet;
use crate::report::{
    Algorithm, BlockPartition, DecompositionReport, PartitionKind, Provenance, Transform,
};
use crate::triangularize::invariant_chain;
use crate::verify::set_residuals;

const DEDUP_GRID: f64 = 1e-14;

fn rounded_key(m: &ComplexMatrix) -> Vec<(i64, i64)> {
    m.iter()
        .map(|z| {
            (
                (z.re / DEDUP_GRID).round() as i64,
                (z.im / DEDUP_GRID).round() as i64,
            )
        })
        .collect()
}

/// The set together with the conjugate transpose of each member. Members
/// equal after rounding to 1e-14 (Hermitian matrices and their adjoints,
/// repeated inputs) appear once. Adjoints are named `<name>*`.
pub fn adjoin_conjugate_transposes(set: &MatrixSet) -> MatrixSet {
    let mut names: Vec<String> = Vec::new();
    let mut matrices: Vec<ComplexMatrix> = Vec::new();
    let mut keys: Vec<Vec<(i64, i64)>> = Vec::new();
    let adjoints = set
        .iter()
        .map(|(name, a)| (format!("{name}*"), a.adjoint()))
        .collect::<Vec<_>>();
    let originals = set.iter().map(|(name, a)| (name.to_string(), a.clone()));
    for (mut name, m) in originals.chain(adjoints) {
        let key = rounded_key(&m);
        if keys.contains(&key) {
            continue;
        }
        while names.contains(&name) {
            name.push('*');
        }
        keys.push(key);
        names.push(name);
        matrices.push(m);
    }
    MatrixSet::with_names(names, matrices).expect("adjoint-closed set inherits validity")
}

/// Finds a unitary `U` with every `U A U*` block diagonal, the finest
/// such splitting the invariant-subspace search can certify.
pub fn block_diagonalize_unitary(
    set: &MatrixSet,
    cfg: &SearchConfig,
    tol: &Tolerances,
) -> Result<DecompositionReport> {
    let gamma = adjoin_conjugate_transposes(set);
    match attempt(set, &gamma, cfg, tol, false) {
        Err(Error::InternalInconsistency { .. }) => {
            attempt(set, &gamma, cfg, &tol.tightened(), true)
        }
        other => other,
    }
}

fn attempt(
    set: &MatrixSet,
    gamma: &MatrixSet,
    cfg: &SearchConfig,
    tol: &Tolerances,
    retried: bool,
) -> Result<DecompositionReport> {
    let chain = invariant_chain(gamma, cfg, tol).map_err(|e| match e {
        Error::NotTriangularizable { .. } => Error::NotDiagonalizable,
        other => other,
    })?;
    let partition = BlockPartition::new(PartitionKind::BD, chain.sizes.clone())?;
    let transform = Transform::from_unitary(chain.q.clone());
    let transformed = set.conjugated(&transform.s, &transform.s_inv);
    let residuals = set_residuals(&transformed, &partition)?;
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    if worst > tol.residual_tol {
        return Err(Error::InternalInconsistency { residual: worst });
    }
    Ok(DecompositionReport {
        algorithm: Algorithm::B,
        partition,
        transform,
        transformed,
        residuals,
        provenance: Provenance::InvariantChain {
            chain_dims: chain.cumulative_dims(),
            search_exhausted: chain.search_exhausted,
            searched_matrices: gamma.len(),
            seed: cfg.rng_seed,
            trials: cfg.n_seed_combinations,
            retried,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, from_real_rows};

    #[test]
    fn hermitian_member_appears_once() {
        let h = from_real_rows(&[&[1.0, 2.0], &[2.0, 3.0]]);
        let gamma = adjoin_conjugate_transposes(&MatrixSet::new(vec![h.clone()]).unwrap());
        assert_eq!(gamma.len(), 1);
        assert_eq!(gamma.matrices()[0], h);
    }

    #[test]
    fn anti_hermitian_gets_its_negative() {
        let i = ComplexMatrix::identity(2, 2) * c64(0.0, 1.0);
        let gamma = adjoin_conjugate_transposes(&MatrixSet::new(vec![i.clone()]).unwrap());
        assert_eq!(gamma.len(), 2);
        assert_eq!(gamma.matrices()[1], -i);
        assert_eq!(gamma.names(), ["A1", "A1*"]);
    }

    #[test]
    fn adjoint_names_do_not_collide() {
        let a = from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let b = from_real_rows(&[&[0.0, 0.0], &[1.0, 1.0]]);
        let set = MatrixSet::with_names(vec!["X".into(), "X*".into()], vec![a, b]).unwrap();
        let gamma = adjoin_conjugate_transposes(&set);
        assert_eq!(gamma.names(), ["X", "X*", "X**", "X***"]);
    }
}
