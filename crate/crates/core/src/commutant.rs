//! Block diagonalization by an invertible matrix through a matrix that
//! commutes with the whole set: its generalized eigenspaces are common
//! invariant subspaces, and together they split the space.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::invariant::SearchConfig;
use crate::linalg::{
    assemble, c64, generalized_eigenspaces, nullspace, spectrum, ComplexMatrix, Spectrum,
    Tolerances,
};
use crate::matrix_set::MatrixSet;
use crate::report::{
    Algorithm, BlockPartition, DecompositionReport, PartitionKind, Provenance, Transform,
};
use crate::verify::set_residuals;

/// A basis of `{M : M A = A M for every A in the set}`.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutantBasis {
    pub ambient_dim: usize,
    pub members: Vec<ComplexMatrix>,
}

impl CommutantBasis {
    pub fn dim(&self) -> usize {
        self.members.len()
    }
}

/// `vec(A M - M A) = (I ⊗ A - Aᵀ ⊗ I) vec(M)` with column-major `vec`.
pub fn commutator_operator(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.nrows();
    let identity = ComplexMatrix::identity(n, n);
    identity.kronecker(a) - a.transpose().kronecker(&identity)
}

pub fn commutant_basis(set: &MatrixSet, tol: &Tolerances) -> CommutantBasis {
    let n = set.dim();
    let n2 = n * n;
    let mut stack = ComplexMatrix::zeros(set.len() * n2, n2);
    for (s, a) in set.matrices().iter().enumerate() {
        stack
            .rows_mut(s * n2, n2)
            .copy_from(&commutator_operator(a));
    }
    let kernel = nullspace(&stack, tol);
    let members = kernel
        .basis()
        .column_iter()
        .map(|v| ComplexMatrix::from_column_slice(n, n, v.as_slice()))
        .collect();
    CommutantBasis {
        ambient_dim: n,
        members,
    }
}

/// A matrix from the commutant with its clustered spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutingCandidate {
    /// `basis[i]`, `combination[j]` or `complex_combination[j]`.
    pub label: String,
    pub matrix: ComplexMatrix,
    pub spectrum: Spectrum,
}

/// Basis members and seeded random combinations, ordered by distinct
/// eigenvalue count (largest first; ties keep generation order).
pub fn rank_commuting_candidates(
    basis: &CommutantBasis,
    cfg: &SearchConfig,
    tol: &Tolerances,
) -> Vec<CommutingCandidate> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let make = |label: String, matrix: ComplexMatrix| {
        let spectrum = spectrum(&matrix, tol);
        CommutingCandidate {
            label,
            matrix,
            spectrum,
        }
    };
    let combine = |rng: &mut ChaCha8Rng, complex: bool| {
        let mut c = ComplexMatrix::zeros(basis.ambient_dim, basis.ambient_dim);
        for m in &basis.members {
            let re = rng.random_range(-1.0..=1.0);
            let im = if complex { rng.random_range(-1.0..=1.0) } else { 0.0 };
            c += m * c64(re, im);
        }
        c
    };

    let mut out: Vec<CommutingCandidate> = basis
        .members
        .iter()
        .enumerate()
        .map(|(i, m)| make(format!("basis[{i}]"), m.clone()))
        .collect();
    for j in 0..cfg.n_seed_combinations {
        let c = combine(&mut rng, false);
        out.push(make(format!("combination[{j}]"), c));
    }
    if out.iter().all(|c| c.spectrum.distinct_count() < 2) {
        for j in 0..cfg.n_seed_combinations {
            let c = combine(&mut rng, true);
            out.push(make(format!("complex_combination[{j}]"), c));
        }
    }
    out.sort_by_key(|c| std::cmp::Reverse(c.spectrum.distinct_count()));
    out
}

/// The first-ranked commuting candidate with at least two distinct
/// eigenvalues.
pub fn select_commuting_matrix(
    basis: &CommutantBasis,
    cfg: &SearchConfig,
    tol: &Tolerances,
) -> Result<CommutingCandidate> {
    let ranked = rank_commuting_candidates(basis, cfg, tol);
    let total = ranked.len();
    ranked
        .into_iter()
        .find(|c| c.spectrum.distinct_count() >= 2)
        .ok_or(Error::OnlyScalarSpectrum { candidates: total })
}

pub fn block_diagonalize_invertible(
    set: &MatrixSet,
    cfg: &SearchConfig,
    tol: &Tolerances,
) -> Result<DecompositionReport> {
    cfg.validate()?;
    tol.validate()?;
    if set.dim() < 2 {
        return Err(Error::InvalidInput(
            "block diagonalization needs matrices of size at least 2".into(),
        ));
    }
    match attempt(set, cfg, tol, false) {
        Err(e) if !e.is_no_decomposition() => attempt(set, cfg, &tol.tightened(), true),
        other => other,
    }
}

fn attempt(
    set: &MatrixSet,
    cfg: &SearchConfig,
    tol: &Tolerances,
    retried: bool,
) -> Result<DecompositionReport> {
    let basis = commutant_basis(set, tol);
    let ranked = rank_commuting_candidates(&basis, cfg, tol);
    let total = ranked.len();
    let mut last_err = Error::OnlyScalarSpectrum { candidates: total };
    for candidate in ranked.into_iter().filter(|c| c.spectrum.distinct_count() >= 2) {
        match split_by(set, &candidate, tol) {
            Ok((partition, transform, transformed, residuals)) => {
                return Ok(DecompositionReport {
                    algorithm: Algorithm::C,
                    partition,
                    transform,
                    transformed,
                    residuals,
                    provenance: Provenance::CommutingMatrix {
                        commutant_dim: basis.dim(),
                        candidate: candidate.label,
                        matrix: candidate.matrix,
                        spectrum: candidate.spectrum,
                        seed: cfg.rng_seed,
                        trials: cfg.n_seed_combinations,
                        retried,
                    },
                });
            }
            Err(e) => last_err = e,
        }
    }
    Err(last_err)
}

type Split = (BlockPartition, Transform, MatrixSet, Vec<f64>);

fn split_by(set: &MatrixSet, candidate: &CommutingCandidate, tol: &Tolerances) -> Result<Split> {
    let spaces = generalized_eigenspaces(&candidate.matrix, &candidate.spectrum, tol)?;
    let transform = Transform::from_invertible(assemble(&spaces), tol)?;
    let partition = BlockPartition::new(
        PartitionKind::BD,
        candidate.spectrum.multiplicities.clone(),
    )?;
    let transformed = set.conjugated(&transform.s, &transform.s_inv);
    let residuals = set_residuals(&transformed, &partition)?;
    let worst = residuals.iter().copied().fold(0.0, f64::max);
    if worst > tol.residual_tol {
        return Err(Error::VerificationFailed {
            residual: worst,
            tol: tol.residual_tol,
        });
    }
    Ok((partition, transform, transformed, residuals))
}

/// `S diag(1 I, 2 I, ..., t I) S^-1` for a block diagonal report: a matrix
/// with exactly `t` distinct eigenvalues commuting with the whole set.
pub fn commuting_witness(report: &DecompositionReport) -> ComplexMatrix {
    let n = report.transform.dim();
    let block = report.partition.block_of_rows();
    let d = ComplexMatrix::from_fn(n, n, |i, j| {
        if i == j {
            c64((block[i] + 1) as f64, 0.0)
        } else {
            c64(0.0, 0.0)
        }
    });
    &report.transform.s * d * &report.transform.s_inv
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{from_real_rows, max_abs};

    #[test]
    fn identity_commutes_with_everything() {
        let set = MatrixSet::new(vec![ComplexMatrix::identity(3, 3)]).unwrap();
        assert_eq!(commutant_basis(&set, &Tolerances::default()).dim(), 9);
    }

    #[test]
    fn members_commute_under_column_major_convention() {
        let a = from_real_rows(&[&[1.0, 2.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 3.0]]);
        let set = MatrixSet::new(vec![a.clone()]).unwrap();
        let b = commutant_basis(&set, &Tolerances::default());
        assert_eq!(b.dim(), 3);
        for m in &b.members {
            assert!(max_abs(&(m * &a - &a * m)) < 1e-12);
        }
    }

    #[test]
    fn diagonal_matrix_yields_three_distinct_eigenvalues() {
        let a = from_real_rows(&[&[1.0, 0.0, 0.0], &[0.0, 2.0, 0.0], &[0.0, 0.0, 3.0]]);
        let tol = Tolerances::default();
        let b = commutant_basis(&MatrixSet::new(vec![a]).unwrap(), &tol);
        let c = select_commuting_matrix(&b, &SearchConfig::default(), &tol).unwrap();
        assert_eq!(c.spectrum.distinct_count(), 3);
    }

    #[test]
    fn identity_only_basis_is_scalar() {
        let b = CommutantBasis {
            ambient_dim: 2,
            members: vec![ComplexMatrix::identity(2, 2)],
        };
        let err = select_commuting_matrix(&b, &SearchConfig::default(), &Tolerances::default())
            .unwrap_err();
        assert!(matches!(err, Error::OnlyScalarSpectrum { .. }));
    }

    #[test]
    fn jordan_block_has_only_scalar_spectrum() {
        let j = from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        let set = MatrixSet::new(vec![j]).unwrap();
        let err = block_diagonalize_invertible(&set, &SearchConfig::default(), &Tolerances::default())
            .unwrap_err();
        assert!(matches!(err, Error::OnlyScalarSpectrum { .. }));
    }

    #[test]
    fn witness_commutes_and_has_block_count_eigenvalues() {
        let a = from_real_rows(&[&[2.0, 1.0, 0.0], &[0.0, 2.0, 0.0], &[0.0, 0.0, 5.0]]);
        let set = MatrixSet::new(vec![a.clone()]).unwrap();
        let tol = Tolerances::default();
        let r = block_diagonalize_invertible(&set, &SearchConfig::default(), &tol).unwrap();
        assert_eq!(r.partition.sorted_sizes(), vec![1, 2]);
        let w = commuting_witness(&r);
        assert!(max_abs(&(&w * &a - &a * &w)) < 1e-10);
        assert_eq!(spectrum(&w, &tol).distinct_count(), 2);
    }
}
