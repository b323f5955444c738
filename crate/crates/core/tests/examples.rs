//! Worked examples with known answers.

mod common;

use num_complex::Complex64;
use simblock::invariant::{invariance_residual, orbit_closure, restrict_to_quotient, unit_vector};
use simblock::linalg::{
    assemble, generalized_eigenspaces, invertible_to_unitary, nullspace, orthogonal_complement,
    qr_gram_schmidt, spectrum,
};
use simblock::{
    adjoin_conjugate_transposes, block_diagonalize_invertible, block_diagonalize_unitary,
    block_triangularize, commutant_basis, find_minimal_invariant_subspace, validate_report,
    BlockPartition, ComplexMatrix, DecompositionReport, MatrixSet, PartitionKind, Provenance,
    SearchConfig, Subspace, Tolerances, Transform,
};

use common::*;

fn tol() -> Tolerances {
    Tolerances::default()
}

fn span(n: usize, cols: &[&[f64]]) -> Subspace {
    let m = ComplexMatrix::from_fn(n, cols.len(), |i, j| Complex64::new(cols[j][i], 0.0));
    Subspace::span_of(&m, &tol())
}

fn coordinate_span(n: usize, indices: &[usize]) -> Subspace {
    let cols: Vec<Vec<f64>> = indices
        .iter()
        .map(|&k| (0..n).map(|i| if i + 1 == k { 1.0 } else { 0.0 }).collect())
        .collect();
    let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
    span(n, &refs)
}

fn permutation(columns: &[usize]) -> ComplexMatrix {
    let n = columns.len();
    ComplexMatrix::from_fn(n, n, |i, j| {
        Complex64::new(if columns[j] == i + 1 { 1.0 } else { 0.0 }, 0.0)
    })
}

#[test]
fn orbit_of_e1_under_triangular_example_is_e1_e4() {
    let set = load("example31.json");
    let w = orbit_closure(set.matrices(), &unit_vector(6, 0), &tol());
    assert_eq!(w.dim(), 2);
    assert!(w.same_span(&coordinate_span(6, &[1, 4]), 1e-12));
}

#[test]
fn search_on_triangular_example_finds_e1_e4() {
    let set = load("example31.json");
    let w = find_minimal_invariant_subspace(&set, 5, &SearchConfig::default(), &tol()).unwrap();
    assert!(w.same_span(&coordinate_span(6, &[1, 4]), 1e-12));
    assert!(invariance_residual(set.matrices(), &w) <= 1e-12);
}

#[test]
fn final_two_by_two_pair_has_no_invariant_line() {
    let set = MatrixSet::new(vec![
        real(&[&[5.0, 0.0], &[1.0, 6.0]]),
        real(&[&[36.0, -1.0], &[4.0, 40.0]]),
    ])
    .unwrap();
    for seed in 0..20 {
        let cfg = SearchConfig::with_seed(seed);
        assert!(find_minimal_invariant_subspace(&set, 1, &cfg, &tol()).is_none());
    }
}

#[test]
fn first_quotient_of_triangular_example() {
    let set = load("example31.json");
    let s = Transform::from_unitary(permutation(&[1, 4, 2, 3, 5, 6]));
    let q = restrict_to_quotient(&set, &s, 2, &tol()).unwrap();
    let t1 = real(&[
        &[5.0, 0.0, 0.0, 0.0],
        &[1.0, 4.0, 1.0, 2.0],
        &[2.0, 0.0, 2.0, 5.0],
        &[1.0, 0.0, 0.0, 6.0],
    ]);
    let t2 = real(&[
        &[36.0, 0.0, 0.0, -1.0],
        &[12.0, 32.0, 4.0, 4.0],
        &[4.0, -1.0, 28.0, 8.0],
        &[4.0, 0.0, 0.0, 40.0],
    ]);
    assert_eq!(q.matrices()[0], t1);
    assert_eq!(q.matrices()[1], t2);
}

#[test]
fn quotient_by_nothing_keeps_size() {
    let set = load("example31.json");
    let q = restrict_to_quotient(&set, &Transform::identity(6), 0, &tol()).unwrap();
    assert_eq!(q, set);
}

#[test]
fn triangular_example_recovers_the_permutation() {
    let set = load("example31.json");
    let r = block_triangularize(&set, &SearchConfig::default(), &tol()).unwrap();
    assert_eq!(r.partition.sizes, vec![2, 2, 2]);
    match &r.provenance {
        Provenance::InvariantChain {
            chain_dims,
            search_exhausted,
            ..
        } => {
            assert_eq!(chain_dims, &vec![2, 4, 6]);
            assert!(*search_exhausted);
        }
        other => panic!("unexpected provenance {other:?}"),
    }
    let expected = permutation(&[1, 4, 3, 5, 2, 6]);
    assert!(max_abs(&(&r.transform.s - &expected)) < 1e-10);
    let a1 = &r.transformed.matrices()[0];
    let expected = real(&[
        &[3.0, 0.0, 1.0, 1.0, 2.0, 1.0],
        &[1.0, 1.0, 1.0, 1.0, 3.0, 3.0],
        &[0.0, 0.0, 4.0, 1.0, 1.0, 2.0],
        &[0.0, 0.0, 0.0, 2.0, 2.0, 5.0],
        &[0.0, 0.0, 0.0, 0.0, 5.0, 0.0],
        &[0.0, 0.0, 0.0, 0.0, 1.0, 6.0],
    ]);
    assert!(max_abs(&(a1 - expected)) < 1e-10);
}

#[test]
fn complement_of_e1_e4() {
    let b = coordinate_span(6, &[1, 4]);
    let c = orthogonal_complement(b.basis(), 6, &tol()).unwrap();
    assert!(c.same_span(&coordinate_span(6, &[2, 3, 5, 6]), 1e-12));
}

#[test]
fn permutation_is_its_own_unitary_factor() {
    let s = permutation(&[1, 4, 3, 5, 2, 6]);
    assert_eq!(invertible_to_unitary(&s, &tol()).unwrap(), s);
}

#[test]
fn qr_of_random_complex_matrix() {
    let mut g = rng(11);
    let s = random_invertible(&mut g, 5, 500.0);
    let (q, r) = qr_gram_schmidt(&s, &tol()).unwrap();
    assert!(max_abs(&(q.adjoint() * &q - ComplexMatrix::identity(5, 5))) < 1e-12);
    assert!(max_abs(&(&q * &r - &s)) < 1e-10);
    for i in 0..5 {
        for j in 0..i {
            assert_eq!(r[(i, j)], Complex64::new(0.0, 0.0));
        }
    }
}

#[test]
fn nullspace_of_rank_one_outer_product() {
    let mut g = rng(3);
    let u = random_complex(&mut g, 5, 1);
    let v = random_complex(&mut g, 5, 1);
    let m = &u * v.transpose();
    let k = nullspace(&m, &tol());
    assert_eq!(k.dim(), 4);
    // Every kernel vector x has v^T x = 0, i.e. is orthogonal to conj(v).
    assert!(max_abs(&(v.transpose() * k.basis())) < 1e-12);
}

#[test]
fn intro_commuting_matrix_and_its_eigenspaces() {
    let set = load("intro.json");
    let c = set.matrices()[1].clone();
    let basis = commutant_basis(&set, &tol());
    assert!(basis.dim() >= 2);
    let stacked = ComplexMatrix::from_fn(9, basis.dim(), |i, j| basis.members[j][(i % 3, i / 3)]);
    let span = Subspace::span_of(&stacked, &tol());
    for target in [ComplexMatrix::identity(3, 3), c.clone()] {
        let v = simblock::linalg::ComplexVector::from_fn(9, |i, _| target[(i % 3, i / 3)]);
        assert!(span.distance_to(&v) < 1e-10);
    }

    let spec = spectrum(&c, &tol());
    assert!(spec.eigenvalues[0].norm() < 1e-12);
    assert!((spec.eigenvalues[1] - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    assert_eq!(spec.multiplicities, vec![2, 1]);
    let spaces = generalized_eigenspaces(&c, &spec, &tol()).unwrap();
    assert!(spaces[0].same_span(&span_of_cols(&[&[0.0, 0.0, 1.0], &[-0.5, 1.0, 0.0]]), 1e-10));
    assert!(spaces[1].same_span(&span_of_cols(&[&[0.0, 1.0, 1.0]]), 1e-10));
}

fn span_of_cols(cols: &[&[f64]]) -> Subspace {
    span(cols[0].len(), cols)
}

#[test]
fn six_matrix_example_commuting_matrix() {
    let c = real(&[
        &[0.0, 0.0, 0.0, 0.0, 0.0, 1.0],
        &[0.0, 0.0, 0.0, 0.0, -1.0, 0.0],
        &[0.0, 0.0, 0.0, 1.0, 0.0, 0.0],
        &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0],
        &[0.0, -1.0, 0.0, 0.0, 0.0, 0.0],
        &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    ]);
    let set = load("example41.json");
    for a in set.matrices() {
        assert!(max_abs(&(&c * a - a * &c)) < 1e-15);
    }
    let spec = spectrum(&c, &tol());
    assert_eq!(spec.multiplicities, vec![3, 3]);
    assert!((spec.eigenvalues[0] - Complex64::new(-1.0, 0.0)).norm() < 1e-12);
    let spaces = generalized_eigenspaces(&c, &spec, &tol()).unwrap();
    let minus = span_of_cols(&[
        &[-1.0, 0.0, 0.0, 0.0, 0.0, 1.0],
        &[0.0, 1.0, 0.0, 0.0, 1.0, 0.0],
        &[0.0, 0.0, -1.0, 1.0, 0.0, 0.0],
    ]);
    assert!(spaces[0].same_span(&minus, 1e-10));
    let s = assemble(&spaces);
    assert_eq!(simblock::linalg::numerical_rank(&s, &tol()), 6);
}

#[test]
fn six_matrix_example_blocks_are_antisymmetric_triples() {
    let set = load("example41.json");
    let r = block_diagonalize_invertible(&set, &SearchConfig::default(), &tol()).unwrap();
    assert_eq!(r.partition.sizes, vec![3, 3]);
    assert!(!r.transform.unitary);
    assert!(validate_report(&set, &r, &tol()).passed());
}

#[test]
fn adjoint_closed_set_of_first_diagonal_example() {
    let set = load("example32.json");
    let gamma = adjoin_conjugate_transposes(&set);
    assert_eq!(gamma.names(), ["A1", "A2", "A2*"]);
    assert_eq!(gamma.matrices()[2], set.matrices()[1].transpose());
}

#[test]
fn third_diagonal_example_uses_diagonal_mixing() {
    let set = load("example34.json");
    let r = block_diagonalize_unitary(&set, &SearchConfig::default(), &tol()).unwrap();
    assert_eq!(sorted(r.partition.sizes.clone()), vec![1, 1, 2, 2, 3]);
    // Some column of U* mixes e1 and e5 with equal weight.
    let s = &r.transform.s;
    let mixes = (0..9).any(|j| {
        let (a, b) = (s[(0, j)].norm(), s[(4, j)].norm());
        a > 0.1 && (a - b).abs() < 1e-10
    });
    assert!(mixes);
}

fn golden(set: &MatrixSet) -> DecompositionReport {
    let text = std::fs::read_to_string(data_path("golden31.json")).unwrap();
    simblock::io::parse_report_str(&text, "golden31.json", set).unwrap()
}

#[test]
fn golden_report_validates() {
    let set = load("example31.json");
    assert!(validate_report(&set, &golden(&set), &tol()).passed());
}

#[test]
fn validation_rejects_trivial_partition() {
    let set = load("example31.json");
    let mut r = golden(&set);
    r.transform = Transform::identity(6);
    r.partition = BlockPartition::new(PartitionKind::BT, vec![6]).unwrap();
    let out = validate_report(&set, &r, &tol());
    assert!(out
        .failures
        .contains(&simblock::verify::ValidationFailure::TrivialPartition));
}

#[test]
fn validation_rejects_zeroed_column() {
    let set = load("example32.json");
    let mut r = block_diagonalize_unitary(&set, &SearchConfig::default(), &tol()).unwrap();
    r.transform.s.column_mut(3).fill(Complex64::new(0.0, 0.0));
    let out = validate_report(&set, &r, &tol());
    assert!(matches!(
        out.failures.as_slice(),
        [simblock::verify::ValidationFailure::SingularTransform { .. }]
    ));
}

#[test]
fn validation_rejects_block_triangular_claimed_as_diagonal() {
    let set = load("example31.json");
    let mut r = golden(&set);
    r.partition = BlockPartition::new(PartitionKind::BD, vec![2, 2, 2]).unwrap();
    assert!(!validate_report(&set, &r, &tol()).passed());
}
