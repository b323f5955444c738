//! Dense complex kernels shared by every decomposition: numerical rank and
//! null spaces, orthonormal bases, Gram-Schmidt QR, clustered spectra and
//! generalized eigenspaces.
//!
//! All rank decisions go through singular values with a cutoff relative to
//! the largest one. When a matrix has no imaginary part the SVD runs in real
//! arithmetic, so real inputs produce real bases.

use std::cmp::Ordering;

use nalgebra::linalg::{Schur, SVD};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Numerical cutoffs. The defaults suit inputs with entries of order 1 to 100.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Relative singular-value cutoff for rank decisions.
    pub rank_tol: f64,
    /// Absolute bound on entries that a block pattern requires to be zero.
    pub residual_tol: f64,
    /// Absolute radius within which eigenvalues are merged.
    pub eig_cluster_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            rank_tol: 1e-10,
            residual_tol: 1e-8,
            eig_cluster_tol: 1e-7,
        }
    }
}

impl Tolerances {
    pub fn new(rank_tol: f64, residual_tol: f64, eig_cluster_tol: f64) -> Result<Self> {
        let tol = Tolerances {
            rank_tol,
            residual_tol,
            eig_cluster_tol,
        };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("rank_tol", self.rank_tol),
            ("residual_tol", self.residual_tol),
            ("eig_cluster_tol", self.eig_cluster_tol),
        ] {
            if !(value > 0.0 && value < 1.0) {
                return Err(Error::InvalidInput(format!(
                    "{name} must lie in (0, 1), got {value}"
                )));
            }
        }
        Ok(())
    }

    /// Same tolerances with the rank cutoff tightened by a factor of 100,
    /// used for the single retry after a numerical verification failure.
    pub fn tightened(&self) -> Self {
        Tolerances {
            rank_tol: self.rank_tol * 0.01,
            ..*self
        }
    }
}

/// A subspace of C^n held as an n x d matrix with orthonormal columns.
/// `d = 0` is the trivial subspace.
#[derive(Debug, Clone, PartialEq)]
pub struct Subspace {
    basis: ComplexMatrix,
}

impl Subspace {
    /// Wraps a basis the caller guarantees to be orthonormal.
    pub(crate) fn from_orthonormal(basis: ComplexMatrix) -> Self {
        Subspace { basis }
    }

    pub fn zero(n: usize) -> Self {
        Subspace {
            basis: ComplexMatrix::zeros(n, 0),
        }
    }

    pub fn full(n: usize) -> Self {
        Subspace {
            basis: ComplexMatrix::identity(n, n),
        }
    }

    /// Orthonormal basis of the column span of `vectors`.
    pub fn span_of(vectors: &ComplexMatrix, tol: &Tolerances) -> Self {
        range(vectors, tol)
    }

    pub fn ambient_dim(&self) -> usize {
        self.basis.nrows()
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn basis(&self) -> &ComplexMatrix {
        &self.basis
    }

    pub fn into_basis(self) -> ComplexMatrix {
        self.basis
    }

    pub fn projector(&self) -> ComplexMatrix {
        &self.basis * self.basis.adjoint()
    }

    /// Norm of the component of `v` orthogonal to the subspace.
    pub fn distance_to(&self, v: &ComplexVector) -> f64 {
        if self.dim() == 0 {
            return v.norm();
        }
        let coeffs = self.basis.adjoint() * v;
        (v - &self.basis * coeffs).norm()
    }

    /// True when both subspaces have the same dimension and each basis lies
    /// in the other within `tol` (per column).
    pub fn same_span(&self, other: &Subspace, tol: f64) -> bool {
        if self.dim() != other.dim() || self.ambient_dim() != other.ambient_dim() {
            return false;
        }
        (0..other.dim()).all(|j| self.distance_to(&other.basis.column(j).into_owned()) <= tol)
    }

    /// Re-express the basis in canonical form; see [`canonical_basis`].
    pub fn canonicalized(&self) -> Subspace {
        Subspace {
            basis: canonical_basis(&self.basis),
        }
    }
}

pub(crate) fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn from_real_rows(rows: &[&[f64]]) -> ComplexMatrix {
    let n = rows.len();
    let m = rows.first().map_or(0, |r| r.len());
    ComplexMatrix::from_fn(n, m, |i, j| c64(rows[i][j], 0.0))
}

pub fn is_real(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.im == 0.0)
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn is_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Singular values plus a full set of right singular vectors (as columns).
/// Wide matrices are padded with zero rows so V is always square.
fn svd_right(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let cols = m.ncols();
    let work = if m.nrows() < cols {
        let mut padded = ComplexMatrix::zeros(cols, cols);
        padded.rows_mut(0, m.nrows()).copy_from(m);
        padded
    } else {
        m.clone()
    };
    if is_real(&work) {
        let real = work.map(|z| z.re);
        let svd = SVD::new(real, false, true);
        let v = svd.v_t.expect("right singular vectors requested").transpose();
        (svd.singular_values.iter().copied().collect(), v.map(|x| c64(x, 0.0)))
    } else {
        let svd = SVD::new(work, false, true);
        let v = svd.v_t.expect("right singular vectors requested").adjoint();
        (svd.singular_values.iter().copied().collect(), v)
    }
}

/// Singular values plus the thin set of left singular vectors.
fn svd_left(m: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    if is_real(m) {
        let svd = SVD::new(m.map(|z| z.re), true, false);
        let u = svd.u.expect("left singular vectors requested");
        (svd.singular_values.iter().copied().collect(), u.map(|x| c64(x, 0.0)))
    } else {
        let svd = SVD::new(m.clone(), true, false);
        (
            svd.singular_values.iter().copied().collect(),
            svd.u.expect("left singular vectors requested"),
        )
    }
}

pub fn singular_values(m: &ComplexMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    if is_real(m) {
        m.map(|z| z.re).singular_values().iter().copied().collect()
    } else {
        m.singular_values().iter().copied().collect()
    }
}

pub fn spectral_norm(m: &ComplexMatrix) -> f64 {
    singular_values(m).into_iter().fold(0.0, f64::max)
}

pub fn numerical_rank(m: &ComplexMatrix, tol: &Tolerances) -> usize {
    let sv = singular_values(m);
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol.rank_tol * smax).count()
}

/// Orthonormal basis of `{v : |Mv| <= rank_tol * sigma_max(M) * |v|}`.
pub fn nullspace(m: &ComplexMatrix, tol: &Tolerances) -> Subspace {
    let cols = m.ncols();
    let (sv, v) = svd_right(m);
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return Subspace::full(cols);
    }
    let cutoff = tol.rank_tol * smax;
    let keep: Vec<usize> = (0..cols).filter(|&j| sv[j] <= cutoff).collect();
    let basis = ComplexMatrix::from_fn(cols, keep.len(), |i, k| v[(i, keep[k])]);
    Subspace::from_orthonormal(basis)
}

/// Orthonormal basis of the column span of `m`.
pub fn range(m: &ComplexMatrix, tol: &Tolerances) -> Subspace {
    let n = m.nrows();
    if m.ncols() == 0 {
        return Subspace::zero(n);
    }
    let (sv, u) = svd_left(m);
    let smax = sv.iter().copied().fold(0.0, f64::max);
    if smax == 0.0 {
        return Subspace::zero(n);
    }
    let keep: Vec<usize> = (0..sv.len()).filter(|&j| sv[j] > tol.rank_tol * smax).collect();
    Subspace::from_orthonormal(ComplexMatrix::from_fn(n, keep.len(), |i, k| u[(i, keep[k])]))
}

/// Modified Gram-Schmidt with one re-orthogonalization pass. Columns that
/// collapse to zero are dropped.
fn orthonormalize_columns(m: &ComplexMatrix) -> ComplexMatrix {
    let n = m.nrows();
    let mut out: Vec<ComplexVector> = Vec::with_capacity(m.ncols());
    for j in 0..m.ncols() {
        let mut v = m.column(j).into_owned();
        let original = v.norm();
        for _ in 0..2 {
            for q in &out {
                let r = q.dotc(&v);
                v -= q * r;
            }
        }
        let norm = v.norm();
        if norm > 1e-12 * original.max(f64::MIN_POSITIVE) {
            out.push(v / c64(norm, 0.0));
        }
    }
    let mut basis = ComplexMatrix::zeros(n, out.len());
    for (j, q) in out.iter().enumerate() {
        basis.set_column(j, q);
    }
    basis
}

/// Canonical orthonormal basis of the span of the columns of `basis`:
/// reduced row echelon form of the transposed basis, then Gram-Schmidt.
/// Two bases of the same subspace map to the same canonical basis (up to
/// rounding), and coordinate subspaces come back as unit vectors.
pub fn canonical_basis(basis: &ComplexMatrix) -> ComplexMatrix {
    let d = basis.ncols();
    let n = basis.nrows();
    if d == 0 {
        return basis.clone();
    }
    let mut rows = basis.transpose();
    let threshold = 1e-8 * max_abs(&rows);
    let mut rank = 0;
    for col in 0..n {
        if rank == d {
            break;
        }
        let (pivot, mag) = (rank..d)
            .map(|i| (i, rows[(i, col)].norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty pivot range");
        if mag <= threshold {
            continue;
        }
        rows.swap_rows(rank, pivot);
        let p = rows[(rank, col)];
        for j in 0..n {
            rows[(rank, j)] /= p;
        }
        rows[(rank, col)] = ONE;
        for i in 0..d {
            if i == rank {
                continue;
            }
            let f = rows[(i, col)];
            if f == ZERO {
                continue;
            }
            for j in 0..n {
                let r = rows[(rank, j)];
                rows[(i, j)] -= f * r;
            }
            rows[(i, col)] = ZERO;
        }
        rank += 1;
    }
    if rank < d {
        return orthonormalize_columns(basis);
    }
    orthonormalize_columns(&rows.transpose())
}

/// Orthonormal basis of the orthogonal complement of the span of `basis`
/// in C^n, in canonical form.
pub fn orthogonal_complement(
    basis: &ComplexMatrix,
    n: usize,
    tol: &Tolerances,
) -> Result<Subspace> {
    if basis.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "basis vectors have length {}, ambient dimension is {n}",
            basis.nrows()
        )));
    }
    if basis.ncols() > n {
        return Err(Error::DimensionMismatch(format!(
            "{} basis vectors in a space of dimension {n}",
            basis.ncols()
        )));
    }
    if basis.ncols() == 0 {
        return Ok(Subspace::full(n));
    }
    let complement = nullspace(&basis.adjoint(), tol);
    Ok(complement.canonicalized())
}

/// Gram-Schmidt QR (classical, two passes) with `R` normalized to a
/// positive real diagonal.
pub fn qr_gram_schmidt(
    s: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<(ComplexMatrix, ComplexMatrix)> {
    let n = s.nrows();
    if s.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "QR of a non-square {}x{} matrix",
            n,
            s.ncols()
        )));
    }
    let threshold = tol.rank_tol * spectral_norm(s);
    let mut q = ComplexMatrix::zeros(n, n);
    let mut r = ComplexMatrix::zeros(n, n);
    for j in 0..n {
        let mut v = s.column(j).into_owned();
        for _ in 0..2 {
            for i in 0..j {
                let qi = q.column(i);
                let coeff = qi.dotc(&v);
                r[(i, j)] += coeff;
                v -= qi * coeff;
            }
        }
        let norm = v.norm();
        if norm <= threshold || norm.is_nan() {
            return Err(Error::SingularMatrix {
                pivot: norm,
                threshold,
            });
        }
        r[(j, j)] = c64(norm, 0.0);
        q.set_column(j, &(v / c64(norm, 0.0)));
    }
    Ok((q, r))
}

/// The unitary factor `Q` of `S = QR`.
pub fn invertible_to_unitary(s: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    qr_gram_schmidt(s, tol).map(|(q, _)| q)
}

/// Inverse of a numerically nonsingular square matrix.
pub fn inverse(s: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    if !s.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "inverse of a non-square {}x{} matrix",
            s.nrows(),
            s.ncols()
        )));
    }
    let sv = singular_values(s);
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    let threshold = tol.rank_tol * smax;
    if smin <= threshold || smin.is_nan() {
        return Err(Error::SingularMatrix {
            pivot: smin,
            threshold,
        });
    }
    s.clone().try_inverse().ok_or(Error::SingularMatrix {
        pivot: 0.0,
        threshold,
    })
}

/// All eigenvalues, with multiplicity, from the complex Schur form.
///
/// The QR iteration has no exceptional shifts, so it can cycle, and its
/// deflation test is relative to the diagonal, so it can stall when the
/// diagonal vanishes. On failure it is rerun on `M + cI` and then on
/// `H M H` for fixed pseudo-random Householder reflectors `H`.
pub fn eigenvalues(m: &ComplexMatrix) -> Vec<Complex64> {
    let n = m.nrows();
    if n == 0 {
        return Vec::new();
    }
    let scale = m.norm() + 1.0;
    let identity = ComplexMatrix::identity(n, n);
    let shifts = [c64(0.0, 0.0), c64(scale, 0.0), c64(scale, 0.5 * scale)];
    for round in 0..8u64 {
        let base = if round == 0 {
            m.clone()
        } else {
            let h = householder_reflector(n, round);
            &h * m * &h
        };
        for shift in shifts {
            let shifted = &base + &identity * shift;
            if let Some(schur) = Schur::try_new(shifted, f64::EPSILON, 100 * n.max(10)) {
                let (_, t) = schur.unpack();
                return (0..n).map(|i| t[(i, i)] - shift).collect();
            }
        }
    }
    panic!("complex Schur iteration failed to converge")
}

/// `I - 2 v v* / (v* v)` for a seeded random `v`; Hermitian and unitary.
fn householder_reflector(n: usize, seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = ComplexVector::from_fn(n, |_, _| {
        c64(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    });
    let scale = 2.0 / v.norm_squared();
    ComplexMatrix::identity(n, n) - (&v * v.adjoint()) * c64(scale, 0.0)
}

/// Distinct eigenvalues with algebraic multiplicities.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub eigenvalues: Vec<Complex64>,
    pub multiplicities: Vec<usize>,
}

impl Spectrum {
    pub fn distinct_count(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn dim(&self) -> usize {
        self.multiplicities.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Complex64, usize)> + '_ {
        self.eigenvalues
            .iter()
            .copied()
            .zip(self.multiplicities.iter().copied())
    }

    /// Cluster raw eigenvalues (each with multiplicity one).
    pub fn from_eigenvalues(values: &[Complex64], radius: f64) -> Self {
        cluster(values.iter().map(|&z| (z, 1)).collect(), radius)
    }

    /// Re-run clustering on the distinct values. A spectrum produced by
    /// [`spectrum`] is a fixed point of this.
    pub fn reclustered(&self, radius: f64) -> Self {
        cluster(self.iter().collect(), radius)
    }
}

pub(crate) fn lex_cmp(a: &Complex64, b: &Complex64) -> Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Single-linkage clustering with multiplicity-weighted means, repeated
/// until all representatives are more than `radius` apart.
fn cluster(mut items: Vec<(Complex64, usize)>, radius: f64) -> Spectrum {
    loop {
        let k = items.len();
        let mut parent: Vec<usize> = (0..k).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        let mut merged = false;
        for i in 0..k {
            for j in (i + 1)..k {
                if (items[i].0 - items[j].0).norm() <= radius {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    if ri != rj {
                        parent[rj] = ri;
                        merged = true;
                    }
                }
            }
        }
        if !merged {
            break;
        }
        let mut groups: Vec<(usize, Complex64, usize)> = Vec::new();
        for (i, &(z, m)) in items.iter().enumerate() {
            let root = find(&mut parent, i);
            match groups.iter_mut().find(|g| g.0 == root) {
                Some(g) => {
                    g.1 += z * m as f64;
                    g.2 += m;
                }
                None => groups.push((root, z * m as f64, m)),
            }
        }
        items = groups
            .into_iter()
            .map(|(_, sum, m)| (sum / m as f64, m))
            .collect();
    }
    items.sort_by(|a, b| lex_cmp(&a.0, &b.0));
    Spectrum {
        eigenvalues: items.iter().map(|p| p.0).collect(),
        multiplicities: items.iter().map(|p| p.1).collect(),
    }
}

/// Distinct eigenvalues of a square matrix, merged within
/// `eig_cluster_tol` and sorted by (real, imaginary).
pub fn spectrum(c: &ComplexMatrix, tol: &Tolerances) -> Spectrum {
    Spectrum::from_eigenvalues(&eigenvalues(c), tol.eig_cluster_tol)
}

/// Bases of `ker (C - lambda_i I)^{n_i}` for every distinct eigenvalue.
///
/// The shifted matrix is scaled to unit Frobenius norm before the power is
/// formed; the kernel cutoff is `rank_tol` on that scale.
pub fn generalized_eigenspaces(
    c: &ComplexMatrix,
    spec: &Spectrum,
    tol: &Tolerances,
) -> Result<Vec<Subspace>> {
    let n = c.nrows();
    if spec.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "spectrum covers {} eigenvalues, matrix dimension is {n}",
            spec.dim()
        )));
    }
    let identity = ComplexMatrix::identity(n, n);
    let mut spaces = Vec::with_capacity(spec.distinct_count());
    for (lambda, mult) in spec.iter() {
        let shifted = c - &identity * lambda;
        let norm = shifted.norm();
        let space = if norm == 0.0 {
            Subspace::full(n)
        } else {
            let scaled = shifted / c64(norm, 0.0);
            let mut power = scaled.clone();
            for _ in 1..mult {
                power = &power * &scaled;
            }
            kernel_absolute(&power, tol.rank_tol)
        };
        if space.dim() != mult {
            return Err(Error::DefectiveTolerance {
                re: lambda.re,
                im: lambda.im,
                expected: mult,
                found: space.dim(),
            });
        }
        spaces.push(space.canonicalized());
    }
    Ok(spaces)
}

/// Null space with an absolute singular-value cutoff.
pub(crate) fn kernel_absolute(m: &ComplexMatrix, cutoff: f64) -> Subspace {
    let cols = m.ncols();
    let (sv, v) = svd_right(m);
    let keep: Vec<usize> = (0..cols).filter(|&j| sv[j] <= cutoff).collect();
    Subspace::from_orthonormal(ComplexMatrix::from_fn(cols, keep.len(), |i, k| {
        v[(i, keep[k])]
    }))
}

/// Concatenate subspace bases column-wise.
pub fn assemble(spaces: &[Subspace]) -> ComplexMatrix {
    let n = spaces.first().map_or(0, |s| s.ambient_dim());
    let total: usize = spaces.iter().map(|s| s.dim()).sum();
    let mut out = ComplexMatrix::zeros(n, total);
    let mut offset = 0;
    for s in spaces {
        out.columns_mut(offset, s.dim()).copy_from(s.basis());
        offset += s.dim();
    }
    out
}
