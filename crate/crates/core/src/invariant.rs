//! Common invariant subspaces of a matrix set and restriction to quotients.
//!
//! The search is constructive: every subspace it returns is the orbit
//! closure of some vector, so invariance holds by construction and is
//! re-checked before returning. Minimality is best-effort: a closure that is
//! a proper subspace is searched again from the inside until nothing smaller
//! turns up. One-dimensional subspaces (common eigenvectors) are found by an
//! exhaustive intersection of eigenspaces.

use std::cmp::Ordering;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{
    c64, kernel_absolute, nullspace, spectral_norm, spectrum, ComplexMatrix, ComplexVector, Subspace, Tolerances,
};
use crate::matrix_set::MatrixSet;
use crate::report::Transform;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchConfig {
    pub rng_seed: u64,
    /// Random linear combinations of the set probed for eigenvectors.
    pub n_seed_combinations: usize,
    /// Expansion rounds allowed per orbit closure; `None` means the ambient
    /// dimension, which always suffices.
    pub max_orbit_rounds: Option<usize>,
    /// Run the exhaustive common-eigenvector search before anything else.
    pub exhaustive_dim_one: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            rng_seed: 0,
            n_seed_combinations: 8,
            max_orbit_rounds: None,
            exhaustive_dim_one: true,
        }
    }
}

impl SearchConfig {
    pub fn with_seed(seed: u64) -> Self {
        SearchConfig {
            rng_seed: seed,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_seed_combinations == 0 {
            return Err(Error::InvalidInput(
                "at least one random combination is required".into(),
            ));
        }
        Ok(())
    }
}

/// Smallest subspace containing `v` and closed under every matrix in `set`.
pub fn orbit_closure(set: &[ComplexMatrix], v: &ComplexVector, tol: &Tolerances) -> Subspace {
    let n = v.len();
    orbit_closure_bounded(set, v, tol, n).unwrap_or_else(|| Subspace::full(n))
}

/// Orbit closure with at most `max_rounds` expansion rounds. `None` when the
/// closure was still growing after the last round.
///
/// A new direction is kept when its component outside the current span
/// exceeds `residual_tol`, so the returned subspace is invariant to that
/// absolute accuracy.
pub(crate) fn orbit_closure_bounded(
    set: &[ComplexMatrix],
    v: &ComplexVector,
    tol: &Tolerances,
    max_rounds: usize,
) -> Option<Subspace> {
    let n = v.len();
    let norm = v.norm();
    if norm == 0.0 {
        return Some(Subspace::zero(n));
    }
    let mut basis: Vec<ComplexVector> = vec![v / c64(norm, 0.0)];
    let mut frontier = vec![0usize];
    let mut rounds = 0;
    while !frontier.is_empty() {
        if basis.len() == n {
            break;
        }
        if rounds == max_rounds {
            return None;
        }
        rounds += 1;
        let mut next = Vec::new();
        'grow: for &idx in &frontier {
            for a in set {
                let mut w = a * &basis[idx];
                for _ in 0..2 {
                    for q in &basis {
                        let r = q.dotc(&w);
                        w -= q * r;
                    }
                }
                let wn = w.norm();
                if wn > tol.residual_tol {
                    basis.push(w / c64(wn, 0.0));
                    next.push(basis.len() - 1);
                    if basis.len() == n {
                        break 'grow;
                    }
                }
            }
        }
        frontier = next;
    }
    let mut m = ComplexMatrix::zeros(n, basis.len());
    for (j, q) in basis.iter().enumerate() {
        m.set_column(j, q);
    }
    Some(Subspace::from_orthonormal(m))
}

/// Largest entry of `(I - W W*) A W` over the set.
pub fn invariance_residual(set: &[ComplexMatrix], w: &Subspace) -> f64 {
    if w.dim() == 0 {
        return 0.0;
    }
    let b = w.basis();
    set.iter()
        .map(|a| {
            let aw = a * b;
            let outside = &aw - b * (b.adjoint() * &aw);
            crate::linalg::max_abs(&outside)
        })
        .fold(0.0, f64::max)
}

/// Searches for a common invariant subspace of dimension at most `max_dim`.
/// Returns the smallest one found; ties go to the lexicographically smallest
/// canonical basis. `None` means the search found nothing, which is not a
/// proof that nothing exists (except for dimension one, which is searched
/// exhaustively).
pub fn find_minimal_invariant_subspace(
    set: &MatrixSet,
    max_dim: usize,
    cfg: &SearchConfig,
    tol: &Tolerances,
) -> Option<Subspace> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    Searcher { cfg, tol }.search(set.matrices(), max_dim, &mut rng)
}

pub(crate) struct Searcher<'a> {
    pub cfg: &'a SearchConfig,
    pub tol: &'a Tolerances,
}

impl Searcher<'_> {
    pub(crate) fn search(
        &self,
        set: &[ComplexMatrix],
        max_dim: usize,
        rng: &mut ChaCha8Rng,
    ) -> Option<Subspace> {
        let s = set[0].nrows();
        if s < 2 {
            return None;
        }
        let max_dim = max_dim.min(s - 1);
        if max_dim == 0 {
            return None;
        }

        if self.cfg.exhaustive_dim_one {
            let lines: Vec<Subspace> = common_eigenspaces(set, self.tol)
                .into_iter()
                .flat_map(|space| {
                    let b = space.canonicalized().into_basis();
                    (0..b.ncols())
                        .map(|j| Subspace::from_orthonormal(b.columns(j, 1).into_owned()))
                        .collect::<Vec<_>>()
                })
                .filter(|w| invariance_residual(set, w) <= self.tol.residual_tol)
                .collect();
            if let Some(best) = pick_best(lines) {
                return Some(best);
            }
        }

        let rounds = self.cfg.max_orbit_rounds.unwrap_or(s);
        let mut probes: Vec<ComplexMatrix> = set.to_vec();
        for _ in 0..self.cfg.n_seed_combinations {
            let mut r = ComplexMatrix::zeros(s, s);
            for a in set {
                let coeff = c64(rng.random::<f64>(), rng.random::<f64>());
                r += a * coeff;
            }
            probes.push(r);
        }

        let mut closures: Vec<Subspace> = Vec::new();
        let mut candidates: Vec<Subspace> = Vec::new();
        let identity = ComplexMatrix::identity(s, s);
        for r in &probes {
            for (lambda, _) in spectrum(r, self.tol).iter() {
                let eig = nullspace(&(r - &identity * lambda), self.tol).canonicalized();
                for j in 0..eig.dim() {
                    let v: ComplexVector = eig.basis().column(j).into_owned();
                    if candidates
                        .iter()
                        .any(|c| c.distance_to(&v) <= self.tol.residual_tol)
                    {
                        continue;
                    }
                    let Some(w) = orbit_closure_bounded(set, &v, self.tol, rounds) else {
                        continue;
                    };
                    if w.dim() == 0 || w.dim() >= s {
                        continue;
                    }
                    if closures
                        .iter()
                        .any(|c| c.same_span(&w, self.tol.residual_tol))
                    {
                        continue;
                    }
                    closures.push(w.clone());
                    candidates.push(self.shrink(set, w, rng));
                }
            }
        }
        candidates.retain(|w| {
            w.dim() <= max_dim && invariance_residual(set, w) <= self.tol.residual_tol
        });
        pick_best(candidates)
    }

    /// Looks for a smaller invariant subspace inside the invariant `w`.
    fn shrink(&self, set: &[ComplexMatrix], w: Subspace, rng: &mut ChaCha8Rng) -> Subspace {
        if w.dim() < 2 {
            return w;
        }
        let b = w.basis();
        let restricted: Vec<ComplexMatrix> = set.iter().map(|a| b.adjoint() * a * b).collect();
        match self.search(&restricted, w.dim() - 1, rng) {
            Some(inner) => Subspace::from_orthonormal(b * inner.basis()),
            None => w,
        }
    }
}

/// Every maximal subspace on which each matrix of the set acts as a scalar,
/// found by branching over the eigenvalues of one matrix at a time.
pub(crate) fn common_eigenspaces(set: &[ComplexMatrix], tol: &Tolerances) -> Vec<Subspace> {
    let s = set[0].nrows();
    let identity = ComplexMatrix::identity(s, s);
    let mut spaces = vec![identity.clone()];
    for a in set {
        let spec = spectrum(a, tol);
        let mut next = Vec::new();
        for e in &spaces {
            for (lambda, _) in spec.iter() {
                let shifted = a - &identity * lambda;
                let cutoff = tol.rank_tol * spectral_norm(&shifted).max(1.0);
                let m = &shifted * e;
                let y = kernel_absolute(&m, cutoff).into_basis();
                if y.ncols() > 0 {
                    next.push(e * y);
                }
            }
        }
        spaces = next;
        if spaces.is_empty() {
            break;
        }
    }
    spaces.into_iter().map(Subspace::from_orthonormal).collect()
}

const LEX_TOL: f64 = 1e-9;

/// Entry-by-entry comparison (column-major, real part then imaginary part)
/// treating differences below `LEX_TOL` as ties.
fn lex_compare(a: &ComplexMatrix, b: &ComplexMatrix) -> Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        for (p, q) in [(x.re, y.re), (x.im, y.im)] {
            if (p - q).abs() > LEX_TOL {
                return p.total_cmp(&q);
            }
        }
    }
    Ordering::Equal
}

fn pick_best(candidates: Vec<Subspace>) -> Option<Subspace> {
    candidates
        .into_iter()
        .map(|w| w.canonicalized())
        .min_by(|a, b| {
            a.dim()
                .cmp(&b.dim())
                .then_with(|| lex_compare(a.basis(), b.basis()))
        })
}

/// The lower-right `(s - d) x (s - d)` block of `S^-1 A S` for every matrix,
/// after checking that the lower-left block vanishes.
pub fn restrict_to_quotient(
    set: &MatrixSet,
    transform: &Transform,
    d: usize,
    tol: &Tolerances,
) -> Result<MatrixSet> {
    let n = set.dim();
    if transform.dim() != n {
        return Err(Error::DimensionMismatch(format!(
            "transform is {}x{}, set dimension is {n}",
            transform.dim(),
            transform.dim()
        )));
    }
    if d >= n {
        return Err(Error::DimensionMismatch(format!(
            "cannot quotient a {n}-dimensional space by a {d}-dimensional subspace"
        )));
    }
    let q = n - d;
    let mut out = Vec::with_capacity(set.len());
    for a in set.matrices() {
        let m = &transform.s_inv * a * &transform.s;
        let lower_left = m.view((d, 0), (q, d));
        let residual = lower_left.iter().map(|z| z.norm()).fold(0.0, f64::max);
        if residual > tol.residual_tol {
            return Err(Error::NotInvariant {
                residual,
                tol: tol.residual_tol,
            });
        }
        out.push(m.view((d, d), (q, q)).into_owned());
    }
    MatrixSet::with_names(set.names().to_vec(), out)
}

/// Unit vector `e_i` of length `n`.
pub fn unit_vector(n: usize, i: usize) -> ComplexVector {
    let mut v = DVector::zeros(n);
    v[i] = c64(1.0, 0.0);
    v
}
