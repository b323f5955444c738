//! Zero-pattern residuals for block triangular / block diagonal forms and
//! end-to-end validation of decomposition reports.

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{eigenvalues, max_abs, singular_values, ComplexMatrix, Tolerances};
use crate::matrix_set::MatrixSet;
use crate::report::{BlockPartition, DecompositionReport, PartitionKind};

/// Eigenvalues of a matrix and of its transformed image must agree to this
/// distance after optimal pairing.
pub const SPECTRUM_TOL: f64 = 1e-7;

/// Largest magnitude among the entries `p` requires to be zero: strictly
/// lower blocks for BT, every off-diagonal block for BD.
pub fn block_pattern_residual(m: &ComplexMatrix, p: &BlockPartition) -> Result<f64> {
    let n = m.nrows();
    if !m.is_square() || p.dim() != n {
        return Err(Error::PartitionMismatch {
            expected: n,
            found: p.dim(),
        });
    }
    let block = p.block_of_rows();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in 0..n {
            let must_vanish = match p.kind {
                PartitionKind::BT => block[i] > block[j],
                PartitionKind::BD => block[i] != block[j],
            };
            if must_vanish {
                worst = worst.max(m[(i, j)].norm());
            }
        }
    }
    Ok(worst)
}

/// Pattern residual of every matrix in the set.
pub fn set_residuals(set: &MatrixSet, p: &BlockPartition) -> Result<Vec<f64>> {
    set.matrices()
        .iter()
        .map(|m| block_pattern_residual(m, p))
        .collect()
}

/// Pooled eigenvalues closer than this, relative to `1 + max |lambda|`,
/// are compared as one cluster.
const CLUSTER_RADIUS: f64 = 1e-4;

/// Distance between two eigenvalue multisets that tolerates the scatter of
/// defective eigenvalues.
///
/// The values of both sets are pooled and grouped by single linkage. Each
/// group must hold equally many values from each side; its deviation is the
/// smaller of the bottleneck pairing distance and the distance between the
/// two sides' means (a defective eigenvalue of multiplicity `m` is computed
/// only to about `eps^(1/m)`, but the mean of its copies stays accurate).
/// Infinite when the lengths or any group counts differ.
pub fn spectral_deviation(a: &[Complex64], b: &[Complex64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let pooled: Vec<Complex64> = a.iter().chain(b).copied().collect();
    let scale = 1.0 + pooled.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let radius = CLUSTER_RADIUS * scale;
    let k = pooled.len();
    let mut group: Vec<usize> = (0..k).collect();
    for i in 0..k {
        for j in (i + 1)..k {
            if (pooled[i] - pooled[j]).norm() <= radius {
                let (gi, gj) = (group[i], group[j]);
                if gi != gj {
                    group.iter_mut().filter(|g| **g == gj).for_each(|g| *g = gi);
                }
            }
        }
    }
    let mut roots = group.clone();
    roots.sort_unstable();
    roots.dedup();
    let mut worst: f64 = 0.0;
    for root in roots {
        let members = |range: std::ops::Range<usize>| -> Vec<Complex64> {
            range.filter(|&i| group[i] == root).map(|i| pooled[i]).collect()
        };
        let (ga, gb) = (members(0..a.len()), members(a.len()..k));
        if ga.len() != gb.len() {
            return f64::INFINITY;
        }
        let mean = |v: &[Complex64]| v.iter().sum::<Complex64>() / v.len() as f64;
        let by_mean = (mean(&ga) - mean(&gb)).norm();
        worst = worst.max(by_mean.min(bottleneck(&ga, &gb)));
    }
    worst
}

/// Smallest `d` such that the two equal-length multisets can be paired one
/// to one with every pair within `d`.
fn bottleneck(a: &[Complex64], b: &[Complex64]) -> f64 {
    let n = a.len();
    let dist: Vec<Vec<f64>> = a
        .iter()
        .map(|x| b.iter().map(|y| (x - y).norm()).collect())
        .collect();
    let mut levels: Vec<f64> = dist.iter().flatten().copied().collect();
    levels.sort_by(f64::total_cmp);
    levels.dedup();
    let (mut lo, mut hi) = (0, levels.len() - 1);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if perfect_matching(n, &dist, levels[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    levels[lo]
}

fn perfect_matching(n: usize, dist: &[Vec<f64>], limit: f64) -> bool {
    fn augment(
        u: usize,
        dist: &[Vec<f64>],
        limit: f64,
        seen: &mut [bool],
        owner: &mut [Option<usize>],
    ) -> bool {
        for v in 0..dist.len() {
            if dist[u][v] <= limit && !seen[v] {
                seen[v] = true;
                if owner[v].is_none_or(|w| augment(w, dist, limit, seen, owner)) {
                    owner[v] = Some(u);
                    return true;
                }
            }
        }
        false
    }
    let mut owner = vec![None; n];
    (0..n).all(|u| {
        let mut seen = vec![false; n];
        augment(u, dist, limit, &mut seen, &mut owner)
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum ValidationFailure {
    TransformShape { expected: usize, rows: usize, cols: usize },
    SingularTransform { smallest_singular_value: f64 },
    InverseMismatch { residual: f64 },
    NotUnitary { residual: f64 },
    PartitionMismatch { expected: usize, found: usize },
    TrivialPartition,
    PatternResidual { name: String, residual: f64 },
    SpectrumMismatch { name: String, deviation: f64 },
}

impl fmt::Display for ValidationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidationFailure::TransformShape {
                expected,
                rows,
                cols,
            } => write!(f, "transform is {rows}x{cols}, expected {expected}x{expected}"),
            ValidationFailure::SingularTransform {
                smallest_singular_value,
            } => write!(
                f,
                "singular transform (smallest singular value {smallest_singular_value:.3e})"
            ),
            ValidationFailure::InverseMismatch { residual } => {
                write!(f, "stored inverse is wrong: |S S^-1 - I|_max = {residual:.3e}")
            }
            ValidationFailure::NotUnitary { residual } => {
                write!(f, "transform flagged unitary but |S* S - I|_max = {residual:.3e}")
            }
            ValidationFailure::PartitionMismatch { expected, found } => {
                write!(f, "partition sizes sum to {found}, dimension is {expected}")
            }
            ValidationFailure::TrivialPartition => {
                write!(f, "trivial partition: fewer than two blocks")
            }
            ValidationFailure::PatternResidual { name, residual } => {
                write!(f, "`{name}`: pattern residual {residual:.3e} exceeds tolerance")
            }
            ValidationFailure::SpectrumMismatch { name, deviation } => {
                write!(f, "`{name}`: eigenvalues moved by {deviation:.3e} under the transform")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ValidationOutcome {
    pub failures: Vec<ValidationFailure>,
    /// Recomputed pattern residuals, in input order (empty when the
    /// transform could not be applied).
    pub residuals: Vec<f64>,
}

impl ValidationOutcome {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Recomputes `S^-1 A S` from the input set and the report's transform and
/// checks every structural claim the report makes.
pub fn validate_report(
    set: &MatrixSet,
    report: &DecompositionReport,
    tol: &Tolerances,
) -> ValidationOutcome {
    let mut out = ValidationOutcome::default();
    let n = set.dim();
    let t = &report.transform;

    if report.partition.dim() != n {
        out.failures.push(ValidationFailure::PartitionMismatch {
            expected: n,
            found: report.partition.dim(),
        });
    }
    if report.partition.is_trivial() {
        out.failures.push(ValidationFailure::TrivialPartition);
    }
    for m in [&t.s, &t.s_inv] {
        if m.nrows() != n || m.ncols() != n {
            out.failures.push(ValidationFailure::TransformShape {
                expected: n,
                rows: m.nrows(),
                cols: m.ncols(),
            });
            return out;
        }
    }

    let sv = singular_values(&t.s);
    let smax = sv.iter().copied().fold(0.0, f64::max);
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if smin <= tol.rank_tol * smax || smin.is_nan() {
        out.failures.push(ValidationFailure::SingularTransform {
            smallest_singular_value: smin,
        });
        return out;
    }
    let identity = ComplexMatrix::identity(n, n);
    let inverse_residual = max_abs(&(&t.s * &t.s_inv - &identity));
    if inverse_residual > tol.residual_tol {
        out.failures.push(ValidationFailure::InverseMismatch {
            residual: inverse_residual,
        });
        return out;
    }
    if t.unitary {
        let residual = max_abs(&(t.s.adjoint() * &t.s - &identity));
        if residual > 1e-10 * n as f64 {
            out.failures.push(ValidationFailure::NotUnitary { residual });
        }
    }

    let transformed = set.conjugated(&t.s, &t.s_inv);
    if report.partition.dim() == n {
        for (name, m) in transformed.iter() {
            let r = block_pattern_residual(m, &report.partition).unwrap_or(f64::INFINITY);
            out.residuals.push(r);
            if r > tol.residual_tol {
                out.failures.push(ValidationFailure::PatternResidual {
                    name: name.to_string(),
                    residual: r,
                });
            }
        }
    }
    for ((name, a), b) in set.iter().zip(transformed.matrices()) {
        let deviation = spectral_deviation(&eigenvalues(a), &eigenvalues(b));
        if deviation > SPECTRUM_TOL {
            out.failures.push(ValidationFailure::SpectrumMismatch {
                name: name.to_string(),
                deviation,
            });
        }
    }
    out
}
