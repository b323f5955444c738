#![allow(dead_code)]

use std::path::PathBuf;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use simblock::linalg::invertible_to_unitary;
use simblock::{ComplexMatrix, MatrixSet, Tolerances};

pub fn data_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests")
        .join("data")
        .join(name)
}

pub fn load(name: &str) -> MatrixSet {
    simblock::io::parse_matrix_set(data_path(name)).expect("test data parses")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn real(rows: &[&[f64]]) -> ComplexMatrix {
    simblock::linalg::from_real_rows(rows)
}

pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn random_complex(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

pub fn random_real(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        Complex64::new(rng.random_range(-1.0..1.0), 0.0)
    })
}

pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    loop {
        let m = random_complex(rng, n, n);
        if let Ok(q) = invertible_to_unitary(&m, &Tolerances::default()) {
            return q;
        }
    }
}

/// `U1 diag(sigma) U2` with singular values spread log-uniformly over
/// `[1, cond]`, the extremes included.
pub fn random_invertible(rng: &mut ChaCha8Rng, n: usize, cond: f64) -> ComplexMatrix {
    let u1 = random_unitary(rng, n);
    let u2 = random_unitary(rng, n);
    let sigma = ComplexMatrix::from_fn(n, n, |i, j| {
        if i != j {
            return Complex64::new(0.0, 0.0);
        }
        let s = if n == 1 || i == 0 {
            1.0
        } else if i == n - 1 {
            cond
        } else {
            cond.powf(rng.random_range(0.0..1.0))
        };
        Complex64::new(s, 0.0)
    });
    u1 * sigma * u2
}

pub fn block_diag(blocks: &[ComplexMatrix]) -> ComplexMatrix {
    let n: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = ComplexMatrix::zeros(n, n);
    let mut at = 0;
    for b in blocks {
        out.view_mut((at, at), (b.nrows(), b.ncols())).copy_from(b);
        at += b.nrows();
    }
    out
}

/// `count` matrices sharing the block structure `sizes`, each block a random
/// complex matrix (so blocks of size at least 2 are irreducible for
/// `count >= 2` with probability one), conjugated by `s`: `s B s^-1`.
pub fn planted_set(
    rng: &mut ChaCha8Rng,
    sizes: &[usize],
    count: usize,
    s: &ComplexMatrix,
) -> MatrixSet {
    let s_inv = s.clone().try_inverse().expect("planted transform is invertible");
    let matrices = (0..count)
        .map(|_| {
            let blocks: Vec<ComplexMatrix> =
                sizes.iter().map(|&k| random_complex(rng, k, k)).collect();
            s * block_diag(&blocks) * &s_inv
        })
        .collect();
    MatrixSet::new(matrices).unwrap()
}

pub fn sorted(mut v: Vec<usize>) -> Vec<usize> {
    v.sort_unstable();
    v
}

pub fn eigenvalues_sorted(m: &ComplexMatrix) -> Vec<Complex64> {
    let mut e = simblock::linalg::eigenvalues(m);
    e.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    e
}
