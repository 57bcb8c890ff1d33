//! Deterministic truncated SVD by one-sided Jacobi rotations.
//!
//! Only the right singular vectors are produced. The routine orthogonalizes
//! whichever side of the matrix is shorter, so a handful of large images and
//! a tall matrix of word vectors both stay cheap. Sweeps run in a fixed pair
//! order, so the result is a pure function of the input bits.

use alloc::vec;
use alloc::vec::Vec;

const MAX_SWEEPS: usize = 100;
const ORTHOGONALITY_TOL: f64 = 1e-15;
/// Singular values below this fraction of the largest are treated as zero.
const RANK_TOL: f64 = 1e-10;

/// Leading right singular vectors of a matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSvd {
    /// Non-increasing, non-negative.
    pub singular_values: Vec<f64>,
    /// Orthonormal, one per singular value, sign-normalized with
    /// [`normalize_sign`].
    pub right_vectors: Vec<Vec<f64>>,
}

/// Top-`q` right singular vectors of the row-major `rows x cols` matrix.
///
/// Directions with a (numerically) zero singular value are completed with
/// unit vectors orthogonal to the earlier ones, so the output is always an
/// orthonormal set of `q` vectors. Panics if `q > min(rows, cols)` or the
/// buffer length is wrong.
pub fn truncated_svd(rows: usize, cols: usize, data: &[f64], q: usize) -> TruncatedSvd {
    assert_eq!(data.len(), rows * cols, "matrix buffer has the wrong length");
    assert!(q <= rows.min(cols), "q exceeds the matrix rank bound");
    let (sigma, mut vectors) = if rows <= cols {
        rotate_rows(rows, cols, data)
    } else {
        rotate_columns(rows, cols, data)
    };

    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]).then(a.cmp(&b)));
    order.truncate(q);
    let largest = order.first().map_or(0.0, |&i| sigma[i]);

    let mut singular_values = Vec::with_capacity(q);
    let mut right_vectors: Vec<Vec<f64>> = Vec::with_capacity(q);
    for &i in &order {
        let s = sigma[i];
        if largest > 0.0 && s > largest * RANK_TOL {
            let mut v = core::mem::take(&mut vectors[i]);
            orthonormalize_against(&mut v, &right_vectors);
            singular_values.push(s);
            right_vectors.push(v);
        } else {
            singular_values.push(0.0);
            right_vectors.push(completion_vector(cols, &right_vectors));
        }
    }
    for v in &mut right_vectors {
        normalize_sign(v);
    }
    TruncatedSvd {
        singular_values,
        right_vectors,
    }
}

/// Flips `v` so its largest-magnitude entry (lowest index on ties) is positive.
pub fn normalize_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if libm::fabs(*x) > libm::fabs(v[best]) {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

// Orthogonalize the rows of A. With W = J^T A having orthogonal rows
// w_i = s_i v_i, the v_i are right singular vectors of A.
fn rotate_rows(rows: usize, cols: usize, data: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut w: Vec<Vec<f64>> = data.chunks(cols.max(1)).take(rows).map(<[f64]>::to_vec).collect();
    jacobi_sweeps(&mut w, None);
    let sigma: Vec<f64> = w.iter().map(|r| norm(r)).collect();
    for (r, &s) in w.iter_mut().zip(&sigma) {
        if s > 0.0 {
            r.iter_mut().for_each(|x| *x /= s);
        }
    }
    (sigma, w)
}

// Orthogonalize the columns of A, accumulating the rotations in V. Then
// A V has orthogonal columns and the columns of V are the right vectors.
fn rotate_columns(rows: usize, cols: usize, data: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let mut c: Vec<Vec<f64>> = (0..cols)
        .map(|j| (0..rows).map(|i| data[i * cols + j]).collect())
        .collect();
    let mut v: Vec<Vec<f64>> = (0..cols)
        .map(|j| {
            let mut e = vec![0.0; cols];
            e[j] = 1.0;
            e
        })
        .collect();
    jacobi_sweeps(&mut c, Some(&mut v));
    let sigma = c.iter().map(|col| norm(col)).collect();
    (sigma, v)
}

fn jacobi_sweeps(w: &mut [Vec<f64>], mut partner: Option<&mut [Vec<f64>]>) {
    let n = w.len();
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = dot(&w[p], &w[p]);
                let beta = dot(&w[q], &w[q]);
                let gamma = dot(&w[p], &w[q]);
                if alpha == 0.0 || beta == 0.0 {
                    continue;
                }
                if libm::fabs(gamma) <= ORTHOGONALITY_TOL * libm::sqrt(alpha * beta) {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let sign = if zeta >= 0.0 { 1.0 } else { -1.0 };
                let t = sign / (libm::fabs(zeta) + libm::sqrt(1.0 + zeta * zeta));
                let c = 1.0 / libm::sqrt(1.0 + t * t);
                let s = c * t;
                rotate_pair(w, p, q, c, s);
                if let Some(v) = partner.as_deref_mut() {
                    rotate_pair(v, p, q, c, s);
                }
            }
        }
        if !rotated {
            break;
        }
    }
}

fn rotate_pair(m: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (head, tail) = m.split_at_mut(q);
    let (a, b) = (&mut head[p], &mut tail[0]);
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        let (xp, yq) = (*x, *y);
        *x = c * xp - s * yq;
        *y = s * xp + c * yq;
    }
}

fn orthonormalize_against(v: &mut [f64], basis: &[Vec<f64>]) {
    // Two passes of modified Gram-Schmidt.
    for _ in 0..2 {
        for b in basis {
            let d = dot(v, b);
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= d * y);
        }
    }
    let n = norm(v);
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

// Unit vector orthogonal to `basis`: the standard basis vector with the
// largest residual (lowest index on ties), projected and normalized.
fn completion_vector(dim: usize, basis: &[Vec<f64>]) -> Vec<f64> {
    let mut best = 0;
    let mut best_residual = f64::NEG_INFINITY;
    for j in 0..dim {
        let residual = 1.0 - basis.iter().map(|b| b[j] * b[j]).sum::<f64>();
        if residual > best_residual {
            best = j;
            best_residual = residual;
        }
    }
    let mut e = vec![0.0; dim];
    e[best] = 1.0;
    orthonormalize_against(&mut e, basis);
    e
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}
