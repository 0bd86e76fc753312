//! Dense helpers shared by the algebra, decomposition and solver modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

pub(crate) const SQRT2: f64 = std::f64::consts::SQRT_2;

/// Position of entry `(i, j)`, `i <= j`, in the column-major upper-triangle
/// vectorization of a `k x k` symmetric matrix.
#[inline]
pub fn svec_index(i: usize, j: usize) -> usize {
    debug_assert!(i <= j);
    j * (j + 1) / 2 + i
}

/// Scaled vectorization: off-diagonal entries are multiplied by sqrt(2) so
/// that the Frobenius inner product becomes the Euclidean dot product.
pub fn svec(m: &DMatrix<f64>) -> DVector<f64> {
    let k = m.nrows();
    let mut v = DVector::zeros(k * (k + 1) / 2);
    for j in 0..k {
        for i in 0..=j {
            v[svec_index(i, j)] = if i == j {
                m[(i, i)]
            } else {
                0.5 * (m[(i, j)] + m[(j, i)]) * SQRT2
            };
        }
    }
    v
}

/// Inverse of [`svec`].
pub fn smat(v: &[f64], k: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(k, k);
    for j in 0..k {
        for i in 0..=j {
            let a = v[svec_index(i, j)];
            if i == j {
                m[(i, i)] = a;
            } else {
                m[(i, j)] = a / SQRT2;
                m[(j, i)] = a / SQRT2;
            }
        }
    }
    m
}

/// Symmetric eigendecomposition with eigenvalues sorted descending. Ties keep
/// the solver's column order, so the result is deterministic for fixed input.
pub fn sorted_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let sym = 0.5 * (m + m.transpose());
    let eig = SymmetricEigen::new(sym);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Haar-distributed rotation (determinant +1) of size `k`.
pub fn random_rotation<R: Rng + ?Sized>(k: usize, rng: &mut R) -> DMatrix<f64> {
    if k == 0 {
        return DMatrix::zeros(0, 0);
    }
    let g = DMatrix::from_fn(k, k, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..k {
        if r[(j, j)] < 0.0 {
            let col = -q.column(j);
            q.set_column(j, &col);
        }
    }
    if q.determinant() < 0.0 {
        let col = -q.column(0);
        q.set_column(0, &col);
    }
    q
}

pub fn random_gaussian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// `‖a − b‖ / max(‖a‖, ‖b‖, floor)` for matrices, Frobenius norm.
pub fn rel_diff_mat(a: &DMatrix<f64>, b: &DMatrix<f64>, floor: f64) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(floor)
}
