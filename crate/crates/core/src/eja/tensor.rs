//! Structure constants of a Jordan algebra in an orthonormal basis.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense product tensor with `(x∘y)_k = Σ_ij T[i][j][k] x_i y_j`.
///
/// The basis is assumed orthonormal for the trace form, so `⟨x, y⟩` is the
/// plain dot product of coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureTensor {
    dim: usize,
    data: Vec<f64>,
}

impl StructureTensor {
    /// Wraps raw data without validation; see [`StructureTensor::validate`].
    pub fn from_raw(dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * dim * dim {
            return Err(Error::Dimension(format!(
                "structure tensor of dim {dim} needs {} entries, found {}",
                dim * dim * dim,
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn zeros(dim: usize) -> Self {
        Self { dim, data: vec![0.0; dim * dim * dim] }
    }

    /// Builds a tensor from the products of basis vectors: `f(i, j)` returns
    /// the coordinates of `b_i ∘ b_j`.
    pub fn from_products(dim: usize, mut f: impl FnMut(usize, usize) -> DVector<f64>) -> Self {
        let mut t = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                let p = f(i, j);
                for k in 0..dim {
                    t.set(i, j, k, p[k]);
                }
            }
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[(i * self.dim + j) * self.dim + k]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        self.data[(i * self.dim + j) * self.dim + k] = v;
    }

    pub fn product(&self, x: &DVector<f64>, y: &DVector<f64>) -> DVector<f64> {
        let n = self.dim;
        let mut out = DVector::zeros(n);
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                let xy = x[i] * y[j];
                if xy == 0.0 {
                    continue;
                }
                let base = (i * n + j) * n;
                for k in 0..n {
                    out[k] += self.data[base + k] * xy;
                }
            }
        }
        out
    }

    /// Matrix of `y ↦ x∘y`.
    pub fn mult_matrix(&self, x: &DVector<f64>) -> DMatrix<f64> {
        let n = self.dim;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                let base = (i * n + j) * n;
                for k in 0..n {
                    m[(k, j)] += x[i] * self.data[base + k];
                }
            }
        }
        m
    }

    /// Least-squares solution of `L(e) = I`, with its residual.
    pub fn identity(&self) -> (DVector<f64>, f64) {
        let n = self.dim;
        if n == 0 {
            return (DVector::zeros(0), 0.0);
        }
        // Rows indexed by (j, k): Σ_i e_i T[i][j][k] = δ_jk.
        let a = DMatrix::from_fn(n * n, n, |row, i| self.get(i, row / n, row % n));
        let b = DVector::from_fn(n * n, |row, _| if row / n == row % n { 1.0 } else { 0.0 });
        let e = a
            .clone()
            .svd(true, true)
            .solve(&b, 1e-13)
            .unwrap_or_else(|_| DVector::zeros(n));
        let resid = (&a * &e - &b).amax();
        (e, resid)
    }

    /// Expresses the tensor in a new orthonormal basis whose vectors are the
    /// columns of `q` (old coordinates).
    pub fn change_basis(&self, q: &DMatrix<f64>) -> Self {
        let n = self.dim;
        let m = q.ncols();
        // Contract one index at a time.
        let mut t1 = vec![0.0; m * n * n];
        for a in 0..m {
            for i in 0..n {
                let qa = q[(i, a)];
                if qa == 0.0 {
                    continue;
                }
                for j in 0..n {
                    for k in 0..n {
                        t1[(a * n + j) * n + k] += qa * self.get(i, j, k);
                    }
                }
            }
        }
        let mut t2 = vec![0.0; m * m * n];
        for a in 0..m {
            for b in 0..m {
                for j in 0..n {
                    let qb = q[(j, b)];
                    if qb == 0.0 {
                        continue;
                    }
                    for k in 0..n {
                        t2[(a * m + b) * n + k] += qb * t1[(a * n + j) * n + k];
                    }
                }
            }
        }
        let mut out = Self::zeros(m);
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    let mut s = 0.0;
                    for k in 0..n {
                        s += q[(k, c)] * t2[(a * m + b) * n + k];
                    }
                    out.set(a, b, c, s);
                }
            }
        }
        out
    }

    /// Checks commutativity, associativity of the trace form, existence of
    /// an identity, orthonormality of the basis under the trace form and the
    /// Jordan identity on a few sample points.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let n = self.dim;
        if n == 0 {
            return Err(Error::Input("structure tensor has dimension 0".into()));
        }
        if self.data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("structure tensor has non-finite entries".into()));
        }
        let scale = self.data.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let t = self.get(i, j, k);
                    if (t - self.get(j, i, k)).abs() > tol * scale {
                        return Err(Error::Input(format!(
                            "product is not commutative at T[{i}][{j}][{k}]"
                        )));
                    }
                    if (t - self.get(i, k, j)).abs() > tol * scale {
                        return Err(Error::Input(format!(
                            "trace form is not associative at T[{i}][{j}][{k}]"
                        )));
                    }
                }
            }
        }
        let (e, resid) = self.identity();
        if resid > tol.max(1e-9) * scale {
            return Err(Error::Input(format!("algebra has no identity (residual {resid:.3e})")));
        }
        // tr(b_i∘b_j) = ⟨b_i∘b_j, e⟩ must be δ_ij.
        for i in 0..n {
            for j in 0..n {
                let tr: f64 = (0..n).map(|k| self.get(i, j, k) * e[k]).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                if (tr - want).abs() > tol.max(1e-9) * scale {
                    return Err(Error::Input(format!(
                        "basis is not orthonormal for the trace form at ({i}, {j})"
                    )));
                }
            }
        }
        // Jordan identity (x²∘y)∘x = x²∘(y∘x) on deterministic samples.
        for s in 0..3 {
            let x = DVector::from_fn(n, |i, _| ((i * 7 + s * 3 + 1) as f64).sin());
            let y = DVector::from_fn(n, |i, _| ((i * 5 + s * 11 + 2) as f64).cos());
            let x2 = self.product(&x, &x);
            let lhs = self.product(&self.product(&x2, &y), &x);
            let rhs = self.product(&x2, &self.product(&y, &x));
            let mag = lhs.norm().max(rhs.norm()).max(1.0);
            if (lhs - rhs).norm() > tol.max(1e-9) * mag * scale {
                return Err(Error::Input("product violates the Jordan identity".into()));
            }
        }
        Ok(())
    }
}
