//! Spectral decomposition `x = Σ λ_i e_i` over a Jordan frame.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::algebra::{Algebra, Family};
use super::element::Element;
use crate::linalg::{random_gaussian, smat, sorted_eigen, svec};

/// Eigenvalues (descending) and the matching primitive idempotents.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub frame: Vec<Element>,
}

impl SpectralDecomposition {
    /// `Σ f(λ_i) e_i`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Element {
        let alg = self.frame[0].algebra().clone();
        let mut acc = DVector::zeros(alg.dim());
        for (l, e) in self.eigenvalues.iter().zip(&self.frame) {
            acc.axpy(f(*l), e.coords(), 1.0);
        }
        Element::from_parts(alg, acc)
    }

    pub fn reconstruct(&self) -> Element {
        self.map(|l| l)
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Raw spectral decomposition: descending eigenvalues and frame coordinates.
pub(crate) fn spectral_raw(alg: &Algebra, x: &DVector<f64>) -> (Vec<f64>, Vec<DVector<f64>>) {
    let n = alg.dim();
    let mut pairs: Vec<(f64, DVector<f64>)> = match alg.family() {
        Family::Orthant(_) => (0..n)
            .map(|i| {
                let mut e = DVector::zeros(n);
                e[i] = 1.0;
                (x[i], e)
            })
            .collect(),
        Family::Lorentz(_) => {
            let bar = x.rows(1, n - 1).into_owned();
            let r = bar.norm();
            let dir = if r > 0.0 {
                bar / r
            } else {
                let mut v = DVector::zeros(n - 1);
                v[0] = 1.0;
                v
            };
            let mut e1 = DVector::zeros(n);
            let mut e2 = DVector::zeros(n);
            e1[0] = 0.5;
            e2[0] = 0.5;
            e1.rows_mut(1, n - 1).copy_from(&(0.5 * &dir));
            e2.rows_mut(1, n - 1).copy_from(&(-0.5 * &dir));
            vec![(x[0] + r, e1), (x[0] - r, e2)]
        }
        Family::SymPsd(k) => {
            let (vals, vecs) = sorted_eigen(&smat(x.as_slice(), *k));
            vals.into_iter()
                .enumerate()
                .map(|(i, l)| {
                    let q = vecs.column(i);
                    (l, svec(&(q * q.transpose())))
                })
                .collect()
        }
        Family::Sum(children) => {
            let mut out = Vec::with_capacity(alg.rank());
            for (c, range) in children.iter().zip(alg.summand_ranges()) {
                let (vals, frame) = spectral_raw(c, &x.rows(range.start, c.dim()).into_owned());
                for (l, f) in vals.into_iter().zip(frame) {
                    let mut e = DVector::zeros(n);
                    e.rows_mut(range.start, c.dim()).copy_from(&f);
                    out.push((l, e));
                }
            }
            out
        }
        Family::Custom(t) => generic_spectral(|v| t.mult_matrix(v), alg.identity(), x),
    };
    // Stable sort keeps ascending index order among ties.
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    pairs.into_iter().unzip()
}

/// Spectral decomposition for an algebra known only through its
/// multiplication operators (trace-orthonormal coordinates).
///
/// The associative subalgebra generated by `x` is spanned by a Krylov
/// sequence of `L(x)` started at the identity; `L(x)` compressed to it has
/// the distinct eigenvalues of `x` and idempotent eigenvectors. Idempotents
/// of trace above one are split by decomposing a random element of their
/// Peirce 1-space.
pub(crate) fn generic_spectral(
    mult: impl Fn(&DVector<f64>) -> DMatrix<f64>,
    identity: &DVector<f64>,
    x: &DVector<f64>,
) -> Vec<(f64, DVector<f64>)> {
    let lx = mult(x);
    let mut out = Vec::new();
    for (lambda, c) in krylov_idempotents(&lx, identity) {
        for piece in split_idempotent(&mult, c, 0) {
            out.push((lambda, piece));
        }
    }
    out
}

fn krylov_idempotents(op: &DMatrix<f64>, unit: &DVector<f64>) -> Vec<(f64, DVector<f64>)> {
    let n = op.nrows();
    let scale = op.norm().max(1e-300);
    let mut basis: Vec<DVector<f64>> = vec![unit / unit.norm()];
    while basis.len() < n {
        let mut v = op * basis.last().unwrap();
        for _ in 0..2 {
            for q in &basis {
                let d = q.dot(&v);
                v.axpy(-d, q, 1.0);
            }
        }
        let nv = v.norm();
        if nv <= 1e-10 * scale {
            break;
        }
        basis.push(v / nv);
    }
    let q = DMatrix::from_columns(&basis);
    let h = q.transpose() * op * &q;
    let (vals, vecs) = sorted_eigen(&h);
    vals.into_iter()
        .enumerate()
        .map(|(i, l)| {
            let c = &q * vecs.column(i);
            // Rescale so that c∘c = c: ⟨c, unit⟩ = ‖c‖² for an idempotent.
            let a = c.norm_squared() / c.dot(unit);
            (l, c / a)
        })
        .collect()
}

fn split_idempotent(
    mult: &impl Fn(&DVector<f64>) -> DMatrix<f64>,
    c: DVector<f64>,
    depth: u64,
) -> Vec<DVector<f64>> {
    let trace = c.norm_squared();
    if trace < 1.5 || depth > 6 {
        return vec![c];
    }
    // Peirce 1-space: eigenvectors of L(c) with eigenvalue 1.
    let (vals, vecs) = sorted_eigen(&mult(&c));
    let cols: Vec<_> = vals
        .iter()
        .enumerate()
        .filter(|(_, &l)| l > 0.75)
        .map(|(i, _)| vecs.column(i).into_owned())
        .collect();
    let u = DMatrix::from_columns(&cols);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0000 + depth);
    let z = &u * random_gaussian(u.ncols(), &mut rng);
    let lz = mult(&z);
    let mut out = Vec::new();
    for (_, piece) in krylov_idempotents(&lz, &c) {
        out.extend(split_idempotent(mult, piece, depth + 1));
    }
    out
}
