use std::ops::Range;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::tensor::StructureTensor;
use crate::error::{Error, Result};
use crate::linalg::{smat, svec, svec_index, SQRT2};

/// Family of a Euclidean Jordan algebra.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    /// `R^n` with the componentwise product.
    Orthant(usize),
    /// Spin factor on `R × R^n`, carrier dimension `n + 1`, rank 2.
    Lorentz(usize),
    /// Real symmetric `k × k` matrices, carrier dimension `k(k+1)/2`, rank `k`.
    SymPsd(usize),
    /// Direct sum of the children, coordinates concatenated.
    Sum(Vec<Arc<Algebra>>),
    /// Algebra given by structure constants in a trace-orthonormal basis.
    Custom(StructureTensor),
}

/// A Euclidean Jordan algebra together with its coordinate conventions.
///
/// Coordinates: orthant and Lorentz use the standard basis; symmetric
/// matrices use the scaled upper triangle (column-major, off-diagonals times
/// sqrt(2)). The inner product everywhere is the trace form `tr(x∘y)`, which
/// in these coordinates is the dot product except on Lorentz blocks, where it
/// is twice the dot product. [`Algebra::metric`] exposes the diagonal weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Algebra {
    family: Family,
    dim: usize,
    rank: usize,
    identity: DVector<f64>,
    metric: DVector<f64>,
    offsets: Vec<usize>,
}

/// An irreducible summand located at `range` of the parent coordinates.
#[derive(Debug, Clone)]
pub struct IrreducibleBlock {
    pub range: Range<usize>,
    pub algebra: Arc<Algebra>,
    /// Index of the top-level summand that contains this block.
    pub summand: usize,
}

impl Algebra {
    pub fn orthant(n: usize) -> Arc<Self> {
        assert!(n >= 1, "orthant dimension must be positive");
        Arc::new(Self {
            family: Family::Orthant(n),
            dim: n,
            rank: n,
            identity: DVector::from_element(n, 1.0),
            metric: DVector::from_element(n, 1.0),
            offsets: vec![],
        })
    }

    pub fn lorentz(n: usize) -> Arc<Self> {
        assert!(n >= 1, "Lorentz parameter must be positive");
        let mut identity = DVector::zeros(n + 1);
        identity[0] = 1.0;
        Arc::new(Self {
            family: Family::Lorentz(n),
            dim: n + 1,
            rank: 2,
            identity,
            metric: DVector::from_element(n + 1, 2.0),
            offsets: vec![],
        })
    }

    pub fn sym_psd(k: usize) -> Arc<Self> {
        assert!(k >= 1, "matrix order must be positive");
        let dim = k * (k + 1) / 2;
        let mut identity = DVector::zeros(dim);
        for i in 0..k {
            identity[svec_index(i, i)] = 1.0;
        }
        Arc::new(Self {
            family: Family::SymPsd(k),
            dim,
            rank: k,
            identity,
            metric: DVector::from_element(dim, 1.0),
            offsets: vec![],
        })
    }

    pub fn direct_sum(children: Vec<Arc<Algebra>>) -> Arc<Self> {
        assert!(!children.is_empty(), "direct sum needs at least one summand");
        let mut offsets = Vec::with_capacity(children.len() + 1);
        let mut dim = 0;
        for c in &children {
            offsets.push(dim);
            dim += c.dim;
        }
        offsets.push(dim);
        let rank = children.iter().map(|c| c.rank).sum();
        let mut identity = DVector::zeros(dim);
        let mut metric = DVector::zeros(dim);
        for (c, &off) in children.iter().zip(&offsets) {
            identity.rows_mut(off, c.dim).copy_from(&c.identity);
            metric.rows_mut(off, c.dim).copy_from(&c.metric);
        }
        Arc::new(Self { family: Family::Sum(children), dim, rank, identity, metric, offsets })
    }

    /// Validates the tensor and wraps it. The rank is read off as
    /// `tr(e) = ‖e‖²`.
    pub fn custom(tensor: StructureTensor) -> Result<Arc<Self>> {
        tensor.validate(1e-9)?;
        let (identity, _) = tensor.identity();
        let rank = identity.norm_squared().round() as usize;
        let dim = tensor.dim();
        Ok(Arc::new(Self {
            family: Family::Custom(tensor),
            dim,
            rank,
            identity,
            metric: DVector::from_element(dim, 1.0),
            offsets: vec![],
        }))
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Identity element coordinates.
    pub fn identity(&self) -> &DVector<f64> {
        &self.identity
    }

    /// Diagonal weights `g` with `⟨x, y⟩ = Σ g_i x_i y_i`.
    pub fn metric(&self) -> &DVector<f64> {
        &self.metric
    }

    /// Coordinate ranges of the top-level summands.
    pub fn summand_ranges(&self) -> Vec<Range<usize>> {
        match &self.family {
            Family::Sum(_) => self.offsets.windows(2).map(|w| w[0]..w[1]).collect(),
            _ => std::iter::once(0..self.dim).collect(),
        }
    }

    pub fn summands(&self) -> Vec<Arc<Algebra>> {
        match &self.family {
            Family::Sum(children) => children.clone(),
            _ => vec![Arc::new(self.clone())],
        }
    }

    /// Flattens the descriptor into irreducible blocks. Orthants split into
    /// rays; a custom algebra is taken as a single block.
    pub fn irreducible_blocks(self: &Arc<Self>) -> Vec<IrreducibleBlock> {
        let mut out = Vec::new();
        match &self.family {
            Family::Sum(children) => {
                for (s, (c, &off)) in children.iter().zip(&self.offsets).enumerate() {
                    for b in c.irreducible_blocks() {
                        out.push(IrreducibleBlock {
                            range: (b.range.start + off)..(b.range.end + off),
                            algebra: b.algebra,
                            summand: s,
                        });
                    }
                }
            }
            Family::Orthant(n) => {
                let ray = Algebra::orthant(1);
                for i in 0..*n {
                    out.push(IrreducibleBlock { range: i..i + 1, algebra: ray.clone(), summand: 0 });
                }
            }
            _ => out.push(IrreducibleBlock { range: 0..self.dim, algebra: self.clone(), summand: 0 }),
        }
        out
    }

    /// Human-readable coordinate labels.
    pub fn basis_labels(&self) -> Vec<String> {
        match &self.family {
            Family::Orthant(n) => (0..*n).map(|i| format!("x{i}")).collect(),
            Family::Lorentz(n) => std::iter::once("t".to_string())
                .chain((0..*n).map(|i| format!("v{i}")))
                .collect(),
            Family::SymPsd(k) => {
                let mut labels = vec![String::new(); self.dim];
                for j in 0..*k {
                    for i in 0..=j {
                        labels[svec_index(i, j)] = format!("X[{i},{j}]");
                    }
                }
                labels
            }
            Family::Sum(children) => children
                .iter()
                .enumerate()
                .flat_map(|(b, c)| c.basis_labels().into_iter().map(move |l| format!("b{b}.{l}")))
                .collect(),
            Family::Custom(_) => (0..self.dim).map(|i| format!("u{i}")).collect(),
        }
    }

    pub fn inner(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        a.iter().zip(b.iter()).zip(self.metric.iter()).map(|((x, y), g)| x * y * g).sum()
    }

    /// Coordinates in the trace-orthonormal basis (`√g_i x_i`).
    pub fn to_orthonormal(&self, x: &DVector<f64>) -> DVector<f64> {
        x.zip_map(&self.metric, |v, g| v * g.sqrt())
    }

    pub fn from_orthonormal(&self, y: &DVector<f64>) -> DVector<f64> {
        y.zip_map(&self.metric, |v, g| v / g.sqrt())
    }

    pub(crate) fn check_len(&self, x: &DVector<f64>) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Dimension(format!(
                "expected {} coordinates, found {}",
                self.dim,
                x.len()
            )));
        }
        Ok(())
    }

    pub(crate) fn product_raw(&self, a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
        match &self.family {
            Family::Orthant(_) => a.component_mul(b),
            Family::Lorentz(_) => {
                let n = self.dim;
                let mut out = DVector::zeros(n);
                out[0] = a.dot(b);
                for i in 1..n {
                    out[i] = a[0] * b[i] + b[0] * a[i];
                }
                out
            }
            Family::SymPsd(k) => {
                let ma = smat(a.as_slice(), *k);
                let mb = smat(b.as_slice(), *k);
                let ab = &ma * &mb;
                svec(&(0.5 * (&ab + ab.transpose())))
            }
            Family::Sum(children) => {
                let mut out = DVector::zeros(self.dim);
                for (c, &off) in children.iter().zip(&self.offsets) {
                    let p = c.product_raw(
                        &a.rows(off, c.dim).into_owned(),
                        &b.rows(off, c.dim).into_owned(),
                    );
                    out.rows_mut(off, c.dim).copy_from(&p);
                }
                out
            }
            Family::Custom(t) => t.product(a, b),
        }
    }

    /// Matrix of the multiplication operator `L(x): y ↦ x∘y`.
    pub(crate) fn mult_matrix_raw(&self, x: &DVector<f64>) -> DMatrix<f64> {
        match &self.family {
            Family::Orthant(_) => DMatrix::from_diagonal(x),
            Family::Lorentz(_) => {
                let n = self.dim;
                let mut m = DMatrix::identity(n, n) * x[0];
                for i in 1..n {
                    m[(0, i)] = x[i];
                    m[(i, 0)] = x[i];
                }
                m
            }
            Family::SymPsd(k) => {
                let k = *k;
                let mx = smat(x.as_slice(), k);
                let mut m = DMatrix::zeros(self.dim, self.dim);
                for j in 0..k {
                    for i in 0..=j {
                        let mut unit = DMatrix::zeros(k, k);
                        if i == j {
                            unit[(i, i)] = 1.0;
                        } else {
                            unit[(i, j)] = 1.0 / SQRT2;
                            unit[(j, i)] = 1.0 / SQRT2;
                        }
                        let p = &mx * &unit;
                        let col = svec(&(0.5 * (&p + p.transpose())));
                        m.set_column(svec_index(i, j), &col);
                    }
                }
                m
            }
            Family::Sum(children) => {
                let mut m = DMatrix::zeros(self.dim, self.dim);
                for (c, &off) in children.iter().zip(&self.offsets) {
                    let block = c.mult_matrix_raw(&x.rows(off, c.dim).into_owned());
                    m.view_mut((off, off), (c.dim, c.dim)).copy_from(&block);
                }
                m
            }
            Family::Custom(t) => t.mult_matrix(x),
        }
    }

    /// Quadratic representation `P(x) = 2L(x)² − L(x²)`.
    pub(crate) fn quad_matrix_raw(&self, x: &DVector<f64>) -> DMatrix<f64> {
        match &self.family {
            Family::Sum(children) => {
                let mut m = DMatrix::zeros(self.dim, self.dim);
                for (c, &off) in children.iter().zip(&self.offsets) {
                    let block = c.quad_matrix_raw(&x.rows(off, c.dim).into_owned());
                    m.view_mut((off, off), (c.dim, c.dim)).copy_from(&block);
                }
                m
            }
            _ => {
                let l = self.mult_matrix_raw(x);
                let l2 = self.mult_matrix_raw(&self.product_raw(x, x));
                2.0 * &l * &l - l2
            }
        }
    }

    /// Smallest eigenvalue, computed without building a frame where a closed
    /// form exists.
    pub(crate) fn min_eigenvalue_raw(&self, x: &DVector<f64>) -> f64 {
        match &self.family {
            Family::Orthant(_) => x.min(),
            Family::Lorentz(_) => x[0] - x.rows(1, self.dim - 1).norm(),
            Family::SymPsd(k) => {
                let m = smat(x.as_slice(), *k);
                nalgebra::SymmetricEigen::new(m).eigenvalues.min()
            }
            Family::Sum(children) => children
                .iter()
                .zip(&self.offsets)
                .map(|(c, &off)| c.min_eigenvalue_raw(&x.rows(off, c.dim).into_owned()))
                .fold(f64::INFINITY, f64::min),
            Family::Custom(_) => {
                let (vals, _) = super::spectral::spectral_raw(self, x);
                vals.iter().copied().fold(f64::INFINITY, f64::min)
            }
        }
    }

    /// Structure constants in the trace-orthonormal basis.
    pub fn structure_tensor(&self) -> StructureTensor {
        if let Family::Custom(t) = &self.family {
            return t.clone();
        }
        let n = self.dim;
        let scale = self.metric.map(f64::sqrt);
        StructureTensor::from_products(n, |i, j| {
            let mut a = DVector::zeros(n);
            let mut b = DVector::zeros(n);
            a[i] = 1.0 / scale[i];
            b[j] = 1.0 / scale[j];
            self.to_orthonormal(&self.product_raw(&a, &b))
        })
    }
}

pub(crate) fn same_algebra(a: &Arc<Algebra>, b: &Arc<Algebra>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}
