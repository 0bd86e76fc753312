//! Recovery of the irreducible decomposition of a Euclidean Jordan algebra
//! presented by structure constants in an arbitrary orthonormal basis, and
//! identification of barrier weights from a value oracle.
//!
//! Minimal ideals are the eigenspaces of a generic element of the commutant
//! `{M = Mᵀ : M L(b) = L(b) M for all b}`, which for a semisimple algebra is
//! spanned by the projectors onto the simple ideals.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::eja::{Algebra, StructureTensor};
use crate::error::{Error, Result};
use crate::linalg::{random_gaussian, random_rotation, sorted_eigen, SQRT2};

/// Draws of a commutant element before giving up on separating the ideals.
pub const RETRY_BUDGET: u64 = 8;
/// Relative eigen-gap separating two ideals in a commutant draw.
pub const CLUSTER_GAP: f64 = 1e-6;
/// Line-search parameters used by [`identify_barrier_weights`].
pub const FIT_POINTS: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];

const NULL_TOL: f64 = 1e-8;
const AMBIGUOUS_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FamilyGuess {
    #[serde(rename = "rank-1")]
    RankOne,
    #[serde(rename = "lorentz")]
    Lorentz,
    #[serde(rename = "sympsd")]
    SymPsd,
    #[serde(rename = "unknown")]
    Unknown,
}

impl FamilyGuess {
    /// Best-effort label from the `(dim, rank)` signature. `(3, 2)` is both
    /// Lorentz(2) and SymPSD(2), which are isomorphic.
    pub fn from_signature(dim: usize, rank: usize) -> Self {
        match rank {
            1 => Self::RankOne,
            2 => Self::Lorentz,
            r if dim == r * (r + 1) / 2 => Self::SymPsd,
            _ => Self::Unknown,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::RankOne => "rank-1",
            Self::Lorentz => "lorentz",
            Self::SymPsd => "sympsd",
            Self::Unknown => "unknown",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    /// Orthonormal basis of the ideal, row-major `n × dim`.
    pub basis: Vec<Vec<f64>>,
    pub dim: usize,
    pub rank: usize,
    pub family: FamilyGuess,
    /// Structure constants restricted to the ideal in `basis` coordinates.
    pub tensor: StructureTensor,
}

impl Block {
    pub fn basis_matrix(&self) -> DMatrix<f64> {
        let n = self.basis.len();
        DMatrix::from_fn(n, self.dim, |i, j| self.basis[i][j])
    }

    /// The ideal as a stand-alone algebra.
    pub fn algebra(&self) -> Result<Arc<Algebra>> {
        Algebra::custom(self.tensor.clone())
    }

    /// Identity of the ideal in ambient coordinates.
    pub fn identity(&self) -> DVector<f64> {
        self.basis_matrix() * self.tensor.identity().0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionResult {
    pub blocks: Vec<Block>,
    /// Largest off-block component of a product of two same-block vectors.
    pub closure_residual: f64,
    /// Orthonormality defect of the assembled basis together with the
    /// largest cross-block product.
    pub change_of_basis_residual: f64,
}

impl DecompositionResult {
    /// `(dim, rank)` pairs sorted descending, for comparisons across bases.
    pub fn signature(&self) -> Vec<(usize, usize)> {
        let mut s: Vec<_> = self.blocks.iter().map(|b| (b.dim, b.rank)).collect();
        s.sort_unstable_by(|a, b| b.cmp(a));
        s
    }
}

/// Structure constants of a supported algebra in its trace-orthonormal basis.
pub fn structure_constants(alg: &Algebra) -> StructureTensor {
    alg.structure_tensor()
}

/// Conjugates `t` by a seeded random rotation.
pub fn scramble(t: &StructureTensor, seed: u64) -> StructureTensor {
    scramble_with_basis(t, seed).0
}

/// As [`scramble`], also returning `Q`: old coordinates are `Q z` for new
/// coordinates `z`.
pub fn scramble_with_basis(t: &StructureTensor, seed: u64) -> (StructureTensor, DMatrix<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = random_rotation(t.dim(), &mut rng);
    (t.change_basis(&q), q)
}

/// Orthonormal basis (in scaled upper-triangle coordinates) of the symmetric
/// commutant of all `L(b_i)`.
fn commutant(t: &StructureTensor) -> Result<DMatrix<f64>> {
    let n = t.dim();
    let unknowns: Vec<(usize, usize)> = (0..n).flat_map(|q| (0..=q).map(move |p| (p, q))).collect();
    if n <= 1 {
        return Ok(DMatrix::identity(unknowns.len(), unknowns.len()));
    }
    let ops: Vec<DMatrix<f64>> = (0..n)
        .map(|i| {
            let mut b = DVector::zeros(n);
            b[i] = 1.0;
            t.mult_matrix(&b)
        })
        .collect();
    let eqs_per_op = n * (n - 1) / 2;
    let mut sys = DMatrix::zeros(ops.len() * eqs_per_op, unknowns.len());
    for (u, &(p, q)) in unknowns.iter().enumerate() {
        let mut e = DMatrix::zeros(n, n);
        if p == q {
            e[(p, p)] = 1.0;
        } else {
            e[(p, q)] = 1.0 / SQRT2;
            e[(q, p)] = 1.0 / SQRT2;
        }
        for (o, l) in ops.iter().enumerate() {
            // The commutator of symmetric matrices is antisymmetric.
            let c = &e * l - l * &e;
            let mut row = o * eqs_per_op;
            for b in 1..n {
                for a in 0..b {
                    sys[(row, u)] = c[(a, b)];
                    row += 1;
                }
            }
        }
    }
    if sys.nrows() < sys.ncols() {
        // Keep the SVD full so every null direction appears in `v_t`.
        let cols = sys.ncols();
        sys = sys.resize_vertically(cols, 0.0);
    }
    let svd = sys.svd(false, true);
    let v_t = svd.v_t.expect("requested");
    let smax = svd.singular_values.max();
    let mut null = Vec::new();
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s <= NULL_TOL * smax {
            null.push(k);
        } else if s <= AMBIGUOUS_TOL * smax {
            return Err(Error::Numerical(format!(
                "commutant system is rank-deficient beyond tolerance (singular value {:.3e})",
                s / smax
            )));
        }
    }
    let mut out = DMatrix::zeros(unknowns.len(), null.len());
    for (c, &k) in null.iter().enumerate() {
        out.set_column(c, &v_t.row(k).transpose());
    }
    Ok(out)
}

fn unpack_symmetric(v: &DVector<f64>, n: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    let mut u = 0;
    for q in 0..n {
        for p in 0..=q {
            if p == q {
                m[(p, p)] = v[u];
            } else {
                m[(p, q)] = v[u] / SQRT2;
                m[(q, p)] = v[u] / SQRT2;
            }
            u += 1;
        }
    }
    m
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, i: usize) -> usize {
        let p = self.0[i];
        if p == i {
            return i;
        }
        let r = self.find(p);
        self.0[i] = r;
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[rb] = ra;
        }
    }
}

/// Coordinates of every product `b_a ∘ b_b` in the eigenbasis `v`.
fn products_in(t: &StructureTensor, v: &DMatrix<f64>) -> StructureTensor {
    t.change_basis(v)
}

/// Splits the algebra into its minimal ideals.
pub fn split_irreducible(t: &StructureTensor, tol: f64, seed: u64) -> Result<DecompositionResult> {
    t.validate(tol.max(1e-9))?;
    let n = t.dim();
    let null = commutant(t)?;
    let m = null.ncols();
    for attempt in 0..RETRY_BUDGET {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt));
        let coeffs = random_gaussian(m, &mut rng);
        let mat = unpack_symmetric(&(&null * coeffs), n);
        let (vals, vecs) = sorted_eigen(&mat);
        let gap = CLUSTER_GAP * mat.norm();
        let mut clusters: Vec<Vec<usize>> = vec![vec![0]];
        for k in 1..n {
            if vals[k - 1] - vals[k] > gap {
                clusters.push(vec![]);
            }
            clusters.last_mut().expect("non-empty").push(k);
        }
        // Merge clusters until each is closed under the product and distinct
        // clusters annihilate each other.
        let tv = products_in(t, &vecs);
        let owner: Vec<usize> = {
            let mut o = vec![0; n];
            for (c, ks) in clusters.iter().enumerate() {
                for &k in ks {
                    o[k] = c;
                }
            }
            o
        };
        let mut uf = UnionFind((0..clusters.len()).collect());
        let merge_tol = tol.max(1e-12) * 1e2;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if tv.get(a, b, c).abs() > merge_tol {
                        uf.union(owner[a], owner[b]);
                        uf.union(owner[a], owner[c]);
                    }
                }
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut root_of: Vec<Option<usize>> = vec![None; clusters.len()];
        for (c, ks) in clusters.iter().enumerate() {
            let r = uf.find(c);
            let g = *root_of[r].get_or_insert_with(|| {
                groups.push(vec![]);
                groups.len() - 1
            });
            groups[g].extend(ks);
        }
        if groups.len() != m {
            continue;
        }
        return Ok(assemble(t, &vecs, groups));
    }
    Err(Error::Numerical(format!(
        "could not separate {m} ideals within {RETRY_BUDGET} commutant draws"
    )))
}

fn assemble(t: &StructureTensor, vecs: &DMatrix<f64>, mut groups: Vec<Vec<usize>>) -> DecompositionResult {
    let n = t.dim();
    for g in &mut groups {
        g.sort_unstable();
    }
    groups.sort_by_key(|g| (std::cmp::Reverse(g.len()), g[0]));
    let order: Vec<usize> = groups.iter().flatten().copied().collect();
    let q = DMatrix::from_fn(n, n, |i, j| vecs[(i, order[j])]);
    let tq = t.change_basis(&q);
    let mut block_of = vec![0; n];
    let mut start = 0;
    for (b, g) in groups.iter().enumerate() {
        block_of[start..start + g.len()].fill(b);
        start += g.len();
    }
    let (mut closure, mut cross) = (0.0_f64, 0.0_f64);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let v = tq.get(a, b, c).abs();
                if block_of[a] == block_of[b] {
                    if block_of[c] != block_of[a] {
                        closure = closure.max(v);
                    }
                } else {
                    cross = cross.max(v);
                }
            }
        }
    }
    let ortho = (q.transpose() * &q - DMatrix::identity(n, n)).amax();
    let mut blocks = Vec::with_capacity(groups.len());
    let mut start = 0;
    for g in &groups {
        let basis = q.columns(start, g.len()).into_owned();
        start += g.len();
        let tensor = t.change_basis(&basis);
        let rank = tensor.identity().0.norm_squared().round() as usize;
        blocks.push(Block {
            basis: (0..n).map(|i| basis.row(i).iter().copied().collect()).collect(),
            dim: g.len(),
            rank,
            family: FamilyGuess::from_signature(g.len(), rank),
            tensor,
        });
    }
    DecompositionResult { blocks, closure_residual: closure, change_of_basis_residual: ortho.max(cross) }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentifiedBarrier {
    pub offset: f64,
    /// One weight per recovered block, in block order.
    pub weights: Vec<f64>,
    /// `Σ c_i r_i` from the fitted weights.
    pub nu_fit: f64,
    /// `⟨e, −F'(e)⟩` by central differences.
    pub nu_measured: f64,
}

/// Recovers `F = c₀ − Σ c_i ln det_i` from values alone. Along
/// `x(t) = e + (t − 1) f_i` only block `i` moves and `F(x(t)) = F(e) − c_i r_i ln t`.
pub fn identify_barrier_weights(
    oracle: &dyn Fn(&DVector<f64>) -> f64,
    d: &DecompositionResult,
    t: &StructureTensor,
) -> Result<IdentifiedBarrier> {
    let e = t.identity().0;
    let eval = |x: &DVector<f64>| -> Result<f64> {
        let v = oracle(x);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Input("barrier oracle returned a non-finite value on the sampled ray".into()))
        }
    };
    let f_e = eval(&e)?;
    let logs: Vec<f64> = FIT_POINTS.iter().map(|s| s.ln()).collect();
    let mean_log = logs.iter().sum::<f64>() / logs.len() as f64;
    let sxx: f64 = logs.iter().map(|l| (l - mean_log).powi(2)).sum();
    let mut weights = Vec::with_capacity(d.blocks.len());
    for b in &d.blocks {
        let f = b.identity();
        let vals = FIT_POINTS
            .iter()
            .map(|&s| eval(&(&e + (s - 1.0) * &f)))
            .collect::<Result<Vec<_>>>()?;
        let mean_val = vals.iter().sum::<f64>() / vals.len() as f64;
        let sxy: f64 = logs.iter().zip(&vals).map(|(l, v)| (l - mean_log) * (v - mean_val)).sum();
        weights.push(-(sxy / sxx) / b.rank as f64);
    }
    let h = 1e-4;
    let nu_measured = -(eval(&((1.0 + h) * &e))? - eval(&((1.0 - h) * &e))?) / (2.0 * h);
    let nu_fit = weights.iter().zip(&d.blocks).map(|(c, b)| c * b.rank as f64).sum();
    Ok(IdentifiedBarrier { offset: f_e, weights, nu_fit, nu_measured })
}

/// For each recovered block, the index of the irreducible block of `cone`
/// it lies in, given old orthonormal coordinates `q z`.
pub fn match_blocks(d: &DecompositionResult, q: &DMatrix<f64>, cone: &Arc<Algebra>) -> Result<Vec<usize>> {
    let originals = cone.irreducible_blocks();
    d.blocks
        .iter()
        .map(|b| {
            let old = q * b.basis_matrix();
            let (best, mass) = originals
                .iter()
                .enumerate()
                .map(|(k, o)| (k, old.rows(o.range.start, o.range.len()).norm_squared() / b.dim as f64))
                .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
            if (mass - 1.0).abs() > 1e-6 {
                return Err(Error::Numerical(format!("recovered block straddles original blocks (mass {mass:.6})")));
            }
            Ok(best)
        })
        .collect()
}
