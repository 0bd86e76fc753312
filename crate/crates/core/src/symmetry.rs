//! Cone automorphisms: quadratic representations, orthogonal automorphisms
//! fixing the identity, the polar decomposition `A = Q(u) H`, and the
//! isotropy and frame-restriction properties of self-scaled barriers.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::barrier::verify::Tally;
use crate::barrier::{Barrier, SelfScaledBarrier, VerificationReport};
use crate::eja::{Algebra, Element, Family, LinearOperator};
use crate::error::{Error, Result};
use crate::linalg::{random_rotation, smat, svec};

/// Number of sampled cone points used to certify an automorphism.
pub const AUTOMORPHISM_SAMPLES: usize = 200;

#[derive(Debug, Clone)]
pub struct PolarDecomposition {
    pub u: Element,
    pub h: LinearOperator,
    /// `‖Q(u)H − A‖ / ‖A‖`.
    pub residual: f64,
}

impl PolarDecomposition {
    /// `‖HᵀGH − G‖`, `G` the trace-form metric.
    pub fn orthogonality_residual(&self) -> f64 {
        let g = DMatrix::from_diagonal(self.u.algebra().metric());
        (self.h.transpose() * &g * &self.h - &g).norm()
    }
}

/// `Q(u) = P(u)`, an automorphism of the cone for interior `u`.
pub fn quad_automorphism(u: &Element) -> Result<LinearOperator> {
    if u.min_eigenvalue() <= 0.0 {
        return Err(Error::Domain("u not interior".into()));
    }
    Ok(u.quadratic_representation())
}

/// `X ↦ O X Oᵀ` in scaled upper-triangle coordinates.
pub fn congruence_operator(o: &DMatrix<f64>) -> LinearOperator {
    let k = o.nrows();
    let dim = k * (k + 1) / 2;
    let mut out = DMatrix::zeros(dim, dim);
    for j in 0..dim {
        let mut unit = DVector::zeros(dim);
        unit[j] = 1.0;
        let m = smat(unit.as_slice(), k);
        out.set_column(j, &svec(&(o * m * o.transpose())));
    }
    out
}

/// `1 ⊕ R` on a Lorentz carrier.
pub fn lorentz_rotation(r: &DMatrix<f64>) -> LinearOperator {
    let n = r.nrows();
    let mut out = DMatrix::identity(n + 1, n + 1);
    out.view_mut((1, 1), (n, n)).copy_from(r);
    out
}

/// `H = P(a) P(b) P(c)` with `c = (P(b⁻¹) a⁻²)^{1/2}`, which fixes the
/// identity and is therefore an orthogonal automorphism in the identity
/// component. Returns `H` and the three factors.
pub fn orthogonal_from_quad_product(a: &Element, b: &Element) -> Result<(LinearOperator, [Element; 3])> {
    let pa = quad_automorphism(a)?;
    let pb = quad_automorphism(b)?;
    let c2 = a.inverse()?.square().apply(&b.inverse()?.quadratic_representation())?;
    let c = c2.sqrt()?;
    let h = pa * pb * c.quadratic_representation();
    Ok((h, [a.clone(), b.clone(), c]))
}

/// Random orthogonal automorphism fixing the identity, drawn from the
/// identity component: trivial on orthants, `1 ⊕ R` on Lorentz blocks,
/// congruence by a rotation on symmetric matrices, blockwise on sums.
pub fn orthogonal_automorphism_sample(cone: &Arc<Algebra>, seed: u64) -> LinearOperator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_with(cone, &mut rng)
}

fn sample_with(cone: &Arc<Algebra>, rng: &mut ChaCha8Rng) -> LinearOperator {
    match cone.family() {
        Family::Orthant(n) => DMatrix::identity(*n, *n),
        Family::Lorentz(n) => lorentz_rotation(&random_rotation(*n, rng)),
        Family::SymPsd(k) => congruence_operator(&random_rotation(*k, rng)),
        Family::Sum(children) => {
            let mut out = DMatrix::zeros(cone.dim(), cone.dim());
            for (c, r) in children.iter().zip(cone.summand_ranges()) {
                out.view_mut((r.start, r.start), (r.len(), r.len())).copy_from(&sample_with(c, rng));
            }
            out
        }
        Family::Custom(_) => {
            let a = Element::random_interior(cone, 1.0, rng);
            let b = Element::random_interior(cone, 1.0, rng);
            orthogonal_from_quad_product(&a, &b).map(|(h, _)| h).expect("sampled points are interior")
        }
    }
}

/// Maps sampled interior points through `a` and checks they stay in the cone.
pub fn is_automorphism_by_sampling(a: &LinearOperator, cone: &Arc<Algebra>, samples: usize, seed: u64) -> bool {
    if a.nrows() != cone.dim() || a.ncols() != cone.dim() {
        return false;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples).all(|_| {
        let x = Element::random_interior(cone, 1.5, &mut rng);
        let y = x.apply(a).expect("shape checked");
        y.min_eigenvalue() >= -1e-9 * y.norm().max(1.0)
    })
}

/// `A = Q(u) H` with `u = (A f)^{1/2}` and `H = Q(u)⁻¹ A`.
pub fn polar_decompose(a: &LinearOperator, cone: &Arc<Algebra>) -> Result<PolarDecomposition> {
    if a.nrows() != cone.dim() || a.ncols() != cone.dim() {
        return Err(Error::Dimension(format!(
            "operator is {}x{}, cone has dimension {}",
            a.nrows(),
            a.ncols(),
            cone.dim()
        )));
    }
    if !is_automorphism_by_sampling(a, cone, AUTOMORPHISM_SAMPLES, 0xa070) {
        return Err(Error::Input("operator maps cone points outside the cone".into()));
    }
    let af = Element::identity(cone).apply(a)?;
    if af.min_eigenvalue() <= 0.0 {
        return Err(Error::Input("A f is not interior".into()));
    }
    let u = af.sqrt()?;
    let h = u.inverse()?.quadratic_representation() * a;
    let residual = (u.quadratic_representation() * &h - a).norm() / a.norm();
    Ok(PolarDecomposition { u, h, residual })
}

/// Checks `F(Hx) = F(x)` over sampled interior `x`, with residual
/// `|F(Hx) − F(x)| / (1 + |F(x)|)`.
pub fn isotropy_check<B: Barrier + ?Sized>(
    b: &B,
    h: &LinearOperator,
    trials: usize,
    seed: u64,
    tol: f64,
) -> VerificationReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut tally = Tally::new("isotropy", tol);
    for _ in 0..trials.max(1) {
        let x = Element::random_interior(b.cone(), 1.5, &mut rng);
        tally.push((|| {
            let fx = b.value(&x)?;
            let fhx = b.value(&x.apply(h)?)?;
            Ok((fhx - fx).abs() / (1.0 + fx.abs()))
        })());
    }
    VerificationReport::new(seed, vec![tally.finish()])
}

/// Evaluates the barrier on `x = Σ αᵢ eᵢ` for a random Jordan frame of an
/// irreducible cone. Returns `(F(x) − c₀, −(ν/r) Σ ln αᵢ)`.
pub fn frame_restriction_check(b: &SelfScaledBarrier, alphas: &[f64], seed: u64) -> Result<(f64, f64)> {
    if b.blocks().len() != 1 {
        return Err(Error::Input("frame restriction needs an irreducible cone".into()));
    }
    let cone = b.cone();
    if alphas.len() != cone.rank() {
        return Err(Error::Dimension(format!("expected {} coefficients, found {}", cone.rank(), alphas.len())));
    }
    if alphas.iter().any(|&a| !(a > 0.0)) {
        return Err(Error::Domain("frame coefficients must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let frame = Element::random_interior(cone, 1.0, &mut rng).spectral_decompose().frame;
    let mut x = Element::zeros(cone);
    for (a, e) in alphas.iter().zip(&frame) {
        x = x.axpy(*a, e)?;
    }
    let measured = b.value(&x)? - b.offset();
    let predicted = -(b.nu() / cone.rank() as f64) * alphas.iter().map(|a| a.ln()).sum::<f64>();
    Ok((measured, predicted))
}
