//! Self-scaled barriers `F = c₀ − Σ cᵢ ln detᵢ` over direct sums of
//! irreducible symmetric cones.
//!
//! All gradients and Hessians are taken with respect to the trace inner
//! product of the underlying algebra, so `F'(x) = −Σ cᵢ xᵢ⁻¹` and
//! `F''(x) = ⊕ cᵢ P(xᵢ)⁻¹` hold verbatim in coordinates.

mod charfn;
mod newton;
mod oracle;
pub(crate) mod verify;

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::eja::{Algebra, Element, IrreducibleBlock, LinearOperator};
use crate::error::{Error, Result};

pub use charfn::characteristic_function_log;
pub use newton::{conjugate_by_newton, newton_scaling_point, Conjugate};
pub use oracle::CallbackBarrier;
pub use verify::{verify_self_scaled, IdentityRecord, VerificationReport, FD_GRADIENT_TOL, FD_HESSIAN_TOL};

/// A logarithmically homogeneous barrier on a symmetric cone.
///
/// Only value, first and second derivatives and an F-unit are required.
/// The dual barrier and scaling point default to numerical routines that do
/// not assume any closed form, so arbitrary oracles can be audited.
pub trait Barrier: Send + Sync {
    fn cone(&self) -> &Arc<Algebra>;

    /// Barrier parameter `ν`.
    fn nu(&self) -> f64;

    fn value(&self, x: &Element) -> Result<f64>;

    fn gradient(&self, x: &Element) -> Result<Element>;

    fn hessian(&self, x: &Element) -> Result<LinearOperator>;

    /// Point `e` with `F''(e) = I`.
    fn unit(&self) -> Element;

    /// `F_*(s) = sup { −⟨x, s⟩ − F(x) }`.
    fn dual_value(&self, s: &Element) -> Result<f64> {
        Ok(conjugate_by_newton(self, s)?.value)
    }

    fn dual_gradient(&self, s: &Element) -> Result<Element> {
        Ok(-&conjugate_by_newton(self, s)?.maximizer)
    }

    fn dual_hessian(&self, s: &Element) -> Result<LinearOperator> {
        let x = conjugate_by_newton(self, s)?.maximizer;
        invert(&self.hessian(&x)?)
    }

    /// Interior `w` with `F''(w) x = s`.
    fn scaling_point(&self, x: &Element, s: &Element) -> Result<Element> {
        newton_scaling_point(self, x, s, &self.unit())
    }
}

pub(crate) fn invert(m: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    m.clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("singular Hessian".into()))
}

/// The F-unit `e` and `e⁻¹ = −F'(e)`.
#[derive(Debug, Clone)]
pub struct FUnitPair {
    pub e: Element,
    pub e_inv: Element,
}

/// `F(x) = c₀ − Σ cᵢ ln detᵢ(xᵢ)` with every `cᵢ ≥ 1`.
#[derive(Debug, Clone)]
pub struct SelfScaledBarrier {
    cone: Arc<Algebra>,
    blocks: Vec<IrreducibleBlock>,
    weights: Vec<f64>,
    offset: f64,
    nu: f64,
}

impl SelfScaledBarrier {
    /// `weights` may list one value per irreducible block, one per top-level
    /// summand (shared by the blocks inside it), or a single value for all.
    pub fn new(cone: &Arc<Algebra>, weights: &[f64], offset: f64) -> Result<Self> {
        let blocks = cone.irreducible_blocks();
        let n_summands = cone.summand_ranges().len();
        let per_block: Vec<f64> = if weights.len() == blocks.len() {
            weights.to_vec()
        } else if weights.len() == n_summands {
            blocks.iter().map(|b| weights[b.summand]).collect()
        } else if weights.len() == 1 {
            vec![weights[0]; blocks.len()]
        } else {
            return Err(Error::Input(format!(
                "expected {} block weights or {} summand weights, found {}",
                blocks.len(),
                n_summands,
                weights.len()
            )));
        };
        if let Some(c) = per_block.iter().find(|&&c| !(c >= 1.0) || !c.is_finite()) {
            return Err(Error::Input(format!(
                "weight {c} violates the classification constraint c_i >= 1"
            )));
        }
        if !offset.is_finite() {
            return Err(Error::Input("offset must be finite".into()));
        }
        let nu = blocks.iter().zip(&per_block).map(|(b, c)| c * b.algebra.rank() as f64).sum();
        Ok(Self { cone: cone.clone(), blocks, weights: per_block, offset, nu })
    }

    /// `−ln det` with unit weights and zero offset.
    pub fn standard(cone: &Arc<Algebra>) -> Self {
        Self::new(cone, &[1.0], 0.0).expect("unit weights are admissible")
    }

    /// Weights, one per irreducible block.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn blocks(&self) -> &[IrreducibleBlock] {
        &self.blocks
    }

    fn split(&self, x: &Element, what: &str) -> Result<Vec<Element>> {
        if x.coords().len() != self.cone.dim() {
            return Err(Error::Dimension(format!(
                "{what} has {} coordinates, cone has {}",
                x.coords().len(),
                self.cone.dim()
            )));
        }
        self.blocks
            .iter()
            .map(|b| {
                let part = x.coords().rows(b.range.start, b.range.len()).into_owned();
                let e = Element::new(&b.algebra, part)?;
                if e.min_eigenvalue() > 0.0 {
                    Ok(e)
                } else {
                    Err(Error::Domain(format!("{what} not interior")))
                }
            })
            .collect()
    }

    fn assemble(&self, parts: impl Iterator<Item = DVector<f64>>) -> Element {
        let mut out = DVector::zeros(self.cone.dim());
        for (b, p) in self.blocks.iter().zip(parts) {
            out.rows_mut(b.range.start, b.range.len()).copy_from(&p);
        }
        Element::new(&self.cone, out).expect("assembled element has cone dimension")
    }

    fn assemble_operator(&self, parts: impl Iterator<Item = DMatrix<f64>>) -> DMatrix<f64> {
        let n = self.cone.dim();
        let mut out = DMatrix::zeros(n, n);
        for (b, p) in self.blocks.iter().zip(parts) {
            let k = b.range.len();
            out.view_mut((b.range.start, b.range.start), (k, k)).copy_from(&p);
        }
        out
    }

    /// `F''(x)⁻¹ = ⊕ cᵢ⁻¹ P(xᵢ)`.
    pub fn hessian_inverse(&self, x: &Element) -> Result<LinearOperator> {
        let parts = self.split(x, "x")?;
        Ok(self.assemble_operator(
            parts.iter().zip(&self.weights).map(|(p, c)| p.quadratic_representation() / *c),
        ))
    }

    /// `e = ⊕ √cᵢ fᵢ`, so that `F''(e) = I`, together with `−F'(e)`.
    pub fn unit_pair(&self) -> FUnitPair {
        let e = self.unit();
        let e_inv = -&self.gradient(&e).expect("F-unit is interior");
        FUnitPair { e, e_inv }
    }
}

impl Barrier for SelfScaledBarrier {
    fn cone(&self) -> &Arc<Algebra> {
        &self.cone
    }

    fn nu(&self) -> f64 {
        self.nu
    }

    fn value(&self, x: &Element) -> Result<f64> {
        let parts = self.split(x, "x")?;
        let mut f = self.offset;
        for (p, c) in parts.iter().zip(&self.weights) {
            f -= c * p.log_det()?;
        }
        Ok(f)
    }

    fn gradient(&self, x: &Element) -> Result<Element> {
        let parts = self.split(x, "x")?;
        let inv: Result<Vec<_>> = parts
            .iter()
            .zip(&self.weights)
            .map(|(p, c)| Ok(p.inverse()?.into_coords() * -*c))
            .collect();
        Ok(self.assemble(inv?.into_iter()))
    }

    fn hessian(&self, x: &Element) -> Result<LinearOperator> {
        let parts = self.split(x, "x")?;
        let ops: Result<Vec<_>> = parts
            .iter()
            .zip(&self.weights)
            .map(|(p, c)| Ok(p.inverse()?.quadratic_representation() * *c))
            .collect();
        Ok(self.assemble_operator(ops?.into_iter()))
    }

    fn unit(&self) -> Element {
        self.assemble(
            self.blocks
                .iter()
                .zip(&self.weights)
                .map(|(b, c)| b.algebra.identity() * c.sqrt()),
        )
    }

    /// `Σ [−cᵢ ln det sᵢ + cᵢ rᵢ (ln cᵢ − 1)] − c₀`.
    fn dual_value(&self, s: &Element) -> Result<f64> {
        let parts = self.split(s, "s")?;
        let mut f = -self.offset;
        for ((p, c), b) in parts.iter().zip(&self.weights).zip(&self.blocks) {
            let r = b.algebra.rank() as f64;
            f += -c * p.log_det()? + c * r * (c.ln() - 1.0);
        }
        Ok(f)
    }

    fn dual_gradient(&self, s: &Element) -> Result<Element> {
        self.gradient(s)
    }

    fn dual_hessian(&self, s: &Element) -> Result<LinearOperator> {
        self.hessian(s)
    }

    /// Blockwise `wᵢ = P(xᵢ^{1/2}) [P(xᵢ^{1/2}) (sᵢ/cᵢ)]^{−1/2}`.
    fn scaling_point(&self, x: &Element, s: &Element) -> Result<Element> {
        let xs = self.split(x, "x")?;
        let ss = self.split(s, "s")?;
        let mut parts = Vec::with_capacity(xs.len());
        for ((xi, si), c) in xs.iter().zip(&ss).zip(&self.weights) {
            let root = xi.sqrt()?.quadratic_representation();
            let mid = si.scale(1.0 / c).apply(&root)?;
            let w = mid.power(-0.5)?.apply(&root)?;
            parts.push(w.into_coords());
        }
        Ok(self.assemble(parts.into_iter()))
    }
}

#[cfg(test)]
mod tests;
