use std::sync::Arc;

use super::{Barrier, SelfScaledBarrier};
use crate::eja::{Algebra, Element, LinearOperator};
use crate::error::Result;

type ValueFn = dyn Fn(&Element) -> Result<f64> + Send + Sync;
type GradFn = dyn Fn(&Element) -> Result<Element> + Send + Sync;
type HessFn = dyn Fn(&Element) -> Result<LinearOperator> + Send + Sync;

/// Barrier assembled from callbacks, used to audit functions outside the
/// classified family. Dual quantities and scaling points fall back to the
/// numerical routines of [`Barrier`].
pub struct CallbackBarrier {
    cone: Arc<Algebra>,
    nu: f64,
    unit: Element,
    value: Box<ValueFn>,
    gradient: Box<GradFn>,
    hessian: Box<HessFn>,
}

impl CallbackBarrier {
    pub fn new(
        cone: &Arc<Algebra>,
        nu: f64,
        unit: Element,
        value: impl Fn(&Element) -> Result<f64> + Send + Sync + 'static,
        gradient: impl Fn(&Element) -> Result<Element> + Send + Sync + 'static,
        hessian: impl Fn(&Element) -> Result<LinearOperator> + Send + Sync + 'static,
    ) -> Self {
        Self {
            cone: cone.clone(),
            nu,
            unit,
            value: Box::new(value),
            gradient: Box::new(gradient),
            hessian: Box::new(hessian),
        }
    }

    /// `F(x) + eps·⟨q, x⟩`: same Hessian, broken homogeneity.
    pub fn linearly_perturbed(base: SelfScaledBarrier, q: Element, eps: f64) -> Self {
        let base = Arc::new(base);
        let (b1, b2, b3) = (base.clone(), base.clone(), base.clone());
        let (q1, q2) = (q.clone(), q);
        Self::new(
            base.cone(),
            base.nu(),
            base.unit(),
            move |x| Ok(b1.value(x)? + eps * q1.inner(x)?),
            move |x| b2.gradient(x)?.axpy(eps, &q2),
            move |x| b3.hessian(x),
        )
    }
}

impl Barrier for CallbackBarrier {
    fn cone(&self) -> &Arc<Algebra> {
        &self.cone
    }
    fn nu(&self) -> f64 {
        self.nu
    }
    fn value(&self, x: &Element) -> Result<f64> {
        (self.value)(x)
    }
    fn gradient(&self, x: &Element) -> Result<Element> {
        (self.gradient)(x)
    }
    fn hessian(&self, x: &Element) -> Result<LinearOperator> {
        (self.hessian)(x)
    }
    fn unit(&self) -> Element {
        self.unit.clone()
    }
}
