use crate::eja::{Algebra, Element};
use crate::error::{Error, Result};
use std::sync::Arc;

/// `ln φ_K(x)` up to an additive constant per irreducible block:
/// `Σ −(nᵢ/rᵢ) ln detᵢ(xᵢ)`, with every constant set to zero.
pub fn characteristic_function_log(cone: &Arc<Algebra>, x: &Element) -> Result<f64> {
    if x.coords().len() != cone.dim() {
        return Err(Error::Dimension("x does not match the cone".into()));
    }
    let mut total = 0.0;
    for b in cone.irreducible_blocks() {
        let part = Element::new(&b.algebra, x.coords().rows(b.range.start, b.range.len()).into_owned())?;
        let ld = part.log_det().map_err(|_| Error::Domain("x not interior".into()))?;
        total -= b.algebra.dim() as f64 / b.algebra.rank() as f64 * ld;
    }
    Ok(total)
}
