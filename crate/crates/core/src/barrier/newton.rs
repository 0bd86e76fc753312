//! Numerical routes to the dual barrier and the scaling point that use only
//! `F`, `F'` and `F''`. They serve as defaults for arbitrary oracles and as
//! independent checks of the closed forms.

use nalgebra::{DMatrix, DVector};

use super::Barrier;
use crate::eja::Element;
use crate::error::{Error, Result};

/// Result of maximizing `−⟨x, s⟩ − F(x)`.
#[derive(Debug, Clone)]
pub struct Conjugate {
    pub value: f64,
    pub maximizer: Element,
    pub iterations: usize,
}

/// Damped Newton on the concave function `x ↦ −⟨x, s⟩ − F(x)`, started
/// at the best multiple of the F-unit.
pub fn conjugate_by_newton<B: Barrier + ?Sized>(b: &B, s: &Element) -> Result<Conjugate> {
    let cone = b.cone();
    let g = DMatrix::from_diagonal(cone.metric());
    let e = b.unit();
    let es = e.inner(s)?;
    if !(es > 0.0) {
        return Err(Error::Domain("s not interior".into()));
    }
    let mut x = e.scale(b.nu() / es);
    for it in 0..500 {
        let grad = b.gradient(&x)?;
        let h = b.hessian(&x)?;
        // Ascent direction: F''(x) dx = −s − F'(x).
        let rhs = -(s.coords() + grad.coords());
        let dx = h
            .clone()
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Numerical("singular Hessian in conjugate".into()))?;
        let dec2 = dx.dot(&(&g * &h * &dx));
        if !dec2.is_finite() {
            return Err(Error::Numerical("non-finite Newton decrement".into()));
        }
        if dec2 < 1e-26 {
            let value = -x.inner(s)? - b.value(&x)?;
            return Ok(Conjugate { value, maximizer: x, iterations: it });
        }
        let dec = dec2.sqrt();
        let mut step = if dec > 0.25 { 1.0 / (1.0 + dec) } else { 1.0 };
        let mut next = x.with_coords(x.coords() + step * &dx)?;
        while next.min_eigenvalue() <= 0.0 {
            step *= 0.5;
            if step < 1e-16 {
                return Err(Error::Numerical("conjugate step collapsed".into()));
            }
            next = x.with_coords(x.coords() + step * &dx)?;
        }
        x = next;
        if x.norm() > 1e12 {
            return Err(Error::Domain("dual barrier unbounded at s".into()));
        }
    }
    Err(Error::Numerical("conjugate Newton did not converge".into()))
}

/// Newton solve of `F''(w) x = s` with a central-difference Jacobian,
/// started at `start`.
pub fn newton_scaling_point<B: Barrier + ?Sized>(
    b: &B,
    x: &Element,
    s: &Element,
    start: &Element,
) -> Result<Element> {
    let residual = |w: &Element| -> Result<DVector<f64>> { Ok(b.hessian(w)? * x.coords() - s.coords()) };
    let n = x.coords().len();
    let target = s.coords().norm().max(1e-300);
    let mut w = start.clone();
    if w.min_eigenvalue() <= 0.0 {
        return Err(Error::Domain("start not interior".into()));
    }
    let mut r = residual(&w)?;
    for _ in 0..200 {
        if r.norm() <= 1e-15 * target {
            return Ok(w);
        }
        let h = 1e-6 * w.norm().max(1e-3);
        let mut jac = DMatrix::zeros(n, n);
        for j in 0..n {
            let mut plus = w.coords().clone();
            let mut minus = w.coords().clone();
            plus[j] += h;
            minus[j] -= h;
            let rp = residual(&w.with_coords(plus)?)?;
            let rm = residual(&w.with_coords(minus)?)?;
            jac.set_column(j, &((rp - rm) / (2.0 * h)));
        }
        let dw = jac
            .lu()
            .solve(&(-&r))
            .ok_or_else(|| Error::Numerical("singular scaling-point Jacobian".into()))?;
        let mut step = 1.0;
        loop {
            let cand = w.with_coords(w.coords() + step * &dw)?;
            if cand.min_eigenvalue() > 0.0 {
                let rc = residual(&cand)?;
                if rc.norm() < r.norm() {
                    w = cand;
                    r = rc;
                    break;
                }
            }
            step *= 0.5;
            if step < 1e-12 {
                // No further decrease available: accept the current point.
                return if r.norm() <= 1e-10 * target {
                    Ok(w)
                } else {
                    Err(Error::Numerical("scaling-point Newton stalled".into()))
                };
            }
        }
    }
    if r.norm() <= 1e-10 * target {
        Ok(w)
    } else {
        Err(Error::Numerical("scaling-point Newton did not converge".into()))
    }
}
