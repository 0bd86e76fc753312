//! Long-step primal-dual path following for the conic pair
//!
//! ```text
//! (P)  min ⟨x, s₀⟩  s.t. x ∈ (L + x₀) ∩ K
//! (D)  min ⟨x₀, s⟩  s.t. s ∈ (L⊥ + s₀) ∩ K
//! ```
//!
//! scaled by Nesterov–Todd points. Everything lives in native coordinates
//! with the trace inner product `⟨a, b⟩ = aᵀ G b`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::barrier::{Barrier, SelfScaledBarrier};
use crate::eja::{Algebra, Element, Membership, INTERIOR_TOL};
use crate::error::{Error, Result};

/// Columns whose residual after orthogonalization falls below this fraction
/// of their norm are treated as dependent.
pub const DEPENDENCE_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct ConicProblem {
    barrier: SelfScaledBarrier,
    /// Basis of `L`, orthonormal for the trace form.
    l: DMatrix<f64>,
    x0: Element,
    s0: Element,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iter: usize,
    pub sigma: f64,
    pub step_frac: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { gap_tol: 1e-8, feas_tol: 1e-9, max_iter: 200, sigma: 0.1, step_frac: 0.9 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Optimal,
    IterationLimit,
    NumericalFailure,
}

#[derive(Debug, Clone)]
pub struct IterateState {
    pub x: Element,
    pub s: Element,
    pub mu: f64,
    pub iteration: usize,
    /// Distance of `x − x₀` from `L`.
    pub primal_residual: f64,
    /// Distance of `s − s₀` from `L⊥`.
    pub dual_residual: f64,
    /// `⟨x, s⟩`.
    pub complementarity: f64,
}

/// Per-iteration certificates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub mu: f64,
    pub gap: f64,
    pub step: f64,
    /// `|⟨dx, ds⟩| / max(1, ‖dx‖‖ds‖)`.
    pub orthogonality: f64,
    /// `|⟨x⁺, s⁺⟩ − (1 − α(1 − σ))⟨x, s⟩| / ⟨x, s⟩`.
    pub gap_identity: f64,
    /// Backward error `‖F''(w) x − s‖ / (‖F''(w)‖ ‖x‖ + ‖s‖)`.
    pub scaling_residual: f64,
    /// Forward error `‖F''(w) x − s‖ / ‖s‖`; grows like `ε κ(F''(w))` as the
    /// iterates approach the boundary.
    pub scaling_forward: f64,
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub x: Element,
    pub s: Element,
    pub objective: f64,
    pub gap: f64,
    pub iterations: usize,
    pub status: Status,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub history: Vec<IterationRecord>,
    /// Set when the solve stopped on an error.
    pub message: Option<String>,
}

impl ConicProblem {
    /// Validates the data and orthonormalizes the columns of `l` (native
    /// coordinates) for the trace form.
    pub fn new(barrier: SelfScaledBarrier, l: &DMatrix<f64>, x0: Element, s0: Element) -> Result<Self> {
        let cone = barrier.cone().clone();
        let n = cone.dim();
        if l.nrows() != n {
            return Err(Error::Dimension(format!("L has {} rows, cone has dimension {n}", l.nrows())));
        }
        for (name, v) in [("x0", &x0), ("s0", &s0)] {
            if v.coords().len() != n {
                return Err(Error::Dimension(format!("{name} has length {}, expected {n}", v.coords().len())));
            }
            if !Arc::ptr_eq(v.algebra(), &cone) && **v.algebra() != *cone {
                return Err(Error::Input(format!("{name} lives in a different algebra")));
            }
            if v.membership(INTERIOR_TOL) != Membership::Interior {
                return Err(Error::Input(format!("{name} not interior")));
            }
        }
        let l = orthonormalize(l, cone.metric())?;
        Ok(Self { barrier, l, x0, s0 })
    }

    pub fn barrier(&self) -> &SelfScaledBarrier {
        &self.barrier
    }

    pub fn cone(&self) -> &Arc<Algebra> {
        self.barrier.cone()
    }

    /// Trace-orthonormal basis of `L`.
    pub fn subspace(&self) -> &DMatrix<f64> {
        &self.l
    }

    pub fn x0(&self) -> &Element {
        &self.x0
    }

    pub fn s0(&self) -> &Element {
        &self.s0
    }

    fn metric(&self) -> &DVector<f64> {
        self.cone().metric()
    }

    /// `Lᵀ G v`, the coordinates of the projection of `v` onto `L`.
    fn project_coeffs(&self, v: &DVector<f64>) -> DVector<f64> {
        self.l.transpose() * v.component_mul(self.metric())
    }

    fn g_norm(&self, v: &DVector<f64>) -> f64 {
        v.dot(&v.component_mul(self.metric())).max(0.0).sqrt()
    }

    pub fn state(&self, x: Element, s: Element, iteration: usize) -> IterateState {
        let dxv = x.coords() - self.x0.coords();
        let along = &self.l * self.project_coeffs(&dxv);
        let primal_residual = self.g_norm(&(dxv - along));
        let dual_residual = self.g_norm(&(&self.l * self.project_coeffs(&(s.coords() - self.s0.coords()))));
        let complementarity = x.inner(&s).expect("same algebra");
        IterateState {
            mu: complementarity / self.barrier.nu(),
            x,
            s,
            iteration,
            primal_residual,
            dual_residual,
            complementarity,
        }
    }

    pub fn initial_state(&self) -> IterateState {
        self.state(self.x0.clone(), self.s0.clone(), 0)
    }
}

/// Gram–Schmidt in the metric `g`, applied twice for stability.
fn orthonormalize(l: &DMatrix<f64>, g: &DVector<f64>) -> Result<DMatrix<f64>> {
    let ip = |a: &DVector<f64>, b: &DVector<f64>| a.dot(&b.component_mul(g));
    let mut cols: Vec<DVector<f64>> = Vec::with_capacity(l.ncols());
    for (j, c) in l.column_iter().enumerate() {
        let mut v = c.into_owned();
        let norm0 = ip(&v, &v).sqrt();
        if !norm0.is_finite() {
            return Err(Error::Input(format!("L column {j} is not finite")));
        }
        for _ in 0..2 {
            for q in &cols {
                v -= q * ip(q, &v);
            }
        }
        let norm = ip(&v, &v).sqrt();
        if norm <= DEPENDENCE_TOL * norm0.max(f64::MIN_POSITIVE) {
            return Err(Error::Input(format!("L columns are linearly dependent (column {j})")));
        }
        cols.push(v / norm);
    }
    Ok(DMatrix::from_fn(l.nrows(), cols.len(), |i, j| cols[j][i]))
}

/// Search direction together with the scaling point and its residual.
#[derive(Debug, Clone)]
pub struct Direction {
    pub dx: Element,
    pub ds: Element,
    pub w: Element,
    /// See [`IterationRecord::scaling_residual`].
    pub scaling_residual: f64,
    pub scaling_forward: f64,
}

/// Solves `F''(w) dx + ds = σμ(−F'(x)) − s`, `dx ∈ L`, `ds ∈ L⊥`.
pub fn nt_direction(p: &ConicProblem, it: &IterateState, sigma: f64) -> Result<Direction> {
    if !(0.0..=1.0).contains(&sigma) {
        return Err(Error::Input(format!("sigma must lie in [0, 1], found {sigma}")));
    }
    let b = p.barrier();
    let w = b.scaling_point(&it.x, &it.s)?;
    let h = b.hessian(&w)?;
    let defect = (&h * it.x.coords() - it.s.coords()).norm();
    let scaling_forward = defect / it.s.coords().norm();
    let scaling_residual = defect / (h.norm() * it.x.coords().norm() + it.s.coords().norm());
    let target = -b.gradient(&it.x)?.coords() * (sigma * it.mu) - it.s.coords();
    let gl = DMatrix::from_diagonal(p.metric()) * &p.l;
    let k = p.l.ncols();
    let u = if k == 0 {
        DVector::zeros(0)
    } else {
        let mut reduced = gl.transpose() * &h * &p.l;
        reduced = (&reduced + reduced.transpose()) * 0.5;
        let chol = reduced
            .cholesky()
            .ok_or_else(|| Error::Numerical("reduced Newton system is not positive definite".into()))?;
        chol.solve(&(gl.transpose() * &target))
    };
    let dx = &p.l * u;
    let ds = target - &h * &dx;
    let cone = p.cone();
    Ok(Direction {
        dx: Element::new(cone, dx)?,
        ds: Element::new(cone, ds)?,
        w,
        scaling_residual,
        scaling_forward,
    })
}

/// Largest `α` with `x + α d` in the cone, `∞` if unbounded.
pub fn max_step(x: &Element, d: &Element) -> Result<f64> {
    let r = x.power(-0.5)?;
    let m = d.apply(&r.quadratic_representation())?.min_eigenvalue();
    Ok(if m >= 0.0 { f64::INFINITY } else { -1.0 / m })
}

pub fn solve(p: &ConicProblem, opts: &SolveOptions) -> Solution {
    let mut it = p.initial_state();
    let scale = 1.0 + p.x0.inner(&p.s0).expect("validated").abs();
    let mut history = Vec::new();
    let finish = |it: IterateState, status, history, message| {
        let objective = it.x.inner(&p.s0).expect("same algebra");
        Solution {
            objective,
            gap: it.complementarity,
            iterations: it.iteration,
            status,
            primal_residual: it.primal_residual,
            dual_residual: it.dual_residual,
            x: it.x,
            s: it.s,
            history,
            message,
        }
    };
    loop {
        if it.complementarity <= opts.gap_tol * scale
            && it.primal_residual <= opts.feas_tol
            && it.dual_residual <= opts.feas_tol
        {
            return finish(it, Status::Optimal, history, None);
        }
        if it.iteration >= opts.max_iter {
            return finish(it, Status::IterationLimit, history, None);
        }
        match step(p, &it, opts) {
            Ok((next, rec)) => {
                history.push(rec);
                it = next;
            }
            Err(e) => return finish(it, Status::NumericalFailure, history, Some(e.to_string())),
        }
    }
}

fn step(p: &ConicProblem, it: &IterateState, opts: &SolveOptions) -> Result<(IterateState, IterationRecord)> {
    let d = nt_direction(p, it, opts.sigma)?;
    let alpha_max = max_step(&it.x, &d.dx)?.min(max_step(&it.s, &d.ds)?);
    let alpha = (opts.step_frac * alpha_max).min(1.0);
    if !(alpha > 0.0) {
        return Err(Error::Numerical("zero step length".into()));
    }
    let x = it.x.axpy(alpha, &d.dx)?;
    let s = it.s.axpy(alpha, &d.ds)?;
    if !x.is_interior() || !s.is_interior() {
        return Err(Error::Numerical("iterate left the cone interior".into()));
    }
    let dxds = d.dx.inner(&d.ds)?;
    let next = p.state(x, s, it.iteration + 1);
    let predicted = (1.0 - alpha * (1.0 - opts.sigma)) * it.complementarity;
    let rec = IterationRecord {
        iteration: next.iteration,
        mu: next.mu,
        gap: next.complementarity,
        step: alpha,
        orthogonality: dxds.abs() / (d.dx.norm() * d.ds.norm()).max(1.0),
        gap_identity: (next.complementarity - predicted).abs() / it.complementarity,
        scaling_residual: d.scaling_residual,
        scaling_forward: d.scaling_forward,
    };
    Ok((next, rec))
}

/// The three reference problems used throughout the tests and examples.
pub mod fixtures {
    use super::*;
    use std::f64::consts::SQRT_2;

    /// `min x₁ + x₂` s.t. `x₁ + 2x₂ = 2`, `x ≥ 0`. Optimum 1 at `(0, 1)`.
    pub fn lp() -> ConicProblem {
        let cone = Algebra::orthant(2);
        let l = DMatrix::from_column_slice(2, 1, &[2.0, -1.0]) / 5f64.sqrt();
        let x0 = Element::from_slice(&cone, &[0.4, 0.8]).expect("length");
        let s0 = Element::from_slice(&cone, &[1.0, 1.0]).expect("length");
        ConicProblem::new(SelfScaledBarrier::standard(&cone), &l, x0, s0).expect("valid fixture")
    }

    /// `min τ` s.t. `(τ, 1, 1) ∈ Lorentz(2)`. Optimum `√2`.
    pub fn socp() -> ConicProblem {
        let cone = Algebra::lorentz(2);
        let l = DMatrix::from_column_slice(3, 1, &[1.0 / SQRT_2, 0.0, 0.0]);
        let x0 = Element::from_slice(&cone, &[2.0, 1.0, 1.0]).expect("length");
        // ⟨x, s₀⟩ = 2(τ·½) = τ under the trace form.
        let s0 = Element::from_slice(&cone, &[0.5, 0.0, 0.0]).expect("length");
        ConicProblem::new(SelfScaledBarrier::standard(&cone), &l, x0, s0).expect("valid fixture")
    }

    /// `min tr X` s.t. `X₁₂ = 1`, `X ⪰ 0`. Optimum 2 at `[[1, 1], [1, 1]]`.
    pub fn sdp() -> ConicProblem {
        let cone = Algebra::sym_psd(2);
        let l = DMatrix::from_column_slice(3, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        let x0 = Element::from_slice(&cone, &[2.0, SQRT_2, 2.0]).expect("length");
        let s0 = Element::identity(&cone);
        ConicProblem::new(SelfScaledBarrier::standard(&cone), &l, x0, s0).expect("valid fixture")
    }
}
