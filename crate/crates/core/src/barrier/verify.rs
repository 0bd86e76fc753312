//! Randomized audit of the self-scaled identities for a barrier oracle.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{conjugate_by_newton, invert, Barrier};
use crate::eja::Element;
use crate::error::Result;
use crate::linalg::{random_gaussian, rel_diff_mat};

/// Relative tolerance of the central-difference gradient check.
pub const FD_GRADIENT_TOL: f64 = 1e-6;
/// Relative tolerance of the second-difference Hessian check.
pub const FD_HESSIAN_TOL: f64 = 1e-4;
/// Allowed violation of the duality-gap inequality.
pub const INEQUALITY_SLACK: f64 = 1e-10;

/// Spread of `ln λ` for sampled interior points.
const SAMPLE_SPREAD: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityRecord {
    pub name: String,
    pub trials: usize,
    /// `None` when some evaluation failed or produced a non-finite value.
    pub max_residual: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub schema: u32,
    pub seed: u64,
    pub records: Vec<IdentityRecord>,
    pub pass: bool,
}

impl VerificationReport {
    pub fn new(seed: u64, records: Vec<IdentityRecord>) -> Self {
        let pass = records.iter().all(|r| r.pass);
        Self { schema: 1, seed, records, pass }
    }

    pub fn record(&self, name: &str) -> Option<&IdentityRecord> {
        self.records.iter().find(|r| r.name == name)
    }

    pub fn failing(&self) -> Vec<&str> {
        self.records.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect()
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<16} {:>7} {:>16} {:>10}  result", "identity", "trials", "max residual", "tol")?;
        for r in &self.records {
            let res = r.max_residual.map_or("failed".to_string(), |v| format!("{v:.9e}"));
            writeln!(
                f,
                "{:<16} {:>7} {:>16} {:>10.1e}  {}{}",
                r.name,
                r.trials,
                res,
                r.tolerance,
                if r.pass { "PASS" } else { "FAIL" },
                r.note.as_deref().map(|n| format!("  ({n})")).unwrap_or_default()
            )?;
        }
        write!(f, "overall: {} (seed {})", if self.pass { "PASS" } else { "FAIL" }, self.seed)
    }
}

/// Accumulates the worst residual of one identity over all trials.
pub(crate) struct Tally {
    name: &'static str,
    tolerance: f64,
    trials: usize,
    worst: f64,
    broken: bool,
    note: Option<String>,
}

impl Tally {
    pub(crate) fn new(name: &'static str, tolerance: f64) -> Self {
        Self { name, tolerance, trials: 0, worst: 0.0, broken: false, note: None }
    }

    pub(crate) fn push(&mut self, r: Result<f64>) {
        self.trials += 1;
        match r {
            Ok(v) if v.is_finite() => self.worst = self.worst.max(v),
            Ok(_) => self.broken = true,
            Err(e) => {
                self.broken = true;
                self.note.get_or_insert_with(|| e.to_string());
            }
        }
    }

    pub(crate) fn finish(self) -> IdentityRecord {
        let max_residual = (!self.broken).then_some(self.worst);
        IdentityRecord {
            name: self.name.to_string(),
            trials: self.trials,
            pass: max_residual.is_some_and(|v| v <= self.tolerance),
            max_residual,
            tolerance: self.tolerance,
            note: self.note,
        }
    }
}

pub(crate) fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn rel_vec(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}

/// Samples interior `x, w, s` and checks every self-scaled identity.
///
/// Deterministic for a fixed seed. Failures become report entries.
pub fn verify_self_scaled<B: Barrier + ?Sized>(b: &B, trials: usize, seed: u64, tol: f64) -> VerificationReport {
    let cone = b.cone().clone();
    let g = DMatrix::from_diagonal(cone.metric());
    let nu = b.nu();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut loghom = Tally::new("log-homogeneity", tol);
    let mut p1 = Tally::new("prop2.1-i", tol);
    let mut p2 = Tally::new("prop2.1-ii", tol);
    let mut p3 = Tally::new("prop2.1-iii", tol);
    let mut p4 = Tally::new("prop2.1-iv", tol);
    let mut p5 = Tally::new("prop2.1-v", tol);
    let mut p6 = Tally::new("prop2.1-vi", tol);
    let mut p7 = Tally::new("prop2.1-vii", INEQUALITY_SLACK);
    let mut ss1 = Tally::new("ss-1", 0.0);
    let mut ss2 = Tally::new("ss-2", tol);
    let mut fstar = Tally::new("F_*=F", tol);
    let mut sym2 = Tally::new("sym-2", tol);
    let mut cw = Tally::new("c(w)", tol);
    let mut ff = Tally::new("ff1stversion", tol);
    let mut fund = Tally::new("fundamental", tol);
    let mut fdg = Tally::new("gradient-fd", FD_GRADIENT_TOL);
    let mut fdh = Tally::new("hessian-fd", FD_HESSIAN_TOL);
    let mut pd = Tally::new("hessian-pd", 0.0);
    let mut sp = Tally::new("scaling-point", tol);
    let mut dsup = Tally::new("dual-sup", tol);

    let e = b.unit();
    let fe = b.value(&e);

    for _ in 0..trials.max(1) {
        let x = Element::random_interior(&cone, SAMPLE_SPREAD, &mut rng);
        let x2 = Element::random_interior(&cone, SAMPLE_SPREAD, &mut rng);
        let w = Element::random_interior(&cone, SAMPLE_SPREAD, &mut rng);
        let s = Element::random_interior(&cone, SAMPLE_SPREAD, &mut rng);
        let t: f64 = rng.random_range(0.25..4.0);
        let dir = {
            let d = Element::new(&cone, random_gaussian(cone.dim(), &mut rng)).expect("dim");
            d.scale(1.0 / d.norm())
        };

        loghom.push((|| {
            let a = rel(b.value(&x.scale(t))?, b.value(&x)? - nu * t.ln());
            let c = rel(b.value(&x.scale(2.0))?, b.value(&x)? - nu * 2f64.ln());
            Ok(a.max(c))
        })());

        p1.push((|| {
            let minus_grad = -&b.gradient(&x)?;
            let hx = b.hessian(&x)? * x.coords();
            let r = rel_vec(minus_grad.coords(), &hx);
            Ok(if minus_grad.min_eigenvalue() > 0.0 { r } else { f64::INFINITY })
        })());

        p2.push((|| {
            let y = -&b.gradient(&x)?;
            let back = -&b.dual_gradient(&y)?;
            Ok(rel_vec(back.coords(), x.coords()))
        })());

        p3.push((|| {
            let y = -&b.gradient(&x)?;
            Ok(rel_diff_mat(&b.dual_hessian(&y)?, &invert(&b.hessian(&x)?)?, 1e-300))
        })());

        p4.push((|| Ok(rel(x.inner(&-&b.gradient(&x)?)?, nu)))());

        p5.push((|| {
            let g1 = rel_vec(b.gradient(&x.scale(t))?.coords(), &(b.gradient(&x)?.coords() / t));
            let h1 = rel_diff_mat(&b.hessian(&x.scale(t))?, &(b.hessian(&x)? / (t * t)), 1e-300);
            Ok(g1.max(h1))
        })());

        p6.push((|| Ok(rel(b.dual_value(&-&b.gradient(&x)?)?, -nu - b.value(&x)?)))());

        p7.push((|| {
            let xs = x.inner(&s)?;
            let slack = b.value(&x)? + b.dual_value(&s)? + nu + nu * nu.ln() + nu * xs.ln();
            Ok((-slack).max(0.0))
        })());

        let hw = b.hessian(&w);
        let hwx = hw.as_ref().map_err(Clone::clone).and_then(|h| x.apply(h));

        ss1.push((|| Ok(if hwx.clone()?.min_eigenvalue() > 0.0 { 0.0 } else { 1.0 }))());

        ss2.push((|| {
            let lhs = b.dual_value(&hwx.clone()?)?;
            Ok(rel(lhs, b.value(&x)? - 2.0 * b.value(&w)? - nu))
        })());

        fstar.push((|| Ok(rel(b.dual_value(&x)? - b.value(&x)?, -2.0 * fe.clone()? - nu)))());

        sym2.push((|| {
            let lhs = b.value(&hwx.clone()?)?;
            Ok(rel(lhs, b.value(&x)? - 2.0 * b.value(&w)? + 2.0 * fe.clone()?))
        })());

        cw.push((|| {
            let h = hw.clone()?;
            let c1 = b.value(&x.apply(&h)?)? - b.value(&x)?;
            let c2 = b.value(&x2.apply(&h)?)? - b.value(&x2)?;
            let formula = -2.0 * b.value(&w)? + 2.0 * fe.clone()?;
            Ok(rel(c1, c2).max(rel(c1, formula)))
        })());

        ff.push((|| {
            let h = hw.clone()?;
            let rhs = &h * b.dual_hessian(&hwx.clone()?)? * &h;
            Ok(rel_diff_mat(&b.hessian(&x)?, &rhs, 1e-300))
        })());

        fund.push((|| {
            let pw = w.quadratic_representation();
            let px = x.quadratic_representation();
            let lhs = x.apply(&pw)?.quadratic_representation();
            let rhs = &pw * &px * &pw;
            Ok((lhs - rhs).norm() / (pw.norm().powi(2) * px.norm()))
        })());

        fdg.push((|| {
            let h = 1e-5 * x.norm();
            let grad = b.gradient(&x)?;
            let analytic = grad.coords().component_mul(cone.metric());
            let mut fd = DVector::zeros(cone.dim());
            for j in 0..cone.dim() {
                let mut p = x.coords().clone();
                let mut m = x.coords().clone();
                p[j] += h;
                m[j] -= h;
                fd[j] = (b.value(&x.with_coords(p)?)? - b.value(&x.with_coords(m)?)?) / (2.0 * h);
            }
            Ok(rel_vec(&fd, &analytic))
        })());

        fdh.push((|| {
            let h = 1e-4 * x.norm();
            let plus = x.axpy(h, &dir)?;
            let minus = x.axpy(-h, &dir)?;
            let second = (b.value(&plus)? - 2.0 * b.value(&x)? + b.value(&minus)?) / (h * h);
            let quad = dir.inner(&dir.apply(&b.hessian(&x)?)?)?;
            Ok((second - quad).abs() / quad.abs().max(1e-300))
        })());

        pd.push((|| {
            let gh = &g * b.hessian(&x)?;
            let sym = 0.5 * (&gh + gh.transpose());
            let min = sym.symmetric_eigenvalues().min();
            Ok(if min > 0.0 { 0.0 } else { 1.0 })
        })());

        sp.push((|| {
            let wp = b.scaling_point(&x, &s)?;
            if wp.min_eigenvalue() <= 0.0 {
                return Ok(f64::INFINITY);
            }
            let r = b.hessian(&wp)? * x.coords() - s.coords();
            Ok(r.norm() / s.coords().norm())
        })());

        dsup.push((|| Ok(rel(b.dual_value(&s)?, conjugate_by_newton(b, &s)?.value)))());
    }

    VerificationReport::new(
        seed,
        vec![
            loghom.finish(),
            p1.finish(),
            p2.finish(),
            p3.finish(),
            p4.finish(),
            p5.finish(),
            p6.finish(),
            p7.finish(),
            ss1.finish(),
            ss2.finish(),
            fstar.finish(),
            sym2.finish(),
            cw.finish(),
            ff.finish(),
            fund.finish(),
            fdg.finish(),
            fdh.finish(),
            pd.finish(),
            sp.finish(),
            dsup.finish(),
        ],
    )
}
