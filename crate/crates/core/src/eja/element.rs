use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::algebra::{same_algebra, Algebra, Family};
use super::spectral::{spectral_raw, SpectralDecomposition};
use crate::error::{Error, Result};
use crate::linalg::{random_gaussian, random_rotation, smat, svec};

/// Dense matrix acting on carrier coordinates.
pub type LinearOperator = DMatrix<f64>;

/// Default interiority threshold for [`Element::membership`].
pub const INTERIOR_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Membership {
    Interior,
    Boundary,
    Exterior,
}

/// A point of the carrier space of an algebra.
#[derive(Clone)]
pub struct Element {
    algebra: Arc<Algebra>,
    coords: DVector<f64>,
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Element{:?}", self.coords.as_slice())
    }
}

impl Element {
    pub fn new(algebra: &Arc<Algebra>, coords: impl Into<DVector<f64>>) -> Result<Self> {
        let coords = coords.into();
        algebra.check_len(&coords)?;
        Ok(Self { algebra: algebra.clone(), coords })
    }

    pub fn from_slice(algebra: &Arc<Algebra>, coords: &[f64]) -> Result<Self> {
        Self::new(algebra, DVector::from_column_slice(coords))
    }

    pub(crate) fn from_parts(algebra: Arc<Algebra>, coords: DVector<f64>) -> Self {
        debug_assert_eq!(algebra.dim(), coords.len());
        Self { algebra, coords }
    }

    pub fn identity(algebra: &Arc<Algebra>) -> Self {
        Self::from_parts(algebra.clone(), algebra.identity().clone())
    }

    pub fn zeros(algebra: &Arc<Algebra>) -> Self {
        Self::from_parts(algebra.clone(), DVector::zeros(algebra.dim()))
    }

    /// Symmetric matrix embedded as a `SymPsd` element.
    pub fn from_matrix(algebra: &Arc<Algebra>, m: &DMatrix<f64>) -> Result<Self> {
        match algebra.family() {
            Family::SymPsd(k) if m.nrows() == *k && m.ncols() == *k => Self::new(algebra, svec(m)),
            _ => Err(Error::Dimension("matrix does not match a SymPsd algebra".into())),
        }
    }

    /// Matrix form of a `SymPsd` element.
    pub fn to_matrix(&self) -> Option<DMatrix<f64>> {
        match self.algebra.family() {
            Family::SymPsd(k) => Some(smat(self.coords.as_slice(), *k)),
            _ => None,
        }
    }

    pub fn algebra(&self) -> &Arc<Algebra> {
        &self.algebra
    }

    pub fn coords(&self) -> &DVector<f64> {
        &self.coords
    }

    pub fn into_coords(self) -> DVector<f64> {
        self.coords
    }

    pub fn with_coords(&self, coords: DVector<f64>) -> Result<Self> {
        Self::new(&self.algebra, coords)
    }

    fn check_same(&self, other: &Element) -> Result<()> {
        if same_algebra(&self.algebra, &other.algebra) {
            Ok(())
        } else {
            Err(Error::Dimension("operands belong to different algebras".into()))
        }
    }

    pub fn jordan_product(&self, other: &Element) -> Result<Element> {
        self.check_same(other)?;
        Ok(Self::from_parts(self.algebra.clone(), self.algebra.product_raw(&self.coords, &other.coords)))
    }

    pub fn square(&self) -> Element {
        Self::from_parts(self.algebra.clone(), self.algebra.product_raw(&self.coords, &self.coords))
    }

    /// Trace inner product `tr(x∘y)`.
    pub fn inner(&self, other: &Element) -> Result<f64> {
        self.check_same(other)?;
        Ok(self.algebra.inner(&self.coords, &other.coords))
    }

    pub fn norm(&self) -> f64 {
        self.algebra.inner(&self.coords, &self.coords).sqrt()
    }

    pub fn trace(&self) -> f64 {
        self.algebra.inner(&self.coords, self.algebra.identity())
    }

    /// `L(x)`, self-adjoint for the trace form.
    pub fn multiplication_operator(&self) -> LinearOperator {
        self.algebra.mult_matrix_raw(&self.coords)
    }

    /// `P(x) = 2L(x)² − L(x²)`.
    pub fn quadratic_representation(&self) -> LinearOperator {
        self.algebra.quad_matrix_raw(&self.coords)
    }

    /// Applies an operator to the coordinates.
    pub fn apply(&self, op: &LinearOperator) -> Result<Element> {
        if op.ncols() != self.coords.len() || op.nrows() != self.coords.len() {
            return Err(Error::Dimension("operator shape does not match element".into()));
        }
        Ok(Self::from_parts(self.algebra.clone(), op * &self.coords))
    }

    pub fn spectral_decompose(&self) -> SpectralDecomposition {
        let (eigenvalues, frame) = spectral_raw(&self.algebra, &self.coords);
        let frame = frame.into_iter().map(|c| Self::from_parts(self.algebra.clone(), c)).collect();
        SpectralDecomposition { eigenvalues, frame }
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        spectral_raw(&self.algebra, &self.coords).0
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.algebra.min_eigenvalue_raw(&self.coords)
    }

    pub fn determinant(&self) -> f64 {
        match self.algebra.family() {
            Family::Sum(_) => self.blocks().iter().map(Element::determinant).product(),
            Family::Orthant(_) => self.coords.iter().product(),
            Family::Lorentz(_) => {
                let n = self.coords.len();
                self.coords[0] * self.coords[0] - self.coords.rows(1, n - 1).norm_squared()
            }
            _ => self.eigenvalues().iter().product(),
        }
    }

    /// `ln det x`; errors unless `x` is interior.
    pub fn log_det(&self) -> Result<f64> {
        if self.coords.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("log-determinant of a non-finite point".into()));
        }
        let not_interior = || Error::Domain("log-determinant of a non-interior point".into());
        match self.algebra.family() {
            Family::Sum(_) => self.blocks().iter().map(Element::log_det).sum(),
            Family::Orthant(_) => {
                if self.coords.iter().any(|&v| v <= 0.0) {
                    return Err(not_interior());
                }
                Ok(self.coords.iter().map(|v| v.ln()).sum())
            }
            Family::Lorentz(_) => {
                let n = self.coords.len();
                let r = self.coords.rows(1, n - 1).norm();
                let (a, b) = (self.coords[0] + r, self.coords[0] - r);
                if !(b > 0.0) {
                    return Err(not_interior());
                }
                Ok(a.ln() + b.ln())
            }
            Family::SymPsd(k) => {
                let m = smat(self.coords.as_slice(), *k);
                let chol = m.cholesky().ok_or_else(not_interior)?;
                Ok(2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>())
            }
            Family::Custom(_) => {
                let vals = self.eigenvalues();
                if vals.iter().any(|&l| !(l > 0.0)) {
                    return Err(not_interior());
                }
                Ok(vals.iter().map(|l| l.ln()).sum())
            }
        }
    }

    pub fn inverse(&self) -> Result<Element> {
        let sd = self.spectral_decompose();
        if sd.eigenvalues.iter().any(|&l| l == 0.0 || !l.is_finite()) {
            return Err(Error::Domain("element is singular".into()));
        }
        Ok(sd.map(|l| 1.0 / l))
    }

    pub fn sqrt(&self) -> Result<Element> {
        let sd = self.spectral_decompose();
        if sd.eigenvalues.iter().any(|&l| l < 0.0) {
            return Err(Error::Domain("square root of an element with a negative eigenvalue".into()));
        }
        Ok(sd.map(f64::sqrt))
    }

    /// `x^t` by spectral calculus. Non-integer powers need positive
    /// eigenvalues; negative integer powers need nonzero ones.
    pub fn power(&self, t: f64) -> Result<Element> {
        let sd = self.spectral_decompose();
        let integer = t.fract() == 0.0;
        for &l in &sd.eigenvalues {
            if !integer && l <= 0.0 {
                return Err(Error::Domain("fractional power of a non-interior element".into()));
            }
            if t < 0.0 && l == 0.0 {
                return Err(Error::Domain("negative power of a singular element".into()));
            }
        }
        Ok(sd.map(|l| l.powf(t)))
    }

    pub fn membership(&self, tol: f64) -> Membership {
        let m = self.min_eigenvalue();
        if m > tol {
            Membership::Interior
        } else if m < -tol {
            Membership::Exterior
        } else {
            Membership::Boundary
        }
    }

    pub fn is_interior(&self) -> bool {
        self.membership(INTERIOR_TOL) == Membership::Interior
    }

    /// Components on the top-level summands.
    pub fn blocks(&self) -> Vec<Element> {
        self.algebra
            .summand_ranges()
            .into_iter()
            .zip(self.algebra.summands())
            .map(|(r, a)| Self::from_parts(a, self.coords.rows(r.start, r.len()).into_owned()))
            .collect()
    }

    pub fn random<R: Rng + ?Sized>(algebra: &Arc<Algebra>, rng: &mut R) -> Element {
        Self::from_parts(algebra.clone(), random_gaussian(algebra.dim(), rng))
    }

    /// Interior point with eigenvalues `exp(U(−spread, spread))` on a random
    /// frame.
    pub fn random_interior<R: Rng + ?Sized>(algebra: &Arc<Algebra>, spread: f64, rng: &mut R) -> Element {
        let eig = |rng: &mut R| (rng.random_range(-spread..=spread)).exp();
        let coords = match algebra.family() {
            Family::Orthant(n) => DVector::from_fn(*n, |_, _| eig(rng)),
            Family::Lorentz(n) => {
                let dir = random_gaussian(*n, rng).normalize();
                let (a, b) = (eig(rng), eig(rng));
                let mut c = DVector::zeros(n + 1);
                c[0] = 0.5 * (a + b);
                c.rows_mut(1, *n).copy_from(&(0.5 * (a - b) * dir));
                c
            }
            Family::SymPsd(k) => {
                let o = random_rotation(*k, rng);
                let d = DMatrix::from_diagonal(&DVector::from_fn(*k, |_, _| eig(rng)));
                svec(&(&o * d * o.transpose()))
            }
            Family::Sum(children) => {
                let parts: Vec<_> = children
                    .iter()
                    .map(|c| Self::random_interior(c, spread, rng).coords)
                    .collect();
                let mut out = DVector::zeros(algebra.dim());
                for (p, r) in parts.iter().zip(algebra.summand_ranges()) {
                    out.rows_mut(r.start, r.len()).copy_from(p);
                }
                out
            }
            Family::Custom(_) => {
                let sd = Self::random(algebra, rng).spectral_decompose();
                let vals: Vec<f64> = sd.eigenvalues.iter().map(|_| eig(rng)).collect();
                let mut acc = DVector::zeros(algebra.dim());
                for (v, e) in vals.iter().zip(&sd.frame) {
                    acc.axpy(*v, e.coords(), 1.0);
                }
                acc
            }
        };
        Self::from_parts(algebra.clone(), coords)
    }

    pub fn scale(&self, t: f64) -> Element {
        Self::from_parts(self.algebra.clone(), &self.coords * t)
    }

    pub fn axpy(&self, a: f64, other: &Element) -> Result<Element> {
        self.check_same(other)?;
        Ok(Self::from_parts(self.algebra.clone(), &self.coords + a * &other.coords))
    }
}

// Arithmetic operators panic on mismatched algebras, like nalgebra does on
// mismatched shapes. Use `axpy` for a fallible version.
impl Add for &Element {
    type Output = Element;
    fn add(self, rhs: &Element) -> Element {
        self.axpy(1.0, rhs).expect("adding elements of different algebras")
    }
}

impl Sub for &Element {
    type Output = Element;
    fn sub(self, rhs: &Element) -> Element {
        self.axpy(-1.0, rhs).expect("subtracting elements of different algebras")
    }
}

impl Mul<&Element> for f64 {
    type Output = Element;
    fn mul(self, rhs: &Element) -> Element {
        rhs.scale(self)
    }
}

impl Neg for &Element {
    type Output = Element;
    fn neg(self) -> Element {
        self.scale(-1.0)
    }
}
