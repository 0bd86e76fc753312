//! Euclidean Jordan algebra arithmetic: orthant, Lorentz, real symmetric
//! matrices, direct sums, and algebras given by structure constants.

mod algebra;
mod element;
mod spectral;
mod tensor;

pub use algebra::{Algebra, Family, IrreducibleBlock};
pub use element::{Element, LinearOperator, Membership, INTERIOR_TOL};
pub use spectral::SpectralDecomposition;
pub use tensor::StructureTensor;


#[cfg(test)]
mod tests;
