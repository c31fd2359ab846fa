//! Numerical building blocks: special functions, quadrature, root
//! finding, optimisation, polynomial roots, permanents and eigensolvers.

pub mod banded;
pub mod bessel;
pub mod lanczos;
pub mod nelder_mead;
pub mod permanent;
pub mod poly;
pub mod quad;
pub mod roots;
pub mod sparse;
