//! Numerical building blocks shared by the physics modules.

pub mod aaa;
pub mod faddeeva;
pub mod linalg;
pub mod quadrature;
