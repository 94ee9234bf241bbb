//! Numerical building blocks shared by the physics modules.

pub mod eigen;
pub mod fd;
pub mod jacobi;
pub mod jet;
pub mod ode;
pub mod quadrature;
