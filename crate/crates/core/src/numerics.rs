//! Quadrature and ODE integration used by the physics modules.

pub mod ode;
pub mod quadrature;
