//! Exact symmetry checks and numerical period comparison for polynomial
//! vector fields `ż = V(z)` and their time rescalings `ż = α(z) V(z)`.

pub mod cli;
pub mod cycles;
pub mod equiv;
pub mod flow;
mod numeric;
pub mod polycore;
pub mod symmetry;
