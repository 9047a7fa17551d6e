//! Scalar numerical primitives: the standard normal pair, adaptive
//! Gauss–Kronrod integration and bracketed root finding.

mod normal;
mod quadrature;
mod roots;

pub use normal::{log_std_normal_sf, phi, std_normal_cdf, std_normal_pdf, std_normal_sf};
pub use quadrature::{integrate, Integral, QuadratureSpec};
pub use roots::{find_root, Root};
