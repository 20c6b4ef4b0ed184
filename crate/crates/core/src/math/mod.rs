//! Numerical building blocks shared by the models: special functions,
//! Gaussian quadrature rules, adaptive integration, root finding and
//! shape-preserving interpolation.

pub mod interp;
pub mod quad;
pub mod roots;
pub mod special;

pub use interp::MonotoneCubic;
pub use special::{norm_cdf, norm_pdf};
