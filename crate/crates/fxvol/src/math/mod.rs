//! Numerical building blocks shared across the calibration stack.

pub mod linalg;
pub mod normal;
pub mod pwconst;
pub mod quad;
pub mod spline;

pub use normal::{inv_norm_cdf, norm_cdf, norm_pdf};
pub use pwconst::PiecewiseConstant;
pub use quad::GaussLegendre;
pub use spline::CubicSpline;
