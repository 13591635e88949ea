//! Market data: discount curves, vol quotes, and the total implied
//! variance surface every calibration consumes.

pub mod curves;
pub mod synth;
pub mod tiv;

pub use curves::{forward, DiscountCurve};
pub use synth::{flat_quote_grid, SmileSpec};
pub use tiv::{TivGridSpec, TivPoint, TivSurface, VolQuoteGrid};
