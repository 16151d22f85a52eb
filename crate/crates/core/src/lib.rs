//! Exact finite-order construction of star-products from a Fedosov
//! connection on the jet bundle of a chart `U ⊆ ℝ^d`.
//!
//! The layers, bottom-up:
//! - [`fps`]: truncated series in `x`, `y`, `ε` over ℚ;
//! - [`forms`]: series-valued differential forms in `dx`;
//! - [`moyal`]: fiberwise products (Moyal, first-order Kontsevich);
//! - [`jet`]: local lifts, the canonical connection `D₀`, `δ`, `δ*`, `δ⁻¹`
//!   and Hamiltonian lifts;
//! - [`fedosov`]: Weyl curvature, the flattening one-form, the quantization
//!   map and the induced star-product on functions.

#![allow(clippy::needless_range_loop, clippy::manual_is_multiple_of)]

pub mod error;
pub mod fedosov;
pub mod forms;
pub mod fps;
pub mod jet;
pub mod moyal;

pub use error::{Error, Location, Result};
