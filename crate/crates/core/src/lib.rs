//! Spectral simulation and asymptotic-profile verification for the
//! dissipative Fornberg–Whitham equation with generalized nonlinearity
//!
//! ```text
//! u_t + (|u|^{p-1}u)_x + ∫ B e^{-b|x-y|} u_y(y,t) dy = μ u_xx,   p > 2.
//! ```

pub mod analysis;
pub mod error;
pub mod grid;
pub mod kernel;
pub mod kv;
pub mod norms;
pub mod profiles;
pub mod quad;
pub mod snapshot;
pub mod solver;
pub mod spectral;
pub mod store;

pub use error::{Error, Result};
pub use grid::{Field, Frame, Grid, Params, Spectrum};
