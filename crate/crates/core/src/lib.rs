//! Spectral instability of small-amplitude Stokes waves in finite depth.
//!
//! The crate carries a Stokes expansion, the linearized operator and its
//! adjoint modes, the expanded perturbation operators, a center-manifold
//! solver and the resulting monodromy coefficients, and from those the
//! Benjamin–Feir index `ind₁` and the high-frequency index `ind₂`.

pub mod bvp;
pub mod cli;
pub mod dispersion;
pub mod eigensystem;
pub mod error;
pub mod funcspace;
pub mod indices;
pub mod monodromy;
pub mod operator_b;
pub mod reduction;
pub mod roots;
pub mod stokes;

pub use error::{Error, Result};
