//! Numerical toolkit for two-dimensional conformally invariant variational
//! problems.
//!
//! A Lagrangian `L(u, du) = F(u, ∂₁u + i∂₂u)` is conformally invariant exactly
//! when `F(y, λz) = |λ|² F(y, z)`. Such an `F`, with a positive-definite
//! z-Hessian, is a C-Finsler structure; this crate evaluates and checks those
//! structures, computes the derived metric tensors, implements the Weyl and
//! Carathéodory–Rund Legendre correspondences, solves the Euler–Lagrange
//! equation on rectangular grids, and exposes the conservation laws and
//! Hamilton–Jacobi conditions as numerical residuals.
//!
//! Indexing conventions used throughout:
//! * a tangent vector `z = z₁ + i z₂ ∈ ℂⁿ` is stored as two real vectors;
//! * z-Hessians are `2n × 2n` with row/column `(j, α) ↦ α·n + j`;
//! * `H[(α, β)]` holds `H^α_β`, and `ε[(α, β)]` holds `ε^α_β`.

pub mod caratheodory;
pub mod conservation;
pub mod diffcore;
pub mod elsolve;
pub mod error;
pub mod grid;
pub mod hamjac;
pub mod lagrangian;
pub mod maps;
pub mod sampling;
pub mod tensors;
pub mod weyl;

mod linalg;
mod newton;

pub use caratheodory::{CaraMomenta, EnergyMomentum, PlueckerA};
pub use diffcore::{FirstJet, HessianZ, JetSample};
pub use error::{Error, Result};
pub use grid::{Grid, GridField};
pub use lagrangian::{Evaluator, Family, HolomorphicField, Lagrangian, MetricField, TwoForm};
pub use tensors::MetricBundle;
pub use weyl::CotangentSample;

pub use num_complex::Complex64;
