//! A numerical laboratory for the two-dimensional damped wave equation
//!
//! ```text
//! u_tt − Δu + a(x) u_t = 0,   (t, x) ∈ (0, ∞) × ℝ²
//! ```
//!
//! with a friction coefficient `a` that vanishes near the origin and is
//! bounded below by `ε₀` outside a disk of radius `L`. The crate simulates
//! the equation with a second-order leapfrog scheme on a square lattice large
//! enough that the finite propagation speed makes the box exact, and measures
//! every quantity that enters the decay estimates
//! `‖u(t)‖² = O(t⁻¹ log t)` and `E_u(t) = O(t⁻² log t)`:
//!
//! * [`geometry`]: lattices, fields, discrete operators, damping profiles and
//!   compactly supported data,
//! * [`solver`]: time stepping plus online accumulation of `v = ∫₀ᵗ u ds`,
//! * [`potential`]: the logarithmic Newton potential of `u₁ + a u₀` and the
//!   bounds built on it,
//! * [`diagnostics`]: energy, dissipation, interior/exterior masses, the
//!   multiplier functional `G_k`, propagation and Poincaré checks,
//! * [`rates`]: power-law and log-corrected decay fits,
//! * [`io`]: configuration, CSV series, binary field dumps, regression pins,
//! * [`presets`]: end-to-end experiments behind the `dampwave` binary.
//!
//! The narrative guide lives in `book/` at the repository root; its code
//! listings are compiled as doc-tests of this crate.

pub mod diagnostics;
pub mod error;
pub mod geometry;
pub mod io;
pub mod potential;
pub mod presets;
pub mod rates;
pub mod solver;
pub mod sum;

pub use error::{Error, Result};
pub use geometry::{Grid2D, ScalarField};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/solver.md")]
    mod solver {}
    #[doc = include_str!("../../../book/src/energy.md")]
    mod energy {}
    #[doc = include_str!("../../../book/src/potential.md")]
    mod potential {}
    #[doc = include_str!("../../../book/src/multiplier.md")]
    mod multiplier {}
    #[doc = include_str!("../../../book/src/rates.md")]
    mod rates {}
    #[doc = include_str!("../../../book/src/poincare.md")]
    mod poincare {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
