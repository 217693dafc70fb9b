//! Magnetic Laplacian and Ginzburg-Landau solvers on thin planar rings.
//!
//! A thin ring `Ω_ε = {x ∈ Ω : dist(x, ∂Ω) < ε}` is flattened into the periodic
//! strip `[-L, L) × [0, ε]` by boundary coordinates `(s, t)`. All solvers work on
//! that strip:
//!
//! * [`geometry`] builds the arc-length parameterized boundary and the strip chart.
//! * [`gaugefield`] computes the boundary trace of the reference potential and the gauge phase φ₀.
//! * [`fiber1d`] solves the one-dimensional fiber operators obtained after Fourier decomposition.
//! * [`effective`] evaluates the closed-form predictions (𝔦₀, n₀, 𝔢₀, separation margins, ...).
//! * [`spectral2d`] discretizes the strip quadratic forms and computes their lowest eigenpairs.
//! * [`glsolver`] minimizes the Ginzburg-Landau energy with the gauge frozen to the reference potential.
//!
//! ```
//! use thinring::effective::{effective_model, PhysParams};
//! use thinring::geometry::{build_geometry, DomainSpec};
//! use thinring::spectral2d::{assemble_and_solve, FormKind, GridPolicy, StripOperatorSpec};
//!
//! let geom = build_geometry(&DomainSpec::disc(1.0), 512)?;
//! let p = PhysParams::new(1.0, 1.0, 0.0, 0.04);
//! let model = effective_model(&geom, &p)?;
//!
//! let b = p.field();
//! let chart = GridPolicy::default().chart(&geom, p.epsilon, b)?;
//! let spec = StripOperatorSpec { chart, b, form: FormKind::Reduced, n_eigs: 1 };
//! let lambda = assemble_and_solve(&spec)?.eigenvalues[0];
//! assert!((lambda - model.e0).abs() < 1e-3);
//! # Ok::<(), thinring::Error>(())
//! ```

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod effective;
pub mod error;
pub mod fiber1d;
pub mod gaugefield;
pub mod geometry;
pub mod glsolver;
pub mod quadrature;
pub mod spectral2d;
pub mod tridiag;

pub use error::{Error, Result};
