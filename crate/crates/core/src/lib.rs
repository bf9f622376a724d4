//! Menger-type curvatures, Jones beta numbers, and density diagnostics for
//! discrete (weighted point-cloud) measures.
//!
//! The toolkit evaluates the multi-point curvature integrands `K1` and `K2`,
//! exact and Monte Carlo curvature sums, Jones `beta_p` numbers and their
//! centered variants, multiscale and Carleson sums, the constructive
//! spanning-point selection with its quantitative constants, and synthetic
//! generators with known rectifiability status. Everything is deterministic
//! for a fixed seed.

// Parameter guards are written `!(x > 0.0)` so NaN inputs fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod beta;
pub mod checks;
pub mod curvature;
pub mod error;
pub mod generators;
pub mod io;
pub mod measure;
pub mod run;
pub mod selection;
pub mod simplex;

pub use error::{MengerError, Result};
pub use measure::{Ball, DiscreteMeasure, ScaleGrid};
pub use simplex::{IntegrandKind, IntegrandSpec};
