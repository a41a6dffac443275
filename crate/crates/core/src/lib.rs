//! Adversarial planar instances for k-means++ seeding.
//!
//! The instance is a row of k vertical bars whose point counts shrink
//! geometrically from left to right. D²-seeding tends to land in a heavy bar
//! early, after which it covers the remaining bars like a biased
//! pairs-of-colors urn and misses a constant fraction of them, which pins the
//! approximation ratio above a constant with all but exponentially small
//! probability.
//!
//! - [`numeric`]: extended-range scalars for potentials spanning ~4^k.
//! - [`geometry`]: weighted locations, D^ℓ costs, cluster coverage.
//! - [`instances`]: the k-means and k-median instances and their optima.
//! - [`seeding`]: D^ℓ seeding and an exact outcome oracle for tiny k.
//! - [`ballgame`]: the plain and biased ball-sampling processes and bounds.
//! - [`harness`]: reproducible trials, summaries and reports.

pub mod ballgame;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod instances;
pub mod numeric;
pub mod seeding;

pub use error::{Error, Result};
pub use geometry::{CenterSet, CostExponent, Instance, Variant, WeightedLocation};
pub use numeric::ExtScalar;
