//! Agent-based simulation of publishing scientists, tracking how the h index
//! and the h-alpha index evolve when credit for co-authored papers goes to the
//! co-author with the highest h index.
//!
//! The crate is organised bottom-up:
//!
//! - [`distributions`]: count samplers and the log-logistic citation-aging curve.
//! - [`model`]: papers, agents, and the h / h-core / h-alpha computations.
//! - [`engine`]: initialization, the per-period collaboration/publication/citation
//!   loop, and deterministic multi-run orchestration.
//! - [`analysis`]: low/high initial-h groups, cross-run aggregation, CSV export.

pub mod analysis;
pub mod distributions;
pub mod engine;
mod error;
pub mod model;

pub use error::{Error, Result};
