//! Entanglement purification built on the iSWAP and sqrt(SWAP) gates.
//!
//! * [`gates`]: dense gate algebra and the decomposition identities.
//! * [`bell`]: Bell-basis bookkeeping for two shared pairs and table generation.
//! * [`purify`]: purification rounds, analytic and by density-matrix simulation.
//! * [`rewrite`]: circuit IR, BCNOT to BiSWAP rewriting, hashing and breeding.
//! * [`hardware`]: timing model, device presets, dispersive coupling.
//! * [`bellgen`]: one-shot Bell-pair generation recipes.

pub mod error;
pub mod bell;
pub mod gates;
pub mod purify;
pub mod rewrite;
pub mod hardware;
pub mod bellgen;

pub use error::{Error, Result};
