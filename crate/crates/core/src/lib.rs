//! Hashmarks: benchmarks whose reference answers are published only as
//! question-salted argon2id hashes.
//!
//! The crate covers the whole lifecycle: experts hash their answers
//! ([`hashcore`]), an auditor cross-checks and filters contributions
//! ([`protocol`]) and publishes a document ([`model`]) whose later stages may
//! be sealed behind earlier answers ([`stages`]). Evaluators grade answer
//! sheets against the published document ([`grade`]) and the [`attack`]
//! harness measures what it costs to recover answers without knowing them.

pub mod attack;
pub mod calibrate;
pub mod canon;
pub mod cli;
pub mod config;
mod error;
pub mod grade;
pub mod hashcore;
pub mod model;
mod par;
pub mod protocol;
pub mod stages;

pub use error::{Error, Result};
