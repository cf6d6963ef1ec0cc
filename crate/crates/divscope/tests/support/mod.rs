//! Shared oracles and synthetic data generators for the integration tests
//! and the acceptance suite.

#![allow(dead_code)]

#[path = "../../../core/tests/support/align_oracle.rs"]
pub mod align_oracle;
#[path = "../../../core/tests/support/dense.rs"]
pub mod dense;
pub mod synth;
