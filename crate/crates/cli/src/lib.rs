//! Command-line runner for `excursions-core`: TOML configuration, run
//! manifests, CSV and SVG output, and the exact invariant checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod exec;
pub mod experiments;
pub mod invariants;
pub mod io;
pub mod plot;
