//! Command-line front end for the sweep engine: configuration layering
//! (defaults < config file < flags), deterministic artifact emission,
//! and self-check report rendering.

pub mod config;
pub mod emit;
pub mod report;
