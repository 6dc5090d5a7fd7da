//! Batch experiment descriptions and the runner that executes them.
//!
//! [`config`] parses a flat `key = value` text format (one `[section]` per
//! experiment) into validated [`config::ExperimentConfig`] values, including
//! the state-spec mini-language (`h`, `hwp:pi/8`, `werner:0.8`, bracket
//! matrix literals). [`runner`] executes configured experiments entirely in
//! memory and returns the manifest plus named CSV artifacts, leaving file
//! I/O to the caller so the same code drives the command line and the
//! browser demo.

pub mod config;
pub mod runner;
