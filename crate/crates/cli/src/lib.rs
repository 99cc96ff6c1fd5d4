//! Library half of the `cev-ruin` command-line tool: settings resolution,
//! K-sweep orchestration and persistence, and the cross-module self-check
//! suite. The binary in `main.rs` is a thin argument-parsing layer over
//! these functions so they stay testable in-process.

pub mod config;
pub mod sweep;
pub mod validate;
