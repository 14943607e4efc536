//! Command-line workbench around `sequent-core`: configuration files, dataset CSVs, model
//! snapshots, training runs with their reports, decision grids, self-verification and the
//! multi-seed benchmark.

pub mod benchmark;
pub mod config;
pub mod error;
pub mod evaluate;
pub mod grid;
pub mod io;
pub mod run;
pub mod snapshot;
pub mod verify;

pub use error::{Error, Result};
