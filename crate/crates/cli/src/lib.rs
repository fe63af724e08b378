//! Library side of the `fundfdtd` command-line tool: configuration,
//! simulation driver, snapshot format and verification suites.

pub mod config;
pub mod simulate;
pub mod snapshot;
pub mod suites;
