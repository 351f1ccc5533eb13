//! Library half of the `pertmatch` binary: experiment configurations and
//! their execution, kept importable so integration tests can reuse the
//! frozen file-format constants.

pub mod commands;
pub mod config;
