//! Library surface of the batch driver: configuration, run execution,
//! convergence studies and the built-in check suite.

pub mod checks;
pub mod config;
pub mod experiments;
pub mod runner;
pub mod study;
