//! Command-line front end for the nonlocality-bound suite: reproduce
//! the published tables, solve arbitrary cell selections, run the
//! sampling oracle alongside the solver, and verify user-supplied
//! boxes. The binary in `main.rs` is a thin wrapper over these modules
//! so integration tests can drive the same code paths directly.

pub mod commands;
pub mod config;
pub mod report;
pub mod verify;
