//! Verification suites, parameter parsing and report output behind the
//! `distfix` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod emit;
pub mod error;
pub mod params;
pub mod suites;

pub use emit::{emit, render, Format};
pub use error::{CliError, Result};
pub use params::{parse_dist, Params};
pub use suites::{run_suite, RunConfig, SUITES};

/// Process exit codes.
pub mod exit {
    pub const PASS: i32 = 0;
    pub const FAIL: i32 = 1;
    pub const USAGE: i32 = 2;
}
