//! Command-line front end for the `spatial-entropy` library.
//!
//! Subcommands: `entropy`, `kl`, `match` and `noise-demo`. Images are read
//! as binary PGM, or PNG with the `png` feature. Reports go to stdout, with
//! optional JSON and CSV files written atomically.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod error;
pub mod io;

pub use args::Cli;
pub use commands::run;
pub use error::CliError;
