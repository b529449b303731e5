//! File formats and the command-line front end for `qqbf-core`.

pub mod cli;
pub mod formats;
