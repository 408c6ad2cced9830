//! Command-line front end: matrix files, JSON expansions and the `mpcsr`
//! subcommands.

pub mod commands;
pub mod document;
pub mod format;

pub use commands::{run, Cli, CliError, Command};
pub use document::{DocumentError, ExpansionDocument, Provenance};
pub use format::{parse_matrix, to_dense, to_sparse, FormatError};
