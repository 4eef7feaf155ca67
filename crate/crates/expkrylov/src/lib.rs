//! Standard-library companion of `expkrylov-core`: graph, pole and
//! trajectory file formats, a thread-safe factorization cache, run
//! configuration, the oracle suite and the `expkrylov` command-line tool.

pub mod bench;
pub mod cache;
pub mod cli;
pub mod config;
pub mod driver;
pub mod formats;
pub mod oracle;
pub mod verify;
