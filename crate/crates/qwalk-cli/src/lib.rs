//! Configuration and table plumbing behind the `qwalk` binary, exposed as a
//! library so integration tests can exercise the file formats directly.

pub mod config;
pub mod table;
