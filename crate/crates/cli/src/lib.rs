//! Support library for the `nls` binary: error taxonomy with exit codes,
//! plain-text file formats, and JSON report schemas.

pub mod error;
pub mod formats;
pub mod report;
