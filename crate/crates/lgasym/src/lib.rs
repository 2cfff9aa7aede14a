//! Command line, JSON reports, CSV tables and validation suites on top of
//! `lgasym-core`.

pub mod cli;
pub mod report;
pub mod table;
pub mod validate;
