//! Config-driven front end for the multiplicativity checks in
//! [`rkhsmult_core`]: expression parsing, JSON job configs, value tables and
//! machine-readable reports.

pub mod config;
pub mod expr;
pub mod numfmt;
pub mod report;
pub mod run;
pub mod table;

pub use config::JobConfig;
pub use report::ReportDocument;
pub use run::{run_path, Command, Job, Overrides, RunError};
