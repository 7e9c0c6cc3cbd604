//! File formats, experiment corpora and command dispatch for the `pinvcond`
//! binary.

pub mod corpus;
pub mod error;
pub mod input;
pub mod report;
pub mod reproduce;
pub mod run;

pub use error::CliError;
pub use input::{parse_instance, Instance};
pub use report::{Format, ReportDocument};
pub use reproduce::{reproduce, ReproduceDocument, TableId};
pub use run::{document, run, Command, RunConfig};
