//! File formats, experiment driver and reports around `certroute-core`.

pub mod error;
pub mod experiment;
pub mod graph_io;
pub mod report;
pub mod text;

pub use error::{Error, ParseError};
pub use experiment::{run, run_on, ExperimentConfig, SchemeKind};
pub use report::ExperimentReport;
