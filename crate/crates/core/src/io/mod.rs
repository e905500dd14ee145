//! Load logs, run configuration and tabular output.

pub mod config;
pub mod loadlog;
pub mod table;

pub use config::RunConfig;
pub use loadlog::{parse_load_log, read_load_log, write_load_log, AthleteLog, LoadLog, ParseReport};
pub use table::Table;
