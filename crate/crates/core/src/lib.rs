//! Acute:chronic workload ratio toolkit.
//!
//! - [`series`]: daily workload histories, weekly blocks, rolling means
//! - [`ratio`]: rolling and EWMA ratio engines, weight tables, convergence
//! - [`planner`]: maximum safe next-week load and schedule projection
//! - [`study`]: synthetic cohorts, early-injury bias, study designs
//! - [`audit`]: risk zones and events-per-cell checks
//! - [`figures`]: plot-ready data for the illustrative figures
//! - [`io`], [`service`], [`cli`]: files, HTTP endpoints, command line

pub mod audit;
pub mod cli;
pub mod error;
pub mod figures;
pub mod io;
pub mod planner;
pub mod ratio;
pub mod series;
pub mod service;
pub mod study;

pub use error::{Error, Result};
