//! Command-line front end, file formats and Monte Carlo experiments for
//! [`oulab_core`].

pub mod cli;
pub mod error;
pub mod experiments;
pub mod fixture;
pub mod report;
pub mod tables;

pub use error::AppError;
