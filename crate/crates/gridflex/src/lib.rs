//! File formats, parallel drivers and the command-line pipeline around
//! [`gridflex_core`].
//!
//! * [`case`]: JSON grid case documents.
//! * [`tables`]: hourly profile tables and CSV result tables.
//! * [`telemetry`]: metered load telemetry and operator signals.
//! * [`manifest`]: the TOML run manifest.
//! * [`pipeline`]: the manifest-driven study and its result directory.
//! * [`compare`]: differences between two result directories.

pub mod case;
pub mod compare;
pub mod error;
pub mod manifest;
pub mod output;
pub mod parallel;
pub mod pipeline;
pub mod tables;
pub mod telemetry;

pub use error::{Error, Result};
pub use gridflex_core as core;
