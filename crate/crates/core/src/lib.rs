//! Core models and algorithms for studying large flexible loads on a
//! transmission grid.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the CLI and
//! parallel execution live in the `gridflex` companion crate.
//!
//! Module map:
//!
//! * [`solver`]: bounded revised simplex with dual extraction and a
//!   best-first branch-and-bound on integer columns.
//! * [`grid`] and [`profile`]: the grid case model, validation, and dense
//!   hourly profiles.
//! * [`scada`]: cleaning and county aggregation of metered load telemetry.
//! * [`mining`]: site selection and the on/off flexibility rules.
//! * [`dispatch`]: day-ahead unit commitment, real-time economic dispatch and
//!   the day-by-day market loop.
//! * [`carbon`], [`reliability`], [`scenario`], [`market`]: analyses on top of
//!   dispatch results and profiles.
#![no_std]
// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod carbon;
pub mod dispatch;
pub mod grid;
pub mod market;
pub mod math;
pub mod mining;
pub mod profile;
pub mod reliability;
pub mod scada;
pub mod scenario;
pub mod solver;

pub use grid::{Branch, Bus, CostSegment, FuelType, Generator, GridCase};
pub use profile::{DayWindow, HourlyTable, LoadProfile, RenewableProfile};

/// Hours in one simulated day.
pub const HOURS_PER_DAY: usize = 24;
