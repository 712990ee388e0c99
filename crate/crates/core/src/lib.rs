//! Rolling-origin comparison harness for monthly sales forecasters.
//!
//! Pipeline: [`dataset_io`] parses the benchmark CSVs into monthly series,
//! [`portfolio`] ranks items by revenue and classifies series, [`backtest`]
//! runs the forecasters from [`forecasters`] over rolling origins and scores
//! them with WAPE, and [`report`] turns the result table into CDFs,
//! best-of-all shares, importance scatters and window comparisons. [`cli`]
//! wires it together for the `forecast-arena` binary.

pub mod backtest;
pub mod cli;
pub mod dataset_io;
pub mod error;
pub mod forecasters;
pub mod month;
pub mod portfolio;
pub mod report;
pub mod synth;

pub use error::{ArenaError, Result};
pub use month::{Month, MonthRange};
