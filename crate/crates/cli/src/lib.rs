//! Experiment driver for the RIS-assisted symbiotic-radio MEC simulator:
//! configuration parsing, Monte-Carlo sweeps and CSV aggregation.

pub mod config;
pub mod experiment;
