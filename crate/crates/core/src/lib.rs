//! Simulator and optimizer for an RIS-assisted symbiotic-radio edge-computing
//! system: channel generation, the sensing/offloading system model, the
//! alternating closed-form optimizer, an SDR phase benchmark and the
//! comparison schemes used by the experiment driver.

// Validation deliberately writes `!(x > 0.0)` so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Per-user loops index several parallel arrays by the same k.
#![allow(clippy::needless_range_loop)]

pub mod ao;
pub mod channels;
pub mod error;
pub mod model;
pub mod numerics;
pub mod schemes;
pub mod sdr;
pub mod seed;

pub use error::{Error, Result};
