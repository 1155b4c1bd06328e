//! Numerical core for incremental-redundancy feedback analysis.
//!
//! The crate covers finite-blocklength random-coding bounds for the BSC,
//! rate-compatible sphere-packing (RCSP) error approximations for the AWGN
//! channel and the BSC, Chernoff bounds on joint error events, schedule
//! optimization, and a Monte-Carlo simulator of tail-biting convolutional
//! codes under genie confirmation.
//!
//! Only `alloc` is required. All floating-point math goes through `libm`.

#![no_std]
#![forbid(unsafe_code)]
// `!(x > 0.0)` also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod channels;
pub mod chernoff;
pub mod error;
pub mod optimizer;
pub mod rcsp;
pub mod rcu;
pub mod simulator;
pub mod special;
pub mod trellis;

pub use channels::ChannelSpec;
pub use error::{Error, Result};
pub use rcsp::{
    DecodingMode, ErrorProfile, IncrementSchedule, Jointness, LatencyMode, PerformancePoint,
};
