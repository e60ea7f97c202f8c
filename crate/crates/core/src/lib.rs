//! Capacity bounds for the multiple-input single-output optical intensity
//! channel `Y = h^T x + Z` with per-LED peak limit `A` and total average
//! limit `alpha A`.
//!
//! All information quantities are in nats.

// `!(x > 0.0)` is used deliberately so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index loops in the small dense eliminations mirror the row operations.
#![allow(clippy::needless_range_loop)]

pub mod asymptotics;
pub mod channel;
pub mod error;
pub mod lower;
pub mod numerics;
pub mod oracles;
pub mod upper;

pub use asymptotics::{high_snr_gap, low_snr_slope, schedule_params, AsymptoticGap, ScheduleParams};
pub use channel::{make_channel, ChannelGains, Noise, PowerBudget, RegimeClass};
pub use error::{Error, Result};
pub use lower::{lower_bound_epi, lower_bound_uniform, BoundEvaluation, BoundKind};
pub use upper::{upper_bound_duality, upper_bound_siso, upper_bound_vmax, vmax};
