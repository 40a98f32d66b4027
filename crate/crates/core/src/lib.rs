//! Simulation-optimization of warehouse reordering and order-dispatch rules.
//!
//! A single warehouse serves several retailers under a continuous-review
//! `(r, Q)` policy. Filled orders wait in dispatch queues until a quantity
//! threshold or a shipping schedule releases a truck, and deliveries outside
//! the agreed window are penalized. [`sim`] simulates one policy, [`stats`]
//! controls replication, [`ssga`] searches the policy space, and [`study`]
//! runs the six dispatch scenarios end to end.

// `!(x >= 0.0)` style checks reject NaN on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod model;
pub mod sim;
pub mod ssga;
pub mod stats;
pub mod study;

pub use model::{NetworkConfig, PolicyParams, Scenario};
pub use sim::{run_replication, SimResult};
pub use ssga::{run_ssga, GaParams};
pub use stats::PrecisionPolicy;
