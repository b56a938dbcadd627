//! Stop-and-go wave smoothing with a single controlled vehicle.
//!
//! * [`controller`]: the safety / target / anticipation controller.
//! * [`human`]: follow-the-leader + optimal-velocity human drivers.
//! * [`sim`]: ring and open-road platoon simulation.
//! * [`analysis`]: wave-boundary identification and speed-variance metrics.
//! * [`io`]: trajectory CSV, run configuration and time-space diagrams.
//! * [`cli`]: the `platoon` command-line tool.

// `!(x > 0.0)` is used on purpose so NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod cli;
pub mod controller;
pub mod error;
pub mod human;
pub mod io;
pub mod sim;
pub mod trajectory;
