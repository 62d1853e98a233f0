//! Time-slotted bottleneck-network simulation and finite-horizon
//! planning for quality-aware, TCP-friendly multimedia congestion
//! control.
//!
//! The crate provides:
//!
//! - a packet-class domain model with decode-dependency DAGs ([`media`]),
//! - a transport/bottleneck model with AIMD background traffic and an
//!   estimated window-transition chain ([`net`]),
//! - a per-class backward-induction planner with priority-metric
//!   thresholds and a depth-ordered sweep for interdependent classes
//!   ([`solver`]), plus an exhaustive joint reference solver ([`oracle`]),
//! - pluggable per-slot controllers ([`controllers`]),
//! - quality-fairness analytics ([`fairness`]),
//! - a deterministic slot-stepped simulator ([`sim`]).

pub mod controllers;
pub mod error;
pub mod fairness;
pub mod media;
pub mod net;
pub mod oracle;
pub mod sim;
pub mod solver;

pub use error::{Error, Result};
pub use media::{Action, ClassSpec, ClassState, Dag};
pub use net::{AimdAgent, NetChain, NetState};
pub use solver::{
    PolicyTables, Schedule, SlotPlan, Solution, SolveResult, SolverConfig, SystemState,
};
