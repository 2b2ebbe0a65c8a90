//! Simulation workbench for three models of distributed network computing:
//!
//! * the synchronous LOCAL model, where a `t`-round algorithm is a function of
//!   each node's radius-`t` ball ([`local_engine`]);
//! * the AsyncLocal model, where crash-prone processes wake at arbitrary rounds
//!   and take a single atomic snapshot of their surroundings ([`async_engine`]);
//! * the DECOUPLED model, where asynchronous processes sit on top of synchronous
//!   flooding routers ([`decoupled`]).
//!
//! The [`transform`] module turns any LOCAL algorithm with round bound `t(N)`
//! into an AsyncLocal algorithm with snapshot radius `3·t(N²)` by reassigning
//! identifiers that every awake node can compute for its whole vicinity, even
//! for processes that have not woken up.
//!
//! Outputs are checked against locally checkable labeling tasks in [`lcl`],
//! under the partial-labeling semantics used for crash-prone executions.

pub mod algorithms;
pub mod async_engine;
pub mod cli;
pub mod decoupled;
pub mod error;
pub mod graph;
pub mod lcl;
pub mod local_engine;
pub mod par;
pub mod schedule;
pub mod sweep;
pub mod transform;

pub use error::{Error, Result};
pub use graph::{Ball, NodeIdx, PortGraph};
pub use lcl::{Label, LclTask, PartialLabeling};
pub use schedule::{Fate, Schedule, Wake};
