//! Four-valued hierarchical netlist toolkit.
//!
//! Modules, bottom-up: [`fourval`] (signal lattice and gates), [`memory`]
//! (tagged tree memories), [`netlist`] (language, reader, well-formedness),
//! [`eval`] (output and next-state evaluation), [`approx`] (state
//! approximation and the monotonicity harness), [`genlib`] (circuit
//! generators), [`minifm`] (a small two-phase CPU and its instruction-level
//! specification) and [`report`] (JSON reports).

pub mod approx;
pub mod eval;
pub mod fourval;
pub mod genlib;
pub mod memory;
pub mod minifm;
pub mod netlist;
pub mod report;

pub use fourval::{GateId, Value4, Vec4};
pub use memory::{MemKind, MemTree};
pub use netlist::Netlist;
pub use eval::{Evaluator, StateShape, StateTree};
