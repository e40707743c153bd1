//! Property suites shared between the per-module tests and the acceptance run.
//! Each suite panics on the first failure.
#![allow(dead_code)]

pub mod arith;
pub mod corpus;
pub mod lattice;
pub mod laws;
pub mod memory;
