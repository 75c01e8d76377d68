//! Core algorithms for the traveling salesman problem with time slots
//! (TSP-TS): time windows that form a partition of a planning horizon,
//! with several clients sharing a slot.
//!
//! The crate provides four layers:
//!
//! - [`model`]: instances, slot partitions, time windows and slot
//!   assignments, plus the plane geometry they share.
//! - [`approx`]: closed-form asymptotic tour-length approximations and
//!   feasibility conditions derived from the BHH constant, including the
//!   reduction of general time windows to induced time slots.
//! - [`maxent`]: worst-case demand distributions under the maximum-entropy
//!   principle, spatial (exponential-of-quadratic density) and temporal
//!   (binomial over slots), with the corresponding approximation and
//!   satisfiability variants.
//! - [`solver`]: an exact optimum via a layered slot DAG with precomputed
//!   intra-slot Hamiltonian-path costs and a label-setting search with
//!   dominance and lower-bound pruning, plus brute-force and heuristic
//!   oracles.
//! - [`genbench`]: seeded random instance generation (repulsion slot
//!   partitions, temporal demand modes) and parsing of literature TSP-TW
//!   benchmark text.
//!
//! Everything here is `no_std` + `alloc`; file formats, the CLI, and the
//! experiment harness live in the companion `tspts-cli` crate.

#![no_std]
#![deny(unsafe_code)]
// `!(x > 0.0)` guards reject NaN; the positive comparison is the invariant
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod approx;
pub mod genbench;
pub(crate) mod math;
pub mod maxent;
pub mod model;
pub mod solver;

pub use model::{Instance, Point, SlotAssignment, SlotPartition, TimeWindowSet};
