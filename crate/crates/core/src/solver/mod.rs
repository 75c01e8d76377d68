//! Exact optimum for slot-constrained tours.
//!
//! The pipeline: [`build_dag`] lays the instance out as a layered acyclic
//! graph whose intra-slot arcs carry optimal Hamiltonian-path costs
//! ([`hamiltonian_all_pairs`]), then [`solve`] runs a label-setting
//! shortest-path search over it with dominance and lower-bound pruning.
//! [`brute_force_solve`] provides an independent permutation-enumeration
//! oracle with identical semantics for small instances.

mod brute;
mod dag;
mod hamiltonian;
mod labels;

pub use brute::brute_force_solve;
pub use dag::{build_dag, DagArc, DagVertex, ReprSlot, SlotDag, VertexRole};
pub use hamiltonian::{
    hamiltonian_all_pairs, hamiltonian_path, heuristic_hamiltonian, heuristic_hamiltonian_order,
    HamiltonianCosts,
};
pub use labels::{greedy_path, solve, solve_with_stop};

use core::fmt;
use core::time::Duration;

use crate::model::ModelError;

#[derive(Debug, Clone, PartialEq)]
pub enum SolveError {
    SlotTooLarge { size: usize, threshold: usize },
    TooManyClients { clients: usize },
    AssignmentMismatch,
    Model(ModelError),
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::SlotTooLarge { size, threshold } => write!(
                f,
                "slot of {size} points exceeds the exact threshold {threshold} and heuristic mode is off"
            ),
            SolveError::TooManyClients { clients } => {
                write!(f, "brute force limited to 10 clients, got {clients}")
            }
            SolveError::AssignmentMismatch => {
                write!(f, "assignment inconsistent with the instance or partition")
            }
            SolveError::Model(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for SolveError {}

impl From<ModelError> for SolveError {
    fn from(e: ModelError) -> Self {
        SolveError::Model(e)
    }
}

/// Knobs for DAG construction and the label search. The debug switches
/// only ever change work counts, never the returned optimum.
#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// Largest slot solved by the exact bitmask DP.
    pub exact_threshold: usize,
    /// Allow falling back to the heuristic oracle on oversized slots
    /// instead of failing.
    pub heuristic_fallback: bool,
    /// Route every slot through the heuristic oracle.
    pub force_heuristic: bool,
    pub disable_dominance: bool,
    pub disable_binf: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            exact_threshold: 18,
            heuristic_fallback: false,
            force_heuristic: false,
            disable_dominance: false,
            disable_binf: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    TimedOut,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SolveStats {
    pub labels_created: u64,
    pub labels_dominated: u64,
    pub labels_pruned_by_bound: u64,
    pub hamiltonian_oracle_calls: u64,
    /// False when any intra-slot cost came from the heuristic oracle, in
    /// which case the "optimum" is only an upper bound.
    pub hamiltonian_exact: bool,
    /// Filled by callers that can take timestamps; zero otherwise.
    pub wall_time: Duration,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub status: SolveStatus,
    /// Travel cost of the optimal tour; waiting time is not part of it.
    pub cost: Option<f64>,
    /// Client point indices in visit order (depot excluded).
    pub order: alloc::vec::Vec<usize>,
    /// Service start time per visited client, in visit order.
    pub arrive_times: alloc::vec::Vec<f64>,
    pub stats: SolveStats,
}

impl SolveResult {
    pub(crate) fn infeasible(stats: SolveStats) -> Self {
        SolveResult {
            status: SolveStatus::Infeasible,
            cost: None,
            order: alloc::vec::Vec::new(),
            arrive_times: alloc::vec::Vec::new(),
            stats,
        }
    }
}
