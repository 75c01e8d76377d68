//! Layered DAG over slot-assigned clients.
//!
//! Levels: source at 0; the k-th represented (nonempty) slot contributes
//! entry copies at level `2k+1` and exit copies at level `2k+2`; the sink
//! sits at level `2R+1` for `R` represented slots. Every arc advances one
//! level, so level order is a topological order.
//!
//! Intra-slot arcs connect an entry copy `i` to an exit copy `j != i` at
//! the optimal Hamiltonian-path cost through all slot points; a singleton
//! slot keeps both copies joined by a zero-cost hop so the level structure
//! stays uniform. Empty slots are skipped entirely: exits of the previous
//! nonempty slot connect straight to the entries of the next one. That
//! loses no feasible tour since an empty slot constrains nothing.

use alloc::vec;
use alloc::vec::Vec;

use super::hamiltonian::hamiltonian_all_pairs;
use super::{SolveError, SolveOptions};
use crate::model::{Instance, SlotAssignment, SlotPartition};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexRole {
    Source,
    Entry,
    Exit,
    Sink,
}

#[derive(Debug, Clone)]
pub struct DagVertex {
    /// Point index in the instance (0 for source and sink).
    pub original: usize,
    pub role: VertexRole,
    pub level: usize,
    /// Index into [`SlotDag::repr_slots`], when the vertex belongs to one.
    pub repr_slot: Option<usize>,
    /// Time window the arrival at this vertex must respect.
    pub window: (f64, f64),
}

#[derive(Debug, Clone, Copy)]
pub struct DagArc {
    pub to: usize,
    pub cost: f64,
}

/// A nonempty slot as represented in the DAG.
#[derive(Debug, Clone)]
pub struct ReprSlot {
    /// Slot index in the original partition.
    pub slot_index: usize,
    /// Instance point indices assigned to the slot.
    pub members: Vec<usize>,
    pub window: (f64, f64),
    /// Whether the intra-slot costs came from the exact DP.
    pub exact: bool,
}

#[derive(Debug, Clone)]
pub struct SlotDag {
    pub vertices: Vec<DagVertex>,
    /// Outgoing arcs per vertex, sorted by (cost, target).
    pub out_arcs: Vec<Vec<DagArc>>,
    pub source: usize,
    pub sink: usize,
    /// Level of the sink; the DAG has `max_level + 1` levels.
    pub max_level: usize,
    /// Minimal arc cost from level `p` to `p+1`.
    pub dist_min: Vec<f64>,
    /// `binf_suffix[p]` = sum of `dist_min[p..]`, the optimistic cost of
    /// completing any level-`p` vertex to the sink.
    pub binf_suffix: Vec<f64>,
    pub repr_slots: Vec<ReprSlot>,
    pub hamiltonian_exact: bool,
    pub hamiltonian_oracle_calls: u64,
}

impl SlotDag {
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn arc_count(&self) -> usize {
        self.out_arcs.iter().map(Vec::len).sum()
    }

    /// Vertex ids grouped by level, ascending within a level.
    pub(crate) fn level_buckets(&self) -> Vec<Vec<usize>> {
        let mut buckets = vec![Vec::new(); self.max_level + 1];
        for (v, vert) in self.vertices.iter().enumerate() {
            buckets[vert.level].push(v);
        }
        buckets
    }
}

/// Builds the layered DAG for an instance under a partition and a slot
/// assignment of its clients.
pub fn build_dag(
    instance: &Instance,
    partition: &SlotPartition,
    assignment: &SlotAssignment,
    opts: &SolveOptions,
) -> Result<SlotDag, SolveError> {
    if assignment.client_count() != instance.client_count()
        || assignment.slot_count() != partition.slot_count()
    {
        return Err(SolveError::AssignmentMismatch);
    }
    let horizon = partition.horizon();
    let members_per_slot = assignment.members();

    let mut repr_slots: Vec<ReprSlot> = Vec::new();
    for (k, members) in members_per_slot.into_iter().enumerate() {
        if !members.is_empty() {
            repr_slots.push(ReprSlot {
                slot_index: k,
                members,
                window: partition.window(k),
                exact: true,
            });
        }
    }

    let repr_count = repr_slots.len();
    let client_total: usize = repr_slots.iter().map(|r| r.members.len()).sum();
    let mut vertices: Vec<DagVertex> = Vec::with_capacity(2 * client_total + 2);
    vertices.push(DagVertex {
        original: 0,
        role: VertexRole::Source,
        level: 0,
        repr_slot: None,
        window: (0.0, horizon),
    });
    let mut entry_ids: Vec<Vec<usize>> = Vec::with_capacity(repr_count);
    let mut exit_ids: Vec<Vec<usize>> = Vec::with_capacity(repr_count);
    for (r, slot) in repr_slots.iter().enumerate() {
        let entries = slot
            .members
            .iter()
            .map(|&orig| {
                vertices.push(DagVertex {
                    original: orig,
                    role: VertexRole::Entry,
                    level: 2 * r + 1,
                    repr_slot: Some(r),
                    window: slot.window,
                });
                vertices.len() - 1
            })
            .collect();
        let exits = slot
            .members
            .iter()
            .map(|&orig| {
                vertices.push(DagVertex {
                    original: orig,
                    role: VertexRole::Exit,
                    level: 2 * r + 2,
                    repr_slot: Some(r),
                    window: slot.window,
                });
                vertices.len() - 1
            })
            .collect();
        entry_ids.push(entries);
        exit_ids.push(exits);
    }
    let max_level = 2 * repr_count + 1;
    vertices.push(DagVertex {
        original: 0,
        role: VertexRole::Sink,
        level: max_level,
        repr_slot: None,
        window: (0.0, horizon),
    });
    let source = 0;
    let sink = vertices.len() - 1;

    let mut out_arcs: Vec<Vec<DagArc>> = vec![Vec::new(); vertices.len()];
    let mut oracle_calls = 0u64;
    let mut all_exact = true;

    if repr_count == 0 {
        // no clients at all: the tour is depot -> depot
        out_arcs[source].push(DagArc { to: sink, cost: 0.0 });
    } else {
        for (&entry, &orig) in entry_ids[0].iter().zip(&repr_slots[0].members) {
            out_arcs[source].push(DagArc { to: entry, cost: instance.distance(0, orig) });
        }
        for r in 0..repr_count {
            let size = repr_slots[r].members.len();
            if size == 1 {
                out_arcs[entry_ids[r][0]].push(DagArc { to: exit_ids[r][0], cost: 0.0 });
            } else {
                let members = repr_slots[r].members.clone();
                let dist = |a: usize, b: usize| instance.distance(members[a], members[b]);
                let costs = hamiltonian_all_pairs(size, &dist, opts)?;
                oracle_calls += 1;
                if !costs.exact() {
                    all_exact = false;
                    repr_slots[r].exact = false;
                }
                for (i, &entry) in entry_ids[r].iter().enumerate() {
                    for (j, &exit) in exit_ids[r].iter().enumerate() {
                        if i != j {
                            out_arcs[entry].push(DagArc { to: exit, cost: costs.cost(i, j) });
                        }
                    }
                }
            }
            if r + 1 < repr_count {
                for (&exit, &from_orig) in exit_ids[r].iter().zip(&repr_slots[r].members) {
                    for (&entry, &to_orig) in
                        entry_ids[r + 1].iter().zip(&repr_slots[r + 1].members)
                    {
                        out_arcs[exit]
                            .push(DagArc { to: entry, cost: instance.distance(from_orig, to_orig) });
                    }
                }
            }
        }
        for (&exit, &orig) in
            exit_ids[repr_count - 1].iter().zip(&repr_slots[repr_count - 1].members)
        {
            out_arcs[exit].push(DagArc { to: sink, cost: instance.distance(orig, 0) });
        }
    }

    for arcs in out_arcs.iter_mut() {
        arcs.sort_by(|a, b| a.cost.total_cmp(&b.cost).then(a.to.cmp(&b.to)));
    }

    let mut dist_min = vec![f64::INFINITY; max_level];
    for (v, arcs) in out_arcs.iter().enumerate() {
        let level = vertices[v].level;
        for arc in arcs {
            if arc.cost < dist_min[level] {
                dist_min[level] = arc.cost;
            }
        }
    }
    let mut binf_suffix = vec![0.0; max_level + 1];
    for p in (0..max_level).rev() {
        binf_suffix[p] = binf_suffix[p + 1] + dist_min[p];
    }

    Ok(SlotDag {
        vertices,
        out_arcs,
        source,
        sink,
        max_level,
        dist_min,
        binf_suffix,
        repr_slots,
        hamiltonian_exact: all_exact,
        hamiltonian_oracle_calls: oracle_calls,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;
    use crate::model::Point;

    fn square_instance() -> Instance {
        Instance::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(1.0, 0.0),
                Point::new(2.0, 0.0),
                Point::new(3.0, 0.0),
                Point::new(4.0, 0.0),
                Point::new(5.0, 0.0),
            ],
            5.0,
            100.0,
        )
        .unwrap()
    }

    #[test]
    fn two_slot_shape() {
        // slot 0 holds clients {1, 4, 5}, slot 1 holds {2, 3}
        let instance = square_instance();
        let partition = SlotPartition::identical(2, 100.0).unwrap();
        let assignment = SlotAssignment::new(vec![0, 1, 1, 0, 0], 2).unwrap();
        let dag = build_dag(&instance, &partition, &assignment, &SolveOptions::default()).unwrap();
        assert_eq!(dag.vertex_count(), 12);
        assert_eq!(dag.arc_count(), 19);
        assert_eq!(dag.max_level, 5);
        assert!(dag.hamiltonian_exact);
        assert_eq!(dag.hamiltonian_oracle_calls, 2);
        // every arc advances exactly one level
        for (v, arcs) in dag.out_arcs.iter().enumerate() {
            for arc in arcs {
                assert_eq!(dag.vertices[arc.to].level, dag.vertices[v].level + 1);
            }
        }
    }

    #[test]
    fn singleton_collapse() {
        let instance = Instance::new(
            vec![Point::new(0.0, 0.0), Point::new(3.0, 4.0)],
            5.0,
            100.0,
        )
        .unwrap();
        let partition = SlotPartition::identical(1, 100.0).unwrap();
        let assignment = SlotAssignment::new(vec![0], 1).unwrap();
        let dag = build_dag(&instance, &partition, &assignment, &SolveOptions::default()).unwrap();
        // source -> entry -> exit -> sink with a zero-cost hop in the middle
        assert_eq!(dag.vertex_count(), 4);
        assert_eq!(dag.arc_count(), 3);
        let total: f64 = dag.out_arcs.iter().flatten().map(|a| a.cost).sum();
        assert!((total - 10.0).abs() < 1e-12);
    }

    #[test]
    fn empty_slot_is_skipped() {
        let instance = Instance::new(
            vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(2.0, 0.0)],
            5.0,
            100.0,
        )
        .unwrap();
        let partition = SlotPartition::identical(3, 100.0).unwrap();
        // middle slot empty: client 1 in slot 0, client 2 in slot 2
        let assignment = SlotAssignment::new(vec![0, 2], 3).unwrap();
        let dag = build_dag(&instance, &partition, &assignment, &SolveOptions::default()).unwrap();
        assert_eq!(dag.repr_slots.len(), 2);
        assert_eq!(dag.repr_slots[0].slot_index, 0);
        assert_eq!(dag.repr_slots[1].slot_index, 2);
        // exit of the first represented slot connects straight to the
        // entries of the next one
        let exit = dag
            .vertices
            .iter()
            .position(|v| v.role == VertexRole::Exit && v.repr_slot == Some(0))
            .unwrap();
        assert!(dag.out_arcs[exit]
            .iter()
            .all(|a| dag.vertices[a.to].repr_slot == Some(1)));
    }

    #[test]
    fn no_clients_edge_case() {
        let instance = Instance::new(vec![Point::new(1.0, 1.0)], 5.0, 10.0).unwrap();
        let partition = SlotPartition::identical(2, 10.0).unwrap();
        let assignment = SlotAssignment::new(vec![], 2).unwrap();
        let dag = build_dag(&instance, &partition, &assignment, &SolveOptions::default()).unwrap();
        assert_eq!(dag.vertex_count(), 2);
        assert_eq!(dag.arc_count(), 1);
    }

    #[test]
    fn mismatched_inputs_rejected() {
        let instance = square_instance();
        let partition = SlotPartition::identical(2, 100.0).unwrap();
        let wrong_clients = SlotAssignment::new(vec![0, 1], 2).unwrap();
        assert!(matches!(
            build_dag(&instance, &partition, &wrong_clients, &SolveOptions::default()),
            Err(SolveError::AssignmentMismatch)
        ));
        let wrong_slots = SlotAssignment::new(vec![0; 5], 3).unwrap();
        assert!(matches!(
            build_dag(&instance, &partition, &wrong_slots, &SolveOptions::default()),
            Err(SolveError::AssignmentMismatch)
        ));
    }
}
