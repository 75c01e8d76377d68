//! JSON interchange formats.
//!
//! Instance schema (slot indices are 1-based on the wire, 0-based in the
//! core API):
//!
//! ```json
//! {
//!   "side_a": 50.0,
//!   "horizon_h": 1060.66,
//!   "points": [[x, y], ...],
//!   "slot_bounds": [0.0, ..., 1060.66],
//!   "slot_assignment": [k_1, ..., k_{n-1}],
//!   "time_windows": [[b, f], ...]
//! }
//! ```
//!
//! `slot_bounds` + `slot_assignment` travel together; either that pair or
//! `time_windows` may be present, never both. A bare instance (neither) is
//! treated by consumers as one slot spanning the horizon.

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use tspts_core::model::{Instance, Point, SlotAssignment, SlotPartition, TimeWindowSet};
use tspts_core::solver::{SolveResult, SolveStats, SolveStatus};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct InstanceJson {
    pub side_a: f64,
    pub horizon_h: f64,
    pub points: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slot_bounds: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slot_assignment: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_windows: Option<Vec<[f64; 2]>>,
}

/// A decoded instance with whichever temporal structure the file carried.
#[derive(Debug, Clone)]
pub struct LoadedInstance {
    pub instance: Instance,
    pub kind: TemporalStructure,
}

#[derive(Debug, Clone)]
pub enum TemporalStructure {
    Slotted { partition: SlotPartition, assignment: SlotAssignment },
    Windowed { windows: TimeWindowSet },
    Bare,
}

impl LoadedInstance {
    /// The partition/assignment pair to solve with; a bare instance gets
    /// one slot holding every client.
    pub fn slotted(&self) -> Result<(SlotPartition, SlotAssignment)> {
        match &self.kind {
            TemporalStructure::Slotted { partition, assignment } => {
                Ok((partition.clone(), assignment.clone()))
            }
            TemporalStructure::Bare => {
                let partition = SlotPartition::identical(1, self.instance.horizon())?;
                let assignment = SlotAssignment::new(vec![0; self.instance.client_count()], 1)?;
                Ok((partition, assignment))
            }
            TemporalStructure::Windowed { .. } => {
                bail!("instance carries time windows; reduce it with `induce` first")
            }
        }
    }
}

pub fn decode_instance(json: &InstanceJson) -> Result<LoadedInstance> {
    let points: Vec<Point> = json.points.iter().map(|&[x, y]| Point::new(x, y)).collect();
    let instance = Instance::new(points, json.side_a, json.horizon_h)
        .context("invalid instance geometry")?;

    let has_bounds = json.slot_bounds.is_some();
    let has_assignment = json.slot_assignment.is_some();
    let has_windows = json.time_windows.is_some();
    if has_bounds != has_assignment {
        bail!("slot_bounds and slot_assignment must be present together");
    }
    if has_bounds && has_windows {
        bail!("slot_bounds/slot_assignment and time_windows are mutually exclusive");
    }

    let kind = if has_bounds {
        let partition = SlotPartition::new(json.slot_bounds.as_ref().unwrap(), json.horizon_h)
            .context("invalid slot bounds")?;
        let raw = json.slot_assignment.as_ref().unwrap();
        if raw.len() != instance.client_count() {
            bail!("slot_assignment must list one slot per client");
        }
        let zero_based: Vec<usize> = raw
            .iter()
            .map(|&k| {
                if k >= 1 && k <= partition.slot_count() {
                    Ok(k - 1)
                } else {
                    Err(anyhow::anyhow!("slot index {k} outside 1..={}", partition.slot_count()))
                }
            })
            .collect::<Result<_>>()?;
        let assignment = SlotAssignment::new(zero_based, partition.slot_count())?;
        TemporalStructure::Slotted { partition, assignment }
    } else if has_windows {
        let windows: Vec<(f64, f64)> =
            json.time_windows.as_ref().unwrap().iter().map(|&[b, f]| (b, f)).collect();
        TemporalStructure::Windowed {
            windows: TimeWindowSet::new(windows, json.horizon_h).context("invalid time window")?,
        }
    } else {
        TemporalStructure::Bare
    };
    Ok(LoadedInstance { instance, kind })
}

pub fn encode_instance(
    instance: &Instance,
    partition: Option<&SlotPartition>,
    assignment: Option<&SlotAssignment>,
    windows: Option<&TimeWindowSet>,
) -> InstanceJson {
    InstanceJson {
        side_a: instance.side(),
        horizon_h: instance.horizon(),
        points: instance.points().iter().map(|p| [p.x, p.y]).collect(),
        slot_bounds: partition.map(|p| p.bounds().to_vec()),
        slot_assignment: assignment
            .map(|a| a.slot_of_client().iter().map(|&k| k + 1).collect()),
        time_windows: windows.map(|tw| tw.windows().iter().map(|&(b, f)| [b, f]).collect()),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveStatsJson {
    pub labels_created: u64,
    pub labels_dominated: u64,
    pub labels_pruned_by_bound: u64,
    pub hamiltonian_oracle_calls: u64,
    pub hamiltonian_exact: bool,
    pub wall_time_s: f64,
}

impl From<&SolveStats> for SolveStatsJson {
    fn from(s: &SolveStats) -> Self {
        SolveStatsJson {
            labels_created: s.labels_created,
            labels_dominated: s.labels_dominated,
            labels_pruned_by_bound: s.labels_pruned_by_bound,
            hamiltonian_oracle_calls: s.hamiltonian_oracle_calls,
            hamiltonian_exact: s.hamiltonian_exact,
            wall_time_s: s.wall_time.as_secs_f64(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolutionJson {
    pub status: String,
    pub cost: Option<f64>,
    pub order: Vec<usize>,
    pub arrive_times: Vec<f64>,
    pub stats: SolveStatsJson,
}

pub fn status_str(status: SolveStatus) -> &'static str {
    match status {
        SolveStatus::Optimal => "optimal",
        SolveStatus::Infeasible => "infeasible",
        SolveStatus::TimedOut => "timed_out",
    }
}

pub fn encode_solution(result: &SolveResult) -> SolutionJson {
    SolutionJson {
        status: status_str(result.status).to_string(),
        cost: result.cost,
        order: result.order.clone(),
        arrive_times: result.arrive_times.clone(),
        stats: (&result.stats).into(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_json() -> InstanceJson {
        InstanceJson {
            side_a: 10.0,
            horizon_h: 100.0,
            points: vec![[1.0, 1.0], [2.0, 3.0], [9.0, 9.0]],
            slot_bounds: Some(vec![0.0, 50.0, 100.0]),
            slot_assignment: Some(vec![1, 2]),
            time_windows: None,
        }
    }

    #[test]
    fn roundtrip_slotted() {
        let loaded = decode_instance(&sample_json()).unwrap();
        let (partition, assignment) = loaded.slotted().unwrap();
        assert_eq!(partition.slot_count(), 2);
        assert_eq!(assignment.slot_of_client(), &[0, 1]);
        let back = encode_instance(&loaded.instance, Some(&partition), Some(&assignment), None);
        assert_eq!(back.slot_assignment, Some(vec![1, 2]));
        let text = serde_json::to_string(&back).unwrap();
        let reparsed: InstanceJson = serde_json::from_str(&text).unwrap();
        assert_eq!(reparsed.points, back.points);
    }

    #[test]
    fn exclusivity_rules() {
        let mut j = sample_json();
        j.time_windows = Some(vec![[0.0, 50.0], [10.0, 90.0]]);
        assert!(decode_instance(&j).is_err());

        let mut j = sample_json();
        j.slot_assignment = None;
        assert!(decode_instance(&j).is_err());

        let mut j = sample_json();
        j.slot_bounds = None;
        j.slot_assignment = None;
        j.time_windows = None;
        let loaded = decode_instance(&j).unwrap();
        let (partition, assignment) = loaded.slotted().unwrap();
        assert_eq!(partition.slot_count(), 1);
        assert_eq!(assignment.counts(), &[2]);
    }

    #[test]
    fn one_based_indices_on_the_wire() {
        let mut j = sample_json();
        j.slot_assignment = Some(vec![0, 1]);
        assert!(decode_instance(&j).is_err(), "0 is not a valid wire slot index");
        j.slot_assignment = Some(vec![1, 3]);
        assert!(decode_instance(&j).is_err());
    }
}
