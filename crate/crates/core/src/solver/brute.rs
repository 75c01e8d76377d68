//! Permutation-enumeration oracle: simulates every client order under the
//! same waiting and window semantics as the label search. Independent of
//! the DAG machinery, which is the point of keeping it.

use alloc::vec::Vec;

use super::{SolveError, SolveResult, SolveStats, SolveStatus};
use crate::model::{Instance, SlotAssignment, SlotPartition};

const MAX_BRUTE_CLIENTS: usize = 10;

/// Exact optimum by enumerating all client permutations. Semantics match
/// `solve`: service within the client's slot window (closed bounds),
/// waiting on early arrival allowed and costless, return to the depot by
/// the horizon, objective is travel only.
pub fn brute_force_solve(
    instance: &Instance,
    partition: &SlotPartition,
    assignment: &SlotAssignment,
) -> Result<SolveResult, SolveError> {
    let clients = instance.client_count();
    if clients > MAX_BRUTE_CLIENTS {
        return Err(SolveError::TooManyClients { clients });
    }
    if assignment.client_count() != clients || assignment.slot_count() != partition.slot_count() {
        return Err(SolveError::AssignmentMismatch);
    }
    let horizon = partition.horizon();
    let windows: Vec<(f64, f64)> = (0..partition.slot_count()).map(|k| partition.window(k)).collect();

    let mut best_cost = f64::INFINITY;
    let mut best_order: Vec<usize> = Vec::new();
    let mut best_times: Vec<f64> = Vec::new();

    let mut perm: Vec<usize> = (1..=clients).collect();
    let mut times = Vec::with_capacity(clients);
    permute(&mut perm, 0, &mut |order: &[usize]| {
        times.clear();
        let mut clock = 0.0f64;
        let mut cost = 0.0f64;
        let mut prev = 0usize;
        for &client in order {
            let (open, close) = windows[assignment.slot_of_client()[client - 1]];
            let leg = instance.distance(prev, client);
            let arrival = (clock + leg).max(open);
            if arrival > close {
                return;
            }
            cost += leg;
            clock = arrival;
            times.push(arrival);
            prev = client;
        }
        let back = instance.distance(prev, 0);
        if clock + back > horizon {
            return;
        }
        cost += back;
        if cost < best_cost {
            best_cost = cost;
            best_order = order.to_vec();
            best_times = times.clone();
        }
    });

    if best_cost.is_finite() {
        Ok(SolveResult {
            status: SolveStatus::Optimal,
            cost: Some(best_cost),
            order: best_order,
            arrive_times: best_times,
            stats: SolveStats { hamiltonian_exact: true, ..SolveStats::default() },
        })
    } else {
        Ok(SolveResult::infeasible(SolveStats {
            hamiltonian_exact: true,
            ..SolveStats::default()
        }))
    }
}

fn permute(items: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;
    use crate::model::Point;
    use crate::solver::{build_dag, solve, SolveOptions};
    use rand_core::{RngCore, SeedableRng};

    #[test]
    fn mirrors_the_label_search_examples() {
        let instance = Instance::new(
            vec![
                Point::new(0.0, 0.0),
                Point::new(0.0, 1.0),
                Point::new(1.0, 1.0),
                Point::new(1.0, 0.0),
            ],
            1.0,
            10.0,
        )
        .unwrap();
        let partition = SlotPartition::identical(1, 10.0).unwrap();
        let assignment = SlotAssignment::new(vec![0, 0, 0], 1).unwrap();
        let res = brute_force_solve(&instance, &partition, &assignment).unwrap();
        assert_eq!(res.status, SolveStatus::Optimal);
        assert!((res.cost.unwrap() - 4.0).abs() < 1e-12);

        let instance = Instance::new(
            vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(2.0, 0.0)],
            2.0,
            10.0,
        )
        .unwrap();
        let partition = SlotPartition::new(&[0.0, 3.0, 10.0], 10.0).unwrap();
        let assignment = SlotAssignment::new(vec![0, 1], 2).unwrap();
        let res = brute_force_solve(&instance, &partition, &assignment).unwrap();
        assert!((res.cost.unwrap() - 4.0).abs() < 1e-12);
        assert_eq!(res.arrive_times, vec![1.0, 3.0]);

        let instance =
            Instance::new(vec![Point::new(0.0, 0.0), Point::new(5.0, 0.0)], 5.0, 10.0).unwrap();
        let partition = SlotPartition::new(&[0.0, 3.0, 10.0], 10.0).unwrap();
        let assignment = SlotAssignment::new(vec![0], 2).unwrap();
        let res = brute_force_solve(&instance, &partition, &assignment).unwrap();
        assert_eq!(res.status, SolveStatus::Infeasible);
    }

    #[test]
    fn zero_clients_and_size_cap() {
        let instance = Instance::new(vec![Point::new(0.5, 0.5)], 1.0, 10.0).unwrap();
        let partition = SlotPartition::identical(1, 10.0).unwrap();
        let assignment = SlotAssignment::new(vec![], 1).unwrap();
        let res = brute_force_solve(&instance, &partition, &assignment).unwrap();
        assert_eq!(res.cost, Some(0.0));

        let points: Vec<Point> = (0..12).map(|i| Point::new(i as f64 / 12.0, 0.0)).collect();
        let instance = Instance::new(points, 1.0, 10.0).unwrap();
        let assignment = SlotAssignment::new(vec![0; 11], 1).unwrap();
        assert!(matches!(
            brute_force_solve(&instance, &partition, &assignment),
            Err(SolveError::TooManyClients { clients: 11 })
        ));
    }

    #[test]
    fn slot_order_violations_never_win() {
        // second-slot client placed close to the depot: any permutation
        // serving it first fails its window and is rejected in simulation
        let instance = Instance::new(
            vec![Point::new(0.0, 0.0), Point::new(0.1, 0.0), Point::new(3.0, 0.0)],
            3.0,
            20.0,
        )
        .unwrap();
        let partition = SlotPartition::new(&[0.0, 10.0, 20.0], 20.0).unwrap();
        let assignment = SlotAssignment::new(vec![1, 0], 2).unwrap();
        let res = brute_force_solve(&instance, &partition, &assignment).unwrap();
        assert_eq!(res.status, SolveStatus::Optimal);
        // must visit client 2 (slot 0) first despite client 1 being nearer
        assert_eq!(res.order, vec![2, 1]);
    }

    #[test]
    fn agrees_with_label_search_on_random_instances() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(43);
        let mut unif = |hi: f64| (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * hi;
        for _ in 0..200 {
            let clients = 2 + (unif(7.0) as usize);
            let side = 10.0;
            let mut points = alloc::vec![Point::new(unif(side), unif(side))];
            for _ in 0..clients {
                points.push(Point::new(unif(side), unif(side)));
            }
            // horizons span tight to loose so both statuses appear
            let horizon = 5.0 + unif(80.0);
            let m = 1 + (unif(3.0) as usize);
            let instance = Instance::new(points, side, horizon).unwrap();
            let partition = SlotPartition::identical(m, horizon).unwrap();
            let slots: Vec<usize> = (0..clients).map(|_| unif(m as f64) as usize).collect();
            let assignment = SlotAssignment::new(slots, m).unwrap();
            let brute = brute_force_solve(&instance, &partition, &assignment).unwrap();
            let dag = build_dag(&instance, &partition, &assignment, &SolveOptions::default())
                .unwrap();
            let fast = solve(&dag, &instance, &SolveOptions::default());
            assert_eq!(brute.status, fast.status);
            if let (Some(b), Some(f)) = (brute.cost, fast.cost) {
                assert!((b - f).abs() <= 1e-9 * b.max(1.0), "brute {b} vs dag {f}");
            }
        }
    }
}
