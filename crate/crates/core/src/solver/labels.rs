//! Label-setting shortest path over the slot DAG.
//!
//! A label is a partial path: travel cost so far (waiting excluded), the
//! clock on arrival at its last vertex, and an optimistic completion bound
//! `binf` = cost + sum of the cheapest arc per remaining level. Extensions
//! that arrive after a vertex's window close are dropped; arrivals before
//! the window open wait, which costs nothing. Labels whose bound exceeds
//! the incumbent (seeded by a greedy walk) are pruned; labels no better in
//! both cost and arrival time than a sibling at the same vertex are
//! dominated. Vertices are processed level by level, so every label is
//! final before it extends.

use alloc::vec;
use alloc::vec::Vec;

use super::dag::SlotDag;
use super::hamiltonian::{hamiltonian_path, heuristic_hamiltonian_order};
use super::{SolveOptions, SolveResult, SolveStats, SolveStatus};
use crate::model::Instance;

#[derive(Debug, Clone, Copy)]
struct Label {
    path_length: f64,
    arrive_time: f64,
    pred: Option<(usize, usize)>, // (vertex, label index at that vertex)
}

/// Cost of a time-feasible source-to-sink walk that always takes the
/// cheapest feasible outgoing arc; `None` when the walk dead-ends. Serves
/// as the initial incumbent for pruning.
pub fn greedy_path(dag: &SlotDag) -> Option<f64> {
    let mut vertex = dag.source;
    let mut clock = 0.0f64;
    let mut cost = 0.0f64;
    while vertex != dag.sink {
        // arcs are sorted by (cost, target), so the first feasible one is
        // the cheapest
        let next = dag.out_arcs[vertex].iter().find_map(|arc| {
            let (open, close) = dag.vertices[arc.to].window;
            let arrival = (clock + arc.cost).max(open);
            (arrival <= close).then_some((arc.to, arc.cost, arrival))
        })?;
        vertex = next.0;
        cost += next.1;
        clock = next.2;
    }
    Some(cost)
}

/// Runs the label search to optimality.
pub fn solve(dag: &SlotDag, instance: &Instance, opts: &SolveOptions) -> SolveResult {
    solve_with_stop(dag, instance, opts, || false)
}

/// Same as [`solve`] but polls `stop` between label expansions; when it
/// returns true the search aborts with [`SolveStatus::TimedOut`].
pub fn solve_with_stop(
    dag: &SlotDag,
    instance: &Instance,
    opts: &SolveOptions,
    mut stop: impl FnMut() -> bool,
) -> SolveResult {
    let mut stats = SolveStats {
        hamiltonian_oracle_calls: dag.hamiltonian_oracle_calls,
        hamiltonian_exact: dag.hamiltonian_exact,
        ..SolveStats::default()
    };

    let mut bks = greedy_path(dag).unwrap_or(f64::INFINITY);
    let mut labels: Vec<Vec<Label>> = vec![Vec::new(); dag.vertex_count()];
    labels[dag.source].push(Label { path_length: 0.0, arrive_time: 0.0, pred: None });
    stats.labels_created += 1;

    let buckets = dag.level_buckets();
    for bucket in buckets.iter().take(dag.max_level) {
        for &vertex in bucket {
            // processing in level order makes the list final; fix the
            // expansion order before successors record indices into it
            labels[vertex].sort_by(|a, b| {
                a.path_length
                    .total_cmp(&b.path_length)
                    .then(a.arrive_time.total_cmp(&b.arrive_time))
            });
            for li in 0..labels[vertex].len() {
                let label = labels[vertex][li];
                if stop() {
                    return SolveResult {
                        status: SolveStatus::TimedOut,
                        cost: None,
                        order: Vec::new(),
                        arrive_times: Vec::new(),
                        stats,
                    };
                }
                for arc in &dag.out_arcs[vertex] {
                    let (open, close) = dag.vertices[arc.to].window;
                    let arrival = (label.arrive_time + arc.cost).max(open);
                    if arrival > close {
                        continue;
                    }
                    let path_length = label.path_length + arc.cost;
                    let binf = path_length + dag.binf_suffix[dag.vertices[arc.to].level];
                    stats.labels_created += 1;
                    // margin absorbs summation-order jitter between the
                    // bound and the incumbent, which may be the same tour
                    if !opts.disable_binf && binf > bks + 1e-9 * (1.0 + bks.abs()) {
                        stats.labels_pruned_by_bound += 1;
                        continue;
                    }
                    let candidate =
                        Label { path_length, arrive_time: arrival, pred: Some((vertex, li)) };
                    if !opts.disable_dominance {
                        // each list is a Pareto frontier: cost strictly
                        // increasing, arrival strictly decreasing
                        let list = &mut labels[arc.to];
                        let pos = list.partition_point(|l| {
                            l.path_length < candidate.path_length
                                || (l.path_length == candidate.path_length
                                    && l.arrive_time <= candidate.arrive_time)
                        });
                        // the element just before carries the smallest
                        // arrival among labels costing no more
                        if pos > 0 && list[pos - 1].arrive_time <= candidate.arrive_time {
                            stats.labels_dominated += 1;
                            continue;
                        }
                        let mut end = pos;
                        while end < list.len()
                            && list[end].arrive_time >= candidate.arrive_time
                        {
                            end += 1;
                        }
                        stats.labels_dominated += (end - pos) as u64;
                        list.splice(pos..end, core::iter::once(candidate));
                        if arc.to == dag.sink && path_length < bks {
                            bks = path_length;
                        }
                        continue;
                    }
                    if arc.to == dag.sink && path_length < bks {
                        bks = path_length;
                    }
                    labels[arc.to].push(candidate);
                }
            }
        }
    }

    let best = labels[dag.sink]
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| {
            a.path_length
                .total_cmp(&b.path_length)
                .then(a.arrive_time.total_cmp(&b.arrive_time))
        })
        .map(|(i, _)| i);
    let Some(best) = best else {
        return SolveResult::infeasible(stats);
    };

    let (order, arrive_times, cost) = reconstruct(dag, instance, &labels, best);
    SolveResult { status: SolveStatus::Optimal, cost: Some(cost), order, arrive_times, stats }
}

/// Expands the winning label chain back into a client visit order, then
/// replays the tour clock to recover per-client service start times.
fn reconstruct(
    dag: &SlotDag,
    instance: &Instance,
    labels: &[Vec<Label>],
    sink_label: usize,
) -> (Vec<usize>, Vec<f64>, f64) {
    let mut chain = Vec::new();
    let mut cursor = Some((dag.sink, sink_label));
    while let Some((vertex, li)) = cursor {
        chain.push(vertex);
        cursor = labels[vertex][li].pred;
    }
    chain.reverse();
    let cost = labels[dag.sink][sink_label].path_length;

    // chain = source, (entry, exit) per represented slot, sink
    let mut order: Vec<usize> = Vec::with_capacity(instance.client_count());
    let mut i = 1;
    while i + 1 < chain.len() {
        let entry = &dag.vertices[chain[i]];
        let exit = &dag.vertices[chain[i + 1]];
        let r = entry.repr_slot.expect("interior chain vertices belong to a slot");
        debug_assert_eq!(exit.repr_slot, Some(r));
        let slot = &dag.repr_slots[r];
        if slot.members.len() == 1 {
            order.push(slot.members[0]);
        } else {
            let local = |orig: usize| slot.members.iter().position(|&m| m == orig).unwrap();
            let dist = |a: usize, b: usize| instance.distance(slot.members[a], slot.members[b]);
            let locals = if slot.exact {
                hamiltonian_path(slot.members.len(), &dist, local(entry.original), local(exit.original)).1
            } else {
                heuristic_hamiltonian_order(
                    slot.members.len(),
                    &dist,
                    local(entry.original),
                    local(exit.original),
                )
            };
            order.extend(locals.into_iter().map(|l| slot.members[l]));
        }
        i += 2;
    }

    let mut arrive_times = Vec::with_capacity(order.len());
    let mut clock = 0.0f64;
    let mut travelled = 0.0f64;
    let mut prev = 0usize;
    let slot_open_of = |orig: usize| {
        dag.repr_slots
            .iter()
            .find(|s| s.members.contains(&orig))
            .map(|s| s.window.0)
            .unwrap_or(0.0)
    };
    for &client in &order {
        let d = instance.distance(prev, client);
        travelled += d;
        clock = (clock + d).max(slot_open_of(client));
        arrive_times.push(clock);
        prev = client;
    }
    travelled += instance.distance(prev, 0);
    debug_assert!(
        (travelled - cost).abs() <= 1e-6 * cost.max(1.0),
        "replayed travel cost diverged from the label cost"
    );
    (order, arrive_times, cost)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use alloc::vec::Vec;
    use crate::model::{Point, SlotAssignment, SlotPartition};
    use crate::solver::build_dag;

    fn solve_instance(
        points: Vec<Point>,
        side: f64,
        bounds: &[f64],
        horizon: f64,
        slots: Vec<usize>,
    ) -> SolveResult {
        let instance = Instance::new(points, side, horizon).unwrap();
        let partition = SlotPartition::new(bounds, horizon).unwrap();
        let assignment = SlotAssignment::new(slots, partition.slot_count()).unwrap();
        let dag = build_dag(&instance, &partition, &assignment, &SolveOptions::default()).unwrap();
        solve(&dag, &instance, &SolveOptions::default())
    }

    #[test]
    fn single_slot_square_tour() {
        let res = solve_instance(
            vec![
                Point::new(0.0, 0.0),
                Point::new(0.0, 1.0),
                Point::new(1.0, 1.0),
                Point::new(1.0, 0.0),
            ],
            1.0,
            &[0.0, 10.0],
            10.0,
            vec![0, 0, 0],
        );
        assert_eq!(res.status, SolveStatus::Optimal);
        assert!((res.cost.unwrap() - 4.0).abs() < 1e-9);
        assert_eq!(res.order.len(), 3);
    }

    #[test]
    fn waiting_at_slot_boundary() {
        let res = solve_instance(
            vec![Point::new(0.0, 0.0), Point::new(1.0, 0.0), Point::new(2.0, 0.0)],
            2.0,
            &[0.0, 3.0, 10.0],
            10.0,
            vec![0, 1],
        );
        assert_eq!(res.status, SolveStatus::Optimal);
        // waiting for the second slot to open is free
        assert!((res.cost.unwrap() - 4.0).abs() < 1e-9);
        assert_eq!(res.order, vec![1, 2]);
        assert!((res.arrive_times[0] - 1.0).abs() < 1e-9);
        assert!((res.arrive_times[1] - 3.0).abs() < 1e-9);
    }

    #[test]
    fn unreachable_slot_is_infeasible() {
        let res = solve_instance(
            vec![Point::new(0.0, 0.0), Point::new(5.0, 0.0)],
            5.0,
            &[0.0, 3.0, 10.0],
            10.0,
            vec![0],
        );
        assert_eq!(res.status, SolveStatus::Infeasible);
        assert_eq!(res.cost, None);
    }

    #[test]
    fn return_leg_respects_horizon() {
        // the client is reachable but the way back crosses the horizon
        let res = solve_instance(
            vec![Point::new(0.0, 0.0), Point::new(5.0, 0.0)],
            5.0,
            &[0.0, 9.0],
            9.0,
            vec![0],
        );
        assert_eq!(res.status, SolveStatus::Infeasible);

        let res = solve_instance(
            vec![Point::new(0.0, 0.0), Point::new(5.0, 0.0)],
            5.0,
            &[0.0, 10.0],
            10.0,
            vec![0],
        );
        assert_eq!(res.status, SolveStatus::Optimal);
        assert!((res.cost.unwrap() - 10.0).abs() < 1e-9);
    }

    #[test]
    fn greedy_dead_end_still_solves() {
        // the cheap first arc leads into a second slot that closes too
        // early; the greedy walk dies there but the search recovers
        let points = vec![
            Point::new(0.0, 0.0),
            Point::new(0.5, 0.0),
            Point::new(0.0, 0.6),
            Point::new(2.0, 0.0),
        ];
        let instance = Instance::new(points, 2.0, 5.0).unwrap();
        let partition = SlotPartition::new(&[0.0, 1.4, 3.0, 5.0], 5.0).unwrap();
        let assignment = SlotAssignment::new(vec![0, 0, 1], 3).unwrap();
        let dag = build_dag(&instance, &partition, &assignment, &SolveOptions::default()).unwrap();
        assert_eq!(greedy_path(&dag), None);
        let res = solve(&dag, &instance, &SolveOptions::default());
        assert_eq!(res.status, SolveStatus::Optimal);
        let expected = 0.6 + euclid(0.5, -0.6) + euclid(1.5, 0.0) + 2.0;
        assert!((res.cost.unwrap() - expected).abs() < 1e-9);
        assert_eq!(res.order, vec![2, 1, 3]);
    }

    fn euclid(dx: f64, dy: f64) -> f64 {
        libm::sqrt(dx * dx + dy * dy)
    }

    #[test]
    fn greedy_upper_bounds_optimum() {
        let points = vec![
            Point::new(0.0, 0.0),
            Point::new(0.3, 0.8),
            Point::new(0.9, 0.1),
            Point::new(0.5, 0.5),
            Point::new(0.1, 0.9),
        ];
        let instance = Instance::new(points, 1.0, 50.0).unwrap();
        let partition = SlotPartition::identical(2, 50.0).unwrap();
        let assignment = SlotAssignment::new(vec![0, 0, 1, 1], 2).unwrap();
        let dag = build_dag(&instance, &partition, &assignment, &SolveOptions::default()).unwrap();
        let greedy = greedy_path(&dag).unwrap();
        let res = solve(&dag, &instance, &SolveOptions::default());
        assert!(greedy >= res.cost.unwrap() - 1e-12);
    }

    #[test]
    fn no_client_tour_costs_nothing() {
        let instance = Instance::new(vec![Point::new(1.0, 1.0)], 5.0, 10.0).unwrap();
        let partition = SlotPartition::identical(1, 10.0).unwrap();
        let assignment = SlotAssignment::new(vec![], 1).unwrap();
        let dag = build_dag(&instance, &partition, &assignment, &SolveOptions::default()).unwrap();
        let res = solve(&dag, &instance, &SolveOptions::default());
        assert_eq!(res.status, SolveStatus::Optimal);
        assert_eq!(res.cost, Some(0.0));
        assert!(res.order.is_empty());
    }

    #[test]
    fn timeout_status() {
        let points: Vec<Point> =
            (0..9).map(|i| Point::new(i as f64, (i * i % 7) as f64)).collect();
        let instance = Instance::new(points, 8.0, 1000.0).unwrap();
        let partition = SlotPartition::identical(2, 1000.0).unwrap();
        let assignment = SlotAssignment::new(vec![0, 0, 0, 0, 1, 1, 1, 1], 2).unwrap();
        let dag = build_dag(&instance, &partition, &assignment, &SolveOptions::default()).unwrap();
        let res = solve_with_stop(&dag, &instance, &SolveOptions::default(), || true);
        assert_eq!(res.status, SolveStatus::TimedOut);
    }

    #[test]
    fn binf_suffix_is_a_valid_completion_bound() {
        use rand_core::{RngCore, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
        for _ in 0..50 {
            let clients = 2 + (rng.next_u64() % 6) as usize;
            let mut points = vec![Point::new(0.0, 0.0)];
            for _ in 0..clients {
                points.push(Point::new(
                    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 10.0,
                    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 10.0,
                ));
            }
            let instance = Instance::new(points, 10.0, 1000.0).unwrap();
            let m = 1 + (rng.next_u64() % 3) as usize;
            let partition = SlotPartition::identical(m, 1000.0).unwrap();
            let slots: Vec<usize> = (0..clients).map(|_| (rng.next_u64() % m as u64) as usize).collect();
            let assignment = SlotAssignment::new(slots, m).unwrap();
            let dag =
                build_dag(&instance, &partition, &assignment, &SolveOptions::default()).unwrap();
            // cheapest completion per vertex by backward DP, ignoring time
            let mut completion = vec![f64::INFINITY; dag.vertex_count()];
            completion[dag.sink] = 0.0;
            for bucket in dag.level_buckets().iter().rev() {
                for &v in bucket {
                    for arc in &dag.out_arcs[v] {
                        let cand = arc.cost + completion[arc.to];
                        if cand < completion[v] {
                            completion[v] = cand;
                        }
                    }
                }
            }
            for (v, vert) in dag.vertices.iter().enumerate() {
                if completion[v].is_finite() {
                    assert!(dag.binf_suffix[vert.level] <= completion[v] + 1e-9);
                }
            }
        }
    }
}
