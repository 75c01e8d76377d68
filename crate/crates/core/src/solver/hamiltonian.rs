//! Optimal Hamiltonian-path costs inside a slot, for every ordered
//! (start, end) pair at once, plus a nearest-neighbour + 2-opt fallback
//! for slots too large for the exact bitmask DP.

use alloc::vec;
use alloc::vec::Vec;

use super::{SolveError, SolveOptions};

/// All-pairs Hamiltonian-path costs over the points of one slot, indexed
/// by local point indices.
#[derive(Debug, Clone)]
pub struct HamiltonianCosts {
    size: usize,
    costs: Vec<f64>,
    exact: bool,
}

impl HamiltonianCosts {
    /// Cost of the optimal (or heuristic) path from `start` to `end`
    /// visiting every point of the slot.
    pub fn cost(&self, start: usize, end: usize) -> f64 {
        self.costs[start * self.size + end]
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn exact(&self) -> bool {
        self.exact
    }
}

/// Computes the full (start, end) cost matrix for a slot of `size` points
/// with distances given by `dist` over local indices. Slots up to
/// `opts.exact_threshold` use a bitmask DP; beyond that either the
/// heuristic fallback kicks in or construction fails, per the options.
pub fn hamiltonian_all_pairs(
    size: usize,
    dist: &dyn Fn(usize, usize) -> f64,
    opts: &SolveOptions,
) -> Result<HamiltonianCosts, SolveError> {
    assert!(size >= 1, "a slot holds at least one point");
    if size == 1 {
        return Ok(HamiltonianCosts { size: 1, costs: vec![0.0], exact: true });
    }
    let use_exact = !opts.force_heuristic && size <= opts.exact_threshold;
    if !use_exact && !opts.force_heuristic && !opts.heuristic_fallback {
        return Err(SolveError::SlotTooLarge { size, threshold: opts.exact_threshold });
    }
    let mut costs = vec![f64::INFINITY; size * size];
    if use_exact {
        let matrix = distance_matrix(size, dist);
        let full = (1usize << size) - 1;
        let mut dp = vec![f64::INFINITY; (full + 1) * size];
        for start in 0..size {
            exact_dp(size, &matrix, start, &mut dp, None);
            for end in 0..size {
                if end != start {
                    costs[start * size + end] = dp[full * size + end];
                }
            }
        }
    } else {
        let matrix = distance_matrix(size, dist);
        let lookup = |a: usize, b: usize| matrix[a * size + b];
        for start in 0..size {
            for end in 0..size {
                if end != start {
                    costs[start * size + end] = heuristic_hamiltonian(size, &lookup, start, end);
                }
            }
        }
    }
    Ok(HamiltonianCosts { size, costs, exact: use_exact })
}

/// Distances evaluated once into a flat matrix; the DP inner loop must
/// not call back into the oracle.
fn distance_matrix(size: usize, dist: &dyn Fn(usize, usize) -> f64) -> Vec<f64> {
    let mut matrix = vec![0.0; size * size];
    for a in 0..size {
        for b in 0..size {
            if a != b {
                matrix[a * size + b] = dist(a, b);
            }
        }
    }
    matrix
}

/// Runs the DP for one fixed start; `dp[mask * size + last]` is the cost
/// of the cheapest path from `start` visiting exactly `mask`, ending at
/// `last`. Optionally records predecessors for path reconstruction.
fn exact_dp(
    size: usize,
    matrix: &[f64],
    start: usize,
    dp: &mut [f64],
    mut parents: Option<&mut [u8]>,
) {
    let full = (1usize << size) - 1;
    for v in dp.iter_mut() {
        *v = f64::INFINITY;
    }
    dp[(1 << start) * size + start] = 0.0;
    for mask in (1 << start)..=full {
        if mask & (1 << start) == 0 {
            continue;
        }
        let mut rest = mask;
        while rest != 0 {
            let last = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            let cur = dp[mask * size + last];
            if !cur.is_finite() {
                continue;
            }
            let row = &matrix[last * size..(last + 1) * size];
            let mut free = !mask & full;
            while free != 0 {
                let next = free.trailing_zeros() as usize;
                free &= free - 1;
                let cand = cur + row[next];
                let idx = (mask | (1 << next)) * size + next;
                if cand < dp[idx] {
                    dp[idx] = cand;
                    if let Some(p) = parents.as_deref_mut() {
                        p[idx] = last as u8;
                    }
                }
            }
        }
    }
}

/// Exact optimal Hamiltonian path from `start` to `end` with its visit
/// order (local indices). Used to reconstruct tours after the search.
pub fn hamiltonian_path(
    size: usize,
    dist: &dyn Fn(usize, usize) -> f64,
    start: usize,
    end: usize,
) -> (f64, Vec<usize>) {
    assert!(start != end || size == 1);
    if size == 1 {
        return (0.0, vec![start]);
    }
    let matrix = distance_matrix(size, dist);
    let full = (1usize << size) - 1;
    let mut dp = vec![f64::INFINITY; (full + 1) * size];
    let mut parents = vec![u8::MAX; (full + 1) * size];
    exact_dp(size, &matrix, start, &mut dp, Some(&mut parents));
    let cost = dp[full * size + end];
    let mut order = Vec::with_capacity(size);
    let mut mask = full;
    let mut last = end;
    loop {
        order.push(last);
        if last == start && mask == (1 << start) {
            break;
        }
        let prev = parents[mask * size + last] as usize;
        mask &= !(1 << last);
        last = prev;
    }
    order.reverse();
    (cost, order)
}

/// Heuristic path cost: nearest-neighbour construction between the fixed
/// endpoints, improved by 2-opt segment reversals. Always an upper bound
/// on the exact optimum.
pub fn heuristic_hamiltonian(
    size: usize,
    dist: &dyn Fn(usize, usize) -> f64,
    start: usize,
    end: usize,
) -> f64 {
    let order = heuristic_hamiltonian_order(size, dist, start, end);
    order.windows(2).map(|w| dist(w[0], w[1])).sum()
}

/// Visit order chosen by the heuristic, endpoints fixed.
pub fn heuristic_hamiltonian_order(
    size: usize,
    dist: &dyn Fn(usize, usize) -> f64,
    start: usize,
    end: usize,
) -> Vec<usize> {
    assert!(size >= 2 && start != end);
    let mut order = Vec::with_capacity(size);
    order.push(start);
    let mut remaining: Vec<usize> = (0..size).filter(|&v| v != start && v != end).collect();
    let mut cur = start;
    while !remaining.is_empty() {
        let (pos, _) = remaining
            .iter()
            .enumerate()
            .map(|(pos, &v)| (pos, dist(cur, v)))
            .fold((0, f64::INFINITY), |best, cand| if cand.1 < best.1 { cand } else { best });
        cur = remaining.swap_remove(pos);
        order.push(cur);
    }
    order.push(end);

    // 2-opt with fixed endpoints: reverse interior segments while it helps
    let n = order.len();
    if n >= 4 {
        let mut improved = true;
        let mut passes = 0;
        while improved && passes < 64 {
            improved = false;
            passes += 1;
            for i in 1..n - 2 {
                for j in i + 1..n - 1 {
                    let before = dist(order[i - 1], order[i]) + dist(order[j], order[j + 1]);
                    let after = dist(order[i - 1], order[j]) + dist(order[i], order[j + 1]);
                    if after + 1e-12 < before {
                        order[i..=j].reverse();
                        improved = true;
                    }
                }
            }
        }
    }
    order
}
