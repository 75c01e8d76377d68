//! Closed-form asymptotic tour-length approximations, bounds and
//! feasibility conditions for time-slotted tours, plus the reduction of
//! general time windows to induced time slots.
//!
//! All lengths follow the square-root law `beta * sqrt(n * |R|)` for the
//! optimal tour through `n` uniform points on an area `|R|`, specialised
//! per slot structure:
//!
//! - identical slots: `beta * sqrt(n * m * |R|)`
//! - arbitrary slots: `beta * sqrt(n * |R| / h) * sum_k sqrt(l_k)`
//! - realized counts: `beta * sqrt(|R|) * (sqrt(1 + n_1) + sum_{k>=2} sqrt(n_k))`
//!
//! `beta` is the finite-size empirical estimate of the tour-length constant,
//! tabulated by point count and interpolated in `1/sqrt(n)` between anchors.

use alloc::vec::Vec;
use core::fmt;

use crate::math;
use crate::model::{ModelError, SlotAssignment, SlotPartition, TimeWindowSet};

/// Empirical tour-length constants by point count: Lei et al. estimates up
/// to 90 points, Applegate et al. from 100 points on. Square areas only.
pub const BETA_ANCHORS: [(u32, f64); 19] = [
    (20, 0.8584265),
    (30, 0.8269698),
    (40, 0.8129900),
    (50, 0.7994125),
    (60, 0.7908632),
    (70, 0.7817751),
    (80, 0.7775367),
    (90, 0.7773827),
    (100, 0.7764689),
    (200, 0.7563542),
    (300, 0.7477629),
    (400, 0.7428444),
    (500, 0.7394544),
    (600, 0.7369409),
    (700, 0.7349902),
    (800, 0.7335751),
    (900, 0.7321114),
    (1000, 0.7312235),
    (2000, 0.7256264),
];

/// Interval the constant is known to lie in, whatever the point count.
pub const BETA_INTERVAL: (f64, f64) = (0.62499, 0.91996);

#[derive(Debug, Clone, PartialEq)]
pub enum ApproxError {
    CountTooSmall { n: usize },
    NoSlots,
    NonPositiveArea,
    CountsMismatch,
    BadFraction,
    AllSlotsDropped,
    Model(ModelError),
}

impl fmt::Display for ApproxError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ApproxError::CountTooSmall { n } => write!(f, "point count {n} below 2"),
            ApproxError::NoSlots => write!(f, "slot count must be at least 1"),
            ApproxError::NonPositiveArea => write!(f, "area must be positive"),
            ApproxError::CountsMismatch => {
                write!(f, "slot counts inconsistent with the point count or partition")
            }
            ApproxError::BadFraction => write!(f, "minimum slot fraction must lie in [0, 1)"),
            ApproxError::AllSlotsDropped => {
                write!(f, "every induced slot was dropped by the length filter")
            }
            ApproxError::Model(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for ApproxError {}

impl From<ModelError> for ApproxError {
    fn from(e: ModelError) -> Self {
        ApproxError::Model(e)
    }
}

/// Tabulated tour-length constants with interpolation between anchors.
///
/// Lookups for an untabulated count interpolate linearly in `1/sqrt(n)`
/// between the bracketing anchors; counts below the first anchor and above
/// the last use the respective anchor value unchanged.
#[derive(Debug, Clone)]
pub struct BetaTable {
    anchors: Vec<(u32, f64)>,
}

impl Default for BetaTable {
    fn default() -> Self {
        BetaTable { anchors: BETA_ANCHORS.to_vec() }
    }
}

impl BetaTable {
    pub fn anchors(&self) -> &[(u32, f64)] {
        &self.anchors
    }

    pub fn lookup(&self, n: usize) -> Result<f64, ApproxError> {
        if n < 2 {
            return Err(ApproxError::CountTooSmall { n });
        }
        let first = self.anchors[0];
        let last = self.anchors[self.anchors.len() - 1];
        if n <= first.0 as usize {
            return Ok(first.1);
        }
        if n >= last.0 as usize {
            return Ok(last.1);
        }
        let hi = self.anchors.partition_point(|&(a, _)| (a as usize) < n);
        let (n_hi, b_hi) = self.anchors[hi];
        if n_hi as usize == n {
            return Ok(b_hi);
        }
        let (n_lo, b_lo) = self.anchors[hi - 1];
        let x = 1.0 / math::sqrt(n as f64);
        let x_lo = 1.0 / math::sqrt(n_lo as f64);
        let x_hi = 1.0 / math::sqrt(n_hi as f64);
        let t = (x - x_lo) / (x_hi - x_lo);
        Ok(b_lo + t * (b_hi - b_lo))
    }
}

/// Constant for `n` points from the default table.
pub fn beta_lookup(n: usize) -> Result<f64, ApproxError> {
    BetaTable::default().lookup(n)
}

/// Asymptotic optimal tour length of `n` uniform points on `area`.
pub fn bhh_length(n: usize, area: f64) -> Result<f64, ApproxError> {
    if !(area > 0.0) {
        return Err(ApproxError::NonPositiveArea);
    }
    Ok(beta_lookup(n)? * math::sqrt(n as f64 * area))
}

/// Tour length under `m` identical slots.
pub fn mits_length(n: usize, m: usize, area: f64) -> Result<f64, ApproxError> {
    if m < 1 {
        return Err(ApproxError::NoSlots);
    }
    if !(area > 0.0) {
        return Err(ApproxError::NonPositiveArea);
    }
    Ok(beta_lookup(n)? * math::sqrt(n as f64 * m as f64 * area))
}

/// Distributional tour length under an arbitrary slot partition.
pub fn mts_length(n: usize, partition: &SlotPartition, area: f64) -> Result<f64, ApproxError> {
    if !(area > 0.0) {
        return Err(ApproxError::NonPositiveArea);
    }
    let h = partition.horizon();
    let sum_sqrt: f64 = math::kahan_sum(partition.lengths().map(math::sqrt));
    Ok(beta_lookup(n)? * math::sqrt(n as f64 * area / h) * sum_sqrt)
}

/// Sampling tour length from realized per-slot client counts: the depot
/// joins the first slot, empty slots contribute nothing.
pub fn sampling_length(
    counts: &SlotAssignment,
    area: f64,
    n: usize,
) -> Result<f64, ApproxError> {
    if !(area > 0.0) {
        return Err(ApproxError::NonPositiveArea);
    }
    if counts.client_count() + 1 != n {
        return Err(ApproxError::CountsMismatch);
    }
    let beta = beta_lookup(n)?;
    let per_slot = counts.counts().iter().enumerate().map(|(k, &nk)| {
        let eff = if k == 0 { nk as f64 + 1.0 } else { nk as f64 };
        math::sqrt(eff)
    });
    Ok(beta * math::sqrt(area) * math::kahan_sum(per_slot))
}

/// Lower and upper tour-length bounds for any partition into `m` slots:
/// the slot-free length below, the identical-slot length above.
pub fn mts_bounds(n: usize, m: usize, area: f64) -> Result<(f64, f64), ApproxError> {
    Ok((bhh_length(n, area)?, mits_length(n, m, area)?))
}

/// Outcome of the average-case feasibility condition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistributionalFeasibility {
    pub feasible: bool,
    /// Largest point count servable with this partition on average.
    pub n_max: f64,
    /// Smallest minimum slot length that admits `n` points on average.
    pub l_min_required: f64,
}

/// Average-case feasibility: the shortest slot must be long enough to
/// traverse its expected share of points. Boundary inclusive.
pub fn feasible_distributional(
    n: usize,
    partition: &SlotPartition,
    area: f64,
) -> Result<DistributionalFeasibility, ApproxError> {
    if !(area > 0.0) {
        return Err(ApproxError::NonPositiveArea);
    }
    let beta = beta_lookup(n)?;
    let h = partition.horizon();
    let l_min = partition.min_slot_len();
    let n_max = l_min * h / (beta * beta * area);
    let l_min_required = n as f64 * beta * beta * area / h;
    Ok(DistributionalFeasibility { feasible: n as f64 <= n_max, n_max, l_min_required })
}

/// Realized-count feasibility: every slot must be long enough for the tour
/// of the points actually assigned to it. The constant is evaluated at the
/// instance's total point count.
pub fn feasible_sampled(
    counts: &SlotAssignment,
    partition: &SlotPartition,
    area: f64,
) -> Result<bool, ApproxError> {
    if !(area > 0.0) {
        return Err(ApproxError::NonPositiveArea);
    }
    if counts.slot_count() != partition.slot_count() {
        return Err(ApproxError::CountsMismatch);
    }
    let n = counts.client_count() + 1;
    let beta = beta_lookup(n)?;
    for (k, &nk) in counts.counts().iter().enumerate() {
        if beta * math::sqrt(area * nk as f64) > partition.slot_len(k) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Slot partition induced by a set of time windows: every window bound
/// becomes a slot boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct InducedSlotResult {
    /// Deduplicated partition of `[0, h]`; uncovered slots are kept so the
    /// partition stays valid, see [`InducedSlotResult::covered`].
    pub partition: SlotPartition,
    /// Final slot count after removing duplicates and uncovered slots.
    pub m_star: usize,
    /// Number of duplicated boundary values.
    pub m1: usize,
    /// Number of slots contained in no client's window.
    pub m2: usize,
    /// Per slot of `partition`: is it contained in some client's window?
    pub covered: Vec<bool>,
    /// Per client: inclusive range `(first, last)` of slots of `partition`
    /// contained in the client's window.
    pub client_slot_ranges: Vec<(usize, usize)>,
}

/// Sorts all window bounds together with `0` and `h` into a slot partition,
/// counting duplicated bounds (`m1`) and slots no client can be served in
/// (`m2`). With `n` points in total the raw partition has `2n - 1` slots
/// and `m_star = 2n - 1 - m1 - m2` remain.
pub fn induced_time_slots(tw: &TimeWindowSet) -> Result<InducedSlotResult, ApproxError> {
    let h = tw.horizon();
    let mut bounds: Vec<f64> = Vec::with_capacity(2 * tw.client_count() + 2);
    bounds.push(0.0);
    for &(b, f) in tw.windows() {
        bounds.push(b);
        bounds.push(f);
    }
    bounds.push(h);
    bounds.sort_by(f64::total_cmp);
    let raw_slots = bounds.len() - 1;

    let partition = SlotPartition::new(&bounds, h)?;
    let m1 = partition.merged_bounds();

    let covered: Vec<bool> = (0..partition.slot_count())
        .map(|k| {
            let (lo, hi) = partition.window(k);
            tw.windows().iter().any(|&(b, f)| b <= lo && hi <= f)
        })
        .collect();
    let m2 = covered.iter().filter(|&&c| !c).count();
    let m_star = raw_slots - m1 - m2;

    let client_slot_ranges = tw
        .windows()
        .iter()
        .map(|&(b, f)| {
            let first = partition.bounds().partition_point(|&c| c < b);
            let last = partition.bounds().partition_point(|&c| c <= f) - 2;
            (first, last)
        })
        .collect();

    Ok(InducedSlotResult { partition, m_star, m1, m2, covered, client_slot_ranges })
}

/// Upper bound on the optimal time-windowed tour via the induced slots:
/// the slotted length over the covered induced slots, optionally ignoring
/// slots shorter than `min_slot_frac * h`.
pub fn tsptw_upper_bound(
    tw: &TimeWindowSet,
    n: usize,
    area: f64,
    min_slot_frac: f64,
) -> Result<f64, ApproxError> {
    if !(area > 0.0) {
        return Err(ApproxError::NonPositiveArea);
    }
    if !(0.0..1.0).contains(&min_slot_frac) {
        return Err(ApproxError::BadFraction);
    }
    let induced = induced_time_slots(tw)?;
    let h = tw.horizon();
    let cutoff = min_slot_frac * h;
    let mut kept = 0usize;
    let sum_sqrt = math::kahan_sum(
        (0..induced.partition.slot_count())
            .filter(|&k| induced.covered[k] && induced.partition.slot_len(k) >= cutoff)
            .map(|k| {
                kept += 1;
                math::sqrt(induced.partition.slot_len(k))
            }),
    );
    if kept == 0 {
        return Err(ApproxError::AllSlotsDropped);
    }
    Ok(beta_lookup(n)? * math::sqrt(n as f64 * area / h) * sum_sqrt)
}
