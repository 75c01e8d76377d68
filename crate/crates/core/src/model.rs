//! Instance representation, plane geometry, slot partitions and time-window
//! containers shared by every other module.
//!
//! Conventions fixed here and relied on everywhere else:
//!
//! - point index 0 is the depot;
//! - slot indices are 0-based in this API (the JSON interchange format of the
//!   companion crate uses 1-based indices);
//! - slots are half-open `[c_k, c_{k+1})` for the purpose of assigning a
//!   sampled time to a slot, except the last slot which is closed at `h`;
//! - travel speed is one length unit per time unit, so distances and
//!   durations share a scale.
//!
//! All types are immutable after construction and all operations are pure,
//! so everything is safe to share across threads.

use alloc::vec::Vec;
use core::fmt;

use crate::math;

#[derive(Debug, Clone, PartialEq)]
pub enum ModelError {
    EmptyInstance,
    NonPositiveHorizon,
    CoordinateOutOfRange { index: usize },
    ServiceTimeCount,
    NonZeroServiceTime { index: usize },
    BoundsTooShort,
    UnsortedBounds,
    FirstBoundNotZero,
    LastBoundNotHorizon,
    TimeOutOfRange { t: f64 },
    BadWindow { client: usize },
    SlotIndexOutOfRange { client: usize },
}

impl fmt::Display for ModelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelError::EmptyInstance => write!(f, "instance has no points"),
            ModelError::NonPositiveHorizon => write!(f, "horizon must be positive"),
            ModelError::CoordinateOutOfRange { index } => {
                write!(f, "point {index} lies outside [0, side]^2")
            }
            ModelError::ServiceTimeCount => {
                write!(f, "service time list length differs from point count")
            }
            ModelError::NonZeroServiceTime { index } => {
                write!(f, "service time of point {index} is non-zero")
            }
            ModelError::BoundsTooShort => write!(f, "a partition needs at least two bounds"),
            ModelError::UnsortedBounds => write!(f, "slot bounds are not sorted"),
            ModelError::FirstBoundNotZero => write!(f, "first slot bound must be 0"),
            ModelError::LastBoundNotHorizon => write!(f, "last slot bound must equal the horizon"),
            ModelError::TimeOutOfRange { t } => write!(f, "time {t} outside [0, horizon]"),
            ModelError::BadWindow { client } => {
                write!(f, "time window of client {client} violates 0 <= b < f <= h")
            }
            ModelError::SlotIndexOutOfRange { client } => {
                write!(f, "slot index of client {client} out of range")
            }
        }
    }
}

impl core::error::Error for ModelError {}

/// A point of the square service area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }
}

/// Planar Euclidean distance, which is also the travel duration.
pub fn euclidean_distance(p: Point, q: Point) -> f64 {
    let dx = p.x - q.x;
    let dy = p.y - q.y;
    math::sqrt(dx * dx + dy * dy)
}

/// A problem instance: depot and clients on a square of side `side_a`, with
/// a planning horizon. Service times exist in the data model but are fixed
/// at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    points: Vec<Point>,
    side_a: f64,
    horizon_h: f64,
    service_times: Vec<f64>,
}

impl Instance {
    /// Builds an instance with all service times zero. Index 0 is the depot.
    pub fn new(points: Vec<Point>, side_a: f64, horizon_h: f64) -> Result<Self, ModelError> {
        let n = points.len();
        Self::with_service_times(points, side_a, horizon_h, alloc::vec![0.0; n])
    }

    pub fn with_service_times(
        points: Vec<Point>,
        side_a: f64,
        horizon_h: f64,
        service_times: Vec<f64>,
    ) -> Result<Self, ModelError> {
        if points.is_empty() {
            return Err(ModelError::EmptyInstance);
        }
        if !(horizon_h > 0.0) {
            return Err(ModelError::NonPositiveHorizon);
        }
        for (i, p) in points.iter().enumerate() {
            let in_range =
                p.x >= 0.0 && p.x <= side_a && p.y >= 0.0 && p.y <= side_a && side_a >= 0.0;
            if !in_range {
                return Err(ModelError::CoordinateOutOfRange { index: i });
            }
        }
        if service_times.len() != points.len() {
            return Err(ModelError::ServiceTimeCount);
        }
        if let Some(i) = service_times.iter().position(|&s| s != 0.0) {
            return Err(ModelError::NonZeroServiceTime { index: i });
        }
        Ok(Instance { points, side_a, horizon_h, service_times })
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn depot(&self) -> Point {
        self.points[0]
    }

    /// Total number of points, depot included.
    pub fn point_count(&self) -> usize {
        self.points.len()
    }

    /// Number of clients (points excluding the depot).
    pub fn client_count(&self) -> usize {
        self.points.len() - 1
    }

    pub fn side(&self) -> f64 {
        self.side_a
    }

    pub fn area(&self) -> f64 {
        self.side_a * self.side_a
    }

    pub fn horizon(&self) -> f64 {
        self.horizon_h
    }

    pub fn service_times(&self) -> &[f64] {
        &self.service_times
    }

    /// Travel duration between points `i` and `j`.
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        euclidean_distance(self.points[i], self.points[j])
    }
}

/// An ordered partition `0 = c_0 < c_1 < ... < c_m = h` of the horizon into
/// `m` contiguous slots. Duplicate bounds supplied to [`SlotPartition::new`]
/// are collapsed and counted in [`SlotPartition::merged_bounds`].
#[derive(Debug, Clone, PartialEq)]
pub struct SlotPartition {
    bounds: Vec<f64>,
    merged: usize,
}

impl SlotPartition {
    /// Validates and normalizes a bound list against a horizon.
    pub fn new(bounds: &[f64], horizon: f64) -> Result<Self, ModelError> {
        if !(horizon > 0.0) {
            return Err(ModelError::NonPositiveHorizon);
        }
        if bounds.len() < 2 {
            return Err(ModelError::BoundsTooShort);
        }
        if bounds.windows(2).any(|w| w[1] < w[0]) {
            return Err(ModelError::UnsortedBounds);
        }
        if bounds[0] != 0.0 {
            return Err(ModelError::FirstBoundNotZero);
        }
        if *bounds.last().expect("non-empty") != horizon {
            return Err(ModelError::LastBoundNotHorizon);
        }
        let mut dedup: Vec<f64> = Vec::with_capacity(bounds.len());
        let mut merged = 0;
        for &b in bounds {
            if dedup.last() == Some(&b) {
                merged += 1;
            } else {
                dedup.push(b);
            }
        }
        if dedup.len() < 2 {
            // all bounds collapsed onto 0, which the horizon check rules out
            return Err(ModelError::BoundsTooShort);
        }
        Ok(SlotPartition { bounds: dedup, merged })
    }

    /// `m` identical slots of length `h/m`.
    pub fn identical(m: usize, horizon: f64) -> Result<Self, ModelError> {
        if m == 0 {
            return Err(ModelError::BoundsTooShort);
        }
        let mut bounds: Vec<f64> = (0..m).map(|k| horizon * k as f64 / m as f64).collect();
        bounds.push(horizon);
        Self::new(&bounds, horizon)
    }

    pub fn bounds(&self) -> &[f64] {
        &self.bounds
    }

    pub fn slot_count(&self) -> usize {
        self.bounds.len() - 1
    }

    pub fn horizon(&self) -> f64 {
        *self.bounds.last().expect("non-empty")
    }

    /// Number of duplicate bounds collapsed during validation.
    pub fn merged_bounds(&self) -> usize {
        self.merged
    }

    /// `[start, end]` of slot `k` (0-based).
    pub fn window(&self, k: usize) -> (f64, f64) {
        (self.bounds[k], self.bounds[k + 1])
    }

    pub fn slot_len(&self, k: usize) -> f64 {
        self.bounds[k + 1] - self.bounds[k]
    }

    pub fn lengths(&self) -> impl Iterator<Item = f64> + '_ {
        self.bounds.windows(2).map(|w| w[1] - w[0])
    }

    pub fn min_slot_len(&self) -> f64 {
        self.lengths().fold(f64::INFINITY, f64::min)
    }

    /// Slot containing time `t`: half-open slots, `t = h` maps to the last.
    pub fn slot_index_of(&self, t: f64) -> Result<usize, ModelError> {
        let h = self.horizon();
        if !(0.0..=h).contains(&t) {
            return Err(ModelError::TimeOutOfRange { t });
        }
        if t == h {
            return Ok(self.slot_count() - 1);
        }
        // last k with bounds[k] <= t
        let k = match self.bounds.partition_point(|&b| b <= t) {
            0 => 0,
            idx => idx - 1,
        };
        Ok(k)
    }
}

/// Per-client time windows `[b_i, f_i]`; the depot window is fixed to
/// `[0, h]` and not stored.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeWindowSet {
    windows: Vec<(f64, f64)>,
    horizon: f64,
}

impl TimeWindowSet {
    pub fn new(windows: Vec<(f64, f64)>, horizon: f64) -> Result<Self, ModelError> {
        if !(horizon > 0.0) {
            return Err(ModelError::NonPositiveHorizon);
        }
        for (i, &(b, f)) in windows.iter().enumerate() {
            if !(b >= 0.0 && b < f && f <= horizon) {
                return Err(ModelError::BadWindow { client: i });
            }
        }
        Ok(TimeWindowSet { windows, horizon })
    }

    pub fn windows(&self) -> &[(f64, f64)] {
        &self.windows
    }

    pub fn client_count(&self) -> usize {
        self.windows.len()
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }
}

/// Assignment of clients to slots. `slot_of_client[i]` is the 0-based slot
/// of client `i+1` (client indices follow the instance point order, depot
/// excluded). `counts` holds the number of clients per slot; the depot is
/// not counted here — the sampling approximation adds it to the first slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotAssignment {
    slot_of_client: Vec<usize>,
    counts: Vec<usize>,
}

impl SlotAssignment {
    pub fn new(slot_of_client: Vec<usize>, slot_count: usize) -> Result<Self, ModelError> {
        let mut counts = alloc::vec![0usize; slot_count];
        for (i, &k) in slot_of_client.iter().enumerate() {
            if k >= slot_count {
                return Err(ModelError::SlotIndexOutOfRange { client: i });
            }
            counts[k] += 1;
        }
        Ok(SlotAssignment { slot_of_client, counts })
    }

    pub fn slot_of_client(&self) -> &[usize] {
        &self.slot_of_client
    }

    /// Clients per slot (depot excluded).
    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn slot_count(&self) -> usize {
        self.counts.len()
    }

    pub fn client_count(&self) -> usize {
        self.slot_of_client.len()
    }

    /// Original client point indices (1-based into the instance) per slot.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut members: Vec<Vec<usize>> = alloc::vec![Vec::new(); self.counts.len()];
        for (i, &k) in self.slot_of_client.iter().enumerate() {
            members[k].push(i + 1);
        }
        members
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use rand_core::{RngCore, SeedableRng};

    fn uniform(rng: &mut rand_chacha::ChaCha8Rng) -> f64 {
        (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    #[test]
    fn distance_basics() {
        assert_eq!(euclidean_distance(Point::new(0.0, 0.0), Point::new(0.0, 0.0)), 0.0);
        assert_eq!(euclidean_distance(Point::new(0.0, 0.0), Point::new(3.0, 4.0)), 5.0);
        // scaled 3-4-5 triangle
        let d = euclidean_distance(Point::new(1.5, 2.0), Point::new(4.5, 6.0));
        assert!((d - 5.0).abs() < 1e-12);
    }

    #[test]
    fn distance_symmetry_and_triangle() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10_000 {
            let p = Point::new(uniform(&mut rng) * 50.0, uniform(&mut rng) * 50.0);
            let q = Point::new(uniform(&mut rng) * 50.0, uniform(&mut rng) * 50.0);
            let r = Point::new(uniform(&mut rng) * 50.0, uniform(&mut rng) * 50.0);
            assert!((euclidean_distance(p, q) - euclidean_distance(q, p)).abs() < 1e-12);
            assert!(
                euclidean_distance(p, r)
                    <= euclidean_distance(p, q) + euclidean_distance(q, r) + 1e-12
            );
        }
    }

    #[test]
    fn slot_index_conventions() {
        let part = SlotPartition::new(&[0.0, 5.0, 10.0], 10.0).unwrap();
        assert_eq!(part.slot_index_of(0.0).unwrap(), 0);
        // boundary belongs to the right (half-open) slot
        assert_eq!(part.slot_index_of(5.0).unwrap(), 1);
        // the horizon closes the last slot
        assert_eq!(part.slot_index_of(10.0).unwrap(), 1);
        assert!(part.slot_index_of(10.5).is_err());
        assert!(part.slot_index_of(-0.1).is_err());
    }

    #[test]
    fn slot_index_matches_linear_scan() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10_000 {
            let h = 1.0 + uniform(&mut rng) * 100.0;
            let m = 1 + (rng.next_u64() % 8) as usize;
            let mut bounds: Vec<f64> = (0..m - 1).map(|_| uniform(&mut rng) * h).collect();
            bounds.push(0.0);
            bounds.push(h);
            bounds.sort_by(f64::total_cmp);
            let part = match SlotPartition::new(&bounds, h) {
                Ok(p) => p,
                Err(_) => continue, // duplicate-at-zero corner collapses below two bounds
            };
            let t = uniform(&mut rng) * h;
            let k = part.slot_index_of(t).unwrap();
            let (lo, hi) = part.window(k);
            assert!(lo <= t && (t < hi || (t == hi && k == part.slot_count() - 1)));
        }
    }

    #[test]
    fn partition_validation() {
        let p = SlotPartition::new(&[0.0, 5.0, 10.0], 10.0).unwrap();
        assert_eq!(p.slot_count(), 2);
        assert_eq!(p.merged_bounds(), 0);
        assert!(p.lengths().all(|l| l == 5.0));

        let p = SlotPartition::new(&[0.0, 5.0, 5.0, 10.0], 10.0).unwrap();
        assert_eq!(p.slot_count(), 2);
        assert_eq!(p.merged_bounds(), 1);

        assert_eq!(
            SlotPartition::new(&[0.0, 10.0, 5.0], 10.0),
            Err(ModelError::UnsortedBounds)
        );
        assert_eq!(
            SlotPartition::new(&[1.0, 10.0], 10.0),
            Err(ModelError::FirstBoundNotZero)
        );
        assert_eq!(
            SlotPartition::new(&[0.0, 9.0], 10.0),
            Err(ModelError::LastBoundNotHorizon)
        );
    }

    #[test]
    fn slot_lengths_sum_to_horizon() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(13);
        for _ in 0..1000 {
            let h = 1.0 + uniform(&mut rng) * 2000.0;
            let m = 1 + (rng.next_u64() % 12) as usize;
            let mut bounds: Vec<f64> = (0..m - 1).map(|_| uniform(&mut rng) * h).collect();
            bounds.push(0.0);
            bounds.push(h);
            bounds.sort_by(f64::total_cmp);
            if let Ok(part) = SlotPartition::new(&bounds, h) {
                let sum = crate::math::kahan_sum(part.lengths());
                assert!((sum - h).abs() <= 1e-9 * h);
            }
        }
    }

    #[test]
    fn instance_invariants() {
        let pts = vec![Point::new(0.0, 0.0), Point::new(3.0, 4.0)];
        let inst = Instance::new(pts.clone(), 5.0, 10.0).unwrap();
        assert_eq!(inst.client_count(), 1);
        assert_eq!(inst.distance(0, 1), 5.0);

        assert!(Instance::new(vec![], 5.0, 10.0).is_err());
        assert!(Instance::new(pts.clone(), 5.0, 0.0).is_err());
        assert!(Instance::new(vec![Point::new(6.0, 0.0)], 5.0, 10.0).is_err());
        assert!(
            Instance::with_service_times(pts, 5.0, 10.0, vec![0.0, 1.0]).is_err()
        );
    }

    #[test]
    fn window_and_assignment_validation() {
        assert!(TimeWindowSet::new(vec![(0.0, 5.0), (2.0, 10.0)], 10.0).is_ok());
        assert!(TimeWindowSet::new(vec![(5.0, 5.0)], 10.0).is_err());
        assert!(TimeWindowSet::new(vec![(0.0, 11.0)], 10.0).is_err());

        let asg = SlotAssignment::new(vec![0, 1, 1, 0], 2).unwrap();
        assert_eq!(asg.counts(), &[2, 2]);
        assert_eq!(asg.members(), vec![vec![1, 4], vec![2, 3]]);
        assert!(SlotAssignment::new(vec![0, 2], 2).is_err());
    }
}
