//! Seeded random instance generation and literature benchmark parsing.
//!
//! Generation is pure given `(config, seed)`. Randomness is split into
//! named streams so spatial, partition and temporal draws never interleave:
//! each stream seeds its own ChaCha8 generator from
//! `splitmix(base_seed, instance_index, stream)`.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::math;
use crate::model::{
    Instance, ModelError, Point, SlotAssignment, SlotPartition, TimeWindowSet,
};

#[derive(Debug, Clone, PartialEq)]
pub enum GenError {
    BadConfig(&'static str),
    NoNodes,
    MalformedLine { line: usize },
    BadWidth,
    Model(ModelError),
}

impl fmt::Display for GenError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GenError::BadConfig(msg) => write!(f, "bad generation config: {msg}"),
            GenError::NoNodes => write!(f, "benchmark file contains no node lines"),
            GenError::MalformedLine { line } => {
                write!(f, "benchmark file line {line} looks like a node but does not parse")
            }
            GenError::BadWidth => write!(f, "window width must lie in (0, horizon]"),
            GenError::Model(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for GenError {}

impl From<ModelError> for GenError {
    fn from(e: ModelError) -> Self {
        GenError::Model(e)
    }
}

/// Slot-boundary generation scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TsScheme {
    Identical,
    /// Retain every p-th order statistic of `p*m - 1` uniform draws; larger
    /// `p` spaces the boundaries more evenly.
    Repulsion { p: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemporalMode {
    Uniform,
    /// One normal bump centred mid-horizon.
    OneMode,
    /// Even mixture of bumps at a quarter and three quarters of the horizon.
    TwoMode,
}

/// Parameters of one generated instance family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenConfig {
    /// Total point count, depot included.
    pub n: usize,
    pub side_a: f64,
    pub horizon_h: f64,
    pub m: usize,
    pub ts_scheme: TsScheme,
    pub temporal_mode: TemporalMode,
    pub seed: u64,
}

impl GenConfig {
    /// The conventional horizon: fifteen times the diameter of the square.
    pub fn default_horizon(side_a: f64) -> f64 {
        15.0 * side_a * math::sqrt(2.0)
    }

    pub fn validate(&self) -> Result<(), GenError> {
        if self.n < 2 {
            return Err(GenError::BadConfig("need at least two points"));
        }
        if self.m < 1 {
            return Err(GenError::BadConfig("need at least one slot"));
        }
        if !(self.horizon_h > 0.0) {
            return Err(GenError::BadConfig("horizon must be positive"));
        }
        if let TsScheme::Repulsion { p } = self.ts_scheme {
            if p < 1 {
                return Err(GenError::BadConfig("repulsion parameter must be at least 1"));
            }
        }
        Ok(())
    }
}

/// Named random streams, one generator each per instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stream {
    Spatial = 1,
    Partition = 2,
    Temporal = 3,
    Relax = 4,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Generator for a `(seed, instance, stream)` triple.
pub fn stream_rng(seed: u64, instance_index: u64, stream: Stream) -> ChaCha8Rng {
    let mixed = splitmix64(seed ^ splitmix64(instance_index ^ splitmix64(stream as u64)));
    ChaCha8Rng::seed_from_u64(mixed)
}

/// Uniform draw in `[0, 1)`.
pub fn uniform_f64(rng: &mut (impl RngCore + ?Sized)) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Standard normal by Box-Muller; consumes two uniforms per draw.
pub fn normal_f64(rng: &mut (impl RngCore + ?Sized)) -> f64 {
    let u1 = loop {
        let u = uniform_f64(rng);
        if u > 0.0 {
            break u;
        }
    };
    let u2 = uniform_f64(rng);
    math::sqrt(-2.0 * math::ln(u1)) * math::cos(2.0 * core::f64::consts::PI * u2)
}

/// `n` i.i.d. uniform points on the square; index 0 is the depot, which is
/// just as random as everyone else.
pub fn generate_points(n: usize, side_a: f64, rng: &mut impl RngCore) -> Vec<Point> {
    (0..n)
        .map(|_| Point::new(uniform_f64(rng) * side_a, uniform_f64(rng) * side_a))
        .collect()
}

/// Slot partition by repulsion between partitioning points: draw
/// `p*m - 1` uniforms on `(0, h)`, sort, keep ranks `p, 2p, ..., (m-1)p`.
pub fn repulsion_partition(
    m: usize,
    horizon: f64,
    p: u32,
    rng: &mut impl RngCore,
) -> Result<SlotPartition, GenError> {
    if m < 1 || p < 1 {
        return Err(GenError::BadConfig("repulsion needs m >= 1 and p >= 1"));
    }
    let draws = (p as usize) * m - 1;
    let mut points: Vec<f64> = (0..draws).map(|_| uniform_f64(rng) * horizon).collect();
    points.sort_by(f64::total_cmp);
    let mut bounds = Vec::with_capacity(m + 1);
    bounds.push(0.0);
    for l in 1..m {
        bounds.push(points[p as usize * l - 1]);
    }
    bounds.push(horizon);
    Ok(SlotPartition::new(&bounds, horizon)?)
}

/// Client service-time draws in `[0, h]` under the chosen temporal mode;
/// normal draws outside the horizon are rejected and redrawn.
pub fn sample_client_times(
    count: usize,
    horizon: f64,
    mode: TemporalMode,
    rng: &mut impl RngCore,
) -> Vec<f64> {
    let draw = |rng: &mut dyn RngCore| -> f64 {
        match mode {
            TemporalMode::Uniform => uniform_f64(rng) * horizon,
            TemporalMode::OneMode => loop {
                let t = horizon / 2.0 + normal_f64(rng) * horizon / 4.0;
                if (0.0..=horizon).contains(&t) {
                    break t;
                }
            },
            TemporalMode::TwoMode => loop {
                let centre = if uniform_f64(rng) < 0.5 { horizon / 4.0 } else { 3.0 * horizon / 4.0 };
                let t = centre + normal_f64(rng) * horizon / 4.0;
                if (0.0..=horizon).contains(&t) {
                    break t;
                }
            },
        }
    };
    (0..count).map(|_| draw(rng)).collect()
}

/// Buckets sampled times into the partition's slots.
pub fn assign_to_slots(
    times: &[f64],
    partition: &SlotPartition,
) -> Result<SlotAssignment, GenError> {
    let slots = times
        .iter()
        .map(|&t| partition.slot_index_of(t))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SlotAssignment::new(slots, partition.slot_count())?)
}

/// One fully generated instance.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedInstance {
    pub instance: Instance,
    pub partition: SlotPartition,
    pub assignment: SlotAssignment,
    pub client_times: Vec<f64>,
}

/// Generates the `instance_index`-th instance of a config, deterministically.
pub fn generate_instance(
    cfg: &GenConfig,
    instance_index: u64,
) -> Result<GeneratedInstance, GenError> {
    cfg.validate()?;
    let mut spatial = stream_rng(cfg.seed, instance_index, Stream::Spatial);
    let points = generate_points(cfg.n, cfg.side_a, &mut spatial);
    let instance = Instance::new(points, cfg.side_a, cfg.horizon_h)?;

    let mut partition_rng = stream_rng(cfg.seed, instance_index, Stream::Partition);
    let partition = match cfg.ts_scheme {
        TsScheme::Identical => SlotPartition::identical(cfg.m, cfg.horizon_h)?,
        TsScheme::Repulsion { p } => {
            repulsion_partition(cfg.m, cfg.horizon_h, p, &mut partition_rng)?
        }
    };

    let mut temporal = stream_rng(cfg.seed, instance_index, Stream::Temporal);
    let client_times =
        sample_client_times(cfg.n - 1, cfg.horizon_h, cfg.temporal_mode, &mut temporal);
    let assignment = assign_to_slots(&client_times, &partition)?;

    Ok(GeneratedInstance { instance, partition, assignment, client_times })
}

/// A literature TSP-TW instance: geometry plus per-client windows.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkInstance {
    pub instance: Instance,
    pub time_windows: TimeWindowSet,
    pub best_known: Option<f64>,
    pub source: Option<String>,
}

/// Parses the whitespace-column benchmark format: any line whose first
/// token is numeric and that carries at least seven columns is a node line
/// `id x y demand ready due service`; everything else (headers, the
/// trailing sentinel) is skipped. The first node is the depot and its due
/// date is the horizon.
pub fn parse_tsptw_instance(text: &str) -> Result<BenchmarkInstance, GenError> {
    struct Node {
        x: f64,
        y: f64,
        ready: f64,
        due: f64,
    }
    let mut nodes: Vec<Node> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() < 7 || tokens[0].parse::<f64>().is_err() {
            continue;
        }
        let mut vals = [0.0f64; 7];
        for (slot, tok) in vals.iter_mut().zip(&tokens) {
            *slot = tok.parse::<f64>().map_err(|_| GenError::MalformedLine { line: idx + 1 })?;
        }
        nodes.push(Node { x: vals[1], y: vals[2], ready: vals[4], due: vals[5] });
    }
    if nodes.is_empty() {
        return Err(GenError::NoNodes);
    }
    let horizon = nodes[0].due;
    let side = nodes
        .iter()
        .flat_map(|n| [n.x, n.y])
        .fold(0.0f64, f64::max);
    let points: Vec<Point> = nodes.iter().map(|n| Point::new(n.x, n.y)).collect();
    let instance = Instance::new(points, side, horizon)?;
    let windows: Vec<(f64, f64)> = nodes[1..]
        .iter()
        .map(|n| {
            let f = n.due.min(horizon);
            let b = n.ready.clamp(0.0, f);
            (b, f)
        })
        .collect();
    let time_windows = TimeWindowSet::new(windows, horizon)?;
    Ok(BenchmarkInstance { instance, time_windows, best_known: None, source: None })
}

/// Redraws every client window at a fixed width `w`: centres follow a
/// normal around mid-horizon, clamped so the window stays inside `[0, h]`.
pub fn relax_time_windows(
    bench: &BenchmarkInstance,
    width: f64,
    rng: &mut impl RngCore,
) -> Result<TimeWindowSet, GenError> {
    let horizon = bench.time_windows.horizon();
    if !(width > 0.0 && width <= horizon) {
        return Err(GenError::BadWidth);
    }
    let half = width / 2.0;
    let windows: Vec<(f64, f64)> = (0..bench.time_windows.client_count())
        .map(|_| {
            let raw = horizon / 2.0 + normal_f64(rng) * horizon / 8.0;
            let centre = raw.clamp(half, horizon - half);
            (centre - half, centre + half)
        })
        .collect();
    Ok(TimeWindowSet::new(windows, horizon)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::format;
    use alloc::string::ToString;

    #[test]
    fn deterministic_generation() {
        let cfg = GenConfig {
            n: 20,
            side_a: 50.0,
            horizon_h: GenConfig::default_horizon(50.0),
            m: 4,
            ts_scheme: TsScheme::Repulsion { p: 50 },
            temporal_mode: TemporalMode::TwoMode,
            seed: 99,
        };
        let a = generate_instance(&cfg, 3).unwrap();
        let b = generate_instance(&cfg, 3).unwrap();
        assert_eq!(a, b);
        let c = generate_instance(&cfg, 4).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn default_horizon_is_fifteen_diameters() {
        assert!((GenConfig::default_horizon(50.0) - 1060.66).abs() < 0.01);
    }

    #[test]
    fn points_cover_the_square() {
        let mut rng = stream_rng(1, 0, Stream::Spatial);
        let pts = generate_points(10_000, 50.0, &mut rng);
        let (mut sx, mut sy) = (0.0, 0.0);
        for p in &pts {
            assert!((0.0..=50.0).contains(&p.x) && (0.0..=50.0).contains(&p.y));
            sx += p.x;
            sy += p.y;
        }
        assert!((sx / 10_000.0 - 25.0).abs() < 1.0);
        assert!((sy / 10_000.0 - 25.0).abs() < 1.0);

        let degenerate = generate_points(5, 0.0, &mut rng);
        assert!(degenerate.iter().all(|p| p.x == 0.0 && p.y == 0.0));
    }

    #[test]
    fn repulsion_partition_shapes() {
        let mut rng = stream_rng(2, 0, Stream::Partition);
        // m = 1 keeps no interior points whatever p is
        let part = repulsion_partition(1, 10.0, 150, &mut rng).unwrap();
        assert_eq!(part.bounds(), &[0.0, 10.0]);
        // p = 1 degenerates to plain order statistics
        let part = repulsion_partition(5, 10.0, 1, &mut rng).unwrap();
        assert_eq!(part.slot_count(), 5);

        // repulsion concentrates the single interior boundary around h/2
        let spread = |p: u32| {
            let mut rng = stream_rng(7, u64::from(p), Stream::Partition);
            let mut mean = 0.0;
            let mut mean_sq = 0.0;
            let runs = 10_000;
            for _ in 0..runs {
                let part = repulsion_partition(2, 1.0, p, &mut rng).unwrap();
                let b = part.bounds()[1];
                mean += b;
                mean_sq += b * b;
            }
            mean /= runs as f64;
            (mean, mean_sq / runs as f64 - mean * mean)
        };
        let (mean1, var1) = spread(1);
        let (mean150, var150) = spread(150);
        assert!((mean1 - 0.5).abs() < 0.02);
        assert!((mean150 - 0.5).abs() < 0.02);
        // Beta(p, p) variance shrinks like 1/(8p); expect a factor far
        // beyond ten between p = 1 and p = 150
        assert!(var150 < var1 / 10.0, "var150={var150} var1={var1}");

        // asymmetric rank: boundary l of m follows Beta(p*l, p*(m-l)),
        // so its mean is l/m whatever p is
        let mut rng = stream_rng(8, 0, Stream::Partition);
        let runs = 10_000;
        let mut means = [0.0f64; 2];
        for _ in 0..runs {
            let part = repulsion_partition(3, 1.0, 20, &mut rng).unwrap();
            means[0] += part.bounds()[1];
            means[1] += part.bounds()[2];
        }
        assert!((means[0] / runs as f64 - 1.0 / 3.0).abs() < 0.01);
        assert!((means[1] / runs as f64 - 2.0 / 3.0).abs() < 0.01);
    }

    #[test]
    fn temporal_modes_have_the_right_shape() {
        let h = 100.0;
        let mut rng = stream_rng(3, 0, Stream::Temporal);
        let uni = sample_client_times(10_000, h, TemporalMode::Uniform, &mut rng);
        let mean = uni.iter().sum::<f64>() / uni.len() as f64;
        assert!((mean - h / 2.0).abs() < 0.02 * h);
        assert!(uni.iter().all(|&t| (0.0..=h).contains(&t)));

        let one = sample_client_times(10_000, h, TemporalMode::OneMode, &mut rng);
        let central =
            one.iter().filter(|&&t| (h / 4.0..=3.0 * h / 4.0).contains(&t)).count() as f64
                / one.len() as f64;
        // a mid-horizon bump concentrates mass centrally versus 0.5 uniform
        assert!(central > 0.6, "central mass {central}");
        assert!(one.iter().all(|&t| (0.0..=h).contains(&t)));

        // the mixture components are wide (sigma is a quarter horizon), so
        // the visible effect is mass pushed to the outer quarters rather
        // than a two-peaked histogram
        let two = sample_client_times(10_000, h, TemporalMode::TwoMode, &mut rng);
        let outer = |xs: &[f64]| {
            xs.iter().filter(|&&t| t < h / 4.0 || t > 3.0 * h / 4.0).count() as f64
                / xs.len() as f64
        };
        assert!(outer(&two) > outer(&one) + 0.05, "mixture should widen the spread");
        let mean_two = two.iter().sum::<f64>() / two.len() as f64;
        assert!((mean_two - h / 2.0).abs() < 0.02 * h);
        assert!(two.iter().all(|&t| (0.0..=h).contains(&t)));
    }

    #[test]
    fn assignment_buckets() {
        let part = SlotPartition::identical(4, 8.0).unwrap();
        let asg = assign_to_slots(&[0.0, 0.0, 0.0], &part).unwrap();
        assert_eq!(asg.counts(), &[3, 0, 0, 0]);
        let asg = assign_to_slots(&[1.0, 3.0, 5.0, 7.0], &part).unwrap();
        assert_eq!(asg.counts(), &[1, 1, 1, 1]);

        let mut rng = stream_rng(4, 0, Stream::Temporal);
        let times = sample_client_times(10_000, 8.0, TemporalMode::Uniform, &mut rng);
        let asg = assign_to_slots(&times, &part).unwrap();
        for &c in asg.counts() {
            // 4 sigma around the expected 2500
            assert!((c as f64 - 2500.0).abs() < 4.0 * 43.3, "count {c}");
        }
    }

    fn sample_file() -> String {
        let mut s = String::new();
        s.push_str("!! sample instance\n");
        s.push_str("CUST NO.  XCOORD.  YCOORD.  DEMAND  READY TIME  DUE DATE  SERVICE TIME\n");
        s.push_str("1 10.0 20.0 0.0 0 100 0\n");
        s.push_str("2 15.0 25.0 0.0 10 40 0\n");
        s.push_str("3 45.0 5.0 0.0 30 80 0\n");
        s.push_str("999\n");
        s
    }

    #[test]
    fn parses_column_format() {
        let bench = parse_tsptw_instance(&sample_file()).unwrap();
        assert_eq!(bench.instance.point_count(), 3);
        assert_eq!(bench.instance.horizon(), 100.0);
        assert_eq!(bench.instance.side(), 45.0);
        assert_eq!(bench.time_windows.windows(), &[(10.0, 40.0), (30.0, 80.0)]);

        assert!(matches!(parse_tsptw_instance(""), Err(GenError::NoNodes)));
        assert!(matches!(
            parse_tsptw_instance("no numbers here at all\n"),
            Err(GenError::NoNodes)
        ));
        // a depot-only file is a valid one-point instance
        let solo = parse_tsptw_instance("1 5.0 5.0 0.0 0 60 0\n").unwrap();
        assert_eq!(solo.instance.point_count(), 1);
        assert_eq!(solo.time_windows.client_count(), 0);

        let bad = "1 10.0 20.0 0.0 0 100 0\n2 15.0 oops 0.0 10 40 0\n";
        assert!(matches!(parse_tsptw_instance(bad), Err(GenError::MalformedLine { line: 2 })));
    }

    #[test]
    fn relaxed_windows_have_fixed_width() {
        let bench = parse_tsptw_instance(&sample_file()).unwrap();
        let h = bench.time_windows.horizon();
        let mut rng = stream_rng(5, 0, Stream::Relax);

        // full width forces every window to the whole horizon
        let tw = relax_time_windows(&bench, h, &mut rng).unwrap();
        assert!(tw.windows().iter().all(|&(b, f)| b == 0.0 && f == h));

        let w = h / 4.0;
        let tw = relax_time_windows(&bench, w, &mut rng).unwrap();
        for &(b, f) in tw.windows() {
            assert!((f - b - w).abs() < 1e-12);
            assert!(b >= 0.0 && f <= h);
        }

        // reproducible under the same stream
        let mut r1 = stream_rng(6, 1, Stream::Relax);
        let mut r2 = stream_rng(6, 1, Stream::Relax);
        assert_eq!(
            relax_time_windows(&bench, w, &mut r1).unwrap(),
            relax_time_windows(&bench, w, &mut r2).unwrap()
        );

        assert!(relax_time_windows(&bench, h * 1.01, &mut rng).is_err());
        assert!(relax_time_windows(&bench, 0.0, &mut rng).is_err());
    }

    #[test]
    fn stream_split_is_stable() {
        // the demo values double as a regression pin for the seed schema
        let mut a = stream_rng(42, 7, Stream::Spatial);
        let mut b = stream_rng(42, 7, Stream::Temporal);
        assert_ne!(a.next_u64(), b.next_u64());
        let repr = format!("{}", uniform_f64(&mut stream_rng(42, 7, Stream::Spatial)));
        assert_eq!(repr, uniform_f64(&mut stream_rng(42, 7, Stream::Spatial)).to_string());
    }
}
