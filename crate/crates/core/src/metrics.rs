//! Frame statistics and parameter sweeps.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::engine::Engine;
use crate::error::{ConfigError, MetricsError, ValidationError};
use crate::geom::Vec3;
use crate::io::config::ScenarioConfig;
use crate::io::csv::fmt_sig6;
use crate::medium::OpticalSegment;
use crate::sim::{simulate_frame, Frame, ReturnKind, World};

pub const DEPTH_BINS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ObjectStats {
    pub return_count: usize,
    pub mean_intensity: f64,
}

/// In-cloud depth histogram: [`DEPTH_BINS`] equal bins over `[0, max_depth]`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DepthHistogram {
    /// Longest in-cloud chord among beams that produced dust returns.
    pub max_depth: f64,
    pub counts: [usize; DEPTH_BINS],
}

impl DepthHistogram {
    pub fn bin_width(&self) -> f64 {
        self.max_depth / DEPTH_BINS as f64
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DustStats {
    pub count: usize,
    pub mean_intensity: f64,
    pub depth_histogram: DepthHistogram,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrameMetrics {
    /// Every scene object, including those with no returns.
    pub per_object: BTreeMap<u32, ObjectStats>,
    pub dust: DustStats,
    /// Returns of unknown provenance (injected recordings only).
    pub recorded_count: usize,
    pub dropped_count: usize,
}

/// Where a dust return sits inside the medium along its beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DepthSample {
    /// In-cloud distance before the return.
    pub depth: f64,
    /// Total in-cloud distance along the beam (up to the target or max range).
    pub chord: f64,
    pub optical_depth: f64,
    pub total_optical_depth: f64,
}

impl DepthSample {
    /// Probability that a beam which scatters does so before this depth.
    ///
    /// Uniform on `(0, 1)` when depths follow the truncated-exponential free-path law.
    pub fn conditional_cdf(&self) -> f64 {
        -(-self.optical_depth).exp_m1() / -(-self.total_optical_depth).exp_m1()
    }
}

fn depth_at(segments: &[OpticalSegment], t: f64) -> (f64, f64) {
    let mut depth = 0.0;
    let mut tau = 0.0;
    for s in segments {
        if s.t_in >= t {
            break;
        }
        let len = s.t_out.min(t) - s.t_in;
        depth += len;
        tau += s.alpha * len;
    }
    (depth, tau)
}

/// Depth samples of every dust return in `frame`, recomputed from geometry.
pub fn dust_depth_samples(frame: &Frame, world: &World) -> Result<Vec<DepthSample>, MetricsError> {
    let mut out = Vec::new();
    for r in &frame.returns {
        let ReturnKind::Dust(id) = r.kind else {
            continue;
        };
        if world.cloud(id).is_none() {
            return Err(MetricsError::UnknownCloud(id));
        }
        let ray = world.sensor.beam(&world.pose, r.channel, r.azimuth_index);
        let max_t = world
            .scene
            .nearest_hit(&ray)
            .map_or(world.sensor.max_range, |h| h.range);
        let segments = world.optical_segments(&ray, max_t);
        let (depth, tau) = depth_at(&segments, r.range);
        let (chord, total) = depth_at(&segments, f64::INFINITY);
        out.push(DepthSample {
            depth,
            chord,
            optical_depth: tau,
            total_optical_depth: total,
        });
    }
    Ok(out)
}

pub fn compute_metrics(frame: &Frame, world: &World) -> Result<FrameMetrics, MetricsError> {
    let mut per_object: BTreeMap<u32, (usize, f64)> = world
        .scene
        .objects()
        .iter()
        .map(|o| (o.id, (0, 0.0)))
        .collect();
    let mut dust_count = 0usize;
    let mut dust_sum = 0.0;
    let mut recorded_count = 0usize;
    for r in &frame.returns {
        match r.kind {
            ReturnKind::Target(id) => {
                let e = per_object
                    .get_mut(&id)
                    .ok_or(MetricsError::UnknownObject(id))?;
                e.0 += 1;
                e.1 += r.intensity as f64;
            }
            ReturnKind::Dust(_) => {
                dust_count += 1;
                dust_sum += r.intensity as f64;
            }
            ReturnKind::Recorded => recorded_count += 1,
        }
    }

    let samples = dust_depth_samples(frame, world)?;
    let max_depth = samples.iter().map(|s| s.chord).fold(0.0, f64::max);
    let mut counts = [0usize; DEPTH_BINS];
    if max_depth > 0.0 {
        for s in &samples {
            let bin = ((s.depth / max_depth) * DEPTH_BINS as f64) as usize;
            counts[bin.min(DEPTH_BINS - 1)] += 1;
        }
    }

    let mean = |sum: f64, n: usize| if n == 0 { 0.0 } else { sum / n as f64 };
    Ok(FrameMetrics {
        per_object: per_object
            .into_iter()
            .map(|(id, (n, sum))| {
                (
                    id,
                    ObjectStats {
                        return_count: n,
                        mean_intensity: mean(sum, n),
                    },
                )
            })
            .collect(),
        dust: DustStats {
            count: dust_count,
            mean_intensity: mean(dust_sum, dust_count),
            depth_histogram: DepthHistogram { max_depth, counts },
        },
        recorded_count,
        dropped_count: frame.dropped_count,
    })
}

/// One-sample Kolmogorov–Smirnov statistic of `samples` against Uniform(0, 1).
pub fn ks_statistic_uniform(samples: &mut [f64]) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let lo = x - i as f64 / n;
            let hi = (i + 1) as f64 / n - x;
            lo.max(hi)
        })
        .fold(0.0, f64::max)
}

/// A sweepable scenario parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParam {
    /// Number density of every cloud, particles/m³.
    Density,
    /// Distance from the sensor to the nearest cloud front along the sensor heading.
    CloudFrontDistance,
}

impl SweepParam {
    pub fn name(&self) -> &'static str {
        match self {
            SweepParam::Density => "density",
            SweepParam::CloudFrontDistance => "cloud_front_distance",
        }
    }
}

impl FromStr for SweepParam {
    type Err = ConfigError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "density" => Ok(SweepParam::Density),
            "cloud_front_distance" | "distance" => Ok(SweepParam::CloudFrontDistance),
            other => Err(ConfigError::NotSweepable(other.to_string())),
        }
    }
}

/// Distance from the sensor to the nearest cloud front along the heading.
pub fn cloud_front_distance(world: &World) -> Option<f64> {
    let (s, c) = world.pose.yaw_deg.to_radians().sin_cos();
    let fwd = Vec3::new(c, s, 0.0);
    world
        .clouds
        .iter()
        .map(|cl| (cl.shape.center() - world.pose.origin).dot(fwd) - cl.shape.support_along(c, s))
        .min_by(f64::total_cmp)
}

/// Returns a copy of `world` with `param` set to `value`.
pub fn apply_param(world: &World, param: SweepParam, value: f64) -> Result<World, ConfigError> {
    if !value.is_finite() {
        return Err(ValidationError::new("values", "must be finite").into());
    }
    let mut w = world.clone();
    match param {
        SweepParam::Density => {
            if value < 0.0 {
                return Err(ValidationError::new("values", "density must be >= 0").into());
            }
            for c in &mut w.clouds {
                c.number_density = value;
            }
        }
        SweepParam::CloudFrontDistance => {
            let front = cloud_front_distance(world).ok_or_else(|| {
                ValidationError::new("clouds", "must not be empty to sweep cloud_front_distance")
            })?;
            let (s, c) = w.pose.yaw_deg.to_radians().sin_cos();
            let shift = Vec3::new(c, s, 0.0) * (value - front);
            for cl in &mut w.clouds {
                cl.shape = cl.shape.with_center(cl.shape.center() + shift);
            }
        }
    }
    Ok(w)
}

pub const SWEEP_HEADER: &str =
    "param,value,replicate,object_id,return_count,mean_intensity,dust_count,dust_mean_intensity,dropped";

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub param: SweepParam,
    pub value: f64,
    pub replicate: u32,
    /// `None` when the scene has no objects.
    pub object_id: Option<u32>,
    pub return_count: usize,
    pub mean_intensity: f64,
    pub dust_count: usize,
    pub dust_mean_intensity: f64,
    pub dropped: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut out = String::from(SWEEP_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.param.name(),
                fmt_sig6(r.value),
                r.replicate,
                r.object_id.map(|i| i.to_string()).unwrap_or_default(),
                r.return_count,
                fmt_sig6(r.mean_intensity),
                r.dust_count,
                fmt_sig6(r.dust_mean_intensity),
                r.dropped
            );
        }
        out
    }

    /// Rows for one object, in sweep order.
    pub fn object_rows(&self, object_id: u32) -> impl Iterator<Item = &SweepRow> {
        self.rows
            .iter()
            .filter(move |r| r.object_id == Some(object_id))
    }
}

/// Runs frame 0 of the scenario once per `(value, replicate)`.
///
/// Replicate `r` uses seed `config.seed + r` at every value, so values are compared
/// on paired random streams.
pub fn sweep(
    config: &ScenarioConfig,
    param: SweepParam,
    values: &[f64],
    replicates: u32,
    engine: &Engine,
) -> Result<SweepTable, ConfigError> {
    if values.is_empty() {
        return Err(ValidationError::new("values", "must not be empty").into());
    }
    if replicates == 0 {
        return Err(ValidationError::new("replicates", "must be >= 1").into());
    }
    let mut rows = Vec::new();
    for &value in values {
        let world = apply_param(&config.world, param, value)?;
        for rep in 0..replicates {
            let seed = config.seed.wrapping_add(rep as u64);
            let frame = simulate_frame(&world, seed, 0, engine);
            let m = compute_metrics(&frame, &world).expect("frame simulated from this world");
            let row = |object_id, stats: ObjectStats| SweepRow {
                param,
                value,
                replicate: rep,
                object_id,
                return_count: stats.return_count,
                mean_intensity: stats.mean_intensity,
                dust_count: m.dust.count,
                dust_mean_intensity: m.dust.mean_intensity,
                dropped: m.dropped_count,
            };
            if m.per_object.is_empty() {
                rows.push(row(None, ObjectStats::default()));
            }
            for (&id, &stats) in &m.per_object {
                rows.push(row(Some(id), stats));
            }
        }
    }
    Ok(SweepTable { rows })
}
