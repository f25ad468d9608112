//! Static mode: corrupt a recorded clean point cloud with modeled dust.
//!
//! Each point's beam is rebuilt from `(channel, azimuth)` and the sensor pose, not
//! from its Cartesian position. Randomness uses the same beam-keyed streams as the
//! full simulation, so injecting into a clean simulated frame reproduces the dusty
//! simulation of the same beams.
//!
//! Beams that never returned in the recording cannot gain dust points; the static
//! path only sees what was recorded.

use std::collections::BTreeSet;

use crate::engine::Engine;
use crate::error::InjectError;
use crate::io::csv::RecordedPoint;
use crate::medium::{dust_return_intensity, sample_scatter, OpticalSegment};
use crate::rng::{RngStream, DRAW_RANGE_NOISE, DRAW_SCATTER};
use crate::sensor::{detect, ReturnMode};
use crate::sim::{LidarReturn, ReturnKind, World};

/// What happened to one input point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    /// No dust on the path; passed through unchanged.
    Kept,
    /// Dust on the path; intensity scaled by the two-way transmittance.
    Attenuated,
    /// Beam scattered in a cloud before reaching the point.
    Replaced,
    /// Fell below the detection threshold.
    Dropped,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct InjectReport {
    pub kept: usize,
    pub attenuated: usize,
    pub replaced: usize,
    pub dropped: usize,
}

impl InjectReport {
    pub fn total(&self) -> usize {
        self.kept + self.attenuated + self.replaced + self.dropped
    }

    fn count(&mut self, o: Outcome) {
        match o {
            Outcome::Kept => self.kept += 1,
            Outcome::Attenuated => self.attenuated += 1,
            Outcome::Replaced => self.replaced += 1,
            Outcome::Dropped => self.dropped += 1,
        }
    }
}

impl std::fmt::Display for InjectReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "kept {}, attenuated {}, replaced {}, dropped {}",
            self.kept, self.attenuated, self.replaced, self.dropped
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InjectedPoint {
    pub frame_id: u64,
    pub ret: LidarReturn,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Injected {
    /// Surviving points, in input order.
    pub points: Vec<InjectedPoint>,
    pub report: InjectReport,
}

impl Injected {
    /// CSV document of the output points.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(crate::io::CSV_HEADER);
        out.push('\n');
        for p in &self.points {
            crate::io::csv::push_row(&mut out, p.frame_id, &p.ret);
        }
        out
    }
}

/// Applies `world.clouds` to recorded points. `world.scene` is not used.
pub fn inject_dust(
    points: &[RecordedPoint],
    world: &World,
    seed: u64,
    engine: &Engine,
) -> Result<Injected, InjectError> {
    let channels = world.sensor.channels();
    let bad: BTreeSet<u16> = points
        .iter()
        .map(|p| p.channel)
        .filter(|&c| c as usize >= channels)
        .collect();
    if !bad.is_empty() {
        return Err(InjectError::UnknownChannels {
            sensor: world.sensor.name.clone(),
            channels: bad.into_iter().collect(),
        });
    }

    let results = engine.map_indexed(points.len(), |i| inject_point(&points[i], world, seed));
    let mut report = InjectReport::default();
    let mut out = Vec::with_capacity(points.len());
    for (p, (outcome, ret)) in points.iter().zip(results) {
        report.count(outcome);
        if let Some(ret) = ret {
            out.push(InjectedPoint {
                frame_id: p.frame_id,
                ret,
            });
        }
    }
    Ok(Injected {
        points: out,
        report,
    })
}

/// Injection for a single point; the channel must exist in `world.sensor`.
pub fn inject_point(p: &RecordedPoint, world: &World, seed: u64) -> (Outcome, Option<LidarReturn>) {
    let sensor = &world.sensor;
    let azimuth_index = sensor.azimuth_index(p.azimuth_deg);
    let ray = sensor.beam(&world.pose, p.channel, azimuth_index);
    let rng = RngStream::new(seed, p.frame_id, p.channel, azimuth_index);
    let segments: Vec<OpticalSegment> = if world.clouds.is_empty() {
        Vec::new()
    } else {
        world.optical_segments(&ray, p.range)
    };

    let u = rng.uniform(DRAW_SCATTER);
    let noise = rng.normal(DRAW_RANGE_NOISE);

    let base = LidarReturn {
        channel: p.channel,
        azimuth_index,
        azimuth_deg: p.azimuth_deg,
        elevation_deg: sensor.vertical_angles[p.channel as usize],
        range: p.range,
        intensity: p.intensity,
        kind: p.kind,
        point: p.point.unwrap_or_else(|| ray.at(p.range)),
    };

    let tau: f64 = segments.iter().map(OpticalSegment::optical_depth).sum();
    if tau == 0.0 {
        return (Outcome::Kept, Some(base));
    }

    let event = sample_scatter(&segments, u).filter(|e| e.t_scatter < p.range);
    let dust = event.and_then(|e| {
        let cloud = world.cloud(e.cloud_id)?;
        let intensity = dust_return_intensity(&e, cloud, &sensor.calib());
        detect(intensity, e.t_scatter, sensor, noise).map(|d| LidarReturn {
            range: d.range,
            intensity: d.intensity,
            kind: ReturnKind::Dust(e.cloud_id),
            point: ray.at(d.range),
            ..base
        })
    });

    if sensor.return_mode == ReturnMode::First && event.is_some() {
        return match dust {
            Some(d) => (Outcome::Replaced, Some(d)),
            None => (Outcome::Dropped, None),
        };
    }

    let two_way = (-2.0 * tau).exp();
    let attenuated =
        detect(p.intensity as f64 * two_way, p.range, sensor, 0.0).map(|d| LidarReturn {
            intensity: d.intensity,
            ..base
        });

    match (dust, attenuated) {
        (Some(d), Some(t)) if d.intensity >= t.intensity => (Outcome::Replaced, Some(d)),
        (Some(d), None) => (Outcome::Replaced, Some(d)),
        (_, Some(t)) => (Outcome::Attenuated, Some(t)),
        (None, None) => (Outcome::Dropped, None),
    }
}
