//! Scenario configuration file (TOML).
//!
//! ```toml
//! seed = 0            # optional; integer, or a decimal string above i64::MAX
//! frames = 1          # optional, >= 1
//! sensor = "vlp16"    # or a [sensor] table: preset = "vlp16" plus field overrides
//!
//! [pose]
//! origin = [0.0, 0.0, 0.0]
//! yaw_deg = 0.0
//!
//! [output]
//! format = "csv"      # csv | pcd | stream
//! path = "-"          # file path, "-" for stdout, or host:port for stream
//!
//! [[scene]]
//! id = 1
//! label = "car"
//! reflectivity = 0.5
//! box = { center = [18.25, 0.0, -0.25], half_extents = [2.25, 0.9, 0.75] }
//! # or: triangles = [[[x, y, z], [x, y, z], [x, y, z]], ...]
//!
//! [[clouds]]
//! id = 0
//! box = { center = [8.0, 0.0, 0.5], half_extents = [2.0, 3.0, 1.5] }
//! # or: ellipsoid = { center = [...], semi_axes = [...] }
//! number_density = 1e9
//! particle_radius = 5e-6
//! extinction_efficiency = 2.0   # optional
//! backscatter_albedo = 0.5      # optional
//! ```
//!
//! Unknown keys are rejected everywhere.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, ValidationError};
use crate::geom::Vec3;
use crate::medium::{
    CloudShape, DustCloud, DEFAULT_BACKSCATTER_ALBEDO, DEFAULT_EXTINCTION_EFFICIENCY,
};
use crate::scene::{Aabb, Ellipsoid, Geometry, Scene, SceneObject};
use crate::sensor::{preset, Pose, ReturnMode, SensorModel};
use crate::sim::World;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Pcd,
    Stream,
}

impl std::str::FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Self::Csv),
            "pcd" => Ok(Self::Pcd),
            "stream" => Ok(Self::Stream),
            other => Err(format!(
                "unknown output format `{other}` (csv, pcd, stream)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub format: OutputFormat,
    /// File path, `-` for standard output, or `host:port` for the stream sink.
    #[serde(default = "default_output_path")]
    pub path: String,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            format: OutputFormat::Csv,
            path: default_output_path(),
        }
    }
}

fn default_output_path() -> String {
    "-".to_string()
}

/// A validated scenario: the unit of reproducibility.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub world: World,
    pub seed: u64,
    pub frames: u64,
    pub output: OutputSpec,
}

impl ScenarioConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Syntax(format!("cannot read {}: {e}", path.display())))?;
        parse_config(&text)
    }
}

// Raw on-disk schema.

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<RawSeed>,
    #[serde(default = "one")]
    frames: i64,
    sensor: toml::Value,
    #[serde(default)]
    pose: RawPose,
    #[serde(default)]
    output: OutputSpec,
    #[serde(default)]
    scene: Vec<RawObject>,
    #[serde(default)]
    clouds: Vec<RawCloud>,
}

fn one() -> i64 {
    1
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum RawSeed {
    Int(i64),
    Text(String),
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPose {
    #[serde(default)]
    origin: [f64; 3],
    #[serde(default)]
    yaw_deg: f64,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSensor {
    preset: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vertical_angles: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    azimuth_steps: Option<i64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    min_range: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    max_range: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    range_noise_sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    detection_threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    intensity_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rotation_rate: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    return_mode: Option<ReturnMode>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBox {
    center: [f64; 3],
    half_extents: [f64; 3],
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEllipsoid {
    center: [f64; 3],
    semi_axes: [f64; 3],
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObject {
    id: i64,
    #[serde(default)]
    label: String,
    reflectivity: f64,
    #[serde(rename = "box", default, skip_serializing_if = "Option::is_none")]
    aabb: Option<RawBox>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    triangles: Option<Vec<[[f64; 3]; 3]>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCloud {
    id: i64,
    number_density: f64,
    particle_radius: f64,
    #[serde(default = "default_q_ext")]
    extinction_efficiency: f64,
    #[serde(default = "default_albedo")]
    backscatter_albedo: f64,
    #[serde(rename = "box", default, skip_serializing_if = "Option::is_none")]
    aabb: Option<RawBox>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ellipsoid: Option<RawEllipsoid>,
}

fn default_q_ext() -> f64 {
    DEFAULT_EXTINCTION_EFFICIENCY
}

fn default_albedo() -> f64 {
    DEFAULT_BACKSCATTER_ALBEDO
}

fn id_u32(id: i64, field: String) -> Result<u32, ValidationError> {
    u32::try_from(id).map_err(|_| ValidationError::new(field, "must be in [0, 4294967295]"))
}

/// Parses and validates a scenario file, applying defaults.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError::Syntax(e.to_string()))?;

    let seed = match raw.seed {
        None => 0,
        Some(RawSeed::Int(v)) => u64::try_from(v)
            .map_err(|_| ValidationError::new("seed", "must be a non-negative 64-bit integer"))?,
        Some(RawSeed::Text(s)) => s
            .trim()
            .parse::<u64>()
            .map_err(|_| ValidationError::new("seed", "must be a non-negative 64-bit integer"))?,
    };
    if raw.frames < 1 {
        return Err(ValidationError::new("frames", "must be >= 1").into());
    }

    let sensor = resolve_sensor(raw.sensor)?;

    let origin = Vec3::from(raw.pose.origin);
    if !origin.is_finite() {
        return Err(ValidationError::new("pose.origin", "must be finite").into());
    }
    if !raw.pose.yaw_deg.is_finite() {
        return Err(ValidationError::new("pose.yaw_deg", "must be finite").into());
    }

    let mut objects = Vec::with_capacity(raw.scene.len());
    for (i, o) in raw.scene.into_iter().enumerate() {
        let at = |f: &str| format!("scene[{i}].{f}");
        let geometry = match (o.aabb, o.triangles) {
            (Some(b), None) => Geometry::Box(Aabb::new(b.center.into(), b.half_extents.into())),
            (None, Some(t)) => Geometry::Triangles(
                t.into_iter()
                    .map(|[a, b, c]| [a.into(), b.into(), c.into()])
                    .collect(),
            ),
            _ => {
                return Err(ValidationError::new(
                    format!("scene[{i}]"),
                    "must have exactly one of `box` or `triangles`",
                )
                .into())
            }
        };
        objects.push(SceneObject {
            id: id_u32(o.id, at("id"))?,
            geometry,
            reflectivity: o.reflectivity,
            label: o.label,
        });
    }
    let scene = Scene::new(objects)?;

    let mut clouds = Vec::with_capacity(raw.clouds.len());
    let mut ids = HashSet::new();
    for (i, c) in raw.clouds.into_iter().enumerate() {
        let prefix = format!("clouds[{i}]");
        let shape = match (c.aabb, c.ellipsoid) {
            (Some(b), None) => CloudShape::Box(Aabb::new(b.center.into(), b.half_extents.into())),
            (None, Some(e)) => CloudShape::Ellipsoid(Ellipsoid {
                center: e.center.into(),
                semi_axes: e.semi_axes.into(),
            }),
            _ => {
                return Err(ValidationError::new(
                    prefix,
                    "must have exactly one of `box` or `ellipsoid`",
                )
                .into())
            }
        };
        let cloud = DustCloud {
            id: id_u32(c.id, format!("{prefix}.id"))?,
            shape,
            number_density: c.number_density,
            particle_radius: c.particle_radius,
            extinction_efficiency: c.extinction_efficiency,
            backscatter_albedo: c.backscatter_albedo,
        };
        cloud.validate().map_err(|e| e.within(&prefix))?;
        if !ids.insert(cloud.id) {
            return Err(ValidationError::new(
                format!("{prefix}.id"),
                format!("must be unique ({} is repeated)", cloud.id),
            )
            .into());
        }
        clouds.push(cloud);
    }

    if raw.output.path.is_empty() {
        return Err(ValidationError::new("output.path", "must not be empty").into());
    }

    Ok(ScenarioConfig {
        world: World {
            sensor,
            pose: Pose {
                origin,
                yaw_deg: raw.pose.yaw_deg,
            },
            scene,
            clouds,
        },
        seed,
        frames: raw.frames as u64,
        output: raw.output,
    })
}

fn resolve_sensor(value: toml::Value) -> Result<SensorModel, ConfigError> {
    let raw = match value {
        toml::Value::String(name) => return preset(&name),
        table @ toml::Value::Table(_) => RawSensor::deserialize(table)
            .map_err(|e| ConfigError::Syntax(format!("sensor: {e}")))?,
        _ => return Err(ValidationError::new("sensor", "must be a preset name or a table").into()),
    };
    let mut s = preset(&raw.preset)?;
    if let Some(v) = raw.vertical_angles {
        s.vertical_angles = v;
    }
    if let Some(v) = raw.azimuth_steps {
        s.azimuth_steps = u32::try_from(v)
            .map_err(|_| ValidationError::new("sensor.azimuth_steps", "must be >= 1"))?;
    }
    if let Some(v) = raw.min_range {
        s.min_range = v;
    }
    if let Some(v) = raw.max_range {
        s.max_range = v;
    }
    if let Some(v) = raw.range_noise_sigma {
        s.range_noise_sigma = v;
    }
    if let Some(v) = raw.detection_threshold {
        s.detection_threshold = v;
    }
    if let Some(v) = raw.intensity_scale {
        s.intensity_scale = v;
    }
    if let Some(v) = raw.rotation_rate {
        s.rotation_rate = v;
    }
    if let Some(v) = raw.return_mode {
        s.return_mode = v;
    }
    s.validate().map_err(|e| e.within("sensor"))?;
    Ok(s)
}

/// Renders a config so that `parse_config(&render_config(c)) == c`.
///
/// The sensor is written as its preset name plus every field explicitly.
pub fn render_config(config: &ScenarioConfig) -> String {
    let w = &config.world;
    let s = &w.sensor;
    let seed = match i64::try_from(config.seed) {
        Ok(v) => RawSeed::Int(v),
        Err(_) => RawSeed::Text(config.seed.to_string()),
    };
    let sensor = RawSensor {
        preset: s.name.clone(),
        vertical_angles: Some(s.vertical_angles.clone()),
        azimuth_steps: Some(s.azimuth_steps as i64),
        min_range: Some(s.min_range),
        max_range: Some(s.max_range),
        range_noise_sigma: Some(s.range_noise_sigma),
        detection_threshold: Some(s.detection_threshold),
        intensity_scale: Some(s.intensity_scale),
        rotation_rate: Some(s.rotation_rate),
        return_mode: Some(s.return_mode),
    };
    let raw = RawConfig {
        seed: Some(seed),
        frames: config.frames as i64,
        sensor: toml::Value::try_from(sensor).expect("sensor table serializes"),
        pose: RawPose {
            origin: w.pose.origin.into(),
            yaw_deg: w.pose.yaw_deg,
        },
        output: config.output.clone(),
        scene: w
            .scene
            .objects()
            .iter()
            .map(|o| {
                let (aabb, triangles) = match &o.geometry {
                    Geometry::Box(b) => (
                        Some(RawBox {
                            center: b.center.into(),
                            half_extents: b.half_extents.into(),
                        }),
                        None,
                    ),
                    Geometry::Triangles(t) => (
                        None,
                        Some(t.iter().map(|tri| tri.map(Vec3::to_array)).collect()),
                    ),
                };
                RawObject {
                    id: o.id as i64,
                    label: o.label.clone(),
                    reflectivity: o.reflectivity,
                    aabb,
                    triangles,
                }
            })
            .collect(),
        clouds: w
            .clouds
            .iter()
            .map(|c| {
                let (aabb, ellipsoid) = match c.shape {
                    CloudShape::Box(b) => (
                        Some(RawBox {
                            center: b.center.into(),
                            half_extents: b.half_extents.into(),
                        }),
                        None,
                    ),
                    CloudShape::Ellipsoid(e) => (
                        None,
                        Some(RawEllipsoid {
                            center: e.center.into(),
                            semi_axes: e.semi_axes.into(),
                        }),
                    ),
                };
                RawCloud {
                    id: c.id as i64,
                    number_density: c.number_density,
                    particle_radius: c.particle_radius,
                    extinction_efficiency: c.extinction_efficiency,
                    backscatter_albedo: c.backscatter_albedo,
                    aabb,
                    ellipsoid,
                }
            })
            .collect(),
    };
    toml::to_string(&raw).expect("validated config renders as TOML")
}
