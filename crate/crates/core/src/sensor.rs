//! Spinning LIDAR device model: presets, scan pattern, return intensity and detection.

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, ValidationError};
use crate::geom::{Ray, Vec3};

/// Upper end of the 8-bit reflectivity channel.
pub const INTENSITY_MAX: f64 = 255.0;

/// Names accepted by [`preset`].
pub const PRESET_NAMES: [&str; 2] = ["vlp16", "os1-64"];

pub const DEFAULT_INTENSITY_SCALE: f64 = 25_600.0;
pub const DEFAULT_DETECTION_THRESHOLD: f64 = 0.5;
pub const DEFAULT_RANGE_NOISE_SIGMA: f64 = 0.03;

/// Which candidate a beam reports when both dust and a target could return.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReturnMode {
    #[default]
    First,
    Strongest,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntensityCalib {
    /// Range-equation scale `K`.
    pub scale: f64,
    /// Detection threshold `I_min`.
    pub threshold: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorModel {
    pub name: String,
    /// Elevation of each channel in degrees, ascending.
    pub vertical_angles: Vec<f64>,
    pub azimuth_steps: u32,
    pub min_range: f64,
    pub max_range: f64,
    pub range_noise_sigma: f64,
    pub detection_threshold: f64,
    pub intensity_scale: f64,
    pub rotation_rate: f64,
    pub return_mode: ReturnMode,
}

/// Sensor mounting pose: position plus heading about +z in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose {
    pub origin: Vec3,
    pub yaw_deg: f64,
}

impl SensorModel {
    pub fn channels(&self) -> usize {
        self.vertical_angles.len()
    }

    pub fn beams_per_frame(&self) -> usize {
        self.channels() * self.azimuth_steps as usize
    }

    pub fn azimuth_step_deg(&self) -> f64 {
        360.0 / self.azimuth_steps as f64
    }

    /// Sensor-frame azimuth of an azimuth index, degrees in `[0, 360)`.
    pub fn azimuth_deg(&self, azimuth_index: u32) -> f64 {
        azimuth_index as f64 * self.azimuth_step_deg()
    }

    /// Nearest azimuth index for a recorded sensor-frame azimuth.
    pub fn azimuth_index(&self, azimuth_deg: f64) -> u32 {
        let idx = (azimuth_deg / self.azimuth_step_deg()).round() as i64;
        idx.rem_euclid(self.azimuth_steps as i64) as u32
    }

    pub fn calib(&self) -> IntensityCalib {
        IntensityCalib {
            scale: self.intensity_scale,
            threshold: self.detection_threshold,
        }
    }

    /// World-frame unit direction of beam `(channel, azimuth_index)`.
    pub fn beam_direction(&self, channel: u16, azimuth_index: u32, yaw_deg: f64) -> Vec3 {
        let elevation = self.vertical_angles[channel as usize].to_radians();
        let azimuth = (self.azimuth_deg(azimuth_index) + yaw_deg).to_radians();
        let (se, ce) = elevation.sin_cos();
        let (sa, ca) = azimuth.sin_cos();
        Vec3::new(ce * ca, ce * sa, se)
    }

    pub fn beam(&self, pose: &Pose, channel: u16, azimuth_index: u32) -> Ray {
        Ray {
            origin: pose.origin,
            direction: self.beam_direction(channel, azimuth_index, pose.yaw_deg),
            channel,
            azimuth_index,
        }
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        if self.vertical_angles.is_empty() {
            return Err(ValidationError::new("vertical_angles", "must not be empty"));
        }
        if self.vertical_angles.len() > u16::MAX as usize {
            return Err(ValidationError::new(
                "vertical_angles",
                "has too many channels",
            ));
        }
        if !self
            .vertical_angles
            .iter()
            .all(|a| a.is_finite() && a.abs() <= 90.0)
        {
            return Err(ValidationError::new(
                "vertical_angles",
                "must be finite and within [-90, 90] degrees",
            ));
        }
        if !self.vertical_angles.windows(2).all(|w| w[0] <= w[1]) {
            return Err(ValidationError::new(
                "vertical_angles",
                "must be sorted ascending",
            ));
        }
        if self.azimuth_steps == 0 {
            return Err(ValidationError::new("azimuth_steps", "must be >= 1"));
        }
        if !(self.min_range.is_finite() && self.min_range >= 0.0) {
            return Err(ValidationError::new("min_range", "must be >= 0"));
        }
        if !(self.max_range.is_finite() && self.max_range > self.min_range) {
            return Err(ValidationError::new("max_range", "must be > min_range"));
        }
        if !(self.range_noise_sigma.is_finite() && self.range_noise_sigma >= 0.0) {
            return Err(ValidationError::new("range_noise_sigma", "must be >= 0"));
        }
        if !(self.detection_threshold >= 0.0 && self.detection_threshold < INTENSITY_MAX) {
            return Err(ValidationError::new(
                "detection_threshold",
                "must be in [0, 255)",
            ));
        }
        if !(self.intensity_scale.is_finite() && self.intensity_scale > 0.0) {
            return Err(ValidationError::new("intensity_scale", "must be > 0"));
        }
        if !(self.rotation_rate.is_finite() && self.rotation_rate > 0.0) {
            return Err(ValidationError::new("rotation_rate", "must be > 0"));
        }
        Ok(())
    }
}

/// Datasheet-derived device presets: `"vlp16"` and `"os1-64"`.
pub fn preset(name: &str) -> Result<SensorModel, ConfigError> {
    match name {
        "vlp16" => Ok(SensorModel {
            name: name.to_string(),
            vertical_angles: (0..16).map(|i| -15.0 + 2.0 * i as f64).collect(),
            azimuth_steps: 1800,
            min_range: 0.5,
            max_range: 100.0,
            range_noise_sigma: DEFAULT_RANGE_NOISE_SIGMA,
            detection_threshold: DEFAULT_DETECTION_THRESHOLD,
            intensity_scale: DEFAULT_INTENSITY_SCALE,
            rotation_rate: 10.0,
            return_mode: ReturnMode::First,
        }),
        "os1-64" => Ok(SensorModel {
            name: name.to_string(),
            vertical_angles: (0..64).map(|i| -22.5 + 45.0 * i as f64 / 63.0).collect(),
            azimuth_steps: 1024,
            min_range: 0.8,
            max_range: 120.0,
            range_noise_sigma: DEFAULT_RANGE_NOISE_SIGMA,
            detection_threshold: DEFAULT_DETECTION_THRESHOLD,
            intensity_scale: DEFAULT_INTENSITY_SCALE,
            rotation_rate: 10.0,
            return_mode: ReturnMode::First,
        }),
        _ => Err(ConfigError::UnknownPreset {
            name: name.to_string(),
            valid: PRESET_NAMES.map(|n| format!("\"{n}\"")).join(", "),
        }),
    }
}

/// One revolution of beams in channel-major order.
pub fn scan_rays(sensor: &SensorModel, pose: &Pose) -> Vec<Ray> {
    let mut rays = Vec::with_capacity(sensor.beams_per_frame());
    for channel in 0..sensor.channels() as u16 {
        for a in 0..sensor.azimuth_steps {
            rays.push(sensor.beam(pose, channel, a));
        }
    }
    rays
}

/// Monostatic Lambertian return `K * rho * T^2 / R^2`.
pub fn target_return_intensity(
    reflectivity: f64,
    range: f64,
    transmittance: f64,
    calib: &IntensityCalib,
) -> f64 {
    calib.scale * reflectivity * transmittance * transmittance / (range * range)
}

/// A detection as reported by the device.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub range: f64,
    pub intensity: u8,
}

/// Thresholds, range-gates and quantizes a candidate return.
///
/// `noise_draw` is a standard-normal variate; the reported range is kept inside
/// `[min_range, max_range]`.
pub fn detect(
    intensity: f64,
    range: f64,
    sensor: &SensorModel,
    noise_draw: f64,
) -> Option<Detection> {
    // Written so that a NaN intensity is rejected.
    #[allow(clippy::neg_cmp_op_on_partial_ord)]
    let below = !(intensity >= sensor.detection_threshold);
    if below || range < sensor.min_range || range > sensor.max_range {
        return None;
    }
    let reported =
        (range + sensor.range_noise_sigma * noise_draw).clamp(sensor.min_range, sensor.max_range);
    Some(Detection {
        range: reported,
        intensity: quantize_intensity(intensity),
    })
}

pub fn quantize_intensity(intensity: f64) -> u8 {
    intensity.clamp(0.0, INTENSITY_MAX).round() as u8
}
