//! Dust-cloud optics: a bounded volume of identical spherical particles.
//!
//! Single-scattering Beer–Lambert model. Each cloud has extinction coefficient
//! `alpha = N * Q_ext * pi * r^2`; a beam's first interaction is drawn from the
//! exponential free-path distribution and returns light toward the sensor with
//! strength `K * albedo * exp(-tau_pre) / t^2`, where `tau_pre` is the optical depth
//! crossed before the event (the return trip). Target returns are attenuated by
//! `T^2`, since the sensor is monostatic.

use std::f64::consts::PI;

use crate::error::ValidationError;
use crate::geom::{Ray, Vec3};
use crate::scene::{intersect_box, intersect_ellipsoid, Aabb, CloudSegment, Ellipsoid};
use crate::sensor::IntensityCalib;

pub const DEFAULT_EXTINCTION_EFFICIENCY: f64 = 2.0;
pub const DEFAULT_BACKSCATTER_ALBEDO: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CloudShape {
    Box(Aabb),
    Ellipsoid(Ellipsoid),
}

impl CloudShape {
    pub fn intersect(&self, ray: &Ray) -> Option<(f64, f64)> {
        match self {
            CloudShape::Box(b) => intersect_box(ray, b),
            CloudShape::Ellipsoid(e) => intersect_ellipsoid(ray, e),
        }
    }

    pub fn contains(&self, p: Vec3) -> bool {
        match self {
            CloudShape::Box(b) => b.contains(p, 0.0),
            CloudShape::Ellipsoid(e) => e.contains(p),
        }
    }

    pub fn center(&self) -> Vec3 {
        match self {
            CloudShape::Box(b) => b.center,
            CloudShape::Ellipsoid(e) => e.center,
        }
    }

    pub fn with_center(&self, center: Vec3) -> CloudShape {
        match *self {
            CloudShape::Box(b) => CloudShape::Box(Aabb { center, ..b }),
            CloudShape::Ellipsoid(e) => CloudShape::Ellipsoid(Ellipsoid { center, ..e }),
        }
    }

    /// Half-width of the shape's projection onto the horizontal unit direction `(cos, sin, 0)`.
    pub fn support_along(&self, cos: f64, sin: f64) -> f64 {
        match self {
            CloudShape::Box(b) => b.half_extents.x * cos.abs() + b.half_extents.y * sin.abs(),
            CloudShape::Ellipsoid(e) => {
                ((e.semi_axes.x * cos).powi(2) + (e.semi_axes.y * sin).powi(2)).sqrt()
            }
        }
    }

    fn extents(&self) -> (&'static str, Vec3, Vec3) {
        match self {
            CloudShape::Box(b) => ("box", b.center, b.half_extents),
            CloudShape::Ellipsoid(e) => ("ellipsoid", e.center, e.semi_axes),
        }
    }
}

/// A bounded participating medium of homogeneous spherical particles.
#[derive(Debug, Clone, PartialEq)]
pub struct DustCloud {
    pub id: u32,
    pub shape: CloudShape,
    /// Particles per m³.
    pub number_density: f64,
    /// Particle radius in meters.
    pub particle_radius: f64,
    pub extinction_efficiency: f64,
    /// Lumped fraction of extinguished light returned into the receiver.
    pub backscatter_albedo: f64,
}

impl DustCloud {
    /// Cloud with default optical parameters (`Q_ext = 2`, albedo 0.5).
    pub fn new(id: u32, shape: CloudShape, number_density: f64, particle_radius: f64) -> Self {
        Self {
            id,
            shape,
            number_density,
            particle_radius,
            extinction_efficiency: DEFAULT_EXTINCTION_EFFICIENCY,
            backscatter_albedo: DEFAULT_BACKSCATTER_ALBEDO,
        }
    }

    pub fn alpha(&self) -> f64 {
        extinction_coefficient(self)
    }

    pub fn validate(&self) -> Result<(), ValidationError> {
        if !(self.number_density.is_finite() && self.number_density >= 0.0) {
            return Err(ValidationError::new("number_density", "must be >= 0"));
        }
        if !(self.particle_radius.is_finite() && self.particle_radius > 0.0) {
            return Err(ValidationError::new("particle_radius", "must be > 0"));
        }
        if !(self.extinction_efficiency.is_finite() && self.extinction_efficiency > 0.0) {
            return Err(ValidationError::new("extinction_efficiency", "must be > 0"));
        }
        if !(0.0..=1.0).contains(&self.backscatter_albedo) {
            return Err(ValidationError::new(
                "backscatter_albedo",
                "must be in [0, 1]",
            ));
        }
        let (kind, center, ext) = self.shape.extents();
        if !center.is_finite() {
            return Err(ValidationError::new(
                format!("{kind}.center"),
                "must be finite",
            ));
        }
        if !(ext.is_finite() && ext.min_elem() > 0.0) {
            let name = if kind == "box" {
                "half_extents"
            } else {
                "semi_axes"
            };
            return Err(ValidationError::new(
                format!("{kind}.{name}"),
                "must be strictly positive and finite",
            ));
        }
        Ok(())
    }
}

/// `alpha = N * Q_ext * pi * r^2`, in 1/m.
pub fn extinction_coefficient(cloud: &DustCloud) -> f64 {
    cloud.number_density * cloud.extinction_efficiency * PI * cloud.particle_radius.powi(2)
}

/// Sum of `alpha_i * L_i` over `(alpha, length)` pairs.
pub fn optical_depth(segments: &[(f64, f64)]) -> f64 {
    segments.iter().map(|&(a, l)| a * l).sum()
}

/// Beer–Lambert transmittance `exp(-sum alpha_i * L_i)`.
pub fn transmittance(segments: &[(f64, f64)]) -> f64 {
    (-optical_depth(segments)).exp()
}

/// A disjoint interval of constant extinction, produced by [`merge_segments`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalSegment {
    pub t_in: f64,
    pub t_out: f64,
    /// Summed extinction of all clouds covering the interval.
    pub alpha: f64,
    /// Cloud credited with scatter events here: the largest contributor, lowest id on ties.
    pub cloud_id: u32,
}

impl OpticalSegment {
    pub fn length(&self) -> f64 {
        self.t_out - self.t_in
    }

    pub fn optical_depth(&self) -> f64 {
        self.alpha * self.length()
    }
}

/// Splits possibly overlapping cloud intervals into disjoint sub-segments with summed `alpha`.
///
/// `alpha_of` maps a cloud id to its extinction coefficient.
pub fn merge_segments(
    segments: &[CloudSegment],
    alpha_of: impl Fn(u32) -> f64,
) -> Vec<OpticalSegment> {
    let mut out = Vec::with_capacity(segments.len());
    merge_segments_into(segments, alpha_of, &mut out);
    out
}

/// Allocation-reusing form of [`merge_segments`]; clears `out` first.
pub fn merge_segments_into(
    segments: &[CloudSegment],
    alpha_of: impl Fn(u32) -> f64,
    out: &mut Vec<OpticalSegment>,
) {
    out.clear();
    let disjoint = segments.windows(2).all(|w| w[0].t_out <= w[1].t_in);
    if disjoint {
        out.extend(
            segments
                .iter()
                .filter(|s| s.t_out > s.t_in)
                .map(|s| OpticalSegment {
                    t_in: s.t_in,
                    t_out: s.t_out,
                    alpha: alpha_of(s.cloud_id),
                    cloud_id: s.cloud_id,
                }),
        );
        return;
    }

    let mut cuts: Vec<f64> = segments.iter().flat_map(|s| [s.t_in, s.t_out]).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mid = 0.5 * (a + b);
        let mut alpha = 0.0;
        let mut dominant: Option<(f64, u32)> = None;
        for s in segments.iter().filter(|s| s.t_in <= mid && mid < s.t_out) {
            let a_i = alpha_of(s.cloud_id);
            alpha += a_i;
            let take = match dominant {
                None => true,
                Some((best, id)) => a_i > best || (a_i == best && s.cloud_id < id),
            };
            if take {
                dominant = Some((a_i, s.cloud_id));
            }
        }
        if let Some((_, cloud_id)) = dominant {
            out.push(OpticalSegment {
                t_in: a,
                t_out: b,
                alpha,
                cloud_id,
            });
        }
    }
}

/// First interaction of a beam with the medium.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatterEvent {
    pub cloud_id: u32,
    /// Range along the beam, meters.
    pub t_scatter: f64,
    /// In-cloud distance traversed before the event, meters.
    pub depth_in_cloud: f64,
    /// Optical depth traversed before the event (equals the sampled `-ln u`).
    pub optical_depth: f64,
}

/// Exponential free-path sampling over disjoint, sorted segments.
///
/// Targets optical depth `-ln(u)` and inverts linearly inside the segment where it is
/// reached. `None` means the beam crosses every segment unscattered.
pub fn sample_scatter(segments: &[OpticalSegment], u: f64) -> Option<ScatterEvent> {
    debug_assert!(u > 0.0 && u < 1.0, "u must be in (0, 1), got {u}");
    let target = -u.ln();
    let mut tau = 0.0;
    let mut depth = 0.0;
    for seg in segments {
        let seg_tau = seg.optical_depth();
        if seg.alpha > 0.0 && tau + seg_tau >= target {
            let dt = ((target - tau) / seg.alpha).min(seg.length());
            return Some(ScatterEvent {
                cloud_id: seg.cloud_id,
                t_scatter: seg.t_in + dt,
                depth_in_cloud: depth + dt,
                optical_depth: target,
            });
        }
        tau += seg_tau;
        depth += seg.length();
    }
    None
}

/// Backscatter intensity `K * albedo * exp(-tau_pre) / t^2` of a scatter event.
///
/// The outbound attenuation is already carried by the sampling distribution, so only
/// the return trip through the cloud is applied here.
pub fn dust_return_intensity(
    event: &ScatterEvent,
    cloud: &DustCloud,
    calib: &IntensityCalib,
) -> f64 {
    calib.scale * cloud.backscatter_albedo * (-event.optical_depth).exp()
        / (event.t_scatter * event.t_scatter)
}
