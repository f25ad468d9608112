//! Opaque scene geometry and exact ray intersection.
//!
//! Targets are axis-aligned boxes or triangle lists with a Lambertian reflectivity.
//! Cloud boundaries (boxes and ellipsoids) are intersected here too so that the
//! medium model only ever sees parametric in-cloud intervals.

use std::collections::HashSet;

use crate::error::ValidationError;
use crate::geom::{Ray, Vec3};
use crate::medium::DustCloud;

/// Smallest triangle area accepted by [`Scene::new`], in m².
pub const MIN_TRIANGLE_AREA: f64 = 1e-12;

/// Direction components smaller than this are treated as parallel to a slab.
const PARALLEL_EPS: f64 = 1e-15;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub center: Vec3,
    pub half_extents: Vec3,
}

impl Aabb {
    pub fn new(center: Vec3, half_extents: Vec3) -> Self {
        Self {
            center,
            half_extents,
        }
    }

    /// Box spanning `[min, max]` on every axis.
    pub fn from_min_max(min: Vec3, max: Vec3) -> Self {
        Self {
            center: (min + max) * 0.5,
            half_extents: (max - min) * 0.5,
        }
    }

    pub fn min(&self) -> Vec3 {
        self.center - self.half_extents
    }

    pub fn max(&self) -> Vec3 {
        self.center + self.half_extents
    }

    pub fn contains(&self, p: Vec3, tol: f64) -> bool {
        let d = (p - self.center).abs();
        d.x <= self.half_extents.x + tol
            && d.y <= self.half_extents.y + tol
            && d.z <= self.half_extents.z + tol
    }

    fn validate(&self) -> Result<(), ValidationError> {
        if !self.center.is_finite() {
            return Err(ValidationError::new("center", "must be finite"));
        }
        let h = self.half_extents;
        if !(h.is_finite() && h.min_elem() > 0.0) {
            return Err(ValidationError::new(
                "half_extents",
                "must be strictly positive and finite",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ellipsoid {
    pub center: Vec3,
    pub semi_axes: Vec3,
}

impl Ellipsoid {
    pub fn contains(&self, p: Vec3) -> bool {
        let q = (p - self.center).div_elem(self.semi_axes);
        q.dot(q) <= 1.0
    }
}

/// Geometry of an opaque target.
#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    Box(Aabb),
    Triangles(Vec<[Vec3; 3]>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneObject {
    pub id: u32,
    pub geometry: Geometry,
    /// Lambertian reflectivity in `[0, 1]`.
    pub reflectivity: f64,
    pub label: String,
}

impl SceneObject {
    pub fn new_box(id: u32, label: &str, aabb: Aabb, reflectivity: f64) -> Self {
        Self {
            id,
            geometry: Geometry::Box(aabb),
            reflectivity,
            label: label.to_string(),
        }
    }

    /// Range to the first opaque surface along `ray`, if any.
    ///
    /// A ray starting inside a box reports the exit face, so a single box can
    /// stand in for an enclosing room.
    pub fn intersect(&self, ray: &Ray) -> Option<f64> {
        match &self.geometry {
            Geometry::Box(b) => {
                let (t0, t1) = intersect_box(ray, b)?;
                if t0 > 0.0 {
                    Some(t0)
                } else if t1 > 0.0 {
                    Some(t1)
                } else {
                    None
                }
            }
            Geometry::Triangles(tris) => tris
                .iter()
                .filter_map(|tri| intersect_triangle(ray, tri))
                .min_by(f64::total_cmp),
        }
    }

    fn validate(&self) -> Result<(), ValidationError> {
        if !(0.0..=1.0).contains(&self.reflectivity) {
            return Err(ValidationError::new("reflectivity", "must be in [0, 1]"));
        }
        match &self.geometry {
            Geometry::Box(b) => b.validate().map_err(|e| e.within("box")),
            Geometry::Triangles(tris) => {
                if tris.is_empty() {
                    return Err(ValidationError::new("triangles", "must not be empty"));
                }
                for (i, tri) in tris.iter().enumerate() {
                    if !tri.iter().all(|v| v.is_finite()) {
                        return Err(ValidationError::new(
                            format!("triangles[{i}]"),
                            "must have finite vertices",
                        ));
                    }
                    if triangle_area(tri) <= MIN_TRIANGLE_AREA {
                        return Err(ValidationError::new(
                            format!("triangles[{i}]"),
                            "is degenerate (area must be > 1e-12 m²)",
                        ));
                    }
                }
                Ok(())
            }
        }
    }
}

/// Nearest opaque intersection along a ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub object_id: u32,
    pub range: f64,
}

/// A validated, immutable list of opaque objects.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Scene {
    objects: Vec<SceneObject>,
}

impl Scene {
    pub fn new(objects: Vec<SceneObject>) -> Result<Self, ValidationError> {
        let mut seen = HashSet::new();
        for (i, obj) in objects.iter().enumerate() {
            obj.validate()
                .map_err(|e| e.within(format!("scene[{i}]")))?;
            if !seen.insert(obj.id) {
                return Err(ValidationError::new(
                    format!("scene[{i}].id"),
                    format!("must be unique ({} is repeated)", obj.id),
                ));
            }
        }
        Ok(Self { objects })
    }

    pub fn objects(&self) -> &[SceneObject] {
        &self.objects
    }

    pub fn get(&self, id: u32) -> Option<&SceneObject> {
        self.objects.iter().find(|o| o.id == id)
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn nearest_hit(&self, ray: &Ray) -> Option<Hit> {
        nearest_hit(ray, &self.objects)
    }
}

fn triangle_area(tri: &[Vec3; 3]) -> f64 {
    0.5 * (tri[1] - tri[0]).cross(tri[2] - tri[0]).length()
}

/// Slab test. Returns the parametric overlap of `ray` with `aabb`, clipped to `t >= 0`.
pub fn intersect_box(ray: &Ray, aabb: &Aabb) -> Option<(f64, f64)> {
    let lo = aabb.min();
    let hi = aabb.max();
    let mut t_enter = 0.0_f64;
    let mut t_exit = f64::INFINITY;
    for axis in 0..3 {
        let o = ray.origin[axis];
        let d = ray.direction[axis];
        if d.abs() < PARALLEL_EPS {
            if o < lo[axis] || o > hi[axis] {
                return None;
            }
            continue;
        }
        let inv = 1.0 / d;
        let (mut t0, mut t1) = ((lo[axis] - o) * inv, (hi[axis] - o) * inv);
        if t0 > t1 {
            std::mem::swap(&mut t0, &mut t1);
        }
        t_enter = t_enter.max(t0);
        t_exit = t_exit.min(t1);
        if t_enter > t_exit {
            return None;
        }
    }
    Some((t_enter, t_exit))
}

/// Ray/ellipsoid intersection by scaling to the unit sphere, clipped to `t >= 0`.
pub fn intersect_ellipsoid(ray: &Ray, ellipsoid: &Ellipsoid) -> Option<(f64, f64)> {
    let o = (ray.origin - ellipsoid.center).div_elem(ellipsoid.semi_axes);
    let d = ray.direction.div_elem(ellipsoid.semi_axes);
    let a = d.dot(d);
    let b = o.dot(d);
    let c = o.dot(o) - 1.0;
    let disc = b * b - a * c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    // Numerically stable root pair.
    let q = if b >= 0.0 { -(b + sq) } else { -b + sq };
    let (mut t0, mut t1) = if q == 0.0 { (0.0, 0.0) } else { (q / a, c / q) };
    if t0 > t1 {
        std::mem::swap(&mut t0, &mut t1);
    }
    if t1 < 0.0 {
        return None;
    }
    Some((t0.max(0.0), t1))
}

/// Möller–Trumbore. Returns the smallest `t > 0` at which the ray crosses the triangle.
pub fn intersect_triangle(ray: &Ray, tri: &[Vec3; 3]) -> Option<f64> {
    const EPS: f64 = 1e-12;
    let e1 = tri[1] - tri[0];
    let e2 = tri[2] - tri[0];
    let p = ray.direction.cross(e2);
    let det = e1.dot(p);
    if det.abs() < EPS {
        return None;
    }
    let inv_det = 1.0 / det;
    let s = ray.origin - tri[0];
    let u = s.dot(p) * inv_det;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let q = s.cross(e1);
    let v = ray.direction.dot(q) * inv_det;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = e2.dot(q) * inv_det;
    (t > EPS).then_some(t)
}

/// Minimum-range opaque intersection over `objects`; ties go to the lower id.
pub fn nearest_hit(ray: &Ray, objects: &[SceneObject]) -> Option<Hit> {
    let mut best: Option<Hit> = None;
    for obj in objects {
        let Some(range) = obj.intersect(ray) else {
            continue;
        };
        let better = match best {
            None => true,
            Some(b) => range < b.range || (range == b.range && obj.id < b.object_id),
        };
        if better {
            best = Some(Hit {
                object_id: obj.id,
                range,
            });
        }
    }
    best
}

/// One in-cloud interval along a ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CloudSegment {
    pub cloud_id: u32,
    pub t_in: f64,
    pub t_out: f64,
}

impl CloudSegment {
    pub fn length(&self) -> f64 {
        self.t_out - self.t_in
    }
}

/// In-cloud intervals along `ray`, clipped to `[0, max_t]` and sorted by `t_in`.
///
/// Intervals from different clouds may overlap; see [`crate::medium::merge_segments`].
pub fn cloud_segments(ray: &Ray, clouds: &[DustCloud], max_t: f64) -> Vec<CloudSegment> {
    let mut out = Vec::new();
    cloud_segments_into(ray, clouds, max_t, &mut out);
    out
}

/// Allocation-reusing form of [`cloud_segments`]; clears `out` first.
pub fn cloud_segments_into(
    ray: &Ray,
    clouds: &[DustCloud],
    max_t: f64,
    out: &mut Vec<CloudSegment>,
) {
    out.clear();
    for cloud in clouds {
        if let Some((t0, t1)) = cloud.shape.intersect(ray) {
            let t_out = t1.min(max_t);
            if t0 < t_out {
                out.push(CloudSegment {
                    cloud_id: cloud.id,
                    t_in: t0,
                    t_out,
                });
            }
        }
    }
    out.sort_by(|a, b| a.t_in.total_cmp(&b.t_in).then(a.cloud_id.cmp(&b.cloud_id)));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::medium::CloudShape;

    fn ray(o: [f64; 3], d: [f64; 3]) -> Ray {
        Ray::new(o.into(), d.into(), 0, 0)
    }

    fn unit_box_at(x: f64) -> Aabb {
        Aabb::new(Vec3::new(x, 0.0, 0.0), Vec3::new(1.0, 1.0, 1.0))
    }

    #[test]
    fn box_head_on() {
        let r = ray([0.0; 3], [1.0, 0.0, 0.0]);
        assert_eq!(intersect_box(&r, &unit_box_at(5.0)), Some((4.0, 6.0)));
    }

    #[test]
    fn box_perpendicular_miss() {
        let r = ray([0.0; 3], [0.0, 1.0, 0.0]);
        assert_eq!(intersect_box(&r, &unit_box_at(5.0)), None);
    }

    #[test]
    fn box_interior_origin_clips_to_zero() {
        let r = ray([0.0; 3], [1.0, 0.0, 0.0]);
        let b = Aabb::new(Vec3::ZERO, Vec3::new(2.0, 2.0, 2.0));
        assert_eq!(intersect_box(&r, &b), Some((0.0, 2.0)));
    }

    #[test]
    fn box_behind_origin() {
        let r = ray([0.0; 3], [-1.0, 0.0, 0.0]);
        assert_eq!(intersect_box(&r, &unit_box_at(5.0)), None);
    }

    #[test]
    fn triangle_straight_down() {
        let tri = [
            Vec3::ZERO,
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
        ];
        let r = ray([0.1, 0.1, 1.0], [0.0, 0.0, -1.0]);
        let t = intersect_triangle(&r, &tri).unwrap();
        assert!((t - 1.0).abs() < 1e-12);
        let miss = ray([2.0, 2.0, 1.0], [0.0, 0.0, -1.0]);
        assert_eq!(intersect_triangle(&miss, &tri), None);
    }

    #[test]
    fn triangle_oblique() {
        // Crosses z = 0 at (0.5, 0.5, 0): t = 2 * |(0.25, 0.25, -1)|.
        let tri = [
            Vec3::ZERO,
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
        ];
        let r = ray([0.0, 0.0, 2.0], [0.25, 0.25, -1.0]);
        let expected = 2.0 * (0.25f64 * 0.25 + 0.25 * 0.25 + 1.0).sqrt();
        let t = intersect_triangle(&r, &tri).unwrap();
        assert!((t - expected).abs() < 1e-12);
        assert!((t - 2.1213).abs() < 1e-4);
    }

    #[test]
    fn nearest_hit_picks_closest_then_lowest_id() {
        let car = SceneObject::new_box(
            7,
            "car",
            Aabb::from_min_max(Vec3::new(16.0, -1.0, -1.0), Vec3::new(20.0, 1.0, 1.0)),
            0.5,
        );
        let truck = SceneObject::new_box(
            3,
            "truck",
            Aabb::from_min_max(Vec3::new(40.0, -1.0, -1.0), Vec3::new(50.0, 1.0, 1.0)),
            0.5,
        );
        let r = ray([0.0; 3], [1.0, 0.0, 0.0]);
        let hit = nearest_hit(&r, &[truck.clone(), car.clone()]).unwrap();
        assert_eq!(
            hit,
            Hit {
                object_id: 7,
                range: 16.0
            }
        );
        assert_eq!(nearest_hit(&r, &[]), None);

        let twin = SceneObject {
            id: 2,
            ..car.clone()
        };
        let hit = nearest_hit(&r, &[car, twin]).unwrap();
        assert_eq!(hit.object_id, 2);
    }

    #[test]
    fn scene_rejects_bad_objects() {
        let good = SceneObject::new_box(0, "a", unit_box_at(5.0), 0.5);
        let dup = Scene::new(vec![good.clone(), good.clone()]).unwrap_err();
        assert_eq!(dup.field, "scene[1].id");

        let bad_rho = SceneObject {
            reflectivity: 1.5,
            ..good.clone()
        };
        assert_eq!(
            Scene::new(vec![bad_rho]).unwrap_err().field,
            "scene[0].reflectivity"
        );

        let flat = SceneObject::new_box(
            0,
            "flat",
            Aabb::new(Vec3::ZERO, Vec3::new(1.0, 0.0, 1.0)),
            0.5,
        );
        assert_eq!(
            Scene::new(vec![flat]).unwrap_err().field,
            "scene[0].box.half_extents"
        );

        let degenerate = SceneObject {
            geometry: Geometry::Triangles(vec![[
                Vec3::ZERO,
                Vec3::new(1.0, 0.0, 0.0),
                Vec3::new(2.0, 0.0, 0.0),
            ]]),
            ..good
        };
        assert_eq!(
            Scene::new(vec![degenerate]).unwrap_err().field,
            "scene[0].triangles[0]"
        );
    }

    #[test]
    fn interior_origin_hits_exit_face() {
        let room = SceneObject::new_box(
            0,
            "room",
            Aabb::new(Vec3::ZERO, Vec3::new(10.0, 10.0, 10.0)),
            0.5,
        );
        let r = ray([0.0; 3], [1.0, 0.0, 0.0]);
        assert_eq!(room.intersect(&r), Some(10.0));
    }

    fn box_cloud(id: u32, x0: f64, x1: f64) -> DustCloud {
        DustCloud::new(
            id,
            CloudShape::Box(Aabb::from_min_max(
                Vec3::new(x0, -3.0, -3.0),
                Vec3::new(x1, 3.0, 3.0),
            )),
            1e9,
            5e-6,
        )
    }

    #[test]
    fn cloud_segments_clip_and_sort() {
        let r = ray([0.0; 3], [1.0, 0.0, 0.0]);
        let c = box_cloud(0, 6.0, 10.0);
        let segs = cloud_segments(&r, std::slice::from_ref(&c), 16.0);
        assert_eq!(
            segs,
            vec![CloudSegment {
                cloud_id: 0,
                t_in: 6.0,
                t_out: 10.0
            }]
        );
        let segs = cloud_segments(&r, std::slice::from_ref(&c), 8.0);
        assert_eq!(segs[0].t_out, 8.0);
        assert!(cloud_segments(&r, &[], 16.0).is_empty());
        // Entirely beyond max_t.
        assert!(cloud_segments(&r, &[box_cloud(1, 20.0, 30.0)], 16.0).is_empty());

        let segs = cloud_segments(&r, &[box_cloud(5, 12.0, 14.0), c], 100.0);
        assert_eq!(segs.iter().map(|s| s.cloud_id).collect::<Vec<_>>(), [0, 5]);
    }

    #[test]
    fn ellipsoid_sphere_case() {
        let e = Ellipsoid {
            center: Vec3::new(10.0, 0.0, 0.0),
            semi_axes: Vec3::new(2.0, 2.0, 2.0),
        };
        let r = ray([0.0; 3], [1.0, 0.0, 0.0]);
        let (a, b) = intersect_ellipsoid(&r, &e).unwrap();
        assert!((a - 8.0).abs() < 1e-12 && (b - 12.0).abs() < 1e-12);
        let inside = ray([10.0, 0.0, 0.0], [0.0, 0.0, 1.0]);
        let (a, b) = intersect_ellipsoid(&inside, &e).unwrap();
        assert_eq!(a, 0.0);
        assert!((b - 2.0).abs() < 1e-12);
        let miss = ray([0.0, 5.0, 0.0], [1.0, 0.0, 0.0]);
        assert!(intersect_ellipsoid(&miss, &e).is_none());
    }
}
