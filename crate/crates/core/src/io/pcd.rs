//! ASCII PCD v0.7 writer.

use std::fmt::Write as _;

use crate::sim::Frame;

pub fn write_pcd(frame: &Frame) -> String {
    let n = frame.returns.len();
    let mut out = String::with_capacity(256 + n * 48);
    out.push_str("# .PCD v0.7 - Point Cloud Data file format\n");
    out.push_str("VERSION 0.7\n");
    out.push_str("FIELDS x y z intensity ring\n");
    out.push_str("SIZE 4 4 4 1 2\n");
    out.push_str("TYPE F F F U U\n");
    out.push_str("COUNT 1 1 1 1 1\n");
    let _ = writeln!(out, "WIDTH {n}");
    out.push_str("HEIGHT 1\n");
    out.push_str("VIEWPOINT 0 0 0 1 0 0 0\n");
    let _ = writeln!(out, "POINTS {n}");
    out.push_str("DATA ascii\n");
    for r in &frame.returns {
        let _ = writeln!(
            out,
            "{:.6} {:.6} {:.6} {} {}",
            r.point.x, r.point.y, r.point.z, r.intensity, r.channel
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Vec3;
    use crate::sim::{LidarReturn, ReturnKind};

    fn frame(n: usize) -> Frame {
        let returns = (0..n)
            .map(|i| LidarReturn {
                channel: i as u16,
                azimuth_index: 0,
                azimuth_deg: 0.0,
                elevation_deg: 0.0,
                range: 10.0,
                intensity: 42,
                kind: ReturnKind::Target(0),
                point: Vec3::new(1.234_567_89, -2.0 + i as f64, 0.000_01),
            })
            .collect();
        Frame {
            frame_id: 0,
            sensor_name: "vlp16".into(),
            seed: 0,
            returns,
            dropped_count: 0,
        }
    }

    #[test]
    fn empty_frame_has_zero_width() {
        let text = write_pcd(&frame(0));
        assert!(text.contains("\nWIDTH 0\n") && text.contains("\nPOINTS 0\n"));
        assert!(text.ends_with("DATA ascii\n"));
    }

    #[test]
    fn header_matches_rows_and_coordinates() {
        let f = frame(3);
        let text = write_pcd(&f);
        let data: Vec<&str> = text.split("DATA ascii\n").nth(1).unwrap().lines().collect();
        assert_eq!(data.len(), 3);
        assert!(text.contains("\nWIDTH 3\n"));
        for (row, r) in data.iter().zip(&f.returns) {
            let v: Vec<f64> = row.split(' ').map(|s| s.parse().unwrap()).collect();
            assert!((v[0] - r.point.x).abs() < 1e-4);
            assert!((v[1] - r.point.y).abs() < 1e-4);
            assert!((v[2] - r.point.z).abs() < 1e-4);
            assert_eq!(v[3], 42.0);
            assert_eq!(v[4], r.channel as f64);
        }
    }
}
