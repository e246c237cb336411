//! Seeded generation of test point clouds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zigrips::metric::{MetricKind, PointCloud};

/// `n` points drawn uniformly from the unit square.
pub fn uniform_square(n: usize, seed: u64) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts = (0..n)
        .map(|_| vec![rng.gen::<f64>(), rng.gen::<f64>()])
        .collect();
    PointCloud::new(pts, MetricKind::Euclidean).expect("nonempty cloud")
}

/// `n` points equally spaced on the unit circle.
pub fn circle(n: usize) -> PointCloud {
    let pts = (0..n)
        .map(|i| {
            let angle = 2.0 * std::f64::consts::PI * (i as f64) / (n as f64);
            vec![angle.cos(), angle.sin()]
        })
        .collect();
    PointCloud::new(pts, MetricKind::Euclidean).expect("nonempty cloud")
}

/// Renders a cloud in the point-file format.
pub fn to_point_file(cloud: &PointCloud) -> String {
    let mut out = String::new();
    for i in 0..cloud.len() {
        let coords: Vec<String> = cloud
            .point(i)
            .iter()
            .map(|c| zigrips::textio::format_f64(*c))
            .collect();
        out.push_str(&coords.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic() {
        let a = uniform_square(10, 7);
        let b = uniform_square(10, 7);
        for i in 0..10 {
            assert_eq!(a.point(i), b.point(i));
        }
        let c = uniform_square(10, 8);
        assert_ne!(a.point(0), c.point(0));
    }

    #[test]
    fn circle_points_on_unit_radius() {
        let c = circle(12);
        for i in 0..12 {
            let p = c.point(i);
            let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
            assert!((r - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn point_file_roundtrip() {
        let c = uniform_square(5, 3);
        let text = to_point_file(&c);
        let parsed = zigrips::metric::parse_points(&text, MetricKind::Euclidean).unwrap();
        for i in 0..5 {
            assert_eq!(c.point(i), parsed.point(i));
        }
    }
}
