//! Point-cloud representation, furthest point sampling, serialization, and
//! the synthetic shape generator.

mod fps;
mod io;
mod synthetic;

pub use fps::furthest_point_sample;
pub use io::{read_cloud_binary, read_cloud_text, write_cloud_binary, write_cloud_text};
pub use synthetic::{generate_synthetic, synthetic_categories, synthetic_template, SyntheticShapeSpec};

use crate::error::{Error, Result};

/// A set of 3D points in model units.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub shape_id: String,
    pub points: Vec<[f64; 3]>,
}

impl PointCloud {
    /// Builds a cloud, rejecting empty or non-finite input.
    pub fn new(shape_id: impl Into<String>, points: Vec<[f64; 3]>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidArgument(
                "point cloud must contain at least one point".into(),
            ));
        }
        for (i, p) in points.iter().enumerate() {
            if !p.iter().all(|c| c.is_finite()) {
                return Err(Error::InvalidData(format!(
                    "non-finite coordinate at point {i}: {p:?}"
                )));
            }
        }
        Ok(PointCloud {
            shape_id: shape_id.into(),
            points,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Selects a subset of the cloud by point indices.
    pub fn select(&self, indices: &[usize]) -> PointCloud {
        PointCloud {
            shape_id: self.shape_id.clone(),
            points: indices.iter().map(|&i| self.points[i]).collect(),
        }
    }
}

/// Centers the cloud at its centroid and scales it so the farthest point sits
/// at distance 1 from the origin. A cloud whose points all coincide is only
/// centered.
pub fn normalize(cloud: &PointCloud) -> Result<PointCloud> {
    let n = cloud.len() as f64;
    let mut centroid = [0.0f64; 3];
    for p in &cloud.points {
        for (c, v) in centroid.iter_mut().zip(p) {
            if !v.is_finite() {
                return Err(Error::InvalidData(format!(
                    "non-finite coordinate in shape {}",
                    cloud.shape_id
                )));
            }
            *c += v;
        }
    }
    for c in centroid.iter_mut() {
        *c /= n;
    }
    let mut centered: Vec<[f64; 3]> = cloud
        .points
        .iter()
        .map(|p| [p[0] - centroid[0], p[1] - centroid[1], p[2] - centroid[2]])
        .collect();
    let max_norm = centered
        .iter()
        .map(|p| (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt())
        .fold(0.0f64, f64::max);
    if max_norm > 0.0 {
        for p in centered.iter_mut() {
            for c in p.iter_mut() {
                *c /= max_norm;
            }
        }
    }
    Ok(PointCloud {
        shape_id: cloud.shape_id.clone(),
        points: centered,
    })
}

pub(crate) fn squared_distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cloud(points: Vec<[f64; 3]>) -> PointCloud {
        PointCloud::new("t", points).unwrap()
    }

    #[test]
    fn normalize_symmetric_pair() {
        let c = cloud(vec![[2.0, 0.0, 0.0], [-2.0, 0.0, 0.0]]);
        let out = normalize(&c).unwrap();
        assert_eq!(out.points, vec![[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]);
    }

    #[test]
    fn normalize_single_point_is_centered_without_scaling() {
        let c = cloud(vec![[3.0, -1.0, 7.5]]);
        let out = normalize(&c).unwrap();
        assert_eq!(out.points, vec![[0.0, 0.0, 0.0]]);
    }

    #[test]
    fn normalize_random_cloud_has_unit_max_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let pts: Vec<[f64; 3]> = (0..64)
                .map(|_| [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)])
                .collect();
            let out = normalize(&cloud(pts)).unwrap();
            let max_norm = out
                .points
                .iter()
                .map(|p| (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt())
                .fold(0.0f64, f64::max);
            assert!((max_norm - 1.0).abs() < 1e-12, "max norm {max_norm}");
        }
    }

    #[test]
    fn non_finite_input_is_rejected() {
        assert!(PointCloud::new("t", vec![[f64::NAN, 0.0, 0.0]]).is_err());
        let mut c = cloud(vec![[0.0, 0.0, 0.0]]);
        c.points[0][1] = f64::INFINITY;
        assert!(normalize(&c).is_err());
    }

    #[test]
    fn empty_cloud_is_rejected() {
        assert!(PointCloud::new("t", vec![]).is_err());
    }
}
