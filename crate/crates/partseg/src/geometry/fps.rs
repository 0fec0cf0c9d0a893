use super::{squared_distance, PointCloud};
use crate::error::{Error, Result};

/// Greedy furthest point sampling.
///
/// Selection starts at index 0; every following pick maximizes the minimum
/// Euclidean distance to the points already selected, breaking ties toward
/// the lowest index. The result is therefore deterministic for a given cloud.
pub fn furthest_point_sample(cloud: &PointCloud, k: usize) -> Result<Vec<usize>> {
    let n = cloud.len();
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!(
            "k must satisfy 1 <= k <= {n}, got {k}"
        )));
    }
    let mut selected = Vec::with_capacity(k);
    selected.push(0usize);
    // min squared distance from each point to the selected set
    let mut min_d2: Vec<f64> = cloud
        .points
        .iter()
        .map(|p| squared_distance(p, &cloud.points[0]))
        .collect();
    for _ in 1..k {
        let next = argmax_tie_lowest(&min_d2);
        selected.push(next);
        let np = cloud.points[next];
        update_min_distances(&mut min_d2, &cloud.points, &np);
    }
    Ok(selected)
}

fn update_min_distances(min_d2: &mut [f64], points: &[[f64; 3]], new_point: &[f64; 3]) {
    const PAR_THRESHOLD: usize = 8192;
    if cfg!(feature = "parallel") && points.len() >= PAR_THRESHOLD {
        let chunk = 2048;
        let updates: Vec<Vec<f64>> = crate::parallel::map_range(
            (points.len() + chunk - 1) / chunk,
            |ci| {
                let lo = ci * chunk;
                let hi = (lo + chunk).min(points.len());
                (lo..hi)
                    .map(|i| min_d2[i].min(squared_distance(&points[i], new_point)))
                    .collect()
            },
        );
        let mut i = 0;
        for block in updates {
            for v in block {
                min_d2[i] = v;
                i += 1;
            }
        }
    } else {
        for (d, p) in min_d2.iter_mut().zip(points) {
            let cand = squared_distance(p, new_point);
            if cand < *d {
                *d = cand;
            }
        }
    }
}

fn argmax_tie_lowest(values: &[f64]) -> usize {
    let mut best = 0usize;
    let mut best_v = values[0];
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > best_v {
            best = i;
            best_v = v;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn line_cloud(xs: &[f64]) -> PointCloud {
        PointCloud::new("t", xs.iter().map(|&x| [x, 0.0, 0.0]).collect()).unwrap()
    }

    #[test]
    fn hand_simulated_greedy_with_tie_break() {
        let c = line_cloud(&[0.0, 10.0, 1.0, 9.0]);
        assert_eq!(furthest_point_sample(&c, 3).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn k_equals_n_is_a_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<[f64; 3]> = (0..17)
            .map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            .collect();
        let c = PointCloud::new("t", pts).unwrap();
        let mut idx = furthest_point_sample(&c, 17).unwrap();
        idx.sort_unstable();
        assert_eq!(idx, (0..17).collect::<Vec<_>>());
    }

    #[test]
    fn k_one_returns_start_index() {
        let c = line_cloud(&[5.0, 6.0]);
        assert_eq!(furthest_point_sample(&c, 1).unwrap(), vec![0]);
    }

    #[test]
    fn invalid_k_is_rejected() {
        let c = line_cloud(&[0.0, 1.0]);
        assert!(furthest_point_sample(&c, 0).is_err());
        assert!(furthest_point_sample(&c, 3).is_err());
    }

    #[test]
    fn min_pairwise_distance_is_non_increasing_in_k() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let pts: Vec<[f64; 3]> = (0..60)
            .map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            .collect();
        let c = PointCloud::new("t", pts).unwrap();
        let order = furthest_point_sample(&c, 60).unwrap();
        let mut prev = f64::INFINITY;
        for k in 2..=60 {
            let chosen = &order[..k];
            let mut min_pair = f64::INFINITY;
            for i in 0..k {
                for j in (i + 1)..k {
                    let d = squared_distance(&c.points[chosen[i]], &c.points[chosen[j]]).sqrt();
                    min_pair = min_pair.min(d);
                }
            }
            assert!(min_pair <= prev + 1e-12, "k={k}: {min_pair} > {prev}");
            prev = min_pair;
        }
    }

    #[test]
    fn deterministic_across_runs() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let pts: Vec<[f64; 3]> = (0..500)
            .map(|_| [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
            .collect();
        let c = PointCloud::new("t", pts).unwrap();
        let a = furthest_point_sample(&c, 100).unwrap();
        let b = furthest_point_sample(&c, 100).unwrap();
        assert_eq!(a, b);
    }
}
