//! Segmentation metrics: the relaxed IoU primitive, part-category and shape
//! mIoU, hierarchical mIoU, and instance-detection mAP.

mod hierarchical;
mod instance;
mod report;
mod semantic;

pub use hierarchical::{hierarchical_miou, HierShape};
pub use instance::{instance_ap, instance_part_category_map, instance_shape_map, InstanceShape};
pub use report::{merge_level_reports, Cell, EvalReport};
pub use semantic::{semantic_part_category_miou, semantic_shape_miou, MiouPooling, SemanticPair};

use crate::error::{Error, Result};

/// Per-point soft membership values in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftMask(Vec<f64>);

impl SoftMask {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (i, &v) in values.iter().enumerate() {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::InvalidData(format!(
                    "mask value {v} at point {i} outside [0, 1]"
                )));
            }
        }
        Ok(SoftMask(values))
    }

    /// Binary mask over `n` points from member indices.
    pub fn from_indices(n: usize, indices: &[usize]) -> SoftMask {
        let mut values = vec![0.0; n];
        for &i in indices {
            values[i] = 1.0;
        }
        SoftMask(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Relaxed IoU over soft masks: `<p,q> / (|p|_1 + |q|_1 - <p,q>)`.
///
/// Defined as 0 when both masks are identically zero. Reduces to exact set
/// IoU on binary masks.
pub fn relaxed_iou(p: &SoftMask, q: &SoftMask) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::InvalidArgument(format!(
            "mask lengths differ: {} vs {}",
            p.len(),
            q.len()
        )));
    }
    Ok(relaxed_iou_slices(p.values(), q.values()))
}

/// Unchecked slice form of [`relaxed_iou`] for hot paths; entries must lie in
/// `[0, 1]` and lengths must match.
pub fn relaxed_iou_slices(p: &[f64], q: &[f64]) -> f64 {
    let mut dot = 0.0;
    let mut sum_p = 0.0;
    let mut sum_q = 0.0;
    for (a, b) in p.iter().zip(q) {
        dot += a * b;
        sum_p += a;
        sum_q += b;
    }
    let denom = sum_p + sum_q - dot;
    if denom <= 0.0 {
        0.0
    } else {
        dot / denom
    }
}

/// Exact set IoU for index sets, used as the binarized-mask metric.
pub fn set_iou(a: &[usize], b: &[usize]) -> f64 {
    debug_assert!(a.windows(2).all(|w| w[0] < w[1]));
    debug_assert!(b.windows(2).all(|w| w[0] < w[1]));
    let mut i = 0;
    let mut j = 0;
    let mut inter = 0usize;
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                inter += 1;
                i += 1;
                j += 1;
            }
        }
    }
    let union = a.len() + b.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn identical_binary_masks_score_one() {
        let p = SoftMask::from_indices(6, &[0, 2, 5]);
        assert_eq!(relaxed_iou(&p, &p).unwrap(), 1.0);
    }

    #[test]
    fn disjoint_binary_masks_score_zero() {
        let p = SoftMask::from_indices(6, &[0, 1]);
        let q = SoftMask::from_indices(6, &[2, 3]);
        assert_eq!(relaxed_iou(&p, &q).unwrap(), 0.0);
    }

    #[test]
    fn soft_example_is_one_third() {
        let p = SoftMask::new(vec![0.5, 0.5]).unwrap();
        let q = SoftMask::new(vec![1.0, 0.0]).unwrap();
        assert!((relaxed_iou(&p, &q).unwrap() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn both_zero_masks_define_zero() {
        let z = SoftMask::new(vec![0.0, 0.0, 0.0]).unwrap();
        assert_eq!(relaxed_iou(&z, &z).unwrap(), 0.0);
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let p = SoftMask::new(vec![0.5]).unwrap();
        let q = SoftMask::new(vec![0.5, 0.5]).unwrap();
        assert!(relaxed_iou(&p, &q).is_err());
    }

    #[test]
    fn out_of_range_values_are_rejected() {
        assert!(SoftMask::new(vec![0.5, 1.2]).is_err());
        assert!(SoftMask::new(vec![-0.1]).is_err());
    }

    #[test]
    fn equals_exact_set_iou_on_random_binary_masks() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..1000 {
            let n = rng.gen_range(1..=20usize);
            let a: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.4)).collect();
            let b: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.4)).collect();
            let pa = SoftMask::from_indices(n, &a);
            let pb = SoftMask::from_indices(n, &b);
            let relaxed = relaxed_iou(&pa, &pb).unwrap();
            let exact = set_iou(&a, &b);
            assert!((relaxed - exact).abs() < 1e-12, "{relaxed} vs {exact}");
        }
    }

    #[test]
    fn symmetry_and_self_iou_on_random_soft_masks() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..1000 {
            let n = rng.gen_range(1..=32usize);
            let p = SoftMask::new((0..n).map(|_| rng.gen_range(0.0..=1.0)).collect()).unwrap();
            let q = SoftMask::new((0..n).map(|_| rng.gen_range(0.0..=1.0)).collect()).unwrap();
            let pq = relaxed_iou(&p, &q).unwrap();
            let qp = relaxed_iou(&q, &p).unwrap();
            assert_eq!(pq, qp);
            assert!((0.0..=1.0).contains(&pq));
            if p.values().iter().any(|&v| v > 0.0) {
                assert!((relaxed_iou(&p, &p).unwrap() - 1.0).abs() < 1e-12);
            }
        }
    }
}
