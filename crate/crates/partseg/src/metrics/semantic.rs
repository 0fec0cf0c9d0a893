//! Per-level semantic segmentation mIoU, in the part-category and shape
//! averaging conventions.

use std::collections::BTreeMap;

use super::report::{Cell, EvalReport};
use crate::annotation::LevelLabels;
use crate::error::{Error, Result};
use crate::parallel::map_slice;
use crate::template::{full_path_label, Template};

/// One evaluated shape: per-point predicted labels against flattened ground
/// truth at the same level. Label ids follow the `LevelLabels` convention
/// (0 unlabeled, then 1-based positions on the sorted level cut).
#[derive(Debug, Clone)]
pub struct SemanticPair {
    pub shape_id: String,
    pub predicted: Vec<u32>,
    pub ground_truth: LevelLabels,
}

/// How per-part-category IoU combines evidence from multiple shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MiouPooling {
    /// Sum intersections and unions over shapes before dividing (default).
    Pooled,
    /// Average per-shape IoUs over shapes where the category occurs.
    PerShapeAveraged,
}

fn check_pairs(pairs: &[SemanticPair], template: &Template, level: u8) -> Result<usize> {
    let cut = template.level_cut(level)?;
    let label_count = cut.len();
    for pair in pairs {
        if pair.ground_truth.level != level {
            return Err(Error::InvalidArgument(format!(
                "shape {}: ground truth flattened at level {}, expected {}",
                pair.shape_id, pair.ground_truth.level, level
            )));
        }
        if pair.predicted.len() != pair.ground_truth.semantic.len() {
            return Err(Error::InvalidArgument(format!(
                "shape {}: {} predictions for {} points",
                pair.shape_id,
                pair.predicted.len(),
                pair.ground_truth.semantic.len()
            )));
        }
        if let Some(&bad) = pair.predicted.iter().find(|&&l| l as usize > label_count) {
            return Err(Error::InvalidData(format!(
                "shape {}: predicted label {} outside the {} level-{} categories",
                pair.shape_id, bad, label_count, level
            )));
        }
    }
    Ok(label_count)
}

/// Per-shape intersection and union counts for one category.
fn shape_counts(pair: &SemanticPair, label: u32) -> (u64, u64) {
    let mut inter = 0u64;
    let mut union = 0u64;
    for (&pred, &gt) in pair.predicted.iter().zip(&pair.ground_truth.semantic) {
        if gt == 0 {
            continue; // ground-truth-unlabeled points are dropped
        }
        let in_pred = pred == label;
        let in_gt = gt == label;
        if in_pred && in_gt {
            inter += 1;
        }
        if in_pred || in_gt {
            union += 1;
        }
    }
    (inter, union)
}

/// Part-category mIoU: IoU per part semantics across all test shapes, then
/// the mean over part categories with support.
pub fn semantic_part_category_miou(
    pairs: &[SemanticPair],
    template: &Template,
    level: u8,
    pooling: MiouPooling,
) -> Result<EvalReport> {
    let label_count = check_pairs(pairs, template, level)?;
    let cut: Vec<u32> = template.level_cut(level)?.iter().copied().collect();

    // per shape, per category: (intersection, union)
    let per_shape: Vec<Vec<(u64, u64)>> = map_slice(pairs, |pair| {
        (1..=label_count as u32)
            .map(|label| shape_counts(pair, label))
            .collect()
    });

    let mut report = EvalReport::new("part_category_miou");
    let cells = report.per_part_category.entry(level).or_default();
    for (ci, &node) in cut.iter().enumerate() {
        let label = full_path_label(template, node)?;
        match pooling {
            MiouPooling::Pooled => {
                let inter: u64 = per_shape.iter().map(|s| s[ci].0).sum();
                let union: u64 = per_shape.iter().map(|s| s[ci].1).sum();
                if union > 0 {
                    cells.insert(
                        label,
                        Cell {
                            score: inter as f64 / union as f64,
                            support: union,
                        },
                    );
                }
            }
            MiouPooling::PerShapeAveraged => {
                let mut sum = 0.0;
                let mut shapes = 0u64;
                for s in &per_shape {
                    let (inter, union) = s[ci];
                    if union > 0 {
                        sum += inter as f64 / union as f64;
                        shapes += 1;
                    }
                }
                if shapes > 0 {
                    cells.insert(
                        label,
                        Cell {
                            score: sum / shapes as f64,
                            support: shapes,
                        },
                    );
                }
            }
        }
    }
    report.recompute_aggregates();
    Ok(report)
}

/// Shape mIoU: per shape, the mean IoU over categories present in the ground
/// truth or the prediction, then the mean over shapes.
pub fn semantic_shape_miou(
    pairs: &[SemanticPair],
    template: &Template,
    level: u8,
) -> Result<EvalReport> {
    let label_count = check_pairs(pairs, template, level)?;

    let scores: Vec<(String, Cell)> = map_slice(pairs, |pair| {
        let mut present: BTreeMap<u32, (u64, u64)> = BTreeMap::new();
        for label in 1..=label_count as u32 {
            let (inter, union) = shape_counts(pair, label);
            if union > 0 {
                present.insert(label, (inter, union));
            }
        }
        let cell = if present.is_empty() {
            Cell { score: 0.0, support: 0 }
        } else {
            let sum: f64 = present
                .values()
                .map(|&(i, u)| i as f64 / u as f64)
                .sum();
            Cell {
                score: sum / present.len() as f64,
                support: present.len() as u64,
            }
        };
        (pair.shape_id.clone(), cell)
    });

    let mut report = EvalReport::new("shape_miou");
    for (shape_id, cell) in scores {
        report.per_shape.insert(shape_id, cell);
    }
    // keyed by the evaluated level for presentation
    let labeled: Vec<&Cell> = report.per_shape.values().collect();
    if !labeled.is_empty() {
        let mean = labeled.iter().map(|c| c.score).sum::<f64>() / labeled.len() as f64;
        report.per_level.insert(level, mean);
        report.overall = mean;
    }
    Ok(report)
}
