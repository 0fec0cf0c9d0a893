//! Average precision for part-instance detection, in the part-category and
//! shape averaging conventions.

use std::collections::BTreeMap;

use super::report::{Cell, EvalReport};
use super::set_iou;
use crate::annotation::PredictedInstance;
use crate::error::{Error, Result};
use crate::template::{full_path_label, Template};

/// One shape's predicted masks and ground-truth instances at a fixed level.
/// Ground-truth entries are (semantic id, sorted point indices).
#[derive(Debug, Clone)]
pub struct InstanceShape {
    pub shape_id: String,
    pub predicted: Vec<PredictedInstance>,
    pub ground_truth: Vec<(u32, Vec<usize>)>,
}

#[derive(Debug, Clone, Copy)]
struct PredRef<'a> {
    confidence: f64,
    shape_index: usize,
    mask_index: usize,
    points: &'a [usize],
}

/// Average precision per semantic label id at the given IoU threshold.
///
/// Predictions are ranked by confidence (ties broken by shape id, then mask
/// order) and greedily matched one-to-one to same-category ground truth in
/// the same shape when the exact set IoU exceeds the threshold. The returned
/// cells carry the ground-truth instance count as support. Labels absent from
/// both prediction and ground truth do not appear.
pub fn instance_ap(
    shapes: &[InstanceShape],
    iou_threshold: f64,
) -> Result<BTreeMap<u32, Cell>> {
    for shape in shapes {
        for (mi, mask) in shape.predicted.iter().enumerate() {
            if !(0.0..=1.0).contains(&mask.confidence) || !mask.confidence.is_finite() {
                return Err(Error::InvalidData(format!(
                    "shape {}, mask {}: confidence {} outside [0, 1]",
                    shape.shape_id, mi, mask.confidence
                )));
            }
        }
    }

    // stable ordering of shapes by id for the confidence tie-break
    let mut shape_order: Vec<usize> = (0..shapes.len()).collect();
    shape_order.sort_by(|&a, &b| shapes[a].shape_id.cmp(&shapes[b].shape_id));

    let mut labels: std::collections::BTreeSet<u32> = std::collections::BTreeSet::new();
    for shape in shapes {
        labels.extend(shape.predicted.iter().map(|m| m.semantic));
        labels.extend(shape.ground_truth.iter().map(|g| g.0));
    }

    let mut result = BTreeMap::new();
    for &label in &labels {
        let mut preds: Vec<PredRef> = Vec::new();
        let mut total_gt = 0usize;
        for &si in &shape_order {
            let shape = &shapes[si];
            total_gt += shape.ground_truth.iter().filter(|g| g.0 == label).count();
            for (mi, mask) in shape.predicted.iter().enumerate() {
                if mask.semantic == label {
                    preds.push(PredRef {
                        confidence: mask.confidence,
                        shape_index: si,
                        mask_index: mi,
                        points: &mask.points,
                    });
                }
            }
        }
        // confidence descending; ties already in (shape id, mask order)
        preds.sort_by(|a, b| b.confidence.partial_cmp(&a.confidence).unwrap());

        let ap = if total_gt == 0 {
            0.0
        } else {
            compute_ap(&preds, shapes, label, iou_threshold, total_gt)
        };
        result.insert(
            label,
            Cell {
                score: ap,
                support: total_gt as u64,
            },
        );
    }
    Ok(result)
}

fn compute_ap(
    preds: &[PredRef],
    shapes: &[InstanceShape],
    label: u32,
    iou_threshold: f64,
    total_gt: usize,
) -> f64 {
    // per shape: matched flags over its ground-truth instances
    let mut matched: BTreeMap<usize, Vec<bool>> = BTreeMap::new();
    let mut tp_flags = Vec::with_capacity(preds.len());
    for pred in preds {
        let shape = &shapes[pred.shape_index];
        let flags = matched
            .entry(pred.shape_index)
            .or_insert_with(|| vec![false; shape.ground_truth.len()]);
        let mut best: Option<(usize, f64)> = None;
        for (gi, (gt_label, gt_points)) in shape.ground_truth.iter().enumerate() {
            if *gt_label != label || flags[gi] {
                continue;
            }
            let iou = set_iou(pred.points, gt_points);
            if best.map(|(_, b)| iou > b).unwrap_or(true) {
                best = Some((gi, iou));
            }
        }
        match best {
            Some((gi, iou)) if iou > iou_threshold => {
                flags[gi] = true;
                tp_flags.push(true);
            }
            _ => tp_flags.push(false),
        }
    }

    // precision at each prediction rank, then the monotone envelope
    let mut precisions = Vec::with_capacity(tp_flags.len());
    let mut recalls = Vec::with_capacity(tp_flags.len());
    let mut tp = 0usize;
    for (rank, &is_tp) in tp_flags.iter().enumerate() {
        if is_tp {
            tp += 1;
        }
        precisions.push(tp as f64 / (rank + 1) as f64);
        recalls.push(tp as f64 / total_gt as f64);
    }
    let mut envelope = precisions.clone();
    for i in (0..envelope.len().saturating_sub(1)).rev() {
        envelope[i] = envelope[i].max(envelope[i + 1]);
    }
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for (i, &recall) in recalls.iter().enumerate() {
        ap += (recall - prev_recall) * envelope[i];
        prev_recall = recall;
    }
    ap
}

fn label_paths(template: &Template, level: u8) -> Result<Vec<String>> {
    template
        .level_cut(level)?
        .iter()
        .map(|&node| full_path_label(template, node))
        .collect()
}

fn check_semantics(shapes: &[InstanceShape], label_count: usize) -> Result<()> {
    for shape in shapes {
        for mask in &shape.predicted {
            if mask.semantic == 0 || mask.semantic as usize > label_count {
                return Err(Error::InvalidData(format!(
                    "shape {}: mask semantic {} outside 1..={}",
                    shape.shape_id, mask.semantic, label_count
                )));
            }
        }
    }
    Ok(())
}

/// Part-category mAP: AP per part semantics across all test shapes, averaged
/// over the categories present in ground truth or predictions.
pub fn instance_part_category_map(
    shapes: &[InstanceShape],
    template: &Template,
    level: u8,
    iou_threshold: f64,
) -> Result<EvalReport> {
    let paths = label_paths(template, level)?;
    check_semantics(shapes, paths.len())?;
    let aps = instance_ap(shapes, iou_threshold)?;
    let mut report = EvalReport::new("part_category_map");
    let cells = report.per_part_category.entry(level).or_default();
    for (label, cell) in aps {
        cells.insert(paths[label as usize - 1].clone(), cell);
    }
    report.recompute_aggregates();
    Ok(report)
}

/// Shape mAP: per shape, the mean AP over categories present in that shape's
/// ground truth or prediction, averaged over shapes.
pub fn instance_shape_map(
    shapes: &[InstanceShape],
    template: &Template,
    level: u8,
    iou_threshold: f64,
) -> Result<EvalReport> {
    let paths = label_paths(template, level)?;
    check_semantics(shapes, paths.len())?;
    let mut report = EvalReport::new("shape_map");
    for shape in shapes {
        let single = std::slice::from_ref(shape);
        let aps = instance_ap(single, iou_threshold)?;
        let cell = if aps.is_empty() {
            Cell { score: 0.0, support: 0 }
        } else {
            let sum: f64 = aps.values().map(|c| c.score).sum();
            Cell {
                score: sum / aps.len() as f64,
                support: aps.len() as u64,
            }
        };
        report.per_shape.insert(shape.shape_id.clone(), cell);
    }
    if !report.per_shape.is_empty() {
        let mean =
            report.per_shape.values().map(|c| c.score).sum::<f64>() / report.per_shape.len() as f64;
        report.per_level.insert(level, mean);
        report.overall = mean;
    }
    Ok(report)
}
