//! Hierarchical mIoU over the whole template tree.
//!
//! A point counts toward a node's prediction set when its predicted
//! root-to-node path contains that node; the ground-truth set is the ancestor
//! chain of the point's instance node. IoU is pooled per tree node across
//! shapes and averaged over nodes with support.

use super::report::{Cell, EvalReport};
use crate::annotation::{point_nodes, Annotation};
use crate::error::{Error, NodeId, Result};
use crate::parallel::map_slice;
use crate::template::{full_path_label, Template};

/// One shape's predicted per-point label paths plus ground truth.
///
/// Predicted paths may contain augmented "other" leaf ids; any id not in the
/// original template counts as its parent only (it is simply skipped).
#[derive(Debug, Clone)]
pub struct HierShape {
    pub shape_id: String,
    pub predicted_paths: Vec<Vec<NodeId>>,
    pub ground_truth: Annotation,
}

pub fn hierarchical_miou(shapes: &[HierShape], template: &Template) -> Result<EvalReport> {
    let nodes = template.dfs_order();
    for shape in shapes {
        if shape.predicted_paths.len() != shape.ground_truth.point_count {
            return Err(Error::InvalidArgument(format!(
                "shape {}: {} predicted paths for {} points",
                shape.shape_id,
                shape.predicted_paths.len(),
                shape.ground_truth.point_count
            )));
        }
    }

    // per shape, per node: (intersection, union)
    let per_shape: Vec<Result<Vec<(u64, u64)>>> = map_slice(shapes, |shape| {
        let gt_nodes = point_nodes(&shape.ground_truth);
        let mut node_counts = vec![(0u64, 0u64); nodes.len()];
        for (point, gt_node) in gt_nodes.iter().enumerate() {
            // drop ground-truth-unlabeled points
            let Some(gt_node) = gt_node else { continue };
            let gt_chain = template.ancestors_inclusive(*gt_node)?;
            let pred_path: Vec<NodeId> = shape.predicted_paths[point]
                .iter()
                .copied()
                .filter(|id| template.contains(*id))
                .collect();
            validate_chain(&pred_path, template, &shape.shape_id, point)?;
            for (ni, node) in nodes.iter().enumerate() {
                let in_gt = gt_chain.contains(node);
                let in_pred = pred_path.contains(node);
                if in_gt && in_pred {
                    node_counts[ni].0 += 1;
                }
                if in_gt || in_pred {
                    node_counts[ni].1 += 1;
                }
            }
        }
        Ok(node_counts)
    });
    let per_shape: Vec<Vec<(u64, u64)>> = per_shape.into_iter().collect::<Result<_>>()?;

    let mut report = EvalReport::new("hierarchical_miou");
    let cells = report.per_part_category.entry(0).or_default();
    for (ni, &node) in nodes.iter().enumerate() {
        let inter: u64 = per_shape.iter().map(|s| s[ni].0).sum();
        let union: u64 = per_shape.iter().map(|s| s[ni].1).sum();
        if union > 0 {
            cells.insert(
                full_path_label(template, node)?,
                Cell {
                    score: inter as f64 / union as f64,
                    support: union,
                },
            );
        }
    }
    report.recompute_aggregates();
    Ok(report)
}

fn validate_chain(
    path: &[NodeId],
    template: &Template,
    shape_id: &str,
    point: usize,
) -> Result<()> {
    if path.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "shape {shape_id}, point {point}: empty predicted path"
        )));
    }
    if path[0] != template.root() {
        return Err(Error::InvalidArgument(format!(
            "shape {shape_id}, point {point}: predicted path does not start at the root"
        )));
    }
    for pair in path.windows(2) {
        if template.parent_of(pair[1]) != Some(pair[0]) {
            return Err(Error::InvalidArgument(format!(
                "shape {shape_id}, point {point}: {} -> {} is not a template edge",
                pair[0], pair[1]
            )));
        }
    }
    Ok(())
}
