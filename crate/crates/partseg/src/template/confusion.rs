//! Multi-annotator agreement analysis over full-path leaf labels.

use super::{augment_other, full_path_label, Template, OTHER_LABEL};
use crate::annotation::{point_nodes, Annotation};
use crate::error::{Error, Result};

/// Point-label confusion between two annotations of the same shape.
///
/// Rows index the first (reference) annotation's labels, columns the second's.
/// Labels are full root-to-leaf paths over the "other"-augmented template, so
/// points attached above the leaf level land on their parent's `other` leaf.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfusionMatrix {
    pub labels: Vec<String>,
    pub counts: Vec<Vec<u64>>,
    pub row_normalized: Vec<Vec<f64>>,
}

impl ConfusionMatrix {
    pub fn label_count(&self) -> usize {
        self.labels.len()
    }
}

/// Builds the label confusion matrix between annotations `a` and `b`.
///
/// Points unlabeled in either annotation contribute to no cell, so each
/// non-empty row of `row_normalized` sums to one.
pub fn confusion_matrix(
    a: &Annotation,
    b: &Annotation,
    template: &Template,
) -> Result<ConfusionMatrix> {
    if a.shape_id != b.shape_id {
        return Err(Error::IncompatibleAnnotations(format!(
            "shape ids differ: {:?} vs {:?}",
            a.shape_id, b.shape_id
        )));
    }
    if a.point_count != b.point_count {
        return Err(Error::IncompatibleAnnotations(format!(
            "point counts differ: {} vs {}",
            a.point_count, b.point_count
        )));
    }

    let augmented = augment_other(template)?;
    // leaf label space in depth-first order
    let leaf_ids = augmented.leaves();
    let labels: Vec<String> = leaf_ids
        .iter()
        .map(|&id| full_path_label(&augmented, id).expect("leaf exists"))
        .collect();
    // original node -> index of the effective leaf label
    let effective_index = |node: u32| -> Option<usize> {
        if augmented.is_leaf(node) && template.contains(node) {
            return leaf_ids.iter().position(|&l| l == node);
        }
        // internal node: its points map to the "other" child
        let other = augmented
            .node(node)
            .ok()?
            .children
            .iter()
            .copied()
            .find(|&c| augmented.node(c).map(|n| n.label == OTHER_LABEL).unwrap_or(false))?;
        leaf_ids.iter().position(|&l| l == other)
    };

    let nodes_a = point_nodes(a);
    let nodes_b = point_nodes(b);
    let mut counts = vec![vec![0u64; labels.len()]; labels.len()];
    for (na, nb) in nodes_a.iter().zip(&nodes_b) {
        let (Some(na), Some(nb)) = (na, nb) else {
            continue;
        };
        let (Some(i), Some(j)) = (effective_index(*na), effective_index(*nb)) else {
            continue;
        };
        counts[i][j] += 1;
    }

    let row_normalized = counts
        .iter()
        .map(|row| {
            let total: u64 = row.iter().sum();
            if total == 0 {
                vec![0.0; row.len()]
            } else {
                row.iter().map(|&c| c as f64 / total as f64).collect()
            }
        })
        .collect();

    Ok(ConfusionMatrix {
        labels,
        counts,
        row_normalized,
    })
}

/// Mean of the diagonal of `row_normalized` over rows with support.
pub fn consistency_score(matrix: &ConfusionMatrix) -> Result<f64> {
    let mut sum = 0.0;
    let mut rows = 0usize;
    for (i, row) in matrix.counts.iter().enumerate() {
        if row.iter().sum::<u64>() > 0 {
            sum += matrix.row_normalized[i][i];
            rows += 1;
        }
    }
    if rows == 0 {
        return Err(Error::UndefinedScore(
            "confusion matrix has no labeled points".into(),
        ));
    }
    Ok(sum / rows as f64)
}

/// Consistency averaged over both annotation orderings, for callers that do
/// not want to privilege either annotator as the reference.
pub fn symmetric_consistency_score(
    a: &Annotation,
    b: &Annotation,
    template: &Template,
) -> Result<f64> {
    let ab = consistency_score(&confusion_matrix(a, b, template)?)?;
    let ba = consistency_score(&confusion_matrix(b, a, template)?)?;
    Ok(0.5 * (ab + ba))
}

/// Off-diagonal cells ranked by confusion rate, the review queue for manual
/// template refinement (merge or remove ambiguous concepts).
pub fn top_confusions(matrix: &ConfusionMatrix, limit: usize) -> Vec<(String, String, f64)> {
    let mut cells = Vec::new();
    for i in 0..matrix.label_count() {
        for j in 0..matrix.label_count() {
            if i != j && matrix.counts[i][j] > 0 {
                cells.push((i, j, matrix.row_normalized[i][j]));
            }
        }
    }
    cells.sort_by(|a, b| b.2.partial_cmp(&a.2).unwrap().then((a.0, a.1).cmp(&(b.0, b.1))));
    cells
        .into_iter()
        .take(limit)
        .map(|(i, j, v)| (matrix.labels[i].clone(), matrix.labels[j].clone(), v))
        .collect()
}
