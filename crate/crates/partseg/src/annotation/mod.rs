//! Per-shape instance-tree annotations and their per-level flattening into
//! semantic/instance label vectors.

mod io;
mod split;

pub use io::{
    annotation_from_json, annotation_to_json, read_annotation, read_instance_prediction,
    read_semantic_prediction, write_annotation, write_instance_prediction,
    write_semantic_prediction, InstancePredictionSet, PredictedInstance,
};
pub use split::{fnv1a64, split_dataset};

use std::collections::BTreeMap;

use crate::error::{Error, NodeId, Result};
use crate::template::Template;

/// One node of the instance tree. Point indices may only sit on childless
/// nodes; a childless node whose template node is internal represents a
/// label path that ends above the leaf level.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceNode {
    pub template_node_id: NodeId,
    pub children: Vec<InstanceNode>,
    pub point_indices: Vec<usize>,
}

impl InstanceNode {
    pub fn branch(template_node_id: NodeId, children: Vec<InstanceNode>) -> Self {
        InstanceNode {
            template_node_id,
            children,
            point_indices: Vec::new(),
        }
    }

    pub fn leaf(template_node_id: NodeId, point_indices: Vec<usize>) -> Self {
        InstanceNode {
            template_node_id,
            children: Vec::new(),
            point_indices,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Annotation {
    pub shape_id: String,
    pub category: String,
    pub point_count: usize,
    pub root: InstanceNode,
}

/// A structural problem found while checking an annotation against its
/// template. Violations are data, not errors; an empty list means valid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Instance path of the offending node, e.g. `chair/chair_back[1]`.
    pub path: String,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

/// Flattened per-point view of an annotation at one segmentation level.
///
/// Semantic ids are 1-based positions into `label_nodes` (the level cut in
/// ascending node-id order); 0 means unlabeled. Instance ids are 1-based in
/// instance-tree depth-first order; 0 means none.
#[derive(Debug, Clone, PartialEq)]
pub struct LevelLabels {
    pub level: u8,
    pub semantic: Vec<u32>,
    pub instance: Vec<u32>,
    pub label_nodes: Vec<NodeId>,
    pub instance_semantics: BTreeMap<u32, NodeId>,
}

impl LevelLabels {
    pub fn label_count(&self) -> usize {
        self.label_nodes.len()
    }

    /// Semantic id (1-based) for a cut node id.
    pub fn semantic_id_of(&self, node: NodeId) -> Option<u32> {
        self.label_nodes
            .iter()
            .position(|&n| n == node)
            .map(|p| p as u32 + 1)
    }

    /// Ground-truth instances as (semantic id, sorted point indices), ordered
    /// by instance id.
    pub fn instances(&self) -> Vec<(u32, Vec<usize>)> {
        let mut by_id: BTreeMap<u32, Vec<usize>> = BTreeMap::new();
        for (point, &id) in self.instance.iter().enumerate() {
            if id != 0 {
                by_id.entry(id).or_default().push(point);
            }
        }
        by_id
            .into_iter()
            .map(|(id, points)| {
                let node = self.instance_semantics[&id];
                let sem = self
                    .semantic_id_of(node)
                    .expect("instance semantics node lies on the cut");
                (sem, points)
            })
            .collect()
    }
}

/// Checks every instance-tree invariant against the template and returns the
/// violations found.
pub fn validate_annotation(annotation: &Annotation, template: &Template) -> Vec<Violation> {
    let mut violations = Vec::new();
    if annotation.category != template.category {
        violations.push(Violation {
            path: annotation.shape_id.clone(),
            message: format!(
                "annotation category {:?} does not match template category {:?}",
                annotation.category, template.category
            ),
        });
        return violations;
    }
    if annotation.root.template_node_id != template.root() {
        violations.push(Violation {
            path: annotation.shape_id.clone(),
            message: format!(
                "instance root references template node {} instead of the template root {}",
                annotation.root.template_node_id,
                template.root()
            ),
        });
        return violations;
    }
    let mut seen_points: BTreeMap<usize, String> = BTreeMap::new();
    let root_label = template
        .node(annotation.root.template_node_id)
        .map(|n| n.label.clone())
        .unwrap_or_else(|_| "?".into());
    walk(
        &annotation.root,
        root_label,
        template,
        annotation.point_count,
        &mut seen_points,
        &mut violations,
    );
    violations
}

fn walk(
    node: &InstanceNode,
    path: String,
    template: &Template,
    point_count: usize,
    seen_points: &mut BTreeMap<usize, String>,
    violations: &mut Vec<Violation>,
) {
    if !node.children.is_empty() && !node.point_indices.is_empty() {
        violations.push(Violation {
            path: path.clone(),
            message: "internal instance node carries point indices".into(),
        });
    }
    for &point in &node.point_indices {
        if point >= point_count {
            violations.push(Violation {
                path: path.clone(),
                message: format!("point index {point} out of range (point count {point_count})"),
            });
            continue;
        }
        if let Some(prev) = seen_points.insert(point, path.clone()) {
            violations.push(Violation {
                path: path.clone(),
                message: format!("point {point} already labeled under {prev}"),
            });
        }
    }
    let template_children: Vec<NodeId> = template
        .node(node.template_node_id)
        .map(|n| n.children.clone())
        .unwrap_or_default();
    let mut sibling_counts: BTreeMap<NodeId, usize> = BTreeMap::new();
    for child in &node.children {
        let occurrence = sibling_counts.entry(child.template_node_id).or_insert(0);
        let child_label = template
            .node(child.template_node_id)
            .map(|n| n.label.clone())
            .unwrap_or_else(|_| format!("#{}", child.template_node_id));
        let child_path = format!("{path}/{child_label}[{occurrence}]");
        *occurrence += 1;
        if !template.contains(child.template_node_id) {
            violations.push(Violation {
                path: child_path.clone(),
                message: format!("references unknown template node {}", child.template_node_id),
            });
            continue;
        }
        if !template_children.contains(&child.template_node_id) {
            violations.push(Violation {
                path: child_path.clone(),
                message: format!(
                    "template node {} is not a child of template node {}",
                    child.template_node_id, node.template_node_id
                ),
            });
        }
        walk(child, child_path, template, point_count, seen_points, violations);
    }
}

/// Labels every point by the level-cut node on its instance path, assigning
/// one instance id per maximal instance subtree rooted at a cut node.
pub fn flatten(annotation: &Annotation, template: &Template, level: u8) -> Result<LevelLabels> {
    let cut = template.level_cut(level)?;
    let label_nodes: Vec<NodeId> = cut.iter().copied().collect();
    let mut labels = LevelLabels {
        level,
        semantic: vec![0; annotation.point_count],
        instance: vec![0; annotation.point_count],
        label_nodes,
        instance_semantics: BTreeMap::new(),
    };
    let mut next_instance = 0u32;
    flatten_walk(&annotation.root, None, &mut next_instance, &mut labels)?;
    Ok(labels)
}

fn flatten_walk(
    node: &InstanceNode,
    active: Option<(u32, u32)>, // (instance id, semantic id)
    next_instance: &mut u32,
    labels: &mut LevelLabels,
) -> Result<()> {
    let mut active = active;
    if active.is_none() {
        if let Some(sem) = labels.semantic_id_of(node.template_node_id) {
            *next_instance += 1;
            let id = *next_instance;
            labels
                .instance_semantics
                .insert(id, node.template_node_id);
            active = Some((id, sem));
        }
    }
    if let Some((instance_id, semantic_id)) = active {
        for &point in &node.point_indices {
            if point >= labels.semantic.len() {
                return Err(Error::InvalidData(format!(
                    "point index {point} out of range during flatten"
                )));
            }
            labels.semantic[point] = semantic_id;
            labels.instance[point] = instance_id;
        }
    }
    for child in &node.children {
        flatten_walk(child, active, next_instance, labels)?;
    }
    Ok(())
}

/// Deepest template node per point (the childless instance node holding it).
pub fn point_nodes(annotation: &Annotation) -> Vec<Option<NodeId>> {
    let mut nodes = vec![None; annotation.point_count];
    let mut stack = vec![&annotation.root];
    while let Some(n) = stack.pop() {
        for &p in &n.point_indices {
            if p < nodes.len() {
                nodes[p] = Some(n.template_node_id);
            }
        }
        stack.extend(n.children.iter());
    }
    nodes
}
