//! And-Or-graph part templates: parsing, structural validation, level cuts,
//! "other"-leaf augmentation, and full-path labels.

mod confusion;

pub use confusion::{
    confusion_matrix, consistency_score, symmetric_consistency_score, top_confusions,
    ConfusionMatrix,
};

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, NodeId, Result};

pub const OTHER_LABEL: &str = "other";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NodeKind {
    /// Children are simultaneous subcomponents of the part.
    And,
    /// Children are mutually exclusive subtypes.
    Or,
    Leaf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemplateNode {
    pub node_id: NodeId,
    pub label: String,
    pub kind: NodeKind,
    pub children: Vec<NodeId>,
}

/// A validated part-template tree with named level cuts.
#[derive(Debug, Clone, PartialEq)]
pub struct Template {
    pub category: String,
    root: NodeId,
    nodes: BTreeMap<NodeId, TemplateNode>,
    level_cuts: BTreeMap<u8, BTreeSet<NodeId>>,
    parent: BTreeMap<NodeId, NodeId>,
}

impl Template {
    /// Builds and validates a template from its parts.
    pub fn new(
        category: impl Into<String>,
        root: NodeId,
        nodes: Vec<TemplateNode>,
        level_cuts: BTreeMap<u8, BTreeSet<NodeId>>,
    ) -> Result<Self> {
        let mut map = BTreeMap::new();
        for node in nodes {
            let id = node.node_id;
            if map.insert(id, node).is_some() {
                return Err(Error::Template {
                    node_id: id,
                    message: "duplicate node id".into(),
                });
            }
        }
        if !map.contains_key(&root) {
            return Err(Error::Template {
                node_id: root,
                message: "root node does not exist".into(),
            });
        }

        // child lists reference existing nodes; each node has at most one parent
        let mut parent = BTreeMap::new();
        for (id, node) in &map {
            match node.kind {
                NodeKind::Leaf => {
                    if !node.children.is_empty() {
                        return Err(Error::Template {
                            node_id: *id,
                            message: "leaf node has children".into(),
                        });
                    }
                }
                NodeKind::And | NodeKind::Or => {
                    if node.children.is_empty() {
                        return Err(Error::Template {
                            node_id: *id,
                            message: "internal node has no children".into(),
                        });
                    }
                }
            }
            let mut seen_labels = BTreeSet::new();
            for &child in &node.children {
                let child_node = map.get(&child).ok_or(Error::Template {
                    node_id: child,
                    message: format!("child of node {id} does not exist"),
                })?;
                if !seen_labels.insert(child_node.label.clone()) {
                    return Err(Error::Template {
                        node_id: child,
                        message: format!("duplicate sibling label {:?}", child_node.label),
                    });
                }
                if parent.insert(child, *id).is_some() {
                    return Err(Error::Template {
                        node_id: child,
                        message: "node has more than one parent".into(),
                    });
                }
            }
        }
        if parent.contains_key(&root) {
            return Err(Error::Template {
                node_id: root,
                message: "root node has a parent (cycle through root)".into(),
            });
        }

        // reachability from the root; with unique parents this also rules out cycles
        let mut visited = BTreeSet::new();
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            if !visited.insert(id) {
                return Err(Error::Template {
                    node_id: id,
                    message: "cycle detected".into(),
                });
            }
            stack.extend(map[&id].children.iter().copied());
        }
        if let Some(&orphan) = map.keys().find(|id| !visited.contains(id)) {
            return Err(Error::Template {
                node_id: orphan,
                message: "orphan node unreachable from root".into(),
            });
        }

        let template = Template {
            category: category.into(),
            root,
            nodes: map,
            level_cuts: BTreeMap::new(),
            parent,
        };
        template.validate_cuts(&level_cuts)?;
        Ok(Template {
            level_cuts,
            ..template
        })
    }

    fn validate_cuts(&self, cuts: &BTreeMap<u8, BTreeSet<NodeId>>) -> Result<()> {
        if !cuts.contains_key(&1) {
            return Err(Error::Template {
                node_id: self.root,
                message: "level 1 cut is required".into(),
            });
        }
        for (&level, cut) in cuts {
            if !(1..=3).contains(&level) {
                return Err(Error::Template {
                    node_id: self.root,
                    message: format!("level index {level} outside 1..=3"),
                });
            }
            if cut.is_empty() {
                return Err(Error::Template {
                    node_id: self.root,
                    message: format!("level {level} cut is empty"),
                });
            }
            for &id in cut {
                if !self.nodes.contains_key(&id) {
                    return Err(Error::Template {
                        node_id: id,
                        message: format!("level {level} cut references unknown node"),
                    });
                }
            }
            // antichain: no cut member is an ancestor of another
            for &id in cut {
                let mut cur = id;
                while let Some(&p) = self.parent.get(&cur) {
                    if cut.contains(&p) {
                        return Err(Error::Template {
                            node_id: id,
                            message: format!(
                                "level {level} cut is not an antichain: node {p} is an ancestor"
                            ),
                        });
                    }
                    cur = p;
                }
            }
        }
        Ok(())
    }

    pub fn root(&self) -> NodeId {
        self.root
    }

    pub fn node(&self, id: NodeId) -> Result<&TemplateNode> {
        self.nodes
            .get(&id)
            .ok_or_else(|| Error::NotFound(format!("template node {id}")))
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.nodes.contains_key(&id)
    }

    pub fn parent_of(&self, id: NodeId) -> Option<NodeId> {
        self.parent.get(&id).copied()
    }

    /// Node ids in ascending order.
    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.keys().copied()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn level_cut(&self, level: u8) -> Result<&BTreeSet<NodeId>> {
        self.level_cuts.get(&level).ok_or_else(|| {
            Error::InvalidArgument(format!(
                "level {level} is not defined for category {:?}",
                self.category
            ))
        })
    }

    pub fn levels(&self) -> Vec<u8> {
        self.level_cuts.keys().copied().collect()
    }

    pub fn max_level(&self) -> u8 {
        self.level_cuts.keys().copied().max().unwrap_or(1)
    }

    /// Root-first chain of node ids ending at `id`.
    pub fn ancestors_inclusive(&self, id: NodeId) -> Result<Vec<NodeId>> {
        self.node(id)?;
        let mut chain = vec![id];
        let mut cur = id;
        while let Some(&p) = self.parent.get(&cur) {
            chain.push(p);
            cur = p;
        }
        chain.reverse();
        Ok(chain)
    }

    pub fn is_leaf(&self, id: NodeId) -> bool {
        self.nodes
            .get(&id)
            .map(|n| n.kind == NodeKind::Leaf)
            .unwrap_or(false)
    }

    /// Leaf node ids in depth-first order.
    pub fn leaves(&self) -> Vec<NodeId> {
        self.dfs_order()
            .into_iter()
            .filter(|&id| self.is_leaf(id))
            .collect()
    }

    pub fn internal_nodes(&self) -> Vec<NodeId> {
        self.dfs_order()
            .into_iter()
            .filter(|&id| !self.is_leaf(id))
            .collect()
    }

    /// Depth-first preorder over the tree, children in declared order.
    pub fn dfs_order(&self) -> Vec<NodeId> {
        let mut order = Vec::with_capacity(self.nodes.len());
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            order.push(id);
            let node = &self.nodes[&id];
            for &child in node.children.iter().rev() {
                stack.push(child);
            }
        }
        order
    }

    /// All root-to-leaf node-id paths in depth-first order.
    pub fn root_to_leaf_paths(&self) -> Vec<Vec<NodeId>> {
        let mut paths = Vec::new();
        let mut current = Vec::new();
        self.collect_paths(self.root, &mut current, &mut paths);
        paths
    }

    fn collect_paths(&self, id: NodeId, current: &mut Vec<NodeId>, out: &mut Vec<Vec<NodeId>>) {
        current.push(id);
        let node = &self.nodes[&id];
        if node.children.is_empty() {
            out.push(current.clone());
        } else {
            for &child in &node.children {
                self.collect_paths(child, current, out);
            }
        }
        current.pop();
    }

    /// Warnings for template-design checks that are not hard invariants.
    pub fn lint(&self) -> Vec<String> {
        let mut warnings = Vec::new();
        for (id, node) in &self.nodes {
            if node.kind == NodeKind::Or && node.children.len() == 1 {
                warnings.push(format!(
                    "node {id} ({:?}): Or-node with a single subtype adds no information",
                    node.label
                ));
            }
        }
        warnings
    }
}

/// "/"-joined labels from the root down to `node_id`.
pub fn full_path_label(template: &Template, node_id: NodeId) -> Result<String> {
    let chain = template.ancestors_inclusive(node_id)?;
    let labels: Vec<&str> = chain
        .iter()
        .map(|id| template.node(*id).map(|n| n.label.as_str()))
        .collect::<Result<_>>()?;
    Ok(labels.join("/"))
}

/// Appends an "other" leaf under every internal node that lacks one.
///
/// Fresh node ids continue above the current maximum; existing ids and parent
/// relations are untouched, and applying the operation twice is a no-op.
pub fn augment_other(template: &Template) -> Result<Template> {
    let mut next_id = template.node_ids().max().unwrap_or(0) + 1;
    let mut nodes: Vec<TemplateNode> = template.nodes.values().cloned().collect();
    let mut additions = Vec::new();
    for node in nodes.iter_mut() {
        if node.kind == NodeKind::Leaf {
            continue;
        }
        let has_other = node.children.iter().any(|c| {
            template
                .nodes
                .get(c)
                .map(|n| n.label == OTHER_LABEL)
                .unwrap_or(false)
        });
        if has_other {
            continue;
        }
        additions.push(TemplateNode {
            node_id: next_id,
            label: OTHER_LABEL.to_string(),
            kind: NodeKind::Leaf,
            children: Vec::new(),
        });
        node.children.push(next_id);
        next_id += 1;
    }
    nodes.extend(additions);
    Template::new(
        template.category.clone(),
        template.root,
        nodes,
        template.level_cuts.clone(),
    )
}

#[derive(Debug, Serialize, Deserialize)]
struct NodeDoc {
    id: NodeId,
    label: String,
    kind: NodeKind,
    #[serde(default)]
    children: Vec<NodeId>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TemplateDoc {
    category: String,
    root: NodeId,
    nodes: Vec<NodeDoc>,
    levels: BTreeMap<String, Vec<NodeId>>,
}

/// Parses and validates a template from its JSON document form.
pub fn parse_template(document: &str) -> Result<Template> {
    let doc: TemplateDoc = serde_json::from_str(document)?;
    let nodes = doc
        .nodes
        .into_iter()
        .map(|n| TemplateNode {
            node_id: n.id,
            label: n.label,
            kind: n.kind,
            children: n.children,
        })
        .collect();
    let mut cuts = BTreeMap::new();
    for (key, ids) in doc.levels {
        let level: u8 = key.parse().map_err(|_| {
            Error::InvalidData(format!("level key {key:?} is not an integer"))
        })?;
        cuts.insert(level, ids.into_iter().collect());
    }
    Template::new(doc.category, doc.root, nodes, cuts)
}

/// Serializes a template to its canonical JSON document form.
pub fn template_to_json(template: &Template) -> String {
    let doc = TemplateDoc {
        category: template.category.clone(),
        root: template.root,
        nodes: template
            .nodes
            .values()
            .map(|n| NodeDoc {
                id: n.node_id,
                label: n.label.clone(),
                kind: n.kind,
                children: n.children.clone(),
            })
            .collect(),
        levels: template
            .level_cuts
            .iter()
            .map(|(k, v)| (k.to_string(), v.iter().copied().collect()))
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("template document serializes")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::synthetic_template;

    fn chain_template() -> Template {
        // root -> a -> leaf
        Template::new(
            "chain",
            0,
            vec![
                TemplateNode {
                    node_id: 0,
                    label: "root".into(),
                    kind: NodeKind::And,
                    children: vec![1],
                },
                TemplateNode {
                    node_id: 1,
                    label: "a".into(),
                    kind: NodeKind::And,
                    children: vec![2],
                },
                TemplateNode {
                    node_id: 2,
                    label: "leaf".into(),
                    kind: NodeKind::Leaf,
                    children: vec![],
                },
            ],
            [(1u8, [2].into_iter().collect())].into_iter().collect(),
        )
        .unwrap()
    }

    #[test]
    fn builtin_chair_template_parses() {
        let t = synthetic_template("chair").unwrap();
        let json = template_to_json(&t);
        let parsed = parse_template(&json).unwrap();
        assert_eq!(parsed.node(parsed.root()).unwrap().label, "chair");
        assert_eq!(parsed, t);
    }

    #[test]
    fn self_cycle_is_rejected() {
        let doc = r#"{
            "category": "x", "root": 0,
            "nodes": [{"id": 0, "label": "r", "kind": "and", "children": [0]}],
            "levels": {"1": [0]}
        }"#;
        match parse_template(doc) {
            Err(Error::Template { node_id, .. }) => assert_eq!(node_id, 0),
            other => panic!("expected template error, got {other:?}"),
        }
    }

    #[test]
    fn non_antichain_cut_is_rejected() {
        let doc = r#"{
            "category": "x", "root": 0,
            "nodes": [
                {"id": 0, "label": "r", "kind": "and", "children": [1]},
                {"id": 1, "label": "a", "kind": "leaf", "children": []}
            ],
            "levels": {"1": [0, 1]}
        }"#;
        let err = parse_template(doc).unwrap_err();
        assert!(matches!(err, Error::Template { .. }), "{err:?}");
        assert!(err.to_string().contains("antichain"), "{err}");
    }

    #[test]
    fn orphan_and_duplicate_labels_are_rejected() {
        let orphan = r#"{
            "category": "x", "root": 0,
            "nodes": [
                {"id": 0, "label": "r", "kind": "leaf", "children": []},
                {"id": 5, "label": "stray", "kind": "leaf", "children": []}
            ],
            "levels": {"1": [0]}
        }"#;
        match parse_template(orphan) {
            Err(Error::Template { node_id, .. }) => assert_eq!(node_id, 5),
            other => panic!("expected orphan error, got {other:?}"),
        }
        let dup = r#"{
            "category": "x", "root": 0,
            "nodes": [
                {"id": 0, "label": "r", "kind": "and", "children": [1, 2]},
                {"id": 1, "label": "same", "kind": "leaf", "children": []},
                {"id": 2, "label": "same", "kind": "leaf", "children": []}
            ],
            "levels": {"1": [1, 2]}
        }"#;
        assert!(parse_template(dup).is_err());
    }

    #[test]
    fn edge_count_equals_node_count_minus_one() {
        for category in ["chair", "lamp"] {
            let t = synthetic_template(category).unwrap();
            let edges: usize = t.node_ids().map(|id| t.node(id).unwrap().children.len()).sum();
            assert_eq!(edges, t.node_count() - 1);
        }
    }

    #[test]
    fn cuts_intersect_every_root_leaf_path_at_most_once() {
        for category in ["chair", "lamp"] {
            let t = synthetic_template(category).unwrap();
            for path in t.root_to_leaf_paths() {
                for level in t.levels() {
                    let cut = t.level_cut(level).unwrap();
                    let hits = path.iter().filter(|id| cut.contains(id)).count();
                    assert!(hits <= 1, "level {level} hits path {path:?} {hits} times");
                }
            }
        }
    }

    #[test]
    fn augment_adds_one_other_per_internal_node() {
        let t = chain_template();
        let aug = augment_other(&t).unwrap();
        // two internal nodes -> two fresh "other" leaves
        assert_eq!(aug.node_count(), t.node_count() + 2);
        assert_eq!(aug.leaves().len(), 3);
        // original ids and parent relations survive
        for id in t.node_ids() {
            assert_eq!(t.parent_of(id), aug.parent_of(id));
        }
        // idempotent
        let aug2 = augment_other(&aug).unwrap();
        assert_eq!(aug2, aug);
    }

    #[test]
    fn simple_template_augment_leaf_count() {
        // root -> mid -> {a, b}: both parents gain an "other", giving 4 leaves
        let t = Template::new(
            "x",
            0,
            vec![
                TemplateNode {
                    node_id: 0,
                    label: "r".into(),
                    kind: NodeKind::And,
                    children: vec![1],
                },
                TemplateNode {
                    node_id: 1,
                    label: "mid".into(),
                    kind: NodeKind::And,
                    children: vec![2, 3],
                },
                TemplateNode {
                    node_id: 2,
                    label: "a".into(),
                    kind: NodeKind::Leaf,
                    children: vec![],
                },
                TemplateNode {
                    node_id: 3,
                    label: "b".into(),
                    kind: NodeKind::Leaf,
                    children: vec![],
                },
            ],
            [(1u8, [2, 3].into_iter().collect())].into_iter().collect(),
        )
        .unwrap();
        let aug = augment_other(&t).unwrap();
        assert_eq!(aug.leaves().len(), 4);
        let aug_again = augment_other(&aug).unwrap();
        assert_eq!(aug_again.leaves().len(), 4);
    }

    #[test]
    fn full_path_labels() {
        let t = chain_template();
        assert_eq!(full_path_label(&t, 0).unwrap(), "root");
        assert_eq!(full_path_label(&t, 2).unwrap(), "root/a/leaf");
        let aug = augment_other(&t).unwrap();
        let other_under_a = aug
            .node(1)
            .unwrap()
            .children
            .iter()
            .copied()
            .find(|&c| aug.node(c).unwrap().label == OTHER_LABEL)
            .unwrap();
        assert_eq!(full_path_label(&aug, other_under_a).unwrap(), "root/a/other");
        assert!(full_path_label(&t, 99).is_err());
    }
}
