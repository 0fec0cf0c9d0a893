//! Annotation and prediction file formats.
//!
//! Annotations are JSON trees `{shape_id, category, point_count, root}` where
//! every node is `{node, children, point_indices}`. Semantic predictions are
//! one integer label per line. Instance predictions are JSON
//! `{masks: [{points, confidence, semantic}]}`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Annotation, InstanceNode};
use crate::error::{Error, Result};

#[derive(Serialize, Deserialize)]
struct NodeDoc {
    node: u32,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    children: Vec<NodeDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    point_indices: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct AnnotationDoc {
    shape_id: String,
    category: String,
    point_count: usize,
    root: NodeDoc,
}

fn to_doc(node: &InstanceNode) -> NodeDoc {
    NodeDoc {
        node: node.template_node_id,
        children: node.children.iter().map(to_doc).collect(),
        point_indices: node.point_indices.clone(),
    }
}

fn from_doc(doc: NodeDoc) -> InstanceNode {
    InstanceNode {
        template_node_id: doc.node,
        children: doc.children.into_iter().map(from_doc).collect(),
        point_indices: doc.point_indices,
    }
}

pub fn annotation_to_json(annotation: &Annotation) -> String {
    let doc = AnnotationDoc {
        shape_id: annotation.shape_id.clone(),
        category: annotation.category.clone(),
        point_count: annotation.point_count,
        root: to_doc(&annotation.root),
    };
    serde_json::to_string_pretty(&doc).expect("annotation serializes")
}

pub fn annotation_from_json(json: &str) -> Result<Annotation> {
    let doc: AnnotationDoc = serde_json::from_str(json)?;
    Ok(Annotation {
        shape_id: doc.shape_id,
        category: doc.category,
        point_count: doc.point_count,
        root: from_doc(doc.root),
    })
}

pub fn write_annotation(annotation: &Annotation, path: &Path) -> Result<()> {
    fs::write(path, annotation_to_json(annotation))
        .map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn read_annotation(path: &Path) -> Result<Annotation> {
    let data = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    annotation_from_json(&data)
}

/// One binarized predicted part instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedInstance {
    pub points: Vec<usize>,
    pub confidence: f64,
    pub semantic: u32,
}

/// The instance-prediction output for one shape.
#[derive(Debug, Clone, PartialEq)]
pub struct InstancePredictionSet {
    pub shape_id: String,
    pub masks: Vec<PredictedInstance>,
}

#[derive(Serialize, Deserialize)]
struct InstanceDoc {
    masks: Vec<PredictedInstance>,
}

pub fn write_instance_prediction(set: &InstancePredictionSet, path: &Path) -> Result<()> {
    let doc = InstanceDoc {
        masks: set.masks.clone(),
    };
    let json = serde_json::to_string_pretty(&doc).expect("instance prediction serializes");
    fs::write(path, json).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn read_instance_prediction(path: &Path) -> Result<InstancePredictionSet> {
    let data = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let doc: InstanceDoc = serde_json::from_str(&data)?;
    let shape_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    Ok(InstancePredictionSet {
        shape_id,
        masks: doc.masks,
    })
}

pub fn write_semantic_prediction(labels: &[u32], path: &Path) -> Result<()> {
    let mut out = String::with_capacity(labels.len() * 3);
    for l in labels {
        out.push_str(&l.to_string());
        out.push('\n');
    }
    fs::write(path, out).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn read_semantic_prediction(path: &Path) -> Result<Vec<u32>> {
    let data = fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let mut labels = Vec::new();
    for (lineno, line) in data.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        labels.push(line.parse::<u32>().map_err(|e| Error::Format {
            path: path.display().to_string(),
            line: lineno + 1,
            message: format!("bad label {line:?}: {e}"),
        })?);
    }
    Ok(labels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn annotation_round_trip() {
        let a = Annotation {
            shape_id: "s1".into(),
            category: "chair".into(),
            point_count: 6,
            root: InstanceNode::branch(
                0,
                vec![
                    InstanceNode::leaf(2, vec![0, 1, 2]),
                    InstanceNode::branch(1, vec![InstanceNode::leaf(4, vec![3, 4, 5])]),
                ],
            ),
        };
        let back = annotation_from_json(&annotation_to_json(&a)).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn semantic_prediction_round_trip_and_line_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.txt");
        write_semantic_prediction(&[0, 3, 2, 2], &path).unwrap();
        assert_eq!(read_semantic_prediction(&path).unwrap(), vec![0, 3, 2, 2]);
        std::fs::write(&path, "1\nx\n").unwrap();
        match read_semantic_prediction(&path) {
            Err(Error::Format { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn instance_prediction_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("shapeX.json");
        let set = InstancePredictionSet {
            shape_id: "shapeX".into(),
            masks: vec![PredictedInstance {
                points: vec![0, 4, 5],
                confidence: 0.75,
                semantic: 2,
            }],
        };
        write_instance_prediction(&set, &path).unwrap();
        let back = read_instance_prediction(&path).unwrap();
        assert_eq!(back, set);
    }
}
