use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One metric value together with its support count (how many units — points,
/// unions, instances — back it).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub score: f64,
    pub support: u64,
}

/// Metric aggregates with enough structure to recompute every average.
///
/// `per_part_category` is keyed by level, then by full-path part label.
/// Hierarchical metrics use level 0 for the whole-tree view. Scores are in
/// `[0, 1]`; presentation layers scale to percent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub metric: String,
    pub per_part_category: BTreeMap<u8, BTreeMap<String, Cell>>,
    pub per_shape: BTreeMap<String, Cell>,
    pub per_level: BTreeMap<u8, f64>,
    pub overall: f64,
}

impl EvalReport {
    pub fn new(metric: impl Into<String>) -> Self {
        EvalReport {
            metric: metric.into(),
            per_part_category: BTreeMap::new(),
            per_shape: BTreeMap::new(),
            per_level: BTreeMap::new(),
            overall: 0.0,
        }
    }

    /// Recomputes `per_level` and `overall` from the leaf cells.
    ///
    /// Level scores are unweighted means of category cells when categories are
    /// present, otherwise means of per-shape cells; `overall` is the mean of
    /// the level scores.
    pub fn recompute_aggregates(&mut self) {
        self.per_level.clear();
        for (&level, cells) in &self.per_part_category {
            if !cells.is_empty() {
                let sum: f64 = cells.values().map(|c| c.score).sum();
                self.per_level.insert(level, sum / cells.len() as f64);
            }
        }
        if self.per_level.is_empty() && !self.per_shape.is_empty() {
            let sum: f64 = self.per_shape.values().map(|c| c.score).sum();
            self.per_level.insert(0, sum / self.per_shape.len() as f64);
        }
        let levels = self.per_level.len();
        self.overall = if levels == 0 {
            0.0
        } else {
            self.per_level.values().sum::<f64>() / levels as f64
        };
    }

    /// Verifies that the stored aggregates match recomputation within `tol`.
    pub fn check_aggregates(&self, tol: f64) -> Result<()> {
        let mut fresh = self.clone();
        fresh.recompute_aggregates();
        for (level, score) in &fresh.per_level {
            let stored = self.per_level.get(level).copied().unwrap_or(f64::NAN);
            if (stored - score).abs() > tol {
                return Err(Error::InvalidData(format!(
                    "level {level} aggregate {stored} drifts from recomputed {score}"
                )));
            }
        }
        if (fresh.overall - self.overall).abs() > tol {
            return Err(Error::InvalidData(format!(
                "overall aggregate {} drifts from recomputed {}",
                self.overall, fresh.overall
            )));
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(json: &str) -> Result<Self> {
        Ok(serde_json::from_str(json)?)
    }

    /// Renders the per-level table with one row per level (1, 2, 3) and an
    /// `Avg` row; undefined levels print a dash.
    pub fn table(&self, defined_levels: &[u8]) -> String {
        let mut out = String::new();
        out.push_str(&format!("{:<8}{:>8}\n", "Level", self.metric_column()));
        let displayed: Vec<u8> = if defined_levels.is_empty() {
            self.per_level.keys().copied().collect()
        } else {
            vec![1, 2, 3]
        };
        for level in displayed {
            let cell = match self.per_level.get(&level) {
                Some(score) => format!("{:>8.1}", score * 100.0),
                None => {
                    if defined_levels.contains(&level) {
                        format!("{:>8}", "?")
                    } else {
                        format!("{:>8}", "-")
                    }
                }
            };
            out.push_str(&format!("{:<8}{}\n", level, cell));
        }
        out.push_str(&format!("{:<8}{:>8.1}\n", "Avg", self.overall * 100.0));
        out
    }

    fn metric_column(&self) -> &str {
        if self.metric.contains("map") {
            "mAP"
        } else {
            "mIoU"
        }
    }
}

/// Combines single-level reports of one metric into a multi-level report.
pub fn merge_level_reports(reports: &[EvalReport]) -> Result<EvalReport> {
    let Some(first) = reports.first() else {
        return Err(Error::InvalidArgument("no reports to merge".into()));
    };
    let mut merged = EvalReport::new(first.metric.clone());
    let mut shape_parts: BTreeMap<String, (f64, u64, u64)> = BTreeMap::new();
    for report in reports {
        if report.metric != first.metric {
            return Err(Error::InvalidArgument(format!(
                "cannot merge {} with {}",
                report.metric, first.metric
            )));
        }
        for (&level, cells) in &report.per_part_category {
            let slot = merged.per_part_category.entry(level).or_default();
            for (label, cell) in cells {
                slot.insert(label.clone(), *cell);
            }
        }
        for (&level, &score) in &report.per_level {
            merged.per_level.insert(level, score);
        }
        for (shape, cell) in &report.per_shape {
            let entry = shape_parts.entry(shape.clone()).or_insert((0.0, 0, 0));
            entry.0 += cell.score;
            entry.1 += cell.support;
            entry.2 += 1;
        }
    }
    for (shape, (sum, support, n)) in shape_parts {
        merged.per_shape.insert(
            shape,
            Cell {
                score: sum / n as f64,
                support,
            },
        );
    }
    let levels = merged.per_level.len();
    merged.overall = if levels == 0 {
        0.0
    } else {
        merged.per_level.values().sum::<f64>() / levels as f64
    };
    Ok(merged)
}
