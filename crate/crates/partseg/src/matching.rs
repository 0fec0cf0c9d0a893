//! Optimal bipartite assignment between ground-truth and predicted masks.
//!
//! The solver maximizes total score by running the O(n^3) augmenting-path
//! Hungarian algorithm on `max_score - score`. Among score-optimal
//! assignments it returns the lexicographically smallest row-to-column
//! mapping: candidate columns are limited to zero-reduced-cost edges under
//! the optimal dual potentials (complementary slackness), and each candidate
//! is verified by re-solving the remaining subproblem.

use crate::error::{Error, Result};
use crate::metrics::{relaxed_iou_slices, SoftMask};

/// Scores between every ground-truth mask (row) and predicted mask (column);
/// the objective is to maximize the total of the selected entries.
#[derive(Debug, Clone, PartialEq)]
pub struct AssignmentProblem {
    scores: Vec<Vec<f64>>,
}

impl AssignmentProblem {
    pub fn new(scores: Vec<Vec<f64>>) -> Result<Self> {
        if scores.is_empty() || scores[0].is_empty() {
            return Err(Error::InvalidArgument(
                "assignment problem needs at least one row and one column".into(),
            ));
        }
        let cols = scores[0].len();
        for (i, row) in scores.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::InvalidArgument(format!(
                    "row {i} has {} columns, expected {cols}",
                    row.len()
                )));
            }
            for (j, &s) in row.iter().enumerate() {
                if !s.is_finite() {
                    return Err(Error::InvalidData(format!(
                        "non-finite score {s} at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(AssignmentProblem { scores })
    }

    pub fn rows(&self) -> usize {
        self.scores.len()
    }

    pub fn cols(&self) -> usize {
        self.scores[0].len()
    }

    pub fn scores(&self) -> &[Vec<f64>] {
        &self.scores
    }
}

/// An injective row-to-column mapping and the total of its selected scores.
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub mapping: Vec<usize>,
    pub total_score: f64,
}

impl Assignment {
    fn from_mapping(problem: &AssignmentProblem, mapping: Vec<usize>) -> Assignment {
        let total_score = mapping
            .iter()
            .enumerate()
            .map(|(i, &j)| problem.scores[i][j])
            .sum();
        Assignment {
            mapping,
            total_score,
        }
    }
}

/// Minimum-cost rectangular assignment via augmenting paths with potentials.
/// Requires `rows <= cols`. Returns (mapping, row potentials, col potentials);
/// the potentials are dual feasible with zero reduced cost on mapped edges.
fn solve_min(cost: &[Vec<f64>]) -> (Vec<usize>, Vec<f64>, Vec<f64>) {
    let rows = cost.len();
    let cols = cost[0].len();
    debug_assert!(rows <= cols);
    const NONE: usize = usize::MAX;
    let sentinel = cols;
    let mut u = vec![0.0f64; rows];
    let mut v = vec![0.0f64; cols + 1];
    let mut owner = vec![NONE; cols + 1]; // owner[j] = row assigned to column j

    for row in 0..rows {
        owner[sentinel] = row;
        let mut j0 = sentinel;
        let mut min_to = vec![f64::INFINITY; cols];
        let mut prev = vec![sentinel; cols];
        let mut used = vec![false; cols + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = sentinel;
            for j in 0..cols {
                if used[j] {
                    continue;
                }
                let reduced = cost[i0][j] - u[i0] - v[j];
                if reduced < min_to[j] {
                    min_to[j] = reduced;
                    prev[j] = j0;
                }
                if min_to[j] < delta {
                    delta = min_to[j];
                    j1 = j;
                }
            }
            for j in 0..=cols {
                if used[j] {
                    if owner[j] != NONE {
                        u[owner[j]] += delta;
                    }
                    v[j] -= delta;
                } else {
                    min_to[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == NONE {
                break;
            }
        }
        // augment along the alternating path
        while j0 != sentinel {
            let j1 = prev[j0];
            owner[j0] = owner[j1];
            j0 = j1;
        }
    }

    let mut mapping = vec![NONE; rows];
    for j in 0..cols {
        if owner[j] != NONE {
            mapping[owner[j]] = j;
        }
    }
    v.truncate(cols);
    (mapping, u, v)
}

/// Maximum-score assignment with deterministic tie-breaking: among all
/// optimal mappings, the lexicographically smallest is returned.
pub fn hungarian(problem: &AssignmentProblem) -> Result<Assignment> {
    let rows = problem.rows();
    let cols = problem.cols();
    if rows > cols {
        return Err(Error::InvalidArgument(format!(
            "more rows ({rows}) than columns ({cols}); pad or truncate first"
        )));
    }
    let max_score = problem
        .scores
        .iter()
        .flatten()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max);
    let cost: Vec<Vec<f64>> = problem
        .scores
        .iter()
        .map(|row| row.iter().map(|s| max_score - s).collect())
        .collect();
    let (mut mapping, u, v) = solve_min(&cost);

    let scale = problem
        .scores
        .iter()
        .flatten()
        .fold(1.0f64, |m, &s| m.max(s.abs()));
    let tol = 1e-9 * scale;

    // lexicographic refinement: for each row in order, try smaller candidate
    // columns that complementary slackness allows, verifying optimality of the
    // completion by re-solving the tail subproblem
    let optimal_cost: f64 = mapping.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
    let mut committed_cols: Vec<usize> = Vec::with_capacity(rows);
    let mut committed_cost = 0.0f64;
    for i in 0..rows {
        let current = mapping[i];
        let mut candidates: Vec<usize> = (0..cols)
            .filter(|&j| {
                j < current
                    && !committed_cols.contains(&j)
                    && cost[i][j] - u[i] - v[j] <= tol
            })
            .collect();
        candidates.sort_unstable();
        for j in candidates {
            // remaining rows over remaining columns
            let tail_rows: Vec<usize> = (i + 1..rows).collect();
            let free_cols: Vec<usize> = (0..cols)
                .filter(|c| *c != j && !committed_cols.contains(c))
                .collect();
            let tail_best = if tail_rows.is_empty() {
                Some(Vec::new())
            } else if tail_rows.len() <= free_cols.len() {
                let sub: Vec<Vec<f64>> = tail_rows
                    .iter()
                    .map(|&r| free_cols.iter().map(|&c| cost[r][c]).collect())
                    .collect();
                Some(solve_min(&sub).0)
            } else {
                None
            };
            let Some(tail_mapping) = tail_best else { continue };
            let tail_cost: f64 = tail_mapping
                .iter()
                .enumerate()
                .map(|(ti, &fc)| cost[tail_rows[ti]][free_cols[fc]])
                .sum();
            let candidate_total = committed_cost + cost[i][j] + tail_cost;
            if candidate_total <= optimal_cost + tol {
                mapping[i] = j;
                for (ti, &fc) in tail_mapping.iter().enumerate() {
                    mapping[tail_rows[ti]] = free_cols[fc];
                }
                break;
            }
        }
        committed_cost += cost[i][mapping[i]];
        committed_cols.push(mapping[i]);
    }

    Ok(Assignment::from_mapping(problem, mapping))
}

/// Exhaustive oracle over all injective row-to-column maps. Enumeration is
/// lexicographic, and only strictly better totals replace the incumbent, so
/// ties resolve to the lexicographically smallest mapping.
pub fn brute_force_match(problem: &AssignmentProblem) -> Result<Assignment> {
    let rows = problem.rows();
    let cols = problem.cols();
    if rows > 8 || cols > 8 {
        return Err(Error::InvalidArgument(format!(
            "brute force is limited to 8x8 problems, got {rows}x{cols}"
        )));
    }
    if rows > cols {
        return Err(Error::InvalidArgument(format!(
            "more rows ({rows}) than columns ({cols})"
        )));
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut current = vec![0usize; rows];
    fn recurse(
        row: usize,
        used: u32,
        total: f64,
        scores: &[Vec<f64>],
        current: &mut Vec<usize>,
        best: &mut Option<(f64, Vec<usize>)>,
    ) {
        if row == scores.len() {
            if best.as_ref().map(|(b, _)| total > *b).unwrap_or(true) {
                *best = Some((total, current.clone()));
            }
            return;
        }
        for j in 0..scores[0].len() {
            if used & (1 << j) == 0 {
                current[row] = j;
                recurse(
                    row + 1,
                    used | (1 << j),
                    total + scores[row][j],
                    scores,
                    current,
                    best,
                );
            }
        }
    }
    recurse(0, 0, 0.0, &problem.scores, &mut current, &mut best);
    let (_, mapping) = best.expect("at least one injective map exists");
    Ok(Assignment::from_mapping(problem, mapping))
}

/// Builds the relaxed-IoU score matrix between ground-truth masks (rows) and
/// the learned prediction masks (columns; the "other" mask must be excluded
/// by the caller) and solves it.
pub fn match_instances(pred_masks: &[SoftMask], gt_masks: &[SoftMask]) -> Result<Assignment> {
    if gt_masks.is_empty() {
        return Err(Error::InvalidArgument("no ground-truth masks".into()));
    }
    if gt_masks.len() > pred_masks.len() {
        return Err(Error::Capacity(format!(
            "{} ground-truth instances exceed the {} prediction mask slots",
            gt_masks.len(),
            pred_masks.len()
        )));
    }
    let scores: Vec<Vec<f64>> = gt_masks
        .iter()
        .map(|gt| {
            pred_masks
                .iter()
                .map(|pred| relaxed_iou_slices(gt.values(), pred.values()))
                .collect()
        })
        .collect();
    hungarian(&AssignmentProblem::new(scores)?)
}

/// Indices of the `k` largest ground-truth masks by member count (ties kept
/// in index order), the logged fallback when instances exceed mask slots.
pub fn largest_gt_subset(gt_masks: &[SoftMask], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..gt_masks.len()).collect();
    order.sort_by(|&a, &b| {
        let sa: f64 = gt_masks[a].values().iter().sum();
        let sb: f64 = gt_masks[b].values().iter().sum();
        sb.partial_cmp(&sa).unwrap().then(a.cmp(&b))
    });
    let mut kept: Vec<usize> = order.into_iter().take(k).collect();
    kept.sort_unstable();
    kept
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn problem(scores: Vec<Vec<f64>>) -> AssignmentProblem {
        AssignmentProblem::new(scores).unwrap()
    }

    #[test]
    fn two_by_two_example() {
        let p = problem(vec![vec![0.9, 0.1], vec![0.2, 0.8]]);
        let a = hungarian(&p).unwrap();
        assert_eq!(a.mapping, vec![0, 1]);
        assert!((a.total_score - 1.7).abs() < 1e-12);
        let b = brute_force_match(&p).unwrap();
        assert_eq!(a.mapping, b.mapping);
    }

    #[test]
    fn diagonal_dominant_matrix_maps_identity() {
        let n = 5;
        let scores: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 10.0 } else { 1.0 }).collect())
            .collect();
        let a = hungarian(&problem(scores)).unwrap();
        assert_eq!(a.mapping, (0..n).collect::<Vec<_>>());
    }

    #[test]
    fn single_row_takes_the_maximum_column() {
        let p = problem(vec![vec![0.3, 0.9, 0.5, 0.9]]);
        let a = hungarian(&p).unwrap();
        assert_eq!(a.mapping, vec![1]); // first of the tied maxima
    }

    #[test]
    fn all_equal_scores_give_lexicographic_mapping() {
        let p = problem(vec![vec![2.0; 5]; 3]);
        let a = hungarian(&p).unwrap();
        assert_eq!(a.mapping, vec![0, 1, 2]);
        let b = brute_force_match(&p).unwrap();
        assert_eq!(b.mapping, vec![0, 1, 2]);
    }

    #[test]
    fn agrees_with_brute_force_on_random_integer_problems() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..300 {
            let rows = rng.gen_range(1..=7usize);
            let cols = rng.gen_range(rows..=7usize);
            let scores: Vec<Vec<f64>> = (0..rows)
                .map(|_| (0..cols).map(|_| rng.gen_range(0..6) as f64).collect())
                .collect();
            let p = problem(scores);
            let h = hungarian(&p).unwrap();
            let b = brute_force_match(&p).unwrap();
            assert_eq!(h.total_score, b.total_score, "{:?}", p.scores());
            assert_eq!(h.mapping, b.mapping, "{:?}", p.scores());
        }
    }

    #[test]
    fn agrees_with_brute_force_on_random_real_problems() {
        let mut rng = ChaCha8Rng::seed_from_u64(100);
        for _ in 0..300 {
            let rows = rng.gen_range(1..=7usize);
            let cols = rng.gen_range(rows..=7usize);
            let scores: Vec<Vec<f64>> = (0..rows)
                .map(|_| (0..cols).map(|_| rng.gen_range(-3.0..3.0)).collect())
                .collect();
            let p = problem(scores);
            let h = hungarian(&p).unwrap();
            let b = brute_force_match(&p).unwrap();
            assert!(
                (h.total_score - b.total_score).abs() < 1e-9,
                "{} vs {}",
                h.total_score,
                b.total_score
            );
            assert_eq!(h.mapping, b.mapping);
        }
    }

    #[test]
    fn scaling_scores_preserves_the_mapping() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let scores: Vec<Vec<f64>> = (0..4)
                .map(|_| (0..6).map(|_| rng.gen_range(0..5) as f64).collect())
                .collect();
            let scaled: Vec<Vec<f64>> = scores
                .iter()
                .map(|r| r.iter().map(|s| s * 3.5).collect())
                .collect();
            let a = hungarian(&problem(scores)).unwrap();
            let b = hungarian(&problem(scaled)).unwrap();
            assert_eq!(a.mapping, b.mapping);
        }
    }

    #[test]
    fn permuting_rows_permutes_the_mapping() {
        let scores = vec![
            vec![5.0, 1.0, 0.0],
            vec![0.0, 4.0, 2.0],
            vec![1.0, 0.0, 3.0],
        ];
        let a = hungarian(&problem(scores.clone())).unwrap();
        let permuted = vec![scores[2].clone(), scores[0].clone(), scores[1].clone()];
        let b = hungarian(&problem(permuted)).unwrap();
        assert_eq!(b.mapping, vec![a.mapping[2], a.mapping[0], a.mapping[1]]);
    }

    #[test]
    fn brute_force_beats_random_probing() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let scores: Vec<Vec<f64>> = (0..3)
            .map(|_| (0..5).map(|_| rng.gen_range(0.0..1.0)).collect())
            .collect();
        let p = problem(scores);
        let best = brute_force_match(&p).unwrap();
        for _ in 0..200 {
            let mut cols: Vec<usize> = (0..5).collect();
            // partial shuffle for a random injective map
            for i in 0..3 {
                let pick = rng.gen_range(i..5);
                cols.swap(i, pick);
            }
            let total: f64 = (0..3).map(|i| p.scores()[i][cols[i]]).sum();
            assert!(best.total_score >= total - 1e-12);
        }
    }

    #[test]
    fn non_finite_scores_are_rejected() {
        assert!(AssignmentProblem::new(vec![vec![f64::NAN]]).is_err());
        assert!(AssignmentProblem::new(vec![vec![1.0], vec![f64::INFINITY]]).is_err());
    }

    #[test]
    fn more_rows_than_columns_is_rejected() {
        let p = problem(vec![vec![1.0], vec![2.0]]);
        assert!(hungarian(&p).is_err());
    }

    #[test]
    fn match_instances_recovers_identity_on_exact_masks() {
        let gt: Vec<SoftMask> = (0..3)
            .map(|i| SoftMask::from_indices(9, &[i * 3, i * 3 + 1, i * 3 + 2]))
            .collect();
        let pred = gt.clone();
        let a = match_instances(&pred, &gt).unwrap();
        assert_eq!(a.mapping, vec![0, 1, 2]);
        assert!((a.total_score - 3.0).abs() < 1e-12);
    }

    #[test]
    fn all_zero_predictions_give_lexicographic_map() {
        let gt: Vec<SoftMask> = (0..2).map(|i| SoftMask::from_indices(4, &[i])).collect();
        let pred: Vec<SoftMask> = (0..3)
            .map(|_| SoftMask::new(vec![0.0; 4]).unwrap())
            .collect();
        let a = match_instances(&pred, &gt).unwrap();
        assert_eq!(a.mapping, vec![0, 1]);
        assert_eq!(a.total_score, 0.0);
    }

    #[test]
    fn capacity_error_when_gt_exceeds_slots() {
        let gt: Vec<SoftMask> = (0..3).map(|i| SoftMask::from_indices(4, &[i])).collect();
        let pred: Vec<SoftMask> = (0..2)
            .map(|_| SoftMask::new(vec![0.5; 4]).unwrap())
            .collect();
        match match_instances(&pred, &gt) {
            Err(Error::Capacity(_)) => {}
            other => panic!("expected capacity error, got {other:?}"),
        }
        let kept = largest_gt_subset(&gt, 2);
        assert_eq!(kept, vec![0, 1]); // equal sizes tie to index order
    }

    #[test]
    fn random_soft_masks_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let n = 12;
            let gt: Vec<SoftMask> = (0..3)
                .map(|_| {
                    let idx: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.4)).collect();
                    SoftMask::from_indices(n, &idx)
                })
                .collect();
            let pred: Vec<SoftMask> = (0..5)
                .map(|_| SoftMask::new((0..n).map(|_| rng.gen_range(0.0..1.0)).collect()).unwrap())
                .collect();
            let scores: Vec<Vec<f64>> = gt
                .iter()
                .map(|g| {
                    pred.iter()
                        .map(|p| relaxed_iou_slices(g.values(), p.values()))
                        .collect()
                })
                .collect();
            let p = AssignmentProblem::new(scores).unwrap();
            let via_matching = match_instances(&pred, &gt).unwrap();
            let via_oracle = brute_force_match(&p).unwrap();
            assert_eq!(via_matching.mapping, via_oracle.mapping);
            assert!((via_matching.total_score - via_oracle.total_score).abs() < 1e-9);
        }
    }
}
