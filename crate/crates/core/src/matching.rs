//! Optimal one-to-one matching of estimated and true spike locations under the
//! wrap-around distance (Hungarian algorithm).

use serde::{Deserialize, Serialize};

use crate::model::{wrap_distance, wrap_distance_2d, Locations};

/// Matched pairs plus the indices left over on either side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    /// `(estimate index, truth index, distance)`, sorted by truth index.
    pub pairs: Vec<(usize, usize, f64)>,
    pub unmatched_estimates: Vec<usize>,
    pub unmatched_truth: Vec<usize>,
}

impl MatchReport {
    pub fn is_complete(&self) -> bool {
        self.unmatched_estimates.is_empty() && self.unmatched_truth.is_empty()
    }

    pub fn max_error(&self) -> f64 {
        self.pairs.iter().map(|p| p.2).fold(0.0, f64::max)
    }

    pub fn mean_error(&self) -> f64 {
        if self.pairs.is_empty() {
            0.0
        } else {
            self.pairs.iter().map(|p| p.2).sum::<f64>() / self.pairs.len() as f64
        }
    }
}

/// Minimum-cost assignment for a rectangular cost matrix with `rows <= cols`.
/// Returns, for each row, its assigned column.
fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    if n == 0 {
        return Vec::new();
    }
    let m = cost[0].len();
    debug_assert!(n <= m);
    let inf = f64::INFINITY;
    // potentials and matching use 1-based indices with a virtual column 0
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut p = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assign = vec![0usize; n];
    for j in 1..=m {
        if p[j] != 0 {
            assign[p[j] - 1] = j - 1;
        }
    }
    assign
}

fn distance_matrix(est: &Locations, truth: &Locations) -> Vec<Vec<f64>> {
    match (est, truth) {
        (Locations::OneD(a), Locations::OneD(b)) => a
            .iter()
            .map(|&x| b.iter().map(|&y| wrap_distance(x, y)).collect())
            .collect(),
        (Locations::TwoD(a), Locations::TwoD(b)) => a
            .iter()
            .map(|&x| b.iter().map(|&y| wrap_distance_2d(x, y)).collect())
            .collect(),
        _ => panic!("matching locations of different dimensions"),
    }
}

/// Minimizes the total wrap-around distance over one-to-one pairings of
/// estimates with truths. Surplus points on either side are reported as
/// unmatched.
pub fn match_locations(est: &Locations, truth: &Locations) -> MatchReport {
    let d = distance_matrix(est, truth);
    let (ne, nt) = (est.len(), truth.len());
    let mut pairs = Vec::new();
    if ne <= nt {
        for (i, j) in hungarian(&d).into_iter().enumerate() {
            pairs.push((i, j, d[i][j]));
        }
    } else {
        let dt: Vec<Vec<f64>> = (0..nt).map(|j| (0..ne).map(|i| d[i][j]).collect()).collect();
        for (j, i) in hungarian(&dt).into_iter().enumerate() {
            pairs.push((i, j, d[i][j]));
        }
    }
    pairs.sort_by_key(|p| p.1);
    let unmatched_estimates = (0..ne).filter(|i| !pairs.iter().any(|p| p.0 == *i)).collect();
    let unmatched_truth = (0..nt).filter(|j| !pairs.iter().any(|p| p.1 == *j)).collect();
    MatchReport {
        pairs,
        unmatched_estimates,
        unmatched_truth,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_across_wrap() {
        let est = Locations::OneD(vec![0.999, 0.5]);
        let truth = Locations::OneD(vec![0.501, 0.001]);
        let r = match_locations(&est, &truth);
        assert!(r.is_complete());
        assert_eq!(r.pairs[0].0, 1);
        assert_eq!(r.pairs[1].0, 0);
        assert!((r.max_error() - 0.002).abs() < 1e-12);
    }

    #[test]
    fn greedy_would_be_wrong() {
        // nearest-neighbour greedy pairs 0.3 with 0.31 and leaves 0.2 with 0.4
        let est = Locations::OneD(vec![0.31, 0.19]);
        let truth = Locations::OneD(vec![0.3, 0.2]);
        let r = match_locations(&est, &truth);
        assert!((r.pairs.iter().map(|p| p.2).sum::<f64>() - 0.02).abs() < 1e-12);
    }

    #[test]
    fn surplus_is_reported() {
        let est = Locations::OneD(vec![0.1, 0.5, 0.9]);
        let truth = Locations::OneD(vec![0.52]);
        let r = match_locations(&est, &truth);
        assert_eq!(r.pairs, vec![(1, 0, 0.020000000000000018)]);
        assert_eq!(r.unmatched_estimates, vec![0, 2]);
        let r = match_locations(&truth, &est);
        assert_eq!(r.unmatched_truth, vec![0, 2]);
    }

    #[test]
    fn brute_force_agreement() {
        let est = vec![0.05, 0.41, 0.77, 0.93];
        let truth = vec![0.9, 0.02, 0.45, 0.7];
        let r = match_locations(&Locations::OneD(est.clone()), &Locations::OneD(truth.clone()));
        let total: f64 = r.pairs.iter().map(|p| p.2).sum();
        let mut best = f64::INFINITY;
        let idx = [0usize, 1, 2, 3];
        for a in idx {
            for b in idx {
                for c in idx {
                    for d in idx {
                        let perm = [a, b, c, d];
                        let mut s = perm.to_vec();
                        s.sort();
                        s.dedup();
                        if s.len() < 4 {
                            continue;
                        }
                        let cost: f64 = (0..4).map(|i| wrap_distance(est[i], truth[perm[i]])).sum();
                        best = best.min(cost);
                    }
                }
            }
        }
        assert!((total - best).abs() < 1e-12);
    }
}
