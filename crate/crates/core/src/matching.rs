//! Bipartite matching and set similarity.
//!
//! [`best_matching`] returns a matching that (1) has maximum cardinality,
//! (2) among those maximizes the total score, and (3) among those is the
//! lexicographically smallest when read as "partner of left 0, partner of
//! left 1, ..." with "unmatched" sorting last.

use std::collections::{BTreeSet, VecDeque};

/// Scores are compared after scaling to integers so ties are exact.
const SCORE_SCALE: f64 = 1e9;

/// Dice's coefficient `2|A∩B| / (|A|+|B|)`; 0 for two empty sets.
pub fn dice<T: Ord>(a: &BTreeSet<T>, b: &BTreeSet<T>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 0.0;
    }
    let common = a.intersection(b).count();
    2.0 * common as f64 / (a.len() + b.len()) as f64
}

/// Maximum-cardinality matching (Hopcroft–Karp). `adj[i]` lists the right
/// vertices left vertex `i` may pair with. Returns `mate[i]`.
pub fn hopcroft_karp(n_right: usize, adj: &[Vec<usize>]) -> Vec<Option<usize>> {
    let n_left = adj.len();
    let mut mate_l: Vec<Option<usize>> = vec![None; n_left];
    let mut mate_r: Vec<Option<usize>> = vec![None; n_right];
    let mut dist = vec![0usize; n_left];
    loop {
        // BFS layering from free left vertices
        let mut queue = VecDeque::new();
        let mut found = false;
        for i in 0..n_left {
            if mate_l[i].is_none() {
                dist[i] = 0;
                queue.push_back(i);
            } else {
                dist[i] = usize::MAX;
            }
        }
        while let Some(i) = queue.pop_front() {
            for &j in &adj[i] {
                match mate_r[j] {
                    None => found = true,
                    Some(k) if dist[k] == usize::MAX => {
                        dist[k] = dist[i] + 1;
                        queue.push_back(k);
                    }
                    _ => {}
                }
            }
        }
        if !found {
            break;
        }
        for i in 0..n_left {
            if mate_l[i].is_none() {
                augment(i, adj, &mut mate_l, &mut mate_r, &mut dist);
            }
        }
    }
    mate_l
}

fn augment(
    i: usize,
    adj: &[Vec<usize>],
    mate_l: &mut [Option<usize>],
    mate_r: &mut [Option<usize>],
    dist: &mut [usize],
) -> bool {
    for &j in &adj[i] {
        let ok = match mate_r[j] {
            None => true,
            Some(k) => dist[k] == dist[i] + 1 && augment(k, adj, mate_l, mate_r, dist),
        };
        if ok {
            mate_l[i] = Some(j);
            mate_r[j] = Some(i);
            return true;
        }
    }
    dist[i] = usize::MAX;
    false
}

/// (cardinality, total scaled score) of an optimal matching, computed by
/// successive shortest paths on integer costs.
fn optimum(n_right: usize, weights: &[Vec<(usize, i64)>]) -> (usize, i64) {
    let n_left = weights.len();
    let (src, sink) = (n_left + n_right, n_left + n_right + 1);
    let n = sink + 1;
    // edge list: (to, cap, cost, rev)
    let mut g: Vec<Vec<(usize, i64, i64, usize)>> = vec![Vec::new(); n];
    let add = |g: &mut Vec<Vec<(usize, i64, i64, usize)>>, a: usize, b: usize, cost: i64| {
        let ra = g[b].len();
        let rb = g[a].len();
        g[a].push((b, 1, cost, ra));
        g[b].push((a, 0, -cost, rb));
    };
    for (i, row) in weights.iter().enumerate() {
        add(&mut g, src, i, 0);
        for &(j, w) in row {
            add(&mut g, i, n_left + j, -w);
        }
    }
    for j in 0..n_right {
        add(&mut g, n_left + j, sink, 0);
    }
    let (mut flow, mut cost) = (0usize, 0i64);
    loop {
        // Bellman-Ford (queue based); graphs here are tiny
        let mut dist = vec![i64::MAX; n];
        let mut prev: Vec<Option<(usize, usize)>> = vec![None; n];
        let mut in_q = vec![false; n];
        dist[src] = 0;
        let mut q = VecDeque::from([src]);
        while let Some(u) = q.pop_front() {
            in_q[u] = false;
            for (k, &(v, cap, c, _)) in g[u].iter().enumerate() {
                if cap > 0 && dist[u] + c < dist[v] {
                    dist[v] = dist[u] + c;
                    prev[v] = Some((u, k));
                    if !in_q[v] {
                        in_q[v] = true;
                        q.push_back(v);
                    }
                }
            }
        }
        if dist[sink] == i64::MAX {
            break;
        }
        let mut v = sink;
        while let Some((u, k)) = prev[v] {
            let rev = g[u][k].3;
            g[u][k].1 -= 1;
            g[v][rev].1 += 1;
            v = u;
        }
        flow += 1;
        cost += dist[sink];
    }
    (flow, -cost)
}

/// Optimal matching over a score matrix; pairs with score <= 0 are not
/// allowed. Returns `(left, right)` pairs sorted by left index.
pub fn best_matching(scores: &[Vec<f64>]) -> Vec<(usize, usize)> {
    let n_left = scores.len();
    let n_right = scores.iter().map(Vec::len).max().unwrap_or(0);
    let weights: Vec<Vec<(usize, i64)>> = scores
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .filter(|(_, &s)| s > 0.0)
                .map(|(j, &s)| (j, (s * SCORE_SCALE).round() as i64))
                .collect()
        })
        .collect();
    let target = optimum(n_right, &weights);
    debug_assert_eq!(
        target.0,
        hopcroft_karp(
            n_right,
            &weights
                .iter()
                .map(|r| r.iter().map(|&(j, _)| j).collect())
                .collect::<Vec<_>>()
        )
        .iter()
        .flatten()
        .count()
    );

    // fix left vertices in order, each to the smallest feasible partner
    let mut result = Vec::new();
    let mut used_right = vec![false; n_right];
    let (mut got_card, mut got_score) = (0usize, 0i64);
    for i in 0..n_left {
        let residual = |used: &[bool], from: usize| -> Vec<Vec<(usize, i64)>> {
            weights
                .iter()
                .enumerate()
                .map(|(k, row)| {
                    if k < from {
                        Vec::new()
                    } else {
                        row.iter().copied().filter(|&(j, _)| !used[j]).collect()
                    }
                })
                .collect()
        };
        let mut choice = None;
        for &(j, w) in &weights[i] {
            if used_right[j] {
                continue;
            }
            used_right[j] = true;
            let (c, s) = optimum(n_right, &residual(&used_right, i + 1));
            used_right[j] = false;
            if (got_card + 1 + c, got_score + w + s) == target {
                choice = Some((j, w));
                break;
            }
        }
        if let Some((j, w)) = choice {
            used_right[j] = true;
            got_card += 1;
            got_score += w;
            result.push((i, j));
        }
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dice_basics() {
        let a: BTreeSet<i32> = [1, 2, 3].into();
        assert_eq!(dice(&a, &a), 1.0);
        assert_eq!(dice(&a, &BTreeSet::new()), 0.0);
        assert_eq!(dice::<i32>(&BTreeSet::new(), &BTreeSet::new()), 0.0);
        let b: BTreeSet<i32> = [3, 4].into();
        assert!((dice(&a, &b) - 0.4).abs() < 1e-12);
    }

    #[test]
    fn hopcroft_karp_finds_perfect_matching() {
        let adj = vec![vec![0, 1], vec![0], vec![1, 2]];
        let m = hopcroft_karp(3, &adj);
        assert_eq!(m.iter().filter(|x| x.is_some()).count(), 3);
        assert_eq!(m[1], Some(0));
    }

    #[test]
    fn two_rows_competing_for_one_column() {
        let m = best_matching(&[vec![0.8], vec![0.8]]);
        assert_eq!(m, vec![(0, 0)]);
        let m = best_matching(&[vec![0.5], vec![0.8]]);
        assert_eq!(m, vec![(1, 0)]);
    }

    #[test]
    fn cardinality_beats_score() {
        // greedy on score would take (0,0) and leave row 1 unmatched
        let m = best_matching(&[vec![0.9, 0.1], vec![0.8, 0.0]]);
        assert_eq!(m, vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn zero_scores_are_not_candidates() {
        assert!(best_matching(&[vec![0.0, 0.0]]).is_empty());
        assert!(best_matching(&[]).is_empty());
    }
}
