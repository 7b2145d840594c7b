//! Hopcroft-Karp maximum bipartite matching with a deterministic tie-break.
//!
//! Left vertices are scanned in ascending order and each adjacency list is
//! tried in the order given, so callers that pass sorted lists get
//! reproducible matchings.

use std::collections::VecDeque;

const NIL: usize = usize::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    /// Right partner of each left vertex.
    pub left: Vec<Option<usize>>,
    /// Left partner of each right vertex.
    pub right: Vec<Option<usize>>,
}

impl Matching {
    pub fn size(&self) -> usize {
        self.left.iter().filter(|m| m.is_some()).count()
    }

    pub fn saturates_left(&self) -> bool {
        self.left.iter().all(Option::is_some)
    }

    /// Kőnig/Hall certificate for an unsaturated matching: the left vertices
    /// reachable by alternating paths from unmatched left vertices. Their
    /// neighbourhood is strictly smaller than the set itself.
    pub fn hall_violator(&self, adj: &[Vec<usize>]) -> Option<(Vec<usize>, Vec<usize>)> {
        if self.saturates_left() {
            return None;
        }
        let mut seen_left = vec![false; self.left.len()];
        let mut seen_right = vec![false; self.right.len()];
        let mut queue: VecDeque<usize> = (0..self.left.len())
            .filter(|&u| self.left[u].is_none())
            .collect();
        for &u in &queue {
            seen_left[u] = true;
        }
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                if !seen_right[v] {
                    seen_right[v] = true;
                    if let Some(w) = self.right[v] {
                        if !seen_left[w] {
                            seen_left[w] = true;
                            queue.push_back(w);
                        }
                    }
                }
            }
        }
        let lefts = (0..seen_left.len()).filter(|&u| seen_left[u]).collect();
        let rights = (0..seen_right.len()).filter(|&v| seen_right[v]).collect();
        Some((lefts, rights))
    }
}

/// Maximum matching of the bipartite graph with `adj[u]` listing the right
/// neighbours of left vertex `u`; right vertices are `0..n_right`.
pub fn hopcroft_karp(adj: &[Vec<usize>], n_right: usize) -> Matching {
    let n_left = adj.len();
    let mut match_l = vec![NIL; n_left];
    let mut match_r = vec![NIL; n_right];
    let mut dist = vec![0usize; n_left];

    loop {
        // BFS layering from free left vertices
        let mut queue = VecDeque::new();
        for u in 0..n_left {
            if match_l[u] == NIL {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = NIL;
            }
        }
        let mut found = false;
        while let Some(u) = queue.pop_front() {
            for &v in &adj[u] {
                let w = match_r[v];
                if w == NIL {
                    found = true;
                } else if dist[w] == NIL {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        if !found {
            break;
        }
        let mut progressed = false;
        for u in 0..n_left {
            if match_l[u] == NIL && augment(u, adj, &mut match_l, &mut match_r, &mut dist) {
                progressed = true;
            }
        }
        if !progressed {
            break;
        }
    }

    let wrap = |v: usize| (v != NIL).then_some(v);
    Matching {
        left: match_l.into_iter().map(wrap).collect(),
        right: match_r.into_iter().map(wrap).collect(),
    }
}

fn augment(
    u: usize,
    adj: &[Vec<usize>],
    match_l: &mut [usize],
    match_r: &mut [usize],
    dist: &mut [usize],
) -> bool {
    for &v in &adj[u] {
        let w = match_r[v];
        if w == NIL || (dist[w] == dist[u] + 1 && augment(w, adj, match_l, match_r, dist)) {
            match_l[u] = v;
            match_r[v] = u;
            return true;
        }
    }
    dist[u] = NIL;
    false
}
