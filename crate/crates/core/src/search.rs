//! Breadth-first searches over the vacancy graph.
//!
//! All searches work on raw row-major indices and a `filled` mask so the
//! planners can run them on their scratch state without building an
//! [`Occupancy`](crate::lattice::Occupancy) each step.

use std::collections::VecDeque;

use crate::lattice::Lattice;

pub const UNREACHED: u32 = u32::MAX;

/// Multi-source BFS. Start sites get distance 0 regardless of occupancy;
/// the search only expands into vacant sites accepted by `passable`.
pub fn vacancy_bfs(
    lattice: &Lattice,
    filled: &[bool],
    starts: impl IntoIterator<Item = usize>,
    passable: impl Fn(usize) -> bool,
) -> Vec<u32> {
    let mut dist = vec![UNREACHED; lattice.len()];
    let mut queue = VecDeque::new();
    for s in starts {
        if dist[s] == UNREACHED {
            dist[s] = 0;
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        let du = dist[u];
        for n in lattice.neighbors(u) {
            if dist[n] == UNREACHED && !filled[n] && passable(n) {
                dist[n] = du + 1;
                queue.push_back(n);
            }
        }
    }
    dist
}

/// Walks from `src` down a distance field rooted at `dst` (as produced by
/// [`vacancy_bfs`] started at `dst`), always stepping to the smallest-index
/// neighbour one level closer. This yields the lexicographically smallest
/// shortest path. `src` itself need not be in the field.
pub fn descend(lattice: &Lattice, dist: &[u32], src: usize, dst: usize) -> Option<Vec<usize>> {
    if src == dst {
        return None;
    }
    let mut level = lattice
        .neighbors(src)
        .map(|n| dist[n])
        .min()
        .filter(|&d| d != UNREACHED)?;
    let mut path = vec![src];
    let mut cur = src;
    loop {
        let next = lattice.neighbors(cur).find(|&n| dist[n] == level)?;
        path.push(next);
        if next == dst {
            return Some(path);
        }
        cur = next;
        level -= 1;
    }
}

/// Shortest path from occupied `src` to `dst` whose interior sites are all
/// vacant and accepted by `passable`. Returns index sequence including both
/// endpoints.
pub fn shortest_path(
    lattice: &Lattice,
    filled: &[bool],
    src: usize,
    dst: usize,
    passable: impl Fn(usize) -> bool,
) -> Option<Vec<usize>> {
    if src == dst {
        return None;
    }
    let dist = vacancy_bfs(lattice, filled, [dst], passable);
    descend(lattice, &dist, src, dst)
}

/// Nearest occupied site satisfying `is_source`, measured from vacant `from`
/// through vacant sites accepted by `passable`. Ties go to the smallest index.
/// Returns the source and the path from it to `from`.
pub fn nearest_source(
    lattice: &Lattice,
    filled: &[bool],
    from: usize,
    is_source: impl Fn(usize) -> bool,
    passable: impl Fn(usize) -> bool,
) -> Option<(usize, Vec<usize>)> {
    let mut dist = vec![UNREACHED; lattice.len()];
    dist[from] = 0;
    let mut frontier = vec![from];
    let mut best: Option<usize> = None;
    while !frontier.is_empty() && best.is_none() {
        let mut next = Vec::new();
        for &u in &frontier {
            let du = dist[u];
            for n in lattice.neighbors(u) {
                if filled[n] {
                    if is_source(n) && best.is_none_or(|b| n < b) {
                        best = Some(n);
                    }
                } else if dist[n] == UNREACHED && passable(n) {
                    dist[n] = du + 1;
                    next.push(n);
                }
            }
        }
        frontier = next;
    }
    let src = best?;
    let path = descend(lattice, &dist, src, from)?;
    Some((src, path))
}

/// Connected component of vacant sites containing `seed`.
pub fn vacancy_component(
    lattice: &Lattice,
    filled: &[bool],
    seed: usize,
    passable: impl Fn(usize) -> bool,
) -> Vec<usize> {
    let dist = vacancy_bfs(lattice, filled, [seed], passable);
    (0..lattice.len()).filter(|&i| dist[i] != UNREACHED).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descend_is_lexicographic() {
        let l = Lattice::new(3, 3).unwrap();
        let mut filled = vec![false; 9];
        filled[0] = true;
        let p = shortest_path(&l, &filled, 0, 8, |_| true).unwrap();
        // both 0-1-2-5-8 and 0-3-6-7-8 are shortest; 1 < 3
        assert_eq!(p, vec![0, 1, 2, 5, 8]);
    }

    #[test]
    fn blocked_path() {
        let l = Lattice::new(3, 3).unwrap();
        let mut filled = vec![false; 9];
        for i in [0, 1, 3, 4] {
            filled[i] = true;
        }
        // 0 is walled in by 1, 3
        assert!(shortest_path(&l, &filled, 0, 8, |_| true).is_none());
        // but 4 can reach 8
        assert_eq!(shortest_path(&l, &filled, 4, 8, |_| true).unwrap(), vec![4, 5, 8]);
    }

    #[test]
    fn nearest_source_tie_break() {
        let l = Lattice::new(3, 3).unwrap();
        let mut filled = vec![false; 9];
        filled[1] = true;
        filled[3] = true;
        let (src, path) = nearest_source(&l, &filled, 4, |_| true, |_| true).unwrap();
        assert_eq!(src, 1);
        assert_eq!(path, vec![1, 4]);
    }
}
