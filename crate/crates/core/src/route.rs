//! Connection routes between closed regions.
//!
//! Opening closed regions one at a time ignores that one corridor can serve
//! several regions. This module plans all connections up front, in two
//! flavours: a region-to-region chain (a travelling-salesman style path
//! built nearest-neighbour first and improved by 2-opt), and a tree where a
//! region may also attach to any site of an earlier corridor (a junction).
//! The cheaper of the two, counted in distinct obstacle atoms, is returned.

use std::collections::{BTreeSet, VecDeque};

use crate::error::Result;
use crate::hca::{reachable_vacancies, RegionDecomposition};
use crate::lattice::{Lattice, Occupancy, Site, TargetPattern};
use crate::search::UNREACHED;

/// What a region's corridor attaches to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Endpoint {
    /// The reservoir or an already open vacancy.
    Open,
    /// Another closed region (index into `closed_regions`).
    Region(usize),
    /// A site on an earlier corridor.
    Junction(Site),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Connection {
    /// Index into `closed_regions`.
    pub region: usize,
    pub to: Endpoint,
    /// Atoms to clear, nearest to the region first.
    pub obstacles: Vec<Site>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConnectionRoute {
    /// Connections in execution order.
    pub connections: Vec<Connection>,
    /// Distinct obstacle atoms on the returned route.
    pub obstacle_count: usize,
    /// Distinct obstacle atoms of the best pure region-to-region chain.
    pub region_region_count: usize,
    /// Distinct obstacle atoms of the junction tree.
    pub junction_count: usize,
}

/// 0-1 BFS distance field (atoms on target sites cost one, empty traps are
/// free, reservoir atoms are impassable) with parent links.
struct Field {
    dist: Vec<u32>,
    parent: Vec<usize>,
}

fn field(lattice: &Lattice, filled: &[bool], target: &[bool], starts: &[usize]) -> Field {
    let n = lattice.len();
    let mut dist = vec![UNREACHED; n];
    let mut parent = vec![usize::MAX; n];
    let mut done = vec![false; n];
    let mut dq = VecDeque::new();
    for &s in starts {
        dist[s] = 0;
        dq.push_back(s);
    }
    while let Some(u) = dq.pop_front() {
        if done[u] {
            continue;
        }
        done[u] = true;
        for v in lattice.neighbors(u) {
            let w = if !filled[v] {
                0
            } else if target[v] {
                1
            } else {
                continue;
            };
            if dist[u] + w < dist[v] {
                dist[v] = dist[u] + w;
                parent[v] = u;
                if w == 0 {
                    dq.push_front(v);
                } else {
                    dq.push_back(v);
                }
            }
        }
    }
    Field { dist, parent }
}

impl Field {
    /// Cheapest member of `goals` (ties: smallest index).
    fn best(&self, goals: impl IntoIterator<Item = usize>) -> Option<usize> {
        goals
            .into_iter()
            .filter(|&g| self.dist[g] != UNREACHED)
            .min_by_key(|&g| (self.dist[g], g))
    }

    /// Sites from `end` back to the start set, `end` first.
    fn trace(&self, end: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = end;
        while cur != usize::MAX {
            out.push(cur);
            cur = self.parent[cur];
        }
        out
    }
}

/// Goal sites for "already connected": open vacancies, plus the vacant or
/// target-atom neighbours of reservoir atoms (reservoir atoms themselves are
/// not enterable in the field).
fn root_goals(lattice: &Lattice, filled: &[bool], target: &[bool]) -> Vec<usize> {
    let reach = reachable_vacancies(lattice, filled, target);
    (0..lattice.len())
        .filter(|&i| {
            reach[i]
                || (target[i] && filled[i] && lattice.neighbors(i).any(|n| filled[n] && !target[n]))
        })
        .collect()
}

/// Obstacles on a traced corridor, ordered from the region outward.
fn obstacles_of(trace_from_goal: &[usize], filled: &[bool]) -> Vec<usize> {
    let mut obs: Vec<usize> = trace_from_goal.iter().copied().filter(|&i| filled[i]).collect();
    obs.reverse();
    obs
}

fn chain_cost(order: &[usize], root_cost: &[u32], pair: &[Vec<u32>]) -> u64 {
    let mut c = root_cost[order[0]] as u64;
    for w in order.windows(2) {
        c += pair[w[0]][w[1]] as u64;
    }
    c
}

pub fn plan_connection_route(
    dec: &RegionDecomposition,
    occ: &Occupancy,
    target: &TargetPattern,
) -> Result<ConnectionRoute> {
    occ.lattice().ensure_same(target.lattice(), "occupancy vs target")?;
    let lattice = *occ.lattice();
    let filled = occ.mask();
    let tmask = target.mask();
    let regions: Vec<Vec<usize>> = dec
        .closed_regions
        .iter()
        .map(|r| r.iter().map(|&s| lattice.index(s)).collect())
        .collect();
    let m = regions.len();
    if m == 0 {
        return Ok(ConnectionRoute {
            connections: Vec::new(),
            obstacle_count: 0,
            region_region_count: 0,
            junction_count: 0,
        });
    }
    let roots = root_goals(&lattice, filled, tmask);
    // obstacle cost of a corridor ending on a root-goal target atom includes
    // that atom itself, which `dist` already counts
    let fields: Vec<Field> = regions.iter().map(|r| field(&lattice, filled, tmask, r)).collect();

    let root_end: Vec<Option<usize>> = fields.iter().map(|f| f.best(roots.iter().copied())).collect();
    let root_cost: Vec<u32> = root_end
        .iter()
        .zip(&fields)
        .map(|(e, f)| e.map_or(UNREACHED / 4, |g| f.dist[g]))
        .collect();
    let pair_end: Vec<Vec<Option<usize>>> = fields
        .iter()
        .map(|f| regions.iter().map(|r| f.best(r.iter().copied())).collect())
        .collect();
    let pair: Vec<Vec<u32>> = (0..m)
        .map(|i| {
            (0..m)
                .map(|j| pair_end[i][j].map_or(UNREACHED / 4, |g| fields[i].dist[g]))
                .collect()
        })
        .collect();

    // region-to-region chain: nearest neighbour, then 2-opt
    let mut order = Vec::with_capacity(m);
    let mut used = vec![false; m];
    let mut cur: Option<usize> = None;
    for _ in 0..m {
        let next = (0..m)
            .filter(|&j| !used[j])
            .min_by_key(|&j| (cur.map_or(root_cost[j], |c| pair[c][j]), j))
            .expect("unvisited region remains");
        used[next] = true;
        order.push(next);
        cur = Some(next);
    }
    let mut best = chain_cost(&order, &root_cost, &pair);
    let mut improved = true;
    while improved {
        improved = false;
        for a in 0..m {
            for b in a + 1..m {
                order[a..=b].reverse();
                let c = chain_cost(&order, &root_cost, &pair);
                if c < best {
                    best = c;
                    improved = true;
                } else {
                    order[a..=b].reverse();
                }
            }
        }
    }
    let mut chain = Vec::with_capacity(m);
    for (k, &r) in order.iter().enumerate() {
        let (to, end, f) = if k == 0 {
            (Endpoint::Open, root_end[r], &fields[r])
        } else {
            let prev = order[k - 1];
            (Endpoint::Region(prev), pair_end[r][prev], &fields[r])
        };
        let obstacles = end.map_or_else(Vec::new, |g| obstacles_of(&f.trace(g), filled));
        chain.push((r, to, obstacles));
    }
    let chain_count = distinct(chain.iter().map(|c| &c.2));

    // junction tree: repeatedly attach the cheapest region to everything
    // connected so far, corridors included
    let mut connected = vec![false; lattice.len()];
    let mut kind = vec![Endpoint::Open; lattice.len()];
    for &g in &roots {
        connected[g] = true;
    }
    let mut cleared = filled.to_vec();
    let mut attached = vec![false; m];
    let mut tree = Vec::with_capacity(m);
    for _ in 0..m {
        let mut pick: Option<(u32, usize, usize, Field)> = None;
        for r in (0..m).filter(|&r| !attached[r]) {
            let f = field(&lattice, &cleared, tmask, &regions[r]);
            if let Some(g) = f.best((0..lattice.len()).filter(|&i| connected[i])) {
                let c = f.dist[g];
                if pick.as_ref().is_none_or(|p| (c, r) < (p.0, p.1)) {
                    pick = Some((c, r, g, f));
                }
            }
        }
        let Some((_, r, g, f)) = pick else { break };
        attached[r] = true;
        // stop where the corridor first meets the connected set: free
        // travel along an earlier corridor is not part of this one
        let mut trace = f.trace(g);
        let first = trace.iter().rposition(|&i| connected[i]).expect("goal is connected");
        trace.drain(..first);
        let g = trace[0];
        let obstacles = obstacles_of(&trace, &cleared);
        let to = match kind[g] {
            Endpoint::Region(k) => Endpoint::Region(k),
            _ if roots.contains(&g) => Endpoint::Open,
            _ => Endpoint::Junction(lattice.site(g)),
        };
        for &i in &trace {
            connected[i] = true;
            cleared[i] = false;
            if kind[i] == Endpoint::Open && !roots.contains(&i) {
                kind[i] = Endpoint::Junction(lattice.site(i));
            }
        }
        for &i in &regions[r] {
            connected[i] = true;
            kind[i] = Endpoint::Region(r);
        }
        tree.push((r, to, obstacles));
    }
    let tree_count = distinct(tree.iter().map(|c| &c.2));

    let (chosen, count) = if tree.len() == m && tree_count <= chain_count {
        (tree, tree_count)
    } else {
        (chain, chain_count)
    };
    Ok(ConnectionRoute {
        connections: chosen
            .into_iter()
            .map(|(region, to, obs)| Connection {
                region,
                to,
                obstacles: obs.into_iter().map(|i| lattice.site(i)).collect(),
            })
            .collect(),
        obstacle_count: count,
        region_region_count: chain_count,
        junction_count: tree_count,
    })
}

fn distinct<'a>(lists: impl Iterator<Item = &'a Vec<usize>>) -> usize {
    lists.flatten().collect::<BTreeSet<_>>().len()
}
