//! Heuristic cluster algorithm.
//!
//! Vacant target sites are grouped into 4-connected regions. A region is
//! *open* when some reservoir atom can reach it through empty traps and
//! *closed* otherwise. Closed regions are opened by relocating the atoms
//! that seal them into the region itself, cheapest corridor first. Once
//! everything is open, vacancies are filled from the reservoir starting
//! with the one deepest inside the target.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::lattice::{is_feasible, Lattice, Occupancy, Site, TargetPattern};
use crate::plan::{Move, MovePlan, Phase, PlanBuilder};
use crate::route::plan_connection_route;
use crate::search::{self, UNREACHED};

/// Open and closed vacancy regions of one occupancy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionDecomposition {
    pub open_regions: Vec<Vec<Site>>,
    pub closed_regions: Vec<Vec<Site>>,
    /// Vacant sites in open regions.
    pub n1: usize,
    /// Vacant sites in closed regions.
    pub n2: usize,
}

impl RegionDecomposition {
    pub fn n_vacant(&self) -> usize {
        self.n1 + self.n2
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HcaConfig {
    /// Open closed regions along a precomputed connection route before
    /// falling back to cheapest-corridor-first.
    pub use_connection_route: bool,
}

/// Steps from the nearest reservoir atom through empty traps (0 on the
/// reservoir atoms themselves).
pub(crate) fn reservoir_distance(lattice: &Lattice, filled: &[bool], target: &[bool]) -> Vec<u32> {
    let sources = (0..lattice.len()).filter(|&i| filled[i] && !target[i]);
    search::vacancy_bfs(lattice, filled, sources, |_| true)
}

/// Vacant sites reachable from some reservoir atom through empty traps.
pub(crate) fn reachable_vacancies(lattice: &Lattice, filled: &[bool], target: &[bool]) -> Vec<bool> {
    let dist = reservoir_distance(lattice, filled, target);
    (0..lattice.len())
        .map(|i| !filled[i] && dist[i] != UNREACHED)
        .collect()
}

/// Components of vacant target sites, in order of their smallest index.
pub(crate) fn vacant_target_regions(lattice: &Lattice, filled: &[bool], target: &[bool]) -> Vec<Vec<usize>> {
    let mut label = vec![false; lattice.len()];
    let mut regions = Vec::new();
    for start in 0..lattice.len() {
        if label[start] || filled[start] || !target[start] {
            continue;
        }
        let mut region = vec![start];
        label[start] = true;
        let mut head = 0;
        while head < region.len() {
            let u = region[head];
            head += 1;
            for n in lattice.neighbors(u) {
                if !label[n] && !filled[n] && target[n] {
                    label[n] = true;
                    region.push(n);
                }
            }
        }
        region.sort_unstable();
        regions.push(region);
    }
    regions
}

fn decompose_raw(lattice: &Lattice, filled: &[bool], target: &[bool]) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let reach = reachable_vacancies(lattice, filled, target);
    vacant_target_regions(lattice, filled, target)
        .into_iter()
        .partition(|r| r.iter().any(|&i| reach[i]))
}

pub fn decompose_regions(occ: &Occupancy, target: &TargetPattern) -> Result<RegionDecomposition> {
    occ.lattice().ensure_same(target.lattice(), "occupancy vs target")?;
    let lattice = occ.lattice();
    let (open, closed) = decompose_raw(lattice, occ.mask(), target.mask());
    let to_sites = |rs: Vec<Vec<usize>>| -> Vec<Vec<Site>> {
        rs.into_iter()
            .map(|r| r.into_iter().map(|i| lattice.site(i)).collect())
            .collect()
    };
    let n1 = open.iter().map(Vec::len).sum();
    let n2 = closed.iter().map(Vec::len).sum();
    Ok(RegionDecomposition {
        open_regions: to_sites(open),
        closed_regions: to_sites(closed),
        n1,
        n2,
    })
}

/// Atoms that must be cleared to connect a set of sites to a goal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Corridor {
    /// Blocking atoms, nearest to the start set first.
    pub obstacles: Vec<usize>,
    /// Site where the corridor reaches its goal.
    pub goal: usize,
}

impl Corridor {
    pub fn cost(&self) -> usize {
        self.obstacles.len()
    }
}

/// Fewest-obstacle corridor outward from `starts`. Atoms accepted by
/// `crossable` may be cleared; other atoms are walls. The search stops on
/// the cheapest site satisfying `goal`, whose own `goal_cost` (remaining
/// distance) only breaks ties between corridors with equal obstacle counts.
pub(crate) fn cheapest_corridor(
    lattice: &Lattice,
    filled: &[bool],
    starts: &[usize],
    goal: impl Fn(usize) -> bool,
    goal_cost: impl Fn(usize) -> u32,
    crossable: impl Fn(usize) -> bool,
) -> Option<Corridor> {
    // cost = obstacles first, then steps plus the goal's own remaining
    // distance, so equally cheap corridors prefer the short way out
    let n = lattice.len();
    let weight = 4 * n as u64 + 4;
    let mut dist = vec![u64::MAX; n];
    let mut parent = vec![usize::MAX; n];
    let mut heap = BinaryHeap::new();
    for &s in starts {
        dist[s] = 0;
        heap.push(Reverse((0u64, s, usize::MAX)));
    }
    let mut goal_dist = vec![u64::MAX; n];
    while let Some(Reverse((d, u, via))) = heap.pop() {
        if via != usize::MAX {
            // a goal entry: `u` is the goal, `via` the corridor's last site
            if d > goal_dist[u] {
                continue;
            }
            let mut obstacles = Vec::new();
            let mut cur = via;
            while cur != usize::MAX {
                if filled[cur] {
                    obstacles.push(cur);
                }
                cur = parent[cur];
            }
            obstacles.reverse();
            return Some(Corridor { obstacles, goal: u });
        }
        if d > dist[u] {
            continue;
        }
        for v in lattice.neighbors(u) {
            if goal(v) {
                let dv = d + 1 + goal_cost(v) as u64;
                if dv < goal_dist[v] {
                    goal_dist[v] = dv;
                    heap.push(Reverse((dv, v, u)));
                }
                continue;
            }
            let w = if !filled[v] {
                1
            } else if crossable(v) {
                weight + 1
            } else {
                continue;
            };
            let dv = d + w;
            if dv < dist[v] {
                dist[v] = dv;
                parent[v] = u;
                heap.push(Reverse((dv, v, usize::MAX)));
            }
        }
    }
    None
}

/// Cheapest corridor from one closed region to an atom in the reservoir or
/// to a vacancy some reservoir atom can already reach. `reach` is
/// [`reservoir_distance`] for the same occupancy.
pub(crate) fn region_corridor(
    lattice: &Lattice,
    filled: &[bool],
    target: &[bool],
    reach: &[u32],
    region: &[usize],
) -> Option<Corridor> {
    cheapest_corridor(
        lattice,
        filled,
        region,
        |v| (filled[v] && !target[v]) || reach[v] != UNREACHED,
        |v| if filled[v] { 0 } else { reach[v] },
        |v| target[v],
    )
}

/// Moves each obstacle, nearest first, into the vacancy of the growing
/// region that lies farthest from it. Stops early if an obstacle cannot
/// reach the region (the corridor went stale). Returns moves emitted.
pub(crate) fn clear_corridor(b: &mut PlanBuilder, target: &[bool], seed: usize, obstacles: &[usize]) -> usize {
    let lattice = b.lattice;
    let mut seed = seed;
    let mut emitted = 0;
    for &o in obstacles {
        if !b.filled[o] || b.filled[seed] {
            break;
        }
        let comp = search::vacancy_bfs(&lattice, &b.filled, [seed], |_| true);
        let from_o = search::vacancy_bfs(&lattice, &b.filled, [o], |i| comp[i] != UNREACHED);
        let dest = (0..lattice.len())
            .filter(|&i| target[i] && !b.filled[i] && i != o && from_o[i] != UNREACHED)
            .max_by(|&a, &b| from_o[a].cmp(&from_o[b]).then(b.cmp(&a)));
        let Some(dest) = dest else { break };
        let Some(path) = search::descend(&lattice, &search::vacancy_bfs(&lattice, &b.filled, [dest], |i| comp[i] != UNREACHED), o, dest) else {
            break;
        };
        b.push(&path, Phase::Open);
        emitted += 1;
        seed = o;
    }
    emitted
}

/// Opens the closed region with the cheapest corridor. Returns `Ok(false)`
/// when nothing is closed.
fn open_cheapest(b: &mut PlanBuilder, target: &[bool]) -> Result<bool> {
    let lattice = b.lattice;
    let (_, closed) = decompose_raw(&lattice, &b.filled, target);
    if closed.is_empty() {
        return Ok(false);
    }
    let reach = reservoir_distance(&lattice, &b.filled, target);
    let best = closed
        .iter()
        .filter_map(|r| region_corridor(&lattice, &b.filled, target, &reach, r).map(|c| (r, c)))
        .min_by_key(|(r, c)| (c.cost(), r[0]));
    let Some((region, corridor)) = best else {
        return Err(Error::Infeasible(
            "a closed region cannot be connected to any reservoir atom".into(),
        ));
    };
    if corridor.obstacles.is_empty() {
        // reachability changed underneath us; nothing to clear
        return Ok(true);
    }
    if clear_corridor(b, target, region[0], &corridor.obstacles) == 0 {
        return Err(Error::Infeasible("corridor could not be cleared".into()));
    }
    Ok(true)
}

fn open_all(b: &mut PlanBuilder, target: &[bool]) -> Result<()> {
    // every call either clears an obstacle or reports infeasibility, and the
    // number of closed regions is bounded by the lattice size
    for _ in 0..=b.lattice.len() {
        if !open_cheapest(b, target)? {
            return Ok(());
        }
    }
    Err(Error::Infeasible("closed regions did not converge".into()))
}

fn open_along_route(b: &mut PlanBuilder, occ: &Occupancy, target: &TargetPattern) -> Result<()> {
    let dec = decompose_regions(occ, target)?;
    if dec.closed_regions.is_empty() {
        return Ok(());
    }
    let route = plan_connection_route(&dec, occ, target)?;
    let lattice = b.lattice;
    for conn in &route.connections {
        let region = &dec.closed_regions[conn.region];
        let seed = lattice.index(region[0]);
        if b.filled[seed] {
            continue;
        }
        let reach = reachable_vacancies(&lattice, &b.filled, target.mask());
        if reach[seed] {
            continue;
        }
        let obstacles: Vec<usize> = conn
            .obstacles
            .iter()
            .map(|&s| lattice.index(s))
            .filter(|&i| b.filled[i])
            .collect();
        clear_corridor(b, target.mask(), seed, &obstacles);
    }
    Ok(())
}

/// Relocates sealing atoms until no closed region remains. Returns the
/// opening moves and the occupancy after them.
pub fn open_closed_regions(occ: &Occupancy, target: &TargetPattern) -> Result<(Vec<Move>, Occupancy)> {
    occ.lattice().ensure_same(target.lattice(), "occupancy vs target")?;
    let mut b = PlanBuilder::new(occ);
    open_all(&mut b, target.mask())?;
    let after = Occupancy::from_mask(b.lattice, b.filled.clone())?;
    Ok((b.moves, after))
}

pub fn plan_hca(occ: &Occupancy, target: &TargetPattern) -> Result<MovePlan> {
    plan_hca_with(occ, target, &HcaConfig::default())
}

pub fn plan_hca_with(occ: &Occupancy, target: &TargetPattern, cfg: &HcaConfig) -> Result<MovePlan> {
    occ.lattice().ensure_same(target.lattice(), "occupancy vs target")?;
    if !is_feasible(occ, target) {
        return Err(Error::Infeasible(format!(
            "{} atoms for {} target sites",
            occ.count(),
            target.len()
        )));
    }
    let lattice = *occ.lattice();
    let tmask = target.mask();
    let (open0, _) = decompose_raw(&lattice, occ.mask(), tmask);
    let mut initially_open = vec![false; lattice.len()];
    for i in open0.into_iter().flatten() {
        initially_open[i] = true;
    }

    let mut b = PlanBuilder::new(occ);
    if cfg.use_connection_route {
        open_along_route(&mut b, occ, target)?;
    }
    open_all(&mut b, tmask)?;

    let outside: Vec<usize> = (0..lattice.len()).filter(|&i| !tmask[i]).collect();
    let mut stalls = 0;
    loop {
        let depth = search::vacancy_bfs(&lattice, &b.filled, outside.iter().copied(), |i| tmask[i]);
        // ties go to the vacancy farthest from any reservoir atom, so a
        // nearer one never walls it off
        let reach = reservoir_distance(&lattice, &b.filled, tmask);
        let key = |i: usize| (depth[i], reach[i].wrapping_add(1));
        let mut any_vacant = false;
        let mut pick: Option<usize> = None;
        for i in 0..lattice.len() {
            if tmask[i] && !b.filled[i] {
                any_vacant = true;
                if depth[i] != UNREACHED && pick.is_none_or(|p| key(i) > key(p)) {
                    pick = Some(i);
                }
            }
        }
        if !any_vacant {
            break;
        }
        let found = pick.and_then(|v| {
            search::nearest_source(&lattice, &b.filled, v, |s| !tmask[s], |_| true)
                .map(|(_, path)| (v, path))
        });
        match found {
            Some((v, path)) => {
                let phase = if initially_open[v] { Phase::Direct } else { Phase::Fill };
                b.push(&path, phase);
                stalls = 0;
            }
            None => {
                stalls += 1;
                if stalls > 1 || !open_cheapest(&mut b, tmask)? {
                    // the deepest vacancy is sealed off but nothing counts as
                    // closed: the reservoir side has run dry
                    return Err(Error::Infeasible("no reservoir atom can reach the remaining vacancies".into()));
                }
            }
        }
    }
    Ok(b.finish())
}
