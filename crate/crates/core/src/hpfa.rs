//! Search-distance path finding with obstacle chains.
//!
//! A search distance `d` starts at 1 and grows until every target is
//! settled. At each distance, every vacant target looks for reservoir atoms
//! within `d` grid steps (obstacles ignored). The candidate whose straight
//! (Manhattan-shortest) path crosses the fewest atoms wins. If that path is
//! blocked, the blocking atom nearest the target moves into the target, the
//! next one into the freed site, and so on, with the source atom closing
//! the chain.

use crate::error::{Error, Result};
use crate::lattice::{is_feasible, Lattice, Occupancy, TargetPattern};
use crate::plan::{MovePlan, Phase, PlanBuilder};
use crate::search::{self, UNREACHED};

/// When the search distance grows.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SearchSchedule {
    /// One pass over all vacant targets per distance, then `d += 1`.
    #[default]
    PerRound,
    /// Each target, in order, grows its own distance from 1 until it is
    /// satisfied.
    PerTarget,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct HpfaConfig {
    pub schedule: SearchSchedule,
}

pub fn plan_hpfa(occ: &Occupancy, target: &TargetPattern) -> Result<MovePlan> {
    plan_hpfa_with(occ, target, &HpfaConfig::default())
}

/// For every site, the fewest atoms strictly between it and `to` over all
/// Manhattan-shortest paths. Sites are visited in order of distance from
/// `to`, so each value only depends on already-final neighbours.
fn obstacle_field(lattice: &Lattice, filled: &[bool], to: usize, by_distance: &mut Vec<usize>) -> Vec<u32> {
    let mut cost = vec![UNREACHED; lattice.len()];
    cost[to] = 0;
    by_distance.clear();
    by_distance.extend(0..lattice.len());
    by_distance.sort_by_key(|&i| lattice.manhattan_idx(i, to));
    for &u in by_distance.iter().skip(1) {
        let du = lattice.manhattan_idx(u, to);
        let best = lattice
            .neighbors(u)
            .filter(|&n| lattice.manhattan_idx(n, to) + 1 == du)
            .map(|n| if n == to { 0 } else { cost[n] + filled[n] as u32 })
            .min()
            .expect("a site off the target has a neighbour closer to it");
        cost[u] = best;
    }
    cost
}

/// Path from `src` to `to` following the obstacle field, smallest index on ties.
fn trace(lattice: &Lattice, filled: &[bool], cost: &[u32], src: usize, to: usize) -> Vec<usize> {
    let mut path = vec![src];
    let mut cur = src;
    while cur != to {
        let d = lattice.manhattan_idx(cur, to);
        let next = lattice
            .neighbors(cur)
            .filter(|&n| lattice.manhattan_idx(n, to) + 1 == d)
            .min_by_key(|&n| (if n == to { 0 } else { cost[n] + filled[n] as u32 }, n))
            .expect("closer neighbour exists");
        path.push(next);
        cur = next;
    }
    path
}

struct Planner<'a> {
    b: PlanBuilder,
    tmask: &'a [bool],
    scratch: Vec<usize>,
}

impl Planner<'_> {
    /// Grid distance from every site to the nearest reservoir atom.
    fn source_distance(&self) -> Vec<u32> {
        let lattice = self.b.lattice;
        let sources = (0..lattice.len()).filter(|&i| self.b.filled[i] && !self.tmask[i]);
        let no_block = vec![false; lattice.len()];
        search::vacancy_bfs(&lattice, &no_block, sources, |_| true)
    }

    /// Tries to settle vacant target `v` with a source within `d`.
    fn settle(&mut self, v: usize, d: usize) -> bool {
        let lattice = self.b.lattice;
        let filled = &self.b.filled;
        let cost = obstacle_field(&lattice, filled, v, &mut self.scratch);
        let best = (0..lattice.len())
            .filter(|&s| filled[s] && !self.tmask[s])
            .map(|s| (cost[s], lattice.manhattan_idx(s, v), s))
            .filter(|&(_, dist, _)| dist <= d)
            .min();
        let Some((_, _, src)) = best else { return false };
        let path = trace(&lattice, filled, &cost, src, v);
        // split points: atoms on the interior, nearest the target first
        let mut cuts: Vec<usize> = (1..path.len() - 1).filter(|&k| filled[path[k]]).collect();
        cuts.reverse();
        let mut end = path.len() - 1;
        for &k in &cuts {
            self.b.push(&path[k..=end], Phase::Open);
            end = k;
        }
        let phase = if cuts.is_empty() { Phase::Direct } else { Phase::Fill };
        self.b.push(&path[..=end], phase);
        true
    }
}

pub fn plan_hpfa_with(occ: &Occupancy, target: &TargetPattern, cfg: &HpfaConfig) -> Result<MovePlan> {
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
    let mut p = Planner {
        b: PlanBuilder::new(occ),
        tmask,
        scratch: Vec::with_capacity(lattice.len()),
    };
    let vacant = |p: &Planner| -> Vec<usize> {
        (0..lattice.len())
            .filter(|&i| tmask[i] && !p.b.filled[i])
            .collect()
    };
    let diameter = lattice.diameter();
    match cfg.schedule {
        SearchSchedule::PerRound => {
            let mut d = 1;
            loop {
                let todo = vacant(&p);
                if todo.is_empty() {
                    break;
                }
                if d > diameter {
                    return Err(Error::Infeasible(format!(
                        "{} targets unsettled at search distance {d}",
                        todo.len()
                    )));
                }
                let near = p.source_distance();
                for v in todo {
                    // sources only ever disappear, so a stale lower bound is
                    // a safe filter
                    if (near[v] as usize) <= d {
                        p.settle(v, d);
                    }
                }
                d += 1;
            }
        }
        SearchSchedule::PerTarget => {
            for v in vacant(&p) {
                let mut d = 1;
                while !p.settle(v, d) {
                    d += 1;
                    if d > diameter {
                        return Err(Error::Infeasible(format!(
                            "target {} unsettled at search distance {d}",
                            lattice.site(v)
                        )));
                    }
                }
            }
        }
    }
    Ok(p.b.finish())
}
