//! Exact minimum move count for tiny instances.
//!
//! States are occupancy bitmasks; one transition is one legal move (any
//! atom to any vacant trap it can reach through vacant traps). The search
//! is best-first with the number of vacant targets as heuristic: a move
//! fills at most one target, so the heuristic never overestimates and the
//! first goal state popped is optimal.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use crate::error::{Error, Result};
use crate::lattice::{is_feasible, Occupancy, TargetPattern};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_sites: usize,
    pub max_atoms: usize,
    /// States expanded before giving up.
    pub node_budget: usize,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            max_sites: 16,
            max_atoms: 8,
            node_budget: 1_000_000,
        }
    }
}

pub fn optimal_moves_oracle(occ: &Occupancy, target: &TargetPattern, limits: &OracleLimits) -> Result<usize> {
    occ.lattice().ensure_same(target.lattice(), "occupancy vs target")?;
    let lattice = *occ.lattice();
    let n = lattice.len();
    if n > limits.max_sites.min(64) {
        return Err(Error::OracleLimit(format!("{lattice} exceeds {} sites", limits.max_sites)));
    }
    if occ.count() > limits.max_atoms {
        return Err(Error::OracleLimit(format!(
            "{} atoms exceed the limit of {}",
            occ.count(),
            limits.max_atoms
        )));
    }
    if !is_feasible(occ, target) {
        return Err(Error::Infeasible("fewer atoms than targets".into()));
    }
    let to_bits = |m: &[bool]| m.iter().enumerate().fold(0u64, |acc, (i, &b)| acc | ((b as u64) << i));
    let goal = to_bits(target.mask());
    let start = to_bits(occ.mask());
    let h = |s: u64| (goal & !s).count_ones() as usize;
    let nbrs: Vec<Vec<usize>> = (0..n).map(|i| lattice.neighbors(i).collect()).collect();

    let mut best: HashMap<u64, usize> = HashMap::new();
    let mut heap = BinaryHeap::new();
    best.insert(start, 0);
    heap.push(Reverse((h(start), 0usize, start)));
    let mut expanded = 0usize;
    let mut stack = Vec::with_capacity(n);
    while let Some(Reverse((_, g, state))) = heap.pop() {
        if state & goal == goal {
            return Ok(g);
        }
        if best.get(&state).is_some_and(|&b| b < g) {
            continue;
        }
        expanded += 1;
        if expanded > limits.node_budget {
            return Err(Error::OracleLimit(format!(
                "node budget of {} exhausted",
                limits.node_budget
            )));
        }
        for src in (0..n).filter(|&i| state >> i & 1 == 1) {
            // flood fill of vacant traps reachable from src
            let mut seen = 1u64 << src;
            stack.clear();
            stack.push(src);
            while let Some(u) = stack.pop() {
                for &v in &nbrs[u] {
                    let bit = 1u64 << v;
                    if state & bit == 0 && seen & bit == 0 {
                        seen |= bit;
                        stack.push(v);
                    }
                }
            }
            let mut dests = seen & !(1u64 << src);
            while dests != 0 {
                let d = dests.trailing_zeros();
                dests &= dests - 1;
                let next = (state & !(1u64 << src)) | (1u64 << d);
                let ng = g + 1;
                if best.get(&next).is_none_or(|&b| ng < b) {
                    best.insert(next, ng);
                    heap.push(Reverse((ng + h(next), ng, next)));
                }
            }
        }
    }
    Err(Error::Infeasible("no sequence of moves fills the target".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{make_target, Lattice, PatternSpec};

    fn setup(rows: &[&str], k: usize) -> (Occupancy, TargetPattern) {
        let occ = Occupancy::from_text(&rows.join("\n")).unwrap();
        let t = make_target(*occ.lattice(), &PatternSpec::Square(k)).unwrap();
        (occ, t)
    }

    #[test]
    fn defect_free_is_zero() {
        let (occ, t) = setup(&["...", ".#.", "..."], 1);
        assert_eq!(optimal_moves_oracle(&occ, &t, &OracleLimits::default()).unwrap(), 0);
    }

    #[test]
    fn adjacent_reservoir_atom_is_one() {
        let (occ, t) = setup(&["...", "#..", "..."], 1);
        assert_eq!(optimal_moves_oracle(&occ, &t, &OracleLimits::default()).unwrap(), 1);
    }

    #[test]
    fn surrounded_target_takes_a_neighbour() {
        // the blocking atoms are themselves reservoir atoms, so one steps in
        let (occ, t) = setup(&[".#.", "#.#", ".#."], 1);
        assert_eq!(optimal_moves_oracle(&occ, &t, &OracleLimits::default()).unwrap(), 1);
        let (occ, t) = setup(&["###", "#.#", "###"], 1);
        let limits = OracleLimits {
            max_atoms: 9,
            ..OracleLimits::default()
        };
        assert_eq!(optimal_moves_oracle(&occ, &t, &limits).unwrap(), 1);
    }

    #[test]
    fn limits_enforced() {
        let l = Lattice::square(5).unwrap();
        let t = make_target(l, &PatternSpec::Square(1)).unwrap();
        let occ = Occupancy::from_sites(l, [(0, 0)]).unwrap();
        assert!(matches!(
            optimal_moves_oracle(&occ, &t, &OracleLimits::default()),
            Err(Error::OracleLimit(_))
        ));
    }
}
