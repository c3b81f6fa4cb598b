//! Moves, plans, ideal replay and plan metrics.

use std::fmt;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Lattice, Occupancy, Site};
use crate::search;

/// Why a move was emitted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    /// Relocation of a blocking atom to open a path or region.
    Open,
    /// Fill of a vacancy that was not directly reachable at the start.
    Fill,
    /// Fill of a vacancy that was directly reachable from the start.
    Direct,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Open => "open",
            Phase::Fill => "fill",
            Phase::Direct => "direct",
        })
    }
}

/// One extract / transit / release cycle of a single atom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Move {
    pub src: Site,
    pub dst: Site,
    /// Sites visited, `src` first and `dst` last.
    pub path: Vec<Site>,
    pub phase: Phase,
}

impl Move {
    /// Grid steps travelled.
    pub fn distance(&self) -> usize {
        self.path.len().saturating_sub(1)
    }

    /// Path shape checks that do not depend on occupancy.
    pub fn check_shape(&self, lattice: &Lattice) -> std::result::Result<(), ViolationKind> {
        if self.src == self.dst {
            return Err(ViolationKind::Malformed("src equals dst".into()));
        }
        if self.path.first() != Some(&self.src) || self.path.last() != Some(&self.dst) {
            return Err(ViolationKind::Malformed("path endpoints do not match".into()));
        }
        if let Some(s) = self.path.iter().find(|s| !lattice.contains(**s)) {
            return Err(ViolationKind::OutOfRange(*s));
        }
        if self.path.windows(2).any(|w| !w[0].is_neighbor(w[1])) {
            return Err(ViolationKind::Malformed("non-adjacent path step".into()));
        }
        let mut seen = self.path.clone();
        seen.sort_unstable();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(ViolationKind::Malformed("path revisits a site".into()));
        }
        Ok(())
    }
}

/// Ordered list of moves for one lattice.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MovePlan {
    pub lattice: Lattice,
    pub moves: Vec<Move>,
}

impl MovePlan {
    pub fn new(lattice: Lattice) -> Self {
        MovePlan {
            lattice,
            moves: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    pub fn total_distance(&self) -> usize {
        self.moves.iter().map(Move::distance).sum()
    }

    pub fn count_phase(&self, phase: Phase) -> usize {
        self.moves.iter().filter(|m| m.phase == phase).count()
    }

    /// One JSON object per line:
    /// `{"i":0,"src":[r,c],"dst":[r,c],"path":[[r,c],...],"phase":"fill"}`.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for (i, m) in self.moves.iter().enumerate() {
            let rec = MoveRecord {
                i,
                src: m.src,
                dst: m.dst,
                path: m.path.clone(),
                phase: m.phase,
            };
            serde_json::to_writer(&mut w, &rec)?;
            w.write_all(b"\n").map_err(|e| Error::io("<plan>", e))?;
        }
        Ok(())
    }

    pub fn to_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }

    pub fn read_jsonl<R: BufRead>(lattice: Lattice, r: R) -> Result<Self> {
        let mut plan = MovePlan::new(lattice);
        for line in r.lines() {
            let line = line.map_err(|e| Error::io("<plan>", e))?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: MoveRecord = serde_json::from_str(&line)?;
            if rec.i != plan.moves.len() {
                return Err(Error::InvalidParameter(format!(
                    "move index {} out of sequence (expected {})",
                    rec.i,
                    plan.moves.len()
                )));
            }
            plan.moves.push(Move {
                src: rec.src,
                dst: rec.dst,
                path: rec.path,
                phase: rec.phase,
            });
        }
        Ok(plan)
    }
}

#[derive(Serialize, Deserialize)]
struct MoveRecord {
    i: usize,
    src: Site,
    dst: Site,
    path: Vec<Site>,
    phase: Phase,
}

/// What went wrong with a move during replay.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    LatticeMismatch,
    Malformed(String),
    OutOfRange(Site),
    SourceEmpty,
    DestinationOccupied,
    PathBlocked(Site),
}

/// First offending move of a plan.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub index: usize,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "move {}: ", self.index)?;
        match &self.kind {
            ViolationKind::LatticeMismatch => write!(f, "plan and occupancy lattices differ"),
            ViolationKind::Malformed(why) => write!(f, "malformed move ({why})"),
            ViolationKind::OutOfRange(s) => write!(f, "site {s} outside lattice"),
            ViolationKind::SourceEmpty => write!(f, "source trap is empty"),
            ViolationKind::DestinationOccupied => write!(f, "destination trap is occupied"),
            ViolationKind::PathBlocked(s) => write!(f, "path blocked at {s}"),
        }
    }
}

/// Replays `plan` on `occ` and returns the final occupancy, or the first
/// violation. Vacancy is judged against the evolving state.
fn replay(occ: &Occupancy, plan: &MovePlan) -> std::result::Result<Occupancy, Violation> {
    if occ.lattice() != &plan.lattice {
        return Err(Violation {
            index: 0,
            kind: ViolationKind::LatticeMismatch,
        });
    }
    let mut state = occ.clone();
    for (index, m) in plan.moves.iter().enumerate() {
        let fail = |kind| Violation { index, kind };
        m.check_shape(&plan.lattice).map_err(fail)?;
        if !state.is_filled(m.src) {
            return Err(fail(ViolationKind::SourceEmpty));
        }
        if state.is_filled(m.dst) {
            return Err(fail(ViolationKind::DestinationOccupied));
        }
        if let Some(s) = m.path[1..m.path.len() - 1].iter().find(|s| state.is_filled(**s)) {
            return Err(fail(ViolationKind::PathBlocked(*s)));
        }
        state.set(m.src, false);
        state.set(m.dst, true);
    }
    Ok(state)
}

pub fn validate_plan(occ: &Occupancy, plan: &MovePlan) -> std::result::Result<(), Violation> {
    replay(occ, plan).map(|_| ())
}

/// Ideal, lossless execution.
pub fn apply_plan(occ: &Occupancy, plan: &MovePlan) -> Result<Occupancy> {
    replay(occ, plan).map_err(Error::InvalidPlan)
}

/// Shortest 4-connected path from occupied `src` to vacant `dst` through
/// vacant traps; ties resolve to the lexicographically smallest site sequence.
pub fn find_path(occ: &Occupancy, src: Site, dst: Site) -> Result<Option<Move>> {
    let lattice = occ.lattice();
    lattice.check(src)?;
    lattice.check(dst)?;
    if !occ.is_filled(src) || occ.is_filled(dst) || src == dst {
        return Err(Error::InvalidParameter(format!(
            "find_path needs an occupied source and a vacant destination, got {src} -> {dst}"
        )));
    }
    let path = search::shortest_path(
        lattice,
        occ.mask(),
        lattice.index(src),
        lattice.index(dst),
        |_| true,
    );
    Ok(path.map(|p| Move {
        src,
        dst,
        path: p.into_iter().map(|i| lattice.site(i)).collect(),
        phase: Phase::Direct,
    }))
}

/// Move counts and distances for one plan.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanMetrics {
    pub n_moves: usize,
    pub total_distance: usize,
    /// `n_moves / N`; absent when nothing needed filling.
    pub n_per_filled: Option<f64>,
    pub n_open: usize,
    pub n_fill: usize,
    pub n_direct: usize,
}

/// `vacant` is the number of vacant targets of the instance the plan was
/// built for.
pub fn plan_metrics(plan: &MovePlan, vacant: usize) -> PlanMetrics {
    let n_moves = plan.len();
    PlanMetrics {
        n_moves,
        total_distance: plan.total_distance(),
        n_per_filled: (vacant > 0).then(|| n_moves as f64 / vacant as f64),
        n_open: plan.count_phase(Phase::Open),
        n_fill: plan.count_phase(Phase::Fill),
        n_direct: plan.count_phase(Phase::Direct),
    }
}

/// Scratch state shared by the planners: a filled mask plus the moves
/// emitted so far.
#[derive(Clone, Debug)]
pub(crate) struct PlanBuilder {
    pub lattice: Lattice,
    pub filled: Vec<bool>,
    pub moves: Vec<Move>,
}

impl PlanBuilder {
    pub fn new(occ: &Occupancy) -> Self {
        PlanBuilder {
            lattice: *occ.lattice(),
            filled: occ.mask().to_vec(),
            moves: Vec::new(),
        }
    }

    /// Records a move along `path` (indices, endpoints included).
    pub fn push(&mut self, path: &[usize], phase: Phase) {
        let (src, dst) = (path[0], *path.last().expect("non-empty path"));
        debug_assert!(self.filled[src] && !self.filled[dst]);
        debug_assert!(path[1..path.len() - 1].iter().all(|&i| !self.filled[i]));
        self.filled[src] = false;
        self.filled[dst] = true;
        self.moves.push(Move {
            src: self.lattice.site(src),
            dst: self.lattice.site(dst),
            path: path.iter().map(|&i| self.lattice.site(i)).collect(),
            phase,
        });
    }

    pub fn finish(self) -> MovePlan {
        MovePlan {
            lattice: self.lattice,
            moves: self.moves,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mv(path: &[(usize, usize)]) -> Move {
        let path: Vec<Site> = path.iter().map(|&p| p.into()).collect();
        Move {
            src: path[0],
            dst: *path.last().unwrap(),
            path,
            phase: Phase::Direct,
        }
    }

    #[test]
    fn adjacent_and_straight_paths() {
        let l = Lattice::new(3, 6).unwrap();
        let occ = Occupancy::from_sites(l, [(1, 0)]).unwrap();
        let m = find_path(&occ, Site::new(1, 0), Site::new(1, 1)).unwrap().unwrap();
        assert_eq!(m.path.len(), 2);
        assert_eq!(m.distance(), 1);
        let m = find_path(&occ, Site::new(1, 0), Site::new(1, 5)).unwrap().unwrap();
        assert_eq!(m.distance(), 5);
        assert!(m.path.iter().all(|s| s.row == 1));
    }

    #[test]
    fn path_not_found_when_walled() {
        let l = Lattice::new(3, 3).unwrap();
        let occ = Occupancy::from_sites(l, [(0, 0), (0, 1), (1, 0)]).unwrap();
        assert_eq!(find_path(&occ, Site::new(0, 0), Site::new(2, 2)).unwrap(), None);
    }

    #[test]
    fn empty_plan_is_ok() {
        let l = Lattice::square(4).unwrap();
        let occ = Occupancy::from_sites(l, [(0, 0)]).unwrap();
        let plan = MovePlan::new(l);
        assert_eq!(validate_plan(&occ, &plan), Ok(()));
        assert_eq!(apply_plan(&occ, &plan).unwrap(), occ);
    }

    #[test]
    fn vacated_source_can_be_crossed_later() {
        let l = Lattice::new(1, 4).unwrap();
        let occ = Occupancy::from_sites(l, [(0, 0), (0, 1)]).unwrap();
        let mut plan = MovePlan::new(l);
        plan.moves.push(mv(&[(0, 1), (0, 2), (0, 3)]));
        // (0,1) was the first move's source; it is vacant by now
        plan.moves.push(mv(&[(0, 0), (0, 1), (0, 2)]));
        assert_eq!(validate_plan(&occ, &plan), Ok(()));
        let end = apply_plan(&occ, &plan).unwrap();
        assert_eq!(end.count(), 2);
        assert!(end.is_filled(Site::new(0, 2)) && end.is_filled(Site::new(0, 3)));
    }

    #[test]
    fn blocked_interior_reported() {
        let l = Lattice::new(1, 4).unwrap();
        let occ = Occupancy::from_sites(l, [(0, 0), (0, 2)]).unwrap();
        let mut plan = MovePlan::new(l);
        plan.moves.push(mv(&[(0, 2), (0, 3)]));
        plan.moves.push(mv(&[(0, 0), (0, 1), (0, 2)]));
        plan.moves.push(mv(&[(0, 2), (0, 1)]));
        plan.moves.push(mv(&[(0, 1), (0, 2), (0, 3)]));
        let v = validate_plan(&occ, &plan).unwrap_err();
        assert_eq!(v.index, 3);
        assert_eq!(v.kind, ViolationKind::DestinationOccupied);

        let occ = Occupancy::from_sites(l, [(0, 0), (0, 1)]).unwrap();
        let mut plan = MovePlan::new(l);
        plan.moves.push(mv(&[(0, 0), (0, 1), (0, 2)]));
        let v = validate_plan(&occ, &plan).unwrap_err();
        assert_eq!(v.index, 0);
        assert_eq!(v.kind, ViolationKind::PathBlocked(Site::new(0, 1)));
    }

    #[test]
    fn source_empty_and_malformed() {
        let l = Lattice::new(2, 2).unwrap();
        let occ = Occupancy::from_sites(l, [(0, 0)]).unwrap();
        let mut plan = MovePlan::new(l);
        plan.moves.push(mv(&[(1, 1), (1, 0)]));
        assert_eq!(validate_plan(&occ, &plan).unwrap_err().kind, ViolationKind::SourceEmpty);

        let mut plan = MovePlan::new(l);
        plan.moves.push(mv(&[(0, 0), (1, 1)]));
        assert!(matches!(
            validate_plan(&occ, &plan).unwrap_err().kind,
            ViolationKind::Malformed(_)
        ));
        assert!(apply_plan(&occ, &plan).is_err());
    }

    #[test]
    fn single_move_changes_exactly_two_sites() {
        let l = Lattice::square(3).unwrap();
        let occ = Occupancy::from_sites(l, [(0, 0), (2, 2)]).unwrap();
        let m = find_path(&occ, Site::new(0, 0), Site::new(1, 1)).unwrap().unwrap();
        let mut plan = MovePlan::new(l);
        plan.moves.push(m);
        let after = apply_plan(&occ, &plan).unwrap();
        let before: Vec<Site> = occ.filled_sites().collect();
        let after_sites: Vec<Site> = after.filled_sites().collect();
        assert_eq!(before, vec![Site::new(0, 0), Site::new(2, 2)]);
        assert_eq!(after_sites, vec![Site::new(1, 1), Site::new(2, 2)]);
    }

    #[test]
    fn metrics_arithmetic() {
        let l = Lattice::new(1, 5).unwrap();
        let m = plan_metrics(&MovePlan::new(l), 0);
        assert_eq!(m.n_per_filled, None);
        assert_eq!(m.total_distance, 0);

        let mut plan = MovePlan::new(l);
        for _ in 0..3 {
            plan.moves.push(mv(&[(0, 0), (0, 1), (0, 2), (0, 3), (0, 4)]));
        }
        let m = plan_metrics(&plan, 3);
        assert_eq!(m.n_moves, 3);
        assert_eq!(m.total_distance, 12);
        assert_eq!(m.n_per_filled, Some(1.0));
    }

    #[test]
    fn jsonl_format() {
        let l = Lattice::new(1, 3).unwrap();
        let mut plan = MovePlan::new(l);
        plan.moves.push(mv(&[(0, 0), (0, 1), (0, 2)]));
        let text = plan.to_jsonl();
        assert_eq!(
            text,
            "{\"i\":0,\"src\":[0,0],\"dst\":[0,2],\"path\":[[0,0],[0,1],[0,2]],\"phase\":\"direct\"}\n"
        );
        let back = MovePlan::read_jsonl(l, text.as_bytes()).unwrap();
        assert_eq!(back, plan);
    }
}
