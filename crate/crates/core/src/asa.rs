//! Layered center-out filling.
//!
//! Target sites are peeled into layers like an onion: layer 1 touches the
//! reservoir, layer 2 touches layer 1, and so on. Layers are filled from
//! the innermost outward; each vacancy takes the nearest usable atom along
//! a shortest unobstructed path. A vacancy that no usable atom can reach
//! pulls in the nearest atom sealing it, which pushes the hole one step
//! outward.

use crate::error::{Error, Result};
use crate::hca::cheapest_corridor;
use crate::lattice::{is_feasible, Lattice, Occupancy, Site, TargetPattern};
use crate::plan::{MovePlan, Phase, PlanBuilder};
use crate::search;

/// Target sites grouped by depth, `layers[0]` outermost.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayerClassification {
    pub layers: Vec<Vec<Site>>,
}

impl LayerClassification {
    pub fn sizes(&self) -> Vec<usize> {
        self.layers.iter().map(Vec::len).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AsaConfig {
    /// Atoms on target sites of layers not yet processed may serve as
    /// sources for inner layers.
    pub outer_layer_sources: bool,
    /// How many times a hole may be pushed outward within one layer pass
    /// before the site is deferred to the end of the pass.
    pub max_displacement_depth: usize,
}

impl Default for AsaConfig {
    fn default() -> Self {
        AsaConfig {
            outer_layer_sources: true,
            max_displacement_depth: 3,
        }
    }
}

/// Layer number per site (1 = outermost, 0 = reservoir). Sites outside the
/// lattice count as reservoir.
pub(crate) fn layer_numbers(lattice: &Lattice, target: &[bool]) -> Vec<usize> {
    let mut layer = vec![0usize; lattice.len()];
    let mut frontier: Vec<usize> = (0..lattice.len())
        .filter(|&i| {
            target[i] && (lattice.on_border(i) || lattice.neighbors(i).any(|n| !target[n]))
        })
        .collect();
    for &i in &frontier {
        layer[i] = 1;
    }
    let mut k = 1;
    while !frontier.is_empty() {
        k += 1;
        let mut next = Vec::new();
        for &u in &frontier {
            for n in lattice.neighbors(u) {
                if target[n] && layer[n] == 0 {
                    layer[n] = k;
                    next.push(n);
                }
            }
        }
        frontier = next;
    }
    layer
}

pub fn classify_layers(target: &TargetPattern) -> LayerClassification {
    let lattice = target.lattice();
    let layer = layer_numbers(lattice, target.mask());
    let depth = layer.iter().copied().max().unwrap_or(0);
    let mut layers = vec![Vec::new(); depth];
    for (i, &k) in layer.iter().enumerate() {
        if k > 0 {
            layers[k - 1].push(lattice.site(i));
        }
    }
    LayerClassification { layers }
}

pub fn plan_asa(occ: &Occupancy, target: &TargetPattern) -> Result<MovePlan> {
    plan_asa_with(occ, target, &AsaConfig::default())
}

struct Pass<'a> {
    b: PlanBuilder,
    tmask: &'a [bool],
    layer: Vec<usize>,
    current: usize,
    cfg: &'a AsaConfig,
    initially_reachable: Vec<bool>,
}

impl Pass<'_> {
    fn is_source(&self, s: usize) -> bool {
        self.b.filled[s]
            && (!self.tmask[s] || (self.cfg.outer_layer_sources && self.layer[s] < self.current))
    }

    /// Finished inner layers are walls.
    fn open_to_paths(&self, s: usize) -> bool {
        self.layer[s] <= self.current
    }

    /// Fills `v` directly if a usable atom reaches it. Otherwise displaces
    /// the innermost sealing atom into `v` and returns the freed site.
    fn step(&mut self, v: usize) -> Result<Option<usize>> {
        let lattice = self.b.lattice;
        let found = search::nearest_source(
            &lattice,
            &self.b.filled,
            v,
            |s| self.is_source(s),
            |s| self.open_to_paths(s),
        );
        if let Some((_, path)) = found {
            let phase = if self.initially_reachable[v] { Phase::Direct } else { Phase::Fill };
            self.b.push(&path, phase);
            return Ok(None);
        }
        let comp = search::vacancy_component(&lattice, &self.b.filled, v, |s| self.open_to_paths(s));
        let corridor = cheapest_corridor(
            &lattice,
            &self.b.filled,
            &comp,
            |s| self.is_source(s),
            |_| 0,
            |s| self.tmask[s] && self.open_to_paths(s),
        )
        .ok_or_else(|| Error::Infeasible(format!("vacancy {} cannot be reached", lattice.site(v))))?;
        let o = corridor.obstacles[0];
        let path = search::shortest_path(&lattice, &self.b.filled, o, v, |s| self.open_to_paths(s))
            .expect("sealing atom borders the vacancy's component");
        self.b.push(&path, Phase::Open);
        Ok(Some(o))
    }
}

pub fn plan_asa_with(occ: &Occupancy, target: &TargetPattern, cfg: &AsaConfig) -> Result<MovePlan> {
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
    let layer = layer_numbers(&lattice, tmask);
    let depth = layer.iter().copied().max().unwrap_or(0);
    let reach0 = crate::hca::reachable_vacancies(&lattice, occ.mask(), tmask);
    let mut pass = Pass {
        b: PlanBuilder::new(occ),
        tmask,
        layer,
        current: depth,
        cfg,
        initially_reachable: reach0,
    };

    for k in (1..=depth).rev() {
        pass.current = k;
        let pending: Vec<usize> = (0..lattice.len())
            .filter(|&i| pass.layer[i] == k && !pass.b.filled[i])
            .collect();
        let mut deferred = Vec::new();
        for v in pending {
            let mut hole = v;
            let mut pushes = 0;
            while !pass.b.filled[hole] {
                match pass.step(hole)? {
                    None => break,
                    Some(freed) => {
                        if pass.layer[freed] != k {
                            break;
                        }
                        pushes += 1;
                        hole = freed;
                        if pushes >= cfg.max_displacement_depth {
                            deferred.push(hole);
                            break;
                        }
                    }
                }
            }
        }
        // deferred holes: every displacement shortens the remaining
        // corridor, so this terminates without a depth bound
        let mut queue = deferred;
        let mut guard = 0usize;
        while let Some(hole) = queue.pop() {
            guard += 1;
            if guard > 4 * lattice.len() * lattice.len() {
                return Err(Error::Infeasible("layer pass did not converge".into()));
            }
            if pass.b.filled[hole] {
                continue;
            }
            if let Some(freed) = pass.step(hole)? {
                if pass.layer[freed] == k {
                    queue.push(freed);
                }
            }
        }
        debug_assert!((0..lattice.len()).all(|i| pass.layer[i] != k || pass.b.filled[i]));
    }
    Ok(pass.b.finish())
}
