//! Executing a plan with imperfect moves.
//!
//! By default each move succeeds with the transfer efficiency of its
//! destination site. A failed move either loses the atom or leaves it where
//! it was; in the second case a later release onto that site destroys both
//! atoms. Draws come from a ChaCha8 stream seeded by `NoiseModel::seed`
//! (stream 1, so a loading sample seeded with the same value is
//! independent).

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{survival_from_nu, HeatingModel, TimingModel};
use crate::error::{Error, Result};
use crate::lattice::{Lattice, Occupancy, Site};
use crate::plan::{validate_plan, MovePlan};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FailureMode {
    /// The atom is gone.
    #[default]
    Lost,
    /// The atom stays in its source trap.
    Stranded,
}

impl std::str::FromStr for FailureMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lost" => Ok(FailureMode::Lost),
            "stranded" => Ok(FailureMode::Stranded),
            _ => Err(Error::InvalidParameter(format!(
                "unknown failure mode `{s}` (expected lost or stranded)"
            ))),
        }
    }
}

/// How transfer efficiency varies over the lattice.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SiteProfile {
    #[default]
    Uniform,
    /// `zeta` at the lattice center, falling linearly by `gradient` at the
    /// farthest ring (Chebyshev distance).
    Gradient { gradient: f64 },
    /// One value per site, row-major.
    Map { values: Vec<f64> },
}

/// Separate extraction, transit and release success probabilities. A
/// failed extraction strands the atom; transit or release failures lose it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Channels {
    pub extract: f64,
    pub transit: f64,
    pub release: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseModel {
    /// Per-move success probability (the center value for a gradient).
    pub zeta: f64,
    pub profile: SiteProfile,
    pub failure_mode: FailureMode,
    /// Per-atom 1/e lifetime against background loss, seconds.
    pub vacuum_lifetime: Option<f64>,
    /// Extra loss probability per grid step travelled.
    pub per_grid_loss: f64,
    /// Replaces the single `zeta` draw when set.
    pub channels: Option<Channels>,
    /// Heating in the mobile tweezer over each move's duration.
    pub heating: Option<HeatingModel>,
    pub timing: TimingModel,
    pub seed: u64,
}

impl Default for NoiseModel {
    fn default() -> Self {
        NoiseModel {
            zeta: 1.0,
            profile: SiteProfile::Uniform,
            failure_mode: FailureMode::Lost,
            vacuum_lifetime: None,
            per_grid_loss: 0.0,
            channels: None,
            heating: None,
            timing: TimingModel::default(),
            seed: 0,
        }
    }
}

fn check_prob(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must lie in [0, 1], got {p}")))
    }
}

impl NoiseModel {
    pub fn uniform(zeta: f64, seed: u64) -> Self {
        NoiseModel {
            zeta,
            seed,
            ..NoiseModel::default()
        }
    }

    pub fn validate(&self, lattice: &Lattice) -> Result<()> {
        check_prob("zeta", self.zeta)?;
        check_prob("per-grid loss", self.per_grid_loss)?;
        match &self.profile {
            SiteProfile::Uniform => {}
            SiteProfile::Gradient { gradient } => {
                if !gradient.is_finite() || *gradient < 0.0 {
                    return Err(Error::InvalidParameter(format!("gradient must be non-negative, got {gradient}")));
                }
            }
            SiteProfile::Map { values } => {
                if values.len() != lattice.len() {
                    return Err(Error::InvalidParameter(format!(
                        "efficiency map has {} values for {} sites",
                        values.len(),
                        lattice.len()
                    )));
                }
                for &v in values {
                    check_prob("site efficiency", v)?;
                }
            }
        }
        if let Some(c) = &self.channels {
            check_prob("extraction probability", c.extract)?;
            check_prob("transit probability", c.transit)?;
            check_prob("release probability", c.release)?;
        }
        if let Some(tau) = self.vacuum_lifetime {
            if !(tau > 0.0) {
                return Err(Error::InvalidParameter(format!("vacuum lifetime must be positive, got {tau}")));
            }
        }
        self.timing.validate()
    }
}

/// Chebyshev distance from the lattice center, scaled so the outermost
/// ring is 1.
fn normalized_ring(lattice: &Lattice, site: Site) -> f64 {
    let cr = (lattice.rows() - 1) as f64 / 2.0;
    let cc = (lattice.cols() - 1) as f64 / 2.0;
    let max = cr.max(cc);
    if max == 0.0 {
        return 0.0;
    }
    let d = (site.row as f64 - cr).abs().max((site.col as f64 - cc).abs());
    d / max
}

/// Transfer efficiency into `site`.
pub fn site_efficiency(lattice: &Lattice, site: Site, noise: &NoiseModel) -> f64 {
    match &noise.profile {
        SiteProfile::Uniform => noise.zeta,
        SiteProfile::Gradient { gradient } => {
            (noise.zeta - gradient * normalized_ring(lattice, site)).clamp(0.0, 1.0)
        }
        SiteProfile::Map { values } => values[lattice.index(site)],
    }
}

/// Center efficiency that makes the lattice-wide mean equal `mean` for a
/// given gradient.
pub fn calibrate_center(lattice: &Lattice, mean: f64, gradient: f64) -> Result<f64> {
    check_prob("mean efficiency", mean)?;
    let avg = |zc: f64| {
        let noise = NoiseModel {
            zeta: zc,
            profile: SiteProfile::Gradient { gradient },
            ..NoiseModel::default()
        };
        lattice.sites().map(|s| site_efficiency(lattice, s, &noise)).sum::<f64>() / lattice.len() as f64
    };
    if avg(1.0) < mean {
        return Err(Error::InvalidParameter(format!(
            "gradient {gradient} cannot reach a mean of {mean}"
        )));
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if avg(mid) < mean {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Ok,
    Lost,
    Stranded,
    /// Released onto an occupied trap; both atoms are gone.
    Collision,
    /// Nothing to pick up: an earlier failure already emptied the source.
    Empty,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MoveEvent {
    #[serde(rename = "move")]
    pub index: usize,
    pub outcome: Outcome,
    /// Elapsed time at the end of the move, seconds.
    pub t: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NoisyRun {
    pub final_occ: Occupancy,
    pub events: Vec<MoveEvent>,
    pub duration: f64,
    /// Atoms removed by background loss after the last move.
    pub vacuum_losses: usize,
}

impl NoisyRun {
    pub fn count(&self, outcome: Outcome) -> usize {
        self.events.iter().filter(|e| e.outcome == outcome).count()
    }
}

pub fn write_events_jsonl<W: Write>(events: &[MoveEvent], mut w: W) -> Result<()> {
    for e in events {
        serde_json::to_writer(&mut w, e)?;
        w.write_all(b"\n").map_err(|e| Error::io("<events>", e))?;
    }
    Ok(())
}

pub fn execute_noisy(occ: &Occupancy, plan: &MovePlan, noise: &NoiseModel) -> Result<NoisyRun> {
    validate_plan(occ, plan).map_err(Error::InvalidPlan)?;
    let lattice = *occ.lattice();
    noise.validate(&lattice)?;
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    rng.set_stream(1);
    let mut filled = occ.mask().to_vec();
    let mut events = Vec::with_capacity(plan.len());
    let mut t = 0.0;
    for (index, mv) in plan.moves.iter().enumerate() {
        let (s, d) = (lattice.index(mv.src), lattice.index(mv.dst));
        let steps = mv.distance();
        let dt = noise.timing.move_duration(steps);
        t += dt;
        if !filled[s] {
            events.push(MoveEvent {
                index,
                outcome: Outcome::Empty,
                t,
            });
            continue;
        }
        let mut travel = (1.0 - noise.per_grid_loss).powi(steps as i32);
        if let Some(h) = &noise.heating {
            travel *= survival_from_nu(h.nu(dt));
        }
        let arrived = match &noise.channels {
            Some(c) => {
                if !rng.gen_bool(c.extract) {
                    Err(Outcome::Stranded)
                } else if !rng.gen_bool((c.transit * travel).clamp(0.0, 1.0))
                    || !rng.gen_bool(c.release)
                {
                    Err(Outcome::Lost)
                } else {
                    Ok(())
                }
            }
            None => {
                let p = (site_efficiency(&lattice, mv.dst, noise) * travel).clamp(0.0, 1.0);
                if rng.gen_bool(p) {
                    Ok(())
                } else {
                    Err(match noise.failure_mode {
                        FailureMode::Lost => Outcome::Lost,
                        FailureMode::Stranded => Outcome::Stranded,
                    })
                }
            }
        };
        let outcome = match arrived {
            Err(Outcome::Stranded) => Outcome::Stranded,
            Err(other) => {
                filled[s] = false;
                other
            }
            Ok(()) => {
                filled[s] = false;
                if filled[d] {
                    filled[d] = false;
                    Outcome::Collision
                } else {
                    filled[d] = true;
                    Outcome::Ok
                }
            }
        };
        events.push(MoveEvent { index, outcome, t });
    }
    let mut vacuum_losses = 0;
    if let Some(tau) = noise.vacuum_lifetime {
        let keep = (-t / tau).exp();
        for f in filled.iter_mut().filter(|f| **f) {
            if !rng.gen_bool(keep) {
                *f = false;
                vacuum_losses += 1;
            }
        }
    }
    Ok(NoisyRun {
        final_occ: Occupancy::from_mask(lattice, filled)?,
        events,
        duration: t,
        vacuum_losses,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{make_target, PatternSpec};
    use crate::plan::apply_plan;
    use crate::Algorithm;

    fn instance() -> (Occupancy, MovePlan) {
        let occ = Occupancy::from_text("#.#.#\n.#...\n#..#.\n...#.\n#.#.#").unwrap();
        let t = make_target(*occ.lattice(), &PatternSpec::Square(3)).unwrap();
        let plan = Algorithm::Hca.plan(&occ, &t).unwrap();
        (occ, plan)
    }

    #[test]
    fn perfect_transfer_matches_ideal_replay() {
        let (occ, plan) = instance();
        let run = execute_noisy(&occ, &plan, &NoiseModel::uniform(1.0, 3)).unwrap();
        assert_eq!(run.final_occ, apply_plan(&occ, &plan).unwrap());
        assert_eq!(run.count(Outcome::Ok), plan.len());
    }

    #[test]
    fn total_failure_loses_every_moved_atom() {
        let (occ, plan) = instance();
        let run = execute_noisy(&occ, &plan, &NoiseModel::uniform(0.0, 3)).unwrap();
        let lost = run.count(Outcome::Lost);
        assert_eq!(lost + run.count(Outcome::Empty), plan.len());
        assert_eq!(run.final_occ.count(), occ.count() - lost);
    }

    #[test]
    fn stranded_failure_causes_collision() {
        // two moves through the same site: the first strands, the second
        // releases onto the stranded atom
        let l = Lattice::new(1, 3).unwrap();
        let occ = Occupancy::from_sites(l, [(0, 0), (0, 1)]).unwrap();
        let mut plan = MovePlan::new(l);
        plan.moves.push(crate::plan::Move {
            src: Site::new(0, 1),
            dst: Site::new(0, 2),
            path: vec![Site::new(0, 1), Site::new(0, 2)],
            phase: crate::plan::Phase::Open,
        });
        plan.moves.push(crate::plan::Move {
            src: Site::new(0, 0),
            dst: Site::new(0, 1),
            path: vec![Site::new(0, 0), Site::new(0, 1)],
            phase: crate::plan::Phase::Fill,
        });
        // moving into (0,2) always fails, into (0,1) always succeeds
        let noise = NoiseModel {
            failure_mode: FailureMode::Stranded,
            profile: SiteProfile::Map {
                values: vec![1.0, 1.0, 0.0],
            },
            ..NoiseModel::default()
        };
        let run = execute_noisy(&occ, &plan, &noise).unwrap();
        let outcomes: Vec<Outcome> = run.events.iter().map(|e| e.outcome).collect();
        assert_eq!(outcomes, [Outcome::Stranded, Outcome::Collision]);
        assert_eq!(run.final_occ.count(), 0);
        // a failed extraction strands regardless of the failure mode
        let noise = NoiseModel {
            channels: Some(Channels {
                extract: 0.0,
                transit: 1.0,
                release: 1.0,
            }),
            ..NoiseModel::default()
        };
        let run = execute_noisy(&occ, &plan, &noise).unwrap();
        assert_eq!(run.count(Outcome::Stranded), 2);
        assert_eq!(run.final_occ, occ);
    }

    #[test]
    fn events_serialize_as_json_lines() {
        let events = [MoveEvent {
            index: 4,
            outcome: Outcome::Collision,
            t: 0.25,
        }];
        let mut buf = Vec::new();
        write_events_jsonl(&events, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "{\"move\":4,\"outcome\":\"collision\",\"t\":0.25}\n");
    }

    #[test]
    fn gradient_profile() {
        let l = Lattice::square(8).unwrap();
        let flat = NoiseModel::uniform(0.95, 0);
        assert!(l.sites().all(|s| site_efficiency(&l, s, &flat) == 0.95));
        let zc = calibrate_center(&l, 0.977, 0.03).unwrap();
        // rings of 4, 12, 20, 28 sites at 1/7, 3/7, 5/7, 7/7: mean 0.75
        assert!((zc - (0.977 + 0.75 * 0.03)).abs() < 1e-12);
        let noise = NoiseModel {
            zeta: zc,
            profile: SiteProfile::Gradient { gradient: 0.03 },
            ..NoiseModel::default()
        };
        let mean = l.sites().map(|s| site_efficiency(&l, s, &noise)).sum::<f64>() / 64.0;
        assert!((mean - 0.977).abs() < 1e-9);
        let corner = site_efficiency(&l, Site::new(0, 0), &noise);
        assert!((corner - (zc - 0.03)).abs() < 1e-12);
        // odd lattice: the center site gets the center value
        let l5 = Lattice::square(5).unwrap();
        assert_eq!(site_efficiency(&l5, Site::new(2, 2), &noise), zc);
        assert!(calibrate_center(&l, 0.977, 0.05).is_err());
    }

    #[test]
    fn vacuum_loss_over_long_sequence() {
        let (occ, plan) = instance();
        let noise = NoiseModel {
            vacuum_lifetime: Some(1e-9),
            ..NoiseModel::default()
        };
        let run = execute_noisy(&occ, &plan, &noise).unwrap();
        assert_eq!(run.final_occ.count(), 0);
        assert_eq!(run.vacuum_losses, occ.count());
    }

    #[test]
    fn invalid_inputs_rejected() {
        let (occ, plan) = instance();
        assert!(execute_noisy(&occ, &plan, &NoiseModel::uniform(1.5, 0)).is_err());
        let empty = Occupancy::empty(*occ.lattice());
        assert!(matches!(
            execute_noisy(&empty, &plan, &NoiseModel::default()),
            Err(Error::InvalidPlan(_))
        ));
    }
}
