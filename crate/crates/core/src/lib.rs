//! Planning and Monte Carlo evaluation of atom-rearrangement strategies
//! for optical tweezer arrays.
//!
//! Atoms load stochastically into a grid of traps; a mobile tweezer then
//! moves them one at a time into a target pattern. This crate provides
//! three planners ([`hca`], [`asa`], [`hpfa`]), an exhaustive optimum for
//! tiny instances ([`oracle`]), loss and timing models ([`physics`],
//! [`noise`]) and a seeded ensemble runner ([`harness`]).
//!
//! ```
//! use atomsim::prelude::*;
//!
//! let lattice = Lattice::square(8).unwrap();
//! let target = make_target(lattice, &PatternSpec::Rect(5, 6)).unwrap();
//! let occ = sample_loading(lattice, &LoadingModel::new(0.6, 7).unwrap());
//! if is_feasible(&occ, &target) {
//!     let plan = Algorithm::Hca.plan(&occ, &target).unwrap();
//!     let done = apply_plan(&occ, &plan).unwrap();
//!     assert_eq!(vacant_target_count(&done, &target), 0);
//! }
//! ```

pub mod asa;
pub mod cli;
pub mod error;
pub mod harness;
pub mod hca;
pub mod hpfa;
pub mod lattice;
pub mod oracle;
pub mod physics;
pub mod plan;
pub mod route;
pub mod search;

use std::fmt;
use std::str::FromStr;

pub use error::{Error, Result};

use lattice::{Occupancy, TargetPattern};
use plan::MovePlan;

/// The three planners behind one switch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Hca,
    Asa,
    Hpfa,
}

impl Algorithm {
    pub const ALL: [Algorithm; 3] = [Algorithm::Hca, Algorithm::Asa, Algorithm::Hpfa];

    /// Plans with each algorithm's default configuration.
    pub fn plan(self, occ: &Occupancy, target: &TargetPattern) -> Result<MovePlan> {
        match self {
            Algorithm::Hca => hca::plan_hca(occ, target),
            Algorithm::Asa => asa::plan_asa(occ, target),
            Algorithm::Hpfa => hpfa::plan_hpfa(occ, target),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Hca => "hca",
            Algorithm::Asa => "asa",
            Algorithm::Hpfa => "hpfa",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "hca" => Ok(Algorithm::Hca),
            "asa" => Ok(Algorithm::Asa),
            "hpfa" => Ok(Algorithm::Hpfa),
            other => Err(Error::InvalidParameter(format!(
                "unknown algorithm `{other}` (expected hca, asa or hpfa)"
            ))),
        }
    }
}

/// The names most programs need.
pub mod prelude {
    pub use crate::asa::{classify_layers, plan_asa, AsaConfig};
    pub use crate::hca::{decompose_regions, open_closed_regions, plan_hca, HcaConfig};
    pub use crate::hpfa::{plan_hpfa, HpfaConfig, SearchSchedule};
    pub use crate::lattice::{
        defects, is_feasible, make_target, render, sample_loading, vacant_target_count, Lattice,
        LoadingModel, Occupancy, PatternSpec, Site, SizingRule, TargetPattern,
    };
    pub use crate::harness::{run_trials, run_trials_multi, sweep, Scale, SweepConfig, TrialConfig, TrialStats};
    pub use crate::oracle::{optimal_moves_oracle, OracleLimits};
    pub use crate::physics::{
        cumulative_success, execute_noisy, filling_fraction_analytic, plan_duration,
        survival_probability, FailureMode, HeatingModel, NoiseModel, Outcome, TimingModel,
    };
    pub use crate::plan::{apply_plan, plan_metrics, validate_plan, Move, MovePlan, Phase};
    pub use crate::{Algorithm, Error, Result};
}
