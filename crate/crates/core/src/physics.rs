//! Loss, timing and yield models.
//!
//! Units: trap depths and heating rates in millikelvin (per second),
//! temperatures in microkelvin, times in seconds.

mod noise;

pub use noise::{
    calibrate_center, execute_noisy, site_efficiency, write_events_jsonl, Channels, FailureMode,
    MoveEvent, NoiseModel, NoisyRun, Outcome, SiteProfile,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::plan::MovePlan;

/// Initial atom temperature used by the presets, in microkelvin.
pub const DEFAULT_T0_UK: f64 = 20.0;

/// Measured heating rates of three mobile-tweezer drive chains, mK/s.
pub const PRESET_HEATING_RATES: [f64; 3] = [23.0, 2.9, 0.24];

/// Constant-rate heating of an atom held in a trap of fixed depth.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatingModel {
    /// Trap depth as a temperature, mK.
    pub u0_mk: f64,
    /// Initial temperature, µK.
    pub t0_uk: f64,
    /// Heating rate, mK/s.
    pub rate_mk_per_s: f64,
}

impl HeatingModel {
    pub fn new(u0_mk: f64, t0_uk: f64, rate_mk_per_s: f64) -> Result<Self> {
        if !(u0_mk > 0.0 && u0_mk.is_finite()) {
            return Err(Error::InvalidParameter(format!("trap depth must be positive, got {u0_mk}")));
        }
        if !(t0_uk > 0.0 && t0_uk.is_finite()) {
            return Err(Error::InvalidParameter(format!("temperature must be positive, got {t0_uk}")));
        }
        if !(rate_mk_per_s >= 0.0 && rate_mk_per_s.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "heating rate must be non-negative, got {rate_mk_per_s}"
            )));
        }
        Ok(HeatingModel {
            u0_mk,
            t0_uk,
            rate_mk_per_s,
        })
    }

    /// Depth `u0_mk`, T0 = 20 µK, rate `PRESET_HEATING_RATES[index]`.
    pub fn preset(u0_mk: f64, index: usize) -> Result<Self> {
        let rate = *PRESET_HEATING_RATES
            .get(index)
            .ok_or_else(|| Error::InvalidParameter(format!("no heating preset {index}")))?;
        Self::new(u0_mk, DEFAULT_T0_UK, rate)
    }

    /// Depth over temperature at hold time `t`.
    pub fn nu(&self, t: f64) -> f64 {
        self.u0_mk / (self.t0_uk * 1e-3 + self.rate_mk_per_s * t)
    }
}

/// Probability that a thermal atom with energy ratio `nu` stays trapped:
/// 1 − (1 + ν + ν²/2)e^{−ν}, the regularized lower incomplete gamma
/// function P(3, ν).
pub fn survival_from_nu(nu: f64) -> f64 {
    if nu <= 0.0 {
        return 0.0;
    }
    if nu < 1.0 {
        // the closed form cancels badly here; sum e^{−ν} Σ_{k≥3} ν^k/k!
        let mut term = nu * nu * nu / 6.0;
        let mut sum = 0.0;
        let mut k = 3.0;
        while term > sum * 1e-18 || sum == 0.0 {
            sum += term;
            k += 1.0;
            term *= nu / k;
        }
        return (sum * (-nu).exp()).clamp(0.0, 1.0);
    }
    (1.0 - (1.0 + nu + 0.5 * nu * nu) * (-nu).exp()).clamp(0.0, 1.0)
}

pub fn survival_probability(t: f64, m: &HeatingModel) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidParameter(format!("hold time must be non-negative, got {t}")));
    }
    Ok(survival_from_nu(m.nu(t)))
}

/// Hold time at which survival falls to `level`, by bisection on `t`.
/// `Some(0.0)` if it starts at or below `level`; `None` without heating or
/// for a level outside [0, 1).
pub fn survival_crossing(m: &HeatingModel, level: f64) -> Option<f64> {
    let f = |t: f64| survival_from_nu(m.nu(t)) - level;
    if !(0.0..1.0).contains(&level) || m.rate_mk_per_s == 0.0 {
        return None;
    }
    if f(0.0) <= 0.0 {
        return Some(0.0);
    }
    let mut hi = 1e-3;
    while f(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return None;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Some(0.5 * (lo + hi))
}

/// Durations of the three stages of one move, seconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TimingModel {
    pub pickup: f64,
    pub per_grid: f64,
    pub release: f64,
}

impl Default for TimingModel {
    fn default() -> Self {
        TimingModel {
            pickup: 1e-3,
            per_grid: 1e-3,
            release: 1e-3,
        }
    }
}

impl TimingModel {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("pickup", self.pickup), ("per_grid", self.per_grid), ("release", self.release)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter(format!("{name} time must be non-negative, got {v}")));
            }
        }
        Ok(())
    }

    pub fn move_duration(&self, steps: usize) -> f64 {
        self.pickup + self.per_grid * steps as f64 + self.release
    }
}

pub fn plan_duration(plan: &MovePlan, timing: &TimingModel) -> f64 {
    plan.moves.iter().map(|m| timing.move_duration(m.distance())).sum()
}

/// Expected filled fraction when every move succeeds with probability
/// `zeta` and `n` moves are spent per filled site: max(0, 1 − n(1 − ζ)).
pub fn filling_fraction_analytic(n: f64, zeta: f64) -> f64 {
    (1.0 - n * (1.0 - zeta)).clamp(0.0, 1.0)
}

/// Probability that all `n` sites are filled when each is filled
/// independently with probability `eta`.
pub fn cumulative_success(eta: f64, n: u32) -> f64 {
    eta.powi(n as i32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{Lattice, Site};
    use crate::plan::{Move, Phase};

    #[test]
    fn survival_at_zero_time_is_nearly_one() {
        let m = HeatingModel::new(0.8, 20.0, 0.24).unwrap();
        let p = survival_probability(0.0, &m).unwrap();
        let expect = 1.0 - 841.0 * (-40.0f64).exp();
        assert!((p - expect).abs() < 1e-15);
        assert!(1.0 - p < 1e-12);
    }

    #[test]
    fn survival_vanishes_for_long_holds() {
        let m = HeatingModel::preset(0.8, 0).unwrap();
        assert!(survival_probability(1e6, &m).unwrap() < 1e-9);
        assert!(survival_probability(-1.0, &m).is_err());
    }

    #[test]
    fn series_and_closed_form_agree_at_switch() {
        let a = survival_from_nu(1.0 - 1e-12);
        let b = survival_from_nu(1.0);
        assert!((a - b).abs() < 1e-12);
        assert!((b - (1.0 - 2.5 * (-1.0f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn crossing_halves_survival() {
        let m = HeatingModel::preset(0.8, 2).unwrap();
        let t = survival_crossing(&m, 0.5).unwrap();
        assert!((survival_probability(t, &m).unwrap() - 0.5).abs() < 1e-12);
        let no_heat = HeatingModel::new(0.8, 20.0, 0.0).unwrap();
        assert_eq!(survival_crossing(&no_heat, 0.5), None);
    }

    #[test]
    fn invalid_heating_rejected() {
        assert!(HeatingModel::new(0.0, 20.0, 1.0).is_err());
        assert!(HeatingModel::new(1.0, -1.0, 1.0).is_err());
        assert!(HeatingModel::new(1.0, 20.0, -1.0).is_err());
        assert!(HeatingModel::preset(1.0, 3).is_err());
    }

    #[test]
    fn durations() {
        let l = Lattice::new(1, 6).unwrap();
        assert_eq!(plan_duration(&MovePlan::new(l), &TimingModel::default()), 0.0);
        let path: Vec<Site> = (0..6).map(|c| Site::new(0, c)).collect();
        let mv = Move {
            src: path[0],
            dst: path[5],
            path,
            phase: Phase::Direct,
        };
        let plan = MovePlan {
            lattice: l,
            moves: vec![mv],
        };
        let d = plan_duration(&plan, &TimingModel::default());
        assert!((d - 0.007).abs() < 1e-15);
    }

    #[test]
    fn filling_and_success_laws() {
        assert_eq!(filling_fraction_analytic(3.0, 1.0), 1.0);
        assert!((filling_fraction_analytic(1.0, 0.99) - 0.99).abs() < 1e-15);
        assert!((filling_fraction_analytic(1.5, 0.9) - 0.85).abs() < 1e-15);
        assert_eq!(filling_fraction_analytic(20.0, 0.9), 0.0);
        assert_eq!(cumulative_success(0.5, 0), 1.0);
        assert!((cumulative_success(0.99, 100) - 0.366_032).abs() < 1e-6);
        assert_eq!(cumulative_success(0.7, 1), 0.7);
    }
}
