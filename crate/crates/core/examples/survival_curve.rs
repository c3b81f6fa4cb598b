//! Heating-limited survival against hold time for the preset drive chains.

use atomsim::physics::{survival_crossing, PRESET_HEATING_RATES};
use atomsim::prelude::*;

fn main() -> atomsim::Result<()> {
    let depth_mk = 1.0;
    for (i, rate) in PRESET_HEATING_RATES.iter().enumerate() {
        let m = HeatingModel::preset(depth_mk, i)?;
        let half = survival_crossing(&m, 0.5).map_or("never".into(), |t| format!("{t:.3} s"));
        println!("rate {rate} mK/s: 50% survival after {half}");
        for t in [0.0, 0.01, 0.05, 0.1, 0.5, 1.0] {
            println!("  t = {t:>5} s  P = {:.4}", survival_probability(t, &m)?);
        }
    }

    // one move of 10 grid steps under the default timing
    let dt = TimingModel::default().move_duration(10);
    let m = HeatingModel::preset(depth_mk, 0)?;
    println!("a 10-step move takes {dt} s, survival {:.6}", survival_probability(dt, &m)?);
    Ok(())
}
