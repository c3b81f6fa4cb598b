//! The size sweep comparing all three planners, at laptop scale.

use atomsim::prelude::*;

fn main() -> atomsim::Result<()> {
    let mut cfg = SweepConfig::fig5(Scale::Desk);
    cfg.trials = 50;
    cfg.histogram_trials = 200;
    let out = sweep(&cfg)?;
    for name in ["moves", "distance", "eta_zeta0.99", "rc"] {
        let table = out.table(name).expect("table");
        println!("== {name}");
        table.write_csv(std::io::stdout())?;
    }
    Ok(())
}
