//! A seeded Monte Carlo ensemble, written to CSV and JSON.

use atomsim::prelude::*;

fn main() -> atomsim::Result<()> {
    let mut cfg = TrialConfig::new(PatternSpec::Square(10), Algorithm::Hca);
    cfg.trials = 500;
    cfg.base_seed = 2024;
    cfg.noise = NoiseModel::uniform(0.99, 0);

    let stats = run_trials(&cfg)?;
    let s = stats.summary();
    println!("{} feasible of {} trials", s.feasible, s.trials);
    println!("moves {:.2} ± {:.2}, per vacancy {:.3}", s.nm.mean, s.nm.se, s.moves_per_vacancy);
    println!("duration {:.3} ± {:.3} s", s.duration_s.mean, s.duration_s.se);
    println!("filling fraction {:.4} ± {:.4}, defect-free {:.3}", s.eta.mean, s.eta.se, s.defect_free.mean);

    let dir = std::env::temp_dir().join("atomsim-ensemble");
    for path in stats.write(&dir)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
