//! Replay a plan with imperfect transfers and see where it goes wrong.

use atomsim::prelude::*;

fn main() -> atomsim::Result<()> {
    let lattice = Lattice::square(12)?;
    let target = make_target(lattice, &PatternSpec::Square(8))?;
    let occ = sample_loading(lattice, &LoadingModel::new(0.5, 5)?);
    let plan = plan_hca(&occ, &target)?;

    for mode in [FailureMode::Lost, FailureMode::Stranded] {
        let noise = NoiseModel {
            zeta: 0.95,
            failure_mode: mode,
            seed: 1,
            ..NoiseModel::default()
        };
        let run = execute_noisy(&occ, &plan, &noise)?;
        println!(
            "{mode:?}: ok {} lost {} stranded {} collision {} empty-source {}; {} targets vacant",
            run.count(Outcome::Ok),
            run.count(Outcome::Lost),
            run.count(Outcome::Stranded),
            run.count(Outcome::Collision),
            run.count(Outcome::Empty),
            vacant_target_count(&run.final_occ, &target)
        );
    }

    let eta = filling_fraction_analytic(plan.len() as f64 / target.len() as f64, 0.95);
    println!("expected filling fraction {eta:.4}, plan takes {:.3} s", plan_duration(&plan, &TimingModel::default()));
    Ok(())
}
