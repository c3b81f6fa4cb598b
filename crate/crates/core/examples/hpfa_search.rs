//! Compare the two search schedules of the growing-distance planner.

use atomsim::hpfa::plan_hpfa_with;
use atomsim::prelude::*;

fn main() -> atomsim::Result<()> {
    let lattice = Lattice::square(15)?;
    let target = make_target(lattice, &PatternSpec::Square(10))?;
    let occ = sample_loading(lattice, &LoadingModel::new(0.5, 8)?);
    let n = vacant_target_count(&occ, &target);

    for schedule in [SearchSchedule::PerRound, SearchSchedule::PerTarget] {
        let plan = plan_hpfa_with(&occ, &target, &HpfaConfig { schedule })?;
        let end = apply_plan(&occ, &plan)?;
        println!(
            "{schedule:?}: {} moves for {n} vacancies, {} grid steps, {} left vacant",
            plan.len(),
            plan.total_distance(),
            vacant_target_count(&end, &target)
        );
    }
    Ok(())
}
