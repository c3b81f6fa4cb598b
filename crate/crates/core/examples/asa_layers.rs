//! Peel a target into layers and fill it from the inside out.

use atomsim::prelude::*;

fn main() -> atomsim::Result<()> {
    let lattice = Lattice::square(8)?;
    let target = make_target(lattice, &PatternSpec::Rect(5, 6))?;
    let layers = classify_layers(&target);
    println!("layer sizes, outermost first: {:?}", layers.sizes());

    let occ = sample_loading(lattice, &LoadingModel::new(0.55, 11)?);
    if !is_feasible(&occ, &target) {
        println!("not enough atoms, try another seed");
        return Ok(());
    }
    let plan = plan_asa(&occ, &target)?;
    println!("{} moves, {} grid steps", plan.len(), plan.total_distance());
    println!("{}", render(&apply_plan(&occ, &plan)?, &target));
    Ok(())
}
