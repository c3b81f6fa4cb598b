//! Arbitrary target shapes from a bitmap.

use atomsim::prelude::*;

const LETTER_A: &str = "\
.###.
#...#
#####
#...#
#...#";

fn main() -> atomsim::Result<()> {
    let spec: PatternSpec = format!("grid:{}", LETTER_A.replace('\n', "/")).parse()?;
    let lattice = Lattice::square(9)?;
    let target = make_target(lattice, &spec)?;
    let occ = sample_loading(lattice, &LoadingModel::new(0.5, 6)?);
    println!("{}", render(&occ, &target));
    for alg in Algorithm::ALL {
        let plan = alg.plan(&occ, &target)?;
        println!("{alg}: {} moves, {} steps", plan.len(), plan.total_distance());
    }
    println!("{}", render(&apply_plan(&occ, &Algorithm::Hca.plan(&occ, &target)?)?, &target));
    Ok(())
}
