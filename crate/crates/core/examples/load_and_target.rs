//! Sample a stochastic loading, lay a target over it and count defects.

use atomsim::prelude::*;

fn main() -> atomsim::Result<()> {
    let spec = PatternSpec::Square(10);
    // smallest square lattice with a 10% atom surplus on average
    let lattice = SizingRule::default().lattice_for_spec(&spec, 0.5)?;
    let target = make_target(lattice, &spec)?;
    let occ = sample_loading(lattice, &LoadingModel::new(0.5, 42)?);

    println!("{}x{} lattice, {} atoms, {} target sites", lattice.rows(), lattice.cols(), occ.count(), target.len());
    println!("{}", render(&occ, &target));
    let d = defects(&occ, &target)?;
    println!("{d:?}");
    println!("feasible: {}", is_feasible(&occ, &target));
    Ok(())
}
