//! Plan with the region-connecting planner and inspect its phases.

use atomsim::prelude::*;

fn main() -> atomsim::Result<()> {
    let lattice = Lattice::square(12)?;
    let target = make_target(lattice, &PatternSpec::Square(8))?;
    let occ = sample_loading(lattice, &LoadingModel::new(0.5, 3)?);

    let dec = decompose_regions(&occ, &target)?;
    println!(
        "{} open regions ({} vacancies), {} closed regions ({} vacancies)",
        dec.open_regions.len(),
        dec.n1,
        dec.closed_regions.len(),
        dec.n2
    );

    let plan = plan_hca(&occ, &target)?;
    validate_plan(&occ, &plan).expect("legal plan");
    let m = plan_metrics(&plan, dec.n_vacant());
    println!(
        "{} moves ({} open, {} fill, {} direct), {} grid steps",
        m.n_moves, m.n_open, m.n_fill, m.n_direct, m.total_distance
    );
    for mv in plan.moves.iter().take(5) {
        println!("  {:?} -> {:?} via {} steps ({})", mv.src, mv.dst, mv.distance(), mv.phase);
    }

    let done = apply_plan(&occ, &plan)?;
    println!("{}", render(&done, &target));
    Ok(())
}
