//! How far the heuristics sit from the true minimum on tiny instances.

use atomsim::prelude::*;

fn main() -> atomsim::Result<()> {
    let lattice = Lattice::square(4)?;
    let target = make_target(lattice, &PatternSpec::Square(2))?;
    let limits = OracleLimits { max_atoms: 16, ..OracleLimits::default() };
    let mut extra = [0usize; 3];
    let mut count = 0;
    for seed in 0..500 {
        let occ = sample_loading(lattice, &LoadingModel::new(0.4, seed)?);
        if !is_feasible(&occ, &target) {
            continue;
        }
        let best = optimal_moves_oracle(&occ, &target, &limits)?;
        for (i, alg) in Algorithm::ALL.into_iter().enumerate() {
            extra[i] += alg.plan(&occ, &target)?.len() - best;
        }
        count += 1;
    }
    for (i, alg) in Algorithm::ALL.into_iter().enumerate() {
        println!("{alg}: {:.3} extra moves per instance over {count} instances", extra[i] as f64 / count as f64);
    }
    Ok(())
}
