//! Open enclosed vacancies: the cheapest set of atoms to clear, and whether
//! a shared corridor beats chaining regions one by one.

use atomsim::prelude::*;
use atomsim::route::plan_connection_route;

fn main() -> atomsim::Result<()> {
    let occ = Occupancy::from_text(
        "#........\n\
         .#######.\n\
         .#######.\n\
         .#######.\n\
         .####.##.\n\
         .##.####.\n\
         .####.##.\n\
         .#######.\n\
         .........\n",
    )?;
    let target = make_target(*occ.lattice(), &PatternSpec::Square(7))?;
    println!("{}", render(&occ, &target));

    let dec = decompose_regions(&occ, &target)?;
    println!("closed regions: {:?}", dec.closed_regions);
    let route = plan_connection_route(&dec, &occ, &target)?;
    println!(
        "junction tree clears {}, region chain clears {}",
        route.junction_count, route.region_region_count
    );
    for c in &route.connections {
        println!("  region {} -> {:?}: clear {:?}", c.region, c.to, c.obstacles);
    }

    let (moves, opened) = open_closed_regions(&occ, &target)?;
    println!("{} relocation moves; afterwards:", moves.len());
    println!("{}", render(&opened, &target));
    Ok(())
}
