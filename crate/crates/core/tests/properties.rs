//! Randomized invariants of the planners, checked against small
//! independent reimplementations.

use std::collections::BTreeSet;

use atomsim::prelude::*;
use atomsim::oracle::OracleLimits;
use proptest::prelude::*;

/// Lattice side, target spec and loading that fit together.
fn instance() -> impl Strategy<Value = (Occupancy, TargetPattern)> {
    (3usize..=9)
        .prop_flat_map(|side| {
            let shape = prop_oneof![
                (1..=side).prop_map(PatternSpec::Square),
                (1..=side, 1..=side).prop_map(|(r, c)| PatternSpec::Rect(r, c)),
            ];
            (Just(side), shape, proptest::collection::vec(any::<bool>(), side * side))
        })
        .prop_map(|(side, spec, mask)| {
            let l = Lattice::square(side).unwrap();
            (Occupancy::from_mask(l, mask).unwrap(), make_target(l, &spec).unwrap())
        })
}

fn feasible_instance() -> impl Strategy<Value = (Occupancy, TargetPattern)> {
    instance().prop_filter("needs enough atoms", |(o, t)| is_feasible(o, t))
}

/// Plain flood fill: empty traps reachable from some reservoir atom.
fn reachable_from_reservoir(occ: &Occupancy, target: &TargetPattern) -> Vec<bool> {
    let l = *occ.lattice();
    let mut seen = vec![false; l.len()];
    let mut stack: Vec<usize> = (0..l.len())
        .filter(|&i| occ.is_filled_idx(i) && !target.contains_idx(i))
        .collect();
    while let Some(u) = stack.pop() {
        for v in l.neighbors(u) {
            if !occ.is_filled_idx(v) && !seen[v] {
                seen[v] = true;
                stack.push(v);
            }
        }
    }
    seen
}

/// Connected components of vacant target sites.
fn vacant_components(occ: &Occupancy, target: &TargetPattern) -> Vec<BTreeSet<usize>> {
    let l = *occ.lattice();
    let vacant = |i: usize| target.contains_idx(i) && !occ.is_filled_idx(i);
    let mut label = vec![false; l.len()];
    let mut out = Vec::new();
    for s in 0..l.len() {
        if !vacant(s) || label[s] {
            continue;
        }
        let mut comp = BTreeSet::new();
        let mut stack = vec![s];
        label[s] = true;
        while let Some(u) = stack.pop() {
            comp.insert(u);
            for v in l.neighbors(u) {
                if vacant(v) && !label[v] {
                    label[v] = true;
                    stack.push(v);
                }
            }
        }
        out.push(comp);
    }
    out
}

fn as_index_sets(l: &Lattice, regions: &[Vec<Site>]) -> BTreeSet<BTreeSet<usize>> {
    regions.iter().map(|r| r.iter().map(|&s| l.index(s)).collect()).collect()
}

/// Morphological erosion: a target site survives if it is off the lattice
/// edge and all four neighbours are in the set.
fn erosion_layers(target: &TargetPattern) -> Vec<usize> {
    let l = *target.lattice();
    let mut set: Vec<bool> = target.mask().to_vec();
    let mut sizes = Vec::new();
    while set.iter().any(|&b| b) {
        let kept: Vec<bool> = (0..l.len())
            .map(|i| {
                let s = l.site(i);
                set[i]
                    && s.row > 0
                    && s.col > 0
                    && s.row + 1 < l.rows()
                    && s.col + 1 < l.cols()
                    && l.neighbors(i).all(|n| set[n])
            })
            .collect();
        sizes.push((0..l.len()).filter(|&i| set[i] && !kept[i]).count());
        set = kept;
    }
    sizes
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn every_plan_is_legal_and_complete((occ, target) in feasible_instance()) {
        let n = vacant_target_count(&occ, &target);
        for alg in Algorithm::ALL {
            let plan = alg.plan(&occ, &target).unwrap();
            prop_assert!(validate_plan(&occ, &plan).is_ok(), "{alg}: {:?}", validate_plan(&occ, &plan));
            let done = apply_plan(&occ, &plan).unwrap();
            prop_assert_eq!(vacant_target_count(&done, &target), 0, "{}", alg);
            prop_assert_eq!(done.count(), occ.count());
            prop_assert!(plan.len() >= n, "{alg}: {} moves for {n} vacancies", plan.len());
            if n == 0 {
                prop_assert!(plan.is_empty());
            }
        }
    }

    #[test]
    fn hca_needs_no_extra_moves_without_closed_regions(
        k in 2usize..=10,
        p in 0.4f64..0.8,
        seed in any::<u64>(),
    ) {
        // sampled at the default reservoir surplus; with a starved
        // reservoir an open region may have too few atoms within reach
        let spec = PatternSpec::Square(k);
        let l = SizingRule::default().lattice_for_spec(&spec, p).unwrap();
        let target = make_target(l, &spec).unwrap();
        let occ = sample_loading(l, &LoadingModel::new(p, seed).unwrap());
        prop_assume!(is_feasible(&occ, &target));
        let dec = decompose_regions(&occ, &target).unwrap();
        let plan = plan_hca(&occ, &target).unwrap();
        if dec.n2 == 0 {
            prop_assert_eq!(plan.len(), dec.n1, "\n{}", render(&occ, &target));
        } else {
            prop_assert!(plan.len() > dec.n_vacant());
        }
    }

    #[test]
    fn regions_match_flood_fill((occ, target) in instance()) {
        let l = *occ.lattice();
        let dec = decompose_regions(&occ, &target).unwrap();
        let reach = reachable_from_reservoir(&occ, &target);
        let (open, closed): (Vec<_>, Vec<_>) = vacant_components(&occ, &target)
            .into_iter()
            .partition(|c| c.iter().any(|&i| reach[i]));
        prop_assert_eq!(as_index_sets(&l, &dec.open_regions), open.iter().cloned().collect());
        prop_assert_eq!(as_index_sets(&l, &dec.closed_regions), closed.iter().cloned().collect());
        prop_assert_eq!(dec.n1, open.iter().map(BTreeSet::len).sum::<usize>());
        prop_assert_eq!(dec.n2, closed.iter().map(BTreeSet::len).sum::<usize>());
        prop_assert_eq!(dec.n_vacant(), vacant_target_count(&occ, &target));
    }

    #[test]
    fn layers_match_erosion((_occ, target) in instance()) {
        let layers = classify_layers(&target);
        prop_assert_eq!(layers.sizes(), erosion_layers(&target));
        let all: BTreeSet<Site> = layers.layers.iter().flatten().copied().collect();
        prop_assert_eq!(all, target.sites().collect::<BTreeSet<_>>());
    }

    #[test]
    fn plans_survive_jsonl((occ, target) in feasible_instance()) {
        let plan = plan_hpfa(&occ, &target).unwrap();
        let text = plan.to_jsonl();
        let back = MovePlan::read_jsonl(*occ.lattice(), text.as_bytes()).unwrap();
        prop_assert_eq!(back, plan);
    }

    #[test]
    fn replay_without_loss_is_exact((occ, target) in feasible_instance(), seed in any::<u64>()) {
        let plan = plan_asa(&occ, &target).unwrap();
        let run = execute_noisy(&occ, &plan, &NoiseModel::uniform(1.0, seed)).unwrap();
        prop_assert_eq!(run.count(Outcome::Ok), plan.len());
        prop_assert_eq!(run.final_occ, apply_plan(&occ, &plan).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn heuristics_never_beat_the_optimum(mask in proptest::collection::vec(any::<bool>(), 16), k in 1usize..=2) {
        let l = Lattice::square(4).unwrap();
        let occ = Occupancy::from_mask(l, mask).unwrap();
        let target = make_target(l, &PatternSpec::Square(k)).unwrap();
        prop_assume!(is_feasible(&occ, &target));
        let limits = OracleLimits { max_atoms: 16, ..OracleLimits::default() };
        let best = optimal_moves_oracle(&occ, &target, &limits).unwrap();
        // each move fills at most one target site
        prop_assert!(best >= vacant_target_count(&occ, &target));
        for alg in Algorithm::ALL {
            prop_assert!(alg.plan(&occ, &target).unwrap().len() >= best, "{}", alg);
        }
    }
}
