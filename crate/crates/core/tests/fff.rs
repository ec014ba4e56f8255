mod common;

use pedigree_core::flow::{solve_fat, FatOutcome, FatProblem};
use pedigree_core::rigidity::{find_rigid, rigidity_oracle};
use pedigree_core::Rational;
use proptest::prelude::*;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn check(p: &FatProblem) -> Result<(), String> {
    let FatOutcome::Feasible(sol) = solve_fat(p).unwrap() else {
        return Err("planted instance reported infeasible".into());
    };
    let fast = find_rigid(p, &sol.flow).unwrap();
    let slow = rigidity_oracle(p).unwrap();
    if fast.rigid != slow.rigid {
        return Err(format!("rigid sets differ: {:?} vs {:?}", fast.rigid, slow.rigid));
    }
    for a in fast.rigid_arcs() {
        if fast.flow[a] != slow.flow[a] {
            return Err(format!("arc {a}: frozen flow differs"));
        }
    }
    if fast.dummy != slow.dummy {
        return Err("dummy sets differ".into());
    }
    Ok(())
}

#[test]
fn find_rigid_matches_oracle_on_random_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..150 {
        let p = common::planted_fat(&mut rng);
        if let Err(e) = check(&p) {
            panic!("instance {i}: {e}\n{p:?}");
        }
    }
}

#[test]
fn fully_capped_instance_is_all_rigid() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut p = common::planted_fat(&mut rng);
    let FatOutcome::Feasible(sol) = solve_fat(&p).unwrap() else { panic!() };
    for (a, f) in sol.flow.iter().enumerate() {
        p.arcs[a].cap = Some(f.clone());
    }
    p.arcs.retain(|a| a.cap.as_ref().is_some_and(|c| *c > Rational::from_integer(0.into())));
    let FatOutcome::Feasible(sol) = solve_fat(&p).unwrap() else { panic!() };
    assert!(find_rigid(&p, &sol.flow).unwrap().all_rigid());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rigid_flows_agree_across_feasible_flows(seed in any::<u64>()) {
        let p = common::planted_fat(&mut ChaCha8Rng::seed_from_u64(seed));
        prop_assert_eq!(check(&p), Ok(()));
    }
}
