mod common;

use std::collections::BTreeSet;

use common::*;
use pedigree_core::layered::{LayeredState, Provenance, StageOutcome};
use pedigree_core::membership::FailureReason;
use pedigree_core::oracle::{active_paths, active_set, oracle_membership, oracle_membership_with_dim, pedigrees};
use pedigree_core::pedigree::{Pedigree, Triangle};
use pedigree_core::rational::ratio;

fn t(i: usize, j: usize, k: usize) -> Triangle {
    Triangle::new(i, j, k).unwrap()
}

fn sorted(mut v: Vec<(Pedigree, pedigree_core::Rational)>) -> Vec<(Pedigree, pedigree_core::Rational)> {
    v.sort();
    v
}

#[test]
fn fat_member_decomposition_matches_unique_weights() {
    let x = cv(5, FAT_MEMBER);
    let v = run(&x);
    assert!(v.member && v.violations.is_empty());
    let o = oracle_membership_with_dim(&x).unwrap();
    assert_eq!(o.dim_lambda, Some(0));
    let want = vec![
        (ped(&[(1, 3), (1, 4)]), ratio(1, 6)),
        (ped(&[(1, 3), (3, 4)]), ratio(1, 6)),
        (ped(&[(2, 3), (1, 3)]), ratio(1, 6)),
        (ped(&[(2, 3), (3, 4)]), ratio(1, 6)),
        (ped(&[(2, 3), (2, 4)]), ratio(1, 3)),
    ];
    assert_eq!(sorted(v.decomposition.unwrap()), sorted(want.clone()));
    assert_eq!(sorted(o.witness.unwrap()), sorted(want));
}

#[test]
fn n5_base_and_fat4_failure() {
    let v = run(&cv(5, N5_BASE));
    assert!(v.member);
    assert_eq!(v.trace[0].r_size, 0);
    let w = run(&cv(5, FAT4_OUTSIDE));
    let f = w.failure.unwrap();
    assert_eq!((f.k, f.reason.tag()), (4, "fat4"));
    assert!(!oracle_membership(&cv(5, FAT4_OUTSIDE)).unwrap().member);
}

#[test]
fn chain_member_stages() {
    let x = cv(6, CHAIN_MEMBER);
    let (state, rep) = LayeredState::build_n4(&x).unwrap();
    assert_eq!(rep.r_size, 4);
    assert_eq!(state.rigid_at(4).len(), 4);
    let lc = state.link_capacity(&state.restricted_network(t(1, 2, 5), t(1, 3, 6)));
    assert_eq!(lc.value, ratio(1, 8));
    assert_eq!(lc.unique.unwrap().nodes, vec![t(2, 3, 4), t(1, 2, 5)]);
    let lc = state.link_capacity(&state.restricted_network(t(3, 4, 5), t(3, 5, 6)));
    assert_eq!(lc.value, ratio(1, 8));

    let mut next = state.clone();
    let StageOutcome::Advanced(rep5) = next.advance().unwrap() else { panic!("F_5 infeasible") };
    assert!(rep5.rigidity.unwrap().all_rigid());
    let unique = next
        .rigid_at(5)
        .into_iter()
        .filter(|&p| matches!(next.rigid[p].provenance[0], Provenance::UniquePath { .. }))
        .count();
    assert_eq!(unique, 2);
    assert_eq!(next.rigid_at(5).len(), 6);
}

#[test]
fn chain_member_decomposition_is_the_active_set() {
    let x = cv(6, CHAIN_MEMBER);
    let v = run(&x);
    assert!(v.member && v.violations.is_empty(), "{:?}", v.violations);
    let parts = v.decomposition.unwrap();
    assert_eq!(parts.len(), 7);
    let total: pedigree_core::Rational = parts.iter().map(|(_, w)| w.clone()).sum();
    assert_eq!(total, ratio(1, 1));
    let mut back = pedigree_core::CharVector::zeros(6);
    for (p, w) in &parts {
        back.add_scaled(&p.char_vector(), w);
    }
    assert_eq!(back, x);

    let table = pedigrees(6).unwrap();
    let active: BTreeSet<Pedigree> = active_set(&x).unwrap().unwrap().into_iter().map(|i| table[i].clone()).collect();
    let ours: BTreeSet<Pedigree> = parts.into_iter().map(|(p, _)| p).collect();
    assert_eq!(active, ours);
}

#[test]
fn chain_member_active_paths_survive() {
    let x = cv(6, CHAIN_MEMBER);
    let v = run_keep(&x);
    let table = pedigrees(6).unwrap();
    let active: Vec<Pedigree> = active_set(&x).unwrap().unwrap().into_iter().map(|i| table[i].clone()).collect();
    let rep = active_paths(&active, &v.states[0]);
    assert_eq!(rep.checked, active.len());
    assert!(rep.violations.is_empty(), "{:?}", rep.violations);
}

#[test]
fn mcf_short_mcf_gap() {
    let x = cv(6, MCF_SHORT);
    let v = run(&x);
    let f = v.failure.unwrap();
    assert_eq!(f.k, 5);
    let FailureReason::McfShort { z, z_max } = f.reason else { panic!("{:?}", f.reason) };
    assert_eq!(z_max - z, ratio(1, 4));
    assert!(!oracle_membership(&x).unwrap().member);
}

#[test]
fn n6_trio() {
    for (s, member) in [(N6_MEMBER, true), (N6_OUTSIDE, false), (N6_SPARSE, true)] {
        let x = cv(6, s);
        let v = run(&x);
        assert_eq!(v.member, member, "{s}");
        assert!(v.violations.is_empty());
        assert_eq!(oracle_membership(&x).unwrap().member, member);
    }
}

#[test]
fn f6_infeasible_f6_infeasible() {
    let x = f6_infeasible();
    let f = run(&x).failure.unwrap();
    assert_eq!((f.k, f.reason.tag()), (6, "fk_infeasible"));
    assert!(!oracle_membership(&x).unwrap().member);
}

#[test]
fn overdrawn_node_is_rejected() {
    let x = cv(6, OVERDRAWN);
    let v = run(&x);
    assert!(!v.member);
    let f = v.failure.unwrap();
    assert_eq!(f.k, 5);
    let FailureReason::Overdrawn { element, residual } = f.reason else { panic!("{:?}", f.reason) };
    assert_eq!(element, "[4:1,3]");
    assert_eq!(residual, ratio(-57, 1024));
    assert!(!oracle_membership(&x).unwrap().member);
}

#[test]
fn broken_unique_path_is_reported_not_trusted() {
    // The hull oracle says member; it takes minutes at n = 8, so it is not rerun here.
    let v = run(&cv(8, BROKEN_PATH));
    assert!(v.member);
    assert!(v.violations.iter().any(|s| s.contains("([7:2,3], [8:3,4]) is not a pedigree")), "{:?}", v.violations);
}
