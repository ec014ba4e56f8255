mod common;

use common::*;
use pedigree_core::oracle::{
    active_paths, active_set, adjacent, face_dimension, instant_flow_feasible, oracle_membership_with_dim, pedigrees,
};
use pedigree_core::pedigree::{CharVector, Pedigree};
use pedigree_core::random::{generate, Mode};

fn member_points(n: usize, seed: u64, count: usize) -> Vec<CharVector> {
    let mut pts = generate(n, Mode::Hull, seed, count / 2).unwrap();
    pts.extend(generate(n, Mode::Pmi, seed, 4 * count).unwrap().into_iter().filter(|x| run(x).member).take(count / 2));
    pts
}

/// Checks the flow invariants on one member point; returns the number of stages inspected.
fn check_point(x: &CharVector) -> usize {
    let n = x.n();
    let v = run_keep(x);
    assert!(v.member, "{}", v.headline());
    assert!(v.violations.is_empty(), "{:?}", v.violations);
    let o = oracle_membership_with_dim(x).unwrap();
    let lambda = o.witness.unwrap();
    let table = pedigrees(n).unwrap();
    let active: Vec<Pedigree> = active_set(x).unwrap().unwrap().into_iter().map(|i| table[i].clone()).collect();
    let mut stages = 0;
    for l in 5..n {
        let before = &v.states[l - 5];
        let fk = &v.problems[l - 4];
        assert_eq!(fk.k, l);
        assert!(instant_flow_feasible(&lambda, before, fk).unwrap(), "instant flow infeasible on F_{l}");
        let rep = active_paths(&active, before);
        assert!(rep.violations.is_empty(), "{:?}", rep.violations);
        stages += 1;
    }
    for (i, state) in v.states.iter().enumerate() {
        let l = state.k;
        assert_eq!(l, 4 + i);
        let r = state.rigid_at(l);
        let dim = face_dimension(&x.restrict(l + 1)).unwrap().unwrap();
        assert!(r.len() <= dim + 1, "|R_{l}| = {} but the face has dimension {dim}", r.len());
        if l < 6 {
            for (a, &p) in r.iter().enumerate() {
                for &q in &r[a + 1..] {
                    let (pp, qq) = (&state.rigid[p].pedigree, &state.rigid[q].pedigree);
                    assert!(adjacent(pp, qq).unwrap(), "{pp:?} and {qq:?} not adjacent");
                }
            }
        }
    }
    stages
}

#[test]
fn flow_invariants_hold_on_known_members() {
    for x in [cv(5, FAT_MEMBER), cv(6, CHAIN_MEMBER), cv(6, N6_MEMBER), cv(6, N6_SPARSE)] {
        check_point(&x);
    }
}

#[test]
fn flow_invariants_hold_at_n5_n6() {
    let mut stages = 0;
    for (n, seed) in [(5, 11), (6, 12)] {
        for x in member_points(n, seed, 40) {
            stages += check_point(&x);
        }
    }
    assert!(stages >= 40);
}

#[test]
fn flow_invariants_hold_at_n7() {
    for x in member_points(7, 13, 10) {
        check_point(&x);
    }
}

#[test]
fn weight_set_dimension_does_not_bound_rigid_count() {
    // The fat point has one weight vector, yet all five of its pedigrees are rigid.
    let x = cv(5, FAT_MEMBER);
    assert_eq!(oracle_membership_with_dim(&x).unwrap().dim_lambda, Some(0));
    assert_eq!(run_keep(&x).states[0].rigid_at(4).len(), 5);
    assert_eq!(face_dimension(&x).unwrap(), Some(4));
}

#[test]
fn non_members_have_no_active_set() {
    let x = cv(6, MCF_SHORT);
    assert!(active_set(&x).unwrap().is_none());
}

#[test]
fn adjacency_at_n4() {
    // conv(P_4) is a triangle: all three vertices are pairwise adjacent.
    let all = pedigrees(4).unwrap();
    for a in all {
        for b in all {
            assert_eq!(adjacent(a, b).unwrap(), a != b);
        }
    }
}
