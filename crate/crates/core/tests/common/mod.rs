#![allow(dead_code)]

use pedigree_core::flow::FatProblem;
use pedigree_core::pedigree::{CharVector, Edge, Pedigree};
use pedigree_core::rational::{parse, ratio};
use rand::Rng;
use pedigree_core::{check_membership, MembershipOptions, Verdict};

pub fn cv(n: usize, s: &str) -> CharVector {
    CharVector::new(n, s.split_whitespace().map(|t| parse(t).unwrap()).collect()).unwrap()
}

pub fn ped(edges: &[(usize, usize)]) -> Pedigree {
    Pedigree::from_edges(edges.iter().map(|&(i, j)| Edge::new(i, j).unwrap()).collect()).unwrap()
}

pub fn run(x: &CharVector) -> Verdict {
    check_membership(x, &MembershipOptions::default()).unwrap()
}

pub fn run_keep(x: &CharVector) -> Verdict {
    check_membership(x, &MembershipOptions { keep_states: true, ..Default::default() }).unwrap()
}

pub const FAT_MEMBER: &str = "0 1/3 2/3 0 1/6 0 1/6 1/3 1/3";
pub const N5_BASE: &str = "0 3/4 1/4 1/2 0 0 0 0 1/2";
pub const FAT4_OUTSIDE: &str = "0 3/4 1/4 0 1/4 0 0 1/4 1/2";
pub const CHAIN_MEMBER: &str = "0 1/2 1/2 1/4 1/4 1/8 1/8 1/8 1/8 0 1/4 0 1/8 0 0 0 0 1/2 1/8";
pub const MCF_SHORT: &str = "0 3/4 1/4 1/2 0 0 0 0 1/2 0 1/4 1/4 0 1/4 1/4 0 0 0 0";
pub const N6_MEMBER: &str = "0 3/4 1/4 1/2 0 0 0 0 1/2 1/8 1/8 3/8 0 1/8 1/4 0 0 0 0";
pub const N6_OUTSIDE: &str = "0 3/4 1/4 1/2 0 0 0 0 1/2 0 1/4 1/2 0 1/4 0 0 0 0 0";
pub const N6_SPARSE: &str = "0 3/4 1/4 1/2 0 0 1/2 0 0 0 0 0 0 0 1 0 0 0 0";
/// Several unique paths through [4:1,3] ask for more than its capacity.
pub const OVERDRAWN: &str =
    "1/16 3/4 3/16 13/64 0 39/64 0 3/16 0 141/256 0 201/1024 0 0 67/1024 0 0 0 3/16";

/// At n = 8 the only flow path for ([7:2,3], [8:3,4]) uses edge (1,3) twice.
pub const BROKEN_PATH: &str = "8/21 1/7 10/21 0 3/28 1/7 1/28 3/7 2/7 0 3/7 0 0 0 1/7 0 1/7 2/7 0 2/7 0 1/7 5/21 \
    0 0 0 0 0 0 0 0 4/21 0 1/7 0 0 0 0 0 4/21 0 0 0 0 0 1/7 5/21 0 2/7 0 0 1/7 0 0 0";

pub fn f6_infeasible() -> CharVector {
    let x7: Vec<&str> = (1..=15)
        .map(|pos| match pos {
            11 | 15 => "1/4",
            13 => "1/2",
            _ => "0",
        })
        .collect();
    cv(7, &format!("0 1/2 1/2 0 0 0 0 0 1 1/2 0 0 0 0 0 0 0 1/2 0 {}", x7.join(" ")))
}

/// A feasible instance built around a planted flow, with spare arcs.
pub fn planted_fat(rng: &mut impl Rng) -> FatProblem {
    let m = rng.gen_range(1..=8);
    let d = rng.gen_range(1..=8);
    let mut flows = vec![vec![0i64; d]; m];
    for row in flows.iter_mut() {
        row[rng.gen_range(0..d)] += rng.gen_range(1..=4);
    }
    for t in 0..d {
        let o = rng.gen_range(0..m);
        let row: &mut Vec<i64> = &mut flows[o];
        row[t] += rng.gen_range(1..=4);
    }
    let supply = flows.iter().map(|r| ratio(r.iter().sum(), 12)).collect();
    let demand = (0..d).map(|t| ratio(flows.iter().map(|r| r[t]).sum(), 12)).collect();
    let mut p = FatProblem::new(supply, demand);
    for (o, row) in flows.iter().enumerate() {
        for (t, &f) in row.iter().enumerate() {
            let spare = rng.gen_bool(0.3);
            if f > 0 || spare {
                let cap = match rng.gen_range(0..3) {
                    0 => None,
                    1 => Some(ratio(f, 12)),
                    _ => Some(ratio(f + rng.gen_range(0..3), 12)),
                };
                p.add_arc(o, t, cap);
            }
        }
    }
    p
}

