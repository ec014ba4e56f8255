mod common;

use pedigree_core::experiment::{run_experiment, ExperimentConfig};
use pedigree_core::membership::shortcut;
use pedigree_core::oracle::oracle_membership;
use pedigree_core::random::{generate, Mode};
use pedigree_core::{check_membership, MembershipOptions};

fn config(n_min: usize, n_max: usize, count: usize, seed: u64) -> ExperimentConfig {
    ExperimentConfig { n_min, n_max, count, seed, modes: Mode::ALL.to_vec(), shortcuts: false }
}

#[test]
fn driver_agrees_with_oracle_n5_n6() {
    let s = run_experiment(&config(5, 6, 200, 1)).unwrap();
    assert_eq!(s.total(), 400);
    assert!(s.is_clean(), "{s}\n{:?}", s.discrepancies.iter().map(|d| &d.report).collect::<Vec<_>>());
    // The suite must exercise both verdicts.
    assert!(s.rows.iter().map(|r| r.both_member).sum::<usize>() > 50);
    assert!(s.rows.iter().map(|r| r.both_not_member).sum::<usize>() > 50);
}

#[test]
fn driver_agrees_with_oracle_n7() {
    let s = run_experiment(&config(7, 7, 60, 2)).unwrap();
    assert_eq!(s.total(), 60);
    assert!(s.is_clean(), "{s}");
}

#[test]
fn empty_range() {
    let s = run_experiment(&config(6, 5, 10, 1)).unwrap();
    assert_eq!(s.total(), 0);
    assert!(s.is_clean());
}

#[test]
fn hull_points_are_members() {
    for x in generate(6, Mode::Hull, 1, 5).unwrap() {
        assert!(oracle_membership(&x).unwrap().member);
        assert!(common::run(&x).member);
    }
}

#[test]
fn generation_is_deterministic() {
    for mode in Mode::ALL {
        assert_eq!(generate(6, mode, 9, 20).unwrap(), generate(6, mode, 9, 20).unwrap());
    }
}

#[test]
fn shortcuts_agree_with_full_mcf() {
    let with = MembershipOptions { shortcuts: true, ..Default::default() };
    let mut fired = 0;
    for n in 5..=7 {
        for mode in Mode::ALL {
            for x in generate(n, mode, 5, 40).unwrap() {
                let a = check_membership(&x, &with).unwrap();
                let b = common::run(&x);
                assert_eq!(a.member, b.member, "{}", a.headline());
                fired += a.trace.iter().filter(|s| s.shortcut.is_some()).count();
            }
        }
    }
    // Points with a unit coordinate or only new edges are common among hull points.
    assert!(fired > 0);
    let unit = common::cv(6, common::N6_SPARSE);
    assert_eq!(shortcut(&unit, 5), Some("unit coordinate"));
}
