use pedigree_core::oracle::{oracle_dimension, pedigrees, rank};
use pedigree_core::pedigree::tau;
use pedigree_core::Rational;

#[test]
fn dimension_formula() {
    for n in 4..=7 {
        assert_eq!(oracle_dimension(n).unwrap(), tau(n) - (n - 3), "n = {n}");
    }
}

#[test]
fn rank_counts_independent_rows() {
    let r = |v: i64| Rational::from_integer(v.into());
    let rows = vec![vec![r(1), r(2), r(3)], vec![r(2), r(4), r(6)], vec![r(0), r(1), r(1)]];
    assert_eq!(rank(rows), 2);
    assert_eq!(rank(Vec::new()), 0);
}

#[test]
fn beyond_bound_is_a_resource_error() {
    assert!(matches!(pedigrees(9), Err(pedigree_core::Error::Resource(_))));
    assert!(oracle_dimension(9).is_err());
}
