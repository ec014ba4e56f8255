//! Brute-force answers at small `n`: the convex-combination LP over every
//! pedigree, the dimension of the weight set, and the polytope dimension.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::layered::{FkInstance, LayeredState, Tail};
use crate::lp::{lp_solve, LpInstance, LpOutcome, Relation, Sense};
use crate::pedigree::{enumerate_pedigrees_bounded, tau, CharVector, Pedigree, Triangle};
use crate::rational::Rational;

pub const ORACLE_BOUND: usize = 8;

static TABLES: [OnceLock<Vec<Pedigree>>; ORACLE_BOUND + 1] = [const { OnceLock::new() }; ORACLE_BOUND + 1];

/// All pedigrees on `n` cities, cached.
pub fn pedigrees(n: usize) -> Result<&'static [Pedigree]> {
    if !(4..=ORACLE_BOUND).contains(&n) {
        return Err(Error::Resource(format!("the hull oracle supports 4 <= n <= {ORACLE_BOUND}, got {n}")));
    }
    if let Some(t) = TABLES[n].get() {
        return Ok(t);
    }
    let t = enumerate_pedigrees_bounded(n, ORACLE_BOUND)?;
    Ok(TABLES[n].get_or_init(|| t))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleVerdict {
    pub member: bool,
    pub witness: Option<Vec<(Pedigree, Rational)>>,
    /// Affine dimension of the weight set, when requested.
    pub dim_lambda: Option<usize>,
}

fn hull_lp(x: &CharVector, peds: &[Pedigree]) -> LpInstance {
    let m = tau(x.n());
    let mut cols: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); m];
    for (v, p) in peds.iter().enumerate() {
        for t in p.triangles() {
            cols[CharVector::position(t)].push((v, Rational::one()));
        }
    }
    let mut lp = LpInstance::new(peds.len());
    lp.add_row((0..peds.len()).map(|v| (v, Rational::one())).collect(), Relation::Eq, Rational::one());
    for (c, coeffs) in cols.into_iter().enumerate() {
        lp.add_row(coeffs, Relation::Eq, x.coords()[c].clone());
    }
    lp
}

/// Decides `X in conv(P_n)` by a feasibility LP over all pedigrees.
pub fn oracle_membership(x: &CharVector) -> Result<OracleVerdict> {
    let peds = pedigrees(x.n())?;
    let lp = hull_lp(x, peds);
    match lp_solve(&lp)? {
        LpOutcome::Optimal { x: lambda, .. } => {
            let witness = support(peds, &lambda);
            Ok(OracleVerdict { member: true, witness: Some(witness), dim_lambda: None })
        }
        LpOutcome::Infeasible => Ok(OracleVerdict { member: false, witness: None, dim_lambda: None }),
        LpOutcome::Unbounded => Err(Error::Invariant("feasibility LP reported unbounded".into())),
    }
}

fn support(peds: &[Pedigree], lambda: &[Rational]) -> Vec<(Pedigree, Rational)> {
    lambda
        .iter()
        .enumerate()
        .filter(|(_, w)| w.is_positive())
        .map(|(v, w)| (peds[v].clone(), w.clone()))
        .collect()
}

/// Indices of pedigrees active in some representation of `X`, or `None` if `X` is outside.
pub fn active_set(x: &CharVector) -> Result<Option<BTreeSet<usize>>> {
    let peds = pedigrees(x.n())?;
    let mut lp = hull_lp(x, peds);
    let mut active = BTreeSet::new();
    loop {
        let rest: Vec<(usize, Rational)> =
            (0..peds.len()).filter(|v| !active.contains(v)).map(|v| (v, Rational::one())).collect();
        if rest.is_empty() {
            return Ok(Some(active));
        }
        lp.set_objective(Sense::Maximize, rest);
        match lp_solve(&lp)? {
            LpOutcome::Optimal { value, x: lambda } => {
                if value.is_zero() {
                    return Ok(Some(active));
                }
                active.extend((0..peds.len()).filter(|&v| lambda[v].is_positive()));
            }
            LpOutcome::Infeasible => return Ok(None),
            LpOutcome::Unbounded => return Err(Error::Invariant("weights are bounded".into())),
        }
    }
}

/// Membership together with the affine dimension of the weight set.
pub fn oracle_membership_with_dim(x: &CharVector) -> Result<OracleVerdict> {
    let mut v = oracle_membership(x)?;
    if !v.member {
        return Ok(v);
    }
    let peds = pedigrees(x.n())?;
    let active = active_set(x)?.expect("member has an active set");
    // Columns (CV(P), 1) over the active set; the weight set has dimension |A| - rank.
    let rows: Vec<Vec<Rational>> = active
        .iter()
        .map(|&v| {
            let mut r = peds[v].char_vector().into_coords();
            r.push(Rational::one());
            r
        })
        .collect();
    v.dim_lambda = Some(active.len() - rank(rows));
    Ok(v)
}

/// Affine dimension of the active pedigrees of `X`, i.e. of the smallest
/// face of `conv(P_n)` containing it; `None` outside the hull.
pub fn face_dimension(x: &CharVector) -> Result<Option<usize>> {
    let peds = pedigrees(x.n())?;
    let Some(active) = active_set(x)? else { return Ok(None) };
    let rows: Vec<Vec<Rational>> = active
        .iter()
        .map(|&v| {
            let mut r = peds[v].char_vector().into_coords();
            r.push(Rational::one());
            r
        })
        .collect();
    Ok(Some(rank(rows) - 1))
}

/// Rank by exact Gaussian elimination.
pub fn rank(mut rows: Vec<Vec<Rational>>) -> usize {
    let cols = rows.first().map_or(0, |r| r.len());
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        let pivot = rows[r][c].clone();
        let pr = rows[r].clone();
        for row in rows.iter_mut().skip(r + 1) {
            if row[c].is_zero() {
                continue;
            }
            let f = &row[c] / &pivot;
            for (a, b) in row.iter_mut().zip(&pr).skip(c) {
                *a -= &f * b;
            }
        }
        r += 1;
        if r == rows.len() {
            break;
        }
    }
    r
}

/// Affine dimension of `conv(P_n)`.
pub fn oracle_dimension(n: usize) -> Result<usize> {
    let peds = pedigrees(n)?;
    let base = peds[0].char_vector();
    let rows = peds[1..]
        .iter()
        .map(|p| {
            p.char_vector().coords().iter().zip(base.coords()).map(|(a, b)| a - b).collect()
        })
        .collect();
    Ok(rank(rows))
}

/// Two pedigrees are adjacent on `conv(P_n)` iff their midpoint has a unique representation.
pub fn adjacent(a: &Pedigree, b: &Pedigree) -> Result<bool> {
    if a.n() != b.n() {
        return Err(Error::Precondition("adjacency needs pedigrees of one size".into()));
    }
    if a == b {
        return Ok(false);
    }
    let half = Rational::new(1.into(), 2.into());
    let mut mid = CharVector::zeros(a.n());
    mid.add_scaled(&a.char_vector(), &half);
    mid.add_scaled(&b.char_vector(), &half);
    let v = oracle_membership_with_dim(&mid)?;
    Ok(v.dim_lambda == Some(0))
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ActivePathReport {
    pub checked: usize,
    pub violations: Vec<String>,
}

/// For each active pedigree `P*`, its path to layer `l` must survive in the
/// restricted network of its own link, or `P*/l` must be a rigid pedigree.
///
/// `before` is the state `N_{l-1}` from which `F_l` was built.
pub fn active_paths(active: &[Pedigree], before: &LayeredState) -> ActivePathReport {
    let l = before.k + 1;
    let mut rep = ActivePathReport::default();
    for p in active {
        if p.n() < l + 1 {
            continue;
        }
        rep.checked += 1;
        let prefix = p.restrict(l);
        if before.rigid.iter().any(|r| r.stage == l - 1 && r.pedigree == prefix) {
            continue;
        }
        let (u, v) = (p.triangle_at(l), p.triangle_at(l + 1));
        let rn = before.restricted_network(u, v);
        let nodes: BTreeSet<Triangle> = rn.nodes.iter().copied().collect();
        let arc_set: BTreeSet<(Tail, Triangle)> =
            rn.arcs.iter().map(|&a| (before.arcs[a].tail, before.arcs[a].head)).collect();
        let node_path = |from: usize, start: Tail| -> bool {
            let mut prev = start;
            for c in from..=l {
                let t = p.triangle_at(c);
                if !nodes.contains(&t) {
                    return false;
                }
                if c > 4 && !arc_set.contains(&(prev, t)) {
                    return false;
                }
                prev = Tail::Node(t);
            }
            true
        };
        let from_layer4 = node_path(4, Tail::Node(p.triangle_at(4)));
        let from_shrunk = rn.shrunk.iter().any(|&s| {
            let r = &before.rigid[s];
            p.restrict(r.pedigree.n()) == r.pedigree && node_path(r.pedigree.n() + 1, Tail::Shrunk(s))
        });
        if !(from_layer4 || from_shrunk) {
            rep.violations.push(format!("stage {l}: path of active pedigree {p:?} does not survive"));
        }
    }
    rep
}

/// Whether the instant flow of a representation `lambda` can be routed on `F_l`.
pub fn instant_flow_feasible(
    lambda: &[(Pedigree, Rational)],
    before: &LayeredState,
    fk: &FkInstance,
) -> Result<bool> {
    let l = fk.k;
    let last = |o: Tail| -> Triangle {
        match o {
            Tail::Node(t) => t,
            Tail::Shrunk(p) => before.rigid[p].pedigree.triangle_at(l),
        }
    };
    let mut pairs: Vec<((Triangle, Triangle), Rational)> = Vec::new();
    for (p, w) in lambda {
        let key = (p.triangle_at(l), p.triangle_at(l + 1));
        match pairs.iter_mut().find(|(k, _)| *k == key) {
            Some((_, acc)) => *acc += w,
            None => pairs.push((key, w.clone())),
        }
    }
    let arcs = &fk.problem.arcs;
    let mut lp = LpInstance::new(arcs.len());
    for (key, w) in &pairs {
        let coeffs: Vec<(usize, Rational)> = (0..arcs.len())
            .filter(|&a| {
                let (o, d) = fk.arc_ends(a);
                (last(o), d) == *key
            })
            .map(|a| (a, Rational::one()))
            .collect();
        if coeffs.is_empty() {
            return Ok(false);
        }
        lp.add_row(coeffs, Relation::Eq, w.clone());
    }
    for (a, arc) in arcs.iter().enumerate() {
        if let Some(c) = &arc.cap {
            lp.add_row(vec![(a, Rational::one())], Relation::Le, c.clone());
        }
    }
    for (o, s) in fk.problem.supply.iter().enumerate() {
        let coeffs = (0..arcs.len()).filter(|&a| arcs[a].origin == o).map(|a| (a, Rational::one())).collect();
        lp.add_row(coeffs, Relation::Le, s.clone());
    }
    Ok(matches!(lp_solve(&lp)?, LpOutcome::Optimal { .. }))
}
