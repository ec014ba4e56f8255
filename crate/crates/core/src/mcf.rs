//! The multicommodity flow problem `MCF(k)` over `N_k`.
//!
//! Every arc of `F_l` (`5 <= l <= k`) is a commodity. A commodity out of a
//! layer node travels on its own restricted network; one out of a shrunk
//! pedigree is carried by the arc alone. Joint flows `f_a` tie the commodities
//! of each stage together.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::layered::{LayeredState, RestrictedNetwork, Tail};
use crate::lp::{lp_solve, LpInstance, LpOutcome, Relation, Sense};
use crate::mi::check_pmi;
use crate::pedigree::{CharVector, Triangle};
use crate::rational::Rational;

#[derive(Debug, Clone)]
pub struct Commodity {
    /// Index into the state's arcs.
    pub arc: usize,
    pub stage: usize,
    pub network: Option<RestrictedNetwork>,
    /// Arc index to LP variable, including the commodity's own arc.
    pub vars: BTreeMap<usize, usize>,
}

#[derive(Debug, Clone)]
pub struct McfModel {
    pub k: usize,
    pub lp: LpInstance,
    /// `f_a` is variable `a`.
    pub joint: usize,
    pub commodities: Vec<Commodity>,
    pub z_max: Rational,
}

#[derive(Debug, Clone)]
pub struct McfReport {
    pub k: usize,
    pub z_max: Rational,
    pub z: Rational,
    pub vars: usize,
    pub rows: usize,
    /// `Y^s` for the commodities of the last stage, with their values.
    pub projections: Vec<(usize, Rational, CharVector)>,
    pub violations: Vec<String>,
}

impl McfReport {
    pub fn is_short(&self) -> bool {
        self.z < self.z_max
    }
}

fn one() -> Rational {
    Rational::one()
}

fn neg_one() -> Rational {
    -Rational::one()
}

impl McfModel {
    pub fn build(state: &LayeredState) -> McfModel {
        let k = state.k;
        let arcs = &state.arcs;
        let joint = arcs.len();
        let mut lp = LpInstance::new(joint);
        let mut commodities = Vec::new();
        for (a, arc) in arcs.iter().enumerate() {
            if arc.stage < 5 {
                continue;
            }
            let network = match arc.tail {
                Tail::Node(u) => Some(state.restricted_network(u, arc.head)),
                Tail::Shrunk(_) => None,
            };
            let mut vars = BTreeMap::new();
            vars.insert(a, lp.add_var());
            if let Some(rn) = &network {
                for &b in &rn.arcs {
                    vars.insert(b, lp.add_var());
                }
            }
            commodities.push(Commodity { arc: a, stage: arc.stage, network, vars });
        }

        for (a, arc) in arcs.iter().enumerate() {
            lp.add_named_row(format!("cap_{a}"), vec![(a, one())], Relation::Le, arc.cap.clone());
        }
        for (s, c) in commodities.iter().enumerate() {
            for (&b, &var) in &c.vars {
                lp.add_named_row(format!("ccap_{s}_{b}"), vec![(var, one())], Relation::Le, arcs[b].cap.clone());
            }
            let own = c.vars[&c.arc];
            lp.add_named_row(format!("value_{s}"), vec![(own, one()), (c.arc, neg_one())], Relation::Eq, Rational::zero());
            let Some(rn) = &c.network else { continue };
            let sink = rn.link.0;
            for &w in &rn.nodes {
                if w.k == 4 {
                    continue;
                }
                let mut coeffs: Vec<(usize, Rational)> = rn
                    .arcs
                    .iter()
                    .filter(|&&b| arcs[b].head == w)
                    .map(|&b| (c.vars[&b], one()))
                    .collect();
                if w == sink {
                    coeffs.push((own, neg_one()));
                } else {
                    coeffs.extend(
                        rn.arcs
                            .iter()
                            .filter(|&&b| arcs[b].tail == Tail::Node(w))
                            .map(|&b| (c.vars[&b], neg_one())),
                    );
                }
                lp.add_named_row(format!("cons_{s}_{}", node_name(w)), coeffs, Relation::Eq, Rational::zero());
            }
            if !rn.nodes.contains(&sink) {
                lp.add_named_row(format!("nosink_{s}"), vec![(own, one())], Relation::Eq, Rational::zero());
            }
        }

        for l in 5..=k {
            let stage: Vec<&Commodity> = commodities.iter().filter(|c| c.stage == l).collect();
            for (b, arc) in arcs.iter().enumerate() {
                if arc.stage >= l {
                    continue;
                }
                let mut coeffs: Vec<(usize, Rational)> =
                    stage.iter().filter_map(|c| c.vars.get(&b)).map(|&v| (v, one())).collect();
                coeffs.push((b, neg_one()));
                lp.add_named_row(format!("couple_{l}_{b}"), coeffs, Relation::Eq, Rational::zero());
            }
            for (&w, cap) in state.nodes.iter().filter(|(w, _)| w.k >= 5 && w.k <= l + 1) {
                let coeffs: Vec<(usize, Rational)> = stage
                    .iter()
                    .flat_map(|c| c.vars.iter().filter(|(&b, _)| arcs[b].head == w).map(|(_, &v)| (v, one())))
                    .collect();
                if !coeffs.is_empty() {
                    lp.add_named_row(format!("inflow_{l}_{}", node_name(w)), coeffs, Relation::Le, cap.clone());
                }
            }
        }

        for (&w, cap) in &state.nodes {
            let coeffs: Vec<(usize, Rational)> = if w.k == 4 {
                (0..joint).filter(|&b| arcs[b].tail == Tail::Node(w)).map(|b| (b, one())).collect()
            } else {
                (0..joint).filter(|&b| arcs[b].head == w).map(|b| (b, one())).collect()
            };
            if !coeffs.is_empty() {
                lp.add_named_row(format!("node_{}", node_name(w)), coeffs, Relation::Le, cap.clone());
            }
        }
        for (p, r) in state.rigid.iter().enumerate() {
            let coeffs: Vec<(usize, Rational)> =
                (0..joint).filter(|&b| arcs[b].tail == Tail::Shrunk(p)).map(|b| (b, one())).collect();
            if !coeffs.is_empty() {
                lp.add_named_row(format!("shrunk_{p}"), coeffs, Relation::Le, r.mu_bar.clone());
            }
        }

        let objective = (0..joint).filter(|&a| arcs[a].stage == k).map(|a| (a, one())).collect();
        lp.set_objective(Sense::Maximize, objective);
        McfModel { k, lp, joint, commodities, z_max: state.z_max() }
    }

    pub fn var_name(&self, v: usize) -> String {
        if v < self.joint {
            return format!("f{v}");
        }
        for (s, c) in self.commodities.iter().enumerate() {
            if let Some((b, _)) = c.vars.iter().find(|(_, &x)| x == v) {
                return format!("g{s}_{b}");
            }
        }
        format!("x{v}")
    }

    pub fn lp_text(&self) -> String {
        self.lp.to_lp_text(&|v| self.var_name(v))
    }

    /// `Y^s`: commodity flow out of each node, with flow out of a shrunk
    /// pedigree credited to every triangle it contains.
    pub fn projection(&self, state: &LayeredState, s: usize, x: &[Rational]) -> CharVector {
        let mut y = CharVector::zeros(self.k);
        for (&b, &var) in &self.commodities[s].vars {
            let phi = &x[var];
            if phi.is_zero() {
                continue;
            }
            match state.arcs[b].tail {
                Tail::Node(u) => *y.get_mut(u) += phi,
                Tail::Shrunk(p) => {
                    for t in state.rigid[p].pedigree.triangles() {
                        *y.get_mut(t) += phi;
                    }
                }
            }
        }
        y
    }
}

fn node_name(t: Triangle) -> String {
    format!("{}_{}_{}", t.k, t.edge.i, t.edge.j)
}

/// Solves `MCF(k)` and checks the projections of the last-stage commodities.
pub fn solve_mcf(state: &LayeredState) -> Result<(McfModel, McfReport)> {
    let model = McfModel::build(state);
    let x = match lp_solve(&model.lp)? {
        LpOutcome::Optimal { x, .. } => x,
        LpOutcome::Infeasible => return Err(Error::Invariant("MCF is infeasible at zero flow".into())),
        LpOutcome::Unbounded => return Err(Error::Invariant("MCF is unbounded".into())),
    };
    let z = model.lp.objective_value(&x);
    let k = model.k;
    let mut violations = Vec::new();
    for c in &model.commodities {
        if let Some(rn) = c.network.as_ref().filter(|rn| !state.check_generators(rn)) {
            violations.push(format!("stage {}: restricted network of ({}, {}) keeps a node without generator", model.k, rn.link.0, rn.link.1));
        }
    }
    let mut projections = Vec::new();
    if z == model.z_max {
        let mut target = state.x.restrict(k);
        for p in state.rigid_at(k) {
            let r = &state.rigid[p];
            target.add_scaled(&r.pedigree.restrict(k).char_vector(), &-r.mu.clone());
        }
        let mut total = CharVector::zeros(k);
        for (s, c) in model.commodities.iter().enumerate() {
            if c.stage != k {
                continue;
            }
            let v = x[c.arc].clone();
            let y = model.projection(state, s, &x);
            total.add_scaled(&y, &one());
            if !v.is_zero() {
                let mut scaled = CharVector::zeros(k);
                scaled.add_scaled(&y, &(one() / &v));
                if !check_pmi(&scaled).is_inside() {
                    violations.push(format!("stage {k}: projection of commodity {s} is outside the relaxation"));
                }
            }
            projections.push((s, v, y));
        }
        if total != target {
            violations.push(format!("stage {k}: commodity projections do not add up to the residual point"));
        }
    }
    let report = McfReport {
        k,
        z_max: model.z_max.clone(),
        z,
        vars: model.lp.num_vars(),
        rows: model.lp.rows().len(),
        projections,
        violations,
    };
    Ok((model, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layered::StageOutcome;
    use crate::rational::{parse, ratio};

    fn cv(n: usize, s: &str) -> CharVector {
        CharVector::new(n, s.split_whitespace().map(|t| parse(t).unwrap()).collect()).unwrap()
    }

    fn stage5(x: &CharVector) -> Option<LayeredState> {
        let (mut state, _) = LayeredState::build_n4(x).ok()?;
        match state.advance().unwrap() {
            StageOutcome::Advanced(_) => Some(state),
            _ => None,
        }
    }

    const BASE: &str = "0 3/4 1/4 1/2 0 0 0 0 1/2";

    #[test]
    fn short_flow_rejects() {
        let x = cv(6, &format!("{BASE} 0 1/4 1/4 0 1/4 1/4 0 0 0 0"));
        let state = stage5(&x).expect("F_5 feasible");
        let (_, rep) = solve_mcf(&state).unwrap();
        assert!(rep.is_short(), "z = {} z_max = {}", rep.z, rep.z_max);
    }

    #[test]
    fn full_flow_accepts() {
        let x = cv(6, &format!("{BASE} 1/8 1/8 3/8 0 1/8 1/4 0 0 0 0"));
        let state = stage5(&x).expect("F_5 feasible");
        let (model, rep) = solve_mcf(&state).unwrap();
        assert_eq!(rep.z, rep.z_max);
        assert!(rep.violations.is_empty(), "{:?}", rep.violations);
        assert!(model.lp_text().starts_with("Maximize"));
    }

    #[test]
    fn chain_member_chain() {
        let x = cv(6, "0 1/2 1/2 1/4 1/4 1/8 1/8 1/8 1/8 0 1/4 0 1/8 0 0 0 0 1/2 1/8");
        let state = stage5(&x).unwrap();
        let (_, rep) = solve_mcf(&state).unwrap();
        assert_eq!(rep.z_max, ratio(1, 8));
        assert_eq!(rep.z, ratio(1, 8));
        assert!(rep.violations.is_empty(), "{:?}", rep.violations);
    }
}
