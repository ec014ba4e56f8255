//! Exact max-flow (shortest augmenting paths) and forbidden-arc transportation problems.

use std::collections::VecDeque;

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// A directed network with optional arc capacities (`None` is unbounded).
#[derive(Debug, Clone, Default)]
pub struct FlowNetwork {
    num_nodes: usize,
    arcs: Vec<(usize, usize, Option<Rational>)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaxFlow {
    pub value: Rational,
    /// Flow on each arc, in insertion order.
    pub flow: Vec<Rational>,
    /// Nodes reachable from the source in the final residual graph.
    pub source_side: Vec<bool>,
}

impl FlowNetwork {
    pub fn new(num_nodes: usize) -> FlowNetwork {
        FlowNetwork { num_nodes, arcs: Vec::new() }
    }

    pub fn add_node(&mut self) -> usize {
        self.num_nodes += 1;
        self.num_nodes - 1
    }

    pub fn add_arc(&mut self, from: usize, to: usize, cap: Option<Rational>) -> usize {
        assert!(from < self.num_nodes && to < self.num_nodes, "arc endpoint out of range");
        self.arcs.push((from, to, cap));
        self.arcs.len() - 1
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn arcs(&self) -> &[(usize, usize, Option<Rational>)] {
        &self.arcs
    }

    /// Maximum `source -> sink` flow. Panics if the value is unbounded.
    pub fn max_flow(&self, source: usize, sink: usize) -> MaxFlow {
        let n = self.num_nodes;
        let mut flow = vec![Rational::zero(); self.arcs.len()];
        let mut out_arcs: Vec<Vec<(usize, bool)>> = vec![Vec::new(); n];
        for (a, (u, v, _)) in self.arcs.iter().enumerate() {
            out_arcs[*u].push((a, true));
            out_arcs[*v].push((a, false));
        }
        let residual = |a: usize, fwd: bool, flow: &[Rational]| -> Option<Option<Rational>> {
            let cap = &self.arcs[a].2;
            if fwd {
                match cap {
                    None => Some(None),
                    Some(c) => {
                        let r = c - &flow[a];
                        r.is_positive().then_some(Some(r))
                    }
                }
            } else {
                flow[a].is_positive().then(|| Some(flow[a].clone()))
            }
        };
        let mut value = Rational::zero();
        loop {
            let mut pred: Vec<Option<(usize, bool)>> = vec![None; n];
            let mut seen = vec![false; n];
            seen[source] = true;
            let mut queue = VecDeque::from([source]);
            while let Some(u) = queue.pop_front() {
                if u == sink {
                    break;
                }
                for &(a, fwd) in &out_arcs[u] {
                    let w = if fwd { self.arcs[a].1 } else { self.arcs[a].0 };
                    if seen[w] || residual(a, fwd, &flow).is_none() {
                        continue;
                    }
                    seen[w] = true;
                    pred[w] = Some((a, fwd));
                    queue.push_back(w);
                }
            }
            if !seen[sink] || source == sink {
                let cut_ok = self.cut_capacity(&seen).is_some_and(|c| c == value);
                assert!(cut_ok, "max-flow value differs from the residual cut capacity");
                return MaxFlow { value, flow, source_side: seen };
            }
            let mut bottleneck: Option<Rational> = None;
            let mut w = sink;
            while w != source {
                let (a, fwd) = pred[w].expect("augmenting path predecessor");
                if let Some(r) = residual(a, fwd, &flow).expect("residual on path") {
                    if bottleneck.as_ref().is_none_or(|b| r < *b) {
                        bottleneck = Some(r);
                    }
                }
                w = if fwd { self.arcs[a].0 } else { self.arcs[a].1 };
            }
            let delta = bottleneck.expect("unbounded augmenting path");
            let mut w = sink;
            while w != source {
                let (a, fwd) = pred[w].unwrap();
                if fwd {
                    flow[a] += &delta;
                    w = self.arcs[a].0;
                } else {
                    flow[a] -= &delta;
                    w = self.arcs[a].1;
                }
            }
            value += delta;
        }
    }

    /// Capacity of the cut `(S, V \ S)`; `None` if an unbounded arc crosses it.
    pub fn cut_capacity(&self, source_side: &[bool]) -> Option<Rational> {
        let mut total = Rational::zero();
        for (u, v, cap) in &self.arcs {
            if source_side[*u] && !source_side[*v] {
                total += cap.as_ref()?;
            }
        }
        Some(total)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FatArc {
    pub origin: usize,
    pub dest: usize,
    pub cap: Option<Rational>,
}

/// Balanced transportation problem where only the listed arcs are allowed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FatProblem {
    pub supply: Vec<Rational>,
    pub demand: Vec<Rational>,
    pub arcs: Vec<FatArc>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowSolution {
    pub flow: Vec<Rational>,
    pub value: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FatOutcome {
    Feasible(FlowSolution),
    Infeasible { max_value: Rational, total: Rational },
}

impl FatProblem {
    pub fn new(supply: Vec<Rational>, demand: Vec<Rational>) -> FatProblem {
        FatProblem { supply, demand, arcs: Vec::new() }
    }

    pub fn add_arc(&mut self, origin: usize, dest: usize, cap: Option<Rational>) -> usize {
        self.arcs.push(FatArc { origin, dest, cap });
        self.arcs.len() - 1
    }

    pub fn total_supply(&self) -> Rational {
        self.supply.iter().sum()
    }

    pub fn validate(&self) -> Result<()> {
        if self.supply.iter().chain(&self.demand).any(|v| v.is_negative()) {
            return Err(Error::Structural("negative availability or demand".into()));
        }
        let demand: Rational = self.demand.iter().sum();
        if self.total_supply() != demand {
            return Err(Error::Structural("unbalanced transportation problem".into()));
        }
        for a in &self.arcs {
            if a.origin >= self.supply.len() || a.dest >= self.demand.len() {
                return Err(Error::Structural("arc endpoint out of range".into()));
            }
            if a.cap.as_ref().is_some_and(|c| c.is_negative()) {
                return Err(Error::Structural("negative arc capacity".into()));
            }
        }
        Ok(())
    }

    /// Exact check of the transportation constraints for `flow`.
    pub fn is_feasible_flow(&self, flow: &[Rational]) -> bool {
        if flow.len() != self.arcs.len() {
            return false;
        }
        let mut out = vec![Rational::zero(); self.supply.len()];
        let mut inn = vec![Rational::zero(); self.demand.len()];
        for (a, f) in self.arcs.iter().zip(flow) {
            if f.is_negative() || a.cap.as_ref().is_some_and(|c| f > c) {
                return false;
            }
            out[a.origin] += f;
            inn[a.dest] += f;
        }
        out == self.supply && inn == self.demand
    }

    /// Super source `0`, origins `1..=m`, destinations after them, super sink last.
    pub fn to_network(&self) -> (FlowNetwork, usize, usize) {
        let m = self.supply.len();
        let d = self.demand.len();
        let mut net = FlowNetwork::new(m + d + 2);
        let (s, t) = (0, m + d + 1);
        for a in &self.arcs {
            net.add_arc(1 + a.origin, 1 + m + a.dest, a.cap.clone());
        }
        for (i, v) in self.supply.iter().enumerate() {
            net.add_arc(s, 1 + i, Some(v.clone()));
        }
        for (j, v) in self.demand.iter().enumerate() {
            net.add_arc(1 + m + j, t, Some(v.clone()));
        }
        (net, s, t)
    }
}

pub fn solve_fat(p: &FatProblem) -> Result<FatOutcome> {
    p.validate()?;
    let (net, s, t) = p.to_network();
    let mf = net.max_flow(s, t);
    let total = p.total_supply();
    if mf.value != total {
        return Ok(FatOutcome::Infeasible { max_value: mf.value, total });
    }
    let flow = mf.flow[..p.arcs.len()].to_vec();
    debug_assert!(p.is_feasible_flow(&flow));
    Ok(FatOutcome::Feasible(FlowSolution { flow, value: mf.value }))
}

/// A network with node capacities, several sources and one sink.
#[derive(Debug, Clone, Default)]
pub struct CapacitatedNetwork {
    pub node_caps: Vec<Option<Rational>>,
    pub arcs: Vec<(usize, usize, Option<Rational>)>,
    pub sources: Vec<usize>,
    pub sink: usize,
}

/// Result of [`CapacitatedNetwork::max_flow`] together with the split network it was solved on.
#[derive(Debug, Clone)]
pub struct NodeMaxFlow {
    pub value: Rational,
    pub arc_flow: Vec<Rational>,
    pub split: FlowNetwork,
    pub split_flow: Vec<Rational>,
    pub super_source: usize,
    pub super_sink: usize,
}

impl CapacitatedNetwork {
    /// Node `v` becomes `2v -> 2v+1` carrying its capacity; original arcs follow.
    pub fn split(&self) -> (FlowNetwork, usize, usize) {
        let n = self.node_caps.len();
        let mut net = FlowNetwork::new(2 * n + 2);
        let (s, t) = (2 * n, 2 * n + 1);
        for (u, v, cap) in &self.arcs {
            net.add_arc(2 * u + 1, 2 * v, cap.clone());
        }
        for (v, cap) in self.node_caps.iter().enumerate() {
            net.add_arc(2 * v, 2 * v + 1, cap.clone());
        }
        for &src in &self.sources {
            net.add_arc(s, 2 * src, None);
        }
        net.add_arc(2 * self.sink + 1, t, None);
        (net, s, t)
    }

    pub fn max_flow(&self) -> NodeMaxFlow {
        let (split, s, t) = self.split();
        let mf = split.max_flow(s, t);
        NodeMaxFlow {
            value: mf.value,
            arc_flow: mf.flow[..self.arcs.len()].to_vec(),
            split,
            split_flow: mf.flow,
            super_source: s,
            super_sink: t,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use proptest::prelude::*;

    pub(crate) fn rigid_ex_a() -> FatProblem {
        let mut p = FatProblem::new(
            vec![ratio(3, 10), ratio(3, 10), ratio(4, 10)],
            vec![ratio(4, 10), ratio(2, 10), ratio(1, 10), ratio(3, 10)],
        );
        let forbidden = [(0, 2), (0, 3), (2, 0), (2, 2)];
        for o in 0..3 {
            for d in 0..4 {
                if !forbidden.contains(&(o, d)) {
                    p.add_arc(o, d, None);
                }
            }
        }
        p
    }

    #[test]
    fn rigid_example_feasible() {
        let p = rigid_ex_a();
        let FatOutcome::Feasible(sol) = solve_fat(&p).unwrap() else { panic!() };
        assert!(p.is_feasible_flow(&sol.flow));
        assert_eq!(sol.value, int(1));
    }

    #[test]
    fn no_arcs_infeasible() {
        let mut p = rigid_ex_a();
        p.arcs.clear();
        assert_eq!(
            solve_fat(&p).unwrap(),
            FatOutcome::Infeasible { max_value: int(0), total: int(1) }
        );
        let unbalanced = FatProblem::new(vec![int(1)], vec![int(2)]);
        assert!(solve_fat(&unbalanced).is_err());
    }

    #[test]
    fn node_split_chain() {
        let net = CapacitatedNetwork {
            node_caps: vec![Some(ratio(1, 2)), Some(ratio(1, 8)), Some(int(1))],
            arcs: vec![(0, 1, None), (1, 2, Some(ratio(1, 4)))],
            sources: vec![0],
            sink: 2,
        };
        assert_eq!(net.max_flow().value, ratio(1, 8));
        let empty = CapacitatedNetwork { node_caps: vec![Some(int(1))], sources: vec![], ..Default::default() };
        assert_eq!(empty.max_flow().value, int(0));
    }

    prop_compose! {
        fn small_net()(n in 3usize..8, raw in proptest::collection::vec((0usize..8, 0usize..8, 0i64..6), 0..20)) -> (usize, Vec<(usize, usize, i64)>) {
            (n, raw.into_iter().map(|(u, v, c)| (u % n, v % n, c)).filter(|(u, v, _)| u != v).collect())
        }
    }

    proptest! {
        #[test]
        fn split_with_unbounded_nodes_matches_plain((n, arcs) in small_net()) {
            let mut plain = FlowNetwork::new(n);
            for &(u, v, c) in &arcs {
                plain.add_arc(u, v, Some(int(c)));
            }
            let mf = plain.max_flow(0, n - 1);
            prop_assert_eq!(plain.cut_capacity(&mf.source_side), Some(mf.value.clone()));
            let capped = CapacitatedNetwork {
                node_caps: vec![None; n],
                arcs: arcs.iter().map(|&(u, v, c)| (u, v, Some(int(c)))).collect(),
                sources: vec![0],
                sink: n - 1,
            };
            prop_assert_eq!(capped.max_flow().value, mf.value);
        }

        #[test]
        fn fat_invariant_under_permutation(
            sup in proptest::collection::vec(0i64..5, 1..5),
            dem_raw in proptest::collection::vec(0i64..5, 1..5),
            mask in proptest::collection::vec(any::<bool>(), 25),
        ) {
            let total: i64 = sup.iter().sum();
            let mut dem = dem_raw.clone();
            let dsum: i64 = dem.iter().sum();
            *dem.last_mut().unwrap() += total - dsum;
            prop_assume!(dem.iter().all(|d| *d >= 0));
            let build = |rev: bool| {
                let mut s: Vec<Rational> = sup.iter().map(|v| int(*v)).collect();
                let mut d: Vec<Rational> = dem.iter().map(|v| int(*v)).collect();
                if rev { s.reverse(); d.reverse(); }
                let mut p = FatProblem::new(s, d);
                for o in 0..sup.len() {
                    for t in 0..dem.len() {
                        if mask[o * 5 + t] {
                            let (oo, tt) = if rev { (sup.len() - 1 - o, dem.len() - 1 - t) } else { (o, t) };
                            p.add_arc(oo, tt, None);
                        }
                    }
                }
                p
            };
            let a = matches!(solve_fat(&build(false)).unwrap(), FatOutcome::Feasible(_));
            let b = matches!(solve_fat(&build(true)).unwrap(), FatOutcome::Feasible(_));
            prop_assert_eq!(a, b);
        }
    }
}
