//! Rigid and dummy arcs of a transportation problem.
//!
//! An arc is rigid when its flow is the same in every feasible solution. Given
//! one feasible flow, the arcs off every traceable cycle of the mixed residual
//! graph are exactly the rigid ones: arcs between strongly connected components,
//! plus undirected edges that are bridges of their component.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::flow::{FatProblem, FlowNetwork};
use crate::lp::{lp_solve, LpInstance, LpOutcome, Relation, Sense};
use crate::rational::Rational;

/// How an element of the flow graph may change.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Residual {
    /// Flow may only increase: traversable `from -> to`.
    Forward,
    /// Flow may only decrease: traversable `to -> from`.
    Backward,
    /// Strictly between bounds.
    Both,
    /// Both bounds coincide.
    Fixed,
}

impl Residual {
    pub fn classify(flow: &Rational, cap: Option<&Rational>) -> Residual {
        let at_cap = cap.is_some_and(|c| flow == c);
        match (flow.is_zero(), at_cap) {
            (true, true) => Residual::Fixed,
            (true, false) => Residual::Forward,
            (false, true) => Residual::Backward,
            (false, false) => Residual::Both,
        }
    }
}

/// Strongly connected component index of every vertex (iterative Tarjan).
fn scc(n: usize, adj: &[Vec<usize>]) -> Vec<usize> {
    let mut index = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![usize::MAX; n];
    let mut stack = Vec::new();
    let mut next = 0;
    let mut ncomp = 0;
    for root in 0..n {
        if index[root] != usize::MAX {
            continue;
        }
        let mut call: Vec<(usize, usize)> = vec![(root, 0)];
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;
        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            if *pos < adj[v].len() {
                let w = adj[v][*pos];
                *pos += 1;
                if index[w] == usize::MAX {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                }
                if low[v] == index[v] {
                    loop {
                        let w = stack.pop().unwrap();
                        on_stack[w] = false;
                        comp[w] = ncomp;
                        if w == v {
                            break;
                        }
                    }
                    ncomp += 1;
                }
            }
        }
    }
    comp
}

/// Bridges of an undirected multigraph given as `(u, v)` edges (by edge id).
fn bridges(n: usize, edges: &[(usize, usize)]) -> Vec<bool> {
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for (id, &(u, v)) in edges.iter().enumerate() {
        adj[u].push((v, id));
        adj[v].push((u, id));
    }
    let mut is_bridge = vec![false; edges.len()];
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut time = 0;
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        // (vertex, edge id used to enter, next adjacency position)
        let mut call: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
        disc[root] = time;
        low[root] = time;
        time += 1;
        while let Some(&mut (v, via, ref mut pos)) = call.last_mut() {
            if *pos < adj[v].len() {
                let (w, id) = adj[v][*pos];
                *pos += 1;
                if id == via {
                    continue;
                }
                if disc[w] == usize::MAX {
                    disc[w] = time;
                    low[w] = time;
                    time += 1;
                    call.push((w, id, 0));
                } else {
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                call.pop();
                if let Some(&(parent, _, _)) = call.last() {
                    low[parent] = low[parent].min(low[v]);
                    if low[v] > disc[parent] {
                        is_bridge[via] = true;
                    }
                }
            }
        }
    }
    is_bridge
}

/// Rigidity of every element `(from, to, residual)` of a mixed graph on `n` vertices.
pub fn rigid_elements(n: usize, elems: &[(usize, usize, Residual)]) -> Vec<bool> {
    let mut adj = vec![Vec::new(); n];
    for &(u, v, r) in elems {
        match r {
            Residual::Forward => adj[u].push(v),
            Residual::Backward => adj[v].push(u),
            Residual::Both => {
                adj[u].push(v);
                adj[v].push(u);
            }
            Residual::Fixed => {}
        }
    }
    let comp = scc(n, &adj);
    let inner: Vec<usize> = (0..elems.len())
        .filter(|&i| elems[i].2 != Residual::Fixed && comp[elems[i].0] == comp[elems[i].1])
        .collect();
    let edge_list: Vec<(usize, usize)> = inner.iter().map(|&i| (elems[i].0, elems[i].1)).collect();
    let is_bridge = bridges(n, &edge_list);
    let mut rigid = vec![true; elems.len()];
    for (pos, &i) in inner.iter().enumerate() {
        rigid[i] = elems[i].2 == Residual::Both && is_bridge[pos];
    }
    rigid
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RigidityReport {
    pub rigid: Vec<bool>,
    pub dummy: Vec<bool>,
    /// Frozen flow of each rigid arc; the supplied flow value for free arcs.
    pub flow: Vec<Rational>,
}

impl RigidityReport {
    pub fn rigid_arcs(&self) -> Vec<usize> {
        (0..self.rigid.len()).filter(|&a| self.rigid[a]).collect()
    }

    pub fn dummy_arcs(&self) -> Vec<usize> {
        (0..self.dummy.len()).filter(|&a| self.dummy[a]).collect()
    }

    pub fn all_rigid(&self) -> bool {
        self.rigid.iter().all(|r| *r)
    }
}

/// Classifies the arcs of `p` from one feasible flow.
pub fn find_rigid(p: &FatProblem, flow: &[Rational]) -> Result<RigidityReport> {
    if !p.is_feasible_flow(flow) {
        return Err(Error::Precondition("find_rigid needs a feasible flow".into()));
    }
    let m = p.supply.len();
    let elems: Vec<(usize, usize, Residual)> = p
        .arcs
        .iter()
        .zip(flow)
        .map(|(a, f)| (a.origin, m + a.dest, Residual::classify(f, a.cap.as_ref())))
        .collect();
    let rigid = rigid_elements(m + p.demand.len(), &elems);
    let dummy = rigid.iter().zip(flow).map(|(r, f)| *r && f.is_zero()).collect();
    Ok(RigidityReport { rigid, dummy, flow: flow.to_vec() })
}

/// Test oracle: minimise and maximise every arc flow over the feasible set.
pub fn rigidity_oracle(p: &FatProblem) -> Result<RigidityReport> {
    p.validate()?;
    let mut lp = LpInstance::new(p.arcs.len());
    for (o, s) in p.supply.iter().enumerate() {
        let coeffs = (0..p.arcs.len())
            .filter(|&a| p.arcs[a].origin == o)
            .map(|a| (a, Rational::from_integer(1.into())))
            .collect();
        lp.add_row(coeffs, Relation::Eq, s.clone());
    }
    for (d, b) in p.demand.iter().enumerate() {
        let coeffs = (0..p.arcs.len())
            .filter(|&a| p.arcs[a].dest == d)
            .map(|a| (a, Rational::from_integer(1.into())))
            .collect();
        lp.add_row(coeffs, Relation::Eq, b.clone());
    }
    for (a, arc) in p.arcs.iter().enumerate() {
        if let Some(c) = &arc.cap {
            lp.add_row(vec![(a, Rational::from_integer(1.into()))], Relation::Le, c.clone());
        }
    }
    let mut rigid = Vec::with_capacity(p.arcs.len());
    let mut flow = Vec::with_capacity(p.arcs.len());
    for a in 0..p.arcs.len() {
        let mut bounds = Vec::with_capacity(2);
        for sense in [Sense::Minimize, Sense::Maximize] {
            lp.set_objective(sense, vec![(a, Rational::from_integer(1.into()))]);
            match lp_solve(&lp)? {
                LpOutcome::Optimal { value, .. } => bounds.push(value),
                _ => return Err(Error::Precondition("rigidity oracle needs a feasible instance".into())),
            }
        }
        rigid.push(bounds[0] == bounds[1]);
        flow.push(bounds[0].clone());
    }
    let dummy = rigid.iter().zip(&flow).map(|(r, f): (&bool, &Rational)| *r && f.is_zero()).collect();
    Ok(RigidityReport { rigid, dummy, flow })
}

/// Whether the maximum flow in `net` from `s` to `t` is unique, given one maximum flow.
///
/// Two maximum flows differ by a circulation in the residual graph, so the flow
/// is unique iff no element of the residual graph lies on a traceable cycle.
pub fn max_flow_is_unique(net: &FlowNetwork, flow: &[Rational]) -> bool {
    let elems: Vec<(usize, usize, Residual)> = net
        .arcs()
        .iter()
        .zip(flow)
        .map(|((u, v, cap), f)| (*u, *v, Residual::classify(f, cap.as_ref())))
        .collect();
    rigid_elements(net.num_nodes(), &elems).into_iter().all(|r| r)
}

/// The arcs carrying positive flow, if they form a single `s -> t` path.
pub fn single_path(net: &FlowNetwork, flow: &[Rational], s: usize, t: usize) -> Option<Vec<usize>> {
    let support: Vec<usize> = (0..flow.len()).filter(|&a| flow[a].is_positive()).collect();
    let mut path = Vec::new();
    let mut at = s;
    let mut used = 0;
    while at != t {
        let mut next = support.iter().filter(|&&a| net.arcs()[a].0 == at);
        let a = *next.next()?;
        if next.next().is_some() {
            return None;
        }
        path.push(a);
        used += 1;
        at = net.arcs()[a].1;
        if used > support.len() {
            return None;
        }
    }
    (used == support.len()).then_some(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{solve_fat, FatOutcome};
    use crate::rational::ratio;

    fn rigid_ex(b: bool) -> FatProblem {
        let mut p = FatProblem::new(
            vec![ratio(3, 10), ratio(3, 10), ratio(4, 10)],
            vec![ratio(4, 10), ratio(2, 10), ratio(1, 10), ratio(3, 10)],
        );
        let forbidden = [(0, 2), (0, 3), (2, 0), (2, 2)];
        for o in 0..3 {
            for d in 0..4 {
                if !forbidden.contains(&(o, d)) {
                    let cap = (b && (o, d) == (0, 0)).then(|| ratio(2, 10));
                    p.add_arc(o, d, cap);
                }
            }
        }
        p
    }

    fn arc(p: &FatProblem, o: usize, d: usize) -> usize {
        p.arcs.iter().position(|a| a.origin == o - 1 && a.dest == d - 4).unwrap()
    }

    #[test]
    fn rigid_example_a() {
        let p = rigid_ex(false);
        let FatOutcome::Feasible(sol) = solve_fat(&p).unwrap() else { panic!() };
        let rep = find_rigid(&p, &sol.flow).unwrap();
        assert_eq!(rep.rigid_arcs(), vec![arc(&p, 2, 6)]);
        assert_eq!(rep.flow[arc(&p, 2, 6)], ratio(1, 10));
        assert!(rep.dummy_arcs().is_empty());
        assert_eq!(rigidity_oracle(&p).unwrap().rigid, rep.rigid);
    }

    #[test]
    fn rigid_example_b() {
        let p = rigid_ex(true);
        let FatOutcome::Feasible(sol) = solve_fat(&p).unwrap() else { panic!() };
        let rep = find_rigid(&p, &sol.flow).unwrap();
        assert!(rep.all_rigid());
        assert_eq!(rep.dummy_arcs(), vec![arc(&p, 2, 5), arc(&p, 2, 7)]);
        assert_eq!(rigidity_oracle(&p).unwrap().rigid, rep.rigid);
    }

    #[test]
    fn single_arc_rigid() {
        let mut p = FatProblem::new(vec![ratio(1, 3)], vec![ratio(1, 3)]);
        p.add_arc(0, 0, None);
        let rep = find_rigid(&p, &[ratio(1, 3)]).unwrap();
        assert!(rep.all_rigid());
        assert!(find_rigid(&p, &[ratio(1, 4)]).is_err());
    }

    #[test]
    fn bridge_detection() {
        // Two triangles joined by one edge.
        let edges = [(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 3)];
        let b = bridges(6, &edges);
        assert_eq!(b, vec![false, false, false, true, false, false, false]);
        // Parallel edges are never bridges.
        assert_eq!(bridges(2, &[(0, 1), (0, 1)]), vec![false, false]);
    }

    #[test]
    fn parallel_paths_not_unique() {
        let mut net = FlowNetwork::new(4);
        net.add_arc(0, 1, None);
        net.add_arc(0, 2, None);
        net.add_arc(1, 3, Some(ratio(1, 2)));
        net.add_arc(2, 3, Some(ratio(1, 2)));
        let mf = net.max_flow(0, 3);
        assert!(max_flow_is_unique(&net, &mf.flow));
        assert!(single_path(&net, &mf.flow, 0, 3).is_none());

        let mut shared = FlowNetwork::new(5);
        shared.add_arc(0, 1, None);
        shared.add_arc(0, 2, None);
        shared.add_arc(1, 3, None);
        shared.add_arc(2, 3, None);
        shared.add_arc(3, 4, Some(ratio(1, 8)));
        let mf = shared.max_flow(0, 4);
        assert!(!max_flow_is_unique(&shared, &mf.flow));
    }
}
