//! The layered network `(N_k, R_k, mu)`.
//!
//! Nodes `[l:e]` are triangles with residual capacity `x̄ > 0`. Arcs join
//! consecutive layers, or run from a shrunk rigid pedigree to the layer after
//! its last city. Rigid pedigrees keep their frozen weight `mu` and a residual
//! `mu_bar` that later stages draw on when they extend the pedigree.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{Signed, Zero};

use crate::error::Result;
use crate::flow::{solve_fat, CapacitatedNetwork, FatOutcome, FatProblem};
use crate::pedigree::{edges_of, tau, CharVector, Edge, Pedigree, Triangle};
use crate::rational::{format, Rational};
use crate::rigidity::{find_rigid, max_flow_is_unique, single_path, RigidityReport};

/// Tail of an arc: a layer node or a shrunk rigid pedigree (index into `rigid`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tail {
    Node(Triangle),
    Shrunk(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetArc {
    /// The arc came from `F_stage`; its head lies on layer `stage + 1`.
    pub stage: usize,
    pub tail: Tail,
    pub head: Triangle,
    pub cap: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Provenance {
    /// A rigid arc of `F_4`.
    Stage4,
    /// A rigid arc `(u, v)` whose restricted network had a unique path from `source`.
    UniquePath { source: Tail, link: (Triangle, Triangle) },
    /// A rigid arc out of an earlier shrunk pedigree.
    Extension { parent: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RigidPedigree {
    pub pedigree: Pedigree,
    /// Member of `R_stage`; the pedigree has `stage + 1` cities.
    pub stage: usize,
    pub mu: Rational,
    pub mu_bar: Rational,
    pub provenance: Vec<Provenance>,
}

impl RigidPedigree {
    pub fn is_alive(&self) -> bool {
        self.mu_bar.is_positive()
    }
}

#[derive(Debug, Clone)]
pub struct LayeredState {
    pub x: CharVector,
    /// `N_k` has been built: layers `4..=k+1`.
    pub k: usize,
    pub nodes: BTreeMap<Triangle, Rational>,
    pub arcs: Vec<NetArc>,
    pub rigid: Vec<RigidPedigree>,
    pub violations: Vec<String>,
}

/// `N_{top-1}(L)` for a link `L = (u, v)` with `u` on layer `top`.
#[derive(Debug, Clone)]
pub struct RestrictedNetwork {
    pub top: usize,
    pub link: (Triangle, Triangle),
    /// Surviving layer nodes, in layer order.
    pub nodes: Vec<Triangle>,
    /// Surviving shrunk pedigrees.
    pub shrunk: Vec<usize>,
    /// Indices into the state's arcs with both ends surviving.
    pub arcs: Vec<usize>,
    /// Layer nodes removed by the deletion rules.
    pub deleted: BTreeSet<Triangle>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UniquePath {
    pub source: Tail,
    /// Layer nodes on the path, ending with the sink.
    pub nodes: Vec<Triangle>,
    pub arcs: Vec<usize>,
    pub pedigree: Pedigree,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkCapacity {
    pub value: Rational,
    pub unique: Option<UniquePath>,
    /// The flow is a single path, but not one a pedigree can take.
    pub broken_path: bool,
}

/// `F_k` together with what each origin, destination and arc stands for.
#[derive(Debug, Clone)]
pub struct FkInstance {
    pub k: usize,
    pub origins: Vec<Tail>,
    pub dests: Vec<Triangle>,
    pub problem: FatProblem,
    /// For arcs out of layer nodes: the link capacity record.
    pub links: Vec<Option<LinkCapacity>>,
    /// Links whose restricted network kept a node without a generator.
    pub orphan_links: Vec<(Triangle, Triangle)>,
    /// Links whose only flow path reuses an edge.
    pub broken_links: Vec<(Triangle, Triangle)>,
}

impl FkInstance {
    pub fn arc_ends(&self, a: usize) -> (Tail, Triangle) {
        let arc = &self.problem.arcs[a];
        (self.origins[arc.origin], self.dests[arc.dest])
    }
}

#[derive(Debug, Clone)]
pub struct StageReport {
    pub k: usize,
    pub fk: FkInstance,
    pub flow: Option<Vec<Rational>>,
    pub rigidity: Option<RigidityReport>,
    pub new_rigid: usize,
    pub r_size: usize,
    pub z_max: Rational,
}

#[derive(Debug, Clone)]
pub enum StageOutcome {
    Infeasible { report: StageReport, max_value: Rational, total: Rational },
    /// Rigid pedigrees drew more than a node, shrunk pedigree or arc holds.
    Overdrawn { report: StageReport, overdraft: Overdraft },
    Advanced(StageReport),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Overdraft {
    pub element: String,
    /// The (negative) residual left after extraction.
    pub residual: Rational,
}

fn extends(prefix: &Pedigree, e: Edge) -> bool {
    prefix.can_extend(e)
}

impl LayeredState {
    pub fn n(&self) -> usize {
        self.x.n()
    }

    pub fn layer(&self, l: usize) -> impl Iterator<Item = (&Triangle, &Rational)> {
        self.nodes.iter().filter(move |(t, _)| t.k == l)
    }

    pub fn cap_of(&self, t: Tail) -> Rational {
        match t {
            Tail::Node(v) => self.nodes.get(&v).cloned().unwrap_or_else(Rational::zero),
            Tail::Shrunk(i) => self.rigid[i].mu_bar.clone(),
        }
    }

    /// `R_l` as indices.
    pub fn rigid_at(&self, l: usize) -> Vec<usize> {
        (0..self.rigid.len()).filter(|&i| self.rigid[i].stage == l).collect()
    }

    pub fn z_max(&self) -> Rational {
        let mut z = Rational::from_integer(1.into());
        for i in self.rigid_at(self.k) {
            z -= &self.rigid[i].mu;
        }
        z
    }

    pub fn tail_label(&self, t: Tail) -> String {
        match t {
            Tail::Node(v) => v.to_string(),
            Tail::Shrunk(i) => format!("R[{}]:{i}", self.rigid[i].stage),
        }
    }

    fn add_rigid(&mut self, ped: Pedigree, stage: usize, mu: Rational, prov: Provenance) -> usize {
        if let Some(i) = self.rigid.iter().position(|r| r.pedigree == ped) {
            let r = &mut self.rigid[i];
            r.mu += &mu;
            r.mu_bar += &mu;
            r.provenance.push(prov);
            return i;
        }
        self.rigid.push(RigidPedigree {
            pedigree: ped,
            stage,
            mu: mu.clone(),
            mu_bar: mu,
            provenance: vec![prov],
        });
        self.rigid.len() - 1
    }

    fn reduce_node(&mut self, v: Triangle, by: &Rational) {
        match self.nodes.get_mut(&v) {
            Some(c) => *c -= by,
            None => self.violations.push(format!("stage {}: reduced missing node {v}", self.k)),
        }
    }

    /// The first node, shrunk pedigree or arc left with a negative residual.
    pub fn overdraft(&self) -> Option<Overdraft> {
        if let Some((t, c)) = self.nodes.iter().find(|(_, c)| c.is_negative()) {
            return Some(Overdraft { element: t.to_string(), residual: c.clone() });
        }
        if let Some(i) = self.rigid.iter().position(|r| r.mu_bar.is_negative()) {
            let r = &self.rigid[i];
            return Some(Overdraft { element: format!("R[{}]:{i} {:?}", r.stage, r.pedigree), residual: r.mu_bar.clone() });
        }
        self.arcs.iter().find(|a| a.cap.is_negative()).map(|a| Overdraft {
            element: format!("{} -> {}", self.tail_label(a.tail), a.head),
            residual: a.cap.clone(),
        })
    }

    /// Drops zero-capacity nodes and arcs, and arcs touching them.
    fn prune(&mut self) {
        self.nodes.retain(|_, c| c.is_positive());
        let nodes = &self.nodes;
        let rigid = &self.rigid;
        self.arcs.retain(|a| {
            let tail_ok = match a.tail {
                Tail::Node(t) => nodes.contains_key(&t),
                Tail::Shrunk(i) => rigid[i].is_alive(),
            };
            tail_ok && nodes.contains_key(&a.head) && a.cap.is_positive()
        });
    }

    /// Per-layer conservation and the bound on `|R_k|`.
    fn check_invariants(&mut self) {
        let k = self.k;
        let one = Rational::from_integer(1.into());
        for l in 4..=k + 1 {
            let mut total: Rational = self.layer(l).map(|(_, c)| c.clone()).sum();
            for r in &self.rigid {
                if r.stage + 1 >= l {
                    total += &r.mu_bar;
                }
            }
            if total != one {
                self.violations.push(format!(
                    "stage {k}: layer {l} capacities plus rigid weights sum to {}",
                    format(&total)
                ));
            }
        }
        // |R_{k'-1}| <= tau_{k'} - k' + 4 with k' = k + 1.
        let size = self.rigid_at(k).len();
        let bound = tau(k + 1) + 3 - k;
        if size > bound {
            self.violations.push(format!("stage {k}: |R_{k}| = {size} exceeds {bound}"));
        }
        for a in &self.arcs {
            let tail_layer = match a.tail {
                Tail::Node(t) => t.k,
                Tail::Shrunk(i) => self.rigid[i].stage + 1,
            };
            if a.head.k != tail_layer + 1 || a.head.k != a.stage + 1 {
                self.violations.push(format!("stage {k}: arc into {} skips a layer", a.head));
            }
        }
    }

    /// Solves `F_4`; `Err(outcome)` carries the infeasible instance.
    #[allow(clippy::result_large_err)]
    pub fn build_n4(x: &CharVector) -> std::result::Result<(LayeredState, StageReport), StageOutcome> {
        let origins: Vec<Triangle> = x.support(4);
        let dests: Vec<Triangle> = x.support(5);
        let mut problem = FatProblem::new(
            origins.iter().map(|t| x.get(*t).clone()).collect(),
            dests.iter().map(|t| x.get(*t).clone()).collect(),
        );
        for (o, u) in origins.iter().enumerate() {
            let stem = Pedigree::base().extend(u.edge).expect("layer 4 edge");
            for (d, v) in dests.iter().enumerate() {
                if extends(&stem, v.edge) {
                    problem.add_arc(o, d, Some(x.get(*u).clone()));
                }
            }
        }
        let links = vec![None; problem.arcs.len()];
        let fk = FkInstance {
            k: 4,
            origins: origins.iter().map(|t| Tail::Node(*t)).collect(),
            dests: dests.clone(),
            problem,
            links,
            orphan_links: Vec::new(),
            broken_links: Vec::new(),
        };
        let mut state = LayeredState {
            x: x.clone(),
            k: 4,
            nodes: BTreeMap::new(),
            arcs: Vec::new(),
            rigid: Vec::new(),
            violations: Vec::new(),
        };
        let outcome = solve_fat(&fk.problem).expect("F_4 is balanced for points of P_MI");
        let flow = match outcome {
            FatOutcome::Feasible(sol) => sol.flow,
            FatOutcome::Infeasible { max_value, total } => {
                let report = StageReport {
                    k: 4,
                    fk,
                    flow: None,
                    rigidity: None,
                    new_rigid: 0,
                    r_size: 0,
                    z_max: Rational::zero(),
                };
                return Err(StageOutcome::Infeasible { report, max_value, total });
            }
        };
        let rep = find_rigid(&fk.problem, &flow).expect("max-flow solution is feasible");
        for t in origins.iter().chain(&dests) {
            state.nodes.insert(*t, x.get(*t).clone());
        }
        let mut new_rigid = 0;
        for (a, arc) in fk.problem.arcs.iter().enumerate() {
            let (u, v) = (origins[arc.origin], dests[arc.dest]);
            if rep.rigid[a] {
                let phi = &rep.flow[a];
                if phi.is_positive() {
                    let ped = Pedigree::from_edges(vec![u.edge, v.edge]).expect("F_4 arc is a pedigree");
                    state.add_rigid(ped, 4, phi.clone(), Provenance::Stage4);
                    state.reduce_node(u, phi);
                    state.reduce_node(v, phi);
                    new_rigid += 1;
                }
                continue;
            }
            state.arcs.push(NetArc { stage: 4, tail: Tail::Node(u), head: v, cap: arc.cap.clone().unwrap() });
        }
        state.prune();
        state.check_invariants();
        let report = StageReport {
            k: 4,
            fk,
            flow: Some(flow),
            rigidity: Some(rep),
            new_rigid,
            r_size: state.rigid_at(4).len(),
            z_max: state.z_max(),
        };
        Ok((state, report))
    }

    /// Applies the deletion rules for `L = (u, v)` to the part of the network
    /// up to layer `top = u.k`.
    pub fn restricted_network(&self, u: Triangle, v: Triangle) -> RestrictedNetwork {
        let top = u.k;
        let s = u.edge.j;
        let j = v.edge.j;
        let by_rules = |t: Triangle| -> bool {
            (t.edge == v.edge && t.k >= j.max(4) && t.k < top)
                || (t.edge == u.edge && t.k >= s.max(4) && t.k < top)
                || (s >= 4 && t.k == s && !t.generates(u))
                || (j >= 4 && t.k == j && !t.generates(v))
                || (t.k == top && t != u)
        };
        let mut deleted = BTreeSet::new();
        let mut alive: BTreeSet<Triangle> = BTreeSet::new();
        for (&t, _) in self.nodes.range(..) {
            if t.k > top {
                continue;
            }
            if by_rules(t) {
                deleted.insert(t);
            } else {
                alive.insert(t);
            }
        }
        let shrunk: Vec<usize> = (0..self.rigid.len())
            .filter(|&p| {
                let rp = &self.rigid[p];
                rp.is_alive() && rp.stage + 2 <= top && !rp.pedigree.triangles().any(by_rules)
            })
            .collect();
        // Layers are visited in ascending order: a deletion only affects later layers.
        for l in 5..=top {
            let layer: Vec<Triangle> = alive.iter().copied().filter(|t| t.k == l).collect();
            for t in layer {
                if !self.generator_available(t, &alive, &shrunk) {
                    alive.remove(&t);
                    deleted.insert(t);
                }
            }
        }
        let arcs: Vec<usize> = (0..self.arcs.len())
            .filter(|&a| {
                let arc = &self.arcs[a];
                let tail_ok = match arc.tail {
                    Tail::Node(t) => alive.contains(&t),
                    Tail::Shrunk(p) => shrunk.contains(&p),
                };
                arc.stage < top && tail_ok && alive.contains(&arc.head)
            })
            .collect();
        RestrictedNetwork { top, link: (u, v), nodes: alive.into_iter().collect(), shrunk, arcs, deleted }
    }

    fn generator_available(&self, t: Triangle, alive: &BTreeSet<Triangle>, shrunk: &[usize]) -> bool {
        let w = t.edge.j;
        if w <= 3 {
            return true;
        }
        if alive.iter().any(|g| g.k == w && g.generates(t)) {
            return true;
        }
        shrunk.iter().any(|&p| {
            let rp = &self.rigid[p];
            rp.stage + 1 < t.k && rp.pedigree.n() >= w && rp.pedigree.triangle_at(w).generates(t)
        })
    }

    /// Maximum flow into the sink of a restricted network, and its path when unique.
    pub fn link_capacity(&self, rn: &RestrictedNetwork) -> LinkCapacity {
        let sink = rn.link.0;
        let Some(sink_idx) = rn.nodes.iter().position(|t| *t == sink) else {
            return LinkCapacity { value: Rational::zero(), unique: None, broken_path: false };
        };
        let net = self.capacitated(rn, sink_idx);
        let mf = net.max_flow();
        if !mf.value.is_positive() {
            return LinkCapacity { value: mf.value, unique: None, broken_path: false };
        }
        let mut unique = None;
        let mut broken_path = false;
        if max_flow_is_unique(&mf.split, &mf.split_flow) {
            if let Some(path) = single_path(&mf.split, &mf.split_flow, mf.super_source, mf.super_sink) {
                unique = self.decode_path(rn, &net, &path);
                broken_path = unique.is_none();
            }
        }
        LinkCapacity { value: mf.value, unique, broken_path }
    }

    fn capacitated(&self, rn: &RestrictedNetwork, sink_idx: usize) -> CapacitatedNetwork {
        let index: BTreeMap<Tail, usize> = rn
            .nodes
            .iter()
            .map(|t| Tail::Node(*t))
            .chain(rn.shrunk.iter().map(|p| Tail::Shrunk(*p)))
            .enumerate()
            .map(|(i, t)| (t, i))
            .collect();
        let mut node_caps = vec![None; index.len()];
        for (t, &i) in &index {
            node_caps[i] = Some(self.cap_of(*t));
        }
        let arcs = rn
            .arcs
            .iter()
            .map(|&a| {
                let arc = &self.arcs[a];
                (index[&arc.tail], index[&Tail::Node(arc.head)], Some(arc.cap.clone()))
            })
            .collect();
        let sources = index
            .iter()
            .filter(|(t, _)| match t {
                Tail::Node(v) => v.k == 4,
                Tail::Shrunk(_) => true,
            })
            .map(|(_, &i)| i)
            .collect();
        CapacitatedNetwork { node_caps, arcs, sources, sink: sink_idx }
    }

    /// `None` when the path reuses an edge: arcs only check neighbouring layers.
    fn decode_path(&self, rn: &RestrictedNetwork, net: &CapacitatedNetwork, path: &[usize]) -> Option<UniquePath> {
        let n_arcs = net.arcs.len();
        let n_nodes = net.node_caps.len();
        let tail_of = |i: usize| -> Tail {
            if i < rn.nodes.len() {
                Tail::Node(rn.nodes[i])
            } else {
                Tail::Shrunk(rn.shrunk[i - rn.nodes.len()])
            }
        };
        let mut source = None;
        let mut nodes = Vec::new();
        let mut arcs = Vec::new();
        for &a in path {
            if a < n_arcs {
                arcs.push(rn.arcs[a]);
            } else if a < n_arcs + n_nodes {
                match tail_of(a - n_arcs) {
                    Tail::Node(t) => {
                        if source.is_none() {
                            source = Some(Tail::Node(t));
                        }
                        nodes.push(t);
                    }
                    s @ Tail::Shrunk(_) => source = Some(s),
                }
            }
        }
        let source = source.expect("a path starts at a source");
        let mut edges: Vec<Edge> = match source {
            Tail::Shrunk(p) => self.rigid[p].pedigree.edges().to_vec(),
            Tail::Node(_) => Vec::new(),
        };
        edges.extend(nodes.iter().map(|t| t.edge));
        let pedigree = Pedigree::from_edges(edges).ok()?;
        Some(UniquePath { source, nodes, arcs, pedigree })
    }

    /// Builds `F_k` for `k = self.k + 1` from `N_{k-1}`.
    pub fn build_fk(&self) -> FkInstance {
        let k = self.k + 1;
        let mut origins: Vec<Tail> = self.layer(k).map(|(t, _)| Tail::Node(*t)).collect();
        origins.extend(
            self.rigid_at(k - 1).into_iter().filter(|&p| self.rigid[p].is_alive()).map(Tail::Shrunk),
        );
        let dests = self.x.support(k + 1);
        let mut problem = FatProblem::new(
            origins.iter().map(|o| self.cap_of(*o)).collect(),
            dests.iter().map(|v| self.x.get(*v).clone()).collect(),
        );
        let mut links = Vec::new();
        let mut orphan_links = Vec::new();
        let mut broken_links = Vec::new();
        for (o, &origin) in origins.iter().enumerate() {
            for (d, &v) in dests.iter().enumerate() {
                match origin {
                    Tail::Shrunk(p) => {
                        let rp = &self.rigid[p];
                        if extends(&rp.pedigree, v.edge) {
                            problem.add_arc(o, d, Some(rp.mu_bar.clone()));
                            links.push(None);
                        }
                    }
                    Tail::Node(u) => {
                        if u.edge == v.edge {
                            continue;
                        }
                        let rn = self.restricted_network(u, v);
                        if !self.check_generators(&rn) {
                            orphan_links.push((u, v));
                        }
                        let lc = self.link_capacity(&rn);
                        if lc.broken_path {
                            broken_links.push((u, v));
                        }
                        if lc.value.is_positive() {
                            problem.add_arc(o, d, Some(lc.value.clone()));
                            links.push(Some(lc));
                        }
                    }
                }
            }
        }
        FkInstance { k, origins, dests, problem, links, orphan_links, broken_links }
    }

    /// Solves `F_{k+1}`, runs the rigidity analysis and folds the result into the state.
    pub fn advance(&mut self) -> Result<StageOutcome> {
        let fk = self.build_fk();
        let k = fk.k;
        for (u, v) in &fk.orphan_links {
            self.violations.push(format!("stage {k}: restricted network of ({u}, {v}) keeps a node without generator"));
        }
        for (u, v) in &fk.broken_links {
            self.violations.push(format!("stage {k}: the only flow path for ({u}, {v}) is not a pedigree"));
        }
        let flow = match solve_fat(&fk.problem)? {
            FatOutcome::Feasible(sol) => sol.flow,
            FatOutcome::Infeasible { max_value, total } => {
                let report = StageReport {
                    k,
                    fk,
                    flow: None,
                    rigidity: None,
                    new_rigid: 0,
                    r_size: 0,
                    z_max: Rational::zero(),
                };
                return Ok(StageOutcome::Infeasible { report, max_value, total });
            }
        };
        let rep = find_rigid(&fk.problem, &flow)?;
        self.k = k;
        for v in &fk.dests {
            self.nodes.insert(*v, self.x.get(*v).clone());
        }
        let before = self.rigid.len();
        let mut kept = Vec::new();
        for (a, arc) in fk.problem.arcs.iter().enumerate() {
            let (tail, head) = (fk.origins[arc.origin], fk.dests[arc.dest]);
            let cap = arc.cap.clone().expect("F_k arcs are capacitated");
            if !rep.rigid[a] {
                kept.push(NetArc { stage: k, tail, head, cap });
                continue;
            }
            let phi = rep.flow[a].clone();
            if phi.is_zero() {
                continue;
            }
            match tail {
                Tail::Shrunk(p) => {
                    let ped = self.rigid[p].pedigree.extend(head.edge)?;
                    self.add_rigid(ped, k, phi.clone(), Provenance::Extension { parent: p });
                    self.rigid[p].mu_bar -= &phi;
                    self.reduce_node(head, &phi);
                }
                Tail::Node(u) => match fk.links[a].as_ref().and_then(|l| l.unique.as_ref()) {
                    Some(path) => {
                        let ped = path.pedigree.extend(head.edge)?;
                        self.add_rigid(
                            ped,
                            k,
                            phi.clone(),
                            Provenance::UniquePath { source: path.source, link: (u, head) },
                        );
                        if let Tail::Shrunk(p) = path.source {
                            self.rigid[p].mu_bar -= &phi;
                        }
                        for t in &path.nodes {
                            self.reduce_node(*t, &phi);
                        }
                        for &pa in &path.arcs {
                            self.arcs[pa].cap -= &phi;
                        }
                        self.reduce_node(head, &phi);
                    }
                    None => kept.push(NetArc { stage: k, tail, head, cap: phi }),
                },
            }
        }
        self.arcs.extend(kept);
        let overdraft = self.overdraft();
        if overdraft.is_none() {
            self.prune();
            self.check_invariants();
        }
        let new_rigid = self.rigid.len() - before;
        let report = StageReport {
            k,
            fk,
            flow: Some(flow),
            rigidity: Some(rep),
            new_rigid,
            r_size: self.rigid_at(k).len(),
            z_max: self.z_max(),
        };
        Ok(match overdraft {
            Some(overdraft) => StageOutcome::Overdrawn { report, overdraft },
            None => StageOutcome::Advanced(report),
        })
    }

    /// When the last layer is empty, `R_k` with `mu` is a convex decomposition of `X/(k+1)`.
    pub fn decompose_if_trivial(&self) -> Option<Vec<(Pedigree, Rational)>> {
        let mut out: Vec<(Pedigree, Rational)> = self
            .rigid_at(self.k)
            .into_iter()
            .map(|p| (self.rigid[p].pedigree.clone(), self.rigid[p].mu.clone()))
            .collect();
        if self.layer(self.k + 1).next().is_some() {
            out.push(self.single_chain()?);
        }
        Some(out)
    }

    /// The network left after stage `k` when it is one path into a single
    /// last-layer node, read back as a pedigree with the node's capacity.
    fn single_chain(&self) -> Option<(Pedigree, Rational)> {
        let mut last = self.layer(self.k + 1);
        let (&end, w) = last.next()?;
        if last.next().is_some() {
            return None;
        }
        let mut edges = vec![end.edge];
        let mut head = end;
        let prefix = loop {
            let mut incoming = self.arcs.iter().filter(|a| a.head == head);
            let arc = incoming.next()?;
            if incoming.next().is_some() {
                return None;
            }
            match arc.tail {
                Tail::Shrunk(p) => break self.rigid[p].pedigree.clone(),
                Tail::Node(u) if u.k == 4 => {
                    edges.push(u.edge);
                    break Pedigree::base();
                }
                Tail::Node(u) => {
                    edges.push(u.edge);
                    head = u;
                }
            }
        };
        let mut ped = prefix;
        for e in edges.into_iter().rev() {
            ped = ped.extend(e).ok()?;
        }
        Some((ped, w.clone()))
    }

    /// Exact check that `(P, w)` pairs reproduce `X/m` and sum to one.
    pub fn verify_decomposition(&self, parts: &[(Pedigree, Rational)]) -> bool {
        let Some(m) = parts.first().map(|(p, _)| p.n()) else { return false };
        let mut acc = CharVector::zeros(m);
        let mut total = Rational::zero();
        for (p, w) in parts {
            if p.n() != m || w.is_negative() {
                return false;
            }
            acc.add_scaled(&p.char_vector(), w);
            total += w;
        }
        total == Rational::from_integer(1.into()) && acc == self.x.restrict(m)
    }

    /// Re-checks that every node kept in a restricted network still has a generator.
    pub fn check_generators(&self, rn: &RestrictedNetwork) -> bool {
        let alive: BTreeSet<Triangle> = rn.nodes.iter().copied().collect();
        rn.nodes
            .iter()
            .filter(|t| t.k > 4)
            .all(|t| self.generator_available(*t, &alive, &rn.shrunk))
    }
}

impl fmt::Display for LayeredState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "N_{}:", self.k)?;
        for l in 4..=self.k + 1 {
            let layer: Vec<String> =
                self.layer(l).map(|(t, c)| format!("{t}={}", format(c))).collect();
            writeln!(f, "  layer {l}: {}", layer.join(" "))?;
        }
        for a in &self.arcs {
            writeln!(f, "  {} -> {} cap {}", self.tail_label(a.tail), a.head, format(&a.cap))?;
        }
        for (i, r) in self.rigid.iter().enumerate() {
            writeln!(
                f,
                "  R[{}]:{i} {:?} mu={} residual={}",
                r.stage,
                r.pedigree,
                format(&r.mu),
                format(&r.mu_bar)
            )?;
        }
        Ok(())
    }
}

/// Every edge of `E_{k-1}` as a triangle on layer `k`.
pub fn layer_triangles(k: usize) -> impl Iterator<Item = Triangle> {
    edges_of(k - 1).map(move |edge| Triangle { k, edge })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{parse, ratio};

    pub(crate) fn cv(n: usize, s: &str) -> CharVector {
        CharVector::new(n, s.split_whitespace().map(|t| parse(t).unwrap()).collect()).unwrap()
    }

    fn t(i: usize, j: usize, k: usize) -> Triangle {
        Triangle::new(i, j, k).unwrap()
    }

    fn ped(edges: &[(usize, usize)]) -> Pedigree {
        Pedigree::from_edges(edges.iter().map(|&(i, j)| Edge::new(i, j).unwrap()).collect()).unwrap()
    }

    #[test]
    fn n4_without_rigid_arcs() {
        let x = cv(5, "0 3/4 1/4 1/2 0 0 0 0 1/2");
        let (state, rep) = LayeredState::build_n4(&x).unwrap();
        assert_eq!(rep.new_rigid, 0);
        assert!(state.rigid.is_empty());
        assert!(state.violations.is_empty(), "{:?}", state.violations);
        let bad = cv(5, "0 3/4 1/4 0 1/4 0 0 1/4 1/2");
        assert!(matches!(LayeredState::build_n4(&bad), Err(StageOutcome::Infeasible { .. })));
    }

    #[test]
    fn n4_all_rigid() {
        let x = cv(5, "0 1/3 2/3 0 1/6 0 1/6 1/3 1/3");
        let (state, _) = LayeredState::build_n4(&x).unwrap();
        assert!(state.nodes.is_empty());
        let mut got: Vec<(Pedigree, Rational)> =
            state.rigid.iter().map(|r| (r.pedigree.clone(), r.mu.clone())).collect();
        got.sort();
        let mut want = vec![
            (ped(&[(1, 3), (1, 4)]), ratio(1, 6)),
            (ped(&[(1, 3), (3, 4)]), ratio(1, 6)),
            (ped(&[(2, 3), (1, 3)]), ratio(1, 6)),
            (ped(&[(2, 3), (3, 4)]), ratio(1, 6)),
            (ped(&[(2, 3), (2, 4)]), ratio(1, 3)),
        ];
        want.sort();
        assert_eq!(got, want);
        let parts = state.decompose_if_trivial().unwrap();
        assert!(state.verify_decomposition(&parts));
    }

    fn chain_member() -> CharVector {
        cv(6, "0 1/2 1/2 1/4 1/4 1/8 1/8 1/8 1/8 0 1/4 0 1/8 0 0 0 0 1/2 1/8")
    }

    #[test]
    fn chain_member_stage4() {
        let (state, _) = LayeredState::build_n4(&chain_member()).unwrap();
        let mut got: Vec<(Pedigree, Rational)> =
            state.rigid.iter().map(|r| (r.pedigree.clone(), r.mu.clone())).collect();
        got.sort();
        let mut want = vec![
            (ped(&[(1, 3), (2, 3)]), ratio(1, 8)),
            (ped(&[(1, 3), (1, 4)]), ratio(1, 8)),
            (ped(&[(2, 3), (1, 3)]), ratio(1, 4)),
            (ped(&[(2, 3), (2, 4)]), ratio(1, 8)),
        ];
        want.sort();
        assert_eq!(got, want);
        assert_eq!(state.z_max(), ratio(3, 8));
        assert_eq!(state.layer(5).count(), 2);
    }

    #[test]
    fn chain_member_links() {
        let (state, _) = LayeredState::build_n4(&chain_member()).unwrap();
        let rn = state.restricted_network(t(1, 2, 5), t(1, 3, 6));
        let lc = state.link_capacity(&rn);
        assert_eq!(lc.value, ratio(1, 8));
        let path = lc.unique.expect("unique path");
        assert_eq!(path.nodes, vec![t(2, 3, 4), t(1, 2, 5)]);
        assert!(state.check_generators(&rn));

        let rn = state.restricted_network(t(1, 2, 5), t(3, 5, 6));
        assert_eq!(state.link_capacity(&rn).value, Rational::zero());

        let rn = state.restricted_network(t(3, 4, 5), t(3, 5, 6));
        let lc = state.link_capacity(&rn);
        assert_eq!(lc.value, ratio(1, 8));
        assert!(lc.unique.is_none());
    }

    #[test]
    fn chain_member_fk_shrunk_arcs() {
        let (state, _) = LayeredState::build_n4(&chain_member()).unwrap();
        let fk = state.build_fk();
        let p = state.rigid.iter().position(|r| r.pedigree == ped(&[(1, 3), (2, 3)])).unwrap();
        let has = |v: Triangle| {
            (0..fk.problem.arcs.len()).any(|a| fk.arc_ends(a) == (Tail::Shrunk(p), v))
        };
        assert!(!has(t(1, 3, 6)));
        assert!(has(t(1, 4, 6)));
        assert_eq!(fk.origins.len(), 6);
    }

    #[test]
    fn chain_member_stage5() {
        let (mut state, _) = LayeredState::build_n4(&chain_member()).unwrap();
        let StageOutcome::Advanced(rep) = state.advance().unwrap() else { panic!("F_5 infeasible") };
        assert!(rep.rigidity.as_ref().unwrap().all_rigid());
        assert!(state.violations.is_empty(), "{:?}", state.violations);
        let unique = state
            .rigid_at(5)
            .into_iter()
            .filter(|&p| matches!(state.rigid[p].provenance[0], Provenance::UniquePath { .. }))
            .count();
        assert_eq!(unique, 2);
        assert_eq!(state.z_max(), ratio(1, 8));
    }
}
