//! Edges, triangles, pedigrees, tours and characteristic vectors.
//!
//! Vertices are 1-based. Edges `(i, j)` always have `i < j` and are ordered by
//! their label `i + (j-1)(j-2)/2`, which is the coordinate order used inside
//! every block of a characteristic vector.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Default upper bound on `k` for [`enumerate_pedigrees`].
pub const ENUMERATION_BOUND: usize = 9;

/// Number of edges of the complete graph on `m` vertices.
pub fn p(m: usize) -> usize {
    m * m.saturating_sub(1) / 2
}

/// Number of triangles `{i, j, k}` with `4 <= k <= n`, i.e. `binom(n, 3) - 1`.
pub fn tau(n: usize) -> usize {
    if n < 3 {
        return 0;
    }
    n * (n - 1) * (n - 2) / 6 - 1
}

/// Offset of the `k`-block inside a characteristic vector.
pub fn block_offset(k: usize) -> usize {
    tau(k - 1)
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
}

impl Edge {
    pub fn new(i: usize, j: usize) -> Result<Edge> {
        if i == 0 || i >= j {
            return Err(Error::Structural(format!("invalid edge ({i},{j})")));
        }
        Ok(Edge { i, j })
    }

    /// Unchecked constructor for internal use where `1 <= i < j` is known.
    pub(crate) const fn of(i: usize, j: usize) -> Edge {
        Edge { i, j }
    }

    pub fn label(self) -> usize {
        self.i + p(self.j - 1)
    }

    /// Zero-based position inside a block (`label - 1`).
    pub fn index(self) -> usize {
        self.label() - 1
    }

    pub fn from_index(index: usize) -> Edge {
        let mut j = 2;
        while p(j) <= index {
            j += 1;
        }
        Edge::of(index - p(j - 1) + 1, j)
    }

    pub fn contains(self, v: usize) -> bool {
        self.i == v || self.j == v
    }
}

impl Ord for Edge {
    fn cmp(&self, other: &Self) -> Ordering {
        self.label().cmp(&other.label())
    }
}

impl PartialOrd for Edge {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i, self.j)
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.i, self.j)
    }
}

/// Edges of `K_m` in label order.
pub fn edges_of(m: usize) -> impl Iterator<Item = Edge> {
    (2..=m).flat_map(|j| (1..j).map(move |i| Edge::of(i, j)))
}

/// The triangle `{i, j, k}` with common edge `(i, j)` and `i < j < k`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triangle {
    pub k: usize,
    pub edge: Edge,
}

impl Triangle {
    pub fn new(i: usize, j: usize, k: usize) -> Result<Triangle> {
        let edge = Edge::new(i, j)?;
        if j >= k {
            return Err(Error::Structural(format!("invalid triangle {{{i},{j},{k}}}")));
        }
        Ok(Triangle { k, edge })
    }

    pub const BASE: Triangle = Triangle { k: 3, edge: Edge::of(1, 2) };

    pub fn contains(self, v: usize) -> bool {
        self.k == v || self.edge.contains(v)
    }

    /// Whether `self` is a generator of `v`.
    pub fn generates(self, v: Triangle) -> bool {
        if v == Triangle::BASE {
            return false;
        }
        if v.edge.j > 3 {
            self.k == v.edge.j && self.edge.contains(v.edge.i)
        } else {
            self == Triangle::BASE
        }
    }
}

impl fmt::Debug for Triangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{},{}}}", self.edge.i, self.edge.j, self.k)
    }
}

impl fmt::Display for Triangle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}:{},{}]", self.k, self.edge.i, self.edge.j)
    }
}

/// Generator set of a triangle. Depends only on the common edge.
pub fn generators(v: Triangle) -> Result<Vec<Triangle>> {
    if v == Triangle::BASE {
        return Err(Error::Precondition("no generator defined for {1,2,3}".into()));
    }
    let Edge { i, j } = v.edge;
    if j <= 3 {
        return Ok(vec![Triangle::BASE]);
    }
    let mut out: Vec<Triangle> = (1..i)
        .map(|r| Triangle { k: j, edge: Edge::of(r, i) })
        .chain((i + 1..j).map(|s| Triangle { k: j, edge: Edge::of(i, s) }))
        .collect();
    out.sort();
    Ok(out)
}

/// Outcome of [`is_pedigree`] on a well-formed triangle sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PedigreeCheck {
    Valid,
    /// The triangle for city `k` has no generator among earlier triangles.
    MissingGenerator { k: usize },
    /// The common edge of the triangle for city `k` was already used.
    RepeatedEdge { k: usize },
}

impl PedigreeCheck {
    pub fn is_valid(&self) -> bool {
        matches!(self, PedigreeCheck::Valid)
    }
}

/// Checks both defining conditions on `({1,2,3}, {i4,j4,4}, ..., {in,jn,n})`.
pub fn is_pedigree(seq: &[Triangle]) -> Result<PedigreeCheck> {
    if seq.first() != Some(&Triangle::BASE) {
        return Err(Error::Structural("sequence must start with {1,2,3}".into()));
    }
    for (pos, t) in seq.iter().enumerate().skip(1) {
        if t.k != pos + 3 {
            return Err(Error::Structural(format!(
                "triangle {t:?} at position {pos} should have apex {}",
                pos + 3
            )));
        }
    }
    let mut used = BTreeSet::new();
    for (pos, &t) in seq.iter().enumerate().skip(1) {
        if !seq[..pos].iter().any(|g| g.generates(t)) {
            return Ok(PedigreeCheck::MissingGenerator { k: t.k });
        }
        if !used.insert(t.edge) {
            return Ok(PedigreeCheck::RepeatedEdge { k: t.k });
        }
    }
    Ok(PedigreeCheck::Valid)
}

/// A pedigree on `n` cities, stored as its common edges `(e_4, ..., e_n)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Pedigree {
    edges: Vec<Edge>,
}

impl Pedigree {
    /// The empty pedigree on three cities.
    pub fn base() -> Pedigree {
        Pedigree { edges: Vec::new() }
    }

    pub fn from_edges(edges: Vec<Edge>) -> Result<Pedigree> {
        let mut ped = Pedigree::base();
        for e in edges {
            match ped.extension_failure(e) {
                None => ped.edges.push(e),
                Some(check) => {
                    return Err(Error::Precondition(format!(
                        "not a pedigree: {check:?} when inserting {} in {e}",
                        ped.n() + 1
                    )))
                }
            }
        }
        Ok(ped)
    }

    pub fn from_triangles(seq: &[Triangle]) -> Result<Pedigree> {
        match is_pedigree(seq)? {
            PedigreeCheck::Valid => Ok(Pedigree { edges: seq[1..].iter().map(|t| t.edge).collect() }),
            other => Err(Error::Precondition(format!("not a pedigree: {other:?}"))),
        }
    }

    pub fn n(&self) -> usize {
        self.edges.len() + 3
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Common edge used to insert city `k`.
    pub fn edge_at(&self, k: usize) -> Edge {
        self.edges[k - 4]
    }

    pub fn triangle_at(&self, k: usize) -> Triangle {
        Triangle { k, edge: self.edge_at(k) }
    }

    pub fn triangles(&self) -> impl Iterator<Item = Triangle> + '_ {
        self.edges.iter().enumerate().map(|(pos, &edge)| Triangle { k: pos + 4, edge })
    }

    pub fn contains_triangle(&self, t: Triangle) -> bool {
        t.k >= 4 && t.k <= self.n() && self.edge_at(t.k) == t.edge
    }

    /// Prefix `P/k`.
    pub fn restrict(&self, k: usize) -> Pedigree {
        Pedigree { edges: self.edges[..k.saturating_sub(3).min(self.edges.len())].to_vec() }
    }

    fn extension_failure(&self, e: Edge) -> Option<PedigreeCheck> {
        let k = self.n() + 1;
        if e.j >= k {
            return Some(PedigreeCheck::MissingGenerator { k });
        }
        if e.j > 3 && !self.edge_at(e.j).contains(e.i) {
            return Some(PedigreeCheck::MissingGenerator { k });
        }
        if self.edges.contains(&e) {
            return Some(PedigreeCheck::RepeatedEdge { k });
        }
        None
    }

    /// Whether appending `e` (inserting city `n + 1`) yields a pedigree.
    pub fn can_extend(&self, e: Edge) -> bool {
        self.extension_failure(e).is_none()
    }

    pub fn extend(&self, e: Edge) -> Result<Pedigree> {
        match self.extension_failure(e) {
            None => {
                let mut edges = self.edges.clone();
                edges.push(e);
                Ok(Pedigree { edges })
            }
            Some(check) => Err(Error::Precondition(format!("cannot extend by {e}: {check:?}"))),
        }
    }

    pub fn to_tour(&self) -> Tour {
        pedigree_to_tour(self)
    }

    pub fn char_vector(&self) -> CharVector {
        char_vector(self)
    }
}

impl fmt::Debug for Pedigree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (pos, e) in self.edges.iter().enumerate() {
            if pos > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

impl fmt::Display for Pedigree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A Hamiltonian cycle on `n` vertices, stored as its edge set in label order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Tour {
    n: usize,
    edges: Vec<Edge>,
}

impl Tour {
    pub fn triangle() -> Tour {
        Tour { n: 3, edges: vec![Edge::of(1, 2), Edge::of(1, 3), Edge::of(2, 3)] }
    }

    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Tour> {
        let set: BTreeSet<Edge> = edges.into_iter().collect();
        let tour = Tour { n, edges: set.into_iter().collect() };
        tour.validate()?;
        Ok(tour)
    }

    /// Builds a tour from a cyclic vertex order such as `1 3 6 4 2 5`.
    pub fn from_cycle(order: &[usize]) -> Result<Tour> {
        let n = order.len();
        if n < 3 {
            return Err(Error::Structural("a tour needs at least 3 vertices".into()));
        }
        let mut edges = Vec::with_capacity(n);
        for pos in 0..n {
            let (a, b) = (order[pos], order[(pos + 1) % n]);
            edges.push(Edge::new(a.min(b), a.max(b))?);
        }
        Tour::from_edges(n, edges)
    }

    fn validate(&self) -> Result<()> {
        let n = self.n;
        if n < 3 || self.edges.len() != n {
            return Err(Error::Structural(format!("a {n}-tour needs exactly {n} distinct edges")));
        }
        let mut adj = vec![Vec::new(); n + 1];
        for e in &self.edges {
            if e.j > n {
                return Err(Error::Structural(format!("edge {e} outside [1,{n}]")));
            }
            adj[e.i].push(e.j);
            adj[e.j].push(e.i);
        }
        if adj[1..].iter().any(|a| a.len() != 2) {
            return Err(Error::Structural("every vertex of a tour has degree 2".into()));
        }
        let (mut prev, mut cur, mut seen) = (1, adj[1][0], 1);
        while cur != 1 {
            let next = if adj[cur][0] == prev { adj[cur][1] } else { adj[cur][0] };
            prev = cur;
            cur = next;
            seen += 1;
        }
        if seen != n {
            return Err(Error::Structural("edges do not form a single cycle".into()));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn contains(&self, e: Edge) -> bool {
        self.edges.binary_search(&e).is_ok()
    }

    /// Cyclic order starting at 1 and continuing to its smaller neighbour.
    pub fn cycle(&self) -> Vec<usize> {
        let mut adj = vec![Vec::new(); self.n + 1];
        for e in &self.edges {
            adj[e.i].push(e.j);
            adj[e.j].push(e.i);
        }
        let mut order = vec![1];
        let (mut prev, mut cur) = (1, adj[1][0].min(adj[1][1]));
        while cur != 1 {
            order.push(cur);
            let next = if adj[cur][0] == prev { adj[cur][1] } else { adj[cur][0] };
            prev = cur;
            cur = next;
        }
        order
    }

    pub fn to_pedigree(&self) -> Pedigree {
        tour_to_pedigree(self)
    }
}

impl fmt::Debug for Tour {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let order: Vec<String> = self.cycle().iter().map(|v| v.to_string()).collect();
        write!(f, "({} 1)", order.join(" "))
    }
}

/// Applies the insertions `3-tour -> ... -> n-tour` encoded by a pedigree.
pub fn pedigree_to_tour(ped: &Pedigree) -> Tour {
    let mut edges: BTreeSet<Edge> = Tour::triangle().edges.into_iter().collect();
    for t in ped.triangles() {
        let removed = edges.remove(&t.edge);
        assert!(removed, "insertion edge {} absent from the current tour", t.edge);
        edges.insert(Edge::of(t.edge.i, t.k));
        edges.insert(Edge::of(t.edge.j, t.k));
    }
    Tour { n: ped.n(), edges: edges.into_iter().collect() }
}

/// Shrinks a tour down to the 3-tour, recording the edge recreated at each step.
pub fn tour_to_pedigree(tour: &Tour) -> Pedigree {
    let n = tour.n;
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n + 1];
    for e in &tour.edges {
        adj[e.i].insert(e.j);
        adj[e.j].insert(e.i);
    }
    let mut rev = Vec::with_capacity(n.saturating_sub(3));
    for k in (4..=n).rev() {
        let nb: Vec<usize> = adj[k].iter().copied().collect();
        let (a, b) = (nb[0].min(nb[1]), nb[0].max(nb[1]));
        adj[a].remove(&k);
        adj[b].remove(&k);
        adj[a].insert(b);
        adj[b].insert(a);
        rev.push(Edge::of(a, b));
    }
    rev.reverse();
    Pedigree { edges: rev }
}

/// All pedigrees on `k` cities in lexicographic order of their label sequences.
pub fn enumerate_pedigrees(k: usize) -> Result<Vec<Pedigree>> {
    enumerate_pedigrees_bounded(k, ENUMERATION_BOUND)
}

pub fn enumerate_pedigrees_bounded(k: usize, bound: usize) -> Result<Vec<Pedigree>> {
    if k < 3 {
        return Err(Error::Precondition(format!("pedigrees need k >= 3, got {k}")));
    }
    if k > bound {
        return Err(Error::Resource(format!("enumeration of P_{k} exceeds bound k <= {bound}")));
    }
    let mut out = Vec::new();
    let mut stack = vec![Pedigree::base()];
    // Depth-first with candidates pushed in reverse label order keeps the output sorted.
    while let Some(ped) = stack.pop() {
        if ped.n() == k {
            out.push(ped);
            continue;
        }
        let next = ped.n() + 1;
        let candidates: Vec<Edge> = edges_of(next - 1).filter(|&e| ped.can_extend(e)).collect();
        for e in candidates.into_iter().rev() {
            let mut edges = ped.edges.clone();
            edges.push(e);
            stack.push(Pedigree { edges });
        }
    }
    Ok(out)
}

/// A point of `Q^{tau_n}`: blocks `x_4, ..., x_n`, block `k` indexed by `E_{k-1}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct CharVector {
    n: usize,
    coords: Vec<Rational>,
}

impl CharVector {
    pub fn new(n: usize, coords: Vec<Rational>) -> Result<CharVector> {
        if n < 3 {
            return Err(Error::Structural(format!("n must be at least 3, got {n}")));
        }
        if coords.len() != tau(n) {
            return Err(Error::Structural(format!(
                "expected {} coordinates for n = {n}, got {}",
                tau(n),
                coords.len()
            )));
        }
        Ok(CharVector { n, coords })
    }

    /// Accepts either the canonical length `tau_n` or the `binom(n,3)` form
    /// whose leading `{1,2,3}` coordinate must equal 1.
    pub fn from_any(n: usize, mut coords: Vec<Rational>) -> Result<CharVector> {
        if coords.len() == tau(n) + 1 {
            if !coords[0].is_one() {
                return Err(Error::Structural("coordinate of {1,2,3} must equal 1".into()));
            }
            coords.remove(0);
        }
        CharVector::new(n, coords)
    }

    pub fn zeros(n: usize) -> CharVector {
        CharVector { n, coords: vec![Rational::zero(); tau(n)] }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<Rational> {
        self.coords
    }

    pub fn block(&self, k: usize) -> &[Rational] {
        &self.coords[block_offset(k)..block_offset(k) + p(k - 1)]
    }

    /// Coordinate index of a triangle.
    pub fn position(t: Triangle) -> usize {
        block_offset(t.k) + t.edge.index()
    }

    pub fn get(&self, t: Triangle) -> &Rational {
        &self.coords[block_offset(t.k) + t.edge.index()]
    }

    pub fn get_mut(&mut self, t: Triangle) -> &mut Rational {
        &mut self.coords[block_offset(t.k) + t.edge.index()]
    }

    /// Triangles of block `k` with positive value, in label order.
    pub fn support(&self, k: usize) -> Vec<Triangle> {
        edges_of(k - 1)
            .map(|edge| Triangle { k, edge })
            .filter(|&t| self.get(t) > &Rational::zero())
            .collect()
    }

    /// `X/k`: the first `tau_k` coordinates.
    pub fn restrict(&self, k: usize) -> CharVector {
        assert!(k >= 3 && k <= self.n, "restrict to {k} outside [3, {}]", self.n);
        CharVector { n: k, coords: self.coords[..tau(k)].to_vec() }
    }

    pub fn full_coords(&self) -> Vec<Rational> {
        let mut out = Vec::with_capacity(self.coords.len() + 1);
        out.push(Rational::one());
        out.extend(self.coords.iter().cloned());
        out
    }

    pub fn add_scaled(&mut self, other: &CharVector, w: &Rational) {
        assert_eq!(self.n, other.n);
        for (a, b) in self.coords.iter_mut().zip(&other.coords) {
            if !b.is_zero() {
                *a += b * w;
            }
        }
    }

    pub fn is_integral(&self) -> bool {
        self.coords.iter().all(|c| c.is_integer())
    }
}

impl fmt::Debug for CharVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let blocks: Vec<String> = (4..=self.n)
            .map(|k| {
                self.block(k)
                    .iter()
                    .map(crate::rational::format)
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect();
        write!(f, "({})", blocks.join(" | "))
    }
}

pub fn char_vector(ped: &Pedigree) -> CharVector {
    let mut cv = CharVector::zeros(ped.n());
    for t in ped.triangles() {
        *cv.get_mut(t) = Rational::one();
    }
    cv
}
