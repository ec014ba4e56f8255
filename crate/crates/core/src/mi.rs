//! The MI-relaxation `P_MI(n)`: constraint matrices and the slack recursion.

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::pedigree::{block_offset, edges_of, p, tau, CharVector, Edge, Tour, Triangle};
use crate::rational::Rational;

/// Constraint matrices of the relaxation. Entries are in `{-1, 0, 1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MirSystem {
    pub n: usize,
    /// `(n - 3) x tau_n`; row `k - 4` marks the `k`-block.
    pub e_matrix: Vec<Vec<i8>>,
    /// `p_n x tau_n`; column block `k` is `A^(k) = [I; -M_{k-1}]` padded with zero rows.
    pub a_matrix: Vec<Vec<i8>>,
}

/// `A^(k)`: identity over the negated node-edge incidence matrix of `K_{k-1}`.
pub fn a_block(k: usize) -> Vec<Vec<i8>> {
    let cols = p(k - 1);
    let mut rows = vec![vec![0i8; cols]; p(k)];
    for (c, e) in edges_of(k - 1).enumerate() {
        rows[c][c] = 1;
        // Row for edge (v, k) sits at index p_{k-1} + v - 1.
        rows[cols + e.i - 1][c] = -1;
        rows[cols + e.j - 1][c] = -1;
    }
    rows
}

pub fn build_system(n: usize) -> Result<MirSystem> {
    if n < 4 {
        return Err(Error::Precondition(format!("the relaxation needs n >= 4, got {n}")));
    }
    let cols = tau(n);
    let mut e_matrix = vec![vec![0i8; cols]; n - 3];
    let mut a_matrix = vec![vec![0i8; cols]; p(n)];
    for k in 4..=n {
        let off = block_offset(k);
        for c in 0..p(k - 1) {
            e_matrix[k - 4][off + c] = 1;
        }
        for (r, row) in a_block(k).into_iter().enumerate() {
            for (c, v) in row.into_iter().enumerate() {
                a_matrix[r][off + c] = v;
            }
        }
    }
    Ok(MirSystem { n, e_matrix, a_matrix })
}

/// `U^(0), ..., U^(n-3)`, each of length `p_n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlackSequence {
    pub stages: Vec<Vec<Rational>>,
}

impl SlackSequence {
    pub fn last(&self) -> &[Rational] {
        self.stages.last().expect("slack sequence is never empty")
    }

    /// Slack vector after inserting city `k`, truncated to `p_k` entries.
    pub fn after(&self, k: usize) -> &[Rational] {
        &self.stages[k - 3][..p(k)]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PmiViolation {
    Negative { triangle: Triangle },
    BlockSum { k: usize, sum: Rational },
    NegativeSlack { k: usize, edge: Edge, value: Rational },
}

impl std::fmt::Display for PmiViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        use crate::rational::format;
        match self {
            PmiViolation::Negative { triangle } => write!(f, "negative coordinate at {triangle}"),
            PmiViolation::BlockSum { k, sum } => write!(f, "block {k} sums to {}", format(sum)),
            PmiViolation::NegativeSlack { k, edge, value } => {
                write!(f, "slack of {edge} is {} after inserting {k}", format(value))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PmiVerdict {
    Inside(SlackSequence),
    Outside(PmiViolation),
}

impl PmiVerdict {
    pub fn is_inside(&self) -> bool {
        matches!(self, PmiVerdict::Inside(_))
    }
}

/// Decides `X in P_MI(n)` by evaluating the slack recursion stage by stage.
pub fn check_pmi(x: &CharVector) -> PmiVerdict {
    let n = x.n();
    let zero = Rational::zero();
    for k in 4..=n {
        for e in edges_of(k - 1) {
            let t = Triangle { k, edge: e };
            if x.get(t) < &zero {
                return PmiVerdict::Outside(PmiViolation::Negative { triangle: t });
            }
        }
        let sum: Rational = x.block(k).iter().sum();
        if !sum.is_one() {
            return PmiVerdict::Outside(PmiViolation::BlockSum { k, sum });
        }
    }
    let mut u = vec![Rational::zero(); p(n.max(3))];
    for c in u.iter_mut().take(3) {
        *c = Rational::one();
    }
    let mut stages = vec![u.clone()];
    for k in 4..=n {
        let block = x.block(k);
        for (c, e) in edges_of(k - 1).enumerate() {
            let v = &block[c];
            if v.is_zero() {
                continue;
            }
            u[c] -= v;
            u[p(k - 1) + e.i - 1] += v;
            u[p(k - 1) + e.j - 1] += v;
        }
        for (c, e) in edges_of(k).enumerate() {
            if u[c] < zero {
                return PmiVerdict::Outside(PmiViolation::NegativeSlack {
                    k,
                    edge: e,
                    value: u[c].clone(),
                });
            }
        }
        stages.push(u.clone());
    }
    PmiVerdict::Inside(SlackSequence { stages })
}

/// For a 0/1 point of `P_MI(n)` the final slack vector is the incidence vector of its tour.
pub fn slack_to_tour(x: &CharVector, slacks: &SlackSequence) -> Result<Tour> {
    if !x.is_integral() {
        return Err(Error::Precondition("slack_to_tour needs an integral point".into()));
    }
    let n = x.n();
    let last = slacks.last();
    let mut edges = Vec::new();
    for (c, e) in edges_of(n).enumerate() {
        if last[c].is_one() {
            edges.push(e);
        } else if !last[c].is_zero() {
            return Err(Error::Precondition(format!("slack of {e} is not 0/1")));
        }
    }
    Tour::from_edges(n, edges)
}
