//! Seeded generators of test points.

use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mi::check_pmi;
use crate::oracle::pedigrees;
use crate::pedigree::{edges_of, p, CharVector, Edge, Pedigree, Triangle};
use crate::rational::{ratio, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    /// Convex combination of random pedigrees.
    Hull,
    /// A hull point with mass moved inside one block.
    Perturbed,
    /// A point of the MI relaxation built block by block.
    Pmi,
}

impl Mode {
    pub const ALL: [Mode; 3] = [Mode::Hull, Mode::Perturbed, Mode::Pmi];

    pub fn name(self) -> &'static str {
        match self {
            Mode::Hull => "hull",
            Mode::Perturbed => "perturbed",
            Mode::Pmi => "pmi",
        }
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Mode> {
        match s {
            "hull" => Ok(Mode::Hull),
            "perturbed" => Ok(Mode::Perturbed),
            "pmi" => Ok(Mode::Pmi),
            _ => Err(Error::Parse(format!("unknown mode {s:?}"))),
        }
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A uniformly random pedigree, built by random valid extensions.
pub fn random_pedigree<R: Rng>(n: usize, rng: &mut R) -> Pedigree {
    let mut ped = Pedigree::base();
    while ped.n() < n {
        let k = ped.n() + 1;
        let choices: Vec<Edge> = edges_of(k - 1).filter(|e| ped.can_extend(*e)).collect();
        let e = *choices.choose(rng).expect("every pedigree extends");
        ped = ped.extend(e).expect("checked extension");
    }
    ped
}

fn random_weights<R: Rng>(m: usize, rng: &mut R) -> Vec<Rational> {
    let raw: Vec<i64> = (0..m).map(|_| rng.gen_range(1..=6)).collect();
    let total: i64 = raw.iter().sum();
    raw.into_iter().map(|w| ratio(w, total)).collect()
}

pub fn hull_point<R: Rng>(n: usize, rng: &mut R) -> CharVector {
    let m = rng.gen_range(1..=6);
    let mut x = CharVector::zeros(n);
    for w in random_weights(m, rng) {
        let ped = match pedigrees(n) {
            Ok(all) => all.choose(rng).expect("nonempty").clone(),
            Err(_) => random_pedigree(n, rng),
        };
        x.add_scaled(&ped.char_vector(), &w);
    }
    x
}

/// Moves mass between two coordinates of one block, preferring results inside the relaxation.
pub fn perturbed_point<R: Rng>(n: usize, rng: &mut R) -> CharVector {
    let base = hull_point(n, rng);
    let mut last = base.clone();
    for _ in 0..20 {
        let mut x = base.clone();
        let k = rng.gen_range(5..=n.max(5)).min(n);
        let support = x.support(k);
        let from = *support.choose(rng).expect("blocks sum to one");
        let edges: Vec<Edge> = edges_of(k - 1).filter(|e| *e != from.edge).collect();
        let to = Triangle { k, edge: *edges.choose(rng).expect("block has two edges") };
        let have = x.get(from).clone();
        let delta = have * ratio(rng.gen_range(1..=4), 4);
        *x.get_mut(from) -= &delta;
        *x.get_mut(to) += &delta;
        if check_pmi(&x).is_inside() {
            return x;
        }
        last = x;
    }
    last
}

/// A point of `P_MI(n)`: each block is spread over edges with positive slack.
pub fn pmi_point<R: Rng>(n: usize, rng: &mut R) -> CharVector {
    let mut x = CharVector::zeros(n);
    let mut slack = vec![Rational::zero(); p(n)];
    for s in slack.iter_mut().take(3) {
        *s = Rational::one();
    }
    for k in 4..=n {
        let mut edges: Vec<(usize, Edge)> =
            edges_of(k - 1).enumerate().filter(|(c, _)| slack[*c].is_positive()).collect();
        edges.shuffle(rng);
        let mut assigned = vec![Rational::zero(); edges.len()];
        let mut left = Rational::one();
        for (pos, (c, _)) in edges.iter().enumerate() {
            if !left.is_positive() {
                break;
            }
            let room = slack[*c].clone().min(left.clone());
            let share = room * ratio(rng.gen_range(0..=4), 4);
            left -= &share;
            assigned[pos] = share;
        }
        for (pos, (c, _)) in edges.iter().enumerate() {
            if !left.is_positive() {
                break;
            }
            let room = (&slack[*c] - &assigned[pos]).min(left.clone());
            left -= &room;
            assigned[pos] += room;
        }
        for ((c, e), a) in edges.iter().zip(assigned) {
            if a.is_zero() {
                continue;
            }
            *x.get_mut(Triangle { k, edge: *e }) = a.clone();
            slack[*c] -= &a;
            slack[p(k - 1) + e.i - 1] += &a;
            slack[p(k - 1) + e.j - 1] += &a;
        }
    }
    x
}

pub fn point<R: Rng>(n: usize, mode: Mode, rng: &mut R) -> CharVector {
    match mode {
        Mode::Hull => hull_point(n, rng),
        Mode::Perturbed => perturbed_point(n, rng),
        Mode::Pmi => pmi_point(n, rng),
    }
}

/// `count` points for one seed.
pub fn generate(n: usize, mode: Mode, seed: u64, count: usize) -> Result<Vec<CharVector>> {
    if n < 4 {
        return Err(Error::Precondition(format!("points need n >= 4, got {n}")));
    }
    if mode == Mode::Hull && n > crate::oracle::ORACLE_BOUND {
        return Err(Error::Resource(format!("hull mode supports n <= {}", crate::oracle::ORACLE_BOUND)));
    }
    let mut r = rng(seed);
    Ok((0..count).map(|_| point(n, mode, &mut r)).collect())
}
