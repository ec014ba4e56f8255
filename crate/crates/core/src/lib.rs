//! Exact membership testing for pedigree polytopes.
//!
//! A pedigree is a sequence of triangles encoding the insertion history of a
//! Hamiltonian cycle. Given a rational point `X`, [`membership::check_membership`]
//! decides whether `X` lies in the convex hull of the characteristic vectors of
//! all pedigrees on `n` cities by growing a layered network stage by stage,
//! solving forbidden-arc transportation problems, freezing rigid flows, and
//! finally solving a multicommodity flow LP. Every number is an exact rational.
//!
//! [`oracle`] provides an independent brute-force answer for small `n`.

pub mod dot;
pub mod error;
pub mod experiment;
pub mod flow;
pub mod io;
pub mod layered;
pub mod lp;
pub mod mcf;
pub mod membership;
pub mod mi;
pub mod oracle;
pub mod pedigree;
pub mod random;
pub mod rational;
pub mod rigidity;

pub use error::{Error, Result};
pub use membership::{check_membership, MembershipOptions, Verdict};
pub use pedigree::{CharVector, Edge, Pedigree, Tour, Triangle};
pub use rational::Rational;
