//! Circuit satisfiability (CSAT) and circuit equivalence (CEQV) over the
//! nilpotent algebras `D[p1,...,ph]`.
//!
//! The algebra `D[p1,...,ph]` is the group `Z_p1 x ... x Z_ph` expanded by the
//! projections `e_j` and the level-shift tests `v_j`. This crate provides exact
//! arithmetic on it, terms and shared-node circuits over its signature, the
//! per-level canonical representation, a compiler from arbitrary level
//! functions to polynomials, modular counting circuits, the 3-CNF reductions
//! (into `D` and into `S4`), several CSAT/CEQV solvers and the GF(q) linear
//! algebra they rely on.

pub mod algebra;
pub mod canonical;
pub mod ccircuit;
pub mod cnf;
pub mod error;
pub mod funcrep;
pub mod gf;
pub mod random;
pub mod reduction;
pub mod s4;
pub mod solver;
pub mod terms;

pub use algebra::{AlgebraSpec, CongruenceChain, DElem, Partition};
pub use canonical::{canonicalize, CanonicalForm, LevelForm};
pub use ccircuit::{extract_cc, CcCircuit, ModGate};
pub use cnf::{CnfFormula, Literal};
pub use error::{Error, Result};
pub use funcrep::LevelFunction;
pub use reduction::{reduce, ReductionOutput};
pub use solver::{Instance, SupportBound};

pub use terms::{Builder, Circuit, NodeId, Term};
