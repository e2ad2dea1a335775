//! Exact symbolic engine for definable sets of the structure
//! (R, <, +, -, 0, rational scalar multiplication, Z).
//!
//! The engine represents every definable set in "split normal form": a finite
//! union of products of an integer-lattice (Presburger) part and a fractional
//! (semilinear) part inside the unit cube. On top of that representation it
//! provides quantifier elimination, Boolean set algebra, topology and
//! dimension operators, cylindrical cell decomposition on bounded boxes,
//! multi-cell partitions, uniform component bounds, and parametric cell
//! decompositions over bounded windows.

pub mod lin_core;
pub mod qe_engine;
pub mod def_sets;
pub mod cell_decomp;
pub mod topology;
pub mod almost_core;

pub use lin_core::{Atom, AtomKind, Formula, LinTerm, Rat, VarOrder};
