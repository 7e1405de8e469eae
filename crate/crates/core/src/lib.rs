//! Exact lattice computations for Ulrich line bundles on unnodal Enriques surfaces.
//!
//! All arithmetic happens in `Num(Y) ≅ U ⊕ E8(-1)`, presented with generators
//! `E_1, …, E_10` (`E_i·E_j = 1 - δ_ij`) and the Fano class `Δ = ⅓ Σ E_i`.
//! Torsion in the Picard group is not modelled.

pub mod chern;
pub mod error;
pub mod intlin;
pub mod lattice;
pub mod stability;
pub mod toric;
pub mod ulrich;

pub use error::{Error, Result};
pub use lattice::{
    basis_of_lambda, canonical_orbit_form, fano_delta, format_divisor, pairing, parse_divisor,
    DivisorClass,
};
