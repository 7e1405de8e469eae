//! Exact integer linear algebra and norm-shell enumeration in definite lattices.

pub mod enumerate;
pub mod gram;
pub mod matrix;

pub use enumerate::{
    box_search, box_search_first, vectors_of_norm, vectors_of_norm_in_coset, write_vectors_csv,
    FinckePohst,
};
pub use gram::{
    class_with_pairing, orthogonal_complement, parity_residues, Definiteness, GramLattice, NormTarget,
};
