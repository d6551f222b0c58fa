//! Parametric integer-point counting: piecewise polynomials, k-unfolding,
//! separable interval counting and an enumeration oracle.

mod count;
mod piecewise;
pub mod tree;

pub use count::{
    count_concrete, count_separable, unfold_k, volume, volume_unfolded, Combination, CountError,
    SymbolicVolume, Volume,
};
pub use piecewise::{guards_disjoint, pw_add, pw_eval, pw_scale, Piece, PiecewisePolynomial};

#[cfg(test)]
mod tests;
