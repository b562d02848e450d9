//! Sampled S²-valued fields on planar grids and the closed-form maps
//! (stereographic projection, Möbius chart, symmetry actions) evaluated on them.

mod director;
mod grid;
pub mod io;
mod mobius;
mod pair;
mod sampled;
mod symmetry;

pub use director::Director;
pub use grid::GridSpec;
pub use mobius::{base_field, mobius_field, wrap_angle, MobiusParams};
pub use pair::{rotate_e1_pair, stereographic, w_alpha_beta, w_star, ComplexPair};
pub use sampled::{sample, Field, UNIT_NORM_TOL};
pub use symmetry::{apply_symmetry, Symmetry};
