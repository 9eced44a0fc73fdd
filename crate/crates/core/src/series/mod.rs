//! Truncated series arithmetic: Laurent polynomials in the curve coordinate
//! `x`, jets in the transverse coordinates `(w, z)` over them, composition,
//! substitution and map inversion.

mod compose;
mod jet;
mod laurent;
mod norm;

pub use compose::{invert_map, substitute};
pub use jet::{JetShape, TransverseJet};
pub use laurent::{LaurentPoly, ModeWindow};
pub use norm::{sup_norm_bound, PolydiscSpec};
