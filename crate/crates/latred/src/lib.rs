//! Exact algebra for equational decision problems over complemented modular
//! (ortho)lattices and *-rings.
//!
//! The crate has three layers:
//!
//! * exact linear algebra over GF(p) and the rationals ([`matrix`],
//!   [`subspace`]), including canonical subspaces of F^d, the Zassenhaus
//!   meet, orthocomplements and the exact Moore-Penrose pseudo-inverse;
//! * von Neumann frames and their coordinate rings ([`frame`], [`library`]):
//!   the isomorphism omega between End(a_1) and the coordinate ring,
//!   perspectivities, the discriminator, orthogonal/ON frames and the
//!   retraction chains that force arbitrary substitutions into frames and
//!   ring elements;
//! * the reductions between REF / SAT / sSAT / uREF and polynomial
//!   feasibility ([`reduce`]), each paired with a witness transport, and
//!   ground-truth search oracles over small models ([`oracle`]).

pub mod error;
pub mod eval;
pub mod frame;
pub mod instance;
pub mod library;
pub mod matrix;
pub mod normal;
pub mod oracle;
pub mod reduce;
pub mod scalar;
pub mod selftest;
pub mod subspace;
pub mod term;
pub mod unnest;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use scalar::{FieldSpec, Scalar};
pub use subspace::Subspace;
pub use term::{Equation, Signature, Term};
pub use unnest::UnnestedTerm;
