//! Exact homological algebra for bound quiver algebras and 3-periodic
//! chain complexes, with Igusa-Todorov φ/ψ computations.
//!
//! Layering, bottom to top:
//!
//! * [`exactla`]: matrices over 𝔽_p.
//! * [`quiver`]: quivers, bound quiver algebras, the `Q × C₃` tensor construction.
//! * [`repmod`]: modules, Hom spaces, projective covers, syzygies,
//!   Krull–Schmidt decomposition and isomorphism testing.
//! * [`igusa`]: the split Grothendieck group, the `L` operator, φ and ψ.
//! * [`perchain`]: bounded and 3-periodic complexes and the wrapping functor.
//! * [`trunres`]: truncated projective resolutions and their explicit syzygies.
//! * [`engine`]: interchangeable syzygy engines selected by name.
//! * [`counterex`]: the `X_k`, `Y_k`, `Z_k^i` families and their verification.

pub mod counterex;
pub mod engine;
pub mod error;
pub mod exactla;
pub mod igusa;
pub mod perchain;
pub mod poly;
pub mod quiver;
pub mod repmod;
pub mod trunres;

pub use error::{Error, Result};
pub use exactla::{Field, Matrix};
