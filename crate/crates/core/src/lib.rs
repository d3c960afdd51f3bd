//! Local cochains, Čech double complexes and explicit contractions on finite
//! cover models.
//!
//! The crate computes with three cochain species over a finite space `X`
//! with an open cover `𝔘`: local cochains on the diagonal neighbourhoods
//! `𝔘[n]`, Čech pages of the double complex `Č^p(𝔘, A^q)`, and ordered
//! simplicial cochains on a model complex. Cohomology is computed exactly
//! (rational or modular elimination, Smith normal form over `ℤ`), and the
//! chain contractions relating the complexes are implemented as explicit
//! operators whose identities can be checked pointwise.

/// Version of this crate, recorded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod bicomplex;
pub mod coeff;
pub mod compare;
pub mod complexes;
pub mod fixtures;
pub mod homology;
pub mod loopfill;
pub mod model;
pub mod pou;

pub use coeff::{CoefficientSystem, Coefficients, Integers, PrimeField, Rationals, RealVectors};
pub use model::{CoverModel, ModelError, Tuple, TupleSet};
