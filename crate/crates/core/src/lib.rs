//! Exact computations with discriminant forms, their Weil representation,
//! self-dual isotropic subgroups and the Borcherds lift for the lattices `L_{N,N'}`.

pub mod arith;
pub mod borcherds;
pub mod cyclo;
pub mod error;
pub mod fqmod;
pub mod linalg;
pub mod lnn_catalog;
pub mod qseries;
pub mod rational;
pub mod repro;
pub mod subgroups;
pub mod weilrep;

pub use cyclo::CycNumber;
pub use error::{Error, Result};
pub use fqmod::{Element, FqModule, Mod1Rational};
