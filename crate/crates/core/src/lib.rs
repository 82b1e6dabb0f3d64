//! Exact rational computations with operads, their algebras and modules
//! over bounded cochain complexes: lax products and inner homs, jets and
//! connections, Atiyah classes, curvature forms, Bianchi witnesses and the
//! Maurer–Cartan deformation pipeline.

pub mod algebra;
pub mod complexes;
pub mod connection;
pub mod curvature;
pub mod error;
pub mod io;
pub mod lax;
pub mod linalg;
pub mod modules;
pub mod operad;
pub mod perm;
pub mod rational;

pub use error::{Error, Result};
