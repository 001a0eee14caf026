pub mod dmrg;
pub mod effective;
pub mod error;
pub mod glass;
pub mod ground;
pub mod lanczos;
pub mod lattice;
pub mod observables;
pub mod site;
pub mod sparse;
pub mod sweep;

pub use error::{Error, Result};
